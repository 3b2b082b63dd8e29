#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace advxfer::dataset {

enum class Manipulation { kUnaltered, kAwgn, kGaussianBlur, kMedianFilter };

inline const char* manipulation_name(Manipulation m) {
  switch (m) {
    case Manipulation::kUnaltered: return "unaltered";
    case Manipulation::kAwgn: return "awgn";
    case Manipulation::kGaussianBlur: return "gaussian_blur";
    case Manipulation::kMedianFilter: return "median_filter";
  }
  return "?";
}

inline Manipulation manipulation_from_name(const std::string& s) {
  if (s == "unaltered") return Manipulation::kUnaltered;
  if (s == "awgn") return Manipulation::kAwgn;
  if (s == "gaussian_blur") return Manipulation::kGaussianBlur;
  if (s == "median_filter") return Manipulation::kMedianFilter;
  throw std::invalid_argument("unknown manipulation kind: " + s);
}

/// One (operation, parameter) pair. The parameter is sigma in 0-255 pixel
/// units for AWGN, sigma in pixels for blurring, and an odd window size for
/// median filtering; it is unused for the unaltered kind.
struct ManipulationSpec {
  Manipulation kind = Manipulation::kUnaltered;
  double parameter = 0.0;

  std::string str() const {
    if (kind == Manipulation::kUnaltered) return "unaltered";
    return std::string(manipulation_name(kind)) + "(" +
           std::to_string(parameter) + ")";
  }
};

/// Fine class: index 0 is unaltered, indices >= 1 enumerate the manipulated
/// (kind, parameter) pairs in table order.
struct FineLabel {
  int index = 0;
  ManipulationSpec spec;
};

/// The fine-class table: unaltered plus every parameterized manipulation.
class ManipulationTable {
 public:
  ManipulationTable(std::vector<double> awgn_sigmas,
                    std::vector<double> blur_sigmas,
                    std::vector<double> median_windows) {
    labels_.push_back({0, {Manipulation::kUnaltered, 0.0}});
    auto add = [this](Manipulation kind, const std::vector<double>& params) {
      for (double p : params) {
        validate_param(kind, p);
        labels_.push_back({static_cast<int>(labels_.size()), {kind, p}});
      }
    };
    add(Manipulation::kAwgn, awgn_sigmas);
    add(Manipulation::kGaussianBlur, blur_sigmas);
    add(Manipulation::kMedianFilter, median_windows);
    if (labels_.size() < 2)
      throw std::invalid_argument("manipulation table needs at least one manipulated class");
  }

  // Default table: AWGN sigma 0.5..2.5, blur sigma 1..3, median window 3..11.
  static ManipulationTable standard() {
    return ManipulationTable({0.5, 1.0, 1.5, 2.0, 2.5},
                             {1.0, 1.5, 2.0, 2.5, 3.0},
                             {3, 5, 7, 9, 11});
  }

  int num_fine() const { return static_cast<int>(labels_.size()); }
  const FineLabel& fine(int index) const {
    if (index < 0 || index >= num_fine())
      throw std::out_of_range("fine label index " + std::to_string(index) +
                              " outside [0, " + std::to_string(num_fine() - 1) + "]");
    return labels_[static_cast<std::size_t>(index)];
  }
  const std::vector<FineLabel>& all() const { return labels_; }

  int num_kinds() const {
    bool seen[3] = {false, false, false};
    for (const auto& l : labels_) {
      if (l.spec.kind == Manipulation::kAwgn) seen[0] = true;
      if (l.spec.kind == Manipulation::kGaussianBlur) seen[1] = true;
      if (l.spec.kind == Manipulation::kMedianFilter) seen[2] = true;
    }
    return seen[0] + seen[1] + seen[2];
  }

 private:
  static void validate_param(Manipulation kind, double p) {
    switch (kind) {
      case Manipulation::kAwgn:
        if (p < 0) throw std::invalid_argument("awgn sigma must be >= 0");
        break;
      case Manipulation::kGaussianBlur:
        if (p <= 0) throw std::invalid_argument("blur sigma must be > 0");
        break;
      case Manipulation::kMedianFilter: {
        const int w = static_cast<int>(std::lround(p));
        if (w != p || w < 3 || w % 2 == 0)
          throw std::invalid_argument("median window must be an odd integer >= 3");
        break;
      }
      case Manipulation::kUnaltered:
        break;
    }
  }

  std::vector<FineLabel> labels_;
};

enum class ClassMode { kDetector, kClassifier, kParameterizer };

inline const char* class_mode_name(ClassMode m) {
  switch (m) {
    case ClassMode::kDetector: return "detector";
    case ClassMode::kClassifier: return "classifier";
    case ClassMode::kParameterizer: return "parameterizer";
  }
  return "?";
}

inline ClassMode class_mode_from_name(const std::string& s) {
  if (s == "detector") return ClassMode::kDetector;
  if (s == "classifier") return ClassMode::kClassifier;
  if (s == "parameterizer") return ClassMode::kParameterizer;
  throw std::invalid_argument("unknown class definition: " + s +
                              " (expected detector|classifier|parameterizer)");
}

/// A surjective coarsening of fine labels onto output classes. All modes map
/// fine label 0 to class 0 ("unaltered").
struct ClassDefinition {
  ClassMode mode = ClassMode::kDetector;
  int num_classes = 2;
  std::vector<int> fine_to_class;  // indexed by fine label
};

inline ClassDefinition make_class_definition(ClassMode mode,
                                             const ManipulationTable& table) {
  ClassDefinition def;
  def.mode = mode;
  const int nf = table.num_fine();
  def.fine_to_class.resize(static_cast<std::size_t>(nf));
  def.fine_to_class[0] = 0;
  switch (mode) {
    case ClassMode::kDetector:
      def.num_classes = 2;
      for (int f = 1; f < nf; ++f) def.fine_to_class[static_cast<std::size_t>(f)] = 1;
      break;
    case ClassMode::kClassifier: {
      // one class per editing operation, in first-appearance order
      std::vector<Manipulation> kinds;
      for (int f = 1; f < nf; ++f) {
        const Manipulation k = table.fine(f).spec.kind;
        int idx = -1;
        for (std::size_t i = 0; i < kinds.size(); ++i)
          if (kinds[i] == k) idx = static_cast<int>(i);
        if (idx < 0) {
          kinds.push_back(k);
          idx = static_cast<int>(kinds.size()) - 1;
        }
        def.fine_to_class[static_cast<std::size_t>(f)] = 1 + idx;
      }
      def.num_classes = 1 + static_cast<int>(kinds.size());
      break;
    }
    case ClassMode::kParameterizer:
      def.num_classes = nf;
      for (int f = 0; f < nf; ++f) def.fine_to_class[static_cast<std::size_t>(f)] = f;
      break;
  }
  return def;
}

inline int coarsen(const FineLabel& label, const ClassDefinition& def) {
  if (label.index < 0 ||
      label.index >= static_cast<int>(def.fine_to_class.size()))
    throw std::out_of_range("coarsen: fine label " + std::to_string(label.index) +
                            " outside the class definition's table");
  return def.fine_to_class[static_cast<std::size_t>(label.index)];
}

inline int coarsen(int fine_index, const ClassDefinition& def) {
  if (fine_index < 0 ||
      fine_index >= static_cast<int>(def.fine_to_class.size()))
    throw std::out_of_range("coarsen: fine label " + std::to_string(fine_index) +
                            " outside the class definition's table");
  return def.fine_to_class[static_cast<std::size_t>(fine_index)];
}

}  // namespace advxfer::dataset
