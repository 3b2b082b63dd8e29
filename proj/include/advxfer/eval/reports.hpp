#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advxfer/eval/metrics.hpp"
#include "advxfer/eval/reference_tables.hpp"

namespace advxfer::eval {

namespace fs = std::filesystem;
using nlohmann::json;

/// One report: a labeled grid of optional values plus an unweighted average
/// row. Emitted as a structured JSON file and an aligned plain-text table.
/// Reports carry the run digest and seed but no timestamps, so re-running
/// evaluation over the same manifests reproduces them byte for byte.
struct ReportTable {
  std::string name;
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::string> notes;
  bool with_average_row = true;
};

inline std::vector<std::optional<double>> average_row(const ReportTable& t) {
  std::vector<std::optional<double>> avg;
  for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
    std::vector<std::optional<double>> col;
    for (const auto& row : t.values) col.push_back(row.at(c));
    avg.push_back(mean_defined(col));
  }
  return avg;
}

inline json report_to_json(const ReportTable& t, const std::string& run_digest,
                           std::uint64_t seed) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    json vals = json::array();
    for (const auto& v : t.values.at(r))
      vals.push_back(v.has_value() ? json(*v) : json(nullptr));
    rows.push_back(json{{"label", t.row_labels[r]}, {"values", vals}});
  }
  json avg = json::array();
  if (t.with_average_row)
    for (const auto& v : average_row(t))
      avg.push_back(v.has_value() ? json(*v) : json(nullptr));
  return json{{"table", t.name},       {"title", t.title},
              {"run_digest", run_digest}, {"seed", seed},
              {"columns", t.col_labels}, {"rows", rows},
              {"average", avg},        {"notes", t.notes}};
}

inline std::string format_cell(const std::optional<double>& v) {
  if (!v.has_value()) return "--";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

inline std::string report_to_text(const ReportTable& t, const std::string& run_digest,
                                  std::uint64_t seed) {
  std::size_t label_w = 12;
  for (const auto& l : t.row_labels) label_w = std::max(label_w, l.size() + 2);
  std::size_t col_w = 10;
  for (const auto& c : t.col_labels) col_w = std::max(col_w, c.size() + 2);

  std::string out = t.title + "\n";
  out += "run " + run_digest + "  seed " + std::to_string(seed) + "\n";
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 1, ' ');
  };
  out += pad("", label_w);
  for (const auto& c : t.col_labels) out += pad(c, col_w);
  out += "\n";
  out += std::string(label_w + col_w * t.col_labels.size(), '-') + "\n";
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    out += pad(t.row_labels[r], label_w);
    for (const auto& v : t.values.at(r)) out += pad(format_cell(v), col_w);
    out += "\n";
  }
  if (t.with_average_row) {
    out += std::string(label_w + col_w * t.col_labels.size(), '-') + "\n";
    out += pad("Average", label_w);
    for (const auto& v : average_row(t)) out += pad(format_cell(v), col_w);
    out += "\n";
  }
  for (const auto& n : t.notes) out += "note: " + n + "\n";
  return out;
}

inline void write_report(const fs::path& dir, const ReportTable& t,
                         const std::string& run_digest, std::uint64_t seed) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / (t.name + ".json"));
    if (!out) throw std::runtime_error("cannot write report " + t.name);
    out << report_to_json(t, run_digest, seed).dump(2) << "\n";
  }
  {
    std::ofstream out(dir / (t.name + ".txt"));
    out << report_to_text(t, run_digest, seed);
  }
}

inline const char* def_title(dataset::ClassMode m) {
  switch (m) {
    case dataset::ClassMode::kDetector: return "Manip. Detector";
    case dataset::ClassMode::kClassifier: return "Manip. Classifier";
    case dataset::ClassMode::kParameterizer: return "Manip. Parameterizer";
  }
  return "?";
}

inline const std::array<dataset::ClassMode, 3> kDefOrder = {
    dataset::ClassMode::kDetector, dataset::ClassMode::kClassifier,
    dataset::ClassMode::kParameterizer};

/// Baseline accuracy grid (rows: architectures, columns: class definitions).
inline ReportTable build_baseline_report(const std::vector<BaselineCell>& cells,
                                         const std::vector<std::string>& archs) {
  ReportTable t;
  t.name = "baseline_accuracy";
  t.title = "Baseline classification accuracy";
  for (const auto& d : kDefOrder) t.col_labels.push_back(def_title(d));
  for (const auto& arch : archs) {
    t.row_labels.push_back(arch);
    std::vector<std::optional<double>> row(3);
    for (const auto& c : cells)
      if (c.arch == arch)
        for (std::size_t i = 0; i < 3; ++i)
          if (kDefOrder[i] == c.def) row[i] = c.accuracy;
    for (std::size_t i = 0; i < 3; ++i)
      if (!row[i].has_value())
        t.notes.push_back("missing model: " + arch + "/" +
                          dataset::class_mode_name(kDefOrder[i]));
    t.values.push_back(std::move(row));
  }
  return t;
}

/// Perfect-knowledge SAR grid from the self cells of a transfer matrix.
inline ReportTable build_perfect_knowledge_report(
    const std::vector<TransferRecord>& records, attacks::AttackKind attack,
    const std::vector<std::string>& archs) {
  ReportTable t;
  t.name = std::string("perfect_knowledge_") + attacks::attack_name(attack);
  t.title = std::string("Perfect-knowledge SAR, ") + attacks::attack_name(attack);
  for (const auto& d : kDefOrder) t.col_labels.push_back(def_title(d));
  for (const auto& arch : archs) {
    t.row_labels.push_back(arch);
    std::vector<std::optional<double>> row(3);
    for (const auto& r : records)
      if (r.arch == arch && r.attack == attack && r.known_def == r.unknown_def)
        for (std::size_t i = 0; i < 3; ++i)
          if (kDefOrder[i] == r.known_def) row[i] = r.sar_known;
    for (std::size_t i = 0; i < 3; ++i)
      if (!row[i].has_value())
        t.notes.push_back("missing attack cell: " + arch + "/" +
                          dataset::class_mode_name(kDefOrder[i]));
    t.values.push_back(std::move(row));
  }
  return t;
}

/// One transfer table (SAR and T-score columns for both unknown definitions)
/// for a fixed attack and known class definition.
inline ReportTable build_transfer_report(const std::vector<TransferRecord>& records,
                                         attacks::AttackKind attack,
                                         dataset::ClassMode known,
                                         const std::vector<std::string>& archs) {
  std::vector<dataset::ClassMode> unknowns;
  for (const auto& d : kDefOrder)
    if (d != known) unknowns.push_back(d);

  ReportTable t;
  t.name = std::string("transfer_") + attacks::attack_name(attack) + "_known_" +
           dataset::class_mode_name(known);
  t.title = std::string("Transferability, ") + attacks::attack_name(attack) +
            " crafted against the " + dataset::class_mode_name(known);
  for (const auto& u : unknowns) t.col_labels.push_back(std::string("SAR ") + def_title(u));
  for (const auto& u : unknowns) t.col_labels.push_back(std::string("T ") + def_title(u));

  for (const auto& arch : archs) {
    t.row_labels.push_back(arch);
    std::vector<std::optional<double>> row(4);
    bool any = false;
    for (const auto& r : records) {
      if (r.arch != arch || r.attack != attack || r.known_def != known) continue;
      for (std::size_t i = 0; i < unknowns.size(); ++i)
        if (r.unknown_def == unknowns[i]) {
          row[i] = r.sar_unknown;
          row[2 + i] = r.t_score;
          any = true;
        }
    }
    if (!any)
      t.notes.push_back("missing row: no adversarial set for " + arch + "/" +
                        dataset::class_mode_name(known));
    t.values.push_back(std::move(row));
  }
  return t;
}

/// Regression over the published tables: recompute every T-score from the
/// fixture SARs. `max_deviation` reports the largest |computed - expected|.
struct FixtureRegression {
  ReportTable table;
  double max_row_deviation = 0.0;
  double max_avg_deviation = 0.0;
  int cells_checked = 0;
};

inline FixtureRegression fixture_regression(
    const reference::TransferTableFixture& fixture) {
  FixtureRegression out;
  ReportTable& t = out.table;
  t.name = std::string("regression_") + fixture.name;
  t.title = std::string("T-score regression, ") + fixture.name;
  t.col_labels = {"T(a) computed", "T(a) printed", "T(b) computed", "T(b) printed"};
  t.with_average_row = false;

  std::vector<std::optional<double>> avg_a, avg_b;
  for (const auto& row : fixture.rows) {
    const auto ta = transferability_score(row.sar_a, row.known_for_row);
    const auto tb = transferability_score(row.sar_b, row.known_for_row);
    t.row_labels.push_back(row.arch);
    t.values.push_back({ta, row.t_a, tb, row.t_b});
    out.max_row_deviation = std::max({out.max_row_deviation,
                                      std::abs(ta.value_or(0.0) - row.t_a),
                                      std::abs(tb.value_or(0.0) - row.t_b)});
    out.cells_checked += 2;
    avg_a.push_back(transferability_score(row.sar_a, row.known_for_avg));
    avg_b.push_back(transferability_score(row.sar_b, row.known_for_avg));
  }
  const auto mean_a = mean_defined(avg_a);
  const auto mean_b = mean_defined(avg_b);
  t.row_labels.push_back("Average");
  t.values.push_back({mean_a, fixture.avg_t_a, mean_b, fixture.avg_t_b});
  out.max_avg_deviation = std::max(std::abs(mean_a.value_or(0.0) - fixture.avg_t_a),
                                   std::abs(mean_b.value_or(0.0) - fixture.avg_t_b));
  out.cells_checked += 2;
  if (fixture.avg_t_a != fixture.avg_t_a_printed ||
      fixture.avg_t_b != fixture.avg_t_b_printed)
    t.notes.push_back("printed average corrected: recomputation from the table's "
                      "own rows disagrees with the printed cell");
  return out;
}

}  // namespace advxfer::eval
