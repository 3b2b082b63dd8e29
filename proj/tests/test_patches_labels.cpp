#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "advxfer/core/npy.hpp"
#include "advxfer/dataset/labels.hpp"
#include "advxfer/dataset/patch.hpp"

using namespace advxfer;
using namespace advxfer::dataset;

TEST_CASE("patch extraction tiles without overlap", "[patches]") {
  Tensor big({1, 512, 512});
  for (std::size_t i = 0; i < big.size(); ++i)
    big[i] = static_cast<float>(i % 251) / 255.0f;

  const auto four = extract_patches(big, "img0", 256);
  REQUIRE(four.size() == 4);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(four[static_cast<std::size_t>(i)].patch_index == i);
    REQUIRE(four[static_cast<std::size_t>(i)].source_id == "img0");
    REQUIRE(four[static_cast<std::size_t>(i)].pixels.shape() == Shape3{1, 256, 256});
  }
  // row-major order: patch 1 starts at column 256 of row 0
  REQUIRE(four[1].pixels.at(0, 0, 0) == big.at(0, 0, 256));
  REQUIRE(four[2].pixels.at(0, 0, 0) == big.at(0, 256, 0));

  // exact-size image -> one patch identical to the input
  Tensor exact({1, 256, 256});
  for (std::size_t i = 0; i < exact.size(); ++i) exact[i] = big[i];
  const auto one = extract_patches(exact, "img1", 256);
  REQUIRE(one.size() == 1);
  REQUIRE(max_abs_diff(one[0].pixels, exact) == 0.0f);

  // remainder is discarded
  Tensor odd({1, 300, 300}, 0.5f);
  REQUIRE(extract_patches(odd, "img2", 256).size() == 1);

  Tensor small({1, 100, 255}, 0.1f);
  REQUIRE_THROWS_AS(extract_patches(small, "img3", 256), std::invalid_argument);
}

TEST_CASE("standard table enumerates Table-1 classes in order", "[labels]") {
  const auto table = ManipulationTable::standard();
  REQUIRE(table.num_fine() == 16);
  REQUIRE(table.fine(0).spec.kind == Manipulation::kUnaltered);
  const double awgn[] = {0.5, 1.0, 1.5, 2.0, 2.5};
  const double blur[] = {1.0, 1.5, 2.0, 2.5, 3.0};
  const double medw[] = {3, 5, 7, 9, 11};
  for (int i = 0; i < 5; ++i) {
    REQUIRE(table.fine(1 + i).spec.kind == Manipulation::kAwgn);
    REQUIRE(table.fine(1 + i).spec.parameter == awgn[i]);
    REQUIRE(table.fine(6 + i).spec.kind == Manipulation::kGaussianBlur);
    REQUIRE(table.fine(6 + i).spec.parameter == blur[i]);
    REQUIRE(table.fine(11 + i).spec.kind == Manipulation::kMedianFilter);
    REQUIRE(table.fine(11 + i).spec.parameter == medw[i]);
  }
  REQUIRE_THROWS_AS(table.fine(16), std::out_of_range);
  REQUIRE_THROWS_AS(ManipulationTable({}, {}, {4}), std::invalid_argument);
  REQUIRE_THROWS_AS(ManipulationTable({-1.0}, {}, {}), std::invalid_argument);
}

TEST_CASE("class definitions coarsen fine labels", "[labels]") {
  const auto table = ManipulationTable::standard();
  const auto det = make_class_definition(ClassMode::kDetector, table);
  const auto cls = make_class_definition(ClassMode::kClassifier, table);
  const auto par = make_class_definition(ClassMode::kParameterizer, table);
  REQUIRE(det.num_classes == 2);
  REQUIRE(cls.num_classes == 4);
  REQUIRE(par.num_classes == 16);

  // unaltered maps to class 0 under every definition
  REQUIRE(coarsen(table.fine(0), det) == 0);
  REQUIRE(coarsen(table.fine(0), cls) == 0);
  REQUIRE(coarsen(table.fine(0), par) == 0);

  // (median, window 5) sits in the shared median-filtering class
  REQUIRE(coarsen(table.fine(12), cls) == 3);
  REQUIRE(coarsen(table.fine(11), cls) == coarsen(table.fine(15), cls));

  // (awgn, sigma 1) keeps its own class under the parameterizer
  REQUIRE(coarsen(table.fine(2), par) == 2);
  for (int f = 0; f < 16; ++f) REQUIRE(coarsen(table.fine(f), par) == f);

  for (int f = 1; f < 16; ++f) {
    REQUIRE(coarsen(table.fine(f), det) == 1);
    const auto kind = table.fine(f).spec.kind;
    const int want = kind == Manipulation::kAwgn ? 1
                     : kind == Manipulation::kGaussianBlur ? 2 : 3;
    REQUIRE(coarsen(table.fine(f), cls) == want);
  }

  REQUIRE_THROWS_AS(coarsen(FineLabel{16, {}}, det), std::out_of_range);
}

TEST_CASE("coarsening commutativity over randomized tables", "[labels][property]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> count(0, 5);
    std::vector<double> awgn, blur, medw;
    for (int i = 0, n = count(rng); i < n; ++i) awgn.push_back(0.5 * (i + 1));
    for (int i = 0, n = count(rng); i < n; ++i) blur.push_back(0.5 * (i + 1));
    for (int i = 0, n = count(rng); i < n; ++i) medw.push_back(2 * i + 3);
    if (awgn.empty() && blur.empty() && medw.empty()) medw.push_back(3);

    const ManipulationTable table(awgn, blur, medw);
    const auto det = make_class_definition(ClassMode::kDetector, table);
    const auto cls = make_class_definition(ClassMode::kClassifier, table);
    const auto par = make_class_definition(ClassMode::kParameterizer, table);

    for (int f = 0; f < table.num_fine(); ++f) {
      const FineLabel& label = table.fine(f);
      const bool unaltered = f == 0;
      REQUIRE((coarsen(label, det) == 0) == unaltered);
      REQUIRE((coarsen(label, cls) == 0) == unaltered);
      REQUIRE((coarsen(label, par) == 0) == unaltered);
      // two fine labels in one classifier class share a detector class
      for (int g = 0; g < table.num_fine(); ++g)
        if (coarsen(table.fine(g), cls) == coarsen(label, cls))
          REQUIRE(coarsen(table.fine(g), det) == coarsen(label, det));
    }
  }
}

TEST_CASE("npy round trip is bit exact", "[npy]") {
  Tensor t({2, 3, 5});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> unif(0.0f, 1.0f);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = unif(rng);

  const auto path = std::filesystem::temp_directory_path() / "advxfer_npy_test.npy";
  write_npy(path, t);
  const Tensor back = read_npy(path);
  REQUIRE(back.shape() == t.shape());
  REQUIRE(max_abs_diff(back, t) == 0.0f);
  std::filesystem::remove(path);
}
