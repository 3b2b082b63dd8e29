#include <catch_amalgamated.hpp>

#include <random>

#include "advxfer/eval/reports.hpp"

using namespace advxfer;
using namespace advxfer::eval;
using namespace advxfer::dataset;
using namespace advxfer::attacks;
using namespace advxfer::models;

namespace {

// 1-pixel threshold model: class 0 iff pixel > threshold.
TrainedModel threshold_model(float threshold, ClassMode mode = ClassMode::kDetector,
                             const std::string& arch = "toy") {
  TrainedModel m;
  m.arch = arch;
  m.def.mode = mode;
  m.def.num_classes = 2;
  m.def.fine_to_class = {0, 1};
  m.net = nn::Network({1, 1, 1});
  m.net.add(std::make_shared<nn::Dense>(Shape3{1, 1, 1}, 2));
  auto w = m.net.params();
  w[0] = 1.0f;        // logit0 = x - threshold
  w[1] = 0.0f;        // logit1 = 0
  w[2] = -threshold;
  w[3] = 0.0f;
  return m;
}

AdversarialExample pixel_adv(float value, AttackKind attack = AttackKind::kIfgsm) {
  AdversarialExample adv;
  adv.original = {Tensor({1, 1, 1}, value), "s", 0};
  adv.attacked = {Tensor({1, 1, 1}, value), "s", 0};
  adv.attack = attack;
  adv.fine_label = 1;
  return adv;
}

}  // namespace

TEST_CASE("SAR counts unaltered predictions over the attacked set", "[metrics]") {
  const auto m = threshold_model(0.5f);

  // 2190 of 6000 above threshold -> SAR 0.365
  std::vector<AdversarialExample> set;
  for (int i = 0; i < 2190; ++i) set.push_back(pixel_adv(1.0f));
  for (int i = 0; i < 3810; ++i) set.push_back(pixel_adv(0.0f));
  const auto r = successful_attack_rate(m, set);
  REQUIRE(r.n_total == 6000);
  REQUIRE(r.n_unaltered == 2190);
  REQUIRE(r.sar == 0.365);

  // brute-force recount agrees exactly
  long recount = 0;
  for (const auto& adv : set)
    if (predict(m, adv.attacked.pixels).label == 0) ++recount;
  REQUIRE(recount == r.n_unaltered);

  // boundary cases
  std::vector<AdversarialExample> all_hit(5, pixel_adv(1.0f));
  REQUIRE(successful_attack_rate(m, all_hit).sar == 1.0);
  std::vector<AdversarialExample> all_miss(5, pixel_adv(0.0f));
  REQUIRE(successful_attack_rate(m, all_miss).sar == 0.0);
  REQUIRE_THROWS_AS(successful_attack_rate(m, std::vector<AdversarialExample>{}),
                    std::invalid_argument);
}

TEST_CASE("transferability score is the SAR ratio with undefined at 0", "[metrics]") {
  REQUIRE(*transferability_score(0.365, 0.84) == Catch::Approx(0.435).margin(1e-3));
  REQUIRE(*transferability_score(0.0, 0.87) == 0.0);
  REQUIRE(*transferability_score(1.0, 1.0) == 1.0);
  REQUIRE_FALSE(transferability_score(0.5, 0.0).has_value());
  REQUIRE_THROWS_AS(transferability_score(1.2, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(transferability_score(0.5, -0.1), std::invalid_argument);

  // consistency: t * sar_known == sar_unknown to 1e-12
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double known = unif(rng);
    const double unknown = unif(rng);
    const auto t = transferability_score(unknown, known);
    if (known > 0.0) {
      REQUIRE(t.has_value());
      REQUIRE(std::abs(*t * known - unknown) < 1e-12);
    }
  }
}

TEST_CASE("transfer matrix emits one record per model pairing", "[metrics]") {
  // arch A: detector says unaltered above 0.5, classifier above 0.8 -> an
  // attack that lands at 0.6 fools the detector only.
  auto det = threshold_model(0.5f, ClassMode::kDetector, "archA");
  auto cls = threshold_model(0.8f, ClassMode::kClassifier, "archA");
  ModelGrid models;
  models["archA"][ClassMode::kDetector] = &det;
  models["archA"][ClassMode::kClassifier] = &cls;

  std::vector<AdversarialExample> adv_det(10, pixel_adv(0.6f));
  AdvGrid adv;
  adv["archA"][ClassMode::kDetector] = &adv_det;

  const auto records = transfer_matrix(models, adv, AttackKind::kIfgsm);
  REQUIRE(records.size() == 2);  // self + one sibling
  for (const auto& r : records) {
    REQUIRE(r.sar_known == 1.0);
    if (r.unknown_def == ClassMode::kDetector) {
      REQUIRE(r.sar_unknown == r.sar_known);  // perfect-knowledge self record
      REQUIRE(*r.t_score == 1.0);
    } else {
      REQUIRE(r.sar_unknown == 0.0);
      REQUIRE(*r.t_score == 0.0);
    }
  }

  // missing known model -> explicit error
  AdvGrid orphan;
  orphan["archA"][ClassMode::kParameterizer] = &adv_det;
  REQUIRE_THROWS_WITH(transfer_matrix(models, orphan, AttackKind::kIfgsm),
                      Catch::Matchers::ContainsSubstring("no matching known model"));
}

TEST_CASE("published transfer tables reconstruct within +-0.001", "[metrics][fixture]") {
  for (const auto& fixture : reference::kGanTransfer) {
    const auto reg = fixture_regression(fixture);
    INFO(fixture.name);
    REQUIRE(reg.cells_checked == 14);
    REQUIRE(reg.max_row_deviation <= 0.001);
    REQUIRE(reg.max_avg_deviation <= 0.001);
  }
  for (const auto& fixture : reference::kIfgsmTransfer) {
    const auto reg = fixture_regression(fixture);
    INFO(fixture.name);
    REQUIRE(reg.max_row_deviation <= 0.001);
    REQUIRE(reg.max_avg_deviation <= 0.001);
  }

  // spot values: (0.365, 0.84) -> 0.435 and (0.525, 0.97) -> 0.541
  const auto& t10 = reference::kGanTransfer[2];
  REQUIRE(t10.rows[0].sar_a == 0.365);
  REQUIRE(*transferability_score(t10.rows[0].sar_a, t10.rows[0].known_for_row) ==
          Catch::Approx(0.435).margin(1e-3));
  const auto& t9 = reference::kGanTransfer[1];
  REQUIRE(*transferability_score(t9.rows[5].sar_a, t9.rows[5].known_for_row) ==
          Catch::Approx(0.541).margin(1e-3));

  // printed SAR averages agree with their own columns
  for (const auto& fixture : reference::kGanTransfer) {
    double sa = 0.0, sb = 0.0;
    for (const auto& row : fixture.rows) {
      sa += row.sar_a;
      sb += row.sar_b;
    }
    REQUIRE(std::abs(sa / 6 - fixture.avg_sar_a) <= 0.001);
    REQUIRE(std::abs(sb / 6 - fixture.avg_sar_b) <= 0.001);
  }
}

TEST_CASE("published baseline averages agree with their rows", "[metrics][fixture]") {
  double d = 0.0, c = 0.0, p = 0.0;
  for (const auto& row : reference::kBaselineAccuracy) {
    d += row.detector;
    c += row.classifier;
    p += row.parameterizer;
  }
  REQUIRE(std::abs(d / 6 - reference::kBaselineAccuracyAverage.detector) <= 0.001);
  REQUIRE(std::abs(c / 6 - reference::kBaselineAccuracyAverage.classifier) <= 0.001);
  REQUIRE(std::abs(p / 6 - reference::kBaselineAccuracyAverage.parameterizer) <= 0.001);

  // detector fixture used by the accuracy op example
  REQUIRE(reference::kBaselineAccuracy[0].detector == 0.9984);
}

TEST_CASE("reports render deterministically with flagged gaps", "[reports]") {
  ReportTable t;
  t.name = "demo";
  t.title = "Demo table";
  t.col_labels = {"col0", "col1"};
  t.row_labels = {"rowA", "rowB"};
  t.values = {{0.5, std::nullopt}, {0.25, 1.0}};
  t.notes = {"missing model: rowA/col1"};

  const auto j = report_to_json(t, "digest123", 7);
  REQUIRE(j.at("run_digest") == "digest123");
  REQUIRE(j.at("seed") == 7);
  REQUIRE(j.at("rows")[0]["values"][1].is_null());
  // averages skip undefined cells
  REQUIRE(j.at("average")[0].get<double>() == 0.375);
  REQUIRE(j.at("average")[1].get<double>() == 1.0);

  const std::string txt = report_to_text(t, "digest123", 7);
  REQUIRE(txt.find("--") != std::string::npos);
  REQUIRE(txt.find("note: missing model") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "advxfer_report_test";
  std::filesystem::remove_all(dir);
  write_report(dir, t, "digest123", 7);
  const auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  const std::string j1 = read(dir / "demo.json");
  const std::string x1 = read(dir / "demo.txt");
  write_report(dir, t, "digest123", 7);
  REQUIRE(read(dir / "demo.json") == j1);
  REQUIRE(read(dir / "demo.txt") == x1);
  std::filesystem::remove_all(dir);
}
