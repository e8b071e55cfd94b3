// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "latefuse/evaluation.hpp"
#include "latefuse/fusion.hpp"
#include "latefuse/rng.hpp"

using namespace latefuse;

TEST_CASE("rmse: basics") {
  CHECK(rmse(DenseVector{1, 2, 3}, DenseVector{1, 2, 3}) == 0.0);
  CHECK(rmse(DenseVector{3, 4}, DenseVector{0, 0}) ==
        doctest::Approx(std::sqrt(25.0 / 2.0)).epsilon(1e-12));
  CHECK(rmse(DenseVector{5, 6, 7}, DenseVector{4, 5, 6}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(rmse(DenseVector{1}, DenseVector{1, 2}), LengthMismatchError);
  CHECK_THROWS_AS(rmse(DenseVector{}, DenseVector{}), EmptyInputError);
}

TEST_CASE("rmsess: basics") {
  const DenseVector truth{1, 2, 3, 4};
  const DenseVector clim{2, 3, 4, 5};
  CHECK(rmsess(truth, truth, clim) == 1.0);
  CHECK(rmsess(clim, truth, clim) == 0.0);

  // rmse_model 1, rmse_clim 2 -> 0.5
  const DenseVector pred{2, 3, 4, 5};
  const DenseVector clim2{3, 4, 5, 6};
  CHECK(rmsess(pred, truth, clim2) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(rmsess(pred, truth, truth), DegenerateClimatologyError);
}

TEST_CASE("rmsess: strictly decreasing in model error") {
  const DenseVector truth{0, 0, 0};
  const DenseVector clim{2, 2, 2};
  double prev = 1.0;
  for (double err : {0.5, 1.0, 1.5, 2.5}) {
    const double score = rmsess(DenseVector{err, err, err}, truth, clim);
    CHECK(score < prev);
    prev = score;
  }
}

namespace {

DenseMatrix column_matrix(const DenseVector& v) {
  DenseMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

}  // namespace

TEST_CASE("compare_frameworks: single framework single channel") {
  const std::vector<std::string> channels{"x"};
  const DenseMatrix truth = column_matrix({1, 2, 3, 4});
  const DenseMatrix clim = column_matrix({3, 4, 5, 6});
  const DenseMatrix pred = column_matrix({2, 3, 4, 5});
  std::vector<FrameworkPredictions> frameworks{{"late_fusion", pred}};

  const SkillReport report = compare_frameworks(frameworks, truth, clim, channels, 5);
  REQUIRE(report.rows.size() == 2);  // framework row + climatology row
  const SkillRow* row = report.find("x", 5, "late_fusion");
  REQUIRE(row != nullptr);
  CHECK(row->rmse_model == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row->rmse_clim == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(row->rmsess == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("compare_frameworks: identical predictions give identical rows") {
  const std::vector<std::string> channels{"x"};
  const DenseMatrix truth = column_matrix({1, 2, 3});
  const DenseMatrix clim = column_matrix({2, 4, 2});
  const DenseMatrix pred = column_matrix({1.5, 2.25, 3.5});
  std::vector<FrameworkPredictions> frameworks{{framework::late_fusion, pred},
                                               {framework::best_model, pred}};
  const SkillReport report = compare_frameworks(frameworks, truth, clim, channels, 1);
  const SkillRow* a = report.find("x", 1, framework::late_fusion);
  const SkillRow* b = report.find("x", 1, framework::best_model);
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  CHECK(a->rmse_model == b->rmse_model);
  CHECK(a->rmsess == b->rmsess);
}

TEST_CASE("compare_frameworks: climatology row is exactly zero") {
  Rng rng(3);
  const std::vector<std::string> channels{"a", "b"};
  DenseMatrix truth(10, 2), clim(10, 2), pred(10, 2);
  for (auto* m : {&truth, &clim, &pred}) {
    for (double& v : m->entries()) v = rng.next_uniform(-5.0, 5.0);
  }
  const SkillReport report = compare_frameworks(
      std::vector<FrameworkPredictions>{{"late_fusion", pred}}, truth, clim, channels, 7);
  for (const auto& name : channels) {
    const SkillRow* row = report.find(name, 7, framework::climatology);
    REQUIRE(row != nullptr);
    CHECK(row->rmsess == 0.0);
  }
}

TEST_CASE("compare_frameworks: misaligned shapes") {
  const std::vector<std::string> channels{"x"};
  const DenseMatrix truth = column_matrix({1, 2, 3});
  CHECK_THROWS_AS(compare_frameworks(std::vector<FrameworkPredictions>{{"f", DenseMatrix(2, 1)}},
                                     truth, truth, channels, 0),
                  MisalignedSamplesError);
  CHECK_THROWS_AS(compare_frameworks({}, truth, DenseMatrix(3, 2), channels, 0),
                  MisalignedSamplesError);
}

TEST_CASE("cross-module identity: N * fused_rmse^2 equals w'Mw on the fitting set") {
  Rng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 1 + std::size_t(rng.next_below(6));
    const std::size_t n = k + 2 + std::size_t(rng.next_below(60));
    EnsemblePredictions preds;
    preds.channel = "x";
    preds.predictions = DenseMatrix(k, n);
    DenseVector targets(n);
    for (double& t : targets) t = rng.next_uniform(-2.0, 2.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        preds.predictions(j, i) = targets[i] + rng.next_uniform(-1.5, 1.5);
      }
    }
    const ErrorMatrix m = error_correlation(preds, targets);
    const FusionWeights w = solve_weights(m);
    const double fused_rmse = rmse(fuse(preds, w), targets);
    const double lhs = static_cast<double>(n) * fused_rmse * fused_rmse;
    const double rhs = expected_sq_error(m, w);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

namespace {

EnsembleLeadData synthetic_lead(Rng& rng, std::size_t k, std::int64_t lead_time) {
  const std::size_t n_val = 40, n_test = 50;
  EnsembleLeadData lead;
  lead.lead_time = lead_time;
  lead.channels = {"a", "b"};
  lead.val_targets = DenseMatrix(n_val, 2);
  lead.test_targets = DenseMatrix(n_test, 2);
  lead.test_climatology = DenseMatrix(n_test, 2);
  for (double& v : lead.val_targets.entries()) v = rng.next_uniform(-2.0, 2.0);
  for (double& v : lead.test_targets.entries()) v = rng.next_uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < lead.test_climatology.entries().size(); ++i) {
    lead.test_climatology.entries()[i] =
        lead.test_targets.entries()[i] + rng.next_uniform(0.5, 1.5);
  }
  for (std::size_t j = 0; j < k; ++j) {
    DenseMatrix val(n_val, 2), test(n_test, 2);
    for (std::size_t i = 0; i < val.entries().size(); ++i) {
      val.entries()[i] = lead.val_targets.entries()[i] + rng.next_uniform(-1.0, 1.0);
    }
    for (std::size_t i = 0; i < test.entries().size(); ++i) {
      test.entries()[i] = lead.test_targets.entries()[i] + rng.next_uniform(-1.0, 1.0);
    }
    lead.val_predictions.push_back(std::move(val));
    lead.test_predictions.push_back(std::move(test));
  }
  return lead;
}

}  // namespace

TEST_CASE("ensemble_size_sweep: size one collapses to the single model") {
  Rng rng(31);
  const std::vector<EnsembleLeadData> leads{synthetic_lead(rng, 4, 5)};
  const std::vector<std::size_t> sizes{1};
  const auto sweep = ensemble_size_sweep(leads, sizes);
  REQUIRE(sweep.size() == 1);
  CHECK(sweep[0].late_fusion_rmsess == sweep[0].best_model_rmsess);
}

TEST_CASE("ensemble_size_sweep: deterministic and pool-checked") {
  Rng rng(37);
  const std::vector<EnsembleLeadData> leads{synthetic_lead(rng, 5, 5), synthetic_lead(rng, 5, 10)};
  const std::vector<std::size_t> sizes{1, 3, 5};
  const auto a = ensemble_size_sweep(leads, sizes);
  const auto b = ensemble_size_sweep(leads, sizes);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].late_fusion_rmsess == b[i].late_fusion_rmsess);
    CHECK(a[i].best_model_rmsess == b[i].best_model_rmsess);
  }
  const std::vector<std::size_t> too_big{6};
  CHECK_THROWS_AS(ensemble_size_sweep(leads, too_big), PoolTooSmallError);
}
