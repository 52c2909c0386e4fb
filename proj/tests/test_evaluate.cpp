#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tfa/embedding.hpp"
#include "tfa/errors.hpp"
#include "tfa/evaluate.hpp"
#include "tfa/model.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

using namespace tfa;

namespace {

const CategorySpace kSpace{{"c1", "c2", "c3", "c4"}};

PartitionTree balanced4() { return parse_tree("((c1 c2) (c3 c4))", kSpace); }

// Single-state posterior whose implied distribution is uniform (psi = 0).
PosteriorDraws point_mass_uniform(int m, int k) {
  PosteriorDraws draws;
  ModelState s;
  s.Lambda = Eigen::MatrixXd::Zero(m, k);
  s.Eta = Eigen::MatrixXd::Zero(k, 3);
  s.Mu = Eigen::VectorXd::Zero(3);
  s.Phi = Eigen::MatrixXd::Ones(m, k);
  s.Delta = Eigen::VectorXd::Ones(k);
  s.Rho = Eigen::VectorXd::Zero(k);
  draws.draws.push_back(std::move(s));
  return draws;
}

CountMatrix make_counts(const CountTable& table) {
  CountMatrix counts;
  counts.categories = kSpace.labels;
  counts.counts = table;
  for (int i = 0; i < table.rows(); ++i) counts.locations.push_back("l" + std::to_string(i));
  return counts;
}

}  // namespace

TEST_CASE("zero totals replicate to all-zero rows") {
  const PartitionTree tree = balanced4();
  const PosteriorDraws draws = point_mass_uniform(2, 1);
  Eigen::VectorXd totals(2);
  totals << 0.0, 12.0;
  Rng rng(101);
  int seen = 0;
  factor_predictive_stream(draws, tree, totals, 3, rng, [&](const Eigen::MatrixXd& rep) {
    ++seen;
    CHECK(rep.row(0).sum() == 0.0);
    CHECK(rep.row(1).sum() == doctest::Approx(12.0));
  });
  CHECK(seen == 3);
}

TEST_CASE("uniform point-mass posterior: cell means approach n/4") {
  const PartitionTree tree = balanced4();
  const PosteriorDraws draws = point_mass_uniform(1, 1);
  Eigen::VectorXd totals(1);
  totals << 8.0;
  Rng rng(102);
  const int reps = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  factor_predictive_stream(draws, tree, totals, reps, rng,
                           [&](const Eigen::MatrixXd& rep) { mean += rep.row(0); });
  mean /= static_cast<double>(reps);
  const double se = std::sqrt(8.0 * 0.25 * 0.75 / reps);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(mean[j] - 2.0) < 3.0 * se);
}

TEST_CASE("PPL weights pinned by a hand computation on M = 2") {
  // two replicates, so per-cell E and V have explicit forms
  Eigen::MatrixXd r1(2, 4), r2(2, 4), observed(2, 4);
  r1 << 4, 2, 1, 1,
        0, 3, 3, 2;
  r2 << 2, 2, 2, 2,
        1, 1, 3, 3;
  observed << 3, 2, 2, 1,
              1, 2, 2, 3;
  PredictiveAccumulator acc(2, 4);
  acc.add(r1);
  acc.add(r2);
  const PredictiveSummary summary = acc.finalize(observed);
  const Eigen::MatrixXd mean = 0.5 * (r1 + r2);
  // sample variance with denominator 1: ((r1-m)^2 + (r2-m)^2)
  const Eigen::MatrixXd var =
      (r1 - mean).cwiseProduct(r1 - mean) + (r2 - mean).cwiseProduct(r2 - mean);
  const double expect =
      var.sum() / 2.0 + (observed - mean).squaredNorm() / 3.0;  // 1/M and 1/(M+1)
  CHECK(summary.ppl == doctest::Approx(expect).epsilon(1e-12));
  CHECK(summary.mean == mean);
  // per-category decomposition definitions
  for (int j = 0; j < 4; ++j) {
    CHECK(summary.bias_per_category[j] ==
          doctest::Approx((observed.col(j) - mean.col(j)).sum() / 2.0));
    CHECK(summary.variance_per_category[j] == doctest::Approx(var.col(j).sum() / 2.0));
  }
}

TEST_CASE("perfect-fit degenerate stream gives PPL = 0") {
  Eigen::MatrixXd y(2, 4);
  y << 3, 1, 2, 2,
       5, 0, 1, 2;
  PredictiveAccumulator acc(2, 4);
  acc.add(y);
  acc.add(y);
  acc.add(y);
  const PredictiveSummary summary = acc.finalize(y);
  CHECK(summary.ppl == doctest::Approx(0.0));
  CHECK(summary.variance.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("Monte Carlo PPL matches the closed multinomial form within 1%") {
  const PartitionTree tree = balanced4();
  const int m = 3;
  const PosteriorDraws draws = point_mass_uniform(m, 1);
  CountTable table(m, 4);
  table << 3, 1, 2, 2,
           0, 4, 4, 0,
           5, 5, 5, 5;
  const CountMatrix observed = make_counts(table);
  Rng rng(103);
  const PredictiveSummary summary = ppl_factor(draws, observed, tree, 100000, rng);
  // exact multinomial moments under p = (1/4,...): E = n/4, V = n * 3/16
  double expect = 0.0;
  const Eigen::VectorXd totals = observed.row_totals();
  for (int i = 0; i < m; ++i) {
    expect += 4.0 * (totals[i] * 0.25 * 0.75) / m;
    for (int j = 0; j < 4; ++j) {
      const double err = static_cast<double>(table(i, j)) - totals[i] * 0.25;
      expect += err * err / (m + 1.0);
    }
  }
  CHECK(std::abs(summary.ppl - expect) / expect < 0.01);
}

TEST_CASE("PPL is invariant to permuting locations and categories") {
  const PartitionTree tree = balanced4();
  const PosteriorDraws draws = point_mass_uniform(2, 1);
  CountTable table(2, 4);
  table << 6, 1, 1, 0,
           2, 2, 2, 2;
  const CountMatrix observed = make_counts(table);
  Rng rng(104);
  const PredictiveSummary base = ppl_factor(draws, observed, tree, 20000, rng);

  // swap the two locations; the posterior is exchangeable here (uniform p)
  CountTable swapped = table;
  swapped.row(0).swap(swapped.row(1));
  CountMatrix observed_swapped = make_counts(swapped);
  Rng rng2(104);
  const PredictiveSummary after = ppl_factor(draws, observed_swapped, tree, 20000, rng2);
  CHECK(after.ppl == doctest::Approx(base.ppl).epsilon(0.02));

  // permuting categories: uniform point mass is symmetric across categories
  CountTable cols = table;
  cols.col(0).swap(cols.col(3));
  CountMatrix observed_cols = make_counts(cols);
  Rng rng3(104);
  const PredictiveSummary after_cols = ppl_factor(draws, observed_cols, tree, 20000, rng3);
  CHECK(after_cols.ppl == doctest::Approx(base.ppl).epsilon(0.02));
}

TEST_CASE("bias decomposition sums to the total residual") {
  Eigen::MatrixXd r1(3, 4), r2(3, 4), observed(3, 4);
  Rng rng(105);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      r1(i, j) = std::floor(10.0 * rng.uniform());
      r2(i, j) = std::floor(10.0 * rng.uniform());
      observed(i, j) = std::floor(10.0 * rng.uniform());
    }
  }
  PredictiveAccumulator acc(3, 4);
  acc.add(r1);
  acc.add(r2);
  const PredictiveSummary summary = acc.finalize(observed);
  const double total = (observed - summary.mean).sum();
  CHECK(summary.bias_per_category.sum() * 3.0 == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("variance estimation requires at least two replications") {
  PredictiveAccumulator acc(1, 4);
  Eigen::MatrixXd rep = Eigen::MatrixXd::Zero(1, 4);
  acc.add(rep);
  CHECK_THROWS_AS(acc.finalize(rep), ValidationError);
}
