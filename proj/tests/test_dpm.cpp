#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "tfa/dpm.hpp"
#include "tfa/embedding.hpp"
#include "tfa/errors.hpp"
#include "tfa/rng.hpp"

using namespace tfa;

namespace {

CountMatrix make_counts(const std::vector<std::vector<long long>>& rows,
                        int n_categories) {
  CountMatrix counts;
  for (int j = 0; j < n_categories; ++j) counts.categories.push_back("c" + std::to_string(j + 1));
  counts.counts.resize(static_cast<Eigen::Index>(rows.size()), n_categories);
  for (size_t i = 0; i < rows.size(); ++i) {
    counts.locations.push_back("l" + std::to_string(i));
    for (int j = 0; j < n_categories; ++j) {
      counts.counts(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<size_t>(j)];
    }
  }
  return counts;
}

// Exhaustive set partitions of {0..m-1} as assignment vectors with dense ids.
void enumerate_partitions_rec(int next, int m, std::vector<int>& assignment, int k,
                              std::vector<std::vector<int>>& out) {
  if (next == m) {
    out.push_back(assignment);
    return;
  }
  for (int c = 0; c <= k; ++c) {
    assignment[static_cast<size_t>(next)] = c;
    enumerate_partitions_rec(next + 1, m, assignment, std::max(k, c + 1), out);
  }
}

std::vector<std::vector<int>> enumerate_partitions(int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> assignment(static_cast<size_t>(m), 0);
  enumerate_partitions_rec(1, m, assignment, 1, out);
  return out;
}

// log marginal likelihood of one cluster's stacked rows under Dir(eta), the
// multinomial coefficients dropped exactly as in the sampler.
double cluster_log_marginal(const Eigen::MatrixXd& counts, const std::vector<int>& members,
                            double eta) {
  const int j = static_cast<int>(counts.cols());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(j);
  double lp = 0.0;
  Eigen::VectorXd base = Eigen::VectorXd::Constant(j, eta);
  for (int i : members) {
    lp += dirichlet_multinomial_logpred(counts.row(i).transpose(), base);
    base += counts.row(i).transpose();
    total += counts.row(i).transpose();
  }
  return lp;
}

// integral over the Gamma(a, b) prior of alpha^k Gamma(alpha)/Gamma(alpha+M)
double log_alpha_integral(int k, int m, double a, double b) {
  const int grid = 400000;
  const double hi = 60.0;
  const double step = hi / grid;
  double max_lp = -1e300;
  std::vector<double> lps(grid);
  for (int i = 0; i < grid; ++i) {
    const double alpha = (i + 0.5) * step;
    const double lp = (a - 1.0) * std::log(alpha) - b * alpha + k * std::log(alpha) +
                      std::lgamma(alpha) - std::lgamma(alpha + m);
    lps[static_cast<size_t>(i)] = lp;
    max_lp = std::max(max_lp, lp);
  }
  double sum = 0.0;
  for (double lp : lps) sum += std::exp(lp - max_lp);
  return max_lp + std::log(sum * step);
}

}  // namespace

TEST_CASE("dirichlet-multinomial predictive sanity values") {
  Eigen::VectorXd base(2);
  base << 1.0, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  // one observation under a flat Dirichlet: probability 1/2
  CHECK(dirichlet_multinomial_logpred(y, base) == doctest::Approx(std::log(0.5)));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(dirichlet_multinomial_logpred(zero, base) == doctest::Approx(0.0));
}

TEST_CASE("a single location always forms one cluster") {
  const CountMatrix counts = make_counts({{3, 1, 2}}, 3);
  const Eigen::MatrixXd rows = counts.counts.cast<double>();
  DpmOptions options;
  DpmState state = init_dpm_state(rows, options);
  Rng rng(111);
  for (int t = 0; t < 200; ++t) {
    update_assignments(state, rows, options.eta, rng);
    CHECK(state.n_clusters() == 1);
    state.check_consistency(rows);
  }
}

TEST_CASE("identical rows co-cluster as alpha goes to zero") {
  const CountMatrix counts = make_counts({{5, 2, 1}, {5, 2, 1}}, 3);
  DpmOptions options;
  options.sample_alpha = false;
  options.alpha_init = 1e-6;
  DpmChainConfig config;
  config.iterations = 4000;
  config.burn_in = 500;
  config.thinning = 1;
  config.seed = 7;
  const DpmDraws draws = run_dpm_chain(counts, options, config);
  int together = 0;
  for (const auto& assignment : draws.assignments) {
    together += (assignment[0] == assignment[1]) ? 1 : 0;
  }
  CHECK(static_cast<double>(together) / draws.size() > 0.999);
}

TEST_CASE("M = 4 co-clustering probabilities match exhaustive enumeration") {
  const CountMatrix counts = make_counts(
      {{6, 2, 0}, {4, 4, 0}, {0, 5, 3}, {1, 2, 5}}, 3);
  const Eigen::MatrixXd rows = counts.counts.cast<double>();
  DpmOptions options;  // eta = 1, (a, b) = (2, 1), alpha sampled
  // enumeration oracle over all 15 partitions, alpha integrated numerically
  const auto partitions = enumerate_partitions(4);
  REQUIRE(partitions.size() == 15);
  std::vector<double> log_w;
  for (const auto& assignment : partitions) {
    int k = 0;
    for (int c : assignment) k = std::max(k, c + 1);
    double lp = log_alpha_integral(k, 4, options.a, options.b);
    for (int c = 0; c < k; ++c) {
      std::vector<int> members;
      for (int i = 0; i < 4; ++i) {
        if (assignment[static_cast<size_t>(i)] == c) members.push_back(i);
      }
      lp += std::lgamma(static_cast<double>(members.size()));  // (m_c - 1)!
      lp += cluster_log_marginal(rows, members, options.eta);
    }
    log_w.push_back(lp);
  }
  double max_lp = -1e300;
  for (double lp : log_w) max_lp = std::max(max_lp, lp);
  double total = 0.0;
  for (double& lp : log_w) {
    lp = std::exp(lp - max_lp);
    total += lp;
  }
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
  for (size_t p = 0; p < partitions.size(); ++p) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (partitions[p][static_cast<size_t>(i)] == partitions[p][static_cast<size_t>(j)]) {
          expect(i, j) += log_w[p] / total;
        }
      }
    }
  }

  DpmChainConfig config;
  config.iterations = 200000;
  config.burn_in = 5000;
  config.thinning = 1;
  config.seed = 13;
  const DpmDraws draws = run_dpm_chain(counts, options, config);
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(4, 4);
  for (const auto& assignment : draws.assignments) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (assignment[static_cast<size_t>(i)] == assignment[static_cast<size_t>(j)]) {
          freq(i, j) += 1.0;
        }
      }
    }
  }
  freq /= static_cast<double>(draws.size());
  CHECK((freq - expect).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("alpha updates target p(alpha | k, M) (grid oracle, TV < 1e-2)") {
  const double a = 2.0, b = 1.0;
  const int k = 4, m = 12;
  DpmState state;
  state.alpha = 1.0;
  state.cluster_counts.assign(static_cast<size_t>(k), Eigen::VectorXd::Zero(2));
  state.cluster_sizes.assign(static_cast<size_t>(k), 3);
  Rng rng(112);
  const int n_draws = 1000000;
  const double hi = 12.0;
  const int bins = 48;
  std::vector<double> hist(static_cast<size_t>(bins), 0.0);
  for (int t = 0; t < n_draws; ++t) {
    update_alpha(state, m, a, b, rng);
    const int bin = static_cast<int>(state.alpha / hi * bins);
    if (bin >= 0 && bin < bins) hist[static_cast<size_t>(bin)] += 1.0;
  }
  // grid density of p(alpha | k, M) integrated per bin
  std::vector<double> expect(static_cast<size_t>(bins), 0.0);
  const int sub = 400;
  double max_lp = -1e300;
  std::vector<double> lps(static_cast<size_t>(bins * sub));
  for (int i = 0; i < bins * sub; ++i) {
    const double alpha = (i + 0.5) * hi / (bins * sub);
    lps[static_cast<size_t>(i)] = (a - 1.0) * std::log(alpha) - b * alpha +
                                  k * std::log(alpha) + std::lgamma(alpha) -
                                  std::lgamma(alpha + m);
    max_lp = std::max(max_lp, lps[static_cast<size_t>(i)]);
  }
  double total = 0.0;
  for (int i = 0; i < bins * sub; ++i) {
    const double p = std::exp(lps[static_cast<size_t>(i)] - max_lp);
    expect[static_cast<size_t>(i / sub)] += p;
    total += p;
  }
  double tv = 0.0;
  double hist_total = 0.0;
  for (double h : hist) hist_total += h;
  for (int i = 0; i < bins; ++i) {
    tv += std::abs(hist[static_cast<size_t>(i)] / hist_total -
                   expect[static_cast<size_t>(i)] / total);
  }
  tv *= 0.5;
  // mass beyond the histogram range contributes to TV; keep it tiny
  CHECK(hist_total / n_draws > 0.9999);
  CHECK(tv < 1e-2);
}

TEST_CASE("alpha concentrates at a/b for a large prior") {
  DpmState state;
  state.alpha = 1.0;
  state.cluster_counts.assign(3, Eigen::VectorXd::Zero(2));
  state.cluster_sizes.assign(3, 5);
  Rng rng(113);
  const double a = 50000.0, b = a / 3.0;
  double sum = 0.0;
  const int n_draws = 20000;
  for (int t = 0; t < n_draws; ++t) {
    update_alpha(state, 15, a, b, rng);
    REQUIRE(state.alpha > 0.0);
    sum += state.alpha;
  }
  CHECK(sum / n_draws == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("cluster count summary: constant draws collapse the interval") {
  DpmDraws draws;
  draws.assignments = {{0, 1, 0}, {0, 1, 0}, {1, 0, 1}};
  draws.alphas = {1.0, 1.0, 1.0};
  const ClusterCountSummary summary = cluster_count_summary(draws);
  CHECK(summary.mean == doctest::Approx(2.0));
  CHECK(summary.lower == doctest::Approx(2.0));
  CHECK(summary.upper == doctest::Approx(2.0));
}

TEST_CASE("cluster count quantiles match the sort-based definition") {
  DpmDraws draws;
  // occupied counts 1, 2, 3, 4, 5 in some order
  draws.assignments = {{0, 0, 0, 0, 0},
                       {0, 1, 0, 0, 0},
                       {0, 1, 2, 0, 0},
                       {0, 1, 2, 3, 0},
                       {0, 1, 2, 3, 4}};
  draws.alphas.assign(5, 1.0);
  const ClusterCountSummary summary = cluster_count_summary(draws);
  CHECK(summary.mean == doctest::Approx(3.0));
  // linear interpolation at q (n-1): 0.025 * 4 = 0.1 -> 1.1; 0.975 * 4 = 3.9 -> 4.9
  CHECK(summary.lower == doctest::Approx(1.1));
  CHECK(summary.upper == doctest::Approx(4.9));
}

TEST_CASE("three well-separated clusters are recovered (M = 60)") {
  Rng rng(114);
  std::vector<Eigen::VectorXd> centers;
  Eigen::VectorXd p1(4), p2(4), p3(4);
  p1 << 0.7, 0.1, 0.1, 0.1;
  p2 << 0.1, 0.7, 0.1, 0.1;
  p3 << 0.1, 0.1, 0.1, 0.7;
  centers = {p1, p2, p3};
  std::vector<std::vector<long long>> rows;
  for (int i = 0; i < 60; ++i) {
    const Eigen::VectorXd y = rng.multinomial_counts(500, centers[static_cast<size_t>(i % 3)]);
    rows.push_back({static_cast<long long>(y[0]), static_cast<long long>(y[1]),
                    static_cast<long long>(y[2]), static_cast<long long>(y[3])});
  }
  const CountMatrix counts = make_counts(rows, 4);
  DpmOptions options;
  DpmChainConfig config;
  config.iterations = 2000;
  config.burn_in = 1000;
  config.thinning = 2;
  config.seed = 17;
  const DpmDraws draws = run_dpm_chain(counts, options, config);
  const ClusterCountSummary summary = cluster_count_summary(draws);
  CHECK(summary.mean >= 3.0);
  CHECK(summary.mean <= 5.0);
}

TEST_CASE("cluster statistics stay in sync with a from-scratch recount") {
  const CountMatrix counts = make_counts(
      {{6, 2, 0}, {4, 4, 0}, {0, 5, 3}, {1, 2, 5}, {2, 2, 2}}, 3);
  const Eigen::MatrixXd rows = counts.counts.cast<double>();
  DpmOptions options;
  DpmState state = init_dpm_state(rows, options);
  Rng rng(115);
  for (int t = 0; t < 500; ++t) {
    update_assignments(state, rows, options.eta, rng);
    update_alpha(state, 5, options.a, options.b, rng);
    state.check_consistency(rows);
  }
}

TEST_CASE("relabeling locations leaves the co-clustering distribution unchanged") {
  const std::vector<std::vector<long long>> base_rows{
      {6, 2, 0}, {4, 4, 0}, {0, 5, 3}, {1, 2, 5}};
  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<std::vector<long long>> permuted_rows;
  for (int i : perm) permuted_rows.push_back(base_rows[static_cast<size_t>(i)]);
  DpmOptions options;
  DpmChainConfig config;
  config.iterations = 120000;
  config.burn_in = 5000;
  config.thinning = 1;
  config.seed = 19;
  auto co_cluster = [&](const std::vector<std::vector<long long>>& rows) {
    const DpmDraws draws = run_dpm_chain(make_counts(rows, 3), options, config);
    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& assignment : draws.assignments) {
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          freq(i, j) += (assignment[static_cast<size_t>(i)] ==
                         assignment[static_cast<size_t>(j)])
                            ? 1.0
                            : 0.0;
    }
    return Eigen::MatrixXd(freq / static_cast<double>(draws.size()));
  };
  const Eigen::MatrixXd base = co_cluster(base_rows);
  const Eigen::MatrixXd permuted = co_cluster(permuted_rows);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(permuted(i, j) - base(perm[static_cast<size_t>(i)],
                                           perm[static_cast<size_t>(j)])) < 0.02);
    }
  }
}

TEST_CASE("one-cluster flat-eta predictive matches closed-form moments") {
  const CountMatrix counts = make_counts({{3, 2, 1}}, 3);
  DpmDraws draws;
  draws.options = DpmOptions{};
  draws.assignments.assign(200, std::vector<int>{0});
  draws.alphas.assign(200, 1.0);
  Rng rng(116);
  const long long n = 6;
  // Dirichlet-multinomial(n, 1 + y): mean n (1 + y_j) / (3 + 6)
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(3);
  int reps = 0;
  dpm_predictive_stream(draws, counts, 100, rng, [&](const Eigen::MatrixXd& rep) {
    REQUIRE(rep.row(0).sum() == doctest::Approx(static_cast<double>(n)));
    mean += rep.row(0);
    sq += rep.row(0).cwiseProduct(rep.row(0));
    ++reps;
  });
  mean /= reps;
  Eigen::VectorXd base(3);
  base << 4.0, 3.0, 2.0;  // eta + y
  const double s = base.sum();
  for (int j = 0; j < 3; ++j) {
    const double p = base[j] / s;
    const double expect_mean = n * p;
    // DirMult variance: n p (1-p) (n + s) / (s + 1)
    const double expect_var = n * p * (1.0 - p) * (n + s) / (s + 1.0);
    CHECK(std::abs(mean[j] - expect_mean) < 4.0 * std::sqrt(expect_var / reps));
    const double var = sq[j] / reps - mean[j] * mean[j];
    CHECK(var == doctest::Approx(expect_var).epsilon(0.15));
  }
}

TEST_CASE("dpm predictive is seed deterministic") {
  const CountMatrix counts = make_counts({{3, 2, 1}, {1, 1, 4}}, 3);
  DpmDraws draws;
  draws.options = DpmOptions{};
  draws.assignments = {{0, 1}, {0, 0}};
  draws.alphas = {1.0, 1.0};
  auto run = [&] {
    Rng rng(117);
    std::vector<Eigen::MatrixXd> reps;
    dpm_predictive_stream(draws, counts, 3, rng,
                          [&](const Eigen::MatrixXd& rep) { reps.push_back(rep); });
    return reps;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
