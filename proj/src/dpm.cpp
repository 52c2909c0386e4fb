#include "tfa/dpm.hpp"

#include <algorithm>
#include <cmath>

#include "tfa/errors.hpp"

namespace tfa {

void DpmOptions::validate() const {
  if (!(eta > 0.0)) throw ValidationError("dpm: eta must be positive");
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("dpm: (a, b) must be positive");
  if (!(alpha_init > 0.0)) throw ValidationError("dpm: alpha_init must be positive");
}

void DpmState::check_consistency(const Eigen::MatrixXd& counts) const {
  const int k = n_clusters();
  std::vector<Eigen::VectorXd> sums(static_cast<size_t>(k),
                                    Eigen::VectorXd::Zero(counts.cols()));
  std::vector<int> sizes(static_cast<size_t>(k), 0);
  for (size_t i = 0; i < assignment.size(); ++i) {
    const int c = assignment[i];
    if (c < 0 || c >= k) throw ValidationError("dpm: assignment out of range");
    sums[static_cast<size_t>(c)] += counts.row(static_cast<Eigen::Index>(i)).transpose();
    ++sizes[static_cast<size_t>(c)];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<size_t>(c)] == 0) throw ValidationError("dpm: empty cluster kept");
    if (sizes[static_cast<size_t>(c)] != cluster_sizes[static_cast<size_t>(c)] ||
        (sums[static_cast<size_t>(c)] - cluster_counts[static_cast<size_t>(c)])
                .cwiseAbs()
                .maxCoeff() > 1e-9) {
      throw ValidationError("dpm: cluster statistics out of sync");
    }
  }
  if (!(alpha > 0.0)) throw ValidationError("dpm: alpha must stay positive");
}

double dirichlet_multinomial_logpred(const Eigen::VectorXd& y, const Eigen::VectorXd& base) {
  const double s = base.sum();
  const double n = y.sum();
  double lp = std::lgamma(s) - std::lgamma(s + n);
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    lp += std::lgamma(base[j] + y[j]) - std::lgamma(base[j]);
  }
  return lp;
}

DpmState init_dpm_state(const Eigen::MatrixXd& counts, const DpmOptions& options) {
  options.validate();
  DpmState state;
  const int m = static_cast<int>(counts.rows());
  // start from a single cluster holding everyone
  state.assignment.assign(static_cast<size_t>(m), 0);
  state.cluster_counts = {counts.colwise().sum().transpose()};
  state.cluster_sizes = {m};
  state.alpha = options.alpha_init;
  return state;
}

namespace {

void remove_location(DpmState& state, const Eigen::MatrixXd& counts, int i) {
  const int c = state.assignment[static_cast<size_t>(i)];
  auto& size = state.cluster_sizes[static_cast<size_t>(c)];
  --size;
  if (size == 0) {
    // drop the empty cluster; relabel the last cluster into the hole
    const int last = state.n_clusters() - 1;
    if (c != last) {
      state.cluster_counts[static_cast<size_t>(c)] =
          std::move(state.cluster_counts[static_cast<size_t>(last)]);
      state.cluster_sizes[static_cast<size_t>(c)] =
          state.cluster_sizes[static_cast<size_t>(last)];
      for (auto& a : state.assignment) {
        if (a == last) a = c;
      }
    }
    state.cluster_counts.pop_back();
    state.cluster_sizes.pop_back();
  } else {
    state.cluster_counts[static_cast<size_t>(c)] -= counts.row(i).transpose();
  }
  state.assignment[static_cast<size_t>(i)] = -1;
}

}  // namespace

void update_assignments(DpmState& state, const Eigen::MatrixXd& counts, double eta,
                        Rng& rng) {
  const int m = static_cast<int>(counts.rows());
  const int j = static_cast<int>(counts.cols());
  const Eigen::VectorXd prior_base = Eigen::VectorXd::Constant(j, eta);
  std::vector<double> logw;
  for (int i = 0; i < m; ++i) {
    remove_location(state, counts, i);
    const Eigen::VectorXd y = counts.row(i).transpose();
    const int k = state.n_clusters();
    logw.assign(static_cast<size_t>(k) + 1, 0.0);
    for (int c = 0; c < k; ++c) {
      logw[static_cast<size_t>(c)] =
          std::log(static_cast<double>(state.cluster_sizes[static_cast<size_t>(c)])) +
          dirichlet_multinomial_logpred(
              y, prior_base + state.cluster_counts[static_cast<size_t>(c)]);
    }
    logw[static_cast<size_t>(k)] =
        std::log(state.alpha) + dirichlet_multinomial_logpred(y, prior_base);
    // Gumbel-free categorical draw from log weights.
    double max_lw = logw[0];
    for (double lw : logw) max_lw = std::max(max_lw, lw);
    double total = 0.0;
    for (double& lw : logw) {
      lw = std::exp(lw - max_lw);
      total += lw;
    }
    double u = rng.uniform() * total;
    int pick = 0;
    while (pick < k && u > logw[static_cast<size_t>(pick)]) {
      u -= logw[static_cast<size_t>(pick)];
      ++pick;
    }
    if (pick == k) {
      state.cluster_counts.push_back(y);
      state.cluster_sizes.push_back(1);
    } else {
      state.cluster_counts[static_cast<size_t>(pick)] += y;
      ++state.cluster_sizes[static_cast<size_t>(pick)];
    }
    state.assignment[static_cast<size_t>(i)] = pick;
  }
}

void update_alpha(DpmState& state, int n_locations, double a, double b, Rng& rng) {
  const int k = state.n_clusters();
  const double m = static_cast<double>(n_locations);
  const double x = rng.beta(state.alpha + 1.0, m);
  const double rate = b - std::log(x);
  const double odds = (a + static_cast<double>(k) - 1.0) / (m * rate);
  const double shape = (rng.uniform() < odds / (1.0 + odds))
                           ? a + static_cast<double>(k)
                           : a + static_cast<double>(k) - 1.0;
  state.alpha = rng.gamma(shape, rate);
}

DpmDraws run_dpm_chain(const CountMatrix& counts, const DpmOptions& options,
                       const DpmChainConfig& config) {
  counts.validate();
  options.validate();
  if (config.iterations <= 0 || config.burn_in < 0 || config.thinning < 1 ||
      config.burn_in >= config.iterations ||
      (config.iterations - config.burn_in) / config.thinning < 1) {
    throw ValidationError("dpm chain: bad iteration configuration");
  }
  const Eigen::MatrixXd rows = counts.counts.cast<double>();
  Rng rng(config.seed, config.stream);
  DpmState state = init_dpm_state(rows, options);
  DpmDraws out;
  out.seed = config.seed;
  out.iterations = config.iterations;
  out.burn_in = config.burn_in;
  out.thinning = config.thinning;
  out.options = options;
  for (int t = 1; t <= config.iterations; ++t) {
    update_assignments(state, rows, options.eta, rng);
    if (options.sample_alpha) {
      update_alpha(state, counts.n_locations(), options.a, options.b, rng);
    }
    if (t > config.burn_in && (t - config.burn_in) % config.thinning == 0) {
      out.assignments.push_back(state.assignment);
      out.alphas.push_back(state.alpha);
    }
  }
  return out;
}

ClusterCountSummary cluster_count_summary(const DpmDraws& draws) {
  if (draws.size() == 0) throw ValidationError("cluster_count_summary: no draws");
  std::vector<double> ks;
  ks.reserve(draws.assignments.size());
  double mean = 0.0;
  for (const auto& assignment : draws.assignments) {
    int k = 0;
    for (int c : assignment) k = std::max(k, c + 1);
    ks.push_back(static_cast<double>(k));
    mean += static_cast<double>(k);
  }
  mean /= static_cast<double>(ks.size());
  auto sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  auto quant = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
  };
  return ClusterCountSummary{mean, quant(0.025), quant(0.975)};
}

void dpm_predictive_stream(const DpmDraws& draws, const CountMatrix& observed,
                           int reps_per_draw, Rng& rng,
                           const std::function<void(const Eigen::MatrixXd&)>& sink) {
  if (reps_per_draw < 1) throw ValidationError("reps_per_draw must be >= 1");
  const int m = observed.n_locations();
  const int j = observed.n_categories();
  const Eigen::MatrixXd rows = observed.counts.cast<double>();
  const Eigen::VectorXd totals = observed.row_totals();
  for (int r = 0; r < draws.size(); ++r) {
    const auto& assignment = draws.assignments[static_cast<size_t>(r)];
    if (assignment.size() != static_cast<size_t>(m)) {
      throw ValidationError("dpm draws do not match observed locations");
    }
    int k = 0;
    for (int c : assignment) k = std::max(k, c + 1);
    std::vector<Eigen::VectorXd> base(
        static_cast<size_t>(k), Eigen::VectorXd::Constant(j, draws.options.eta));
    for (int i = 0; i < m; ++i) {
      base[static_cast<size_t>(assignment[static_cast<size_t>(i)])] +=
          rows.row(i).transpose();
    }
    Eigen::MatrixXd replicate(m, j);
    for (int rep = 0; rep < reps_per_draw; ++rep) {
      std::vector<Eigen::VectorXd> probs;
      probs.reserve(static_cast<size_t>(k));
      for (int c = 0; c < k; ++c) probs.push_back(rng.dirichlet(base[static_cast<size_t>(c)]));
      for (int i = 0; i < m; ++i) {
        replicate.row(i) =
            rng.multinomial_counts(static_cast<long long>(totals[i]),
                                   probs[static_cast<size_t>(assignment[static_cast<size_t>(i)])])
                .transpose();
      }
      sink(replicate);
    }
  }
}

PredictiveSummary ppl_dpm(const DpmDraws& draws, const CountMatrix& observed,
                          int reps_per_draw, Rng& rng) {
  observed.validate();
  if (draws.size() == 0) throw ValidationError("ppl_dpm: no draws");
  PredictiveAccumulator acc(observed.n_locations(), observed.n_categories());
  dpm_predictive_stream(draws, observed, reps_per_draw, rng,
                        [&](const Eigen::MatrixXd& rep) { acc.add(rep); });
  return acc.finalize(observed.counts.cast<double>());
}

}  // namespace tfa
