#include "tfa/gibbs.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tfa/errors.hpp"
#include "tfa/io.hpp"
#include "tfa/polya_gamma.hpp"

namespace tfa {

void ChainConfig::validate() const {
  if (iterations <= 0 || burn_in < 0 || thinning < 1) {
    throw ValidationError("chain: iterations > 0, burn_in >= 0, thinning >= 1 required");
  }
  if (burn_in >= iterations) throw ValidationError("chain: burn_in must be < iterations");
  if (retained() < 1) {
    throw ValidationError("chain: no retained draws (check iterations/burn_in/thinning)");
  }
  if (!(jitter > 0.0)) throw ValidationError("chain: jitter must be positive");
  if (pg_exact_max_b < 1) throw ValidationError("chain: pg_exact_max_b must be >= 1");
}

namespace {

// x ~ N(P^{-1} b, P^{-1}) via Cholesky of the precision, with escalating
// relative jitter before giving up.
Eigen::VectorXd sample_gaussian_precision(const Eigen::MatrixXd& prec,
                                          const Eigen::VectorXd& b, double jitter,
                                          Rng& rng, const char* what) {
  const int n = static_cast<int>(prec.rows());
  const double scale = prec.diagonal().mean();
  for (double level = 0.0; level <= 1e-6;) {
    Eigen::MatrixXd p = prec;
    if (level > 0.0) p.diagonal().array() += level * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd mean = llt.solve(b);
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) z[i] = rng.normal();
      return mean + llt.matrixU().solve(z);
    }
    level = (level == 0.0) ? jitter : level * 100.0;
  }
  throw NumericalError(std::string("cholesky factorization failed in ") + what);
}

}  // namespace

void update_omega(ModelState& state, const NodeCounts& counts, long long pg_exact_max_b,
                  Rng& rng) {
  const Eigen::MatrixXd psi = state.psi();
  for (int i = 0; i < counts.n_locations(); ++i) {
    for (int a = 0; a < counts.n_nodes(); ++a) {
      state.Omega(i, a) =
          sample_pg(PgParams{counts.n_node(i, a), psi(i, a)}, rng, pg_exact_max_b);
    }
  }
}

void update_lambda_column(int k, ModelState& state, const NodeCounts& counts,
                          const SpatialWeights& weights, double jitter, Rng& rng) {
  const int m = state.n_locations();
  const int n = state.n_nodes();
  Eigen::MatrixXd prec = lambda_prior_precision(k, state, weights);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < n; ++a) {
    const double eta_ka = state.Eta(k, a);
    const Eigen::VectorXd& omega = state.Omega.col(a);
    prec.diagonal() += (eta_ka * eta_ka) * omega;
    // residual psi at node a with column k removed
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(m, state.Mu[a]);
    fitted += state.Lambda * state.Eta.col(a);
    fitted -= eta_ka * state.Lambda.col(k);
    b += eta_ka * (counts.kappa.col(a) - omega.cwiseProduct(fitted));
  }
  state.Lambda.col(k) = sample_gaussian_precision(prec, b, jitter, rng, "lambda update");
}

void update_eta(int node, ModelState& state, const NodeCounts& counts, double jitter,
                Rng& rng) {
  const int k_total = state.n_factors();
  const Eigen::VectorXd& omega = state.Omega.col(node);
  Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(k_total, k_total);
  prec.noalias() += state.Lambda.transpose() * omega.asDiagonal() * state.Lambda;
  const Eigen::VectorXd resid = counts.kappa.col(node) - state.Mu[node] * omega;
  const Eigen::VectorXd b = state.Lambda.transpose() * resid;
  state.Eta.col(node) = sample_gaussian_precision(prec, b, jitter, rng, "eta update");
}

void update_phi(ModelState& state, const SpatialWeights& weights,
                const Hyperparameters& hyper, Rng& rng) {
  const int m = state.n_locations();
  const Eigen::VectorXd tau = state.tau();
  for (int k = 0; k < state.n_factors(); ++k) {
    const Eigen::VectorXd whitened =
        state.Lambda.col(k) - state.Rho[k] * (weights.W * state.Lambda.col(k));
    for (int i = 0; i < m; ++i) {
      const double rate = 0.5 * (hyper.nu + tau[k] * whitened[i] * whitened[i]);
      state.Phi(i, k) = rng.gamma(0.5 * (hyper.nu + 1.0), rate);
    }
  }
}

void update_delta(ModelState& state, const SpatialWeights& weights,
                  const Hyperparameters& hyper, Rng& rng) {
  const int k_total = state.n_factors();
  const int m = state.n_locations();
  // Quadratic forms q_k = Lambda_k^T (I - rho W)^T Phi_k (I - rho W) Lambda_k
  // do not involve delta, so compute them once.
  Eigen::VectorXd q(k_total);
  for (int k = 0; k < k_total; ++k) {
    const Eigen::VectorXd whitened =
        state.Lambda.col(k) - state.Rho[k] * (weights.W * state.Lambda.col(k));
    q[k] = whitened.cwiseProduct(whitened).dot(state.Phi.col(k));
  }
  for (int k = 0; k < k_total; ++k) {
    const double shape = (k == 0 ? hyper.a1 : hyper.a2) +
                         0.5 * static_cast<double>(m) * static_cast<double>(k_total - k);
    double rate = 1.0;
    for (int kp = k; kp < k_total; ++kp) {
      double tau_excl = 1.0;  // prod_{l<=kp, l!=k} delta_l with current values
      for (int l = 0; l <= kp; ++l) {
        if (l != k) tau_excl *= state.Delta[l];
      }
      rate += 0.5 * tau_excl * q[kp];
    }
    state.Delta[k] = rng.gamma(shape, rate);
  }
}

namespace {

// Proposal shared by both rho updates: the plain truncated-normal
// conditional on (-1, 1).
double rho_conditional_draw(int k, const ModelState& state, const SpatialWeights& weights,
                            const Hyperparameters& hyper, Rng& rng) {
  const double tau_k = state.tau()[k];
  const Eigen::VectorXd wl = weights.W * state.Lambda.col(k);
  const Eigen::VectorXd phi_wl = state.Phi.col(k).cwiseProduct(wl);
  const double prec = 1.0 / hyper.s2_rho + tau_k * wl.dot(phi_wl);
  const double lin = hyper.m_rho / hyper.s2_rho + tau_k * phi_wl.dot(state.Lambda.col(k));
  const double var = 1.0 / prec;
  double draw = rng.trunc_normal(var * lin, std::sqrt(var), -1.0, 1.0);
  // keep strictly inside the open interval
  return std::min(std::max(draw, std::nextafter(-1.0, 0.0)), std::nextafter(1.0, 0.0));
}

double log_det_i_minus_rho_w(double rho, const Eigen::VectorXcd& eigenvalues) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double re = 1.0 - rho * eigenvalues[i].real();
    const double im = rho * eigenvalues[i].imag();
    sum += 0.5 * std::log(re * re + im * im);
  }
  return sum;
}

}  // namespace

void update_rho(int k, ModelState& state, const SpatialWeights& weights,
                const Hyperparameters& hyper, Rng& rng) {
  state.Rho[k] = rho_conditional_draw(k, state, weights, hyper, rng);
}

Eigen::VectorXcd spatial_eigenvalues(const SpatialWeights& weights) {
  if (weights.size() == 0) return Eigen::VectorXcd();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(weights.W, /*computeEigenvectors=*/false);
  return solver.eigenvalues();
}

void update_rho_exact(int k, ModelState& state, const SpatialWeights& weights,
                      const Eigen::VectorXcd& w_eigenvalues, const Hyperparameters& hyper,
                      Rng& rng) {
  const double proposal = rho_conditional_draw(k, state, weights, hyper, rng);
  const double log_ratio = log_det_i_minus_rho_w(proposal, w_eigenvalues) -
                           log_det_i_minus_rho_w(state.Rho[k], w_eigenvalues);
  if (std::log(rng.uniform()) < log_ratio) state.Rho[k] = proposal;
}

void update_mu(ModelState& state, const NodeCounts& counts, const Hyperparameters& hyper,
               Rng& rng) {
  if (hyper.mu_mode != MuMode::kEstimated) {
    throw ValidationError("update_mu called with mu_mode = fixed");
  }
  for (int a = 0; a < state.n_nodes(); ++a) {
    const Eigen::VectorXd& omega = state.Omega.col(a);
    const Eigen::VectorXd fitted = state.Lambda * state.Eta.col(a);
    const double prec = 1.0 / hyper.s2_mu + omega.sum();
    const double lin = hyper.m_mu / hyper.s2_mu +
                       (counts.kappa.col(a) - omega.cwiseProduct(fitted)).sum();
    state.Mu[a] = lin / prec + rng.normal() / std::sqrt(prec);
  }
}

void gibbs_sweep(ModelState& state, const NodeCounts& counts, const SpatialWeights& weights,
                 const Hyperparameters& hyper, const ChainConfig& config, Rng& rng,
                 const Eigen::VectorXcd* w_eigenvalues) {
  update_omega(state, counts, config.pg_exact_max_b, rng);
  for (int k = 0; k < state.n_factors(); ++k) {
    update_lambda_column(k, state, counts, weights, config.jitter, rng);
  }
  for (int a = 0; a < state.n_nodes(); ++a) {
    update_eta(a, state, counts, config.jitter, rng);
  }
  update_phi(state, weights, hyper, rng);
  update_delta(state, weights, hyper, rng);
  if (config.rho_exact) {
    Eigen::VectorXcd local;
    if (w_eigenvalues == nullptr) {
      local = spatial_eigenvalues(weights);
      w_eigenvalues = &local;
    }
    for (int k = 0; k < state.n_factors(); ++k) {
      update_rho_exact(k, state, weights, *w_eigenvalues, hyper, rng);
    }
  } else {
    for (int k = 0; k < state.n_factors(); ++k) {
      update_rho(k, state, weights, hyper, rng);
    }
  }
  if (hyper.mu_mode == MuMode::kEstimated) {
    update_mu(state, counts, hyper, rng);
  }
}

PosteriorDraws run_chain(const CountMatrix& counts, const PartitionTree& tree,
                         const SpatialWeights& weights, const Hyperparameters& hyper,
                         const ChainConfig& config) {
  config.validate();
  hyper.validate();
  const TreeValidation tv = validate_tree(tree, counts.space());
  if (!tv) throw ValidationError("run_chain: invalid tree: " + tv.message);
  if (weights.size() != counts.n_locations()) {
    throw ValidationError("run_chain: spatial weights and counts disagree on locations");
  }
  const NodeCounts node_counts = aggregate_node_counts(counts, tree);

  Rng rng(config.seed, config.stream);
  ModelState state = init_state(hyper, tree, weights, node_counts, rng);
  Eigen::VectorXcd w_eigenvalues;
  if (config.rho_exact) w_eigenvalues = spatial_eigenvalues(weights);

  PosteriorDraws out;
  out.meta = ChainMetadata{config.seed,    config.iterations, config.burn_in,
                           config.thinning, config.store_omega,
                           hash_tree(tree, counts.space()), hash_counts(counts)};
  out.draws.reserve(static_cast<size_t>(config.retained()));
  for (int t = 1; t <= config.iterations; ++t) {
    try {
      gibbs_sweep(state, node_counts, weights, hyper, config, rng,
                  config.rho_exact ? &w_eigenvalues : nullptr);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(t) + ": " + e.what());
    }
    if (t > config.burn_in && (t - config.burn_in) % config.thinning == 0) {
      ModelState snapshot = state;
      if (!config.store_omega) snapshot.Omega.resize(0, 0);
      out.draws.push_back(std::move(snapshot));
    }
  }
  return out;
}

}  // namespace tfa
