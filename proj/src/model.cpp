#include "tfa/model.hpp"

#include <cmath>

#include "tfa/errors.hpp"
#include "tfa/polya_gamma.hpp"

namespace tfa {

void Hyperparameters::validate() const {
  if (K < 1) throw ValidationError("hyper: K must be >= 1");
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw ValidationError("hyper: a1, a2 must be positive");
  if (!(nu > 0.0)) throw ValidationError("hyper: nu must be positive");
  if (!(s2_rho > 0.0)) throw ValidationError("hyper: s2_rho must be positive");
  if (!(s2_mu > 0.0)) throw ValidationError("hyper: s2_mu must be positive");
}

void SpatialWeights::validate() const {
  const int m = size();
  if (W.cols() != m) throw ValidationError("spatial weights must be square");
  for (int i = 0; i < m; ++i) {
    if (W(i, i) != 0.0) throw ValidationError("spatial weights: nonzero diagonal");
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      if (W(i, j) < 0.0) throw ValidationError("spatial weights: negative entry");
      if ((W(i, j) > 0.0) != (W(j, i) > 0.0)) {
        throw ValidationError("spatial weights: asymmetric adjacency structure");
      }
      row += W(i, j);
    }
    if (row != 0.0 && std::abs(row - 1.0) > 1e-10) {
      throw ValidationError("spatial weights: row " + std::to_string(i) +
                            " sums to neither 0 nor 1");
    }
  }
}

SpatialWeights SpatialWeights::from_raw(Eigen::MatrixXd raw) {
  for (int i = 0; i < raw.rows(); ++i) {
    raw(i, i) = 0.0;
    const double row = raw.row(i).sum();
    if (row > 0.0) raw.row(i) /= row;
  }
  SpatialWeights w{std::move(raw)};
  w.validate();
  return w;
}

Eigen::VectorXd ModelState::tau() const {
  Eigen::VectorXd t(Delta.size());
  double prod = 1.0;
  for (Eigen::Index k = 0; k < Delta.size(); ++k) {
    prod *= Delta[k];
    t[k] = prod;
  }
  return t;
}

Eigen::MatrixXd ModelState::psi() const {
  return Eigen::VectorXd::Ones(Lambda.rows()) * Mu.transpose() + Lambda * Eta;
}

void ModelState::validate_invariants(const NodeCounts* counts) const {
  if ((Phi.array() <= 0.0).any()) throw ValidationError("state: Phi must be positive");
  if ((Delta.array() <= 0.0).any()) throw ValidationError("state: Delta must be positive");
  if ((Rho.array() <= -1.0).any() || (Rho.array() >= 1.0).any()) {
    throw ValidationError("state: Rho must lie strictly inside (-1,1)");
  }
  if ((Omega.array() < 0.0).any()) throw ValidationError("state: Omega must be nonnegative");
  if (counts != nullptr) {
    for (int i = 0; i < Omega.rows(); ++i) {
      for (int a = 0; a < Omega.cols(); ++a) {
        if (counts->n_node(i, a) == 0 && Omega(i, a) != 0.0) {
          throw ValidationError("state: Omega nonzero at an empty node");
        }
      }
    }
  }
}

Eigen::VectorXd default_mu(const PartitionTree& tree) {
  Eigen::VectorXd mu(tree.n_internal());
  for (int a = 0; a < tree.n_internal(); ++a) {
    const TreeNode& n = tree.node(tree.internal_order[static_cast<size_t>(a)]);
    const double nl = static_cast<double>(tree.node(n.left).categories.size());
    const double nr = static_cast<double>(tree.node(n.right).categories.size());
    mu[a] = std::log(nl / nr);
  }
  return mu;
}

Eigen::MatrixXd lambda_prior_precision(int k, const ModelState& state,
                                       const SpatialWeights& weights) {
  const int m = state.n_locations();
  const Eigen::MatrixXd b =
      Eigen::MatrixXd::Identity(m, m) - state.Rho[k] * weights.W;
  const double tau_k = state.tau()[k];
  Eigen::MatrixXd prec =
      tau_k * b.transpose() * state.Phi.col(k).asDiagonal() * b;
  if (!prec.allFinite()) throw NumericalError("lambda_prior_precision: non-finite entries");
  return prec;
}

namespace {

// Solve (I - rho W) x = z for a column draw from the SAR prior.
Eigen::VectorXd sar_prior_column(double rho, double tau_k, const Eigen::VectorXd& phi,
                                 const SpatialWeights& weights, Rng& rng) {
  const int m = static_cast<int>(phi.size());
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.normal() / std::sqrt(tau_k * phi[i]);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(m, m) - rho * weights.W;
  return b.partialPivLu().solve(z);
}

}  // namespace

ModelState draw_prior_state(const Hyperparameters& hyper, int m, int n_nodes,
                            const SpatialWeights& weights, const PartitionTree& tree,
                            Rng& rng) {
  hyper.validate();
  weights.validate();
  if (weights.size() != m) throw ValidationError("prior draw: W and M disagree");
  const int k_total = hyper.K;
  ModelState state;
  state.Phi.resize(m, k_total);
  for (int k = 0; k < k_total; ++k) {
    for (int i = 0; i < m; ++i) {
      state.Phi(i, k) = rng.gamma(0.5 * hyper.nu, 0.5 * hyper.nu);
    }
  }
  state.Delta.resize(k_total);
  state.Delta[0] = rng.gamma(hyper.a1, 1.0);
  for (int k = 1; k < k_total; ++k) state.Delta[k] = rng.gamma(hyper.a2, 1.0);
  state.Rho.resize(k_total);
  const double s_rho = std::sqrt(hyper.s2_rho);
  for (int k = 0; k < k_total; ++k) {
    state.Rho[k] = rng.trunc_normal(hyper.m_rho, s_rho, -1.0, 1.0);
  }
  const Eigen::VectorXd tau = state.tau();
  state.Lambda.resize(m, k_total);
  for (int k = 0; k < k_total; ++k) {
    state.Lambda.col(k) =
        sar_prior_column(state.Rho[k], tau[k], state.Phi.col(k), weights, rng);
  }
  state.Eta.resize(k_total, n_nodes);
  for (int k = 0; k < k_total; ++k) {
    for (int a = 0; a < n_nodes; ++a) state.Eta(k, a) = rng.normal();
  }
  state.Mu = default_mu(tree);
  if (hyper.mu_mode == MuMode::kEstimated) {
    const double s_mu = std::sqrt(hyper.s2_mu);
    for (int a = 0; a < n_nodes; ++a) state.Mu[a] = hyper.m_mu + s_mu * rng.normal();
  }
  state.Omega = Eigen::MatrixXd::Zero(m, n_nodes);
  return state;
}

ModelState init_state(const Hyperparameters& hyper, const PartitionTree& tree,
                      const SpatialWeights& weights, const NodeCounts& counts, Rng& rng) {
  ModelState state =
      draw_prior_state(hyper, counts.n_locations(), counts.n_nodes(), weights, tree, rng);
  const Eigen::MatrixXd psi = state.psi();
  for (int i = 0; i < counts.n_locations(); ++i) {
    for (int a = 0; a < counts.n_nodes(); ++a) {
      state.Omega(i, a) = pg_mean(counts.n_node(i, a), psi(i, a));
    }
  }
  return state;
}

}  // namespace tfa
