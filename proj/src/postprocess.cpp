#include "tfa/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tfa/embedding.hpp"
#include "tfa/errors.hpp"

namespace tfa {

EigenSummary eigen_summary(const std::vector<Eigen::MatrixXd>& lambdas) {
  if (lambdas.empty()) throw ValidationError("eigen_summary needs at least one draw");
  const int k_total = static_cast<int>(lambdas.front().cols());
  const int r = static_cast<int>(lambdas.size());
  EigenSummary out;
  out.per_draw.resize(r, k_total);
  for (int i = 0; i < r; ++i) {
    // K x K Gram matrix carries the nonzero spectrum of Lambda Lambda^T.
    const Eigen::MatrixXd gram = lambdas[static_cast<size_t>(i)].transpose() *
                                 lambdas[static_cast<size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    Eigen::VectorXd ev = solver.eigenvalues();  // ascending
    for (int k = 0; k < k_total; ++k) {
      out.per_draw(i, k) = std::max(0.0, ev[k_total - 1 - k]);
    }
  }
  out.mean_eigenvalues = out.per_draw.colwise().mean();
  const double total = out.mean_eigenvalues.sum();
  out.cumulative.resize(k_total);
  if (total <= 0.0) {
    out.degenerate = true;
    out.cumulative.setZero();
  } else {
    double acc = 0.0;
    for (int k = 0; k < k_total; ++k) {
      acc += out.mean_eigenvalues[k];
      out.cumulative[k] = acc / total;
    }
  }
  return out;
}

EigenSummary eigen_summary(const PosteriorDraws& draws) {
  std::vector<Eigen::MatrixXd> lambdas;
  lambdas.reserve(draws.draws.size());
  for (const auto& d : draws.draws) lambdas.push_back(d.Lambda);
  return eigen_summary(lambdas);
}

int select_k_star(const EigenSummary& summary, double threshold) {
  if (summary.degenerate) {
    throw ValidationError("select_k_star: degenerate (all-zero) eigenvalue summary");
  }
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw ValidationError("select_k_star: threshold must lie in (0,1)");
  }
  for (int k = 0; k < summary.cumulative.size(); ++k) {
    if (summary.cumulative[k] >= threshold) return k + 1;
  }
  return static_cast<int>(summary.cumulative.size());
}

namespace {

// min_Q ||lambda Q - ref||_F over semi-orthogonal Q via the thin SVD of
// lambda^T ref.
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& lambda,
                                    const Eigen::MatrixXd& ref) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lambda.transpose() * ref,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

struct AlignRun {
  Eigen::MatrixXd reference;
  std::vector<Eigen::MatrixXd> rotations;
  std::vector<double> loss_trace;
  bool converged = false;
};

AlignRun run_alignment(const std::vector<Eigen::MatrixXd>& lambdas, int k_star,
                       int init_draw, const AlignOptions& options) {
  const int r = static_cast<int>(lambdas.size());
  AlignRun run;
  run.reference = lambdas[static_cast<size_t>(init_draw)].leftCols(k_star);
  run.rotations.assign(static_cast<size_t>(r), Eigen::MatrixXd());
  for (int iter = 0; iter < options.max_iters; ++iter) {
    double loss = 0.0;
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(run.reference.rows(), k_star);
    for (int i = 0; i < r; ++i) {
      const Eigen::MatrixXd& lam = lambdas[static_cast<size_t>(i)];
      Eigen::MatrixXd q = procrustes_rotation(lam, run.reference);
      const Eigen::MatrixXd rotated = lam * q;
      loss += (rotated - run.reference).squaredNorm();
      mean += rotated;
      run.rotations[static_cast<size_t>(i)] = std::move(q);
    }
    loss /= static_cast<double>(r);
    run.loss_trace.push_back(loss);
    mean /= static_cast<double>(r);
    const double denom = std::max(1.0, run.reference.norm());
    const double change = (mean - run.reference).norm() / denom;
    run.reference = std::move(mean);
    if (change < options.tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

}  // namespace

AlignedDraws orthogonal_align(const std::vector<Eigen::MatrixXd>& lambdas,
                              const std::vector<Eigen::MatrixXd>& etas, int k_star,
                              const AlignOptions& options) {
  const int r = static_cast<int>(lambdas.size());
  if (r < 2) throw ValidationError("orthogonal_align needs at least 2 draws");
  const int k_total = static_cast<int>(lambdas.front().cols());
  if (k_star < 1 || k_star > k_total) {
    throw ValidationError("orthogonal_align: k_star out of range");
  }
  if (!etas.empty() && etas.size() != lambdas.size()) {
    throw ValidationError("orthogonal_align: eta draws do not match lambda draws");
  }
  const int init = (options.init_draw < 0) ? r - 1 : options.init_draw;
  if (init >= r) throw ValidationError("orthogonal_align: init_draw out of range");

  AlignRun run = run_alignment(lambdas, k_star, init, options);

  AlignedDraws out;
  out.k_star = k_star;
  out.converged = run.converged;
  out.loss_trace = run.loss_trace;

  if (options.check_sensitivity && r >= 4) {
    // Rerun from three other draws spread across the chain; losses should agree.
    const double final_loss = run.loss_trace.back();
    for (int alt : {0, r / 3, (2 * r) / 3}) {
      if (alt == init) alt = (alt + 1) % r;
      const AlignRun alt_run = run_alignment(lambdas, k_star, alt, options);
      if (std::abs(alt_run.loss_trace.back() - final_loss) > options.sensitivity_tol) {
        out.sensitivity_warning = true;
        break;
      }
    }
  }

  // Sign convention: largest-magnitude entry of each reference column positive.
  Eigen::VectorXd signs(k_star);
  for (int k = 0; k < k_star; ++k) {
    Eigen::Index argmax;
    run.reference.col(k).cwiseAbs().maxCoeff(&argmax);
    signs[k] = (run.reference(argmax, k) >= 0.0) ? 1.0 : -1.0;
  }
  out.reference = run.reference * signs.asDiagonal();

  out.loadings.reserve(static_cast<size_t>(r));
  out.factors.reserve(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    const Eigen::MatrixXd q = run.rotations[static_cast<size_t>(i)] * signs.asDiagonal();
    out.loadings.push_back(lambdas[static_cast<size_t>(i)] * q);
    if (!etas.empty()) {
      out.factors.push_back(q.transpose() * etas[static_cast<size_t>(i)]);
    }
  }
  return out;
}

AlignedDraws orthogonal_align(const PosteriorDraws& draws, int k_star,
                              const AlignOptions& options) {
  std::vector<Eigen::MatrixXd> lambdas, etas;
  lambdas.reserve(draws.draws.size());
  etas.reserve(draws.draws.size());
  for (const auto& d : draws.draws) {
    lambdas.push_back(d.Lambda);
    etas.push_back(d.Eta);
  }
  return orthogonal_align(lambdas, etas, k_star, options);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of empty data");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * values[lo] + w * values[hi];
}

TypicalDistributions typical_distributions(const std::vector<Eigen::VectorXd>& mus,
                                           const AlignedDraws& aligned, int k,
                                           const PartitionTree& tree) {
  const size_t r = aligned.loadings.size();
  if (r == 0 || aligned.factors.empty()) {
    throw ValidationError("typical_distributions needs aligned draws with factors");
  }
  if (mus.size() != r) throw ValidationError("typical_distributions: mu draws mismatch");
  if (k < 0 || k >= aligned.k_star) {
    throw ValidationError("typical_distributions: factor index out of range");
  }
  // c_k from the posterior-mean loading column, spread across locations.
  Eigen::VectorXd mean_col = Eigen::VectorXd::Zero(aligned.loadings.front().rows());
  for (const auto& lam : aligned.loadings) mean_col += lam.col(k);
  mean_col /= static_cast<double>(r);
  const double m = static_cast<double>(mean_col.size());
  const double sd = (m > 1.0)
                        ? std::sqrt((mean_col.array() - mean_col.mean()).square().sum() /
                                    (m - 1.0))
                        : 0.0;
  TypicalDistributions out;
  out.c = 2.0 * sd;

  const int n_cats = tree.n_leaves();
  std::vector<std::vector<double>> plus(static_cast<size_t>(n_cats)),
      minus(static_cast<size_t>(n_cats));
  for (size_t i = 0; i < r; ++i) {
    const Eigen::VectorXd eta_k = aligned.factors[i].row(k).transpose();
    const Eigen::VectorXd p_plus = invert(mus[i] + out.c * eta_k, tree);
    const Eigen::VectorXd p_minus = invert(mus[i] - out.c * eta_k, tree);
    for (int j = 0; j < n_cats; ++j) {
      plus[static_cast<size_t>(j)].push_back(p_plus[j]);
      minus[static_cast<size_t>(j)].push_back(p_minus[j]);
    }
  }
  auto summarize = [&](const std::vector<std::vector<double>>& samples,
                       Eigen::VectorXd& med, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
    med.resize(n_cats);
    lo.resize(n_cats);
    hi.resize(n_cats);
    for (int j = 0; j < n_cats; ++j) {
      const auto& s = samples[static_cast<size_t>(j)];
      med[j] = quantile(s, 0.5);
      lo[j] = quantile(s, 0.05);
      hi[j] = quantile(s, 0.95);
    }
  };
  summarize(plus, out.plus_median, out.plus_lower, out.plus_upper);
  summarize(minus, out.minus_median, out.minus_lower, out.minus_upper);
  return out;
}

}  // namespace tfa
