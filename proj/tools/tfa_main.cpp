// Command-line front end: build-tree | fit | fit-dpm | postprocess | evaluate
// | simulate | summarize. Every command validates its inputs, writes its
// outputs plus a manifest (inputs, hashes, seed, effective config), and exits
// 0 on success; failures print a machine-readable error record on stderr with
// exit codes io=2, validation=3, numerical=4.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfa/config.hpp"
#include "tfa/dpm.hpp"
#include "tfa/errors.hpp"
#include "tfa/evaluate.hpp"
#include "tfa/gibbs.hpp"
#include "tfa/io.hpp"
#include "tfa/postprocess.hpp"
#include "tfa/simulate.hpp"
#include "tfa/tree_builder.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json config_to_json(const tfa::Config& c) {
  return json{
      {"K", c.hyper.K},
      {"a1", c.hyper.a1},
      {"a2", c.hyper.a2},
      {"nu", c.hyper.nu},
      {"m_rho", c.hyper.m_rho},
      {"s2_rho", c.hyper.s2_rho},
      {"mu_mode", c.hyper.mu_mode == tfa::MuMode::kFixed ? "fixed" : "estimated"},
      {"m_mu", c.hyper.m_mu},
      {"s2_mu", c.hyper.s2_mu},
      {"iterations", c.chain.iterations},
      {"burn_in", c.chain.burn_in},
      {"thinning", c.chain.thinning},
      {"store_omega", c.chain.store_omega},
      {"jitter", c.chain.jitter},
      {"pg_exact_max_b", c.chain.pg_exact_max_b},
      {"threshold", c.threshold},
      {"pseudo_mass", c.tree_builder.pseudo_mass},
      {"exhaustive_limit", c.tree_builder.exhaustive_limit},
      {"dpm_eta", c.dpm.eta},
      {"dpm_a", c.dpm.a},
      {"dpm_b", c.dpm.b},
      {"dpm_alpha_init", c.dpm.alpha_init},
      {"dpm_sample_alpha", c.dpm.sample_alpha},
      {"align_max_iters", c.align.max_iters},
      {"align_tol", c.align.tol},
      {"replications", c.replications},
  };
}

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
};

tfa::Config load_config_or_default(const std::string& path) {
  if (path.empty()) return tfa::Config{};
  return tfa::load_config(path);
}

void write_manifest(const std::string& path, json manifest) {
  manifest["format_version"] = 1;
  manifest["tool_version"] = kVersion;
  tfa::write_text_file(path, manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- build-tree

int cmd_build_tree(const std::string& counts_path, const std::string& out_path,
                   const CommonArgs& common, double pseudo_mass_flag,
                   int exhaustive_flag) {
  tfa::Config config = load_config_or_default(common.config_path);
  if (pseudo_mass_flag > 0.0) config.tree_builder.pseudo_mass = pseudo_mass_flag;
  if (exhaustive_flag > 0) config.tree_builder.exhaustive_limit = exhaustive_flag;
  config.tree_builder.validate();

  const tfa::CountMatrix counts = tfa::read_counts(counts_path);
  const auto dists = tfa::smooth_counts(counts, config.tree_builder.pseudo_mass);
  const tfa::PartitionTree tree =
      tfa::build_mv_tree(dists, counts.space(), config.tree_builder);
  const std::string text = tfa::serialize_tree(tree, counts.space());
  tfa::write_text_file(out_path, text);

  write_manifest(out_path + ".manifest.json",
                 json{{"command", "build-tree"},
                      {"inputs", {{"counts", counts_path}}},
                      {"hashes",
                       {{"counts", tfa::hash_counts(counts)}, {"tree", tfa::hash_bytes(text)}}},
                      {"pseudo_mass", config.tree_builder.pseudo_mass},
                      {"exhaustive_limit", config.tree_builder.exhaustive_limit}});
  std::cout << "wrote tree with " << tree.n_internal() << " internal nodes to " << out_path
            << "\n";
  return 0;
}

// ----------------------------------------------------------------------- fit

int cmd_fit(const std::string& counts_path, const std::string& tree_path,
            const std::string& adjacency_path, const std::string& out_dir,
            const CommonArgs& common, int chains, bool binary) {
  const tfa::Config config = load_config_or_default(common.config_path);
  const tfa::CountMatrix counts = tfa::read_counts(counts_path);
  const tfa::CategorySpace space = counts.space();
  const std::string tree_text = tfa::read_text_file(tree_path);
  const tfa::PartitionTree tree = tfa::parse_tree(tree_text, space);
  const tfa::TreeValidation tv = tfa::validate_tree(tree, space);
  if (!tv) throw tfa::ValidationError("invalid tree: " + tv.message);

  tfa::SpatialWeights weights = tfa::SpatialWeights::none(counts.n_locations());
  std::string adjacency_hash = "none";
  if (!adjacency_path.empty()) {
    weights = tfa::read_adjacency(adjacency_path, counts.locations);
    adjacency_hash = tfa::hash_bytes(tfa::read_text_file(adjacency_path));
  }

  fs::create_directories(out_dir);
  const std::string counts_hash = tfa::hash_counts(counts);
  for (int c = 0; c < chains; ++c) {
    tfa::ChainConfig chain_config = config.chain;
    chain_config.seed = common.seed;
    chain_config.stream = static_cast<std::uint64_t>(c);
    const tfa::PosteriorDraws draws =
        tfa::run_chain(counts, tree, weights, config.hyper, chain_config);
    tfa::write_draws(out_dir + "/chain_" + std::to_string(c), draws, tree, space,
                     counts.locations, config.hyper, counts_hash, adjacency_hash, binary);
  }
  write_manifest(out_dir + "/manifest.json",
                 json{{"command", "fit"},
                      {"model", "factor"},
                      {"seed", common.seed},
                      {"chains", chains},
                      {"inputs",
                       {{"counts", counts_path},
                        {"tree", tree_path},
                        {"adjacency", adjacency_path.empty() ? "none" : adjacency_path}}},
                      {"hashes",
                       {{"counts", counts_hash},
                        {"tree", tfa::hash_tree(tree, space)},
                        {"adjacency", adjacency_hash}}},
                      {"config", config_to_json(config)}});
  std::cout << "fit complete: " << chains << " chain(s), "
            << config.chain.retained() << " retained draws each, output in " << out_dir
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- fit-dpm

int cmd_fit_dpm(const std::string& counts_path, const std::string& out_dir,
                const CommonArgs& common, int chains) {
  const tfa::Config config = load_config_or_default(common.config_path);
  const tfa::CountMatrix counts = tfa::read_counts(counts_path);
  fs::create_directories(out_dir);
  const std::string counts_hash = tfa::hash_counts(counts);
  std::vector<double> all_counts;
  for (int c = 0; c < chains; ++c) {
    tfa::DpmChainConfig chain_config;
    chain_config.iterations = config.chain.iterations;
    chain_config.burn_in = config.chain.burn_in;
    chain_config.thinning = config.chain.thinning;
    chain_config.seed = common.seed;
    chain_config.stream = static_cast<std::uint64_t>(c);
    const tfa::DpmDraws draws = tfa::run_dpm_chain(counts, config.dpm, chain_config);
    tfa::write_dpm_draws(out_dir + "/chain_" + std::to_string(c), draws, counts,
                         counts_hash);
    const tfa::ClusterCountSummary summary = tfa::cluster_count_summary(draws);
    tfa::write_text_file(out_dir + "/chain_" + std::to_string(c) + "/cluster_summary.tsv",
                         "mean\tlower\tupper\n" + fmt6(summary.mean) + "\t" +
                             fmt6(summary.lower) + "\t" + fmt6(summary.upper) + "\n");
    for (const auto& assignment : draws.assignments) {
      int k = 0;
      for (int cc : assignment) k = std::max(k, cc + 1);
      all_counts.push_back(static_cast<double>(k));
    }
  }
  write_manifest(out_dir + "/manifest.json",
                 json{{"command", "fit-dpm"},
                      {"model", "dpm"},
                      {"seed", common.seed},
                      {"chains", chains},
                      {"inputs", {{"counts", counts_path}}},
                      {"hashes", {{"counts", counts_hash}}},
                      {"config", config_to_json(config)}});
  std::cout << "fit-dpm complete: " << chains << " chain(s), output in " << out_dir << "\n";
  return 0;
}

// --------------------------------------------------------------- postprocess

struct LoadedFactorChains {
  tfa::FitArtifacts first;
  std::vector<Eigen::MatrixXd> lambdas, etas;
  std::vector<Eigen::VectorXd> mus;
  std::string manifests_hash;
};

LoadedFactorChains load_factor_chains(const std::string& draws_dir) {
  LoadedFactorChains out;
  const std::vector<std::string> chains = tfa::list_chain_dirs(draws_dir);
  std::string manifest_bytes;
  bool first = true;
  for (const auto& chain_dir : chains) {
    tfa::FitArtifacts art = tfa::read_draws(chain_dir);
    manifest_bytes += tfa::read_text_file(chain_dir + "/manifest.json");
    for (const auto& d : art.draws.draws) {
      out.lambdas.push_back(d.Lambda);
      out.etas.push_back(d.Eta);
      out.mus.push_back(d.Mu);
    }
    if (first) {
      out.first = std::move(art);
      first = false;
    }
  }
  out.manifests_hash = tfa::hash_bytes(manifest_bytes);
  return out;
}

int cmd_postprocess(const std::string& draws_dir, const std::string& out_dir,
                    const CommonArgs& common, double threshold_flag) {
  tfa::Config config = load_config_or_default(common.config_path);
  if (threshold_flag > 0.0) config.threshold = threshold_flag;
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw tfa::ValidationError("threshold must lie in (0,1)");
  }

  LoadedFactorChains chains = load_factor_chains(draws_dir);
  const tfa::EigenSummary summary = tfa::eigen_summary(chains.lambdas);
  const int k_star = tfa::select_k_star(summary, config.threshold);
  const tfa::AlignedDraws aligned =
      tfa::orthogonal_align(chains.lambdas, chains.etas, k_star, config.align);

  fs::create_directories(out_dir);
  {
    std::string text = "factor\tmean_eigenvalue\tcumulative_proportion\n";
    for (int k = 0; k < summary.mean_eigenvalues.size(); ++k) {
      text += std::to_string(k + 1) + "\t" + fmt(summary.mean_eigenvalues[k]) + "\t" +
              fmt(summary.cumulative[k]) + "\n";
    }
    tfa::write_text_file(out_dir + "/eigen.tsv", text);
  }
  {
    // posterior-mean aligned loadings, one row per location
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(chains.lambdas.front().rows(), k_star);
    for (const auto& lam : aligned.loadings) mean += lam;
    mean /= static_cast<double>(aligned.loadings.size());
    std::string text = "location";
    for (int k = 0; k < k_star; ++k) text += "\tloading_" + std::to_string(k + 1);
    text += "\n";
    for (int i = 0; i < mean.rows(); ++i) {
      text += chains.first.locations[static_cast<size_t>(i)];
      for (int k = 0; k < k_star; ++k) text += "\t" + fmt(mean(i, k));
      text += "\n";
    }
    tfa::write_text_file(out_dir + "/loadings.tsv", text);
  }
  json factor_scales = json::array();
  for (int k = 0; k < k_star; ++k) {
    const tfa::TypicalDistributions typical =
        tfa::typical_distributions(chains.mus, aligned, k, chains.first.tree);
    factor_scales.push_back(typical.c);
    std::string text =
        "category\tplus_median\tplus_lower\tplus_upper\tminus_median\tminus_lower\tminus_"
        "upper\n";
    for (int j = 0; j < chains.first.space.size(); ++j) {
      text += chains.first.space.labels[static_cast<size_t>(j)];
      text += "\t" + fmt(typical.plus_median[j]) + "\t" + fmt(typical.plus_lower[j]) +
              "\t" + fmt(typical.plus_upper[j]);
      text += "\t" + fmt(typical.minus_median[j]) + "\t" + fmt(typical.minus_lower[j]) +
              "\t" + fmt(typical.minus_upper[j]) + "\n";
    }
    tfa::write_text_file(out_dir + "/typical_factor_" + std::to_string(k + 1) + ".tsv",
                         text);
  }
  write_manifest(out_dir + "/postprocess.json",
                 json{{"command", "postprocess"},
                      {"inputs", {{"draws", draws_dir}}},
                      {"hashes", {{"chain_manifests", chains.manifests_hash}}},
                      {"threshold", config.threshold},
                      {"k_star", k_star},
                      {"alignment",
                       {{"converged", aligned.converged},
                        {"final_loss", aligned.loss_trace.back()},
                        {"iterations", aligned.loss_trace.size()},
                        {"sensitivity_warning", aligned.sensitivity_warning}}},
                      {"factor_scales", factor_scales},
                      {"draws_used", static_cast<int>(chains.lambdas.size())}});
  std::cout << "K* = " << k_star << " at threshold " << config.threshold << " ("
            << chains.lambdas.size() << " draws)\n";
  if (aligned.sensitivity_warning) {
    std::cout << "warning: alignment loss is sensitive to initialization\n";
  }
  if (!aligned.converged) {
    std::cout << "warning: alignment did not converge; best iterate reported\n";
  }
  return 0;
}

// ------------------------------------------------------------------ evaluate

int cmd_evaluate(const std::string& draws_dir, const std::string& counts_path,
                 const std::string& out_dir, const CommonArgs& common,
                 int replications_flag) {
  tfa::Config config = load_config_or_default(common.config_path);
  if (replications_flag > 0) config.replications = replications_flag;
  const tfa::CountMatrix counts = tfa::read_counts(counts_path);
  const std::vector<std::string> chains = tfa::list_chain_dirs(draws_dir);
  const std::string kind = tfa::draws_model_kind(chains.front());

  tfa::Rng rng(common.seed, 12001);  // evaluation stream, distinct from fit streams
  tfa::PredictiveSummary summary;
  if (kind == "factor") {
    tfa::PosteriorDraws merged;
    tfa::PartitionTree tree;
    bool first = true;
    for (const auto& chain_dir : chains) {
      tfa::FitArtifacts art = tfa::read_draws(chain_dir);
      if (tfa::hash_counts(counts) != art.draws.meta.data_hash) {
        std::cerr << "note: counts file hash differs from the one used at fit time\n";
      }
      if (first) {
        tree = art.tree;
        merged.meta = art.draws.meta;
        first = false;
      }
      for (auto& d : art.draws.draws) merged.draws.push_back(std::move(d));
    }
    summary = tfa::ppl_factor(merged, counts, tree, config.replications, rng);
  } else if (kind == "dpm") {
    tfa::DpmDraws merged;
    bool first = true;
    for (const auto& chain_dir : chains) {
      tfa::DpmArtifacts art = tfa::read_dpm_draws(chain_dir);
      if (first) {
        merged = std::move(art.draws);
        first = false;
      } else {
        for (auto& a : art.draws.assignments) merged.assignments.push_back(std::move(a));
        for (double a : art.draws.alphas) merged.alphas.push_back(a);
      }
    }
    summary = tfa::ppl_dpm(merged, counts, config.replications, rng);
  } else {
    throw tfa::ValidationError("unknown draws model kind '" + kind + "'");
  }

  fs::create_directories(out_dir);
  tfa::write_text_file(out_dir + "/ppl.tsv", "model\tppl\treplications\n" + kind + "\t" +
                                                 fmt(summary.ppl) + "\t" +
                                                 std::to_string(summary.replications) + "\n");
  {
    std::string bias = "category\taverage_bias\n";
    std::string var = "category\taverage_variance\n";
    for (int j = 0; j < counts.n_categories(); ++j) {
      bias += counts.categories[static_cast<size_t>(j)] + "\t" +
              fmt(summary.bias_per_category[j]) + "\n";
      var += counts.categories[static_cast<size_t>(j)] + "\t" +
             fmt(summary.variance_per_category[j]) + "\n";
    }
    tfa::write_text_file(out_dir + "/bias_per_category.tsv", bias);
    tfa::write_text_file(out_dir + "/variance_per_category.tsv", var);
  }
  write_manifest(out_dir + "/evaluate.json",
                 json{{"command", "evaluate"},
                      {"model", kind},
                      {"seed", common.seed},
                      {"inputs", {{"draws", draws_dir}, {"counts", counts_path}}},
                      {"hashes", {{"counts", tfa::hash_counts(counts)}}},
                      {"replications_per_draw", config.replications},
                      {"ppl", summary.ppl}});
  std::cout << "PPL(" << kind << ") = " << summary.ppl << "\n";
  return 0;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate_fig2(bool mixture, int n, const CommonArgs& common,
                      const std::string& out_path) {
  tfa::Rng rng(common.seed);
  const auto dists = mixture ? tfa::simulate_mixture_illustration(n, rng)
                             : tfa::simulate_factor_illustration(n, rng);
  std::string text = "p1\tp2\tp3\n";
  for (const auto& d : dists) {
    text += fmt(d[0]) + "\t" + fmt(d[1]) + "\t" + fmt(d[2]) + "\n";
  }
  tfa::write_text_file(out_path, text);
  write_manifest(out_path + ".manifest.json",
                 json{{"command", mixture ? "simulate fig2-mixture" : "simulate fig2-factor"},
                      {"seed", common.seed},
                      {"n", n},
                      {"hashes", {{"output", tfa::hash_bytes(text)}}}});
  std::cout << "wrote " << n << " ternary points to " << out_path << "\n";
  return 0;
}

int cmd_simulate_from_model(int m, int categories, int k_true, long long count,
                            const CommonArgs& common, const std::string& tree_path,
                            const std::string& adjacency_path,
                            const std::string& out_counts, const std::string& out_truth) {
  const tfa::Config config = load_config_or_default(common.config_path);
  if (categories < 2) throw tfa::ValidationError("need at least 2 categories");
  if (m < 1) throw tfa::ValidationError("need at least 1 location");
  tfa::CategorySpace space;
  for (int j = 0; j < categories; ++j) {
    std::string num = std::to_string(j + 1);
    if (num.size() < 2) num.insert(num.begin(), '0');
    space.labels.push_back("cat" + num);
  }
  tfa::PartitionTree tree;
  if (tree_path.empty()) {
    tree = tfa::balanced_tree(space);
  } else {
    tree = tfa::parse_tree(tfa::read_text_file(tree_path), space);
    const tfa::TreeValidation tv = tfa::validate_tree(tree, space);
    if (!tv) throw tfa::ValidationError("invalid tree: " + tv.message);
  }
  tfa::SpatialWeights weights = tfa::ring_adjacency(m);
  if (!adjacency_path.empty()) {
    weights = tfa::read_adjacency(adjacency_path, tfa::default_location_ids(m));
  }
  tfa::Rng rng(common.seed);
  const tfa::SimulatedModel sim = tfa::simulate_from_model(
      tree, space, weights, config.hyper, k_true, count, rng);
  tfa::write_counts(out_counts, sim.counts);
  if (!out_truth.empty()) {
    std::string text = "location";
    for (const auto& c : space.labels) text += "\t" + c;
    text += "\n";
    for (int i = 0; i < m; ++i) {
      text += sim.counts.locations[static_cast<size_t>(i)];
      for (int j = 0; j < categories; ++j) {
        text += "\t" + fmt(sim.true_probs[static_cast<size_t>(i)][j]);
      }
      text += "\n";
    }
    tfa::write_text_file(out_truth, text);
  }
  write_manifest(out_counts + ".manifest.json",
                 json{{"command", "simulate from-model"},
                      {"seed", common.seed},
                      {"locations", m},
                      {"categories", categories},
                      {"k_true", k_true},
                      {"count_per_location", count},
                      {"tree", tree_path.empty() ? "balanced" : tree_path},
                      {"adjacency", adjacency_path.empty() ? "ring" : adjacency_path},
                      {"hashes", {{"counts", tfa::hash_counts(sim.counts)}}}});
  std::cout << "wrote simulated counts (" << m << " x " << categories << ") to "
            << out_counts << "\n";
  return 0;
}

// ----------------------------------------------------------------- summarize

int cmd_summarize(const std::string& draws_dir, const std::string& out_path,
                  const CommonArgs& common, double threshold_flag) {
  tfa::Config config = load_config_or_default(common.config_path);
  if (threshold_flag > 0.0) config.threshold = threshold_flag;
  LoadedFactorChains chains = load_factor_chains(draws_dir);
  const tfa::EigenSummary summary = tfa::eigen_summary(chains.lambdas);
  const int k_star = tfa::select_k_star(summary, config.threshold);
  const tfa::AlignedDraws aligned =
      tfa::orthogonal_align(chains.lambdas, chains.etas, k_star, config.align);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(chains.lambdas.front().rows(), k_star);
  for (const auto& lam : aligned.loadings) mean += lam;
  mean /= static_cast<double>(aligned.loadings.size());
  std::string text = "location";
  for (int k = 0; k < k_star; ++k) text += "\tloading_" + std::to_string(k + 1);
  text += "\n";
  for (int i = 0; i < mean.rows(); ++i) {
    text += chains.first.locations[static_cast<size_t>(i)];
    for (int k = 0; k < k_star; ++k) text += "\t" + fmt(mean(i, k));
    text += "\n";
  }
  tfa::write_text_file(out_path, text);
  write_manifest(out_path + ".manifest.json",
                 json{{"command", "summarize"},
                      {"inputs", {{"draws", draws_dir}}},
                      {"hashes", {{"chain_manifests", chains.manifests_hash}}},
                      {"threshold", config.threshold},
                      {"k_star", k_star}});
  std::cout << "K* = " << k_star << "; wrote loading table to " << out_path << "\n";
  return 0;
}

void print_error(const std::string& type, const std::string& message) {
  json record{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-embedded Bayesian factor analysis for discrete distributions"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.footer("Config file keys (key = value per line):\n" + tfa::config_schema_help());

  CommonArgs common;

  // build-tree
  auto* build = app.add_subcommand("build-tree", "construct a maximum-variance tree");
  std::string bt_counts, bt_out;
  double bt_pseudo = -1.0;
  int bt_limit = -1;
  build->add_option("--counts", bt_counts, "counts file (TSV)")->required();
  build->add_option("--out", bt_out, "output tree file")->required();
  build->add_option("--config", common.config_path, "config file");
  build->add_option("--pseudo-mass", bt_pseudo, "smoothing mass added per cell");
  build->add_option("--exhaustive-limit", bt_limit, "max categories for enumeration");

  // fit
  auto* fit = app.add_subcommand("fit", "run the factor-model Gibbs sampler");
  std::string fit_counts, fit_tree, fit_adj, fit_out;
  int fit_chains = 1;
  bool fit_binary = false;
  fit->add_option("--counts", fit_counts, "counts file (TSV)")->required();
  fit->add_option("--tree", fit_tree, "tree file")->required();
  fit->add_option("--adjacency", fit_adj, "adjacency file (edge list or dense)");
  fit->add_option("--config", common.config_path, "config file");
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--seed", common.seed, "rng seed");
  fit->add_option("--chains", fit_chains, "number of chains")->check(CLI::PositiveNumber);
  fit->add_flag("--binary", fit_binary, "store draws as raw doubles");

  // fit-dpm
  auto* fit_dpm = app.add_subcommand("fit-dpm", "run the DPM baseline sampler");
  std::string dpm_counts, dpm_out;
  int dpm_chains = 1;
  fit_dpm->add_option("--counts", dpm_counts, "counts file (TSV)")->required();
  fit_dpm->add_option("--config", common.config_path, "config file");
  fit_dpm->add_option("--out", dpm_out, "output directory")->required();
  fit_dpm->add_option("--seed", common.seed, "rng seed");
  fit_dpm->add_option("--chains", dpm_chains, "number of chains")
      ->check(CLI::PositiveNumber);

  // postprocess
  auto* post = app.add_subcommand("postprocess", "select K*, align draws, summarize factors");
  std::string post_draws, post_out;
  double post_threshold = -1.0;
  post->add_option("--draws", post_draws, "fit output directory")->required();
  post->add_option("--out", post_out, "output directory")->required();
  post->add_option("--config", common.config_path, "config file");
  post->add_option("--threshold", post_threshold, "cumulative eigenvalue threshold");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "posterior predictive loss and decomposition");
  std::string eval_draws, eval_counts, eval_out;
  int eval_reps = -1;
  eval->add_option("--draws", eval_draws, "fit or fit-dpm output directory")->required();
  eval->add_option("--counts", eval_counts, "observed counts file")->required();
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--config", common.config_path, "config file");
  eval->add_option("--seed", common.seed, "rng seed for predictive replication");
  eval->add_option("--replications", eval_reps, "replicates per retained draw");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generators for illustrations and synthetic data");
  sim->require_subcommand(1);
  auto* sim_mix = sim->add_subcommand("fig2-mixture", "two-component mixture ternary sample");
  auto* sim_fac = sim->add_subcommand("fig2-factor", "two-factor embedding ternary sample");
  int sim_n = 200;
  std::string sim_out;
  for (auto* sc : {sim_mix, sim_fac}) {
    sc->add_option("--n", sim_n, "number of distributions");
    sc->add_option("--seed", common.seed, "rng seed");
    sc->add_option("--out", sim_out, "output TSV")->required();
  }
  auto* sim_model = sim->add_subcommand("from-model", "counts drawn from the factor model");
  int sm_m = 30, sm_categories = 8, sm_k = 2;
  long long sm_count = 10000;
  std::string sm_tree, sm_adj, sm_out_counts, sm_out_truth;
  sim_model->add_option("--locations", sm_m, "number of locations");
  sim_model->add_option("--categories", sm_categories, "number of categories");
  sim_model->add_option("--k-true", sm_k, "true factor count (0 = mean only)");
  sim_model->add_option("--count", sm_count, "observations per location");
  sim_model->add_option("--seed", common.seed, "rng seed");
  sim_model->add_option("--tree", sm_tree, "tree file (default: balanced)");
  sim_model->add_option("--adjacency", sm_adj, "adjacency file (default: ring)");
  sim_model->add_option("--config", common.config_path, "config file");
  sim_model->add_option("--out-counts", sm_out_counts, "output counts file")->required();
  sim_model->add_option("--out-truth", sm_out_truth, "output true-probability file");

  // summarize
  auto* summ = app.add_subcommand("summarize", "per-location loading table");
  std::string summ_draws, summ_out;
  double summ_threshold = -1.0;
  summ->add_option("--draws", summ_draws, "fit output directory")->required();
  summ->add_option("--out", summ_out, "output TSV")->required();
  summ->add_option("--config", common.config_path, "config file");
  summ->add_option("--threshold", summ_threshold, "cumulative eigenvalue threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 3;
  }

  try {
    if (build->parsed()) return cmd_build_tree(bt_counts, bt_out, common, bt_pseudo, bt_limit);
    if (fit->parsed()) {
      return cmd_fit(fit_counts, fit_tree, fit_adj, fit_out, common, fit_chains, fit_binary);
    }
    if (fit_dpm->parsed()) return cmd_fit_dpm(dpm_counts, dpm_out, common, dpm_chains);
    if (post->parsed()) return cmd_postprocess(post_draws, post_out, common, post_threshold);
    if (eval->parsed()) {
      return cmd_evaluate(eval_draws, eval_counts, eval_out, common, eval_reps);
    }
    if (sim->parsed()) {
      if (sim_mix->parsed()) return cmd_simulate_fig2(true, sim_n, common, sim_out);
      if (sim_fac->parsed()) return cmd_simulate_fig2(false, sim_n, common, sim_out);
      if (sim_model->parsed()) {
        return cmd_simulate_from_model(sm_m, sm_categories, sm_k, sm_count, common, sm_tree,
                                       sm_adj, sm_out_counts, sm_out_truth);
      }
    }
    if (summ->parsed()) return cmd_summarize(summ_draws, summ_out, common, summ_threshold);
    print_error("usage", "no subcommand given");
    return 3;
  } catch (const tfa::IoError& e) {
    print_error("io", e.what());
    return 2;
  } catch (const tfa::ValidationError& e) {
    print_error("validation", e.what());
    return 3;
  } catch (const tfa::NumericalError& e) {
    print_error("numerical", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}
