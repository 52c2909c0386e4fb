#include "tfa/config.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "tfa/errors.hpp"
#include "tfa/io.hpp"

namespace tfa {

void Config::validate() const {
  hyper.validate();
  chain.validate();
  tree_builder.validate();
  dpm.validate();
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw ValidationError("config: threshold must lie in (0,1)");
  }
  if (align.max_iters < 1) throw ValidationError("config: align_max_iters must be >= 1");
  if (!(align.tol > 0.0)) throw ValidationError("config: align_tol must be positive");
  if (replications < 1) throw ValidationError("config: replications must be >= 1");
}

namespace {

struct KeyValue {
  std::string key;
  std::string value;
  int line;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<KeyValue> scan_pairs(const std::string& text) {
  std::vector<KeyValue> pairs;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected 'key = value'");
    }
    pairs.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno});
  }
  return pairs;
}

double parse_double(const KeyValue& kv) {
  try {
    size_t used = 0;
    const double v = std::stod(kv.value, &used);
    if (used != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config '" + kv.key + "': bad number '" + kv.value + "'");
  }
}

long long parse_int(const KeyValue& kv) {
  try {
    size_t used = 0;
    const long long v = std::stoll(kv.value, &used);
    if (used != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config '" + kv.key + "': bad integer '" + kv.value + "'");
  }
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true") return true;
  if (kv.value == "false") return false;
  throw ValidationError("config '" + kv.key + "': expected true or false");
}

}  // namespace

Config parse_config(const std::string& text) {
  const std::vector<KeyValue> pairs = scan_pairs(text);
  Config config;
  // profile first so explicit keys override it
  for (const auto& kv : pairs) {
    if (kv.key == "profile") {
      if (kv.value == "paper-application") {
        config.profile = kv.value;
        config.threshold = 0.95;
        config.hyper.K = 10;
      } else {
        throw ValidationError("config: unknown profile '" + kv.value + "'");
      }
    }
  }
  for (const auto& kv : pairs) {
    if (kv.key == "profile") {
      continue;
    } else if (kv.key == "K") {
      config.hyper.K = static_cast<int>(parse_int(kv));
    } else if (kv.key == "a1") {
      config.hyper.a1 = parse_double(kv);
    } else if (kv.key == "a2") {
      config.hyper.a2 = parse_double(kv);
    } else if (kv.key == "nu") {
      config.hyper.nu = parse_double(kv);
    } else if (kv.key == "m_rho") {
      config.hyper.m_rho = parse_double(kv);
    } else if (kv.key == "s2_rho") {
      config.hyper.s2_rho = parse_double(kv);
    } else if (kv.key == "mu_mode") {
      if (kv.value == "fixed") {
        config.hyper.mu_mode = MuMode::kFixed;
      } else if (kv.value == "estimated") {
        config.hyper.mu_mode = MuMode::kEstimated;
      } else {
        throw ValidationError("config mu_mode: expected fixed or estimated");
      }
    } else if (kv.key == "m_mu") {
      config.hyper.m_mu = parse_double(kv);
    } else if (kv.key == "s2_mu") {
      config.hyper.s2_mu = parse_double(kv);
    } else if (kv.key == "iterations") {
      config.chain.iterations = static_cast<int>(parse_int(kv));
    } else if (kv.key == "burn_in") {
      config.chain.burn_in = static_cast<int>(parse_int(kv));
    } else if (kv.key == "thinning") {
      config.chain.thinning = static_cast<int>(parse_int(kv));
    } else if (kv.key == "store_omega") {
      config.chain.store_omega = parse_bool(kv);
    } else if (kv.key == "jitter") {
      config.chain.jitter = parse_double(kv);
    } else if (kv.key == "pg_exact_max_b") {
      config.chain.pg_exact_max_b = parse_int(kv);
    } else if (kv.key == "rho_exact") {
      config.chain.rho_exact = parse_bool(kv);
    } else if (kv.key == "threshold") {
      config.threshold = parse_double(kv);
    } else if (kv.key == "pseudo_mass") {
      config.tree_builder.pseudo_mass = parse_double(kv);
    } else if (kv.key == "exhaustive_limit") {
      config.tree_builder.exhaustive_limit = static_cast<int>(parse_int(kv));
    } else if (kv.key == "dpm_eta") {
      config.dpm.eta = parse_double(kv);
    } else if (kv.key == "dpm_a") {
      config.dpm.a = parse_double(kv);
    } else if (kv.key == "dpm_b") {
      config.dpm.b = parse_double(kv);
    } else if (kv.key == "dpm_alpha_init") {
      config.dpm.alpha_init = parse_double(kv);
    } else if (kv.key == "dpm_sample_alpha") {
      config.dpm.sample_alpha = parse_bool(kv);
    } else if (kv.key == "align_max_iters") {
      config.align.max_iters = static_cast<int>(parse_int(kv));
    } else if (kv.key == "align_tol") {
      config.align.tol = parse_double(kv);
    } else if (kv.key == "align_check_sensitivity") {
      config.align.check_sensitivity = parse_bool(kv);
    } else if (kv.key == "align_init_draw") {
      config.align.init_draw = static_cast<int>(parse_int(kv));
    } else if (kv.key == "replications") {
      config.replications = static_cast<int>(parse_int(kv));
    } else {
      throw ValidationError("config line " + std::to_string(kv.line) + ": unknown key '" +
                            kv.key + "'");
    }
  }
  config.validate();
  return config;
}

Config load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_schema_help() {
  return
      "model:   K, a1, a2, nu, m_rho, s2_rho, mu_mode (fixed|estimated), m_mu, s2_mu\n"
      "chain:   iterations, burn_in, thinning, store_omega, jitter, pg_exact_max_b, rho_exact\n"
      "post:    threshold, align_max_iters, align_tol, align_check_sensitivity, align_init_draw\n"
      "tree:    pseudo_mass, exhaustive_limit\n"
      "dpm:     dpm_eta, dpm_a, dpm_b, dpm_alpha_init, dpm_sample_alpha\n"
      "eval:    replications\n"
      "profile: paper-application (threshold = 0.95, K = 10)\n";
}

}  // namespace tfa
