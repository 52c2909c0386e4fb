#pragma once

#include <string>

#include "tfa/dpm.hpp"
#include "tfa/gibbs.hpp"
#include "tfa/model.hpp"
#include "tfa/postprocess.hpp"
#include "tfa/tree_builder.hpp"

namespace tfa {

// All tunables reachable from the CLI. Loaded from a "key = value" text file
// (one pair per line, '#' comments); unknown keys are rejected. The
// "paper-application" profile presets threshold = 0.95 and K = 10; explicit
// keys override the profile regardless of their position in the file.
struct Config {
  Hyperparameters hyper;
  ChainConfig chain;  // seed comes from the CLI, not the file
  double threshold = 0.9;
  TreeBuilderOptions tree_builder;
  DpmOptions dpm;
  AlignOptions align;
  int replications = 1;  // predictive replicates per retained draw
  std::string profile;

  void validate() const;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// One-screen summary of the key schema for CLI help output.
std::string config_schema_help();

}  // namespace tfa
