#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfa/dpm.hpp"
#include "tfa/embedding.hpp"
#include "tfa/model.hpp"
#include "tfa/tree.hpp"

namespace tfa {

// --- plain files -----------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Counts file: tab-separated; header "location\t<cat1>\t<cat2>...", one row
// per location with integer cells.
CountMatrix read_counts(const std::string& path);
std::string counts_to_tsv(const CountMatrix& counts);
void write_counts(const std::string& path, const CountMatrix& counts);

// Adjacency: either an edge list ("locA locB" per line, symmetric closure
// applied) or a dense block ("dense" on the first line, then one row per
// location: id followed by M weights). Rows are normalized at load.
SpatialWeights read_adjacency(const std::string& path,
                              const std::vector<std::string>& locations);

// --- hashing (FNV-1a 64, hex) ------------------------------------------------

std::string hash_bytes(const std::string& bytes);
std::string hash_counts(const CountMatrix& counts);
std::string hash_tree(const PartitionTree& tree, const CategorySpace& space);

// --- posterior draw persistence ----------------------------------------------

// A draws directory holds manifest.json plus one columnar file per parameter
// block (text "%.17g" rows by default, raw little-endian doubles with
// --binary). Row layouts: lambda/phi i*K+k, eta a*K+k, omega i*N+a.
struct FitArtifacts {
  PosteriorDraws draws;
  PartitionTree tree;
  CategorySpace space;
  std::vector<std::string> locations;
  Hyperparameters hyper;
  bool binary = false;
};

void write_draws(const std::string& dir, const PosteriorDraws& draws,
                 const PartitionTree& tree, const CategorySpace& space,
                 const std::vector<std::string>& locations, const Hyperparameters& hyper,
                 const std::string& counts_hash, const std::string& adjacency_hash,
                 bool binary);
FitArtifacts read_draws(const std::string& dir);

struct DpmArtifacts {
  DpmDraws draws;
  std::vector<std::string> locations;
  std::vector<std::string> categories;
};

void write_dpm_draws(const std::string& dir, const DpmDraws& draws,
                     const CountMatrix& counts, const std::string& counts_hash);
DpmArtifacts read_dpm_draws(const std::string& dir);

// "factor" or "dpm", from a draws directory manifest.
std::string draws_model_kind(const std::string& dir);

// Chain layout helpers: a fit output directory contains chain_0..chain_{C-1}.
std::vector<std::string> list_chain_dirs(const std::string& dir);

}  // namespace tfa
