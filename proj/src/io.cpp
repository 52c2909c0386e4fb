#include "tfa/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tfa/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tfa {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  out.close();
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) fields.push_back(tok);
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CountMatrix read_counts(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("counts file is empty: " + path);
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 3) {
    throw ValidationError("counts header needs a location column and >= 2 categories");
  }
  CountMatrix out;
  out.categories.assign(header.begin() + 1, header.end());
  std::vector<std::vector<CountsInt>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw ValidationError("counts line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    out.locations.push_back(fields[0]);
    std::vector<CountsInt> row;
    for (size_t j = 1; j < fields.size(); ++j) {
      try {
        size_t used = 0;
        const long long v = std::stoll(fields[j], &used);
        if (used != fields[j].size()) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (const std::exception&) {
        throw ValidationError("counts line " + std::to_string(lineno) +
                              ": bad integer cell '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("counts file has no data rows: " + path);
  out.counts.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.categories.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  out.validate();
  return out;
}

std::string counts_to_tsv(const CountMatrix& counts) {
  std::string text = "location";
  for (const auto& c : counts.categories) text += "\t" + c;
  text += "\n";
  for (int i = 0; i < counts.n_locations(); ++i) {
    text += counts.locations[static_cast<size_t>(i)];
    for (int j = 0; j < counts.n_categories(); ++j) {
      text += "\t" + std::to_string(counts.counts(i, j));
    }
    text += "\n";
  }
  return text;
}

void write_counts(const std::string& path, const CountMatrix& counts) {
  counts.validate();
  write_text_file(path, counts_to_tsv(counts));
}

SpatialWeights read_adjacency(const std::string& path,
                              const std::vector<std::string>& locations) {
  const std::string text = read_text_file(path);
  const int m = static_cast<int>(locations.size());
  auto index_of = [&](const std::string& id, int lineno) {
    for (int i = 0; i < m; ++i) {
      if (locations[static_cast<size_t>(i)] == id) return i;
    }
    throw ValidationError("adjacency line " + std::to_string(lineno) +
                          ": unknown location '" + id + "'");
  };
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(m, m);
  bool dense = false;
  bool first_content = true;
  int dense_row = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    const std::vector<std::string> fields = split_ws(line);
    if (fields.empty()) continue;
    if (first_content) {
      first_content = false;
      if (fields.size() == 1 && fields[0] == "dense") {
        dense = true;
        continue;
      }
    }
    if (dense) {
      if (static_cast<int>(fields.size()) != m + 1) {
        throw ValidationError("adjacency line " + std::to_string(lineno) +
                              ": dense row needs id + " + std::to_string(m) + " weights");
      }
      const int i = index_of(fields[0], lineno);
      (void)dense_row;
      for (int j = 0; j < m; ++j) {
        try {
          raw(i, j) = std::stod(fields[static_cast<size_t>(j + 1)]);
        } catch (const std::exception&) {
          throw ValidationError("adjacency line " + std::to_string(lineno) +
                                ": bad weight '" + fields[static_cast<size_t>(j + 1)] + "'");
        }
      }
      ++dense_row;
    } else {
      if (fields.size() != 2) {
        throw ValidationError("adjacency line " + std::to_string(lineno) +
                              ": expected 'locA locB'");
      }
      const int i = index_of(fields[0], lineno);
      const int j = index_of(fields[1], lineno);
      if (i == j) {
        throw ValidationError("adjacency line " + std::to_string(lineno) + ": self edge");
      }
      raw(i, j) = 1.0;
      raw(j, i) = 1.0;  // symmetric closure
    }
  }
  return SpatialWeights::from_raw(std::move(raw));
}

std::string hash_bytes(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string hash_counts(const CountMatrix& counts) { return hash_bytes(counts_to_tsv(counts)); }

std::string hash_tree(const PartitionTree& tree, const CategorySpace& space) {
  return hash_bytes(serialize_tree(tree, space));
}

namespace {

constexpr int kFormatVersion = 1;

void write_rows(const std::string& path, const std::vector<std::vector<double>>& rows,
                bool binary) {
  if (binary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    for (const auto& row : rows) {
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    out.close();
    if (!out) throw IoError("write failed: " + path);
    return;
  }
  std::string text;
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j > 0) text += ' ';
      text += format_double(row[j]);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<std::vector<double>> read_rows(const std::string& path, int n_rows, int n_cols,
                                           bool binary) {
  std::vector<std::vector<double>> rows(static_cast<size_t>(n_rows),
                                        std::vector<double>(static_cast<size_t>(n_cols)));
  if (binary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    for (auto& row : rows) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (!in) throw IoError("truncated binary draws file: " + path);
    }
    return rows;
  }
  const std::string text = read_text_file(path);
  std::istringstream is(text);
  std::string line;
  int r = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (r >= n_rows) throw IoError("too many rows in draws file: " + path);
    std::istringstream ls(line);
    for (int c = 0; c < n_cols; ++c) {
      if (!(ls >> rows[static_cast<size_t>(r)][static_cast<size_t>(c)])) {
        throw IoError("short row " + std::to_string(r) + " in draws file: " + path);
      }
    }
    ++r;
  }
  if (r != n_rows) throw IoError("expected " + std::to_string(n_rows) + " rows in " + path);
  return rows;
}

std::string mu_mode_name(MuMode mode) {
  return mode == MuMode::kFixed ? "fixed" : "estimated";
}

MuMode mu_mode_from_name(const std::string& name) {
  if (name == "fixed") return MuMode::kFixed;
  if (name == "estimated") return MuMode::kEstimated;
  throw ValidationError("unknown mu_mode '" + name + "'");
}

}  // namespace

void write_draws(const std::string& dir, const PosteriorDraws& draws,
                 const PartitionTree& tree, const CategorySpace& space,
                 const std::vector<std::string>& locations, const Hyperparameters& hyper,
                 const std::string& counts_hash, const std::string& adjacency_hash,
                 bool binary) {
  if (draws.draws.empty()) throw ValidationError("write_draws: empty chain");
  fs::create_directories(dir);
  const int r = draws.size();
  const int m = draws.draws.front().n_locations();
  const int k = draws.draws.front().n_factors();
  const int n = draws.draws.front().n_nodes();
  const bool has_omega = draws.meta.store_omega;

  auto flatten = [&](auto getter, int cols) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(r),
                                          std::vector<double>(static_cast<size_t>(cols)));
    for (int i = 0; i < r; ++i) getter(draws.draws[static_cast<size_t>(i)], rows[static_cast<size_t>(i)]);
    return rows;
  };
  const std::string ext = binary ? ".bin" : ".txt";
  write_rows(dir + "/lambda" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int i = 0; i < m; ++i)
                     for (int kk = 0; kk < k; ++kk) row[static_cast<size_t>(i * k + kk)] = s.Lambda(i, kk);
                 },
                 m * k),
             binary);
  write_rows(dir + "/eta" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int a = 0; a < n; ++a)
                     for (int kk = 0; kk < k; ++kk) row[static_cast<size_t>(a * k + kk)] = s.Eta(kk, a);
                 },
                 n * k),
             binary);
  write_rows(dir + "/mu" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int a = 0; a < n; ++a) row[static_cast<size_t>(a)] = s.Mu[a];
                 },
                 n),
             binary);
  write_rows(dir + "/phi" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int i = 0; i < m; ++i)
                     for (int kk = 0; kk < k; ++kk) row[static_cast<size_t>(i * k + kk)] = s.Phi(i, kk);
                 },
                 m * k),
             binary);
  write_rows(dir + "/delta" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int kk = 0; kk < k; ++kk) row[static_cast<size_t>(kk)] = s.Delta[kk];
                 },
                 k),
             binary);
  write_rows(dir + "/rho" + ext,
             flatten(
                 [&](const ModelState& s, std::vector<double>& row) {
                   for (int kk = 0; kk < k; ++kk) row[static_cast<size_t>(kk)] = s.Rho[kk];
                 },
                 k),
             binary);
  if (has_omega) {
    write_rows(dir + "/omega" + ext,
               flatten(
                   [&](const ModelState& s, std::vector<double>& row) {
                     for (int i = 0; i < m; ++i)
                       for (int a = 0; a < n; ++a) row[static_cast<size_t>(i * n + a)] = s.Omega(i, a);
                   },
                   m * n),
               binary);
  }

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["model"] = "factor";
  manifest["seed"] = draws.meta.seed;
  manifest["iterations"] = draws.meta.iterations;
  manifest["burn_in"] = draws.meta.burn_in;
  manifest["thinning"] = draws.meta.thinning;
  manifest["store_omega"] = has_omega;
  manifest["retained"] = r;
  manifest["dimensions"] = {{"locations", m}, {"factors", k}, {"nodes", n},
                            {"categories", space.size()}};
  manifest["locations"] = locations;
  manifest["categories"] = space.labels;
  std::string tree_text = serialize_tree(tree, space);
  if (!tree_text.empty() && tree_text.back() == '\n') tree_text.pop_back();
  manifest["tree"] = tree_text;
  manifest["hyper"] = {{"K", hyper.K},         {"a1", hyper.a1},
                       {"a2", hyper.a2},       {"nu", hyper.nu},
                       {"m_rho", hyper.m_rho}, {"s2_rho", hyper.s2_rho},
                       {"mu_mode", mu_mode_name(hyper.mu_mode)},
                       {"m_mu", hyper.m_mu},   {"s2_mu", hyper.s2_mu}};
  manifest["hashes"] = {{"counts", counts_hash},
                        {"tree", draws.meta.tree_hash},
                        {"adjacency", adjacency_hash}};
  manifest["storage"] = binary ? "binary" : "text";
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

FitArtifacts read_draws(const std::string& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir + "/manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("model", "") != "factor") {
    throw ValidationError("draws directory " + dir + " does not hold a factor-model chain");
  }
  FitArtifacts out;
  out.binary = manifest.value("storage", "text") == "binary";
  const int r = manifest.at("retained").get<int>();
  const int m = manifest.at("dimensions").at("locations").get<int>();
  const int k = manifest.at("dimensions").at("factors").get<int>();
  const int n = manifest.at("dimensions").at("nodes").get<int>();
  out.locations = manifest.at("locations").get<std::vector<std::string>>();
  out.space.labels = manifest.at("categories").get<std::vector<std::string>>();
  out.tree = parse_tree(manifest.at("tree").get<std::string>(), out.space);
  const auto& h = manifest.at("hyper");
  out.hyper.K = h.at("K").get<int>();
  out.hyper.a1 = h.at("a1").get<double>();
  out.hyper.a2 = h.at("a2").get<double>();
  out.hyper.nu = h.at("nu").get<double>();
  out.hyper.m_rho = h.at("m_rho").get<double>();
  out.hyper.s2_rho = h.at("s2_rho").get<double>();
  out.hyper.mu_mode = mu_mode_from_name(h.at("mu_mode").get<std::string>());
  out.hyper.m_mu = h.at("m_mu").get<double>();
  out.hyper.s2_mu = h.at("s2_mu").get<double>();

  out.draws.meta.seed = manifest.at("seed").get<std::uint64_t>();
  out.draws.meta.iterations = manifest.at("iterations").get<int>();
  out.draws.meta.burn_in = manifest.at("burn_in").get<int>();
  out.draws.meta.thinning = manifest.at("thinning").get<int>();
  out.draws.meta.store_omega = manifest.at("store_omega").get<bool>();
  out.draws.meta.tree_hash = manifest.at("hashes").at("tree").get<std::string>();
  out.draws.meta.data_hash = manifest.at("hashes").at("counts").get<std::string>();

  const std::string ext = out.binary ? ".bin" : ".txt";
  const auto lambda = read_rows(dir + "/lambda" + ext, r, m * k, out.binary);
  const auto eta = read_rows(dir + "/eta" + ext, r, n * k, out.binary);
  const auto mu = read_rows(dir + "/mu" + ext, r, n, out.binary);
  const auto phi = read_rows(dir + "/phi" + ext, r, m * k, out.binary);
  const auto delta = read_rows(dir + "/delta" + ext, r, k, out.binary);
  const auto rho = read_rows(dir + "/rho" + ext, r, k, out.binary);
  std::vector<std::vector<double>> omega;
  if (out.draws.meta.store_omega) {
    omega = read_rows(dir + "/omega" + ext, r, m * n, out.binary);
  }
  out.draws.draws.resize(static_cast<size_t>(r));
  for (int d = 0; d < r; ++d) {
    ModelState& s = out.draws.draws[static_cast<size_t>(d)];
    s.Lambda.resize(m, k);
    s.Phi.resize(m, k);
    s.Eta.resize(k, n);
    s.Mu.resize(n);
    s.Delta.resize(k);
    s.Rho.resize(k);
    const auto dd = static_cast<size_t>(d);
    for (int i = 0; i < m; ++i) {
      for (int kk = 0; kk < k; ++kk) {
        s.Lambda(i, kk) = lambda[dd][static_cast<size_t>(i * k + kk)];
        s.Phi(i, kk) = phi[dd][static_cast<size_t>(i * k + kk)];
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int kk = 0; kk < k; ++kk) s.Eta(kk, a) = eta[dd][static_cast<size_t>(a * k + kk)];
      s.Mu[a] = mu[dd][static_cast<size_t>(a)];
    }
    for (int kk = 0; kk < k; ++kk) {
      s.Delta[kk] = delta[dd][static_cast<size_t>(kk)];
      s.Rho[kk] = rho[dd][static_cast<size_t>(kk)];
    }
    if (out.draws.meta.store_omega) {
      s.Omega.resize(m, n);
      for (int i = 0; i < m; ++i)
        for (int a = 0; a < n; ++a) s.Omega(i, a) = omega[dd][static_cast<size_t>(i * n + a)];
    }
  }
  return out;
}

void write_dpm_draws(const std::string& dir, const DpmDraws& draws,
                     const CountMatrix& counts, const std::string& counts_hash) {
  if (draws.size() == 0) throw ValidationError("write_dpm_draws: empty chain");
  fs::create_directories(dir);
  std::string assignments_text;
  for (const auto& row : draws.assignments) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) assignments_text += ' ';
      assignments_text += std::to_string(row[i]);
    }
    assignments_text += '\n';
  }
  write_text_file(dir + "/assignments.txt", assignments_text);
  std::string alpha_text;
  for (double a : draws.alphas) alpha_text += format_double(a) + "\n";
  write_text_file(dir + "/alpha.txt", alpha_text);

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["model"] = "dpm";
  manifest["seed"] = draws.seed;
  manifest["iterations"] = draws.iterations;
  manifest["burn_in"] = draws.burn_in;
  manifest["thinning"] = draws.thinning;
  manifest["retained"] = draws.size();
  manifest["dimensions"] = {{"locations", counts.n_locations()},
                            {"categories", counts.n_categories()}};
  manifest["locations"] = counts.locations;
  manifest["categories"] = counts.categories;
  manifest["options"] = {{"eta", draws.options.eta},
                         {"a", draws.options.a},
                         {"b", draws.options.b},
                         {"alpha_init", draws.options.alpha_init},
                         {"sample_alpha", draws.options.sample_alpha}};
  manifest["hashes"] = {{"counts", counts_hash}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

DpmArtifacts read_dpm_draws(const std::string& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir + "/manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("model", "") != "dpm") {
    throw ValidationError("draws directory " + dir + " does not hold a DPM chain");
  }
  DpmArtifacts out;
  out.locations = manifest.at("locations").get<std::vector<std::string>>();
  out.categories = manifest.at("categories").get<std::vector<std::string>>();
  out.draws.seed = manifest.at("seed").get<std::uint64_t>();
  out.draws.iterations = manifest.at("iterations").get<int>();
  out.draws.burn_in = manifest.at("burn_in").get<int>();
  out.draws.thinning = manifest.at("thinning").get<int>();
  const auto& o = manifest.at("options");
  out.draws.options.eta = o.at("eta").get<double>();
  out.draws.options.a = o.at("a").get<double>();
  out.draws.options.b = o.at("b").get<double>();
  out.draws.options.alpha_init = o.at("alpha_init").get<double>();
  out.draws.options.sample_alpha = o.at("sample_alpha").get<bool>();
  const int r = manifest.at("retained").get<int>();
  const int m = manifest.at("dimensions").at("locations").get<int>();

  const std::string text = read_text_file(dir + "/assignments.txt");
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<int> row;
    int v;
    while (ls >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != m) {
      throw IoError("assignments row has wrong length in " + dir);
    }
    out.draws.assignments.push_back(std::move(row));
  }
  if (out.draws.size() != r) throw IoError("assignments row count mismatch in " + dir);

  const std::string alpha_text = read_text_file(dir + "/alpha.txt");
  std::istringstream as(alpha_text);
  double a;
  while (as >> a) out.draws.alphas.push_back(a);
  if (static_cast<int>(out.draws.alphas.size()) != r) {
    throw IoError("alpha row count mismatch in " + dir);
  }
  return out;
}

std::string draws_model_kind(const std::string& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir + "/manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  return manifest.value("model", "");
}

std::vector<std::string> list_chain_dirs(const std::string& dir) {
  std::vector<std::string> chains;
  for (int c = 0;; ++c) {
    const std::string chain_dir = dir + "/chain_" + std::to_string(c);
    if (!fs::exists(chain_dir + "/manifest.json")) break;
    chains.push_back(chain_dir);
  }
  if (chains.empty() && fs::exists(dir + "/manifest.json")) {
    // single-chain layout: the directory itself holds the draws
    json manifest = json::parse(read_text_file(dir + "/manifest.json"));
    if (manifest.contains("retained")) chains.push_back(dir);
  }
  if (chains.empty()) throw IoError("no chains found under " + dir);
  return chains;
}

}  // namespace tfa
