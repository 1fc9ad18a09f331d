// File formats: group CSV ingestion, matrix CSV, JSON checkpoints and summaries,
// edge lists, GraphML and DOT export.
//
// Matrices in JSON are nested row-major arrays: [[row 1], [row 2], ...].
#pragma once

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "core.hpp"
#include "evalmetrics.hpp"
#include "inference.hpp"
#include "sampler.hpp"
#include "simgen.hpp"

namespace linkedggm::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kCheckpointVersion = 1;

// ---------------------------------------------------------------- CSV

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& text, const std::string& where) {
  if (text.empty()) throw ConfigError(where + ": empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE)
    throw ConfigError(where + ": cannot parse '" + text + "' as a number");
  return v;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace detail

/// Numeric table with a mandatory header row.
struct Table {
  std::vector<std::string> header;
  Matrix values;
};

inline Table read_csv(const fs::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  Table t;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": missing header row");
  t.header = detail::split(line);
  for (const auto& h : t.header) {
    if (h.empty()) throw ConfigError(path.string() + ": empty column name in header");
    char* end = nullptr;
    std::strtod(h.c_str(), &end);
    if (end == h.c_str() + h.size())
      throw ConfigError(path.string() + ": header row required, first line looks numeric");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != t.header.size())
      throw ConfigError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(detail::parse_double(c, where));
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

inline std::vector<std::string> default_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < p; ++i) names.push_back("V" + std::to_string(i + 1));
  return names;
}

template <typename Derived>
void write_csv(const fs::path& path, const Eigen::MatrixBase<Derived>& m, std::vector<std::string> header = {}) {
  if (header.empty()) header = default_names(m.cols());
  if (static_cast<Eigen::Index>(header.size()) != m.cols()) throw ConfigError("write_csv: header size mismatch");
  auto out = detail::open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

/// One CSV per group; headers must match exactly across files.
inline GroupDataset load_groups(const std::vector<fs::path>& paths, bool scale = false) {
  if (paths.empty()) throw ConfigError("no data files given");
  std::vector<Matrix> raw;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    Table t = read_csv(p);
    if (raw.empty()) names = t.header;
    else if (t.header != names) throw ConfigError(p.string() + ": header differs from " + paths.front().string());
    raw.push_back(std::move(t.values));
  }
  GroupDataset data = center_by_group(raw, scale);
  data.set_names(names);
  return data;
}

inline Matrix read_matrix_csv(const fs::path& path) {
  Table t = read_csv(path);
  if (t.values.rows() != t.values.cols()) throw ConfigError(path.string() + ": expected a square matrix");
  return t.values;
}

inline Adjacency read_graph_csv(const fs::path& path) {
  const Matrix m = read_matrix_csv(path);
  Adjacency g = (m.array() != 0.0).cast<int>();
  if (!is_valid_graph(g)) throw ConfigError(path.string() + ": not a symmetric 0/1 graph with zero diagonal");
  return g;
}

// ---------------------------------------------------------------- JSON matrices

template <typename Derived>
Json to_json(const Eigen::MatrixBase<Derived>& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename M>
M matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.front().size());
  M m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<typename M::Scalar>();
  }
  return m;
}

template <typename M>
Json list_to_json(const std::vector<M>& v) {
  Json out = Json::array();
  for (const auto& m : v) out.push_back(to_json(m));
  return out;
}

template <typename M>
std::vector<M> list_from_json(const Json& j) {
  std::vector<M> out;
  for (const auto& e : j) out.push_back(matrix_from_json<M>(e));
  return out;
}

// ---------------------------------------------------------------- settings

inline Json to_json(const Hyperparameters& h) {
  return {{"v0", h.v0}, {"v1", h.v1}, {"lambda", h.lambda}, {"pi", h.pi}};
}
inline Hyperparameters hyper_from_json(const Json& j) {
  return {j.at("v0").get<double>(), j.at("v1").get<double>(), j.at("lambda").get<double>(), j.at("pi").get<double>()};
}

inline Json to_json(const SamplerConfig& c) {
  return {{"burn_in", c.burn_in},
          {"keep", c.keep},
          {"thin", c.thin},
          {"seed", c.seed},
          {"fix_phi_identity", c.fix_phi_identity},
          {"phi_proposal_floor", c.phi_proposal_floor},
          {"phi_warmup", c.phi_warmup},
          {"check_every_sweep", c.check_every_sweep}};
}
inline SamplerConfig config_from_json(const Json& j) {
  SamplerConfig c;
  c.burn_in = j.at("burn_in").get<std::int64_t>();
  c.keep = j.at("keep").get<std::int64_t>();
  c.thin = j.at("thin").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.fix_phi_identity = j.at("fix_phi_identity").get<bool>();
  c.phi_proposal_floor = j.at("phi_proposal_floor").get<double>();
  c.phi_warmup = j.value("phi_warmup", c.phi_warmup);
  c.check_every_sweep = j.value("check_every_sweep", false);
  return c;
}

// ---------------------------------------------------------------- chains

inline Json to_json(const ChainState& s) {
  return {{"omega", list_to_json(s.omega)}, {"graph", list_to_json(s.graph)}, {"phi", to_json(s.phi)}};
}
inline ChainState state_from_json(const Json& j) {
  ChainState s;
  s.omega = list_from_json<Matrix>(j.at("omega"));
  s.graph = list_from_json<Adjacency>(j.at("graph"));
  s.phi = matrix_from_json<Matrix>(j.at("phi"));
  return s;
}

inline Json to_json(const ChainOutput& o) {
  return {{"n_kept", o.n_kept},
          {"seed", o.seed},
          {"phi_proposed", o.phi_proposed},
          {"phi_accepted", o.phi_accepted},
          {"edge_counts", list_to_json(o.edge_counts)},
          {"omega_mean", list_to_json(o.omega_mean)},
          {"omega_m2", list_to_json(o.omega_m2)},
          {"phi_draws", list_to_json(o.phi_draws)}};
}
inline ChainOutput output_from_json(const Json& j) {
  ChainOutput o;
  o.n_kept = j.at("n_kept").get<std::int64_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.phi_proposed = j.at("phi_proposed").get<std::int64_t>();
  o.phi_accepted = j.at("phi_accepted").get<std::int64_t>();
  o.edge_counts = list_from_json<CountMatrix>(j.at("edge_counts"));
  o.omega_mean = list_from_json<Matrix>(j.at("omega_mean"));
  o.omega_m2 = list_from_json<Matrix>(j.at("omega_m2"));
  o.phi_draws = list_from_json<Matrix>(j.at("phi_draws"));
  return o;
}

/// Checkpoint schema (version 1):
///   format: "linkedggm-checkpoint", version, iteration, rng_state (engine text form),
///   hyper {v0, v1, lambda, pi}, config {burn_in, keep, thin, seed, fix_phi_identity,
///   phi_proposal_floor, phi_warmup, check_every_sweep}, options {update_graphs, update_phi},
///   state {omega[K], graph[K], phi}, output {n_kept, seed, phi_proposed, phi_accepted,
///   edge_counts[K], omega_mean[K], omega_m2[K], phi_draws[n_kept]}.
inline Json to_json(const Checkpoint& cp) {
  return {{"format", "linkedggm-checkpoint"},
          {"version", kCheckpointVersion},
          {"iteration", cp.iteration},
          {"rng_state", cp.rng_state},
          {"hyper", to_json(cp.hyper)},
          {"config", to_json(cp.config)},
          {"options", {{"update_graphs", cp.options.update_graphs}, {"update_phi", cp.options.update_phi}}},
          {"state", to_json(cp.state)},
          {"output", to_json(cp.output)}};
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  if (j.value("format", "") != "linkedggm-checkpoint") throw ConfigError("not a linkedggm checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  Checkpoint cp;
  cp.iteration = j.at("iteration").get<std::int64_t>();
  cp.rng_state = j.at("rng_state").get<std::string>();
  cp.hyper = hyper_from_json(j.at("hyper"));
  cp.config = config_from_json(j.at("config"));
  cp.options.update_graphs = j.at("options").at("update_graphs").get<bool>();
  cp.options.update_phi = j.at("options").at("update_phi").get<bool>();
  cp.state = state_from_json(j.at("state"));
  cp.output = output_from_json(j.at("output"));
  return cp;
}

inline void write_json(const fs::path& path, const Json& j) {
  auto out = detail::open_out(path);
  out << j.dump(1) << '\n';
}

inline Json read_json(const fs::path& path) {
  auto in = detail::open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void save_checkpoint(const fs::path& path, const Checkpoint& cp) {
  // Write then rename so an interrupted save never leaves a truncated checkpoint.
  fs::path tmp = path;
  tmp += ".tmp";
  write_json(tmp, to_json(cp));
  fs::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const fs::path& path) {
  try {
    return checkpoint_from_json(read_json(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": malformed checkpoint: " + e.what());
  }
}

// ---------------------------------------------------------------- summaries

inline Json to_json(const OverlapTable& t) {
  Json u = Json::array();
  for (auto v : t.unique) u.push_back(v);
  return {{"counts", to_json(t.counts)}, {"unique", u}};
}

inline Json to_json(const PosteriorSummary& s) {
  Json rhat = Json::object();
  for (const auto& [k, v] : s.rhat) rhat[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
  return {{"threshold", s.threshold},
          {"ppi", list_to_json(s.ppi)},
          {"selected_graphs", list_to_json(s.selected_graphs)},
          {"phi_hat", to_json(s.phi_hat)},
          {"omega_hat", list_to_json(s.omega_hat)},
          {"rhat", rhat},
          {"ppi_correlation", std::isfinite(s.ppi_correlation) ? Json(s.ppi_correlation) : Json(nullptr)},
          {"variables", s.variables}};
}

inline PosteriorSummary summary_from_json(const Json& j) {
  PosteriorSummary s;
  s.threshold = j.value("threshold", 0.5);
  s.ppi = list_from_json<Matrix>(j.at("ppi"));
  s.selected_graphs = list_from_json<Adjacency>(j.at("selected_graphs"));
  s.phi_hat = matrix_from_json<Matrix>(j.at("phi_hat"));
  s.omega_hat = list_from_json<Matrix>(j.at("omega_hat"));
  for (const auto& [k, v] : j.at("rhat").items())
    s.rhat[k] = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  const auto& r = j.at("ppi_correlation");
  s.ppi_correlation = r.is_null() ? std::numeric_limits<double>::quiet_NaN() : r.get<double>();
  s.variables = j.value("variables", std::vector<std::string>{});
  return s;
}

inline Json to_json(const Provenance& prov) {
  Json out = Json::array();
  for (const auto& c : prov) out.push_back({{"i", c.i + 1}, {"j", c.j + 1}, {"change", c.added ? "added" : "removed"}});
  return out;
}

// ---------------------------------------------------------------- edge lists and graphs

/// Edge-list contract: header `group,node_i,node_j,ppi`, 1-based group and node indices,
/// node_i < node_j, one row per selected edge. The score column is optional on input.
inline void write_edge_list(const fs::path& path, const std::vector<Adjacency>& graphs, const std::vector<Matrix>& ppi) {
  auto out = detail::open_out(path);
  out << "group,node_i,node_j,ppi\n";
  for (std::size_t k = 0; k < graphs.size(); ++k)
    for (Eigen::Index j = 1; j < graphs[k].cols(); ++j)
      for (Eigen::Index i = 0; i < j; ++i)
        if (graphs[k](i, j)) out << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << ppi.at(k)(i, j) << '\n';
}

struct EdgeListGraphs {
  std::vector<Adjacency> graphs;
  /// Listed score where given, 1 for listed edges without a score, 0 elsewhere.
  std::vector<Matrix> scores;
};

inline EdgeListGraphs read_edge_list(const fs::path& path, std::size_t groups, Eigen::Index p) {
  Table t = read_csv(path);
  auto col = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int cg = col("group"), ci = col("node_i"), cj = col("node_j");
  int cs = col("ppi");
  if (cs < 0) cs = col("score");
  if (cg < 0 || ci < 0 || cj < 0) throw ConfigError(path.string() + ": edge list needs group,node_i,node_j columns");
  EdgeListGraphs out{std::vector<Adjacency>(groups, Adjacency::Zero(p, p)), std::vector<Matrix>(groups, Matrix::Zero(p, p))};
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    const auto g = static_cast<long>(t.values(r, cg));
    const auto i = static_cast<long>(t.values(r, ci));
    const auto j = static_cast<long>(t.values(r, cj));
    if (g < 1 || g > static_cast<long>(groups) || i < 1 || j < 1 || i > p || j > p || i == j)
      throw ConfigError(path.string() + ": row " + std::to_string(r + 2) + " has out-of-range indices");
    const double s = cs >= 0 ? t.values(r, cs) : 1.0;
    auto& a = out.graphs[static_cast<std::size_t>(g - 1)];
    auto& m = out.scores[static_cast<std::size_t>(g - 1)];
    a(i - 1, j - 1) = a(j - 1, i - 1) = 1;
    m(i - 1, j - 1) = m(j - 1, i - 1) = s;
  }
  return out;
}

namespace detail {
inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace detail

/// Undirected GraphML with node labels and a `ppi` edge attribute.
inline void write_graphml(const fs::path& path, const Adjacency& g, const Matrix& ppi,
                          const std::vector<std::string>& names, const std::string& id = "G") {
  const auto labels = names.empty() ? default_names(g.rows()) : names;
  auto out = detail::open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      << "  <key id=\"ppi\" for=\"edge\" attr.name=\"ppi\" attr.type=\"double\"/>\n"
      << "  <graph id=\"" << detail::xml_escape(id) << "\" edgedefault=\"undirected\">\n";
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    out << "    <node id=\"n" << i + 1 << "\"><data key=\"label\">" << detail::xml_escape(labels[static_cast<std::size_t>(i)])
        << "</data></node>\n";
  for (Eigen::Index j = 1; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (g(i, j))
        out << "    <edge source=\"n" << i + 1 << "\" target=\"n" << j + 1 << "\"><data key=\"ppi\">" << ppi(i, j)
            << "</data></edge>\n";
  out << "  </graph>\n</graphml>\n";
}

inline void write_dot(const fs::path& path, const Adjacency& g, const Matrix& ppi, const std::vector<std::string>& names,
                      const std::string& id = "G") {
  const auto labels = names.empty() ? default_names(g.rows()) : names;
  auto out = detail::open_out(path);
  out << "graph \"" << id << "\" {\n";
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    out << "  n" << i + 1 << " [label=\"" << labels[static_cast<std::size_t>(i)] << "\"];\n";
  for (Eigen::Index j = 1; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (g(i, j)) out << "  n" << i + 1 << " -- n" << j + 1 << " [ppi=" << ppi(i, j) << "];\n";
  out << "}\n";
}

/// Variable subset file: one variable name or 1-based index per line; '#' starts a comment.
/// Returns 0-based indices.
inline std::vector<int> read_subset(const fs::path& path, const std::vector<std::string>& names, Eigen::Index p) {
  auto in = detail::open_in(path);
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    for (const auto& cell : detail::split(line)) {
      if (cell.empty()) continue;
      int idx = -1;
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == cell) idx = static_cast<int>(i);
      if (idx < 0) {
        char* end = nullptr;
        const long v = std::strtol(cell.c_str(), &end, 10);
        if (end != cell.c_str() + cell.size() || v < 1 || v > p)
          throw ConfigError(path.string() + ": unknown variable '" + cell + "'");
        idx = static_cast<int>(v - 1);
      }
      out.push_back(idx);
    }
  }
  return out;
}

}  // namespace linkedggm::io
