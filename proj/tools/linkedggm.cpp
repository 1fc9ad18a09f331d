// linkedggm command-line tool: simulate, fit, select, evaluate, diagnose, export.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical abort, 1 anything else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "linkedggm/io.hpp"
#include "linkedggm/linkedggm.hpp"

namespace fs = std::filesystem;
using namespace linkedggm;
using io::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kOutputRootEnv = "LINKEDGGM_OUTPUT_ROOT";

fs::path default_out(const std::string& command) {
  const char* root = std::getenv(kOutputRootEnv);
  return fs::path(root && *root ? root : "linkedggm-out") / command;
}

std::string rep_name(int r) {
  std::ostringstream os;
  os << "rep_" << std::setw(3) << std::setfill('0') << r;
  return os.str();
}

std::string toml_value(const std::string& v) {
  if (v == "true" || v == "false") return v;
  char* end = nullptr;
  std::strtod(v.c_str(), &end);
  if (!v.empty() && end == v.c_str() + v.size()) return v;
  std::string q = "\"";
  for (char c : v) q += (c == '"' || c == '\\') ? std::string("\\") + c : std::string(1, c);
  return q + "\"";
}

/// The parsed subcommand's options, given or defaulted, as a [command] TOML section.
std::string resolved_config(const CLI::App& sub) {
  std::ostringstream os;
  os << '[' << sub.get_name() << "]\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const bool multi = opt->get_items_expected_max() > 1;
    std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
    if (opt->count() == 0) {
      std::string d = opt->get_default_str();
      if (multi && d.size() >= 2 && (d.front() == '[' || d.front() == '{')) d = d.substr(1, d.size() - 2);
      if (multi) {
        std::istringstream is(d);
        std::string item;
        while (std::getline(is, item, ',')) values.push_back(io::detail::trim(item));
      } else if (!d.empty()) {
        values.push_back(d);
      }
    }
    if (opt->get_type_size() == 0 && opt->count() > 0) values = {"true"};  // flag
    if (values.empty()) continue;
    os << opt->get_lnames().front() << " = ";
    if (multi) {
      os << '[';
      for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << toml_value(values[i]);
      os << ']';
    } else {
      os << toml_value(values.front());
    }
    os << '\n';
  }
  return os.str();
}

/// Echoes the resolved configuration next to the outputs; the .toml copy can be fed back with --config.
void write_manifest(const fs::path& out, const CLI::App& sub, int argc, char** argv, Json extra = Json::object()) {
  Json args = Json::array();
  for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
  const std::string resolved = resolved_config(sub);
  Json m = {{"tool", "linkedggm"}, {"version", kVersion}, {"command", sub.get_name()}, {"arguments", args},
            {"resolved_config", resolved}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  io::write_json(out / "manifest.json", m);
  std::ofstream(out / (sub.get_name() + ".toml")) << resolved;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  int replicates = 1;
  int n_comm = 5;
  int comm_size = 20;
  int edges_per_node = 1;
  std::string steps = "5:5,20:0";
  std::vector<int> n{150};
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<GroupStep> parse_steps(const std::string& text) {
  std::vector<GroupStep> steps;
  if (text.empty() || text == "none") return steps;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("steps entries must look like remove:add, got '" + item + "'");
    try {
      steps.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError("steps entries must be integers, got '" + item + "'");
    }
  }
  return steps;
}

void run_simulate(const SimulateOptions& o, const fs::path& out) {
  ScenarioSpec spec;
  spec.n_comm = o.n_comm;
  spec.comm_size = o.comm_size;
  spec.edges_per_node = o.edges_per_node;
  spec.steps = parse_steps(o.steps);
  spec.n = o.n;
  spec.validate();
  if (o.replicates < 1) throw ConfigError("replicates must be at least 1");
  for (int r = 1; r <= o.replicates; ++r) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(r - 1);
    const SimScenario sc = build_scenario(spec, seed);
    const fs::path dir = out / rep_name(r);
    Json prov = Json::array();
    for (const auto& p : sc.provenance) prov.push_back(io::to_json(p));
    Json edges = Json::array();
    for (const auto& g : sc.true_graphs) edges.push_back(edge_count(g));
    for (int k = 0; k < sc.groups; ++k) {
      const auto ks = std::to_string(k + 1);
      io::write_csv(dir / ("group_" + ks + ".csv"), sc.datasets[static_cast<std::size_t>(k)]);
      io::write_csv(dir / ("truth_graph_" + ks + ".csv"), sc.true_graphs[static_cast<std::size_t>(k)]);
      io::write_csv(dir / ("truth_omega_" + ks + ".csv"), sc.true_omegas[static_cast<std::size_t>(k)]);
    }
    io::write_json(dir / "provenance.json", {{"seed", seed},
                                             {"groups", sc.groups},
                                             {"variables", sc.variables},
                                             {"edges", edges},
                                             {"changes", prov}});
  }
  std::cerr << "wrote " << o.replicates << " scenario(s) to " << out << '\n';
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::vector<std::string> data;
  bool scale = false;
  int chains = 2;
  std::int64_t burn_in = 5000;
  std::int64_t keep = 20000;
  std::int64_t thin = 1;
  std::int64_t phi_warmup = 1000;
  std::uint64_t seed = 1;
  double v0 = 0.01;
  double v1 = 0.1;
  double lambda = 1.0;
  double pi = -1.0;  // negative: 2/(p-1)
  bool fix_phi_identity = false;
  std::int64_t checkpoint_every = 1000;
  bool resume = false;
  std::string out;
};

Hyperparameters resolve_hyper(double v0, double v1, double lambda, double pi, Eigen::Index p) {
  Hyperparameters h{v0, v1, lambda, pi > 0.0 ? pi : default_pi(p)};
  h.validate();
  return h;
}

fs::path chain_file(const fs::path& dir, int c) { return dir / ("chain_" + std::to_string(c + 1) + ".json"); }

void run_fit(const FitOptions& o, const fs::path& out) {
  std::vector<fs::path> paths(o.data.begin(), o.data.end());
  const GroupDataset data = io::load_groups(paths, o.scale);
  const Hyperparameters hyper = resolve_hyper(o.v0, o.v1, o.lambda, o.pi, data.variables());
  if (o.chains < 1) throw ConfigError("chains must be at least 1");
  if (o.checkpoint_every < 0) throw ConfigError("checkpoint-every must be non-negative");

  SamplerConfig base;
  base.burn_in = o.burn_in;
  base.keep = o.keep;
  base.thin = o.thin;
  base.phi_warmup = o.phi_warmup;
  base.fix_phi_identity = o.fix_phi_identity;
  base.validate();

  fs::create_directories(out);
  std::mutex log_mutex;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(o.chains));
  std::vector<ChainOutput> results(static_cast<std::size_t>(o.chains));
  std::vector<std::thread> threads;
  for (int c = 0; c < o.chains; ++c) {
    threads.emplace_back([&, c] {
      try {
        SamplerConfig cfg = base;
        cfg.seed = o.seed + static_cast<std::uint64_t>(c);
        const fs::path file = chain_file(out, c);
        std::optional<Chain> chain;
        if (o.resume && fs::exists(file)) {
          chain.emplace(Chain::resume(data, io::load_checkpoint(file)));
          std::lock_guard lock(log_mutex);
          std::cerr << "[chain " << c + 1 << "] resuming at iteration " << chain->iteration() << '\n';
        } else {
          chain.emplace(data, hyper, cfg);
        }
        auto progress = [&](std::int64_t it, std::int64_t total, double secs) {
          std::lock_guard lock(log_mutex);
          std::cerr << "[chain " << c + 1 << "] iteration " << it << "/" << total << "  " << std::fixed
                    << std::setprecision(2) << 1000.0 * secs << " ms/sweep\n";
        };
        while (!chain->done()) {
          chain->run(o.checkpoint_every > 0 ? o.checkpoint_every : -1, progress);
          io::save_checkpoint(file, chain->checkpoint());
        }
        results[static_cast<std::size_t>(c)] = chain->output();
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int c = 0; c < o.chains; ++c) {
    const auto& r = results[static_cast<std::size_t>(c)];
    std::cerr << "[chain " << c + 1 << "] kept " << r.n_kept << " draws, Phi acceptance rate ";
    if (r.phi_proposed > 0) std::cerr << std::setprecision(3) << r.phi_acceptance_rate() << '\n';
    else std::cerr << "n/a (Phi not sampled)\n";
  }
}

// ---------------------------------------------------------------- select

struct SelectOptions {
  std::string fit_dir;
  std::vector<std::string> data;
  bool scale = false;
  double threshold = 0.5;
  std::int64_t resample_burn_in = 1000;
  std::int64_t resample_keep = 5000;
  std::uint64_t seed = 1;
  std::vector<std::string> subsets;
  int graph_random = 100;
  std::string out;
};

std::vector<ChainOutput> load_chains(const fs::path& dir, Hyperparameters* hyper = nullptr) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw ConfigError("fit directory " + dir.string() + " does not exist");
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("chain_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  if (files.empty()) throw ConfigError("no chain_*.json files in " + dir.string());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return std::stoi(a.stem().string().substr(6)) < std::stoi(b.stem().string().substr(6));
  });
  std::vector<ChainOutput> out;
  for (const auto& f : files) {
    const Checkpoint cp = io::load_checkpoint(f);
    if (cp.iteration < cp.config.total_sweeps())
      throw ConfigError(f.string() + " is an unfinished chain (iteration " + std::to_string(cp.iteration) +
                        "); rerun fit with --resume");
    if (hyper) *hyper = cp.hyper;
    out.push_back(cp.output);
  }
  return out;
}

/// Data files and scaling flag recorded by a fit run, unless overridden.
std::pair<std::vector<fs::path>, bool> fit_inputs(const fs::path& fit_dir, const std::vector<std::string>& data,
                                                  bool scale) {
  if (!data.empty()) return {{data.begin(), data.end()}, scale};
  const Json m = io::read_json(fit_dir / "manifest.json");
  std::vector<fs::path> paths;
  for (const auto& p : m.at("inputs").at("data")) paths.emplace_back(p.get<std::string>());
  return {paths, m.at("inputs").at("scale").get<bool>()};
}

void write_overlap(const fs::path& dir, const std::string& stem, const OverlapTable& t) {
  io::write_json(dir / (stem + ".json"), io::to_json(t));
  std::vector<std::string> header;
  for (std::size_t k = 0; k < t.unique.size(); ++k) header.push_back("group_" + std::to_string(k + 1));
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m(t.counts.rows() + 1, t.counts.cols());
  m.topRows(t.counts.rows()) = t.counts;
  for (std::size_t k = 0; k < t.unique.size(); ++k) m(t.counts.rows(), static_cast<Eigen::Index>(k)) = t.unique[k];
  io::write_csv(dir / (stem + ".csv"), m, header);  // last row: unique edges per group
}

void write_graph_exports(const fs::path& out, const PosteriorSummary& s) {
  io::write_edge_list(out / "edges.csv", s.selected_graphs, s.ppi);
  for (std::size_t k = 0; k < s.selected_graphs.size(); ++k) {
    const auto id = "group_" + std::to_string(k + 1);
    io::write_graphml(out / (id + ".graphml"), s.selected_graphs[k], s.ppi[k], s.variables, id);
    io::write_dot(out / (id + ".dot"), s.selected_graphs[k], s.ppi[k], s.variables, id);
  }
}

void run_select(const SelectOptions& o, const fs::path& out) {
  const fs::path fit_dir(o.fit_dir);
  Hyperparameters hyper;
  const auto chains = load_chains(fit_dir, &hyper);
  const auto [paths, scale] = fit_inputs(fit_dir, o.data, o.scale);
  const GroupDataset data = io::load_groups(paths, scale);
  if (static_cast<std::size_t>(chains.front().edge_counts.size()) != data.groups() ||
      chains.front().edge_counts.front().rows() != data.variables())
    throw ConfigError("chain outputs do not match the data dimensions");

  SamplerConfig resample;
  resample.burn_in = o.resample_burn_in;
  resample.keep = o.resample_keep;
  resample.seed = o.seed;
  if (chains.size() > 1) {
    for (const auto& c : chains)
      if (c.n_kept != chains.front().n_kept) throw ConfigError("chains have different numbers of kept draws");
  }
  PosteriorSummary s = summarize(chains, data, hyper, resample, o.threshold);
  if (s.variables.empty()) s.variables = io::default_names(data.variables());
  io::write_json(out / "summary.json", io::to_json(s));
  write_graph_exports(out, s);
  write_overlap(out, "overlap", edge_overlap_table(s.selected_graphs));
  for (const auto& sub : o.subsets) {
    const auto idx = io::read_subset(sub, s.variables, data.variables());
    write_overlap(out, "overlap_" + fs::path(sub).stem().string(), edge_overlap_table(s.selected_graphs, idx));
  }
  if (o.graph_random > 0) {
    auto csv = io::detail::open_out(out / "graph_metrics.csv");
    csv << "group,clustering,path_length,gamma,lambda,sigma,defined\n";
    Rng rng(o.seed);
    for (std::size_t k = 0; k < s.selected_graphs.size(); ++k) {
      const auto gm = graph_metrics(s.selected_graphs[k], o.graph_random, rng);
      csv << k + 1 << ',' << gm.clustering << ',' << gm.path_length << ',' << gm.gamma << ',' << gm.lambda << ','
          << gm.sigma << ',' << (gm.defined ? 1 : 0) << '\n';
    }
  }
  std::cerr << "selected edges per group:";
  for (const auto& g : s.selected_graphs) std::cerr << ' ' << edge_count(g);
  std::cerr << "\nPhi estimate:\n" << s.phi_hat << '\n';
  if (std::isfinite(s.ppi_correlation)) std::cerr << "cross-chain PPI correlation: " << s.ppi_correlation << '\n';
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::vector<std::string> summaries;
  std::vector<std::string> edge_lists;
  std::vector<std::string> truths;
  std::string method = "linked";
  int graph_random = 0;
  std::uint64_t seed = 1;
  bool append = false;
  std::string out;
};

struct Truth {
  std::vector<Adjacency> graphs;
  std::vector<Matrix> omegas;
};

Truth load_truth(const fs::path& dir) {
  const Json prov = io::read_json(dir / "provenance.json");
  const int k = prov.at("groups").get<int>();
  Truth t;
  for (int g = 1; g <= k; ++g) {
    t.graphs.push_back(io::read_graph_csv(dir / ("truth_graph_" + std::to_string(g) + ".csv")));
    const fs::path om = dir / ("truth_omega_" + std::to_string(g) + ".csv");
    if (fs::exists(om)) t.omegas.push_back(io::read_matrix_csv(om));
  }
  return t;
}

using MetricRow = std::map<std::string, double>;

MetricRow evaluate_one(const std::vector<Adjacency>& selected, const std::vector<Matrix>& scores,
                       const std::vector<Matrix>* omega_hat, const Truth& truth, int graph_random, Rng& rng) {
  if (selected.size() != truth.graphs.size()) throw ConfigError("estimate and truth disagree on the number of groups");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricRow row;
  const Rates all = rates_and_mcc(confusion(selected, truth.graphs));
  row["tpr"] = all.tpr;
  row["fpr"] = all.fpr;
  row["mcc"] = all.mcc;
  row["auc"] = roc_auc(scores, truth.graphs).value_or(nan);
  double edges = 0;
  for (const auto& g : selected) edges += static_cast<double>(edge_count(g));
  row["edges"] = edges / static_cast<double>(selected.size());
  if (truth.graphs.size() >= 2) {
    const auto d = differential_eval(selected, scores, truth.graphs);
    row["diff_tpr"] = d.rates.tpr;
    row["diff_fpr"] = d.rates.fpr;
    row["diff_mcc"] = d.rates.mcc;
    row["diff_auc"] = d.auc.value_or(nan);
  }
  if (omega_hat) {
    if (truth.omegas.size() != truth.graphs.size())
      throw ConfigError("Frobenius loss requested but truth precision matrices are missing");
    row["frobenius_loss"] = frobenius_loss(*omega_hat, truth.omegas);
  }
  if (graph_random > 0) {
    double sigma = 0;
    int n = 0;
    for (const auto& g : selected) {
      const auto gm = graph_metrics(g, graph_random, rng);
      if (gm.defined) {
        sigma += gm.sigma;
        ++n;
      }
    }
    row["sigma"] = n > 0 ? sigma / n : nan;
  }
  return row;
}

void run_evaluate(const EvaluateOptions& o, const fs::path& out) {
  const bool external = !o.edge_lists.empty();
  if (external == !o.summaries.empty()) throw ConfigError("give either --summary or --edge-list files, not both");
  const auto& inputs = external ? o.edge_lists : o.summaries;
  if (inputs.size() != o.truths.size())
    throw ConfigError("need one --truth directory per estimate (" + std::to_string(inputs.size()) + " vs " +
                      std::to_string(o.truths.size()) + ")");
  Rng rng(o.seed);
  std::vector<MetricRow> rows;
  for (std::size_t r = 0; r < inputs.size(); ++r) {
    const Truth truth = load_truth(o.truths[r]);
    const Eigen::Index p = truth.graphs.front().rows();
    if (external) {
      const auto el = io::read_edge_list(inputs[r], truth.graphs.size(), p);
      rows.push_back(evaluate_one(el.graphs, el.scores, nullptr, truth, o.graph_random, rng));
    } else {
      const PosteriorSummary s = io::summary_from_json(io::read_json(inputs[r]));
      rows.push_back(evaluate_one(s.selected_graphs, s.ppi, &s.omega_hat, truth, o.graph_random, rng));
    }
  }

  const fs::path csv_path = out / "metrics.csv";
  const bool header = !(o.append && fs::exists(csv_path));
  fs::create_directories(out);
  std::ofstream csv(csv_path, o.append ? std::ios::app : std::ios::trunc);
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (header) csv << "replicate,method,metric,value\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [metric, value] : rows[r]) csv << r + 1 << ',' << o.method << ',' << metric << ',' << value << '\n';

  Json summary = Json::object();
  const fs::path json_path = out / "metrics_summary.json";
  if (o.append && fs::exists(json_path)) summary = io::read_json(json_path);
  Json method = Json::object();
  for (const auto& [metric, unused] : rows.front()) {
    std::vector<double> v;
    for (const auto& row : rows)
      if (std::isfinite(row.at(metric))) v.push_back(row.at(metric));
    double mean = 0, se = 0;
    for (double x : v) mean += x;
    if (!v.empty()) mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    method[metric] = {{"mean", v.empty() ? Json(nullptr) : Json(mean)}, {"se", se}, {"n", v.size()}};
    std::cerr << std::left << std::setw(16) << metric << std::setprecision(4) << mean << " (" << se << ")\n";
  }
  summary[o.method] = method;
  io::write_json(json_path, summary);
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseOptions {
  std::string fit_dir;
  double limit = 1.1;
  std::string out;
};

void run_diagnose(const DiagnoseOptions& o, const fs::path& out) {
  const auto chains = load_chains(o.fit_dir);
  Json report;
  Json acceptance = Json::array();
  for (const auto& c : chains)
    acceptance.push_back(c.phi_proposed > 0 ? Json(c.phi_acceptance_rate()) : Json(nullptr));
  report["phi_acceptance"] = acceptance;
  report["chains"] = chains.size();
  if (chains.size() < 2) {
    std::cerr << "warning: a single chain was found; R-hat needs at least two and is skipped\n";
    report["rhat"] = nullptr;
  } else {
    const auto rhat = rhat_table(chains);
    std::vector<std::pair<std::string, double>> sorted(rhat.begin(), rhat.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Json worst = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, sorted.size()); ++i)
      worst.push_back({{"parameter", sorted[i].first},
                       {"rhat", std::isfinite(sorted[i].second) ? Json(sorted[i].second) : Json(nullptr)}});
    const auto over = std::count_if(sorted.begin(), sorted.end(), [&](const auto& e) { return !(e.second < o.limit); });
    report["rhat"] = {{"monitored", sorted.size()},
                      {"max", std::isfinite(sorted.front().second) ? Json(sorted.front().second) : Json(nullptr)},
                      {"limit", o.limit},
                      {"exceeding", over},
                      {"worst", worst}};
    const double corr = min_ppi_correlation(chains);
    report["ppi_correlation"] = std::isfinite(corr) ? Json(corr) : Json(nullptr);
    std::cerr << "max R-hat " << sorted.front().second << " over " << sorted.size() << " parameters; " << over
              << " at or above " << o.limit << "\nworst:\n";
    for (const auto& w : worst) std::cerr << "  " << w["parameter"].get<std::string>() << "  " << w["rhat"] << '\n';
    std::cerr << "cross-chain PPI correlation " << corr << '\n';
  }
  io::write_json(out / "diagnostics.json", report);
}

// ---------------------------------------------------------------- export

struct ExportOptions {
  std::string summary;
  std::string format = "all";
  std::string out;
};

void run_export(const ExportOptions& o, const fs::path& out) {
  PosteriorSummary s = io::summary_from_json(io::read_json(o.summary));
  if (s.variables.empty() && !s.ppi.empty()) s.variables = io::default_names(s.ppi.front().rows());
  const bool all = o.format == "all";
  if (all || o.format == "edgelist") io::write_edge_list(out / "edges.csv", s.selected_graphs, s.ppi);
  for (std::size_t k = 0; k < s.selected_graphs.size(); ++k) {
    const auto id = "group_" + std::to_string(k + 1);
    if (all || o.format == "graphml")
      io::write_graphml(out / (id + ".graphml"), s.selected_graphs[k], s.ppi[k], s.variables, id);
    if (all || o.format == "dot") io::write_dot(out / (id + ".dot"), s.selected_graphs[k], s.ppi[k], s.variables, id);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint Bayesian estimation of linked Gaussian graphical models"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Key-value (TOML/INI) configuration file; command-line flags take precedence");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate ground-truth scenarios and data");
  simulate->add_option("--replicates", sim.replicates, "Number of scenarios");
  simulate->add_option("--n-comm", sim.n_comm, "Communities");
  simulate->add_option("--comm-size", sim.comm_size, "Nodes per community");
  simulate->add_option("--edges-per-node", sim.edges_per_node, "Preferential-attachment edges per new node");
  simulate->add_option("--steps", sim.steps, "Per extra group remove:add counts, comma separated ('none' for K=1)");
  simulate->add_option("--n", sim.n, "Observations per group (one value or one per group)");
  simulate->add_option("--seed", sim.seed, "Seed of replicate 1; replicate r uses seed + r - 1");
  simulate->add_option("--out", sim.out, "Output directory");

  FitOptions fit;
  auto* fitc = app.add_subcommand("fit", "Run MCMC chains");
  fitc->add_option("--data", fit.data, "Per-group CSV files with identical headers")->required();
  fitc->add_flag("--scale", fit.scale, "Scale columns to unit variance after centering");
  fitc->add_option("--chains", fit.chains, "Number of chains (run in parallel)");
  fitc->add_option("--burn-in", fit.burn_in, "Burn-in sweeps");
  fitc->add_option("--keep", fit.keep, "Post-burn-in sweeps");
  fitc->add_option("--thin", fit.thin, "Keep every thin-th post-burn-in sweep");
  fitc->add_option("--phi-warmup", fit.phi_warmup, "Initial burn-in sweeps with Phi held at the identity");
  fitc->add_option("--seed", fit.seed, "Chain c uses seed + c - 1");
  fitc->add_option("--v0", fit.v0, "Spike standard deviation");
  fitc->add_option("--v1", fit.v1, "Slab standard deviation");
  fitc->add_option("--lambda", fit.lambda, "Rate of the exponential prior on diagonal entries");
  fitc->add_option("--pi", fit.pi, "Edge prior parameter (non-positive: 2/(p-1))");
  fitc->add_flag("--fix-phi-identity", fit.fix_phi_identity, "Separate estimation: hold Phi at the identity");
  fitc->add_option("--checkpoint-every", fit.checkpoint_every, "Sweeps between checkpoints (0: only at the end)");
  fitc->add_flag("--resume", fit.resume, "Continue from existing chain files in the output directory");
  fitc->add_option("--out", fit.out, "Output directory");

  SelectOptions sel;
  auto* selc = app.add_subcommand("select", "Pool chains, select graphs, estimate Phi and resample Omega");
  selc->add_option("--fit-dir", sel.fit_dir, "Directory written by fit")->required();
  selc->add_option("--data", sel.data, "Override the data files recorded by fit");
  selc->add_flag("--scale", sel.scale, "With --data: scale columns to unit variance");
  selc->add_option("--threshold", sel.threshold, "PPI threshold of the median model");
  selc->add_option("--resample-burn-in", sel.resample_burn_in, "Burn-in of the conditional Omega resampling");
  selc->add_option("--resample-keep", sel.resample_keep, "Kept sweeps of the conditional Omega resampling");
  selc->add_option("--seed", sel.seed, "Seed for resampling and random-graph baselines");
  selc->add_option("--subset", sel.subsets, "Variable subset files for restricted overlap tables");
  selc->add_option("--graph-random", sel.graph_random, "Random graphs per small-world baseline (0 disables)");
  selc->add_option("--out", sel.out, "Output directory");

  EvaluateOptions ev;
  auto* evc = app.add_subcommand("evaluate", "Score selected graphs and estimates against ground truth");
  evc->add_option("--summary", ev.summaries, "summary.json files, one per replicate");
  evc->add_option("--edge-list", ev.edge_lists, "External edge lists (group,node_i,node_j[,ppi]), one per replicate");
  evc->add_option("--truth", ev.truths, "Scenario directories from simulate, aligned with the estimates")->required();
  evc->add_option("--method", ev.method, "Method label in the metrics tables");
  evc->add_option("--graph-random", ev.graph_random, "Random graphs per small-world baseline (0 skips sigma)");
  evc->add_option("--seed", ev.seed, "Seed for random-graph baselines");
  evc->add_flag("--append", ev.append, "Append to existing metrics files in the output directory");
  evc->add_option("--out", ev.out, "Output directory");

  DiagnoseOptions dg;
  auto* dgc = app.add_subcommand("diagnose", "Gelman-Rubin diagnostics and Phi acceptance rates");
  dgc->add_option("--fit-dir", dg.fit_dir, "Directory written by fit")->required();
  dgc->add_option("--limit", dg.limit, "R-hat flag threshold");
  dgc->add_option("--out", dg.out, "Output directory");

  ExportOptions ex;
  auto* exc = app.add_subcommand("export", "Write selected graphs as edge list, GraphML or DOT");
  exc->add_option("--summary", ex.summary, "summary.json from select")->required();
  exc->add_option("--format", ex.format, "all, edgelist, graphml or dot")
      ->check(CLI::IsMember({"all", "edgelist", "graphml", "dot"}));
  exc->add_option("--out", ex.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  auto resolve = [](const std::string& given, const std::string& command) {
    return given.empty() ? default_out(command) : fs::path(given);
  };

  try {
    if (simulate->parsed()) {
      const auto out = resolve(sim.out, "simulate");
      run_simulate(sim, out);
      write_manifest(out, *simulate, argc, argv);
    } else if (fitc->parsed()) {
      const auto out = resolve(fit.out, "fit");
      Json inputs = {{"data", Json::array()}, {"scale", fit.scale}};
      for (const auto& d : fit.data) inputs["data"].push_back(fs::absolute(d).string());
      fs::create_directories(out);
      write_manifest(out, *fitc, argc, argv, {{"inputs", inputs}});
      run_fit(fit, out);
    } else if (selc->parsed()) {
      const auto out = resolve(sel.out, "select");
      run_select(sel, out);
      write_manifest(out, *selc, argc, argv);
    } else if (evc->parsed()) {
      const auto out = resolve(ev.out, "evaluate");
      run_evaluate(ev, out);
      write_manifest(out, *evc, argc, argv);
    } else if (dgc->parsed()) {
      const auto out = resolve(dg.out, "diagnose");
      run_diagnose(dg, out);
      write_manifest(out, *dgc, argc, argv);
    } else if (exc->parsed()) {
      const auto out = resolve(ex.out, "export");
      run_export(ex, out);
      write_manifest(out, *exc, argc, argv);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
