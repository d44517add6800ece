// Command-line front end. Settings resolve as: built-in defaults, then the
// --config file, then LSNET_* environment variables, then flags.
#include "lsnet/community.hpp"
#include "lsnet/config.hpp"
#include "lsnet/experiment.hpp"
#include "lsnet/fit.hpp"
#include "lsnet/init.hpp"
#include "lsnet/io.hpp"
#include "lsnet/metrics.hpp"
#include "lsnet/rng.hpp"
#include "lsnet/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsnet;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> assignments;
  std::optional<long long> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::string> projection_mode;
  std::optional<std::string> init_method;
};

// Flag values that map one-to-one onto config keys.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pairs;
  template <typename T>
  void add(const std::string& key, const std::optional<T>& v) {
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>) {
      pairs.emplace_back(key, *v);
    } else {
      pairs.emplace_back(key, std::to_string(*v));
    }
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Config file (key = value)");
  cmd->add_option("--set", c.assignments, "Override a config key, e.g. --set fit.T=200");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out-dir", c.out_dir, "Output directory");
  cmd->add_option("--threads", c.threads, "Worker threads");
  cmd->add_option("--projection-mode", c.projection_mode, "practical or theoretical");
  cmd->add_option("--init-method", c.init_method, "lifted_pgd, usvt or random");
}

config::Config resolve(const Common& c, const Overrides& extra) {
  config::Config cfg;
  if (!c.config_path.empty()) cfg.load_file(c.config_path);
  cfg.apply_env();
  Overrides o;
  o.add("experiment.seed", c.seed);
  o.add("output.dir", c.out_dir);
  o.add("experiment.threads", c.threads);
  if (c.projection_mode) {
    o.pairs.emplace_back("fit.projection_mode", *c.projection_mode);
    o.pairs.emplace_back("init.lifted.projection_mode", *c.projection_mode);
  }
  o.add("init.method", c.init_method);
  for (const auto& [k, v] : o.pairs) cfg.set(k, v);
  for (const auto& [k, v] : extra.pairs) cfg.set(k, v);
  for (const auto& a : c.assignments) cfg.set_assignment(a);
  return cfg;
}

struct Inputs {
  AdjacencyMatrix A;
  CovariateMatrix X;
  std::vector<std::string> node_ids;
  std::optional<simulate::GroundTruth> truth;
};

// With a truth bundle the edge ids are read as 0-based indices into it and its
// covariate is used unless one is supplied explicitly.
Inputs load_inputs(const config::Config& cfg) {
  if (!cfg.has("input.edges")) throw std::invalid_argument("--edges (input.edges) is required");
  Inputs in;
  io::EdgeList edges = io::ingest_edge_list(cfg.get("input.edges"));
  if (cfg.has("input.truth_dir")) {
    in.truth = io::read_truth_bundle(cfg.get("input.truth_dir"));
    in.A = io::align_integer_ids(edges, in.truth->n());
    for (Index i = 0; i < in.A.n(); ++i) in.node_ids.push_back(std::to_string(i));
    in.X = in.truth->X;
  } else {
    in.A = edges.A;
    in.node_ids = edges.node_ids;
    in.X = CovariateMatrix::none(in.A.n());
  }
  if (cfg.has("input.covariate")) {
    in.X = io::ingest_covariate(cfg.get("input.covariate"),
                                io::parse_covariate_kind(cfg.get("input.covariate_kind")), in.A.n());
  }
  return in;
}

json error_json(const ParameterSet& p, const std::optional<simulate::GroundTruth>& truth) {
  json j;
  j["rel_err_G"] = nullptr;
  j["rel_err_Theta"] = nullptr;
  j["e_t"] = nullptr;
  if (truth) {
    const auto err = metrics::relative_errors(p, *truth);
    j["rel_err_G"] = err.rel_err_G;
    j["rel_err_Theta"] = err.rel_err_Theta;
    j["e_t"] = err.e_t ? json(*err.e_t) : json(nullptr);
  }
  return j;
}

init::InitConfig init_for(const config::Config& cfg) {
  init::InitConfig icfg = experiment::init_config_from(cfg);
  icfg.random.seed = derive_seed(static_cast<std::uint64_t>(cfg.get_int("experiment.seed")),
                                 static_cast<std::uint64_t>(Stream::init));
  return icfg;
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

int cmd_simulate(const config::Config& cfg) {
  const fs::path out = cfg.get("output.dir");
  fs::create_directories(out);
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed"));
  const Index n = cfg.get_int("simulate.n");
  const Index d = cfg.get_int("simulate.d");
  const auto truth = simulate::generate_model(n, d, experiment::kernel_params_from(cfg),
                                              derive_seed(seed, 0x6d6f64656cULL, 0),
                                              experiment::model_options_from(cfg));
  const auto rep = static_cast<std::uint64_t>(cfg.get_int("simulate.replicate"));
  const AdjacencyMatrix A = simulate::sample_adjacency(truth, derive_seed(seed, 0, rep));
  io::write_truth_bundle(out / "truth", truth);
  io::write_edge_list(out / "edges.txt", A);
  io::write_labels_csv(out / "labels.csv", truth.community_labels());
  std::cout << "n=" << n << " edges=" << A.edge_count() << " density=" << A.density() << "\n";
  return 0;
}

int cmd_init(const config::Config& cfg) {
  const Inputs in = load_inputs(cfg);
  const fs::path out = cfg.get("output.dir");
  fs::create_directories(out);
  const Index k = cfg.get_int("fit.k");
  const init::InitConfig icfg = init_for(cfg);
  const ParameterSet p = init::initialize(in.A, in.X, k, icfg);
  io::write_params(out, p, "init");
  json j = error_json(p, in.truth);
  j["schema_version"] = io::kSchemaVersion;
  j["method"] = init::to_string(icfg.method);
  j["beta"] = in.X.absent() ? json(nullptr) : json(p.beta);
  write_json(out / "init.json", j);
  return 0;
}

int cmd_fit(const config::Config& cfg) {
  const Inputs in = load_inputs(cfg);
  const fs::path out = cfg.get("output.dir");
  fs::create_directories(out);
  fit::FitConfig fcfg = experiment::fit_config_from(cfg);
  fcfg.trace_errors = in.truth.has_value();
  const ParameterSet start = init::initialize(in.A, in.X, fcfg.k, init_for(cfg));
  const fit::FitResult res = fit::fit(in.A, in.X, start, fcfg, in.truth ? &*in.truth : nullptr);
  io::write_params(out, res.params, "hat");
  io::write_trace_csv(out / "trace.csv", res.trace);
  json j = error_json(res.params, in.truth);
  j["schema_version"] = io::kSchemaVersion;
  j["n"] = in.A.n();
  j["k"] = fcfg.k;
  j["iterations"] = res.trace.iterations;
  j["objective_init"] = res.trace.objective.front();
  j["objective_final"] = res.trace.objective.back();
  j["beta"] = in.X.absent() ? json(nullptr) : json(res.params.beta);
  write_json(out / "fit.json", j);
  std::cout << "objective " << io::format_double(res.trace.objective.back()) << " after "
            << res.trace.iterations << " iterations\n";
  return 0;
}

int cmd_lscd(const config::Config& cfg) {
  const Inputs in = load_inputs(cfg);
  const fs::path out = cfg.get("output.dir");
  fs::create_directories(out);
  community::LscdConfig lcfg;
  lcfg.num_clusters = static_cast<int>(cfg.get_int("lscd.clusters"));
  lcfg.k_fit = cfg.get_int("fit.k");
  lcfg.init = init_for(cfg);
  lcfg.fit = experiment::fit_config_from(cfg);
  lcfg.restarts = static_cast<int>(cfg.get_int("lscd.restarts"));
  lcfg.seed = derive_seed(static_cast<std::uint64_t>(cfg.get_int("experiment.seed")),
                          static_cast<std::uint64_t>(Stream::kmeans));
  const community::LscdResult res = community::lscd(in.A, in.X, lcfg);
  io::write_labels_csv(out / "labels.csv", res.labels, in.node_ids);
  io::write_params(out, res.params, "hat");
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["clusters"] = lcfg.num_clusters;
  j["wcss"] = res.wcss;
  j["misclustering"] = nullptr;
  if (cfg.has("input.labels")) {
    // "node,label" rows are matched to graph nodes by id; bare labels are
    // taken in node order.
    std::vector<std::string> raw;
    std::map<std::string, std::string> by_id;
    std::istringstream is(io::read_text(cfg.get("input.labels")));
    for (std::string line; std::getline(is, line);) {
      if (line.empty() || line[0] == '#' || line == "node,label") continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        raw.push_back(line);
      } else {
        by_id[line.substr(0, comma)] = line.substr(comma + 1);
      }
    }
    if (!by_id.empty()) {
      raw.clear();
      for (const auto& id : in.node_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw std::invalid_argument("labels file has no entry for node " + id);
        raw.push_back(it->second);
      }
    }
    if (raw.size() != res.labels.size()) {
      throw std::invalid_argument("labels file has " + std::to_string(raw.size()) +
                                  " entries, expected " + std::to_string(res.labels.size()));
    }
    std::map<std::string, int> codes;
    std::vector<int> truth;
    for (const auto& r : raw) truth.push_back(codes.try_emplace(r, static_cast<int>(codes.size())).first->second);
    j["misclustering"] = metrics::misclustering_rate(res.labels, truth);
  }
  write_json(out / "lscd.json", j);
  return 0;
}

int cmd_eigvals(const config::Config& cfg) {
  const Inputs in = load_inputs(cfg);
  const fs::path out = cfg.get("output.dir");
  fs::create_directories(out);
  const init::InitConfig icfg = init_for(cfg);
  const init::LiftedResult res = init::lifted_pgd(in.A, in.X, cfg.get_int("fit.k"), icfg.lifted);
  std::ostringstream os;
  os << "schema_version,index,eigenvalue\n";
  for (Index i = 0; i < res.eigen.values.size(); ++i) {
    os << io::kSchemaVersion << ',' << i << ',' << io::format_double(res.eigen.values(i)) << '\n';
  }
  io::write_text(out / "eigvals.csv", os.str());
  return 0;
}

int cmd_experiment(const config::Config& cfg) {
  const experiment::ExperimentSpec spec = experiment::ExperimentSpec::from_config(cfg);
  const experiment::Outcome res = experiment::run_experiment(spec);
  int failed = 0;
  for (const auto& r : res.rows) {
    if (!r.ok) {
      ++failed;
      std::cerr << "cell " << r.cell << " replicate " << r.replicate << " failed: " << r.error << "\n";
    }
  }
  std::cout << res.rows.size() << " rows, " << failed << " failed, written to " << spec.out_dir.string()
            << "\n";
  return res.any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent space model fitting for networks with edge covariates"};
  app.require_subcommand(1);
  Common common;

  std::optional<std::string> edges, covariate, covariate_kind, truth_dir, labels, kernel, kind;
  std::optional<long long> k, n, d, clusters, replicates, replicate, T;
  std::optional<double> eta;
  bool full_scale = false;

  auto input_opts = [&](CLI::App* cmd) {
    cmd->add_option("--edges", edges, "Edge list file");
    cmd->add_option("--covariate", covariate, "Covariate file");
    cmd->add_option("--covariate-kind", covariate_kind, "dense_matrix or node_attribute_indicator");
    cmd->add_option("--truth-dir", truth_dir, "Truth bundle from 'simulate' for error metrics");
    cmd->add_option("--k", k, "Latent dimension of the fit");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a model and sample one adjacency matrix");
  add_common(sim, common);
  sim->add_option("--n", n, "Nodes");
  sim->add_option("--d", d, "Latent dimension of the truth");
  sim->add_option("--kernel", kernel, "inner_product, distance or gaussian");
  sim->add_option("--replicate", replicate, "Adjacency replicate index");

  auto* fitc = app.add_subcommand("fit", "Initialize and run projected gradient descent");
  add_common(fitc, common);
  input_opts(fitc);
  fitc->add_option("--T", T, "Iterations");
  fitc->add_option("--eta", eta, "Step size scale");

  auto* initc = app.add_subcommand("init", "Compute an initial estimate only");
  add_common(initc, common);
  input_opts(initc);

  auto* lscdc = app.add_subcommand("lscd", "Fit, then cluster the latent vectors");
  add_common(lscdc, common);
  input_opts(lscdc);
  lscdc->add_option("--clusters", clusters, "Number of communities");
  lscdc->add_option("--labels", labels, "Reference labels (node,label CSV) for misclustering");

  auto* exp = app.add_subcommand("experiment", "Run a simulation grid");
  add_common(exp, common);
  exp->add_option("--kind", kind, "scaling, init_comparison, kernel_misspec, lscd_eval, single_fit");
  exp->add_option("--replicates", replicates, "Replicates per cell");
  exp->add_flag("--full-scale", full_scale, "Use the full-size default grids");
  input_opts(exp);

  auto* eig = app.add_subcommand("eigvals", "Eigenvalues of the lifted-space estimate of G");
  add_common(eig, common);
  input_opts(eig);

  CLI11_PARSE(app, argc, argv);

  try {
    Overrides o;
    o.add("input.edges", edges);
    o.add("input.covariate", covariate);
    o.add("input.covariate_kind", covariate_kind);
    o.add("input.truth_dir", truth_dir);
    o.add("input.labels", labels);
    o.add("fit.k", k);
    o.add("fit.T", T);
    o.add("fit.eta", eta);
    o.add("simulate.n", n);
    o.add("simulate.d", d);
    o.add("simulate.kernel", kernel);
    o.add("simulate.replicate", replicate);
    o.add("lscd.clusters", clusters);
    o.add("experiment.kind", kind);
    o.add("experiment.replicates", replicates);
    if (full_scale) o.pairs.emplace_back("experiment.full_scale", "true");
    const config::Config cfg = resolve(common, o);

    if (sim->parsed()) return cmd_simulate(cfg);
    if (fitc->parsed()) return cmd_fit(cfg);
    if (initc->parsed()) return cmd_init(cfg);
    if (lscdc->parsed()) return cmd_lscd(cfg);
    if (exp->parsed()) return cmd_experiment(cfg);
    if (eig->parsed()) return cmd_eigvals(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
