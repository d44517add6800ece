#include "lsnet/experiment.hpp"

#include "lsnet/community.hpp"
#include "lsnet/linalg.hpp"
#include "lsnet/metrics.hpp"
#include "lsnet/model.hpp"
#include "lsnet/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace lsnet::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::scaling: return "scaling";
    case Kind::init_comparison: return "init_comparison";
    case Kind::kernel_misspec: return "kernel_misspec";
    case Kind::lscd_eval: return "lscd_eval";
    case Kind::single_fit: return "single_fit";
  }
  return "unknown";
}

Kind parse_kind(const std::string& name) {
  for (Kind k : {Kind::scaling, Kind::init_comparison, Kind::kernel_misspec, Kind::lscd_eval,
                 Kind::single_fit}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

fit::FitConfig fit_config_from(const config::Config& cfg) {
  fit::FitConfig f;
  f.k = static_cast<Index>(cfg.get_int("fit.k"));
  f.eta = cfg.get_double("fit.eta");
  f.T = static_cast<int>(cfg.get_int("fit.T"));
  f.projection_mode = fit::parse_projection_mode(cfg.get("fit.projection_mode"));
  f.M1 = cfg.get_double("fit.M1");
  f.dykstra_max_iters = static_cast<int>(cfg.get_int("fit.dykstra_max_iters"));
  f.dykstra_tol = cfg.get_double("fit.dykstra_tol");
  f.plateau_stop = cfg.get_bool("fit.plateau_stop");
  return f;
}

init::InitConfig init_config_from(const config::Config& cfg) {
  init::InitConfig c;
  c.method = init::parse_method(cfg.get("init.method"));
  c.lifted.lambda = cfg.get_optional_double("init.lifted.lambda");
  c.lifted.gamma = cfg.get_optional_double("init.lifted.gamma");
  c.lifted.eta = cfg.get_double("init.lifted.eta");
  c.lifted.T = static_cast<int>(cfg.get_int("init.lifted.T"));
  c.lifted.M1 = cfg.get_double("init.lifted.M1");
  c.lifted.projection_mode = fit::parse_projection_mode(cfg.get("init.lifted.projection_mode"));
  c.usvt.tau = cfg.get_optional_double("init.usvt.tau");
  c.usvt.M1 = cfg.get_double("init.usvt.M1");
  c.random.scale = cfg.get_double("init.random.scale");
  c.random.seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed"));
  return c;
}

simulate::KernelSpec kernel_params_from(const config::Config& cfg) {
  simulate::KernelSpec k;
  k.kind = simulate::parse_kernel(cfg.get("simulate.kernel"));
  k.gaussian_scale = cfg.get_double("simulate.gaussian_scale");
  k.gaussian_bandwidth_sq = cfg.get_double("simulate.gaussian_bandwidth_sq");
  return k;
}

simulate::ModelOptions model_options_from(const config::Config& cfg) {
  simulate::ModelOptions m;
  m.truncate_after_shift = cfg.get_bool("simulate.truncate_after_shift");
  m.with_covariate = cfg.get_bool("simulate.with_covariate");
  m.center_distance = cfg.get_optional_double("simulate.center_distance");
  return m;
}

namespace {

std::vector<Index> to_index(const std::vector<long long>& v) {
  return std::vector<Index>(v.begin(), v.end());
}

}  // namespace

ExperimentSpec ExperimentSpec::from_config(const config::Config& cfg) {
  ExperimentSpec s;
  s.kind = parse_kind(cfg.get("experiment.kind"));
  const bool full = cfg.get_bool("experiment.full_scale");
  s.seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed"));
  s.threads = static_cast<int>(cfg.get_int("experiment.threads"));
  s.replicates = cfg.has("experiment.replicates")
                     ? static_cast<int>(cfg.get_int("experiment.replicates"))
                     : (full ? 30 : 10);
  s.out_dir = cfg.get("output.dir");
  s.trace_errors = cfg.get_bool("experiment.trace_errors");
  s.kernel_params = kernel_params_from(cfg);
  s.model = model_options_from(cfg);
  s.fit = fit_config_from(cfg);
  s.init = init_config_from(cfg);
  s.clusters = static_cast<int>(cfg.get_int("lscd.clusters"));
  s.restarts = static_cast<int>(cfg.get_int("lscd.restarts"));
  s.edges_path = cfg.get("input.edges");
  s.covariate_path = cfg.get("input.covariate");
  s.covariate_kind = io::parse_covariate_kind(cfg.get("input.covariate_kind"));

  using simulate::KernelKind;
  std::vector<Index> n, d, kf;
  std::vector<KernelKind> kernels{KernelKind::inner_product};
  std::vector<init::Method> inits{s.init.method};
  switch (s.kind) {
    case Kind::scaling:
      n = full ? std::vector<Index>{500, 1000, 2000, 4000, 8000} : std::vector<Index>{500, 1000, 2000};
      d = full ? std::vector<Index>{2, 4, 8} : std::vector<Index>{2};
      break;
    case Kind::init_comparison:
      n = {full ? Index{4000} : Index{1000}};
      d = {4};
      inits = {init::Method::lifted_pgd, init::Method::usvt, init::Method::random};
      break;
    case Kind::kernel_misspec:
      n = {full ? Index{4000} : Index{2000}};
      d = {4};
      kf = {1, 2, 4, 8};
      kernels = {KernelKind::distance, KernelKind::gaussian};
      break;
    case Kind::lscd_eval:
      n = {1000};
      d = {2};
      break;
    case Kind::single_fit:
      d = {s.fit.k};
      break;
  }
  s.n_grid = cfg.has("grid.n") ? to_index(cfg.get_int_list("grid.n")) : n;
  s.d_grid = cfg.has("grid.d") ? to_index(cfg.get_int_list("grid.d")) : d;
  s.k_fit_grid = cfg.has("grid.k_fit") ? to_index(cfg.get_int_list("grid.k_fit")) : kf;
  s.kernels.clear();
  if (cfg.has("grid.kernel")) {
    for (const auto& k : cfg.get_list("grid.kernel")) s.kernels.push_back(simulate::parse_kernel(k));
  } else {
    s.kernels = kernels;
  }
  s.inits.clear();
  if (cfg.has("grid.init")) {
    for (const auto& m : cfg.get_list("grid.init")) s.inits.push_back(init::parse_method(m));
  } else {
    s.inits = inits;
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (replicates < 1) throw std::invalid_argument("experiment: replicate count must be >= 1");
  if (threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
  if (inits.empty()) throw std::invalid_argument("experiment: init grid is empty");
  if (kind == Kind::single_fit) {
    if (edges_path.empty()) throw std::invalid_argument("single_fit: input.edges is required");
    return;
  }
  if (n_grid.empty() || d_grid.empty() || kernels.empty()) {
    throw std::invalid_argument("experiment: grids must be nonempty");
  }
  for (Index v : n_grid) if (v < 4) throw std::invalid_argument("experiment: n must be >= 4");
  for (Index v : d_grid) if (v < 1) throw std::invalid_argument("experiment: d must be >= 1");
  for (Index v : k_fit_grid) if (v < 1) throw std::invalid_argument("experiment: k_fit must be >= 1");
  fit.validate();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

namespace {

struct ModelCell {
  Index n = 0;
  Index d = 0;
  simulate::KernelKind kernel = simulate::KernelKind::inner_product;
  std::uint64_t seed = 0;
};

struct FitCell {
  int id = 0;
  Index k_fit = 0;
  init::Method init = init::Method::usvt;
};

struct PreparedModel {
  simulate::GroundTruth truth;
  std::optional<linalg::SymmetricEigen> g_eigen;  // only when some k_fit needs it
};

metrics::StarFactor star_for(const PreparedModel& m, Index k) {
  if (!m.g_eigen) return metrics::make_star_factor(m.truth, k);
  metrics::StarFactor s;
  s.Z = linalg::top_k_factor(*m.g_eigen, k);
  s.op_norm_sq = std::max(0.0, m.g_eigen->values(0));
  return s;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(threads)));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

Row run_single_fit(const ExperimentSpec& spec) {
  Row row;
  row.cell = 0;
  row.replicate = 0;
  row.init = init::to_string(spec.inits.front());
  row.kernel = "";
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const io::EdgeList edges = io::ingest_edge_list(spec.edges_path);
    const CovariateMatrix X = spec.covariate_path.empty()
                                  ? CovariateMatrix::none(edges.A.n())
                                  : io::ingest_covariate(spec.covariate_path, spec.covariate_kind,
                                                         edges.A.n());
    row.n = edges.A.n();
    row.k_fit = spec.fit.k;
    row.d = spec.fit.k;
    init::InitConfig icfg = spec.init;
    icfg.method = spec.inits.front();
    icfg.random.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(Stream::init));
    const ParameterSet start = init::initialize(edges.A, X, spec.fit.k, icfg);
    const fit::FitResult res = fit::fit(edges.A, X, start, spec.fit);
    io::write_trace_csv(spec.out_dir / "trace.csv", res.trace);
    io::write_params(spec.out_dir, res.params, "hat");
    row.objective_init = res.trace.objective.front();
    row.objective_final = res.trace.objective.back();
    row.iterations = res.trace.iterations;
    if (!X.absent()) row.beta_hat = res.params.beta;
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

std::string results_csv(const ExperimentSpec& spec, const std::vector<Row>& rows) {
  std::ostringstream os;
  os << "schema_version,kind,cell,replicate,n,d,k_fit,kernel,init,projection_mode,eta,T,"
        "model_seed,sample_seed,status,rel_err_G,rel_err_Theta,e_t,misclustering,"
        "objective_init,objective_final,iterations,beta_hat,error\n";
  for (const Row& r : rows) {
    os << io::kSchemaVersion << ',' << to_string(spec.kind) << ',' << r.cell << ',' << r.replicate
       << ',' << r.n << ',' << r.d << ',' << r.k_fit << ',' << r.kernel << ',' << r.init << ','
       << fit::to_string(spec.fit.projection_mode) << ',' << io::format_double(spec.fit.eta) << ','
       << spec.fit.T << ',' << r.model_seed << ',' << r.sample_seed << ','
       << (r.ok ? "ok" : "failed") << ',' << opt(r.rel_err_G) << ',' << opt(r.rel_err_Theta) << ','
       << opt(r.e_t) << ',' << opt(r.misclustering) << ',' << opt(r.objective_init) << ','
       << opt(r.objective_final) << ',' << r.iterations << ',' << opt(r.beta_hat) << ','
       << csv_escape(r.error) << '\n';
  }
  return os.str();
}

json summarize(const ExperimentSpec& spec, const std::vector<Row>& rows) {
  json out;
  out["schema_version"] = io::kSchemaVersion;
  out["kind"] = to_string(spec.kind);
  out["replicates"] = spec.replicates;
  out["seed"] = spec.seed;

  std::map<int, std::vector<const Row*>> by_cell;
  for (const Row& r : rows) by_cell[r.cell].push_back(&r);

  auto stats = [](const std::vector<const Row*>& group, auto field) {
    std::vector<double> v;
    for (const Row* r : group)
      if (r->ok && (r->*field)) v.push_back(*(r->*field));
    json j;
    if (v.empty()) return json(nullptr);
    j["median"] = quantile(v, 0.5);
    j["q1"] = quantile(v, 0.25);
    j["q3"] = quantile(v, 0.75);
    j["count"] = v.size();
    return j;
  };

  int failed = 0;
  json cells = json::array();
  for (const auto& [cell, group] : by_cell) {
    const Row& first = *group.front();
    json c;
    c["cell"] = cell;
    c["n"] = first.n;
    c["d"] = first.d;
    c["k_fit"] = first.k_fit;
    c["kernel"] = first.kernel;
    c["init"] = first.init;
    int ok = 0;
    for (const Row* r : group) ok += r->ok ? 1 : 0;
    failed += static_cast<int>(group.size()) - ok;
    c["ok"] = ok;
    c["rel_err_Theta"] = stats(group, &Row::rel_err_Theta);
    c["rel_err_G"] = stats(group, &Row::rel_err_G);
    c["e_t"] = stats(group, &Row::e_t);
    c["misclustering"] = stats(group, &Row::misclustering);
    c["objective_final"] = stats(group, &Row::objective_final);
    cells.push_back(std::move(c));
  }
  out["cells"] = cells;
  out["failed_rows"] = failed;

  if (spec.kind == Kind::scaling) {
    // One regression per (d, k_fit, kernel, init) over the n grid.
    std::map<std::string, std::pair<std::vector<double>, std::vector<std::pair<double, double>>>> groups;
    json slopes = json::array();
    std::map<std::string, json> keys;
    for (const json& c : cells) {
      if (c["rel_err_Theta"].is_null() || c["rel_err_G"].is_null()) continue;
      const std::string key = std::to_string(c["d"].get<Index>()) + "/" +
                              std::to_string(c["k_fit"].get<Index>()) + "/" +
                              c["kernel"].get<std::string>() + "/" + c["init"].get<std::string>();
      auto& g = groups[key];
      g.first.push_back(static_cast<double>(c["n"].get<Index>()));
      g.second.emplace_back(c["rel_err_Theta"]["median"].get<double>(),
                            c["rel_err_G"]["median"].get<double>());
      keys[key] = json{{"d", c["d"]}, {"k_fit", c["k_fit"]}, {"kernel", c["kernel"]}, {"init", c["init"]}};
    }
    for (auto& [key, g] : groups) {
      json s = keys[key];
      std::vector<double> theta, gram;
      for (const auto& [t, gr] : g.second) {
        theta.push_back(t);
        gram.push_back(gr);
      }
      const bool enough = std::set<double>(g.first.begin(), g.first.end()).size() >= 2;
      s["n"] = g.first;
      s["slope_rel_err_Theta"] = enough ? json(loglog_slope(g.first, theta)) : json(nullptr);
      s["slope_rel_err_G"] = enough ? json(loglog_slope(g.first, gram)) : json(nullptr);
      slopes.push_back(std::move(s));
    }
    out["slopes"] = slopes;
  }
  return out;
}

Outcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  fs::create_directories(spec.out_dir);
  Outcome out;

  if (spec.kind == Kind::single_fit) {
    out.rows.push_back(run_single_fit(spec));
  } else {
    std::vector<ModelCell> models;
    std::vector<std::vector<FitCell>> fit_cells;
    int next_cell = 0;
    for (Index n : spec.n_grid)
      for (Index d : spec.d_grid)
        for (auto kernel : spec.kernels) {
          ModelCell m{n, d, kernel, 0};
          m.seed = derive_seed(spec.seed, 0x6d6f64656cULL, models.size());
          models.push_back(m);
          std::vector<FitCell> cells;
          const std::vector<Index> ks = spec.k_fit_grid.empty() ? std::vector<Index>{d} : spec.k_fit_grid;
          for (Index k : ks)
            for (auto method : spec.inits) cells.push_back({next_cell++, k, method});
          fit_cells.push_back(std::move(cells));
        }

    std::vector<PreparedModel> prepared(models.size());
    parallel_for(models.size(), spec.threads, [&](std::size_t i) {
      simulate::KernelSpec ks = spec.kernel_params;
      ks.kind = models[i].kernel;
      prepared[i].truth = simulate::generate_model(models[i].n, models[i].d, ks, models[i].seed, spec.model);
      bool needs_eigen = ks.kind != simulate::KernelKind::inner_product;
      for (const auto& c : fit_cells[i]) needs_eigen = needs_eigen || c.k_fit != models[i].d;
      if (needs_eigen) prepared[i].g_eigen = linalg::eigh_descending(prepared[i].truth.G_star);
    });

    const std::size_t reps = static_cast<std::size_t>(spec.replicates);
    std::vector<std::vector<Row>> task_rows(models.size() * reps);
    parallel_for(task_rows.size(), spec.threads, [&](std::size_t task) {
      const std::size_t mi = task / reps;
      const int rep = static_cast<int>(task % reps);
      const ModelCell& mc = models[mi];
      const PreparedModel& pm = prepared[mi];
      const simulate::GroundTruth& truth = pm.truth;
      const std::uint64_t sample_seed = derive_seed(spec.seed, mi, static_cast<std::uint64_t>(rep));

      std::optional<AdjacencyMatrix> A;
      std::string sample_error;
      try {
        A = simulate::sample_adjacency(truth, sample_seed);
      } catch (const std::exception& e) {
        sample_error = e.what();
      }
      std::optional<init::UsvtDecomposition> usvt;
      std::optional<init::LiftedResult> lifted;

      for (const FitCell& fc : fit_cells[mi]) {
        Row row;
        row.cell = fc.id;
        row.replicate = rep;
        row.n = mc.n;
        row.d = mc.d;
        row.k_fit = fc.k_fit;
        row.kernel = simulate::to_string(mc.kernel);
        row.init = init::to_string(fc.init);
        row.model_seed = mc.seed;
        row.sample_seed = sample_seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          if (!A) throw std::runtime_error(sample_error);
          ParameterSet start;
          switch (fc.init) {
            case init::Method::usvt:
              if (!usvt) usvt = init::usvt_decompose(*A, truth.X, spec.init.usvt);
              start = usvt->params(fc.k_fit);
              break;
            case init::Method::lifted_pgd:
              if (!lifted) lifted = init::lifted_pgd(*A, truth.X, fc.k_fit, spec.init.lifted);
              start = lifted->params_for(fc.k_fit);
              break;
            case init::Method::random:
              start = init::init_random(mc.n, fc.k_fit, spec.init.random.scale,
                                        derive_seed(spec.seed, mi, static_cast<std::uint64_t>(rep),
                                                    static_cast<std::uint64_t>(fc.id)));
              break;
          }
          fit::FitConfig fcfg = spec.fit;
          fcfg.k = fc.k_fit;
          fcfg.trace_errors = spec.trace_errors;
          const fit::FitResult res = fit::fit(*A, truth.X, start, fcfg, spec.trace_errors ? &truth : nullptr);
          const metrics::ErrorReport err = metrics::relative_errors(res.params, truth, star_for(pm, fc.k_fit));
          row.rel_err_G = err.rel_err_G;
          row.rel_err_Theta = err.rel_err_Theta;
          row.e_t = err.e_t;
          row.objective_init = res.trace.objective.front();
          row.objective_final = res.trace.objective.back();
          row.iterations = res.trace.iterations;
          if (!truth.X.absent()) row.beta_hat = res.params.beta;
          if (spec.kind == Kind::lscd_eval) {
            const auto km = community::kmeans(
                res.params.Z, spec.clusters, spec.restarts,
                derive_seed(spec.seed, static_cast<std::uint64_t>(Stream::kmeans), mi,
                            static_cast<std::uint64_t>(rep)));
            row.misclustering = metrics::misclustering_rate(km.labels, truth.community_labels());
          }
          if (spec.trace_errors) {
            io::write_trace_csv(spec.out_dir / "traces" /
                                    ("cell" + std::to_string(fc.id) + "_rep" + std::to_string(rep) + ".csv"),
                                res.trace);
          }
          row.ok = true;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        task_rows[task].push_back(std::move(row));
      }
    });

    for (auto& rows : task_rows)
      for (auto& r : rows) out.rows.push_back(std::move(r));
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const Row& a, const Row& b) {
      return a.cell != b.cell ? a.cell < b.cell : a.replicate < b.replicate;
    });
  }

  out.summary = summarize(spec, out.rows);
  for (const Row& r : out.rows) out.any_failed = out.any_failed || !r.ok;

  io::write_text(spec.out_dir / "results.csv", results_csv(spec, out.rows));
  io::write_text(spec.out_dir / "summary.json", out.summary.dump(2) + "\n");
  std::ostringstream timings;
  timings << "schema_version,cell,replicate,wall_time_s\n";
  for (const Row& r : out.rows) {
    timings << io::kSchemaVersion << ',' << r.cell << ',' << r.replicate << ','
            << io::format_double(r.wall_time_s) << '\n';
  }
  io::write_text(spec.out_dir / "timings.csv", timings.str());
  return out;
}

}  // namespace lsnet::experiment
