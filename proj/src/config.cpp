#include "lsnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsnet::config {

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = {
      {"experiment.kind", "scaling",
       "scaling | init_comparison | kernel_misspec | lscd_eval | single_fit"},
      {"experiment.replicates", "", "adjacency replicates per cell (10 by default, 30 at full scale)"},
      {"experiment.seed", "1", "master seed"},
      {"experiment.threads", "1", "worker threads for grid cells"},
      {"experiment.full_scale", "false", "use the full-size default grids"},
      {"experiment.trace_errors", "false", "write per-iteration error traces for each row"},
      {"grid.n", "", "network sizes, comma separated"},
      {"grid.d", "", "true latent dimensions"},
      {"grid.k_fit", "", "fitting dimensions (default: equal to d)"},
      {"grid.kernel", "", "inner_product | distance | gaussian"},
      {"grid.init", "", "lifted_pgd | usvt | random"},
      {"simulate.n", "500", "nodes for the simulate command"},
      {"simulate.d", "2", "latent dimension for the simulate command"},
      {"simulate.kernel", "inner_product", "kernel for the simulate command"},
      {"simulate.gaussian_scale", "4", "Gaussian kernel scale c"},
      {"simulate.gaussian_bandwidth_sq", "9", "Gaussian kernel bandwidth s^2"},
      {"simulate.truncate_after_shift", "false", "truncate latent draws after the center shift"},
      {"simulate.with_covariate", "true", "generate the edge covariate"},
      {"simulate.center_distance", "", "force ||mu1 - mu2|| to this value"},
      {"simulate.replicate", "0", "adjacency replicate index written by simulate"},
      {"fit.k", "2", "latent dimension"},
      {"fit.eta", "0.2", "step-size constant"},
      {"fit.T", "500", "iterations"},
      {"fit.projection_mode", "practical", "practical | theoretical"},
      {"fit.M1", "4", "bound constant for theoretical projections"},
      {"fit.dykstra_max_iters", "100", "Dykstra iteration cap"},
      {"fit.dykstra_tol", "1e-10", "Dykstra successive-change tolerance"},
      {"fit.plateau_stop", "false", "stop on a flat objective"},
      {"init.method", "usvt", "lifted_pgd | usvt | random"},
      {"init.lifted.lambda", "", "nuclear-norm weight (default 2 sqrt(n p_hat))"},
      {"init.lifted.gamma", "", "proximal weight (default lambda / n)"},
      {"init.lifted.eta", "0.2", "lifted step size"},
      {"init.lifted.T", "10", "lifted iterations"},
      {"init.lifted.M1", "4", "lifted box bound"},
      {"init.lifted.projection_mode", "practical", "practical | theoretical"},
      {"init.usvt.tau", "", "singular value threshold (default sqrt(n p_hat))"},
      {"init.usvt.M1", "4", "probability clamp lower bound exp(-M1)/2"},
      {"init.random.scale", "1", "standard deviation of random Z entries"},
      {"lscd.clusters", "2", "number of communities"},
      {"lscd.restarts", "20", "k-means restarts"},
      {"input.edges", "", "edge list path"},
      {"input.covariate", "", "covariate path"},
      {"input.covariate_kind", "node_attribute_indicator", "dense_matrix | node_attribute_indicator"},
      {"input.truth_dir", "", "ground-truth bundle directory"},
      {"input.labels", "", "true community labels, one per line"},
      {"output.dir", "out", "output directory"},
  };
  return keys;
}

std::string env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) {
    out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
  for (const auto& k : registry()) values_[k.key] = k.default_value;
}

void Config::require_known(const std::string& key) const {
  if (!values_.count(key)) throw std::invalid_argument("unknown configuration key '" + key + "'");
}

void Config::set(const std::string& key, const std::string& value) {
  require_known(key);
  values_[key] = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::load_string(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    try {
      set(key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  load_string(os.str(), path.string());
}

void Config::apply_env() {
  for (const auto& k : registry()) {
    if (const char* v = std::getenv(env_name(k.key).c_str())) values_[k.key] = v;
  }
}

bool Config::has(const std::string& key) const {
  require_known(key);
  return !values_.at(key).empty();
}

std::string Config::get(const std::string& key) const {
  require_known(key);
  return values_.at(key);
}

std::optional<std::string> Config::get_optional(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return values_.at(key);
}

double Config::get_double(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return out;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

long long Config::get_int(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::string cur;
  for (char c : get(key) + ",") {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

std::vector<long long> Config::get_int_list(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& item : get_list(key)) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) throw std::invalid_argument(key + ": bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace lsnet::config
