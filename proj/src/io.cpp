#include "lsnet/io.hpp"

#include "lsnet/linalg.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace lsnet::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string schema_comment() {
  return "# lsnet schema_version=" + std::to_string(kSchemaVersion);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool skip_line(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

EdgeList ingest_edge_list(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::unordered_map<std::string, Index> index;
  EdgeList out;
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t line_no = 0;
  auto id_of = [&](const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, static_cast<Index>(out.node_ids.size()));
    if (inserted) out.node_ids.push_back(name);
    return it->second;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 2) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'u v'");
    }
    const Index u = id_of(fields[0]);
    const Index v = id_of(fields[1]);
    if (u == v) {
      ++out.self_loops_dropped;
      continue;
    }
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  const Index n = static_cast<Index>(out.node_ids.size());
  if (n < 2) throw IoError("edge list '" + path.string() + "' has fewer than 2 nodes");
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [u, v] : edges) {
    if (a(u, v) != 0.0) {
      ++out.duplicate_edges;
      continue;
    }
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  if (out.self_loops_dropped > 0) {
    std::cerr << "warning: dropped " << out.self_loops_dropped << " self-loop(s) from "
              << path.string() << "\n";
  }
  out.A = AdjacencyMatrix::from_dense(std::move(a));
  return out;
}

AdjacencyMatrix align_integer_ids(const EdgeList& edges, Index n) {
  std::vector<Index> target(edges.node_ids.size());
  for (std::size_t i = 0; i < edges.node_ids.size(); ++i) {
    const std::string& id = edges.node_ids[i];
    Index v = -1;
    const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
    if (ec != std::errc() || ptr != id.data() + id.size() || v < 0 || v >= n) {
      throw IoError("node id '" + id + "' is not an integer in [0, " + std::to_string(n) + ")");
    }
    target[i] = v;
  }
  const Matrix& a = edges.A.dense();
  Matrix out = Matrix::Zero(n, n);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (a(i, j) != 0.0) out(target[i], target[j]) = 1.0;
  return AdjacencyMatrix::from_dense(std::move(out));
}

CovariateKind parse_covariate_kind(const std::string& name) {
  if (name == "dense_matrix") return CovariateKind::dense_matrix;
  if (name == "node_attribute_indicator") return CovariateKind::node_attribute_indicator;
  throw std::invalid_argument("unknown covariate kind '" + name + "'");
}

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<double> row;
    for (const auto& f : split_fields(line)) row.push_back(parse_double(f, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows.front().size()) : 0;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

CovariateMatrix ingest_covariate(const fs::path& path, CovariateKind kind, Index expected_n) {
  if (kind == CovariateKind::dense_matrix) {
    Matrix m = read_matrix_csv(path);
    if (m.rows() != m.cols()) throw IoError("dense covariate '" + path.string() + "' is not square");
    if (expected_n >= 0 && m.rows() != expected_n) {
      throw IoError("dense covariate has " + std::to_string(m.rows()) + " rows, expected " +
                    std::to_string(expected_n));
    }
    return CovariateMatrix::from_dense(std::move(m));
  }
  std::ifstream in = open_in(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    const auto first = line.find_first_not_of(" \t");
    const auto last = line.find_last_not_of(" \t\r");
    labels.push_back(line.substr(first, last - first + 1));
  }
  if (expected_n >= 0 && static_cast<Index>(labels.size()) != expected_n) {
    throw IoError("attribute file has " + std::to_string(labels.size()) + " labels, expected " +
                  std::to_string(expected_n));
  }
  return simulate::indicator_covariate(labels);
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  out << schema_comment() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(const fs::path& path, const Vector& v) {
  write_matrix_csv(path, Matrix(v));
}

Vector read_vector_csv(const fs::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1 && m.rows() > 0) throw IoError("'" + path.string() + "' is not a column");
  return m.rows() ? Vector(m.col(0)) : Vector();
}

void write_labels_csv(const fs::path& path, const std::vector<int>& labels,
                      const std::vector<std::string>& node_ids) {
  std::ofstream out = open_out(path);
  out << schema_comment() << "\nnode,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << (node_ids.empty() ? std::to_string(i) : node_ids[i]) << ',' << labels[i] << '\n';
  }
}

void write_edge_list(const fs::path& path, const AdjacencyMatrix& A) {
  std::ofstream out = open_out(path);
  out << schema_comment() << "\n";
  const Matrix& a = A.dense();
  for (Index i = 0; i < A.n(); ++i)
    for (Index j = i + 1; j < A.n(); ++j)
      if (a(i, j) != 0.0) out << i << ' ' << j << '\n';
}

void write_params(const fs::path& dir, const ParameterSet& p, const std::string& suffix) {
  write_matrix_csv(dir / ("Z_" + suffix + ".csv"), p.Z);
  write_vector_csv(dir / ("alpha_" + suffix + ".csv"), p.alpha);
}

void write_trace_csv(const fs::path& path, const fit::FitTrace& trace) {
  std::ofstream out = open_out(path);
  const bool errors = !trace.rel_err_Theta.empty();
  out << "schema_version,iter,objective";
  if (errors) out << ",rel_err_G,rel_err_Theta,e_t";
  out << '\n';
  for (std::size_t t = 0; t < trace.objective.size(); ++t) {
    out << kSchemaVersion << ',' << t << ',' << format_double(trace.objective[t]);
    if (errors) {
      out << ',' << format_double(trace.rel_err_G[t]) << ',' << format_double(trace.rel_err_Theta[t])
          << ',' << format_double(trace.e_t[t]);
    }
    out << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_truth_bundle(const fs::path& dir, const simulate::GroundTruth& truth) {
  fs::create_directories(dir);
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["n"] = truth.n();
  meta["latent_dim"] = truth.latent_dim;
  meta["kernel"] = simulate::to_string(truth.kernel.kind);
  meta["gaussian_scale"] = truth.kernel.gaussian_scale;
  meta["gaussian_bandwidth_sq"] = truth.kernel.gaussian_bandwidth_sq;
  meta["seed"] = truth.seed;
  meta["beta"] = truth.params.beta;
  meta["covariate"] = !truth.X.absent();
  meta["max_row_norm_sq"] = truth.max_row_norm_sq;
  meta["max_abs_theta"] = truth.max_abs_theta;
  write_text(dir / "truth.json", meta.dump(2) + "\n");
  write_vector_csv(dir / "alpha.csv", truth.params.alpha);
  write_matrix_csv(dir / "positions.csv", truth.positions);
  if (!truth.X.absent()) write_matrix_csv(dir / "X.csv", truth.X.dense());
  if (truth.kernel.kind == simulate::KernelKind::inner_product) {
    write_matrix_csv(dir / "Z_star.csv", truth.params.Z);
  } else {
    write_matrix_csv(dir / "G_star.csv", truth.G_star);
  }
}

simulate::GroundTruth read_truth_bundle(const fs::path& dir) {
  const json meta = json::parse(read_text(dir / "truth.json"));
  if (meta.at("schema_version").get<int>() != kSchemaVersion) {
    throw IoError("truth bundle schema version mismatch in '" + dir.string() + "'");
  }
  simulate::GroundTruth truth;
  const Index n = meta.at("n").get<Index>();
  truth.kernel.kind = simulate::parse_kernel(meta.at("kernel").get<std::string>());
  truth.kernel.gaussian_scale = meta.at("gaussian_scale").get<double>();
  truth.kernel.gaussian_bandwidth_sq = meta.at("gaussian_bandwidth_sq").get<double>();
  truth.latent_dim = meta.at("latent_dim").get<Index>();
  truth.seed = meta.at("seed").get<std::uint64_t>();
  truth.params.beta = meta.at("beta").get<double>();
  truth.params.alpha = read_vector_csv(dir / "alpha.csv");
  truth.positions = read_matrix_csv(dir / "positions.csv");
  truth.X = meta.at("covariate").get<bool>()
                ? CovariateMatrix::from_dense(read_matrix_csv(dir / "X.csv"))
                : CovariateMatrix::none(n);
  if (truth.kernel.kind == simulate::KernelKind::inner_product) {
    truth.params.Z = read_matrix_csv(dir / "Z_star.csv");
    truth.G_star = Matrix::Zero(n, n);
    truth.G_star.selfadjointView<Eigen::Lower>().rankUpdate(truth.params.Z);
    truth.G_star.triangularView<Eigen::StrictlyUpper>() = truth.G_star.transpose();
  } else {
    truth.params.Z = Matrix(n, 0);
    truth.G_star = read_matrix_csv(dir / "G_star.csv");
  }
  require_same_size(n, truth.G_star.rows(), "truth bundle G*");
  require_same_size(n, truth.params.alpha.size(), "truth bundle alpha");
  truth.G_star = 0.5 * (truth.G_star + truth.G_star.transpose());
  simulate::finalize_truth(truth);
  return truth;
}

}  // namespace lsnet::io
