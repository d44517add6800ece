#pragma once

#include "lsnet/fit.hpp"
#include "lsnet/simulate.hpp"
#include "lsnet/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lsnet::io {

inline constexpr int kSchemaVersion = 1;
/// First line of every matrix / label CSV written by this library.
std::string schema_comment();

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

struct EdgeList {
  AdjacencyMatrix A;
  std::vector<std::string> node_ids;  // index -> original id
  int self_loops_dropped = 0;
  int duplicate_edges = 0;
};

/// "u v" pairs separated by whitespace and/or commas; lines starting with '#'
/// are skipped. Node ids are arbitrary strings indexed by first appearance.
EdgeList ingest_edge_list(const std::filesystem::path& path);

/// Re-indexes an ingested edge list whose ids are the integers 0..n-1, so the
/// node order matches a simulated truth bundle and isolated nodes are kept.
AdjacencyMatrix align_integer_ids(const EdgeList& edges, Index n);

enum class CovariateKind { dense_matrix, node_attribute_indicator };
CovariateKind parse_covariate_kind(const std::string& name);

/// Dense CSV grid, or one label per line aligned with node order.
/// `expected_n` < 0 skips the size check.
CovariateMatrix ingest_covariate(const std::filesystem::path& path, CovariateKind kind,
                                 Index expected_n = -1);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);
Vector read_vector_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels,
                      const std::vector<std::string>& node_ids = {});
/// Upper-triangle edges as "i j" with zero-based integer ids.
void write_edge_list(const std::filesystem::path& path, const AdjacencyMatrix& A);

void write_params(const std::filesystem::path& dir, const ParameterSet& p,
                  const std::string& suffix);

/// Trace CSV: schema_version,iter,objective[,rel_err_G,rel_err_Theta,e_t].
void write_trace_csv(const std::filesystem::path& path, const fit::FitTrace& trace);

/// Ground-truth bundle: truth.json, alpha.csv, X.csv, positions.csv and
/// either Z_star.csv (inner product) or G_star.csv (kernels).
void write_truth_bundle(const std::filesystem::path& dir, const simulate::GroundTruth& truth);
simulate::GroundTruth read_truth_bundle(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace lsnet::io
