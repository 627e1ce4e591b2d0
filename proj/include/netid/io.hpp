#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "netid/dynamics.hpp"
#include "netid/graph.hpp"
#include "netid/reconstruct.hpp"
#include "netid/recovery.hpp"
#include "netid/subspace.hpp"

namespace netid {

using json = nlohmann::json;

// Generic matrix containers: {"rows": r, "cols": c, "data": row-major array}.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

// Graph shift container: {"n": N, "family": string, "data": row-major array}.
json graph_to_json(const GraphShift& g);
GraphShift graph_from_json(const json& j);

// Plain CSV of matrix rows.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Edge list: one "u v" pair per line, 0-based, '#' comments. Node count is
// inferred from the largest index unless n_hint is larger.
GraphShift read_edge_list(const std::filesystem::path& path, int n_hint = 0);
void write_edge_list(const std::filesystem::path& path, const GraphShift& g,
                     const std::string& comment = "");

// Trajectory: CSV with columns k, u_1..u_N, y_1..y_L plus a JSON sidecar
// carrying tau, the noise variances, and the seed.
void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& csv_path);

json statespace_to_json(const StateSpace& ss);
StateSpace statespace_from_json(const json& j);

json subspace_estimate_to_json(const SubspaceEstimate& est);
SubspaceEstimate subspace_estimate_from_json(const json& j);

json continuous_estimate_to_json(const ContinuousEstimate& est);

// APRun: CSV series (iteration, proj_residual, step_delta) and a JSON summary.
void write_ap_run_csv(const std::filesystem::path& path, const APRun& run);
json ap_run_summary(const APRun& run);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Root of the bundled data files (karate club, cospectral trees); honors the
/// build-time default and the NETID_DATA_DIR environment variable.
std::filesystem::path data_dir();

} // namespace netid
