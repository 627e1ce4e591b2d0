#include "netid/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace netid {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open for reading: " + path.string());
    return in;
}

} // namespace

json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw validation_error("matrix JSON: data length does not match rows*cols");
    Matrix m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
    return m;
}

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json graph_to_json(const GraphShift& g) {
    json j;
    j["n"] = g.n();
    j["family"] = to_string(g.family);
    json data = json::array();
    for (Eigen::Index i = 0; i < g.matrix.rows(); ++i)
        for (Eigen::Index jj = 0; jj < g.matrix.cols(); ++jj) data.push_back(g.matrix(i, jj));
    j["data"] = std::move(data);
    return j;
}

GraphShift graph_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    const auto& data = j.at("data");
    if (static_cast<int>(data.size()) != n * n)
        throw validation_error("graph JSON: data length does not match n*n");
    Matrix m(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) m(i, jj) = data[k++].get<double>();
    return GraphShift(std::move(m), family_from_string(j.at("family").get<std::string>()));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << fmt_double(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw validation_error("CSV rows have inconsistent lengths: " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

GraphShift read_edge_list(const std::filesystem::path& path, int n_hint) {
    std::ifstream in = open_in(path);
    std::vector<std::pair<int, int>> edges;
    int n = n_hint;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        int u, v;
        if (!(ss >> u >> v)) continue;
        if (u < 0 || v < 0) throw validation_error("edge list has a negative node index");
        edges.emplace_back(u, v);
        n = std::max({n, u + 1, v + 1});
    }
    Matrix a = Matrix::Zero(n, n);
    for (auto [u, v] : edges) {
        if (u == v) throw validation_error("edge list contains a self-loop");
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return GraphShift(std::move(a), GraphFamily::Adjacency);
}

void write_edge_list(const std::filesystem::path& path, const GraphShift& g,
                     const std::string& comment) {
    std::ofstream out = open_out(path);
    if (!comment.empty()) out << "# " << comment << '\n';
    for (Eigen::Index i = 0; i < g.matrix.rows(); ++i)
        for (Eigen::Index j = i + 1; j < g.matrix.cols(); ++j)
            if (g.matrix(i, j) != 0.0) out << i << ' ' << j << '\n';
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

} // namespace

void write_trajectory(const std::filesystem::path& csv_path, const Trajectory& traj) {
    std::ofstream out = open_out(csv_path);
    const int n = traj.input_dim();
    const int l = traj.output_dim();
    out << "k";
    for (int i = 1; i <= n; ++i) out << ",u_" << i;
    for (int i = 1; i <= l; ++i) out << ",y_" << i;
    out << '\n';
    for (Eigen::Index k = 0; k < traj.length(); ++k) {
        out << k;
        for (int i = 0; i < n; ++i) out << ',' << fmt_double(traj.inputs(i, k));
        for (int i = 0; i < l; ++i) out << ',' << fmt_double(traj.outputs(i, k));
        out << '\n';
    }
    json side = {{"tau", traj.tau},
                 {"noise_state_var", traj.noise_state_var},
                 {"noise_obs_var", traj.noise_obs_var},
                 {"seed", traj.seed},
                 {"inputs", n},
                 {"outputs", l}};
    write_json_file(sidecar_path(csv_path), side);
}

Trajectory read_trajectory(const std::filesystem::path& csv_path) {
    const json side = read_json_file(sidecar_path(csv_path));
    const int n = side.at("inputs").get<int>();
    const int l = side.at("outputs").get<int>();

    std::ifstream in = open_in(csv_path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty trajectory CSV");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != 1 + n + l)
            throw validation_error("trajectory CSV row has wrong column count");
        rows.push_back(std::move(row));
    }

    Trajectory traj;
    traj.tau = side.at("tau").get<double>();
    traj.noise_state_var = side.at("noise_state_var").get<double>();
    traj.noise_obs_var = side.at("noise_obs_var").get<double>();
    traj.seed = side.at("seed").get<std::uint64_t>();
    traj.inputs = Matrix(n, rows.size());
    traj.outputs = Matrix(l, rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (int i = 0; i < n; ++i) traj.inputs(i, static_cast<Eigen::Index>(k)) = rows[k][1 + i];
        for (int i = 0; i < l; ++i)
            traj.outputs(i, static_cast<Eigen::Index>(k)) = rows[k][1 + n + i];
    }
    return traj;
}

json statespace_to_json(const StateSpace& ss) {
    return {{"A", matrix_to_json(ss.A)}, {"B", matrix_to_json(ss.B)},
            {"C", matrix_to_json(ss.C)}, {"D", matrix_to_json(ss.D)},
            {"tau", ss.tau}};
}

StateSpace statespace_from_json(const json& j) {
    StateSpace ss;
    ss.A = matrix_from_json(j.at("A"));
    ss.B = matrix_from_json(j.at("B"));
    ss.C = matrix_from_json(j.at("C"));
    ss.D = matrix_from_json(j.at("D"));
    ss.tau = j.at("tau").get<double>();
    ss.validate();
    return ss;
}

json subspace_estimate_to_json(const SubspaceEstimate& est) {
    json j;
    j["W"] = matrix_to_json(est.W);
    j["singular_values"] = vector_to_json(est.singular_values);
    j["T_hat"] = matrix_to_json(est.T_hat);
    j["A_hat"] = matrix_to_json(est.A_hat);
    if (est.B_hat.size()) j["B_hat"] = matrix_to_json(est.B_hat);
    if (est.x0_hat.size()) j["x0_hat"] = vector_to_json(est.x0_hat);
    j["diagnostics"] = {{"rank_gap", est.diagnostics.rank_gap},
                        {"u_singular_ratio", est.diagnostics.u_singular_ratio},
                        {"t_non_unique", est.diagnostics.t_non_unique},
                        {"shift_residual", est.diagnostics.shift_residual},
                        {"b_residual", est.diagnostics.b_residual},
                        {"auto_order", est.diagnostics.auto_order}};
    return j;
}

SubspaceEstimate subspace_estimate_from_json(const json& j) {
    SubspaceEstimate est;
    est.W = matrix_from_json(j.at("W"));
    est.singular_values = vector_from_json(j.at("singular_values"));
    est.T_hat = matrix_from_json(j.at("T_hat"));
    est.A_hat = matrix_from_json(j.at("A_hat"));
    if (j.contains("B_hat")) est.B_hat = matrix_from_json(j.at("B_hat"));
    if (j.contains("x0_hat")) est.x0_hat = vector_from_json(j.at("x0_hat"));
    const auto& d = j.at("diagnostics");
    est.diagnostics.rank_gap = d.at("rank_gap").get<double>();
    est.diagnostics.u_singular_ratio = d.at("u_singular_ratio").get<double>();
    est.diagnostics.t_non_unique = d.at("t_non_unique").get<bool>();
    est.diagnostics.shift_residual = d.at("shift_residual").get<double>();
    est.diagnostics.b_residual = d.at("b_residual").get<double>();
    est.diagnostics.auto_order = d.at("auto_order").get<bool>();
    return est;
}

json continuous_estimate_to_json(const ContinuousEstimate& est) {
    return {{"fx_hat", matrix_to_json(est.fx_hat)},
            {"fu_hat", matrix_to_json(est.fu_hat)},
            {"tau", est.tau},
            {"lambda_x", vector_to_json(est.lambda_x)},
            {"roundtrip_error", est.roundtrip_error},
            {"used_spectral_fallback", est.used_spectral_fallback}};
}

void write_ap_run_csv(const std::filesystem::path& path, const APRun& run) {
    std::ofstream out = open_out(path);
    out << "iteration,proj_residual,step_delta\n";
    for (std::size_t k = 0; k < run.proj_residual.size(); ++k) {
        out << k << ',' << fmt_double(run.proj_residual[k]) << ',';
        out << (k < run.step_delta.size() ? fmt_double(run.step_delta[k]) : "");
        out << '\n';
    }
}

json ap_run_summary(const APRun& run) {
    json j;
    j["converged"] = run.converged;
    j["iterations"] = run.iterations;
    j["fixed_point_escapes"] = run.fixed_point_escapes;
    j["final_proj_residual"] = run.proj_residual.empty() ? 0.0 : run.proj_residual.back();
    j["final_step_delta"] = run.step_delta.empty() ? 0.0 : run.step_delta.back();
    try {
        const RateEstimate rate = estimate_linear_rate(run);
        j["rate"] = {{"linear", rate.linear}, {"value", rate.rate}, {"r_squared", rate.r_squared}};
    } catch (const validation_error&) {
        j["rate"] = {{"linear", false}, {"note", "insufficient data"}};
    }
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("NETID_DATA_DIR")) return env;
#ifdef NETID_DATA_DIR
    return NETID_DATA_DIR;
#else
    return "data";
#endif
}

} // namespace netid
