#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <netid/experiments.hpp>
#include <netid/io.hpp>
#include <netid/rng.hpp>
#include <netid/subspace.hpp>

using namespace netid;

namespace {

std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "netid_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("matrix json round trip") {
    Rng rng = make_rng(1);
    const Matrix m = standard_normal(3, 5, rng);
    const Matrix back = matrix_from_json(matrix_to_json(m));
    CHECK((m - back).norm() == 0.0);
    json bad = matrix_to_json(m);
    bad["data"].erase(0);
    CHECK_THROWS_AS(matrix_from_json(bad), validation_error);
}

TEST_CASE("graph json container carries the family") {
    const GraphShift g = random_regular(6, 3, 2);
    const json j = graph_to_json(g);
    CHECK(j.at("n") == 6);
    CHECK(j.at("family") == "adjacency");
    const GraphShift back = graph_from_json(j);
    CHECK(back.family == GraphFamily::Adjacency);
    CHECK((back.matrix - g.matrix).norm() == 0.0);
}

TEST_CASE("matrix csv round trip is exact") {
    Rng rng = make_rng(3);
    const Matrix m = standard_normal(4, 7, rng);
    const auto path = tmp_dir() / "m.csv";
    write_matrix_csv(path, m);
    CHECK((read_matrix_csv(path) - m).norm() == 0.0);
}

TEST_CASE("edge list io") {
    const GraphShift g = random_regular(10, 3, 5);
    const auto path = tmp_dir() / "g.edges";
    write_edge_list(path, g, "test graph");
    const GraphShift back = read_edge_list(path);
    CHECK((back.matrix - g.matrix).norm() == 0.0);
    // comments and blank lines are skipped
    {
        std::ofstream out(tmp_dir() / "weird.edges");
        out << "# a comment\n\n0 1\n1 2 # trailing\n";
    }
    const GraphShift w = read_edge_list(tmp_dir() / "weird.edges");
    CHECK(w.n() == 3);
    CHECK(w.matrix(0, 1) == 1.0);
    CHECK(w.matrix(1, 2) == 1.0);
}

TEST_CASE("trajectory io round trip") {
    Rng rng = make_rng(4);
    Trajectory t;
    t.inputs = standard_normal(3, 20, rng);
    t.outputs = standard_normal(2, 20, rng);
    t.tau = 0.125;
    t.noise_state_var = 1e-3;
    t.noise_obs_var = 2e-3;
    t.seed = 99;
    const auto path = tmp_dir() / "traj.csv";
    write_trajectory(path, t);
    const Trajectory back = read_trajectory(path);
    CHECK((back.inputs - t.inputs).norm() == 0.0);
    CHECK((back.outputs - t.outputs).norm() == 0.0);
    CHECK(back.tau == t.tau);
    CHECK(back.noise_state_var == t.noise_state_var);
    CHECK(back.noise_obs_var == t.noise_obs_var);
    CHECK(back.seed == t.seed);
}

TEST_CASE("statespace json round trip validates") {
    Rng rng = make_rng(5);
    StateSpace ss;
    ss.A = standard_normal(3, 3, rng);
    ss.B = standard_normal(3, 3, rng);
    ss.C = standard_normal(2, 3, rng);
    ss.D = standard_normal(2, 3, rng);
    ss.tau = 0.5;
    const StateSpace back = statespace_from_json(statespace_to_json(ss));
    CHECK((back.A - ss.A).norm() == 0.0);
    CHECK((back.D - ss.D).norm() == 0.0);
    CHECK(back.tau == 0.5);
}

TEST_CASE("ap run export") {
    APRun run;
    run.proj_residual = {1.0, 0.5, 0.25};
    run.step_delta = {0.8, 0.4, 0.2};
    run.iterations = 3;
    run.converged = true;
    run.final_matrix = Matrix::Identity(2, 2);
    const auto path = tmp_dir() / "ap.csv";
    write_ap_run_csv(path, run);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,proj_residual,step_delta");
    const json summary = ap_run_summary(run);
    CHECK(summary.at("converged") == true);
    CHECK(summary.at("iterations") == 3);
    CHECK(summary.at("rate").at("linear") == false); // too few points
}

TEST_CASE("experiment config round trips losslessly") {
    ExperimentConfig cfg;
    cfg.experiment = "ap_convergence";
    cfg.n = 16;
    cfg.tau = 0.25;
    cfg.samples = 1234;
    cfg.epsilon = 0.05;
    cfg.m_known = 8;
    cfg.rho = 6.5;
    cfg.seed = 77;
    cfg.set_kind = "nonnegative";
    cfg.full_observation = true;
    cfg.mark("n");
    cfg.mark("tau");
    const json j = cfg.to_json();
    CHECK(j.at("provenance").at("n") == "overridden");
    CHECK(j.at("provenance").at("d") == "default");
    const ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.n == cfg.n);
    CHECK(back.tau == cfg.tau);
    CHECK(back.samples == cfg.samples);
    CHECK(back.epsilon == cfg.epsilon);
    CHECK(back.m_known == cfg.m_known);
    CHECK(back.rho == cfg.rho);
    CHECK(back.seed == cfg.seed);
    CHECK(back.set_kind == cfg.set_kind);
    CHECK(back.full_observation == cfg.full_observation);
    CHECK(back.to_json().at("tau") == j.at("tau"));
}

TEST_CASE("bundled data is reachable") {
    CHECK(std::filesystem::exists(data_dir() / "karate.edges"));
    CHECK(std::filesystem::exists(data_dir() / "cospectral_tree_a.edges"));
    CHECK(std::filesystem::exists(data_dir() / "cospectral_tree_b.edges"));
}

TEST_CASE("subspace estimate json round trip") {
    Rng rng = make_rng(8);
    SubspaceEstimate est;
    est.W = standard_normal(6, 3, rng);
    est.singular_values = (Vector(3) << 3, 2, 1).finished();
    est.T_hat = standard_normal(3, 3, rng);
    est.A_hat = standard_normal(3, 3, rng);
    est.B_hat = standard_normal(3, 3, rng);
    est.x0_hat = standard_normal(3, 1, rng);
    est.diagnostics.rank_gap = 42.0;
    est.diagnostics.t_non_unique = true;
    est.diagnostics.shift_residual = 1e-9;
    const SubspaceEstimate back = subspace_estimate_from_json(subspace_estimate_to_json(est));
    CHECK((back.W - est.W).norm() == 0.0);
    CHECK((back.A_hat - est.A_hat).norm() == 0.0);
    CHECK((back.B_hat - est.B_hat).norm() == 0.0);
    CHECK((back.x0_hat - est.x0_hat).norm() == 0.0);
    CHECK(back.diagnostics.rank_gap == 42.0);
    CHECK(back.diagnostics.t_non_unique);
}
