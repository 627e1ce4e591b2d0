// Command-line front end: simulate graph dynamics, identify state-space
// models from trajectories, reconstruct shift operators from spectra, and
// run the bundled experiments.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netid/experiments.hpp"
#include "netid/matfun.hpp"
#include "netid/recovery.hpp"
#include "netid/rng.hpp"

namespace {

using namespace netid;

std::filesystem::path resolve_out(std::string out) {
    std::filesystem::path p = out;
    if (p.is_relative()) {
        if (const char* root = std::getenv("NETID_OUTPUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p;
}

struct SimulateArgs {
    int n = 20, d = 3;
    std::uint64_t graph_seed = 1, input_graph_seed = 0, seed = 7;
    std::string edge_list, input_edge_list;
    std::string fx = "neg_identity", fu = "affine:-1:-1";
    std::string x0 = "zero";
    double tau = 1e-3;
    int samples = 5000;
    double noise_state_var = 0.0, noise_obs_var = 0.0;
    std::string out = "sim";
};

int run_simulate(const SimulateArgs& a) {
    GraphShift gx = a.edge_list.empty() ? random_regular(a.n, a.d, a.graph_seed)
                                        : read_edge_list(a.edge_list);
    const std::uint64_t iseed = a.input_graph_seed ? a.input_graph_seed : a.graph_seed + 1;
    GraphShift gu = a.input_edge_list.empty()
                        ? random_regular(gx.n(), a.d, iseed)
                        : read_edge_list(a.input_edge_list, gx.n());
    const GraphShift lx = to_laplacian(gx);
    const GraphShift lu = to_laplacian(gu);
    const int n = gx.n();

    ContinuousModel cm;
    cm.fx_map = ScalarMap::parse(a.fx);
    cm.fu_map = ScalarMap::parse(a.fu);
    cm.fx = cm.fx_map.apply(lx.matrix);
    cm.fu = cm.fu_map.apply(lu.matrix);
    cm.C = Matrix::Identity(n, n);
    cm.D = Matrix::Zero(n, n);
    const StateSpace ss = discretize(cm, a.tau);

    Vector x0 = Vector::Zero(n);
    if (a.x0 == "gauss") {
        Rng rng = make_rng(a.seed + 1);
        x0 = standard_normal(n, 1, rng);
    } else if (a.x0 != "zero") {
        throw validation_error("simulate: --x0 must be zero or gauss");
    }

    const Matrix inputs = gaussian_input(n, a.samples, a.seed);
    const Trajectory traj =
        simulate(ss, x0, inputs, a.noise_state_var, a.noise_obs_var, a.seed + 2);

    const std::filesystem::path dir = resolve_out(a.out);
    std::filesystem::create_directories(dir);
    write_trajectory(dir / "trajectory.csv", traj);
    write_json_file(dir / "graph_state.json", graph_to_json(lx));
    write_json_file(dir / "graph_input.json", graph_to_json(lu));
    write_json_file(dir / "system.json", statespace_to_json(ss));
    std::cout << "wrote " << (dir / "trajectory.csv").string() << " (" << traj.length()
              << " samples, N=" << n << ")\n";
    return 0;
}

struct IdentifyArgs {
    std::string trajectory;
    std::string method = "auto";
    int alpha = 0, beta = 0, n_states = 0;
    bool no_b = false;
    bool recover = false;
    std::string fx_map = "neg_identity";
    std::string out = "estimate.json";
};

int run_identify(const IdentifyArgs& a) {
    const Trajectory traj = read_trajectory(a.trajectory);
    const int n = traj.input_dim();
    const int n_states = a.n_states > 0 ? a.n_states : n;
    const int l = traj.output_dim();
    const Matrix c = Matrix::Identity(l, n);
    const Matrix d = Matrix::Zero(l, n);

    bool use_iv = a.method == "iv";
    if (a.method == "auto")
        use_iv = traj.noise_state_var > 0.0 || traj.noise_obs_var > 0.0;
    else if (a.method != "plain" && a.method != "iv")
        throw validation_error("identify: --method must be auto, plain, or iv");

    IdOptions opts;
    opts.estimate_b = !a.no_b;
    SubspaceEstimate est;
    int alpha = a.alpha;
    if (use_iv) {
        if (alpha == 0) alpha = 2 * n + 2;
        const int beta = a.beta > 0 ? a.beta : alpha / 2;
        est = iv_subspace(traj, alpha, beta, n_states, c, d, opts);
    } else {
        if (alpha == 0) alpha = n + 1;
        est = subspace_id(traj, alpha, n_states, c, d, opts);
    }

    json j = subspace_estimate_to_json(est);
    j["method"] = use_iv ? "iv" : "plain";
    j["alpha"] = alpha;
    j["tau"] = traj.tau;
    if (a.recover) {
        if (est.B_hat.size() == 0)
            throw validation_error("identify: --recover needs the B estimate (drop --no-b)");
        StateSpace ss_hat{est.A_hat, est.B_hat, c, d, traj.tau};
        RecoverOptions ropts;
        ropts.assume_undirected = true;
        ropts.fx_map = ScalarMap::parse(a.fx_map);
        j["continuous"] = continuous_estimate_to_json(recover_continuous(ss_hat, ropts));
    }
    const std::filesystem::path out = resolve_out(a.out);
    write_json_file(out, j);
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

struct ReconstructArgs {
    std::string estimate;
    std::string spectrum_csv;
    double epsilon = 0.0;
    int m = 0;
    double rho = 0.0;
    std::string set_kind = "laplacian_cvx";
    int starts = 5;
    int max_iter = 2000;
    double tol_step = 1e-6, feas_tol = 1e-6;
    std::uint64_t seed = 1;
    std::string out = "reconstruct";
};

int run_reconstruct(const ReconstructArgs& a) {
    Vector lambda;
    if (!a.spectrum_csv.empty()) {
        const Matrix m = read_matrix_csv(a.spectrum_csv);
        lambda = Eigen::Map<const Vector>(m.data(), m.size());
    } else if (!a.estimate.empty()) {
        const json j = read_json_file(a.estimate);
        if (j.contains("continuous"))
            lambda = vector_from_json(j.at("continuous").at("lambda_x"));
        else
            throw validation_error(
                "reconstruct: estimate file lacks a continuous recovery; rerun identify "
                "with --recover or pass --spectrum");
    } else {
        throw validation_error("reconstruct: need --spectrum or --estimate");
    }
    std::sort(lambda.data(), lambda.data() + lambda.size(), std::greater<double>());

    const int n = static_cast<int>(lambda.size());
    const int m_known = a.m > 0 ? a.m : n;
    SpectralTarget target;
    if (m_known < n) {
        const double rho = a.rho > 0.0 ? a.rho : lambda.cwiseAbs().maxCoeff();
        target = SpectralTarget::partial_spectrum(lambda.head(m_known), n, a.epsilon, rho);
    } else if (a.epsilon > 0.0) {
        target = SpectralTarget::with_uncertainty(lambda, a.epsilon);
    } else {
        target = SpectralTarget::exact(lambda);
    }

    const StructuralSet set = StructuralSet::parse(a.set_kind);
    APOptions opts;
    opts.max_iter = a.max_iter;
    opts.tol_step = a.tol_step;
    opts.feas_tol = a.feas_tol;

    const std::filesystem::path dir = resolve_out(a.out);
    std::filesystem::create_directories(dir);
    json summary = json::array();
    double best = std::numeric_limits<double>::infinity();
    Matrix best_final;
    for (int s = 0; s < std::max(1, a.starts); ++s) {
        APOptions o = opts;
        o.seed = a.seed + 1000 + s;
        const Matrix s0 = s == 0 ? diagonal_spectral_start(target)
                                 : random_spectral_start(target, a.seed + s);
        const APRun run = ap_solve(target, set, s0, o);
        write_ap_run_csv(dir / ("ap_start" + std::to_string(s) + ".csv"), run);
        json entry = ap_run_summary(run);
        entry["start"] = s;
        summary.push_back(std::move(entry));
        if (!run.proj_residual.empty() && run.proj_residual.back() < best) {
            best = run.proj_residual.back();
            best_final = run.final_matrix;
        }
    }
    write_json_file(dir / "summary.json",
                    {{"starts", summary}, {"best_final_residual", best}, {"n", n}});
    write_json_file(dir / "s_hat.json",
                    graph_to_json(GraphShift(best_final, GraphFamily::Generic)));
    std::cout << "best final residual " << best << "; wrote " << (dir / "s_hat.json").string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"network topology identification from state-space data"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "simulate a first-order graph model");
    c_sim->add_option("--n", sim.n, "node count");
    c_sim->add_option("--d", sim.d, "node degree");
    c_sim->add_option("--graph-seed", sim.graph_seed, "state graph seed");
    c_sim->add_option("--input-graph-seed", sim.input_graph_seed, "input graph seed");
    c_sim->add_option("--edge-list", sim.edge_list, "state graph edge list file");
    c_sim->add_option("--input-edge-list", sim.input_edge_list, "input graph edge list file");
    c_sim->add_option("--fx", sim.fx, "state scalar map (identity|neg_identity|affine:a:b)");
    c_sim->add_option("--fu", sim.fu, "input scalar map");
    c_sim->add_option("--x0", sim.x0, "initial state (zero|gauss)");
    c_sim->add_option("--tau", sim.tau, "sampling period");
    c_sim->add_option("--samples", sim.samples, "trajectory length Q");
    c_sim->add_option("--noise-state-var", sim.noise_state_var, "state noise variance");
    c_sim->add_option("--noise-obs-var", sim.noise_obs_var, "observation noise variance");
    c_sim->add_option("--seed", sim.seed, "input/noise seed");
    c_sim->add_option("--out", sim.out, "output directory");

    IdentifyArgs idn;
    CLI::App* c_id = app.add_subcommand("identify", "subspace identification from a trajectory");
    c_id->add_option("--trajectory", idn.trajectory, "trajectory CSV path")->required();
    c_id->add_option("--method", idn.method, "auto|plain|iv");
    c_id->add_option("--alpha", idn.alpha, "Hankel block depth (0 = auto)");
    c_id->add_option("--beta", idn.beta, "past depth for the IV split (0 = alpha/2)");
    c_id->add_option("--n-states", idn.n_states, "state dimension (0 = input dimension)");
    c_id->add_flag("--no-b", idn.no_b, "skip the B/x0 least squares");
    c_id->add_flag("--recover", idn.recover, "append the continuous-time recovery");
    c_id->add_option("--fx-map", idn.fx_map, "scalar map for the eigenvalue inversion");
    c_id->add_option("--out", idn.out, "output JSON path");

    ReconstructArgs rec;
    CLI::App* c_rec = app.add_subcommand("reconstruct",
                                         "alternating projections graph construction");
    c_rec->add_option("--estimate", rec.estimate, "identify output JSON (with --recover)");
    c_rec->add_option("--spectrum", rec.spectrum_csv, "target spectrum CSV");
    c_rec->add_option("--epsilon", rec.epsilon, "eigenvalue uncertainty radius");
    c_rec->add_option("--m", rec.m, "number of known eigenvalues (0 = all)");
    c_rec->add_option("--rho", rec.rho, "spectral cap for unknown eigenvalues");
    c_rec->add_option("--set", rec.set_kind, "laplacian_cvx|nonnegative|adjacency_sym");
    c_rec->add_option("--starts", rec.starts, "number of starts (first is diagonal)");
    c_rec->add_option("--max-iter", rec.max_iter, "iteration budget per start");
    c_rec->add_option("--tol-step", rec.tol_step, "iterate-step stopping tolerance");
    c_rec->add_option("--feas-tol", rec.feas_tol, "feasibility tolerance");
    c_rec->add_option("--seed", rec.seed, "seed for starts and escapes");
    c_rec->add_option("--out", rec.out, "output directory");

    ExperimentConfig cfg;
    std::string config_file, exp_name;
    CLI::App* c_exp = app.add_subcommand("experiment", "run a bundled experiment");
    c_exp->add_option("name", exp_name,
                      "model_validation|iv_karate|ap_convergence|partial_obs")
        ->required();
    c_exp->add_option("--config", config_file, "JSON config (overrides defaults)");
    std::map<std::string, std::function<void()>> marks;
    auto opt = [&](const char* flag, auto& field, const char* key) {
        c_exp->add_option(flag, field)->each([&cfg, key](const std::string&) { cfg.mark(key); });
    };
    opt("--n", cfg.n, "n");
    opt("--d", cfg.d, "d");
    opt("--tau", cfg.tau, "tau");
    opt("--samples", cfg.samples, "samples");
    opt("--noise-state-var", cfg.noise_state_var, "noise_state_var");
    opt("--noise-obs-var", cfg.noise_obs_var, "noise_obs_var");
    opt("--alpha", cfg.alpha, "alpha");
    opt("--beta", cfg.beta, "beta");
    opt("--epsilon", cfg.epsilon, "epsilon");
    opt("--m-known", cfg.m_known, "m_known");
    opt("--rho", cfg.rho, "rho");
    opt("--seed", cfg.seed, "seed");
    opt("--set", cfg.set_kind, "set_kind");
    opt("--out", cfg.output_dir, "output_dir");
    opt("--ap-max-iter", cfg.ap_max_iter, "ap_max_iter");
    opt("--tol-step", cfg.tol_step, "tol_step");
    opt("--feas-tol", cfg.feas_tol, "feas_tol");
    opt("--support-threshold", cfg.support_threshold, "support_threshold");
    opt("--holdout-samples", cfg.holdout_samples, "holdout_samples");
    opt("--input-scale", cfg.input_scale, "input_scale");
    c_exp->add_flag("--full-scale", cfg.full_scale)->each([&cfg](const std::string&) {
        cfg.mark("full_scale");
    });
    c_exp->add_flag("--full-observation", cfg.full_observation)->each([&cfg](const std::string&) {
        cfg.mark("full_observation");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_id->parsed()) return run_identify(idn);
        if (c_rec->parsed()) return run_reconstruct(rec);
        if (c_exp->parsed()) {
            ExperimentConfig base;
            if (!config_file.empty()) base = ExperimentConfig::from_json(read_json_file(config_file));
            // CLI flags override the config file.
            for (const auto& key : cfg.overridden) base.mark(key);
            ExperimentConfig merged = base;
            if (cfg.is_overridden("n")) merged.n = cfg.n;
            if (cfg.is_overridden("d")) merged.d = cfg.d;
            if (cfg.is_overridden("tau")) merged.tau = cfg.tau;
            if (cfg.is_overridden("samples")) merged.samples = cfg.samples;
            if (cfg.is_overridden("noise_state_var")) merged.noise_state_var = cfg.noise_state_var;
            if (cfg.is_overridden("noise_obs_var")) merged.noise_obs_var = cfg.noise_obs_var;
            if (cfg.is_overridden("alpha")) merged.alpha = cfg.alpha;
            if (cfg.is_overridden("beta")) merged.beta = cfg.beta;
            if (cfg.is_overridden("epsilon")) merged.epsilon = cfg.epsilon;
            if (cfg.is_overridden("m_known")) merged.m_known = cfg.m_known;
            if (cfg.is_overridden("rho")) merged.rho = cfg.rho;
            if (cfg.is_overridden("seed")) merged.seed = cfg.seed;
            if (cfg.is_overridden("set_kind")) merged.set_kind = cfg.set_kind;
            if (cfg.is_overridden("output_dir")) merged.output_dir = cfg.output_dir;
            if (cfg.is_overridden("ap_max_iter")) merged.ap_max_iter = cfg.ap_max_iter;
            if (cfg.is_overridden("tol_step")) merged.tol_step = cfg.tol_step;
            if (cfg.is_overridden("feas_tol")) merged.feas_tol = cfg.feas_tol;
            if (cfg.is_overridden("support_threshold"))
                merged.support_threshold = cfg.support_threshold;
            if (cfg.is_overridden("holdout_samples")) merged.holdout_samples = cfg.holdout_samples;
            if (cfg.is_overridden("input_scale")) merged.input_scale = cfg.input_scale;
            if (cfg.is_overridden("full_scale")) merged.full_scale = cfg.full_scale;
            if (cfg.is_overridden("full_observation"))
                merged.full_observation = cfg.full_observation;
            merged.experiment = exp_name;
            const ExperimentResult res = run_experiment(merged);
            std::cout << res.metrics.dump(2) << "\n";
            std::cout << "outputs in " << res.dir.string() << "\n";
            return 0;
        }
    } catch (const netid::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const netid::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
