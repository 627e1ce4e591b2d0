#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netid/dynamics.hpp>
#include <netid/graph.hpp>
#include <netid/matfun.hpp>
#include <netid/rng.hpp>
#include <netid/subspace.hpp>

using namespace netid;

namespace {

Trajectory make_traj(const Matrix& inputs, const Matrix& outputs, double tau = 1.0) {
    Trajectory t;
    t.inputs = inputs;
    t.outputs = outputs;
    t.tau = tau;
    return t;
}

StateSpace random_stable_system(int n, Rng& rng) {
    StateSpace ss;
    Matrix a = standard_normal(n, n, rng);
    const double radius = std::abs(Eigen::EigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff());
    ss.A = a * (0.85 / radius);
    ss.B = standard_normal(n, n, rng);
    ss.C = Matrix::Identity(n, n);
    ss.D = Matrix::Zero(n, n);
    ss.tau = 1.0;
    return ss;
}

} // namespace

TEST_CASE("build_hankel") {
    SUBCASE("scalar stacking") {
        const Matrix y = (Matrix(1, 4) << 1, 2, 3, 4).finished();
        const Matrix u = (Matrix(1, 4) << 5, 6, 7, 8).finished();
        const HankelBlocks h = build_hankel(make_traj(u, y), 2);
        CHECK(h.T == 3);
        Matrix expect(2, 3);
        expect << 1, 2, 3, 2, 3, 4;
        CHECK((h.Y - expect).norm() == 0.0);
        Matrix expect_u(2, 3);
        expect_u << 5, 6, 7, 6, 7, 8;
        CHECK((h.U - expect_u).norm() == 0.0);
    }
    SUBCASE("column count arithmetic") {
        const HankelBlocks h = build_hankel(
            make_traj(Matrix::Random(20, 100), Matrix::Random(2, 100)), 21);
        CHECK(h.T == 80);
        // Hankel consistency: block (i, j) equals block (i-1, j+1)
        for (int i = 1; i < h.alpha; ++i)
            CHECK((h.Y.middleRows(i * h.L, h.L).leftCols(h.T - 1) -
                   h.Y.middleRows((i - 1) * h.L, h.L).rightCols(h.T - 1))
                      .norm() == 0.0);
    }
    SUBCASE("alpha must exceed the state dimension") {
        CHECK_THROWS_AS(build_hankel(make_traj(Matrix::Random(20, 100), Matrix::Random(2, 100)), 20),
                        validation_error);
    }
    SUBCASE("short trajectories report the requirement") {
        try {
            build_hankel(make_traj(Matrix::Random(5, 8), Matrix::Random(2, 8)), 6);
            FAIL("expected error");
        } catch (const validation_error& e) {
            CHECK(std::string(e.what()).find("Q >= alpha + N") != std::string::npos);
        }
    }
}

TEST_CASE("project_out_inputs") {
    Rng rng = make_rng(1);
    SUBCASE("output rows inside the input row space vanish") {
        Matrix u = standard_normal(4, 40, rng);
        HankelBlocks h;
        h.Y = u;
        h.U = u;
        h.alpha = 1;
        h.L = 4;
        h.N = 4;
        h.T = 40;
        const ProjectedOutputs p = project_out_inputs(h);
        CHECK(p.Y_perp.norm() <= 1e-10 * u.norm());
    }
    SUBCASE("orthogonal outputs pass through") {
        Matrix u(2, 6), y(1, 6);
        u << 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0;
        y << 0, 0, 1, 0, 0, 0;
        HankelBlocks h{y, u, 1, 1, 2, 6};
        const ProjectedOutputs p = project_out_inputs(h);
        CHECK((p.Y_perp - y).norm() <= 1e-12);
    }
    SUBCASE("annihilation against the direct oracle") {
        Matrix u = standard_normal(6, 50, rng);
        Matrix y = standard_normal(9, 50, rng);
        HankelBlocks h{y, u, 3, 3, 2, 50};
        const ProjectedOutputs p = project_out_inputs(h);
        const Matrix pi = Matrix::Identity(50, 50) -
                          u.transpose() * (u * u.transpose()).inverse() * u;
        CHECK((p.Y_perp - y * pi).norm() <= 1e-10 * y.norm());
        CHECK((u * pi).norm() <= 1e-10 * u.norm());
        // idempotence
        HankelBlocks h2{p.Y_perp, u, 3, 3, 2, 50};
        const ProjectedOutputs p2 = project_out_inputs(h2);
        CHECK((p2.Y_perp - p.Y_perp).norm() <= 1e-12 * std::max(1.0, p.Y_perp.norm()));
    }
    SUBCASE("rank-deficient inputs are reported") {
        HankelBlocks h{standard_normal(4, 30, rng), Matrix::Zero(4, 30), 2, 2, 2, 30};
        try {
            project_out_inputs(h);
            FAIL("expected error");
        } catch (const numerical_error& e) {
            CHECK(std::string(e.what()).find("not sufficiently exciting") != std::string::npos);
        }
    }
}

TEST_CASE("estimate_observability_span") {
    Rng rng = make_rng(17);
    SUBCASE("noise-free span matches the true observability matrix") {
        const int n = 10;
        const StateSpace ss = random_stable_system(n, rng);
        const Matrix inputs = gaussian_input(n, 400, 5);
        const Trajectory traj = simulate(ss, Vector::Zero(n), inputs, 0, 0, 6);
        const HankelBlocks h = build_hankel(traj, n + 1);
        const ProjectedOutputs p = project_out_inputs(h);
        const SpanEstimate span = estimate_observability_span(p.Y_perp, n);
        const Matrix o_true = observability_matrix(ss.A, ss.C, n + 1);
        const Eigen::HouseholderQR<Matrix> qr(o_true);
        const Matrix q_true = qr.householderQ() * Matrix::Identity(o_true.rows(), n);
        CHECK(largest_principal_angle(span.W, q_true) <= 1e-6);
        CHECK((span.W.transpose() * span.W - Matrix::Identity(n, n)).norm() <= 1e-10);
    }
    SUBCASE("exact low rank certificate") {
        Matrix basis = standard_normal(12, 3, rng);
        Matrix coeff = standard_normal(3, 30, rng);
        const SpanEstimate span = estimate_observability_span(basis * coeff, 3);
        CHECK(span.rank_gap > 1e10);
    }
    SUBCASE("too small signal singular value is refused") {
        Matrix basis = standard_normal(12, 3, rng);
        Matrix coeff = standard_normal(3, 30, rng);
        CHECK_THROWS_AS(estimate_observability_span(basis * coeff, 5), numerical_error);
    }
    SUBCASE("identity A with identity C spans stacked identities") {
        const int n = 4;
        Matrix o = observability_matrix(Matrix::Identity(n, n), Matrix::Identity(n, n), n + 1);
        const SpanEstimate span = estimate_observability_span(o * standard_normal(n, 30, rng), n);
        // span(W) == span(stacked identity blocks)
        Matrix q = o / std::sqrt(double(n + 1));
        CHECK(largest_principal_angle(span.W, q) <= 1e-9);
    }
}

TEST_CASE("estimate_T") {
    Rng rng = make_rng(23);
    SUBCASE("invertible first block, identity C") {
        const int n = 5;
        Matrix w = standard_normal(3 * n, n, rng);
        const Matrix jw = w.topRows(n);
        const TEstimate t = estimate_T(w, Matrix::Identity(n, n));
        CHECK_FALSE(t.non_unique);
        CHECK((jw * t.T - Matrix::Identity(n, n)).norm() <= 1e-10);
    }
    SUBCASE("padded identity block") {
        const int n = 4;
        Matrix w = Matrix::Zero(3 * n, n);
        w.topRows(n) = Matrix::Identity(n, n);
        const TEstimate t = estimate_T(w, Matrix::Identity(n, n));
        CHECK((t.T - Matrix::Identity(n, n)).norm() <= 1e-12);
    }
    SUBCASE("rank-deficient C sets the flag and stays invertible") {
        const int n = 6;
        Matrix w = standard_normal(4 * n, n, rng);
        Eigen::HouseholderQR<Matrix> qr(w);
        w = qr.householderQ() * Matrix::Identity(4 * n, n);
        Matrix c = Matrix::Zero(n / 2, n);
        for (int i = 0; i < n / 2; ++i) c(i, 2 * i) = 1.0;
        // make the top block consistent with c's row space
        Matrix wc = w;
        wc.topRows(n / 2) = c * 0.3;
        const TEstimate t = estimate_T(wc, c);
        CHECK(t.non_unique);
        CHECK(Eigen::FullPivLU<Matrix>(t.T).isInvertible());
        CHECK((wc.topRows(n / 2) * t.T - c).norm() <= 1e-9);
    }
}

TEST_CASE("estimate_A") {
    Rng rng = make_rng(29);
    SUBCASE("exact observability input returns A exactly") {
        const int n = 6;
        const StateSpace ss = random_stable_system(n, rng);
        const Matrix o = observability_matrix(ss.A, ss.C, n + 2);
        const Matrix a_hat = estimate_A(o, Matrix::Identity(n, n), n);
        CHECK((a_hat - ss.A).norm() <= 1e-10 * ss.A.norm());
    }
    SUBCASE("identity system") {
        const int n = 4;
        const Matrix o = observability_matrix(Matrix::Identity(n, n), Matrix::Identity(n, n), 6);
        CHECK((estimate_A(o, Matrix::Identity(n, n), n) - Matrix::Identity(n, n)).norm() <= 1e-12);
    }
    SUBCASE("rank loss is reported with advice") {
        Matrix w = Matrix::Zero(8, 3); // top block rank deficient
        w(6, 0) = w(7, 1) = 1.0;
        try {
            estimate_A(w, Matrix::Identity(3, 3), 2);
            FAIL("expected error");
        } catch (const numerical_error& e) {
            CHECK(std::string(e.what()).find("alpha") != std::string::npos);
        }
    }
}

TEST_CASE("estimate_B_x0") {
    Rng rng = make_rng(37);
    SUBCASE("zero B and unit initial state") {
        const int n = 5;
        StateSpace ss = random_stable_system(n, rng);
        ss.B = Matrix::Zero(n, n);
        Vector x0 = Vector::Zero(n);
        x0[0] = 1.0;
        const Trajectory traj = simulate(ss, x0, gaussian_input(n, 60, 2), 0, 0, 3);
        const BEstimate b = estimate_B_x0(traj, ss.A, ss.C, ss.D);
        CHECK((b.x0 - x0).norm() <= 1e-8);
        CHECK(b.B.norm() <= 1e-8);
    }
    SUBCASE("simulate-then-fit round trip") {
        const int n = 8;
        const StateSpace ss = random_stable_system(n, rng);
        Rng r2 = make_rng(100);
        const Vector x0 = standard_normal(n, 1, r2);
        const Trajectory traj = simulate(ss, x0, gaussian_input(n, 150, 4), 0, 0, 5);
        const BEstimate b = estimate_B_x0(traj, ss.A, ss.C, ss.D);
        CHECK((b.B - ss.B).norm() <= 1e-7 * ss.B.norm());
        CHECK((b.x0 - x0).norm() <= 1e-7 * std::max(1.0, x0.norm()));
        CHECK(b.residual <= 1e-14);
    }
    SUBCASE("pure noise gives an O(sigma/sqrt(Q)) input matrix") {
        const int n = 4;
        const int q = 4000;
        const double sigma = 0.05;
        StateSpace ss;
        ss.A = Matrix::Zero(n, n);
        ss.B = Matrix::Zero(n, n);
        ss.C = Matrix::Identity(n, n);
        ss.D = Matrix::Zero(n, n);
        ss.tau = 1.0;
        std::vector<double> norms;
        for (int seed = 0; seed < 50; ++seed) {
            const Trajectory traj = simulate(ss, Vector::Zero(n), gaussian_input(n, q, seed),
                                             0.0, sigma * sigma, 1000 + seed);
            norms.push_back(estimate_B_x0(traj, ss.A, ss.C, ss.D).B.norm());
        }
        std::sort(norms.begin(), norms.end());
        const double median = norms[25];
        CHECK(median <= 3.0 * sigma * n / std::sqrt(double(q)));
        CHECK(median > 0.0);
    }
    SUBCASE("underdetermined fits are rejected with the required count") {
        const int n = 6;
        const StateSpace ss = random_stable_system(n, rng);
        const Trajectory traj = simulate(ss, Vector::Zero(n), gaussian_input(n, 5, 2), 0, 0, 3);
        try {
            estimate_B_x0(traj, ss.A, ss.C, ss.D);
            FAIL("expected error");
        } catch (const validation_error& e) {
            CHECK(std::string(e.what()).find("need Q >=") != std::string::npos);
        }
    }
}

TEST_CASE("end-to-end noise-free identification") {
    Rng rng = make_rng(53);
    std::uniform_int_distribution<int> dim(2, 15);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = dim(rng);
        const StateSpace ss = random_stable_system(n, rng);
        const int alpha = n + 1;
        const int q = alpha * (n + 1) + 3 * n + 20;
        Rng r2 = make_rng(5000 + trial);
        const Vector x0 = standard_normal(n, 1, r2);
        const Trajectory traj =
            simulate(ss, x0, gaussian_input(n, q, 900 + trial), 0, 0, 300 + trial);
        const SubspaceEstimate est = subspace_id(traj, alpha, n, ss.C, ss.D);
        CHECK((est.A_hat - ss.A).norm() <= 1e-6 * ss.A.norm());
        CHECK((est.B_hat - ss.B).norm() <= 1e-6 * ss.B.norm());
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("row-selector C keeps the spectrum and the shift relation") {
    Rng rng = make_rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8;
        StateSpace ss = random_stable_system(n, rng);
        Matrix c = Matrix::Zero(n / 2, n);
        for (int i = 0; i < n / 2; ++i) c(i, 2 * i) = 1.0;
        ss.C = c;
        ss.D = Matrix::Zero(n / 2, n);
        const Trajectory traj =
            simulate(ss, Vector::Zero(n), gaussian_input(n, 400, trial), 0, 0, trial + 70);
        const SubspaceEstimate est = subspace_id(traj, n + 1, n, ss.C, ss.D);
        CHECK(est.diagnostics.t_non_unique);
        CHECK(est.diagnostics.shift_residual <= 1e-6 * est.W.norm());

        Eigen::EigenSolver<Matrix> e1(est.A_hat), e2(ss.A);
        Vector s1 = e1.eigenvalues().cwiseAbs();
        Vector s2 = e2.eigenvalues().cwiseAbs();
        std::sort(s1.data(), s1.data() + n);
        std::sort(s2.data(), s2.data() + n);
        CHECK((s1 - s2).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("instrumental variables") {
    Rng rng = make_rng(61);
    const int n = 8;
    const GraphShift l = to_laplacian(random_regular(n, 3, 12));
    StateSpace ss;
    ss.A = sym_matfun(l.matrix, [](double z) { return std::exp(-0.05 * z); });
    ss.B = Matrix::Identity(n, n);
    ss.C = Matrix::Identity(n, n);
    ss.D = Matrix::Zero(n, n);
    ss.tau = 0.05;

    SUBCASE("zero-noise IV spans the plain subspace") {
        const Trajectory traj =
            simulate(ss, Vector::Zero(n), gaussian_input(n, 1500, 3), 0, 0, 4);
        const int alpha = 2 * n + 2;
        const SubspaceEstimate plain = subspace_id(traj, alpha - (n + 1), n, ss.C, ss.D);
        const SubspaceEstimate iv = iv_subspace(traj, alpha, n + 1, n, ss.C, ss.D);
        // gamma = alpha - beta = n+1 blocks: same depth as the plain run
        CHECK(largest_principal_angle(plain.W, iv.W) <= 1e-6);
        CHECK((iv.A_hat - ss.A).norm() <= 1e-6 * ss.A.norm());
    }
    SUBCASE("observability angle improves with the sample count") {
        const int alpha = 2 * n + 2;
        const int gamma = alpha / 2;
        const Matrix o_true = observability_matrix(ss.A, ss.C, gamma);
        Eigen::HouseholderQR<Matrix> qr(o_true);
        const Matrix q_true = qr.householderQ() * Matrix::Identity(o_true.rows(), n);
        std::vector<double> medians;
        for (int t : {400, 1600}) {
            std::vector<double> angles;
            for (int seed = 0; seed < 11; ++seed) {
                const Trajectory traj = simulate(ss, Vector::Zero(n),
                                                 gaussian_input(n, t + alpha - 1, 10 + seed),
                                                 1e-3, 1e-3, 50 + seed);
                const SubspaceEstimate iv =
                    iv_subspace(traj, alpha, alpha - gamma, n, ss.C, ss.D, {false});
                angles.push_back(largest_principal_angle(iv.W, q_true));
            }
            std::sort(angles.begin(), angles.end());
            medians.push_back(angles[5]);
        }
        CHECK(medians[1] < medians[0]);
    }
    SUBCASE("gamma must exceed the state dimension") {
        const Trajectory traj = simulate(ss, Vector::Zero(n), gaussian_input(n, 500, 3), 0, 0, 4);
        CHECK_THROWS_AS(iv_subspace(traj, 2 * n, n, n, ss.C, ss.D), validation_error);
        CHECK_THROWS_AS(iv_subspace(traj, 2 * n + 2, 0, n, ss.C, ss.D), validation_error);
    }
}
