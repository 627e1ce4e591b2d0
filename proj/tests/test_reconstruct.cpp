#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <netid/graph.hpp>
#include <netid/io.hpp>
#include <netid/matfun.hpp>
#include <netid/reconstruct.hpp>
#include <netid/rng.hpp>

using namespace netid;

namespace {

Matrix random_symmetric(int n, Rng& rng) {
    Matrix m = standard_normal(n, n, rng);
    return (m + m.transpose()) / 2.0;
}

Vector sorted_desc(Vector v) {
    std::sort(v.data(), v.data() + v.size(), std::greater<double>());
    return v;
}

} // namespace

TEST_CASE("project_M") {
    Rng rng = make_rng(3);
    SUBCASE("matrices already in the set are untouched") {
        const Matrix s = random_symmetric(5, rng);
        const Vector lam = eig_sym(s).values;
        CHECK((project_M(s, lam) - s).norm() <= 1e-10 * std::max(1.0, s.norm()));
    }
    SUBCASE("shared eigenbasis case") {
        Matrix s = Matrix::Zero(2, 2);
        s(0, 0) = 5;
        s(1, 1) = 1;
        const Matrix p = project_M(s, (Vector(2) << 2, 0).finished());
        CHECK(p(0, 0) == doctest::Approx(2.0));
        CHECK(p(1, 1) == doctest::Approx(0.0));
        CHECK(std::abs(p(0, 1)) < 1e-14);
    }
    SUBCASE("spectrum contract") {
        for (int trial = 0; trial < 30; ++trial) {
            const Matrix s = random_symmetric(6, rng);
            const Vector lam = sorted_desc(standard_normal(6, 1, rng));
            const Matrix p = project_M(s, lam);
            CHECK((eig_sym(p).values - lam).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
    SUBCASE("Monte Carlo optimality") {
        const Matrix s = random_symmetric(5, rng);
        const Vector lam = sorted_desc(standard_normal(5, 1, rng));
        const Matrix p = project_M(s, lam);
        const double d = (s - p).norm();
        for (int trial = 0; trial < 3000; ++trial) {
            const Matrix v = random_orthogonal(5, rng);
            const Matrix cand = v * lam.asDiagonal() * v.transpose();
            CHECK(d <= (s - cand).norm() + 1e-9);
        }
    }
    SUBCASE("rejects unsorted spectra and asymmetric input") {
        CHECK_THROWS_AS(project_M(Matrix::Identity(2, 2), (Vector(2) << 0, 1).finished()),
                        validation_error);
        Matrix bad(2, 2);
        bad << 0, 1, 0, 0;
        CHECK_THROWS_AS(project_M(bad, (Vector(2) << 1, 0).finished()), validation_error);
    }
}

TEST_CASE("project_M_eps") {
    Rng rng = make_rng(5);
    const Matrix s = random_symmetric(4, rng);
    const Vector lam = sorted_desc(standard_normal(4, 1, rng));
    SUBCASE("zero radius reduces to the exact projection") {
        CHECK((project_M_eps(s, lam, 0.0) - project_M(s, lam)).norm() <= 1e-12);
    }
    SUBCASE("clamp formula") {
        Matrix one = Matrix::Constant(1, 1, 2.0);
        const Matrix p = project_M_eps(one, Vector::Constant(1, 1.2), 0.5);
        CHECK(p(0, 0) == doctest::Approx(1.7));
    }
    SUBCASE("large radius keeps the spectrum") {
        const double eps = 1e6;
        CHECK((project_M_eps(s, lam, eps) - s).norm() <= 1e-10 * std::max(1.0, s.norm()));
    }
    SUBCASE("eigenvalues stay inside the ball") {
        for (int trial = 0; trial < 25; ++trial) {
            const Matrix m = random_symmetric(5, rng);
            const Vector t = sorted_desc(standard_normal(5, 1, rng));
            const Vector got = eig_sym(project_M_eps(m, t, 0.3)).values;
            CHECK(((got - t).cwiseAbs().array() <= 0.3 + 1e-9).all());
        }
    }
}

TEST_CASE("project_M_eps_m") {
    Rng rng = make_rng(7);
    SUBCASE("full target degenerates to project_M") {
        const Matrix s = random_symmetric(5, rng);
        const Vector lam = sorted_desc(standard_normal(5, 1, rng));
        CHECK((project_M_eps_m(s, lam, 0.0, 1e9) - project_M(s, lam)).norm() <= 1e-10);
    }
    SUBCASE("single matched eigenvalue moves, the rest stay") {
        Rng r = make_rng(8);
        const Matrix q = random_orthogonal(3, r);
        const Vector vals = (Vector(3) << 5, 3, 1).finished();
        const Matrix s = q * vals.asDiagonal() * q.transpose();
        const Matrix p = project_M_eps_m(s, Vector::Constant(1, 2.9), 0.0, 10.0);
        const Vector got = eig_sym(p).values;
        CHECK(got[0] == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(got[1] == doctest::Approx(2.9).epsilon(1e-9));
        CHECK(got[2] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("empty target clips the spectrum to rho") {
        const Matrix s = random_symmetric(5, rng);
        bool clipped = false;
        const Matrix p = project_M_eps_m(s, Vector(0), 0.0, 0.5, &clipped);
        const Vector got = eig_sym(p).values;
        CHECK((got.cwiseAbs().array() <= 0.5 + 1e-9).all());
    }
    SUBCASE("matched values land in the epsilon ball, all inside rho") {
        for (int trial = 0; trial < 25; ++trial) {
            const Matrix s = random_symmetric(6, rng);
            Vector lam_m = sorted_desc(standard_normal(3, 1, rng));
            const double rho = std::max(lam_m.cwiseAbs().maxCoeff(), 2.0);
            const Matrix p = project_M_eps_m(s, lam_m, 0.2, rho);
            const Vector got = eig_sym(p).values;
            CHECK((got.cwiseAbs().array() <= rho + 1e-9).all());
            // the matching on the projected spectrum certifies the epsilon ball
            const std::vector<int> sigma = match_partial_spectrum(got, lam_m);
            for (int i = 0; i < 3; ++i)
                CHECK(std::abs(got[sigma[i]] - lam_m[i]) <= 0.2 + 1e-8);
        }
    }
    SUBCASE("m > N rejected") {
        CHECK_THROWS_AS(project_M_eps_m(Matrix::Identity(2, 2), Vector::Zero(3), 0, 1),
                        validation_error);
    }
}

TEST_CASE("match_partial_spectrum equals exhaustive ordered search") {
    Rng rng = make_rng(11);
    std::uniform_int_distribution<int> ndist(2, 7), mdist(1, 3);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = ndist(rng);
        const int m = std::min(mdist(rng), n);
        const Vector vals = sorted_desc(standard_normal(n, 1, rng));
        const Vector targets = sorted_desc(standard_normal(m, 1, rng));
        const std::vector<int> got = match_partial_spectrum(vals, targets);

        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_sel, sel(m);
        std::function<void(int, int, double)> rec = [&](int i, int from, double acc) {
            if (i == m) {
                if (acc < best - 1e-12) {
                    best = acc;
                    best_sel = sel;
                }
                return;
            }
            for (int c = from; c <= n - (m - i); ++c) {
                sel[i] = c;
                const double d = vals[c] - targets[i];
                rec(i + 1, c + 1, acc + d * d);
            }
        };
        rec(0, 0, 0.0);
        double got_cost = 0;
        for (int i = 0; i < m; ++i) {
            const double d = vals[got[i]] - targets[i];
            got_cost += d * d;
        }
        CHECK(got_cost == doctest::Approx(best).epsilon(1e-10));
        CHECK(got == best_sel);
    }
}

TEST_CASE("project_M_ab") {
    Rng rng = make_rng(13);
    const Matrix s = random_symmetric(5, rng);
    const Vector lam = sorted_desc(standard_normal(5, 1, rng));
    SUBCASE("degenerate boxes reduce to project_M") {
        CHECK((project_M_ab(s, lam, Vector::Zero(5), Vector::Zero(5)) - project_M(s, lam)).norm() <=
              1e-12);
    }
    SUBCASE("one-sided boxes clamp to the positive part") {
        const Vector zero = Vector::Zero(5);
        const Vector inf = Vector::Constant(5, std::numeric_limits<double>::infinity());
        const Matrix p = project_M_ab(s, zero, zero, inf);
        CHECK(eig_sym(p).values.minCoeff() >= -1e-10);
        // equals the spectral positive part
        const Matrix pos = sym_matfun(s, [](double z) { return std::max(z, 0.0); });
        CHECK((p - pos).norm() <= 1e-9);
    }
    SUBCASE("symmetric boxes match the epsilon ball") {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix m = random_symmetric(4, rng);
            const Vector t = sorted_desc(standard_normal(4, 1, rng));
            const double eps = 0.4;
            const Matrix via_box =
                project_M_ab(m, t, Vector::Constant(4, -eps), Vector::Constant(4, eps));
            CHECK((via_box - project_M_eps(m, t, eps)).norm() <= 1e-12);
        }
    }
    SUBCASE("inverted bounds rejected") {
        CHECK_THROWS_AS(project_M_ab(s, lam, Vector::Ones(5), Vector::Zero(5)), validation_error);
    }
}

TEST_CASE("projection optimality for the constrained variants") {
    Rng rng = make_rng(17);
    const int n = 5;
    const Matrix s = random_symmetric(n, rng);
    const Vector lam = sorted_desc(standard_normal(n, 1, rng));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    SUBCASE("epsilon ball") {
        const double eps = 0.3;
        const Matrix p = project_M_eps(s, lam, eps);
        const double d = (s - p).norm();
        for (int trial = 0; trial < 2000; ++trial) {
            const Matrix v = random_orthogonal(n, rng);
            Vector cand = lam;
            for (int i = 0; i < n; ++i) cand[i] += eps * unit(rng);
            CHECK(d <= (s - v * cand.asDiagonal() * v.transpose()).norm() + 1e-9);
        }
    }
    SUBCASE("partial spectrum") {
        const Vector lam_m = lam.head(2);
        const double rho = lam.cwiseAbs().maxCoeff() + 1.0;
        const Matrix p = project_M_eps_m(s, lam_m, 0.1, rho);
        const double d = (s - p).norm();
        for (int trial = 0; trial < 2000; ++trial) {
            const Matrix v = random_orthogonal(n, rng);
            Vector cand(n);
            for (int i = 0; i < 2; ++i) cand[i] = lam_m[i] + 0.1 * unit(rng);
            for (int i = 2; i < n; ++i) cand[i] = rho * unit(rng);
            std::sort(cand.data(), cand.data() + n, std::greater<double>());
            CHECK(d <= (s - v * cand.asDiagonal() * v.transpose()).norm() + 1e-9);
        }
    }
    SUBCASE("boxes") {
        Vector a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = -0.2 - 0.1 * i;
            b[i] = 0.1 + 0.05 * i;
        }
        const Matrix p = project_M_ab(s, lam, a, b);
        const double d = (s - p).norm();
        for (int trial = 0; trial < 2000; ++trial) {
            const Matrix v = random_orthogonal(n, rng);
            Vector cand = lam;
            for (int i = 0; i < n; ++i) cand[i] += a[i] + (b[i] - a[i]) * (unit(rng) + 1.0) / 2.0;
            CHECK(d <= (s - v * cand.asDiagonal() * v.transpose()).norm() + 1e-9);
        }
    }
}

TEST_CASE("project_S closed forms") {
    Rng rng = make_rng(19);
    SUBCASE("valid Laplacian is unchanged") {
        const Matrix l = to_laplacian(random_regular(8, 3, 4)).matrix;
        CHECK((project_S(l, StructuralSet::laplacian_cvx()) - l).norm() <= 1e-9);
    }
    SUBCASE("negative identity clamps to zero") {
        CHECK(project_S(-Matrix::Identity(4, 4), StructuralSet::nonnegative()).norm() == 0.0);
    }
    SUBCASE("adjacency set zeroes the diagonal and negatives") {
        const Matrix s = random_symmetric(5, rng);
        const Matrix p = project_S(s, StructuralSet::adjacency_sym());
        CHECK(p.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(p.minCoeff() >= 0.0);
    }
    SUBCASE("idempotence") {
        for (auto kind : {StructuralSet::laplacian_cvx(), StructuralSet::nonnegative(),
                          StructuralSet::adjacency_sym()}) {
            const Matrix s = random_symmetric(6, rng);
            const Matrix p1 = project_S(s, kind);
            CHECK((project_S(p1, kind) - p1).norm() <= 1e-9 * std::max(1.0, p1.norm()));
        }
    }
}

TEST_CASE("project_S Laplacian relaxation matches the offline QP oracle") {
    const json oracle = read_json_file(std::filesystem::path(NETID_TEST_DATA_DIR) /
                                       "laplacian_projection_oracle.json");
    int checked = 0;
    for (const auto& inst : oracle.at("instances")) {
        const int n = inst.at("n").get<int>();
        Matrix s(n, n), expect(n, n);
        int k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(i, j) = inst.at("input")[k++].get<double>();
        k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) expect(i, j) = inst.at("projection")[k++].get<double>();
        const Matrix got = project_S(s, StructuralSet::laplacian_cvx());
        CHECK((got - expect).norm() <= 1e-6 * std::max(1.0, expect.norm()));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("check_consistency") {
    Rng rng = make_rng(23);
    SUBCASE("exact transformed data recovers the transform") {
        const int n = 8, l = 6;
        const Matrix s_x = to_laplacian(random_regular(n, 3, 9)).matrix;
        const Matrix t_true = random_orthogonal(n, rng) + 0.2 * standard_normal(n, n, rng);
        const Matrix t_inv = t_true.inverse();
        Matrix c = Matrix::Zero(l, n);
        for (int i = 0; i < l; ++i) c(i, i) = 1.0;
        const ConsistencyData cons(c, c * t_inv, t_true * s_x * t_inv, std::nullopt, false);
        const ConsistencyReport rep = check_consistency(s_x, cons);
        CHECK(rep.residual <= 1e-8);
        CHECK_FALSE(rep.underdetermined);
        CHECK((rep.T - t_true).norm() <= 1e-7 * t_true.norm());
    }
    SUBCASE("full observation with identity maps") {
        const int n = 5;
        const Matrix s_x = random_symmetric(n, rng);
        const Matrix c = Matrix::Identity(n, n);
        const ConsistencyData cons(c, c, s_x, std::nullopt, false);
        const ConsistencyReport rep = check_consistency(s_x, cons);
        CHECK(rep.residual <= 1e-10);
        CHECK((rep.T - Matrix::Identity(n, n)).norm() <= 1e-8);
    }
    SUBCASE("random candidates are inconsistent") {
        const int n = 8, l = 6;
        const Matrix s_x = to_laplacian(random_regular(n, 3, 21)).matrix;
        const Matrix t_true = random_orthogonal(n, rng) + 0.1 * standard_normal(n, n, rng);
        Matrix c = Matrix::Zero(l, n);
        for (int i = 0; i < l; ++i) c(i, i) = 1.0;
        const ConsistencyData cons(c, c * t_true.inverse(), t_true * s_x * t_true.inverse(),
                                   std::nullopt, false);
        int positive = 0;
        const int draws = 60;
        for (int trial = 0; trial < draws; ++trial) {
            const Matrix cand = random_symmetric(n, rng);
            if (check_consistency(cand, cons).residual > 1e-3) ++positive;
        }
        CHECK(positive >= draws * 95 / 100);
    }
    SUBCASE("input symmetry residual at the true transform") {
        const int n = 6, l = 4;
        const Matrix s_x = random_symmetric(n, rng);
        const Matrix b = random_symmetric(n, rng);
        const Matrix t_true = random_orthogonal(n, rng);
        Matrix c = Matrix::Zero(l, n);
        for (int i = 0; i < l; ++i) c(i, i) = 1.0;
        const ConsistencyData cons(c, c * t_true.transpose(), t_true * s_x * t_true.transpose(),
                                   t_true * b, false);
        const ConsistencyReport rep = check_consistency(s_x, cons);
        CHECK(rep.residual <= 1e-8);
        CHECK(rep.input_symmetry_residual <= 1e-6);
    }
}

TEST_CASE("consistency shadow projection") {
    Rng rng = make_rng(29);
    const int n = 10, l = 5;
    const Matrix s_x = to_laplacian(random_regular(n, 3, 31)).matrix;
    const Matrix b = random_symmetric(n, rng) + 3.0 * Matrix::Identity(n, n);
    Rng r2 = make_rng(77);
    Matrix k = standard_normal(n, n, r2) * 0.2;
    Matrix c = Matrix::Zero(l, n);
    for (int i = 0; i < l; ++i) c(i, 2 * i) = 1.0;
    for (int i = 0; i < l; ++i) k.row(2 * i).setZero();
    const Matrix p_inv = Matrix::Identity(n, n) + k;
    const Matrix p = p_inv.inverse();
    // known action of B on the ones vector pins the transform fully
    const ConsistencyData cons(c, c, p * s_x * p_inv, p * b, true,
                               Vector(b.rowwise().sum()));

    SUBCASE("the true point satisfies the shadow") {
        CHECK((cons.project(s_x) - s_x).norm() <= 1e-8);
    }
    SUBCASE("the projection is idempotent") {
        const Matrix z = random_symmetric(n, rng);
        const Matrix p1 = cons.project(z);
        CHECK((cons.project(p1) - p1).norm() <= 1e-9 * std::max(1.0, p1.norm()));
    }
    SUBCASE("solve_transform recovers the transform at the true point") {
        const Matrix t = cons.solve_transform(s_x);
        CHECK((t - p).norm() <= 1e-6 * p.norm());
    }
    SUBCASE("dykstra with the shadow keeps the true point") {
        StructuralSet set = StructuralSet::laplacian_cvx();
        set.consistency = cons;
        CHECK((project_S(s_x, set) - s_x).norm() <= 1e-7);
    }
}

TEST_CASE("ap_solve") {
    Rng rng = make_rng(31);
    SUBCASE("feasible start stops immediately") {
        const Matrix l = to_laplacian(random_regular(10, 3, 3)).matrix;
        const SpectralTarget target = SpectralTarget::exact(eig_sym(l).values);
        const APRun run = ap_solve(target, StructuralSet::laplacian_cvx(), l, {});
        CHECK(run.iterations == 1);
        CHECK(run.converged);
        CHECK(run.proj_residual.back() <= 1e-9);
    }
    SUBCASE("monotone residual on random instances") {
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix l = to_laplacian(random_regular(12, 3, 40 + trial)).matrix;
            const Vector lam = eig_sym(l).values;
            const SpectralTarget target =
                SpectralTarget::partial_spectrum(lam.head(6), 12, 0.0, lam.maxCoeff());
            APOptions opts;
            opts.max_iter = 300;
            const APRun run =
                ap_solve(target, StructuralSet::laplacian_cvx(),
                         random_spectral_start(target, 900 + trial), opts);
            for (std::size_t k = 1; k < run.proj_residual.size(); ++k)
                CHECK(run.proj_residual[k] <= run.proj_residual[k - 1] + 1e-12);
        }
    }
    SUBCASE("infeasible target reports a positive limiting residual") {
        // Laplacians have nonnegative trace; a strictly negative spectrum sum
        // is unreachable.
        const Vector lam = (Vector(4) << 0.5, -1.0, -2.0, -3.0).finished();
        const SpectralTarget target = SpectralTarget::exact(lam);
        APOptions opts;
        opts.max_iter = 400;
        const APRun run = ap_solve(target, StructuralSet::laplacian_cvx(),
                                   random_spectral_start(target, 5), opts);
        CHECK_FALSE(run.converged);
        CHECK(run.proj_residual.back() > 0.1);
    }
    SUBCASE("degenerate fixed point triggers escapes") {
        const Vector lam = (Vector(3) << 1.0, -1.0, -2.0).finished();
        const SpectralTarget target = SpectralTarget::exact(lam);
        // one full cycle from the diagonal candidate lands on a fixed point
        // whose structural projection has a repeated (zero) eigenvalue
        const Matrix s_fp = project_spectral(
            project_S(Matrix(lam.asDiagonal()), StructuralSet::nonnegative()), target);
        CHECK(detect_fixed_point(s_fp, StructuralSet::nonnegative(), target));
        APOptions opts;
        opts.max_iter = 50;
        opts.escape_budget = 4;
        const APRun run = ap_solve(target, StructuralSet::nonnegative(), s_fp, opts);
        CHECK(run.fixed_point_escapes >= 1);
        CHECK_FALSE(run.converged);
    }
    SUBCASE("converged runs land in the cospectral class") {
        const Matrix l = to_laplacian(random_regular(10, 3, 8)).matrix;
        const Vector lam = eig_sym(l).values;
        const SpectralTarget target = SpectralTarget::exact(lam);
        APOptions opts;
        opts.max_iter = 3000;
        opts.tol_step = 1e-10;
        opts.feas_tol = 1e-6;
        const APRun run = ap_solve(target, StructuralSet::laplacian_cvx(),
                                   random_spectral_start(target, 77), opts);
        REQUIRE(run.converged);
        CHECK((eig_sym(run.final_matrix).values - lam).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((project_S(run.final_matrix, StructuralSet::laplacian_cvx()) - run.final_matrix)
                  .norm() <= 1e-6);
    }
    SUBCASE("keep_iterates records snapshots") {
        const Matrix l = to_laplacian(random_regular(8, 3, 2)).matrix;
        const SpectralTarget target = SpectralTarget::exact(eig_sym(l).values);
        APOptions opts;
        opts.keep_iterates = true;
        opts.max_iter = 10;
        const APRun run = ap_solve(target, StructuralSet::laplacian_cvx(),
                                   random_spectral_start(target, 4), opts);
        CHECK(run.iterates.size() == static_cast<std::size_t>(run.iterations) + 1);
    }
}

TEST_CASE("detect_fixed_point") {
    const Matrix l = to_laplacian(random_regular(8, 3, 11)).matrix;
    const SpectralTarget target = SpectralTarget::exact(eig_sym(l).values);
    CHECK(detect_fixed_point(l, StructuralSet::laplacian_cvx(), target));
    Rng rng = make_rng(5);
    int fixed = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix s = project_spectral(random_symmetric(8, rng), target);
        if (detect_fixed_point(s, StructuralSet::laplacian_cvx(), target)) ++fixed;
    }
    CHECK(fixed <= 2); // mid-iteration points are generically not fixed
}

TEST_CASE("estimate_linear_rate") {
    SUBCASE("geometric sequence") {
        APRun run;
        for (int k = 0; k < 40; ++k) run.step_delta.push_back(std::pow(0.5, k));
        run.iterations = 40;
        const RateEstimate r = estimate_linear_rate(run);
        CHECK(r.linear);
        CHECK(r.rate == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("constant deltas are not linear") {
        APRun run;
        run.step_delta.assign(40, 0.25);
        const RateEstimate r = estimate_linear_rate(run);
        CHECK_FALSE(r.linear);
    }
    SUBCASE("insufficient data") {
        APRun run;
        run.step_delta = {1.0, 0.5, 0.25};
        CHECK_THROWS_AS(estimate_linear_rate(run), validation_error);
    }
}

TEST_CASE("spectral target validation") {
    CHECK_THROWS_AS(SpectralTarget::exact((Vector(2) << 0, 1).finished()), validation_error);
    CHECK_THROWS_AS(SpectralTarget::with_uncertainty((Vector(2) << 1, 0).finished(), -0.1),
                    validation_error);
    CHECK_THROWS_AS(SpectralTarget::partial_spectrum((Vector(2) << 3, 1).finished(), 4, 0.0, 1.0),
                    validation_error);
    CHECK_NOTHROW(SpectralTarget::partial_spectrum((Vector(2) << 3, 1).finished(), 4, 0.0, 3.0));
    CHECK_THROWS_AS(
        SpectralTarget::boxed((Vector(2) << 1, 0).finished(),
                              (Vector(2) << 1, 0).finished(), (Vector(2) << 0, 1).finished()),
        validation_error);
}

TEST_CASE("solve_similarity_transform recovers the transform") {
    Rng rng = make_rng(71);
    const int n = 7, l = 4;
    const Matrix a = random_symmetric(n, rng);
    const Matrix t_true = random_orthogonal(n, rng) + 0.15 * standard_normal(n, n, rng);
    const Matrix a_t = t_true * a * t_true.inverse();
    Matrix c = Matrix::Zero(l, n);
    for (int i = 0; i < l; ++i) c(i, i) = 1.0;
    const Matrix c_t = c * t_true.inverse();
    const Matrix got = solve_similarity_transform(a_t, a, c_t, c);
    CHECK((got - t_true).norm() <= 1e-7 * t_true.norm());
    CHECK_THROWS_AS(solve_similarity_transform(a_t, Matrix::Zero(3, 3), c_t, c),
                    validation_error);
}
