#include "netid/subspace.hpp"

#include <cmath>
#include <sstream>

namespace netid {

namespace {

Matrix stack_hankel(const Matrix& series, int alpha, Eigen::Index T) {
    const Eigen::Index rows = series.rows();
    Matrix h(rows * alpha, T);
    for (int b = 0; b < alpha; ++b)
        h.middleRows(static_cast<Eigen::Index>(b) * rows, rows) = series.middleCols(b, T);
    return h;
}

struct InputProjector {
    Matrix q_thin; ///< T x r, orthonormal columns spanning row(U)^T
    Eigen::Index rank = 0;
    double singular_ratio = 0.0;
};

InputProjector make_input_projector(const Matrix& u) {
    const Eigen::Index r = u.rows();
    const Eigen::Index t = u.cols();
    if (t < r)
        throw numerical_error("inputs not sufficiently exciting: Hankel has fewer columns (" +
                              std::to_string(t) + ") than input rows (" + std::to_string(r) + ")");

    Eigen::HouseholderQR<Matrix> qr(u.transpose());
    Matrix rfac = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Matrix> svd(rfac); // singular values only
    const Vector& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);

    InputProjector proj;
    proj.singular_ratio = smax > 0.0 ? smin / smax : 0.0;
    proj.rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * smax) ++proj.rank;
    if (proj.rank < r) {
        std::ostringstream os;
        os << "inputs not sufficiently exciting: input Hankel has numerical row rank "
           << proj.rank << " < " << r;
        throw numerical_error(os.str());
    }
    proj.q_thin = qr.householderQ() * Matrix::Identity(t, r);
    return proj;
}

Matrix apply_perp(const Matrix& y, const InputProjector& proj) {
    return y - (y * proj.q_thin) * proj.q_thin.transpose();
}

double pinv_threshold(const Vector& sv) { return 1e-10 * sv(0); }

} // namespace

Matrix observability_matrix(const Matrix& a, const Matrix& c, int depth) {
    const Eigen::Index l = c.rows();
    Matrix o(l * depth, a.cols());
    Matrix block = c;
    for (int k = 0; k < depth; ++k) {
        o.middleRows(static_cast<Eigen::Index>(k) * l, l) = block;
        if (k + 1 < depth) block = block * a;
    }
    return o;
}

HankelBlocks build_hankel(const Trajectory& traj, int alpha) {
    const int n = traj.input_dim();
    const Eigen::Index q = traj.length();
    if (alpha <= n) {
        std::ostringstream os;
        os << "build_hankel: block depth alpha = " << alpha
           << " must exceed the state dimension N = " << n
           << " (observability depth requirement)";
        throw validation_error(os.str());
    }
    if (q < alpha + n) {
        std::ostringstream os;
        os << "build_hankel: trajectory too short, Q = " << q << " but need Q >= alpha + N = "
           << alpha + n;
        throw validation_error(os.str());
    }
    if (traj.outputs.cols() != q)
        throw validation_error("build_hankel: inputs and outputs must have equal length");

    HankelBlocks h;
    h.alpha = alpha;
    h.N = n;
    h.L = traj.output_dim();
    h.T = q - alpha + 1;
    h.Y = stack_hankel(traj.outputs, alpha, h.T);
    h.U = stack_hankel(traj.inputs, alpha, h.T);
    return h;
}

ProjectedOutputs project_out_inputs(const HankelBlocks& h) {
    InputProjector proj = make_input_projector(h.U);
    ProjectedOutputs out;
    out.Y_perp = apply_perp(h.Y, proj);
    out.u_rank = proj.rank;
    out.u_singular_ratio = proj.singular_ratio;
    return out;
}

SpanEstimate estimate_observability_span(const Matrix& y_perp, int n_states) {
    const Eigen::Index mindim = std::min(y_perp.rows(), y_perp.cols());
    if (n_states > mindim)
        throw validation_error("estimate_observability_span: n_states exceeds min(alpha L, T)");

    Eigen::BDCSVD<Matrix> svd(y_perp, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();

    if (n_states <= 0) {
        // Experimental automatic order: largest consecutive singular value gap.
        double best = 0.0;
        int arg = 1;
        for (Eigen::Index i = 0; i + 1 < sv.size(); ++i) {
            if (sv(i + 1) <= 0.0) { arg = int(i) + 1; break; }
            double gap = sv(i) / sv(i + 1);
            if (gap > best) { best = gap; arg = int(i) + 1; }
        }
        n_states = arg;
    }

    if (sv(n_states - 1) < 1e-10 * sv(0)) {
        std::ostringstream os;
        os << "insufficient excitation or wrong state dimension: sigma_" << n_states << " = "
           << sv(n_states - 1) << " below 1e-10 * sigma_1 = " << 1e-10 * sv(0);
        throw numerical_error(os.str());
    }

    SpanEstimate est;
    est.W = svd.matrixU().leftCols(n_states);
    est.singular_values = sv.head(n_states);
    est.rank_gap = (n_states < sv.size() && sv(n_states) > 0.0)
                       ? sv(n_states - 1) / sv(n_states)
                       : std::numeric_limits<double>::infinity();
    return est;
}

TEstimate estimate_T(const Matrix& W, const Matrix& C) {
    const Eigen::Index l = C.rows();
    const Eigen::Index n = W.cols();
    if (C.cols() != n)
        throw validation_error("estimate_T: C must have n_states columns");
    if (W.rows() < l)
        throw validation_error("estimate_T: W has fewer rows than C");

    const Matrix jw = W.topRows(l);
    Eigen::JacobiSVD<Matrix> svd_jw(jw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd_jw.setThreshold(1e-10);
    Eigen::JacobiSVD<Matrix> svd_c(C);
    const Eigen::Index rank_c =
        (svd_c.singularValues().array() > pinv_threshold(svd_c.singularValues())).count();

    TEstimate est;
    est.T = svd_jw.solve(C);
    est.non_unique = rank_c < n;

    const Eigen::Index rank_jw =
        (svd_jw.singularValues().array() > pinv_threshold(svd_jw.singularValues())).count();
    if (rank_jw < n) {
        // Complete the least-squares representative with the kernel projector
        // of J W; the result is invertible and still realizes C exactly.
        est.T += Matrix::Identity(n, n) - svd_jw.solve(jw);
    }
    return est;
}

Matrix estimate_A(const Matrix& W, const Matrix& T_hat, int L) {
    const Eigen::Index n = W.cols();
    const Eigen::Index rows = W.rows();
    if (rows < 2 * L)
        throw validation_error("estimate_A: W must hold at least two L-blocks");

    const Matrix upper = W.topRows(rows - L) * T_hat;
    const Matrix lower = W.bottomRows(rows - L) * T_hat;

    Eigen::JacobiSVD<Matrix> svd(upper, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(sv.size() - 1) < 1e-10 * sv(0))
        throw numerical_error(
            "estimate_A: rank loss in the shift-invariance system; increase alpha or the "
            "trajectory length");
    return svd.solve(lower);
}

BEstimate estimate_B_x0(const Trajectory& traj, const Matrix& A_hat, const Matrix& C,
                        const Matrix& D) {
    const Eigen::Index n = A_hat.rows();
    const Eigen::Index l = C.rows();
    const Eigen::Index q = traj.length();
    const Eigen::Index p = n + n * n;
    if (traj.input_dim() != n)
        throw validation_error("estimate_B_x0: trajectory input dimension mismatch");
    if (l * q < p) {
        std::ostringstream os;
        os << "estimate_B_x0: underdetermined fit, have " << l * q << " equations but " << p
           << " unknowns; need Q >= " << (p + l - 1) / l << " samples";
        throw validation_error(os.str());
    }

    // Regressor row block at time k is [C A^k | C M(k)] with
    // M(k+1) = A M(k) + u(k)^T kron I. Rows are folded chunkwise into a
    // running QR factor of the stacked system [Psi | rhs].
    const Eigen::Index chunk_samples = std::max<Eigen::Index>(1, 8192 / std::max<Eigen::Index>(l, 1));
    Matrix rz; // accumulated (p+1) x (p+1) upper factor, empty until first fold
    Matrix buffer(chunk_samples * l, p + 1);
    Eigen::Index buffered = 0;

    auto fold = [&]() {
        if (buffered == 0) return;
        const Eigen::Index prev = rz.size() ? rz.rows() : 0;
        Matrix stacked(prev + buffered, p + 1);
        if (prev) stacked.topRows(prev) = rz;
        stacked.bottomRows(buffered) = buffer.topRows(buffered);
        Eigen::HouseholderQR<Matrix> qr(stacked);
        const Eigen::Index keep = std::min<Eigen::Index>(stacked.rows(), p + 1);
        rz = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
        buffered = 0;
    };

    Matrix x_reg = C;                      // C A^k
    Matrix m_reg = Matrix::Zero(n, n * n); // M(k)
    for (Eigen::Index k = 0; k < q; ++k) {
        buffer.block(buffered, 0, l, n) = x_reg;
        buffer.block(buffered, n, l, n * n) = C * m_reg;
        buffer.block(buffered, p, l, 1) = traj.outputs.col(k) - D * traj.inputs.col(k);
        buffered += l;
        if (buffered + l > buffer.rows()) fold();

        if (k + 1 < q) {
            x_reg = x_reg * A_hat;
            m_reg = A_hat * m_reg;
            for (Eigen::Index j = 0; j < n; ++j)
                m_reg.middleCols(j * n, n).diagonal().array() += traj.inputs(j, k);
        }
    }
    fold();

    const Matrix r = rz.topLeftCorner(p, p);
    const Vector z = rz.block(0, p, p, 1);
    const Vector rdiag = r.diagonal().cwiseAbs();
    if (rdiag.minCoeff() < 1e-10 * std::max(1.0, rdiag.maxCoeff()))
        throw numerical_error("estimate_B_x0: regressor is rank deficient; inputs are not "
                              "sufficiently exciting for a joint (x0, B) fit");

    const Vector theta = r.triangularView<Eigen::Upper>().solve(z);

    BEstimate est;
    est.x0 = theta.head(n);
    est.B = Eigen::Map<const Matrix>(theta.data() + n, n, n);
    const double rho = (rz.rows() > p) ? std::abs(rz(p, p)) : 0.0;
    est.residual = rho * rho / static_cast<double>(q);
    return est;
}

namespace {

SubspaceEstimate finish_estimate(const SpanEstimate& span, const Trajectory& traj,
                                 const Matrix& C, const Matrix& D, int L,
                                 const IdOptions& opts, double u_ratio) {
    SubspaceEstimate est;
    est.W = span.W;
    est.singular_values = span.singular_values;
    est.diagnostics.all_singular_values = span.singular_values;
    est.diagnostics.rank_gap = span.rank_gap;
    est.diagnostics.u_singular_ratio = u_ratio;

    TEstimate t = estimate_T(span.W, C);
    est.T_hat = t.T;
    est.diagnostics.t_non_unique = t.non_unique;

    est.A_hat = estimate_A(span.W, est.T_hat, L);

    const Eigen::Index rows = span.W.rows();
    est.diagnostics.shift_residual =
        (span.W.topRows(rows - L) * est.T_hat * est.A_hat - span.W.bottomRows(rows - L) * est.T_hat)
            .norm();

    if (opts.estimate_b) {
        BEstimate b = estimate_B_x0(traj, est.A_hat, C, D);
        est.B_hat = b.B;
        est.x0_hat = b.x0;
        est.diagnostics.b_residual = b.residual;
    }
    return est;
}

} // namespace

SubspaceEstimate subspace_id(const Trajectory& traj, int alpha, int n_states, const Matrix& C,
                             const Matrix& D, const IdOptions& opts) {
    HankelBlocks h = build_hankel(traj, alpha);
    if (C.rows() != h.L)
        throw validation_error("subspace_id: C row count must match the output dimension");
    ProjectedOutputs proj = project_out_inputs(h);
    SpanEstimate span = estimate_observability_span(proj.Y_perp, n_states);
    SubspaceEstimate est = finish_estimate(span, traj, C, D, h.L, opts, proj.u_singular_ratio);
    est.diagnostics.auto_order = n_states <= 0;
    return est;
}

SubspaceEstimate iv_subspace(const Trajectory& traj, int alpha, int beta, int n_states,
                             const Matrix& C, const Matrix& D, const IdOptions& opts) {
    if (beta < 1) throw validation_error("iv_subspace: need beta >= 1");
    const int gamma = alpha - beta;
    const int n = traj.input_dim();
    if (gamma <= n) {
        std::ostringstream os;
        os << "iv_subspace: future depth gamma = alpha - beta = " << gamma
           << " must exceed the state dimension N = " << n;
        throw validation_error(os.str());
    }

    HankelBlocks h = build_hankel(traj, alpha);
    if (C.rows() != h.L)
        throw validation_error("iv_subspace: C row count must match the output dimension");

    const Eigen::Index l = h.L;
    const Matrix y1 = h.Y.topRows(static_cast<Eigen::Index>(beta) * l);
    const Matrix y2 = h.Y.bottomRows(static_cast<Eigen::Index>(gamma) * l);
    const Matrix u1 = h.U.topRows(static_cast<Eigen::Index>(beta) * n);
    const Matrix u2 = h.U.bottomRows(static_cast<Eigen::Index>(gamma) * n);

    InputProjector proj = make_input_projector(u2);
    const Matrix y2p = apply_perp(y2, proj);

    // G1 = (1/T) Y2 Pi [U1^T, Y1^T]; any positive scaling leaves the left
    // singular basis unchanged.
    Matrix g1(y2p.rows(), u1.rows() + y1.rows());
    g1.leftCols(u1.rows()).noalias() = y2p * u1.transpose();
    g1.rightCols(y1.rows()).noalias() = y2p * y1.transpose();
    g1 /= static_cast<double>(h.T);

    SpanEstimate span = estimate_observability_span(g1, n_states);
    SubspaceEstimate est =
        finish_estimate(span, traj, C, D, h.L, opts, proj.singular_ratio);
    est.diagnostics.auto_order = n_states <= 0;
    return est;
}

double largest_principal_angle(const Matrix& q1, const Matrix& q2) {
    Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
    const Vector& sv = svd.singularValues();
    double c = std::clamp(sv(sv.size() - 1), -1.0, 1.0);
    return std::acos(c);
}

} // namespace netid
