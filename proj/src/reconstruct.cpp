#include "netid/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "netid/assignment.hpp"
#include "netid/recovery.hpp"
#include "netid/rng.hpp"

namespace netid {

namespace {

bool non_increasing(const Vector& v) {
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
        if (v[i] < v[i + 1] - 1e-12 * std::max(1.0, std::abs(v[i]))) return false;
    return true;
}

Matrix reassemble(const Spectrum& es, const Vector& values) {
    Matrix p = es.basis * values.asDiagonal() * es.basis.transpose();
    return (p + p.transpose()) / 2.0;
}

/// Consecutive clusters of (nearly) equal eigenvalues.
std::vector<std::pair<Eigen::Index, Eigen::Index>> eigen_clusters(const Vector& v, double tol) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= v.size(); ++i) {
        if (i == v.size() || std::abs(v[i] - v[i - 1]) > tol) {
            blocks.emplace_back(start, i - start);
            start = i;
        }
    }
    return blocks;
}

double cluster_tol(const Vector& v) {
    double scale = v.size() ? std::max(1.0, v.cwiseAbs().maxCoeff()) : 1.0;
    return 1e-9 * scale;
}

} // namespace

void SpectralTarget::validate() const {
    if (n <= 0) throw validation_error("SpectralTarget: n must be positive");
    if (lambda.size() > n)
        throw validation_error("SpectralTarget: more prescribed eigenvalues than dimensions");
    if (!non_increasing(lambda))
        throw validation_error("SpectralTarget: eigenvalues must be sorted non-increasing");
    if (epsilon < 0.0) throw validation_error("SpectralTarget: epsilon must be nonnegative");
    if (is_partial()) {
        if (!(rho >= 0.0)) throw validation_error("SpectralTarget: rho must be nonnegative");
        if (lambda.size() > 0 && rho < lambda.cwiseAbs().maxCoeff() - 1e-12)
            throw validation_error(
                "SpectralTarget: rho must dominate the known eigenvalue magnitudes");
        if (lower || upper)
            throw validation_error("SpectralTarget: per-entry bounds need a full spectrum");
    }
    if (lower.has_value() != upper.has_value())
        throw validation_error("SpectralTarget: bounds must come as a pair");
    if (lower) {
        if (lower->size() != n || upper->size() != n)
            throw validation_error("SpectralTarget: bounds must have length n");
        for (Eigen::Index i = 0; i < n; ++i)
            if ((*lower)[i] > (*upper)[i])
                throw validation_error("SpectralTarget: inverted bound interval");
    }
}

SpectralTarget SpectralTarget::exact(Vector lambda_o) {
    SpectralTarget t;
    t.n = static_cast<int>(lambda_o.size());
    t.lambda = std::move(lambda_o);
    t.validate();
    return t;
}

SpectralTarget SpectralTarget::with_uncertainty(Vector lambda_o, double eps) {
    SpectralTarget t = exact(std::move(lambda_o));
    t.epsilon = eps;
    t.validate();
    return t;
}

SpectralTarget SpectralTarget::partial_spectrum(Vector lambda_m, int n, double eps, double rho) {
    SpectralTarget t;
    t.lambda = std::move(lambda_m);
    t.n = n;
    t.epsilon = eps;
    t.rho = rho;
    t.validate();
    return t;
}

SpectralTarget SpectralTarget::boxed(Vector lambda_o, Vector a, Vector b) {
    SpectralTarget t = exact(std::move(lambda_o));
    t.lower = std::move(a);
    t.upper = std::move(b);
    t.validate();
    return t;
}

// ---------------------------------------------------------------------------
// Spectral projections
// ---------------------------------------------------------------------------

Matrix project_M(const Matrix& s, const Vector& lambda_o) {
    require_symmetric(s, "project_M");
    if (lambda_o.size() != s.rows())
        throw validation_error("project_M: spectrum length must match the matrix dimension");
    if (!non_increasing(lambda_o))
        throw validation_error("project_M: target spectrum must be non-increasing");
    Spectrum es = eig_sym(s);
    return reassemble(es, lambda_o);
}

Matrix project_M_eps(const Matrix& s, const Vector& lambda_o, double epsilon) {
    require_symmetric(s, "project_M_eps");
    if (epsilon < 0.0) throw validation_error("project_M_eps: epsilon must be nonnegative");
    if (lambda_o.size() != s.rows())
        throw validation_error("project_M_eps: spectrum length must match the matrix dimension");
    Spectrum es = eig_sym(s);
    Vector vals(es.values.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double gap = es.values[i] - lambda_o[i];
        vals[i] = lambda_o[i] + std::clamp(gap, -epsilon, epsilon);
    }
    return reassemble(es, vals);
}

Matrix project_M_ab(const Matrix& s, const Vector& lambda_o, const Vector& a, const Vector& b) {
    require_symmetric(s, "project_M_ab");
    if (a.size() != lambda_o.size() || b.size() != lambda_o.size())
        throw validation_error("project_M_ab: bounds must match the spectrum length");
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) throw validation_error("project_M_ab: inverted bound interval");
    Spectrum es = eig_sym(s);
    Vector vals(es.values.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double gap = es.values[i] - lambda_o[i];
        vals[i] = lambda_o[i] + std::clamp(gap, a[i], b[i]);
    }
    return reassemble(es, vals);
}

std::vector<int> match_partial_spectrum(const Vector& values_desc, const Vector& lambda_m) {
    const int m = static_cast<int>(lambda_m.size());
    const int n = static_cast<int>(values_desc.size());
    if (m > n) throw validation_error("match_partial_spectrum: more targets than eigenvalues");
    if (m == 0) return {};

    Matrix cost(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const double d = values_desc[j] - lambda_m[i];
            cost(i, j) = d * d;
        }

    Assignment asg = solve_assignment({cost});
    // Sorted inputs admit an order-preserving optimum; fall back to the
    // ordered-subsequence dynamic program if the assignment crossed.
    if (!std::is_sorted(asg.column_of_row.begin(), asg.column_of_row.end()))
        asg = solve_ordered_selection(cost);
    return asg.column_of_row;
}

Matrix project_M_eps_m(const Matrix& s, const Vector& lambda_m, double epsilon, double rho,
                       bool* clipped) {
    require_symmetric(s, "project_M_eps_m");
    if (lambda_m.size() > s.rows())
        throw validation_error("project_M_eps_m: more prescribed eigenvalues than dimensions");
    if (!non_increasing(lambda_m))
        throw validation_error("project_M_eps_m: target spectrum must be non-increasing");
    if (epsilon < 0.0 || !(rho >= 0.0))
        throw validation_error("project_M_eps_m: epsilon and rho must be nonnegative");

    Spectrum es = eig_sym(s);
    Vector vals = es.values;
    bool any_clip = false;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double c = std::clamp(vals[i], -rho, rho);
        if (c != vals[i]) any_clip = true;
        vals[i] = c;
    }
    if (clipped) *clipped = any_clip;

    const std::vector<int> sigma = match_partial_spectrum(vals, lambda_m);
    Vector out = vals;
    for (int i = 0; i < static_cast<int>(sigma.size()); ++i) {
        const double gap = vals[sigma[i]] - lambda_m[i];
        out[sigma[i]] = lambda_m[i] + std::clamp(gap, -epsilon, epsilon);
    }
    return reassemble(es, out);
}

namespace {

Vector padded_target_values(const SpectralTarget& target) {
    Vector vals(target.n);
    for (int i = 0; i < target.m(); ++i) vals[i] = target.lambda[i];
    const double pad = std::isfinite(target.rho) ? std::clamp(0.0, -target.rho, target.rho) : 0.0;
    for (int i = target.m(); i < target.n; ++i) vals[i] = pad;
    if (target.lower)
        for (int i = 0; i < target.n; ++i)
            vals[i] += std::clamp(0.0, (*target.lower)[i], (*target.upper)[i]);
    return vals;
}

/// Spectral projection with an optional escape rotation of the eigenbasis
/// inside repeated-eigenvalue blocks.
Matrix spectral_project_impl(const Matrix& s, const SpectralTarget& target, Rng* escape_rng) {
    require_symmetric(s, "project_spectral");
    if (s.rows() != target.n)
        throw validation_error("project_spectral: matrix dimension does not match the target");

    Spectrum es = eig_sym(s);
    if (escape_rng) {
        const auto blocks = eigen_clusters(es.values, cluster_tol(es.values));
        for (const auto& [start, len] : blocks) {
            if (len < 2) continue;
            Matrix rot = random_orthogonal(len, *escape_rng);
            es.basis.middleCols(start, len) = es.basis.middleCols(start, len) * rot;
        }
    }

    Vector vals(es.values.size());
    if (target.lower) {
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
            const double gap = es.values[i] - target.lambda[i];
            vals[i] = target.lambda[i] + std::clamp(gap, (*target.lower)[i], (*target.upper)[i]);
        }
    } else if (target.is_partial()) {
        vals = es.values;
        for (Eigen::Index i = 0; i < vals.size(); ++i)
            vals[i] = std::clamp(vals[i], -target.rho, target.rho);
        const std::vector<int> sigma = match_partial_spectrum(vals, target.lambda);
        for (int i = 0; i < static_cast<int>(sigma.size()); ++i) {
            const double gap = vals[sigma[i]] - target.lambda[i];
            vals[sigma[i]] = target.lambda[i] + std::clamp(gap, -target.epsilon, target.epsilon);
        }
    } else {
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
            const double gap = es.values[i] - target.lambda[i];
            vals[i] = target.lambda[i] + std::clamp(gap, -target.epsilon, target.epsilon);
        }
    }
    return reassemble(es, vals);
}

} // namespace

Matrix project_spectral(const Matrix& s, const SpectralTarget& target) {
    target.validate();
    return spectral_project_impl(s, target, nullptr);
}

// ---------------------------------------------------------------------------
// Consistency constraint
// ---------------------------------------------------------------------------

namespace {

/// Rank-truncated pseudoinverse with a relative singular value cutoff; keeps
/// phantom constraint directions from amplifying roundoff. JacobiSVD on
/// purpose: the heavily repeated singular values of constraint-row matrices
/// trip the BDCSVD deflation in Eigen 3.4.
Matrix truncated_pinv(const Matrix& a, double rel_tol, Eigen::Index* rank_out = nullptr) {
    if (a.size() == 0) {
        if (rank_out) *rank_out = 0;
        return Matrix(a.cols(), a.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cut = sv.size() ? rel_tol * sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    if (rank_out) *rank_out = rank;
    if (rank == 0) return Matrix::Zero(a.cols(), a.rows());
    return svd.matrixV().leftCols(rank) *
           sv.head(rank).cwiseInverse().asDiagonal() *
           svd.matrixU().leftCols(rank).transpose();
}

/// Orthonormal kernel basis with the same relative cutoff.
Matrix kernel_basis(const Matrix& a, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cut = sv.size() ? rel_tol * sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

Matrix kron_identity_left(const Matrix& m, Eigen::Index copies) {
    // I_copies kron m, block diagonal.
    Matrix out = Matrix::Zero(m.rows() * copies, m.cols() * copies);
    for (Eigen::Index b = 0; b < copies; ++b)
        out.block(b * m.rows(), b * m.cols(), m.rows(), m.cols()) = m;
    return out;
}

constexpr double kConsistencyRankTol = 1e-8;

} // namespace

ConsistencyData::ConsistencyData(Matrix C_in, Matrix C_T_in, Matrix S_T_in,
                                 std::optional<Matrix> B_T_in, bool input_symmetry,
                                 std::optional<Vector> input_ones_action_in, double rank_tol)
    : C(std::move(C_in)), C_T(std::move(C_T_in)), S_T(std::move(S_T_in)), B_T(std::move(B_T_in)),
      use_input_symmetry(input_symmetry), input_ones_action(std::move(input_ones_action_in)) {
    const Eigen::Index l = C.rows();
    const Eigen::Index n = C.cols();
    l_ = l;
    n_ = n;
    if (C_T.rows() != l || C_T.cols() != n || S_T.rows() != n || S_T.cols() != n)
        throw validation_error("ConsistencyData: dimension mismatch between C, C_T, and S_T");
    if (B_T && (B_T->rows() != n || B_T->cols() != n))
        throw validation_error("ConsistencyData: B_T must be N x N");
    if (input_ones_action && (!B_T || input_ones_action->size() != n))
        throw validation_error("ConsistencyData: input_ones_action needs B_T and length N");

    // The pair constraint, vectorized column-major with t = vec(T), s = vec(S):
    //   (I kron C_T) t = vec(C)                         (output map)
    //   (I kron C_T S_T) t = (I kron C) s               (coupling)
    //   [(I kron B_T) K - (B_T kron I)] t = 0           (input symmetry, optional)
    //   T w = B_T 1                                      (known row action, optional)
    // K is the commutation matrix, K vec(T) = vec(T^T). Eliminating
    // t = t0 + N_T z from the T-only rows leaves the affine shadow
    // (I - P_G)((I kron C) s - (I kron C_T S_T) t0) = 0 with P_G projecting
    // onto col((I kron C_T S_T) N_T).
    const bool with_sym = use_input_symmetry && B_T.has_value();
    const bool with_ones = input_ones_action.has_value();
    const Eigen::Index nn = n * n;
    const Eigen::Index t_rows = l * n + (with_sym ? nn : 0) + (with_ones ? n : 0);

    t_rows_ = Matrix::Zero(t_rows, nn);
    t_rhs_ = Vector::Zero(t_rows);
    t_rows_.topRows(l * n) = kron_identity_left(C_T, n);
    for (Eigen::Index j = 0; j < n; ++j) t_rhs_.segment(j * l, l) = C.col(j);
    Eigen::Index at = l * n;
    if (with_sym) {
        const Matrix& bt = *B_T;
        Matrix sym_rows = Matrix::Zero(nn, nn);
        // vec(B_T T^T): (I kron B_T) K; vec(T B_T^T): (B_T kron I).
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Index row0 = j * n; // column j of the result
                // (I kron B_T) K vec(T): entry (i,j) of B_T T^T is sum_k B_T(i,k) T(j,k)
                for (Eigen::Index k = 0; k < n; ++k)
                    sym_rows(row0 + i, k * n + j) += bt(i, k);
                // minus entry (i,j) of T B_T^T = sum_k T(i,k) B_T(j,k)
                for (Eigen::Index k = 0; k < n; ++k)
                    sym_rows(row0 + i, k * n + i) -= bt(j, k);
            }
        t_rows_.middleRows(at, nn) = sym_rows;
        at += nn;
    }
    if (with_ones) {
        const Vector w = *input_ones_action;
        const Vector bt1 = (*B_T) * Vector::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) t_rows_(at + i, i + k * n) = w[k];
            t_rhs_[at + i] = bt1[i];
        }
        at += n;
    }

    const Matrix t_rows_pinv = truncated_pinv(t_rows_, rank_tol);
    t_particular_ = t_rows_pinv * t_rhs_;
    ct_solve_residual = (t_rows_ * t_particular_ - t_rhs_).norm();
    t_kernel_ = kernel_basis(t_rows_, rank_tol);

    couple_t_ = kron_identity_left(C_T * S_T, n);
    const Matrix coupling_kernel = couple_t_ * t_kernel_; // (l n) x k
    Matrix p_g = Matrix::Zero(l * n, l * n);
    if (coupling_kernel.cols() > 0) {
        Eigen::JacobiSVD<Matrix> gsvd(coupling_kernel, Eigen::ComputeThinU);
        const Vector& gs = gsvd.singularValues();
        Eigen::Index grank = 0;
        for (Eigen::Index i = 0; i < gs.size(); ++i)
            if (gs(i) > rank_tol * gs(0)) ++grank;
        if (grank > 0) {
            const Matrix gu = gsvd.matrixU().leftCols(grank);
            p_g = gu * gu.transpose();
        }
    }

    const Matrix a_c = kron_identity_left(C, n);
    const Vector h = couple_t_ * t_particular_;
    shadow_op_ = a_c - p_g * a_c;
    shadow_rhs_ = h - p_g * h;
    shadow_pinv_ = truncated_pinv(shadow_op_, rank_tol);
}

ConsistencyData ConsistencyData::from_transition(const Matrix& C, const Matrix& C_T,
                                                 const Matrix& A_T, double tau,
                                                 const ScalarMap& fx_map,
                                                 std::optional<Matrix> B_T) {
    const Matrix fx_t = principal_log(A_T) / tau;
    return ConsistencyData(C, C_T, fx_map.apply_inverse(fx_t), std::move(B_T));
}

Matrix ConsistencyData::project(const Matrix& s) const {
    if (s.rows() != n_ || s.cols() != n_)
        throw validation_error("ConsistencyData::project: wrong matrix dimensions");
    const Eigen::Map<const Vector> sv(s.data(), s.size());
    const Vector corrected = sv - shadow_pinv_ * (shadow_op_ * sv - shadow_rhs_);
    return Eigen::Map<const Matrix>(corrected.data(), n_, n_);
}

Matrix ConsistencyData::solve_transform(const Matrix& s, const Matrix* a_t,
                                        const Matrix* a_rec) const {
    if (s.rows() != n_ || s.cols() != n_)
        throw validation_error("ConsistencyData::solve_transform: wrong matrix dimensions");
    if ((a_t == nullptr) != (a_rec == nullptr))
        throw validation_error("ConsistencyData::solve_transform: need both A_T and A_rec");
    const Eigen::Index nn = n_ * n_;
    const Eigen::Index sim_rows = a_t ? nn : 0;
    Matrix stacked(t_rows_.rows() + couple_t_.rows() + sim_rows, nn);
    stacked.topRows(t_rows_.rows()) = t_rows_;
    stacked.middleRows(t_rows_.rows(), couple_t_.rows()) = couple_t_;
    Vector rhs = Vector::Zero(stacked.rows());
    rhs.head(t_rhs_.size()) = t_rhs_;
    const Matrix cs = C * s;
    for (Eigen::Index j = 0; j < n_; ++j)
        rhs.segment(t_rhs_.size() + j * l_, l_) = cs.col(j);
    if (a_t) {
        Matrix sim = Matrix::Zero(nn, nn);
        for (Eigen::Index j = 0; j < n_; ++j)
            for (Eigen::Index i = 0; i < n_; ++i) {
                const Eigen::Index r = i + j * n_;
                for (Eigen::Index k = 0; k < n_; ++k) {
                    sim(r, k + j * n_) += (*a_t)(i, k);
                    sim(r, i + k * n_) -= (*a_rec)(k, j);
                }
            }
        stacked.bottomRows(nn) = sim;
    }
    const Vector t = truncated_pinv(stacked, kConsistencyRankTol) * rhs;
    return Eigen::Map<const Matrix>(t.data(), n_, n_);
}

ConsistencyReport check_consistency(const Matrix& s_candidate, const ConsistencyData& cons) {
    const Eigen::Index l = cons.C.rows();
    const Eigen::Index n = cons.C.cols();
    if (s_candidate.rows() != n || s_candidate.cols() != n)
        throw validation_error("check_consistency: candidate has wrong dimensions");

    Matrix lhs(2 * l, n);
    lhs.topRows(l) = cons.C_T;
    lhs.bottomRows(l) = cons.C_T * cons.S_T;
    Matrix rhs(2 * l, n);
    rhs.topRows(l) = cons.C;
    rhs.bottomRows(l) = cons.C * s_candidate;

    Eigen::JacobiSVD<Matrix> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-12 * std::max(1.0, sv(0))) ++rank;

    ConsistencyReport rep;
    rep.T = svd.solve(rhs);
    rep.underdetermined = rank < n;
    rep.residual = (lhs * rep.T - rhs).norm();
    const double rn = rhs.norm();
    rep.relative_residual = rn > 0.0 ? rep.residual / rn : rep.residual;
    if (cons.B_T) {
        const Matrix& bt = *cons.B_T;
        rep.input_symmetry_residual = (bt * rep.T.transpose() - rep.T * bt.transpose()).norm();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Structural projections
// ---------------------------------------------------------------------------

StructuralSet StructuralSet::custom(std::function<Matrix(const Matrix&)> proj) {
    StructuralSet s;
    s.kind = Kind::Custom;
    s.custom_projection = std::move(proj);
    return s;
}

StructuralSet StructuralSet::parse(const std::string& name) {
    if (name == "laplacian_cvx") return laplacian_cvx();
    if (name == "nonnegative") return nonnegative();
    if (name == "adjacency_sym") return adjacency_sym();
    throw validation_error("unknown structural set: " + name);
}

std::string StructuralSet::name() const {
    switch (kind) {
    case Kind::LaplacianCvx: return "laplacian_cvx";
    case Kind::Nonnegative: return "nonnegative";
    case Kind::AdjacencySym: return "adjacency_sym";
    case Kind::Custom: return "custom";
    }
    return "custom";
}

namespace {

Matrix clamp_nonnegative(const Matrix& s) {
    Matrix p = (s + s.transpose()) / 2.0;
    return p.cwiseMax(0.0);
}

Matrix clamp_adjacency(const Matrix& s) {
    Matrix p = clamp_nonnegative(s);
    p.diagonal().setZero();
    return p;
}

Matrix project_symmetric(const Matrix& s) { return (s + s.transpose()) / 2.0; }

Matrix project_zero_row_sums(const Matrix& s) {
    const double n = static_cast<double>(s.cols());
    return s - (s.rowwise().sum() / n) * Eigen::RowVectorXd::Ones(s.cols());
}

Matrix clamp_offdiagonal(const Matrix& s) {
    Matrix p = s;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            if (i != j && p(i, j) > 0.0) p(i, j) = 0.0;
    return p;
}

Matrix dykstra(const Matrix& s, const std::vector<std::function<Matrix(const Matrix&)>>& sets,
               int max_sweeps, double tol) {
    Matrix x = s;
    std::vector<Matrix> increments(sets.size(), Matrix::Zero(s.rows(), s.cols()));
    double change = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const Matrix x_prev = x;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const Matrix z = x + increments[i];
            x = sets[i](z);
            increments[i] = z - x;
        }
        change = (x - x_prev).norm();
        if (change <= tol) return x;
    }
    std::ostringstream os;
    os << "project_S: Dykstra iteration did not converge within " << max_sweeps
       << " sweeps; last change = " << change;
    throw numerical_error(os.str());
}

} // namespace

namespace {

/// Projector onto the combined affine part (symmetry, any affine structural
/// rows, and the consistency shadow), assembled in vec form. Collapsing the
/// affine sets into one keeps Dykstra down to two sets, which converges far
/// faster than alternating through nearly parallel subspaces.
std::function<Matrix(const Matrix&)> combined_affine_projector(const StructuralSet& set,
                                                               Eigen::Index n) {
    auto vec_idx = [n](Eigen::Index i, Eigen::Index j) { return i + j * n; };

    Eigen::Index plain_rows = n * (n - 1) / 2;
    if (set.kind == StructuralSet::Kind::LaplacianCvx) plain_rows += n;
    if (set.kind == StructuralSet::Kind::AdjacencySym) plain_rows += n;
    const Eigen::Index cons_rows = set.consistency ? set.consistency->shadow_op().rows() : 0;

    Matrix m = Matrix::Zero(plain_rows + cons_rows, n * n);
    Vector b = Vector::Zero(m.rows());
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            m(row, vec_idx(i, j)) = 1.0;
            m(row, vec_idx(j, i)) = -1.0;
            ++row;
        }
    if (set.kind == StructuralSet::Kind::LaplacianCvx) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) m(row, vec_idx(i, j)) = 1.0;
            ++row;
        }
    }
    if (set.kind == StructuralSet::Kind::AdjacencySym) {
        for (Eigen::Index i = 0; i < n; ++i) {
            m(row, vec_idx(i, i)) = 1.0;
            ++row;
        }
    }
    if (set.consistency) {
        m.bottomRows(cons_rows) = set.consistency->shadow_op();
        b.tail(cons_rows) = set.consistency->shadow_rhs();
    }

    auto pinv = std::make_shared<Matrix>(truncated_pinv(m, 1e-10));
    auto op = std::make_shared<Matrix>(std::move(m));
    auto rhs_vec = std::make_shared<Vector>(std::move(b));
    return [pinv, op, rhs_vec, n](const Matrix& x) {
        const Eigen::Map<const Vector> xv(x.data(), x.size());
        const Vector corrected = xv - (*pinv) * ((*op) * xv - (*rhs_vec));
        return Matrix(Eigen::Map<const Matrix>(corrected.data(), n, n));
    };
}

} // namespace

Matrix project_S(const Matrix& s, const StructuralSet& set) {
    if (s.rows() != s.cols()) throw validation_error("project_S: matrix must be square");

    if (set.kind == StructuralSet::Kind::Custom) {
        if (!set.custom_projection)
            throw validation_error("project_S: custom set without a projection");
        return set.custom_projection(s);
    }

    if (!set.consistency) {
        switch (set.kind) {
        case StructuralSet::Kind::Nonnegative: return clamp_nonnegative(s);
        case StructuralSet::Kind::AdjacencySym: return clamp_adjacency(s);
        case StructuralSet::Kind::LaplacianCvx: {
            std::vector<std::function<Matrix(const Matrix&)>> sets = {
                project_symmetric, project_zero_row_sums, clamp_offdiagonal};
            return dykstra(s, sets, set.dykstra_max_sweeps, set.dykstra_tol);
        }
        default: break;
        }
    }

    // Consistency attached: one combined affine projector plus the clamp cone.
    if (!set.affine_cache || set.affine_cache_dim != s.rows()) {
        set.affine_cache = std::make_shared<const std::function<Matrix(const Matrix&)>>(
            combined_affine_projector(set, s.rows()));
        set.affine_cache_dim = s.rows();
    }
    std::vector<std::function<Matrix(const Matrix&)>> sets;
    sets.push_back(*set.affine_cache);
    switch (set.kind) {
    case StructuralSet::Kind::LaplacianCvx:
        sets.push_back(clamp_offdiagonal);
        break;
    case StructuralSet::Kind::Nonnegative:
    case StructuralSet::Kind::AdjacencySym:
        sets.push_back([](const Matrix& x) { return x.cwiseMax(0.0); });
        break;
    default:
        break;
    }
    // The limit is symmetric; fold the residual asymmetry of the stopped
    // iteration back in.
    const Matrix p = dykstra(s, sets, set.dykstra_max_sweeps, set.dykstra_tol);
    return (p + p.transpose()) / 2.0;
}

Matrix solve_similarity_transform(const Matrix& a_t, const Matrix& a_rec, const Matrix& c_t,
                                  const Matrix& c) {
    const Eigen::Index n = a_t.rows();
    const Eigen::Index l = c.rows();
    if (a_t.cols() != n || a_rec.rows() != n || a_rec.cols() != n || c_t.rows() != l ||
        c_t.cols() != n || c.cols() != n)
        throw validation_error("solve_similarity_transform: dimension mismatch");

    // Stack A_T T - T A = 0 (vec rows N^2) over C_T T = C (rows L N) and
    // solve for vec(T) in least squares.
    const Eigen::Index nn = n * n;
    Matrix m = Matrix::Zero(nn + l * n, nn);
    Vector b = Vector::Zero(m.rows());
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index r = i + j * n;
            for (Eigen::Index k = 0; k < n; ++k) {
                m(r, k + j * n) += a_t(i, k);  // (A_T T)(i,j)
                m(r, i + k * n) -= a_rec(k, j); // (T A)(i,j)
            }
        }
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < l; ++i) {
            const Eigen::Index r = nn + i + j * l;
            for (Eigen::Index k = 0; k < n; ++k) m(r, k + j * n) += c_t(i, k);
            b[r] = c(i, j);
        }

    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector t = svd.solve(b);
    return Eigen::Map<const Matrix>(t.data(), n, n);
}

// ---------------------------------------------------------------------------
// Alternating projections
// ---------------------------------------------------------------------------

namespace {

bool has_repeated_eigenvalues(const Matrix& sym) {
    Spectrum es = eig_sym(sym);
    const double tol = cluster_tol(es.values);
    for (Eigen::Index i = 0; i + 1 < es.values.size(); ++i)
        if (std::abs(es.values[i] - es.values[i + 1]) <= tol) return true;
    return false;
}

} // namespace

APRun ap_solve(const SpectralTarget& target, const StructuralSet& set, const Matrix& s0,
               const APOptions& opts) {
    target.validate();
    require_symmetric(s0, "ap_solve");
    if (!(opts.tol_step > 0.0)) throw validation_error("ap_solve: tol_step must be positive");

    Rng escape_rng = make_rng(opts.seed);
    APRun run;
    Matrix s = spectral_project_impl(s0, target, nullptr);

    double prev_residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Matrix ps = project_S(s, set);
        const double residual = (s - ps).norm();
        if (residual > prev_residual + 1e-10) {
            std::ostringstream os;
            os << "ap_solve: projection residual increased from " << prev_residual << " to "
               << residual << " at iteration " << iter << " (internal invariant violated)";
            throw numerical_error(os.str());
        }
        prev_residual = residual;
        run.proj_residual.push_back(residual);
        if (opts.keep_iterates) run.iterates.push_back(s);

        Matrix s_next = spectral_project_impl(ps, target, nullptr);
        const double delta = (s - s_next).norm();
        run.step_delta.push_back(delta);
        ++run.iterations;

        if (delta <= opts.tol_step) {
            if (residual > opts.feas_tol && run.fixed_point_escapes < opts.escape_budget &&
                has_repeated_eigenvalues(ps)) {
                // Infeasible fixed point with a degenerate spectrum: an
                // alternative eigendecomposition can still make progress.
                s_next = spectral_project_impl(ps, target, &escape_rng);
                ++run.fixed_point_escapes;
                prev_residual = std::numeric_limits<double>::infinity();
                s = s_next;
                continue;
            }
            s = s_next;
            break;
        }
        s = s_next;
    }

    run.final_matrix = s;
    run.converged =
        !run.proj_residual.empty() && run.proj_residual.back() <= opts.feas_tol;
    if (opts.keep_iterates) run.iterates.push_back(s);
    return run;
}

bool detect_fixed_point(const Matrix& s, const StructuralSet& set, const SpectralTarget& target,
                        double tol) {
    const Matrix cycled = project_spectral(project_S(s, set), target);
    return (s - cycled).norm() <= tol;
}

RateEstimate estimate_linear_rate(const APRun& run) {
    const std::size_t total = run.step_delta.size();
    std::vector<std::pair<double, double>> pts; // (k, log delta_k)
    for (std::size_t k = total / 2; k < total; ++k) {
        const double d = run.step_delta[k];
        if (d > 0.0 && std::isfinite(d))
            pts.emplace_back(static_cast<double>(k), std::log(d));
    }
    if (pts.size() < 5)
        throw validation_error("estimate_linear_rate: insufficient data (need at least 5 "
                               "positive step deltas in the final half)");

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : pts) {
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    const double np = static_cast<double>(pts.size());
    const double denom = np * sxx - sx * sx;
    const double slope = (np * sxy - sx * sy) / denom;
    const double var_y = syy - sy * sy / np;
    double r2 = 1.0;
    if (var_y > 1e-30) {
        const double intercept = (sy - slope * sx) / np;
        double ss_res = 0.0;
        for (auto [x, y] : pts) {
            const double e = y - (intercept + slope * x);
            ss_res += e * e;
        }
        r2 = 1.0 - ss_res / var_y;
    } else {
        r2 = 0.0; // constant deltas carry no decay information
    }

    RateEstimate est;
    est.rate = std::exp(slope);
    est.r_squared = r2;
    est.linear = r2 >= 0.8 && est.rate > 0.0 && est.rate < 1.0 - 1e-12;
    return est;
}

Matrix random_spectral_start(const SpectralTarget& target, std::uint64_t seed) {
    target.validate();
    Rng rng = make_rng(seed);
    const Matrix q = random_orthogonal(target.n, rng);
    const Vector vals = padded_target_values(target);
    Matrix s = q * vals.asDiagonal() * q.transpose();
    return (s + s.transpose()) / 2.0;
}

Matrix diagonal_spectral_start(const SpectralTarget& target) {
    target.validate();
    return Matrix(padded_target_values(target).asDiagonal());
}

} // namespace netid
