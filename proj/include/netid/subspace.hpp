#pragma once

#include "netid/dynamics.hpp"

namespace netid {

/// Block-Hankel arrangements of one trajectory: column t of Y stacks
/// y(t), ..., y(t+alpha-1); same for U with inputs.
struct HankelBlocks {
    Matrix Y; ///< (alpha L) x T
    Matrix U; ///< (alpha N) x T
    int alpha = 0;
    int L = 0;
    int N = 0;
    Eigen::Index T = 0;
};

/// Result of projecting the inputs out of the output Hankel matrix.
struct ProjectedOutputs {
    Matrix Y_perp;                ///< Y (I - U^T (U U^T)^{-1} U)
    Eigen::Index u_rank = 0;      ///< numerical row rank of U
    double u_singular_ratio = 0;  ///< sigma_min(U) / sigma_max(U)
};

struct SpanEstimate {
    Matrix W;               ///< orthonormal basis, (depth L) x n_states
    Vector singular_values; ///< top n_states, non-increasing
    double rank_gap = 0.0;  ///< sigma_N / sigma_{N+1}
};

struct TEstimate {
    Matrix T;               ///< similarity estimate, n_states x n_states
    bool non_unique = false;///< set when rank(C) < n_states
};

struct BEstimate {
    Matrix B;
    Vector x0;
    double residual = 0.0; ///< mean squared fit residual, (1/Q) sum ||y - Psi theta||^2
};

struct SubspaceDiagnostics {
    Vector all_singular_values;
    double rank_gap = 0.0;
    double u_singular_ratio = 0.0;
    bool t_non_unique = false;
    double shift_residual = 0.0; ///< ||Ju W T A - Jl W T||_F
    double b_residual = 0.0;
    bool auto_order = false;
};

struct SubspaceEstimate {
    Matrix W;
    Vector singular_values;
    Matrix T_hat;
    Matrix A_hat;
    Matrix B_hat; ///< empty when B estimation was skipped
    Vector x0_hat;
    SubspaceDiagnostics diagnostics;
};

struct IdOptions {
    bool estimate_b = true;
};

/// Stack the trajectory into block-Hankel form. Requires alpha greater than
/// the input dimension (the state count) and enough samples for T = Q-alpha+1
/// informative columns.
HankelBlocks build_hankel(const Trajectory& traj, int alpha);

/// Annihilate the input rows: Y <- Y Pi with Pi = I - U^T (U U^T)^{-1} U,
/// applied through a QR factorization of U^T. Throws when the inputs are not
/// sufficiently exciting (rank-deficient U).
ProjectedOutputs project_out_inputs(const HankelBlocks& h);

/// Top left singular vectors of the projected outputs; the signal subspace
/// estimate. n_states <= 0 selects the order at the largest singular value
/// gap (experimental).
SpanEstimate estimate_observability_span(const Matrix& y_perp, int n_states);

/// Similarity transform estimate T = (J W)^+ C where J W is the first L rows
/// of W (L = rows of C). When rank(C) < n_states the least-squares
/// representative is completed with the kernel projector of J W so the
/// returned T is invertible and realizes the output map C exactly.
TEstimate estimate_T(const Matrix& W, const Matrix& C);

/// Least-squares solution of the shift-invariance relation
/// (Ju W T) A = (Jl W T), where Ju/Jl drop the last/first L rows.
Matrix estimate_A(const Matrix& W, const Matrix& T_hat, int L);

/// Joint least-squares fit of the initial state and the input matrix from
/// y(k) - D u(k) = C A^k x0 + sum_q (u(q)^T kron C A^{k-q-1}) vec(B).
BEstimate estimate_B_x0(const Trajectory& traj, const Matrix& A_hat, const Matrix& C,
                        const Matrix& D);

/// Full noise-free pipeline: Hankel, projection, SVD, T, A, and optionally B.
SubspaceEstimate subspace_id(const Trajectory& traj, int alpha, int n_states,
                             const Matrix& C, const Matrix& D, const IdOptions& opts = {});

/// Instrumental-variable variant for noisy data: the outputs are split into a
/// past block of depth beta and a future block of depth gamma = alpha - beta;
/// the span is estimated from the SVD of
///   G1 = (1/T) Y2 Pi_{U2}^perp [U1^T, Y1^T],
/// which is asymptotically noise free. Requires gamma > N.
SubspaceEstimate iv_subspace(const Trajectory& traj, int alpha, int beta, int n_states,
                             const Matrix& C, const Matrix& D, const IdOptions& opts = {});

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns.
double largest_principal_angle(const Matrix& q1, const Matrix& q2);

/// Extended observability matrix [C; CA; ...; CA^{depth-1}].
Matrix observability_matrix(const Matrix& a, const Matrix& c, int depth);

} // namespace netid
