#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "netid/dynamics.hpp"
#include "netid/graph.hpp"

namespace netid {

/// Prescribed spectrum for the graph construction problem. Either all N
/// eigenvalues are given, or only m < N of them together with a spectral-norm
/// cap rho for the unknown ones. epsilon is the per-eigenvalue uncertainty
/// radius; optional per-entry deviation intervals [a_i, b_i] replace the
/// epsilon ball when present.
struct SpectralTarget {
    Vector lambda; ///< known eigenvalues, non-increasing
    int n = 0;     ///< ambient dimension
    double epsilon = 0.0;
    double rho = std::numeric_limits<double>::infinity();
    std::optional<Vector> lower; ///< a_i (deviation lower bounds)
    std::optional<Vector> upper; ///< b_i

    int m() const { return static_cast<int>(lambda.size()); }
    bool is_partial() const { return m() < n; }
    void validate() const;

    static SpectralTarget exact(Vector lambda_o);
    static SpectralTarget with_uncertainty(Vector lambda_o, double eps);
    static SpectralTarget partial_spectrum(Vector lambda_m, int n, double eps, double rho);
    static SpectralTarget boxed(Vector lambda_o, Vector a, Vector b);
};

/// Data for the system-consistency constraint: ties the reconstructed shift S
/// to the identified realization through the linear system
///   [C_T; C_T S_T] T = [C; C S],
/// optionally joined by the input-symmetry relation B_T T^T = T B_T^T. The
/// transform T is a free variable; it is eliminated at construction, leaving
/// an affine constraint on S whose orthogonal projector is precomputed.
struct ConsistencyData {
    Matrix C;   ///< known output map, L x N
    Matrix C_T; ///< output map of the identified realization, L x N
    Matrix S_T; ///< shift estimate in transformed coordinates, N x N
    std::optional<Matrix> B_T;
    /// Fold B_T T^T = T B_T^T into the constraint (needs B_T; this is what
    /// gives the constraint teeth when only half the nodes are observed).
    bool use_input_symmetry = true;
    /// Known action w = B 1 of the input matrix on the all-ones vector; adds
    /// the rows T w = B_T 1. Pins the transform along the Laplacian null
    /// direction, which the coupling rows cannot see.
    std::optional<Vector> input_ones_action;

    /// rank_tol is the relative singular-value cutoff used when eliminating
    /// T; identification error leaks into the constraint through the weakest
    /// directions, so a coarser cutoff trades constraint strength for a
    /// consistent (nonempty) feasible set.
    ConsistencyData(Matrix C_in, Matrix C_T_in, Matrix S_T_in,
                    std::optional<Matrix> B_T_in = std::nullopt,
                    bool input_symmetry = true,
                    std::optional<Vector> input_ones_action_in = std::nullopt,
                    double rank_tol = 1e-8);

    /// Build S_T from an identified transition matrix: S_T = f^{-1}(log(A_T)/tau).
    static ConsistencyData from_transition(const Matrix& C, const Matrix& C_T,
                                           const Matrix& A_T, double tau,
                                           const ScalarMap& fx_map,
                                           std::optional<Matrix> B_T = std::nullopt);

    /// Orthogonal projection of S onto the affine shadow of the constraint.
    Matrix project(const Matrix& s) const;

    /// Joint least-squares solve for the transform at a fixed candidate S,
    /// using every active relation. When a transition pair (A_T, A_rec) is
    /// supplied, the similarity rows A_T T = T A_rec join the stack; they are
    /// exactly consistent when S truly realizes the identified system and
    /// sharpen T considerably there.
    Matrix solve_transform(const Matrix& s, const Matrix* a_t = nullptr,
                           const Matrix* a_rec = nullptr) const;

    /// Residual of the T-only relations at the least-squares T (nonzero means
    /// the constraint set is only approximately realizable).
    double ct_solve_residual = 0.0;

    const Matrix& shadow_op() const { return shadow_op_; }
    const Vector& shadow_rhs() const { return shadow_rhs_; }

private:
    Eigen::Index n_ = 0, l_ = 0;
    Vector t_particular_;  ///< vec(T) solving the T-only rows
    Matrix t_kernel_;      ///< kernel basis of the T-only rows, N^2 x k
    Matrix shadow_op_;     ///< F with the constraint F vec(S) = g
    Matrix shadow_pinv_;   ///< F^+
    Vector shadow_rhs_;    ///< g
    Matrix t_rows_;        ///< stacked T-only coefficient rows (for solve_transform)
    Vector t_rhs_;         ///< right-hand side of the T-only rows
    Matrix couple_t_;      ///< (I kron C_T S_T), coefficient of vec(T) in the coupling
};

struct ConsistencyReport {
    Matrix T;
    double residual = 0.0;          ///< ||[C_T; C_T S_T] T - [C; C S]||_F
    double relative_residual = 0.0;
    double input_symmetry_residual = 0.0; ///< ||B_T T^T - T B_T^T||_F when B_T present
    bool underdetermined = false;
};

/// Solve the consistency system for T in least squares and report residuals.
ConsistencyReport check_consistency(const Matrix& s_candidate, const ConsistencyData& cons);

/// Structural constraint set with a computable unique Frobenius projection.
struct StructuralSet {
    enum class Kind {
        LaplacianCvx, ///< symmetric, zero row sums, nonpositive off-diagonal
        Nonnegative,  ///< symmetric, entrywise nonnegative
        AdjacencySym, ///< symmetric, zero diagonal, entrywise nonnegative
        Custom,
    };

    Kind kind = Kind::LaplacianCvx;
    std::optional<ConsistencyData> consistency;
    std::function<Matrix(const Matrix&)> custom_projection;
    int dykstra_max_sweeps = 5000;
    double dykstra_tol = 1e-10;

    /// Cache for the combined affine projector (built on first use; shared
    /// across copies, so do not mutate the set definition after projecting).
    mutable std::shared_ptr<const std::function<Matrix(const Matrix&)>> affine_cache;
    mutable Eigen::Index affine_cache_dim = -1;

    static StructuralSet laplacian_cvx() { return {Kind::LaplacianCvx}; }
    static StructuralSet nonnegative() { return {Kind::Nonnegative}; }
    static StructuralSet adjacency_sym() { return {Kind::AdjacencySym}; }
    static StructuralSet custom(std::function<Matrix(const Matrix&)> proj);
    static StructuralSet parse(const std::string& name);
    std::string name() const;
};

/// Frobenius projection onto the structural set. Closed form for the clamp
/// sets; Dykstra's algorithm for the Laplacian relaxation and whenever the
/// consistency constraint is attached.
Matrix project_S(const Matrix& s, const StructuralSet& set);

/// Least-squares transform between an identified transition matrix and a
/// reconstructed one: minimizes ||A_T T - T A|| subject (in the stacked
/// least-squares sense) to C_T T = C. Used to carry the input matrix back
/// from transformed coordinates.
Matrix solve_similarity_transform(const Matrix& a_t, const Matrix& a_rec, const Matrix& c_t,
                                  const Matrix& c);

/// Best Frobenius approximant with the prescribed full spectrum:
/// P = Q diag(lambda_o) Q^T where S = Q diag(lambda) Q^T, both non-increasing.
Matrix project_M(const Matrix& s, const Vector& lambda_o);

/// Spectrum constrained to the epsilon ball around lambda_o: eigenvalue i
/// moves to lambda_o[i] + sign(g_i) min(eps, |g_i|), g_i = lambda_i - lambda_o[i].
Matrix project_M_eps(const Matrix& s, const Vector& lambda_o, double epsilon);

/// Partial spectrum: the m known eigenvalues are matched to positions of the
/// sorted spectrum by a min-weight assignment on squared differences, matched
/// values are clamped into the epsilon ball, unmatched ones stay (clipped to
/// [-rho, rho]). Sets *clipped when the input spectrum violated the rho cap.
Matrix project_M_eps_m(const Matrix& s, const Vector& lambda_m, double epsilon, double rho,
                       bool* clipped = nullptr);

/// Per-entry deviation boxes: eigenvalue i moves to
/// lambda_o[i] + clamp(lambda_i - lambda_o[i], a_i, b_i).
Matrix project_M_ab(const Matrix& s, const Vector& lambda_o, const Vector& a, const Vector& b);

/// Dispatch to the matching spectral projection for the target shape.
Matrix project_spectral(const Matrix& s, const SpectralTarget& target);

/// Ordered positions (strictly increasing) of the sorted spectrum entries
/// assigned to the partial target, minimizing the sum of squared differences.
std::vector<int> match_partial_spectrum(const Vector& values_desc, const Vector& lambda_m);

/// Iteration log of one alternating-projections run. proj_residual[k] is
/// ||S_k - P_S(S_k)||_F and is non-increasing; step_delta[k] is
/// ||S_k - S_{k+1}||_F.
struct APRun {
    std::vector<double> proj_residual;
    std::vector<double> step_delta;
    std::vector<Matrix> iterates; ///< kept only on request
    int fixed_point_escapes = 0;
    bool converged = false;
    Matrix final_matrix;
    int iterations = 0;
};

struct APOptions {
    int max_iter = 2000;
    double tol_step = 1e-6;
    double feas_tol = 1e-6;
    int escape_budget = 10;
    std::uint64_t seed = 0; ///< seeds the fixed-point escape rotations
    bool keep_iterates = false;
};

/// Alternate S_{k+1/2} = P_S(S_k), S_{k+1} = P_M(S_{k+1/2}) until the iterate
/// step falls below tol_step or the budget runs out. Stagnation at an
/// infeasible fixed point with a degenerate spectrum triggers an escape: the
/// eigenbasis is re-randomized inside each repeated-eigenvalue block.
APRun ap_solve(const SpectralTarget& target, const StructuralSet& set, const Matrix& s0,
               const APOptions& opts = {});

/// True iff S reproduces itself through one full projection cycle (within tol),
/// using the same deterministic eigendecomposition as the projections.
bool detect_fixed_point(const Matrix& s, const StructuralSet& set,
                        const SpectralTarget& target, double tol = 1e-10);

struct RateEstimate {
    bool linear = false;
    double rate = 0.0;      ///< in (0,1) when linear
    double r_squared = 0.0; ///< fit quality of the log-linear regression
};

/// Least-squares slope of log(step_delta) over the final half of the run.
/// Throws when fewer than five usable points remain.
RateEstimate estimate_linear_rate(const APRun& run);

/// S0 = Q0 diag(padded target) Q0^T with a seeded random orthogonal Q0.
Matrix random_spectral_start(const SpectralTarget& target, std::uint64_t seed);

/// Diagonal start: diag of the target eigenvalues (padded for partial targets).
Matrix diagonal_spectral_start(const SpectralTarget& target);

} // namespace netid
