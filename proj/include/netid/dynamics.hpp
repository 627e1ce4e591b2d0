#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "netid/graph.hpp"

namespace netid {

/// Named scalar map z -> f(z). Only forms with a closed-form inverse are
/// supported: identity, negated identity, and affine a z + b with a != 0.
/// For these maps the induced matrix function is a S + b I.
struct ScalarMap {
    enum class Kind { Identity, NegIdentity, Affine };

    Kind kind = Kind::NegIdentity;
    double a = 1.0; ///< Affine slope
    double b = 0.0; ///< Affine offset

    static ScalarMap identity() { return {Kind::Identity, 1.0, 0.0}; }
    static ScalarMap neg_identity() { return {Kind::NegIdentity, -1.0, 0.0}; }
    static ScalarMap affine(double a, double b);

    /// Parse "identity", "neg_identity", or "affine:<a>:<b>".
    static ScalarMap parse(const std::string& name);
    std::string name() const;

    double operator()(double z) const;
    double inverse(double w) const;

    /// The matrix function induced by the scalar map (all supported maps are
    /// affine at the matrix level).
    Matrix apply(const Matrix& s) const;
    Matrix apply_inverse(const Matrix& s) const;
};

/// Continuous-time first-order model
///   dx/dt = fx x(t) + fu u(t),  y(t) = C x(t) + D u(t)
/// with fx = f_x(S_x) symmetric (undirected scope) and fu = f_u(S_u).
struct ContinuousModel {
    Matrix fx; ///< evaluated f_x(S_x), symmetric N x N
    Matrix fu; ///< evaluated f_u(S_u), N x N
    Matrix C;  ///< L x N
    Matrix D;  ///< L x N
    ScalarMap fx_map = ScalarMap::neg_identity();
    ScalarMap fu_map = ScalarMap::neg_identity();

    int n() const { return static_cast<int>(fx.rows()); }
    int outputs() const { return static_cast<int>(C.rows()); }
    void validate() const;
};

/// Discrete-time state-space quadruple sampled at period tau.
struct StateSpace {
    Matrix A, B; ///< N x N
    Matrix C, D; ///< L x N
    double tau = 0.0;

    int n() const { return static_cast<int>(A.rows()); }
    int outputs() const { return static_cast<int>(C.rows()); }
    void validate() const;
};

/// Input/output (and optionally state) records of one simulated run.
/// Column k of each matrix is the time-k sample; states, when kept, include
/// x(0) and have one extra column.
struct Trajectory {
    Matrix inputs;                ///< N x Q
    Matrix outputs;               ///< L x Q
    std::optional<Matrix> states; ///< N x (Q+1)
    double tau = 0.0;
    double noise_state_var = 0.0;
    double noise_obs_var = 0.0;
    std::uint64_t seed = 0;

    Eigen::Index length() const { return inputs.cols(); }
    int input_dim() const { return static_cast<int>(inputs.rows()); }
    int output_dim() const { return static_cast<int>(outputs.rows()); }
};

/// Exact discretization at sampling period tau:
///   A = e^{fx tau},  B = (int_0^tau e^{fx t} dt) fu.
/// Singular fx is handled through the spectral limit of the integrand.
StateSpace discretize(const ContinuousModel& cm, double tau);

/// Run the recursion x(k+1) = A x(k) + B u(k) + w(k), y(k) = C x(k) + D u(k) + v(k)
/// with i.i.d. zero-mean Gaussian noise of the given variances. Deterministic
/// per seed. Throws on non-finite inputs and on state blow-up (|x| > 1e12).
Trajectory simulate(const StateSpace& ss, const Vector& x0, const Matrix& inputs,
                    double noise_state_var, double noise_obs_var, std::uint64_t seed,
                    bool keep_states = false);

/// q samples of an n-dimensional standard normal input, deterministic per seed.
Matrix gaussian_input(int n, int q, std::uint64_t seed);

/// Outcome of the matrix-logarithm existence/uniqueness precondition check:
/// over the given eigenvalues z, e^{f(z)} must stay off the closed negative
/// real axis and f(z) must be finite.
struct Prop1Report {
    bool ok = true;
    struct Violation {
        double eigenvalue;
        std::string reason;
    };
    std::vector<Violation> violations;
    std::string summary() const;
};

Prop1Report check_prop1(const std::function<std::complex<double>(double)>& fs,
                        const Vector& eigenvalues);
Prop1Report check_prop1(const ScalarMap& fs, const Vector& eigenvalues);

} // namespace netid
