#pragma once

#include <optional>

#include "netid/dynamics.hpp"

namespace netid {

/// Continuous-time transition matrices recovered from a discrete estimate.
struct ContinuousEstimate {
    Matrix fx_hat; ///< estimate of f_x(S_x)
    Matrix fu_hat; ///< estimate of f_u(S_u)
    double tau = 0.0;
    Vector lambda_x; ///< recovered state-graph eigenvalues, non-increasing

    /// ||exp(fx_hat tau) - A||_F / ||A||_F against the input A.
    double roundtrip_error = 0.0;
    bool used_spectral_fallback = false;
};

/// Principal matrix logarithm: the unique real X with exp(X) = A whose
/// eigenvalues have imaginary parts in (-pi, pi). Requires A invertible with
/// no eigenvalues on the closed negative real axis.
///
/// Symmetric input (within 1e-8 relative) goes through the real spectral
/// path; anything else through the dense inverse scaling-and-squaring
/// algorithm on the real Schur form.
Matrix principal_log(const Matrix& a);

struct RecoverOptions {
    /// Symmetrize A as (A + A^T)/2 before the logarithm (undirected scope).
    bool assume_undirected = false;
    /// Scalar map whose inverse produces lambda_x from eig(fx_hat).
    std::optional<ScalarMap> fx_map;
};

/// Invert the discretization: fx_hat = log(A)/tau and
/// fu_hat = (A - I)^{-1} fx_hat B. A near-singular A - I (condition > 1e12)
/// falls back to solving B = (int_0^tau e^{fx t} dt) fu spectrally.
ContinuousEstimate recover_continuous(const StateSpace& ss_hat,
                                      const RecoverOptions& opts = {});

/// Entrywise inverse image under a bijective named map, sorted non-increasing.
Vector invert_scalar_map(const ScalarMap& map, const Vector& values);

} // namespace netid
