#pragma once

#include <functional>

#include "netid/graph.hpp"

namespace netid {

/// f applied to a symmetric matrix through its eigendecomposition.
Matrix sym_matfun(const Matrix& s, const std::function<double(double)>& f);

/// e^S for symmetric S.
Matrix sym_exp(const Matrix& s);

/// Matrix exponential for a general square matrix (scaling and squaring).
Matrix general_exp(const Matrix& a);

/// Integral of the matrix exponential, int_0^tau e^{G t} dt.
///
/// Evaluated through the eigenvalues of G with the scalar map
/// phi(z) = (e^{z tau} - 1)/z and its limit phi(0) = tau, so singular
/// generators need no special casing. Symmetric G uses the real spectral
/// path; a general (diagonalizable) G goes through the complex
/// eigendecomposition and the real part of the result is returned.
Matrix exp_integral(const Matrix& g, double tau);

} // namespace netid
