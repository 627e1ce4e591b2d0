#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netid/errors.hpp"

namespace netid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Structural family a graph shift operator is declared to belong to.
enum class GraphFamily {
    Adjacency,              ///< zero diagonal, nonnegative entries
    CombinatorialLaplacian, ///< zero row sums, nonpositive off-diagonal
    NormalizedLaplacian,    ///< unit diagonal
    Nonnegative,            ///< entrywise nonnegative
    Generic,
};

std::string to_string(GraphFamily f);
GraphFamily family_from_string(const std::string& s);

/// Symmetric matrix representation of an undirected graph together with its
/// declared structural family. Construction validates the family invariants
/// and rejects asymmetric input.
struct GraphShift {
    Matrix matrix;
    GraphFamily family = GraphFamily::Generic;

    GraphShift() = default;
    GraphShift(Matrix m, GraphFamily f);

    int n() const { return static_cast<int>(matrix.rows()); }
};

/// Eigendecomposition with non-increasing eigenvalues and a deterministic,
/// sign-fixed eigenvector basis (first significantly nonzero component of each
/// column made positive).
struct Spectrum {
    Vector values; ///< sorted non-increasing
    Matrix basis;  ///< orthogonal; column i pairs with values[i]
};

/// Max absolute entry difference between m and its transpose.
double asymmetry(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-10);

/// Require symmetry; tol scales with the magnitude of m.
void require_symmetric(const Matrix& m, const char* where, double tol = 1e-10);

/// Simple d-regular graph on n nodes via the pairing model with rejection of
/// self-loops and multi-edges. Deterministic for a fixed seed.
GraphShift random_regular(int n, int d, std::uint64_t seed);

/// L = diag(A 1) - A for an adjacency input.
GraphShift to_laplacian(const GraphShift& g);

/// Spectral decomposition of a symmetric matrix, non-increasing eigenvalues.
Spectrum eig_sym(const Matrix& m);

/// Monic characteristic polynomial coefficients, highest degree first,
/// via the Faddeev-LeVerrier recurrence. Coefficients are snapped to integers
/// when the input matrix is integer-valued.
Vector char_poly(const Matrix& m);

/// True iff the sorted spectra agree entrywise within tol.
bool is_cospectral(const GraphShift& a, const GraphShift& b, double tol = 1e-9);

/// Undirected edge list of the nonzero off-diagonal support (i < j).
std::vector<std::pair<int, int>> edge_support(const Matrix& m, double threshold);

/// Connectivity of the graph whose edges are |m(i,j)| >= threshold.
bool is_connected(const Matrix& m, double threshold);

} // namespace netid
