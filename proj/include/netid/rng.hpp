#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace netid {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Matrix with i.i.d. standard normal entries, filled column by column.
inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = dist(rng);
    return m;
}

/// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign fix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd g = standard_normal(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i)
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
    return q;
}

} // namespace netid
