#include "netid/matfun.hpp"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

namespace netid {

Matrix sym_matfun(const Matrix& s, const std::function<double(double)>& f) {
    require_symmetric(s, "sym_matfun");
    Spectrum es = eig_sym(s);
    Vector fv(es.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(es.values[i]);
    return es.basis * fv.asDiagonal() * es.basis.transpose();
}

Matrix sym_exp(const Matrix& s) {
    return sym_matfun(s, [](double z) { return std::exp(z); });
}

Matrix general_exp(const Matrix& a) {
    if (a.rows() != a.cols())
        throw validation_error("general_exp: matrix must be square");
    return a.exp();
}

namespace {

std::complex<double> phi_integral(std::complex<double> z, double tau) {
    if (std::abs(z) * tau < 1e-12) {
        // (e^{z tau} - 1)/z = tau (1 + z tau/2 + (z tau)^2/6 + ...)
        std::complex<double> zt = z * tau;
        return tau * (1.0 + zt / 2.0 + zt * zt / 6.0);
    }
    return (std::exp(z * tau) - 1.0) / z;
}

} // namespace

Matrix exp_integral(const Matrix& g, double tau) {
    if (g.rows() != g.cols())
        throw validation_error("exp_integral: matrix must be square");
    if (tau <= 0.0)
        throw validation_error("exp_integral: need tau > 0");

    if (is_symmetric(g, 1e-10)) {
        return sym_matfun(g, [tau](double z) {
            return phi_integral(std::complex<double>(z, 0.0), tau).real();
        });
    }

    Eigen::EigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success)
        throw numerical_error("exp_integral: eigendecomposition failed");
    Eigen::MatrixXcd v = es.eigenvectors();
    Eigen::VectorXcd lam = es.eigenvalues();
    Eigen::VectorXcd f(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) f[i] = phi_integral(lam[i], tau);
    Eigen::MatrixXcd r = v * f.asDiagonal() * v.inverse();
    return r.real();
}

} // namespace netid
