#include "netid/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "netid/matfun.hpp"

namespace netid {

namespace {

[[noreturn]] void undefined_log(const std::complex<double>& lam) {
    std::ostringstream os;
    os << "principal logarithm undefined: eigenvalue " << lam.real();
    if (lam.imag() != 0.0) os << (lam.imag() < 0 ? " - " : " + ") << std::abs(lam.imag()) << "i";
    os << " lies on the closed negative real axis";
    throw numerical_error(os.str());
}

bool nearly_symmetric(const Matrix& a) {
    if (a.rows() != a.cols() || a.size() == 0) return false;
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return asymmetry(a) <= 1e-8 * scale;
}

} // namespace

Matrix principal_log(const Matrix& a) {
    if (a.rows() != a.cols())
        throw validation_error("principal_log: matrix must be square");

    if (nearly_symmetric(a)) {
        Spectrum es = eig_sym((a + a.transpose()) / 2.0);
        for (Eigen::Index i = 0; i < es.values.size(); ++i) {
            const double lam = es.values[i];
            if (std::abs(lam) < 1e-14 || lam < 0.0)
                undefined_log({lam, 0.0});
        }
        Vector logv = es.values.array().log();
        return es.basis * logv.asDiagonal() * es.basis.transpose();
    }

    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw numerical_error("principal_log: eigendecomposition failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> lam = es.eigenvalues()[i];
        const double mod = std::abs(lam);
        if (mod < 1e-14) undefined_log(lam);
        if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-12 * mod) undefined_log(lam);
    }
    return a.log();
}

Vector invert_scalar_map(const ScalarMap& map, const Vector& values) {
    Vector out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = map.inverse(values[i]);
    std::sort(out.data(), out.data() + out.size(), std::greater<double>());
    return out;
}

ContinuousEstimate recover_continuous(const StateSpace& ss_hat, const RecoverOptions& opts) {
    ss_hat.validate();
    const Eigen::Index n = ss_hat.A.rows();

    Matrix a = ss_hat.A;
    if (opts.assume_undirected) a = Matrix((a + a.transpose()).eval() / 2.0);

    ContinuousEstimate est;
    est.tau = ss_hat.tau;
    est.fx_hat = principal_log(a) / ss_hat.tau;

    // fu from B: primary path inverts A - I, the spectral fallback inverts the
    // exponential integral directly (covers A close to the identity).
    const Matrix ami = a - Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(ami);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin > 0.0 && smax / smin < 1e12) {
        est.fu_hat = ami.lu().solve(est.fx_hat * ss_hat.B);
    } else {
        est.used_spectral_fallback = true;
        Matrix integral = exp_integral(est.fx_hat, ss_hat.tau);
        est.fu_hat = integral.lu().solve(ss_hat.B);
    }

    // Eigenvalues of fx_hat; real parts carry the spectrum when the estimate
    // is a similarity transform of a symmetric matrix.
    Vector eigs;
    if (is_symmetric(est.fx_hat, 1e-8)) {
        eigs = eig_sym((est.fx_hat + est.fx_hat.transpose()) / 2.0).values;
    } else {
        Eigen::EigenSolver<Matrix> fes(est.fx_hat);
        eigs = fes.eigenvalues().real();
    }
    est.lambda_x = invert_scalar_map(opts.fx_map.value_or(ScalarMap::identity()), eigs);

    const double anorm = ss_hat.A.norm();
    est.roundtrip_error =
        anorm > 0.0 ? (general_exp(est.fx_hat * ss_hat.tau) - ss_hat.A).norm() / anorm : 0.0;
    return est;
}

} // namespace netid
