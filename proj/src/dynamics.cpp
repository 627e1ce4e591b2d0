#include "netid/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "netid/matfun.hpp"
#include "netid/rng.hpp"

namespace netid {

ScalarMap ScalarMap::affine(double a, double b) {
    if (a == 0.0) throw validation_error("ScalarMap::affine: slope must be nonzero");
    return {Kind::Affine, a, b};
}

ScalarMap ScalarMap::parse(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "neg_identity") return neg_identity();
    if (name.rfind("affine:", 0) == 0) {
        std::istringstream is(name.substr(7));
        double a = 0.0, b = 0.0;
        char sep = 0;
        if (!(is >> a >> sep >> b) || sep != ':')
            throw validation_error("ScalarMap::parse: expected affine:<a>:<b>, got " + name);
        return affine(a, b);
    }
    throw validation_error("ScalarMap::parse: unknown map " + name);
}

std::string ScalarMap::name() const {
    switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::NegIdentity: return "neg_identity";
    case Kind::Affine: {
        std::ostringstream os;
        os << "affine:" << a << ":" << b;
        return os.str();
    }
    }
    return "identity";
}

double ScalarMap::operator()(double z) const {
    switch (kind) {
    case Kind::Identity: return z;
    case Kind::NegIdentity: return -z;
    case Kind::Affine: return a * z + b;
    }
    return z;
}

double ScalarMap::inverse(double w) const {
    switch (kind) {
    case Kind::Identity: return w;
    case Kind::NegIdentity: return -w;
    case Kind::Affine: return (w - b) / a;
    }
    return w;
}

Matrix ScalarMap::apply(const Matrix& s) const {
    const Eigen::Index n = s.rows();
    switch (kind) {
    case Kind::Identity: return s;
    case Kind::NegIdentity: return -s;
    case Kind::Affine: return a * s + b * Matrix::Identity(n, n);
    }
    return s;
}

Matrix ScalarMap::apply_inverse(const Matrix& s) const {
    const Eigen::Index n = s.rows();
    switch (kind) {
    case Kind::Identity: return s;
    case Kind::NegIdentity: return -s;
    case Kind::Affine: return (s - b * Matrix::Identity(n, n)) / a;
    }
    return s;
}

void ContinuousModel::validate() const {
    const int N = n();
    if (fx.rows() != N || fx.cols() != N || fu.rows() != N || fu.cols() != N)
        throw validation_error("ContinuousModel: fx and fu must be N x N");
    require_symmetric(fx, "ContinuousModel.fx");
    if (C.cols() != N || D.cols() != N || C.rows() != D.rows())
        throw validation_error("ContinuousModel: C and D must be L x N");
}

void StateSpace::validate() const {
    const int N = n();
    if (A.rows() != N || A.cols() != N || B.rows() != N || B.cols() != N)
        throw validation_error("StateSpace: A and B must be N x N");
    if (C.cols() != N || D.cols() != N || C.rows() != D.rows())
        throw validation_error("StateSpace: C and D must be L x N");
    if (!(tau > 0.0)) throw validation_error("StateSpace: need tau > 0");
}

StateSpace discretize(const ContinuousModel& cm, double tau) {
    if (!(tau > 0.0)) throw validation_error("discretize: need tau > 0");
    cm.validate();

    StateSpace ss;
    ss.A = sym_matfun(cm.fx, [tau](double z) { return std::exp(z * tau); });
    ss.B = exp_integral(cm.fx, tau) * cm.fu;
    ss.C = cm.C;
    ss.D = cm.D;
    ss.tau = tau;
    return ss;
}

Trajectory simulate(const StateSpace& ss, const Vector& x0, const Matrix& inputs,
                    double noise_state_var, double noise_obs_var, std::uint64_t seed,
                    bool keep_states) {
    ss.validate();
    if (noise_state_var < 0.0 || noise_obs_var < 0.0)
        throw validation_error("simulate: noise variances must be nonnegative");
    const int N = ss.n();
    const int L = ss.outputs();
    if (x0.size() != N)
        throw validation_error("simulate: x0 has wrong dimension");
    if (inputs.rows() != N)
        throw validation_error("simulate: inputs must have N rows");
    if (!inputs.allFinite() || !x0.allFinite())
        throw validation_error("simulate: inputs contain NaN or Inf");

    const Eigen::Index q = inputs.cols();
    Trajectory traj;
    traj.inputs = inputs;
    traj.outputs = Matrix(L, q);
    traj.tau = ss.tau;
    traj.noise_state_var = noise_state_var;
    traj.noise_obs_var = noise_obs_var;
    traj.seed = seed;
    if (keep_states) traj.states = Matrix(N, q + 1);

    Rng rng = make_rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double sw = std::sqrt(noise_state_var);
    const double sv = std::sqrt(noise_obs_var);

    Vector x = x0;
    for (Eigen::Index k = 0; k < q; ++k) {
        if (keep_states) traj.states->col(k) = x;
        Vector y = ss.C * x + ss.D * inputs.col(k);
        if (sv > 0.0)
            for (int i = 0; i < L; ++i) y[i] += sv * dist(rng);
        traj.outputs.col(k) = y;

        Vector xn = ss.A * x + ss.B * inputs.col(k);
        if (sw > 0.0)
            for (int i = 0; i < N; ++i) xn[i] += sw * dist(rng);
        x = xn;
        if (!(x.cwiseAbs().maxCoeff() < 1e12)) {
            std::ostringstream os;
            os << "simulate: state overflow (|x| > 1e12) at step " << k + 1;
            throw numerical_error(os.str());
        }
    }
    if (keep_states) traj.states->col(q) = x;
    return traj;
}

Matrix gaussian_input(int n, int q, std::uint64_t seed) {
    if (n < 1 || q < 1) throw validation_error("gaussian_input: need n, q >= 1");
    Rng rng = make_rng(seed);
    return standard_normal(n, q, rng);
}

std::string Prop1Report::summary() const {
    if (ok) return "ok";
    std::ostringstream os;
    os << violations.size() << " violating eigenvalue(s):";
    for (const auto& v : violations) os << " [" << v.eigenvalue << ": " << v.reason << "]";
    return os.str();
}

Prop1Report check_prop1(const std::function<std::complex<double>(double)>& fs,
                        const Vector& eigenvalues) {
    Prop1Report report;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double z = eigenvalues[i];
        const std::complex<double> w = fs(z);
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
            report.ok = false;
            report.violations.push_back({z, "f(z) is not finite"});
            continue;
        }
        // e^w lies on the closed negative real axis iff Im(w) is an odd
        // multiple of pi.
        if (std::abs(std::sin(w.imag())) < 1e-12 && std::cos(w.imag()) < 0.0) {
            report.ok = false;
            report.violations.push_back({z, "exp(f(z)) lies on the negative real axis"});
        }
    }
    return report;
}

Prop1Report check_prop1(const ScalarMap& fs, const Vector& eigenvalues) {
    return check_prop1(
        [&fs](double z) { return std::complex<double>(fs(z), 0.0); }, eigenvalues);
}

} // namespace netid
