#include "netid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "netid/rng.hpp"

namespace netid {

std::string to_string(GraphFamily f) {
    switch (f) {
    case GraphFamily::Adjacency: return "adjacency";
    case GraphFamily::CombinatorialLaplacian: return "combinatorial_laplacian";
    case GraphFamily::NormalizedLaplacian: return "normalized_laplacian";
    case GraphFamily::Nonnegative: return "nonnegative";
    case GraphFamily::Generic: return "generic";
    }
    return "generic";
}

GraphFamily family_from_string(const std::string& s) {
    if (s == "adjacency") return GraphFamily::Adjacency;
    if (s == "combinatorial_laplacian") return GraphFamily::CombinatorialLaplacian;
    if (s == "normalized_laplacian") return GraphFamily::NormalizedLaplacian;
    if (s == "nonnegative") return GraphFamily::Nonnegative;
    if (s == "generic") return GraphFamily::Generic;
    throw validation_error("unknown graph family: " + s);
}

double asymmetry(const Matrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return asymmetry(m) <= tol * scale;
}

void require_symmetric(const Matrix& m, const char* where, double tol) {
    if (!is_symmetric(m, tol)) {
        std::ostringstream os;
        os << where << ": matrix is not symmetric (max |m - m^T| = " << asymmetry(m) << ")";
        throw validation_error(os.str());
    }
}

namespace {

void validate_family(const Matrix& m, GraphFamily f) {
    const double scale = m.size() ? std::max(1.0, m.cwiseAbs().maxCoeff()) : 1.0;
    switch (f) {
    case GraphFamily::Adjacency:
        if (m.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw validation_error("adjacency matrix must have a zero diagonal");
        if (m.minCoeff() < -1e-12 * scale)
            throw validation_error("adjacency matrix must be entrywise nonnegative");
        break;
    case GraphFamily::CombinatorialLaplacian: {
        double worst_row = m.rowwise().sum().cwiseAbs().maxCoeff();
        if (worst_row > 1e-10 * scale)
            throw validation_error("combinatorial Laplacian rows must sum to zero");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (i != j && m(i, j) > 1e-10 * scale)
                    throw validation_error("combinatorial Laplacian off-diagonal must be nonpositive");
        break;
    }
    case GraphFamily::NormalizedLaplacian:
        if ((m.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10)
            throw validation_error("normalized Laplacian must have a unit diagonal");
        break;
    case GraphFamily::Nonnegative:
        if (m.minCoeff() < -1e-12 * scale)
            throw validation_error("nonnegative shift operator has a negative entry");
        break;
    case GraphFamily::Generic:
        break;
    }
}

} // namespace

GraphShift::GraphShift(Matrix m, GraphFamily f) : matrix(std::move(m)), family(f) {
    if (matrix.rows() != matrix.cols())
        throw validation_error("graph shift operator must be square");
    require_symmetric(matrix, "GraphShift", 1e-12);
    validate_family(matrix, family);
}

GraphShift random_regular(int n, int d, std::uint64_t seed) {
    if (n <= 0) throw validation_error("random_regular: need n > 0");
    if (d < 0) throw validation_error("random_regular: need d >= 0");
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw validation_error("random_regular: infeasible, n*d must be even");
    if (d >= n)
        throw validation_error("random_regular: infeasible, need d < n");

    Rng rng = make_rng(seed);
    const int retry_budget = 200;

    std::vector<int> stubs(static_cast<std::size_t>(n) * d);
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) stubs[static_cast<std::size_t>(i) * d + k] = i;
        std::shuffle(stubs.begin(), stubs.end(), rng);

        Matrix a = Matrix::Zero(n, n);
        bool ok = true;
        for (std::size_t p = 0; p + 1 < stubs.size(); p += 2) {
            int u = stubs[p], v = stubs[p + 1];
            if (u == v || a(u, v) != 0.0) { ok = false; break; }
            a(u, v) = 1.0;
            a(v, u) = 1.0;
        }
        if (ok) return GraphShift(std::move(a), GraphFamily::Adjacency);
    }
    throw numerical_error("random_regular: pairing model produced no simple graph in " +
                          std::to_string(retry_budget) + " attempts");
}

GraphShift to_laplacian(const GraphShift& g) {
    if (g.family != GraphFamily::Adjacency)
        throw validation_error("to_laplacian: input family must be adjacency, got " +
                               to_string(g.family));
    Matrix l = Matrix(g.matrix.rowwise().sum().asDiagonal()) - g.matrix;
    return GraphShift(std::move(l), GraphFamily::CombinatorialLaplacian);
}

Spectrum eig_sym(const Matrix& m) {
    require_symmetric(m, "eig_sym");
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.transpose()) / 2.0);
    if (es.info() != Eigen::Success)
        throw numerical_error("eig_sym: eigendecomposition failed to converge");

    const Eigen::Index n = m.rows();
    Spectrum s;
    s.values = Vector(n);
    s.basis = Matrix(n, n);
    // Eigen returns increasing eigenvalues; flip to non-increasing.
    for (Eigen::Index i = 0; i < n; ++i) {
        s.values[i] = es.eigenvalues()[n - 1 - i];
        s.basis.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    // Deterministic sign convention: first significantly nonzero component positive.
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(s.basis(i, j)) > 1e-8) {
                if (s.basis(i, j) < 0.0) s.basis.col(j) = -s.basis.col(j);
                break;
            }
        }
    }
    return s;
}

Vector char_poly(const Matrix& m) {
    if (m.rows() != m.cols())
        throw validation_error("char_poly: matrix must be square");
    const Eigen::Index n = m.rows();

    bool integral = true;
    for (Eigen::Index i = 0; i < n && integral; ++i)
        for (Eigen::Index j = 0; j < n && integral; ++j)
            if (std::abs(m(i, j) - std::round(m(i, j))) > 1e-9) integral = false;

    // Faddeev-LeVerrier: M_1 = A, c_k = -tr(M_k)/k, M_{k+1} = A (M_k + c_k I).
    Vector coeffs(n + 1);
    coeffs[0] = 1.0;
    Matrix mk = m;
    for (Eigen::Index k = 1; k <= n; ++k) {
        double c = -mk.trace() / static_cast<double>(k);
        coeffs[k] = c;
        if (k < n) mk = m * (mk + c * Matrix::Identity(n, n));
    }
    if (integral) {
        for (Eigen::Index k = 0; k <= n; ++k) {
            double r = std::round(coeffs[k]);
            if (std::abs(coeffs[k] - r) < 1e-6) coeffs[k] = r;
        }
    }
    return coeffs;
}

bool is_cospectral(const GraphShift& a, const GraphShift& b, double tol) {
    if (a.n() != b.n())
        throw validation_error("is_cospectral: graphs have different node counts");
    Vector ea = eig_sym(a.matrix).values;
    Vector eb = eig_sym(b.matrix).values;
    return ((ea - eb).cwiseAbs().maxCoeff() <= tol);
}

std::vector<std::pair<int, int>> edge_support(const Matrix& m, double threshold) {
    std::vector<std::pair<int, int>> edges;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j)) >= threshold) edges.emplace_back(int(i), int(j));
    return edges;
}

bool is_connected(const Matrix& m, double threshold) {
    const Eigen::Index n = m.rows();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::queue<Eigen::Index> q;
    q.push(0);
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!q.empty()) {
        Eigen::Index u = q.front();
        q.pop();
        for (Eigen::Index v = 0; v < n; ++v) {
            if (v != u && !seen[v] && std::abs(m(u, v)) >= threshold) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

} // namespace netid
