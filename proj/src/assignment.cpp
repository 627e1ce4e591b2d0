#include "netid/assignment.hpp"

#include <cmath>
#include <limits>

namespace netid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kuhn-Munkres with row/column potentials (shortest augmenting paths).
// Rows m <= columns n; returns the matched column per row.
std::vector<int> km_core(const Matrix& a) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    std::vector<double> u(m + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= m; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col_of_row(m, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] > 0) col_of_row[match[j] - 1] = j - 1;
    return col_of_row;
}

double km_total(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    const std::vector<int> cols = km_core(a);
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(cols.size()); ++i) total += a(i, cols[i]);
    return total;
}

} // namespace

Assignment solve_assignment(const AssignmentProblem& p) {
    const int m = static_cast<int>(p.cost.rows());
    const int n = static_cast<int>(p.cost.cols());
    if (m > n)
        throw validation_error("solve_assignment: need rows <= columns");
    if (m == 0) return {{}, 0.0};
    for (Eigen::Index i = 0; i < p.cost.size(); ++i)
        if (!std::isfinite(p.cost.data()[i]))
            throw validation_error("solve_assignment: cost matrix has a non-finite entry");

    const double best = km_total(p.cost);
    const double tol = 1e-9 * (1.0 + std::abs(best));

    // Lexicographic refinement: fix rows in order to the smallest column
    // that still permits an optimal completion.
    Assignment out;
    out.column_of_row.assign(m, -1);
    std::vector<char> used(n, 0);
    double fixed_cost = 0.0;
    for (int i = 0; i < m; ++i) {
        std::vector<int> free_cols;
        for (int c = 0; c < n; ++c)
            if (!used[c]) free_cols.push_back(c);
        bool placed = false;
        for (int c : free_cols) {
            double rest = 0.0;
            if (i + 1 < m) {
                Matrix sub(m - i - 1, static_cast<Eigen::Index>(free_cols.size()) - 1);
                Eigen::Index sc = 0;
                for (int fc : free_cols) {
                    if (fc == c) continue;
                    for (int r = i + 1; r < m; ++r) sub(r - i - 1, sc) = p.cost(r, fc);
                    ++sc;
                }
                rest = km_total(sub);
            }
            if (fixed_cost + p.cost(i, c) + rest <= best + tol) {
                out.column_of_row[i] = c;
                used[c] = 1;
                fixed_cost += p.cost(i, c);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw numerical_error("solve_assignment: lexicographic refinement failed");
    }
    out.total_cost = fixed_cost;
    return out;
}

Assignment solve_ordered_selection(const Matrix& cost) {
    const int m = static_cast<int>(cost.rows());
    const int n = static_cast<int>(cost.cols());
    if (m > n)
        throw validation_error("solve_ordered_selection: need rows <= columns");
    if (m == 0) return {{}, 0.0};

    // g(i, j): best cost of matching targets i.. into positions j.. .
    Matrix g = Matrix::Constant(m + 1, n + 1, kInf);
    g.row(m).setZero();
    for (int i = m - 1; i >= 0; --i) {
        for (int j = n - (m - i); j >= 0; --j) {
            const double take = cost(i, j) + g(i + 1, j + 1);
            g(i, j) = std::min(take, g(i, j + 1));
        }
    }

    Assignment out;
    out.column_of_row.assign(m, -1);
    int j = 0;
    for (int i = 0; i < m; ++i) {
        while (cost(i, j) + g(i + 1, j + 1) > g(i, j + 1)) ++j;
        out.column_of_row[i] = j;
        out.total_cost += cost(i, j);
        ++j;
    }
    return out;
}

} // namespace netid
