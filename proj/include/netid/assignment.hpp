#pragma once

#include <vector>

#include "netid/graph.hpp"

namespace netid {

/// Rectangular min-cost assignment instance, rows <= columns.
struct AssignmentProblem {
    Matrix cost; ///< m x n, finite entries
};

struct Assignment {
    std::vector<int> column_of_row; ///< injective row -> column map
    double total_cost = 0.0;
};

/// Minimum-cost injective assignment of every row to a distinct column.
/// Ties are broken toward the lexicographically smallest assignment vector.
/// Kuhn-Munkres with potentials; rectangular instances are padded internally.
Assignment solve_assignment(const AssignmentProblem& p);

/// Minimum-cost assignment restricted to strictly increasing columns
/// (ordered-subsequence selection), solved by dynamic programming in O(mn).
/// Ties again break toward the lexicographically smallest column vector.
Assignment solve_ordered_selection(const Matrix& cost);

} // namespace netid
