#pragma once
// Exact maximum-weight bipartite assignment on a dense square matrix,
// via successive shortest augmenting paths with potentials. O(n^3).

#include <cstddef>
#include <vector>

namespace dbmatch {

// weights: row-major n x n, all finite. Returns row_for_col: the row index
// assigned to each column, maximizing the total weight. Throws
// ValidationError on non-finite input.
std::vector<std::size_t> solve_max_assignment(const std::vector<double>& weights, std::size_t n);

// Total weight of an assignment under the given matrix.
double assignment_weight(const std::vector<double>& weights, std::size_t n,
                         const std::vector<std::size_t>& row_for_col);

}  // namespace dbmatch
