#include "dbmatch/assignment.hpp"

#include <cmath>
#include <limits>

#include "dbmatch/errors.hpp"

namespace dbmatch {

std::vector<std::size_t> solve_max_assignment(const std::vector<double>& weights, std::size_t n) {
    if (weights.size() != n * n) {
        throw ValidationError("solve_max_assignment: weight matrix size mismatch");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) {
            throw ValidationError("solve_max_assignment: weights must be finite");
        }
    }
    if (n == 0) return {};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Minimization with costs = -weights; 1-indexed with a virtual column 0.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<bool> used(n + 1, false);

    auto cost = [&](std::size_t i, std::size_t j) { return -weights[(i - 1) * n + (j - 1)]; };

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> row_for_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_for_col[j - 1] = p[j] - 1;
    return row_for_col;
}

double assignment_weight(const std::vector<double>& weights, std::size_t n,
                         const std::vector<std::size_t>& row_for_col) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += weights[row_for_col[j] * n + j];
    return total;
}

}  // namespace dbmatch
