#pragma once

#include <vector>

namespace eagc {

/// Minimum-cost perfect assignment on a square cost matrix (row-major,
/// n x n) using the O(n^3) potential-based Kuhn-Munkres method.
/// Returns col_for_row, where col_for_row[i] is the column assigned to row i.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

}  // namespace eagc
