#pragma once

#include <Eigen/Dense>

#include <vector>

namespace apsel {

/// Per-STA rows, per-AP columns. Infeasible cells are never selected.
struct AssignmentInstance {
  Eigen::MatrixXd benefit;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;

  int num_stas() const { return static_cast<int>(benefit.rows()); }
  int num_aps() const { return static_cast<int>(benefit.cols()); }
  /// Throws std::invalid_argument on shape mismatch, negative or non-finite benefits.
  void validate() const;
};

struct AssignmentSolution {
  // AP per STA, or kUnassociated when the row has no feasible cell.
  std::vector<int> ap_of_sta;
  double objective = 0.0;
};

/// Sum of the selected benefits.
double objective_of(const AssignmentInstance& instance, const std::vector<int>& ap_of_sta);

/// Optimal assignment. Rows are independent, so each STA takes its best
/// feasible AP; ties go to the lowest index.
AssignmentSolution solve_exact(const AssignmentInstance& instance);

inline constexpr double kBruteForceLimit = 1e7;

/// Enumerates every assignment, leaving a STA unassociated only when its row is
/// empty. Throws std::length_error when (M+1)^N exceeds kBruteForceLimit.
AssignmentSolution solve_bruteforce(const AssignmentInstance& instance);

}  // namespace apsel
