#include "apsel/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "apsel/association_map.hpp"

namespace apsel {

void AssignmentInstance::validate() const {
  if (feasible.rows() != benefit.rows() || feasible.cols() != benefit.cols())
    throw std::invalid_argument("assignment instance: benefit and feasibility shapes differ");
  if (!benefit.allFinite() || (benefit.array() < 0.0).any())
    throw std::invalid_argument("assignment instance: benefits must be finite and >= 0");
}

double objective_of(const AssignmentInstance& instance, const std::vector<int>& ap_of_sta) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(ap_of_sta.size()); ++i) {
    if (ap_of_sta[i] != kUnassociated) total += instance.benefit(i, ap_of_sta[i]);
  }
  return total;
}

AssignmentSolution solve_exact(const AssignmentInstance& instance) {
  instance.validate();
  AssignmentSolution s;
  s.ap_of_sta.assign(instance.num_stas(), kUnassociated);
  for (int i = 0; i < instance.num_stas(); ++i) {
    int best = kUnassociated;
    for (int j = 0; j < instance.num_aps(); ++j) {
      if (!instance.feasible(i, j)) continue;
      if (best == kUnassociated || instance.benefit(i, j) > instance.benefit(i, best)) best = j;
    }
    s.ap_of_sta[i] = best;
  }
  s.objective = objective_of(instance, s.ap_of_sta);
  return s;
}

AssignmentSolution solve_bruteforce(const AssignmentInstance& instance) {
  instance.validate();
  const int n = instance.num_stas();
  const int m = instance.num_aps();
  if (n * std::log(m + 1.0) > std::log(kBruteForceLimit))
    throw std::length_error("solve_bruteforce: (M+1)^N exceeds the enumeration limit");

  // Choices per row: its feasible APs, or only "unassociated" when there are none.
  std::vector<std::vector<int>> choices(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (instance.feasible(i, j)) choices[i].push_back(j);
    }
    if (choices[i].empty()) choices[i].push_back(kUnassociated);
  }

  std::vector<std::size_t> digit(n, 0);
  std::vector<int> current(n);
  AssignmentSolution best;
  bool first = true;
  while (true) {
    for (int i = 0; i < n; ++i) current[i] = choices[i][digit[i]];
    const double value = objective_of(instance, current);
    if (first || value > best.objective) {
      best.ap_of_sta = current;
      best.objective = value;
      first = false;
    }
    int k = n - 1;
    while (k >= 0 && ++digit[k] == choices[k].size()) digit[k--] = 0;
    if (k < 0) break;
  }
  return best;
}

}  // namespace apsel
