#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedsel/linkbudget.hpp"
#include "fedsel/population.hpp"

namespace fedsel {

struct SelectionItem {
  int device_id = 0;
  double value = 0.0;            // w_i
  std::int64_t size_bytes = 0;   // l_i
  std::int64_t sensed_bytes = 0; // D_i
  bool feasible = true;
  double snr_linear = 0.0;
};

/// One round's participant-selection knapsack.
struct SelectionInstance {
  std::vector<SelectionItem> items;
  std::int64_t capacity_bytes = 0;  // L_max
  double round_budget_s = std::numeric_limits<double>::infinity();  // T_upd
};

struct SelectionResult {
  std::vector<int> selected_ids;  // ascending
  double objective = 0.0;
  std::int64_t total_update_bytes = 0;
  std::int64_t total_sensed_bytes = 0;
  int n_feasible = 0;
};

/// Thrown by dp_optimal_select when the table would exceed the work bound.
class WorkBoundExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the instance for one round. An item is feasible when its compute
/// plus upload delay fits in t_upd_s; values are weights over the whole
/// population, not only the feasible part.
SelectionInstance feasible_filter(std::span<const Device> devices, std::span<const LinkBudget> links,
                                  double alpha, double t_upd_s, std::int64_t capacity_bytes);

/// Ratio greedy: feasible items by w/l descending (ties: smaller l, then lower
/// id), one pass, skipping items that no longer fit.
SelectionResult greedy_select(const SelectionInstance& instance);

/// Feasible items by SNR descending (ties: lower id), same capacity scan.
SelectionResult best_sinr_select(const SelectionInstance& instance);

inline constexpr std::int64_t kDefaultDpMaxCells = 200'000'000;

/// Exact 0/1 knapsack by dynamic programming over quantized sizes. Sizes are
/// rounded up and the capacity down to multiples of quantum_bytes, so any
/// returned subset also satisfies the unquantized constraint. Exact when
/// quantum_bytes == 1. Throws WorkBoundExceeded if items x capacity cells
/// exceeds max_cells.
SelectionResult dp_optimal_select(const SelectionInstance& instance, std::int64_t quantum_bytes = 1,
                                  std::int64_t max_cells = kDefaultDpMaxCells);

/// Totals and objective for an arbitrary chosen subset of the instance.
SelectionResult make_result(const SelectionInstance& instance, std::vector<int> selected_ids);

}  // namespace fedsel
