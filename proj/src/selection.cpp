#include "fedsel/selection.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace fedsel {

SelectionInstance feasible_filter(std::span<const Device> devices, std::span<const LinkBudget> links,
                                  double alpha, double t_upd_s, std::int64_t capacity_bytes) {
  if (devices.size() != links.size()) {
    throw std::invalid_argument("feasible_filter: need one link budget per device");
  }
  SelectionInstance inst;
  inst.capacity_bytes = capacity_bytes;
  inst.round_budget_s = t_upd_s;
  if (devices.empty()) return inst;

  const auto w = weights(devices);
  inst.items.reserve(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& d = devices[i];
    const double delay = compute_delay(d, alpha) + comm_delay(d.update_bytes, links[i].rate_bps);
    inst.items.push_back({d.id, w[i], d.update_bytes, d.dataset_bytes, delay <= t_upd_s, links[i].snr_linear});
  }
  return inst;
}

SelectionResult make_result(const SelectionInstance& instance, std::vector<int> selected_ids) {
  std::sort(selected_ids.begin(), selected_ids.end());
  std::unordered_map<int, const SelectionItem*> by_id;
  SelectionResult r;
  for (const auto& it : instance.items) {
    by_id.emplace(it.device_id, &it);
    if (it.feasible) ++r.n_feasible;
  }
  // Sum in id order so the objective does not depend on the solver's scan order.
  for (int id : selected_ids) {
    const auto* it = by_id.at(id);
    r.objective += it->value;
    r.total_update_bytes += it->size_bytes;
    r.total_sensed_bytes += it->sensed_bytes;
  }
  r.selected_ids = std::move(selected_ids);
  return r;
}

namespace {

std::vector<const SelectionItem*> feasible_items(const SelectionInstance& instance) {
  std::vector<const SelectionItem*> out;
  for (const auto& it : instance.items) {
    if (it.feasible) out.push_back(&it);
  }
  return out;
}

SelectionResult scan_in_order(const SelectionInstance& instance, std::span<const SelectionItem* const> order) {
  std::vector<int> chosen;
  std::int64_t remaining = instance.capacity_bytes;
  for (const auto* it : order) {
    if (it->size_bytes <= remaining) {
      chosen.push_back(it->device_id);
      remaining -= it->size_bytes;
    }
  }
  return make_result(instance, std::move(chosen));
}

}  // namespace

SelectionResult greedy_select(const SelectionInstance& instance) {
  auto order = feasible_items(instance);
  std::sort(order.begin(), order.end(), [](const SelectionItem* a, const SelectionItem* b) {
    const double za = a->value / static_cast<double>(a->size_bytes);
    const double zb = b->value / static_cast<double>(b->size_bytes);
    if (za != zb) return za > zb;
    if (a->size_bytes != b->size_bytes) return a->size_bytes < b->size_bytes;
    return a->device_id < b->device_id;
  });
  return scan_in_order(instance, order);
}

SelectionResult best_sinr_select(const SelectionInstance& instance) {
  auto order = feasible_items(instance);
  std::sort(order.begin(), order.end(), [](const SelectionItem* a, const SelectionItem* b) {
    if (a->snr_linear != b->snr_linear) return a->snr_linear > b->snr_linear;
    return a->device_id < b->device_id;
  });
  return scan_in_order(instance, order);
}

SelectionResult dp_optimal_select(const SelectionInstance& instance, std::int64_t quantum_bytes,
                                  std::int64_t max_cells) {
  if (quantum_bytes < 1) throw std::invalid_argument("dp_optimal_select: quantum must be >= 1");
  auto items = feasible_items(instance);
  std::sort(items.begin(), items.end(),
            [](const SelectionItem* a, const SelectionItem* b) { return a->device_id < b->device_id; });

  const std::int64_t cap = std::max<std::int64_t>(instance.capacity_bytes, 0) / quantum_bytes;
  const auto n = static_cast<std::int64_t>(items.size());
  if (n > 0 && (cap + 1) > max_cells / n) {
    throw WorkBoundExceeded("dp_optimal_select: " + std::to_string(n) + " items x " + std::to_string(cap + 1) +
                            " capacity cells exceeds bound " + std::to_string(max_cells));
  }

  const auto width = static_cast<std::size_t>(cap + 1);
  std::vector<double> best(width, 0.0);
  std::vector<bool> take(static_cast<std::size_t>(n) * width, false);
  std::vector<std::int64_t> qsize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    qsize[i] = (items[i]->size_bytes + quantum_bytes - 1) / quantum_bytes;
    const auto s = qsize[i];
    if (s > cap) continue;
    for (std::int64_t c = cap; c >= s; --c) {
      const double with = best[static_cast<std::size_t>(c - s)] + items[i]->value;
      if (with > best[static_cast<std::size_t>(c)]) {
        best[static_cast<std::size_t>(c)] = with;
        take[i * width + static_cast<std::size_t>(c)] = true;
      }
    }
  }

  std::vector<int> chosen;
  std::int64_t c = cap;
  for (std::size_t i = items.size(); i-- > 0;) {
    if (take[i * width + static_cast<std::size_t>(c)]) {
      chosen.push_back(items[i]->device_id);
      c -= qsize[i];
    }
  }
  return make_result(instance, std::move(chosen));
}

}  // namespace fedsel
