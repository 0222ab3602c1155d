#include "meshflow/coloring.hpp"

#include <algorithm>

namespace meshflow {

ColorPlan color_iteration_set(std::size_t set_size,
                              std::span<const IncMapView> inc_maps) {
  if (inc_maps.empty() || set_size == 0) return {};

  // Per (map, target) list of already-colored elements touching that target.
  std::vector<std::vector<std::vector<std::int32_t>>> touched(inc_maps.size());
  for (std::size_t m = 0; m < inc_maps.size(); ++m) {
    std::int32_t max_target = -1;
    for (std::int32_t t : inc_maps[m].table)
      max_target = std::max(max_target, t);
    touched[m].resize(std::size_t(max_target + 1));
  }

  ColorPlan plan;
  plan.colors.assign(set_size, 0);
  std::vector<char> used;
  for (std::size_t e = 0; e < set_size; ++e) {
    used.assign(used.size(), 0);
    std::int32_t max_seen = -1;
    for (std::size_t m = 0; m < inc_maps.size(); ++m) {
      const IncMapView& mv = inc_maps[m];
      for (int s = 0; s < mv.arity; ++s) {
        std::int32_t t = mv.table[e * std::size_t(mv.arity) + std::size_t(s)];
        for (std::int32_t prev : touched[m][std::size_t(t)]) {
          std::int32_t c = plan.colors[std::size_t(prev)];
          if (std::size_t(c) >= used.size()) used.resize(std::size_t(c) + 1, 0);
          used[std::size_t(c)] = 1;
          max_seen = std::max(max_seen, c);
        }
      }
    }
    std::int32_t c = 0;
    while (c <= max_seen && std::size_t(c) < used.size() && used[std::size_t(c)])
      ++c;
    plan.colors[e] = c;
    plan.num_colors = std::max(plan.num_colors, c + 1);
    for (std::size_t m = 0; m < inc_maps.size(); ++m) {
      const IncMapView& mv = inc_maps[m];
      for (int s = 0; s < mv.arity; ++s) {
        std::int32_t t = mv.table[e * std::size_t(mv.arity) + std::size_t(s)];
        auto& lst = touched[m][std::size_t(t)];
        if (lst.empty() || lst.back() != std::int32_t(e))
          lst.push_back(std::int32_t(e));
      }
    }
  }
  return plan;
}

}  // namespace meshflow
