#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace meshflow {

// View of one indirect-INC map used for conflict detection.
struct IncMapView {
  std::span<const std::int32_t> table;
  int arity = 0;
};

// Per-element colors for an iteration set. Elements of the same color never
// increment a common indirect target, so one color can run fully parallel.
// An empty `colors` vector means the trivial single-color plan.
struct ColorPlan {
  std::vector<std::int32_t> colors;
  std::int32_t num_colors = 1;

  bool trivial() const { return colors.empty(); }
  std::int32_t color_of(std::size_t e) const {
    return trivial() ? 0 : colors[e];
  }
};

// Greedy coloring in ascending element order over the conflict relation
// "two elements map to a common target via any inc map". With no inc maps
// every element shares color 0.
ColorPlan color_iteration_set(std::size_t set_size,
                              std::span<const IncMapView> inc_maps);

}  // namespace meshflow
