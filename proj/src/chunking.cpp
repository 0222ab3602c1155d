#include "meshflow/chunking.hpp"

#include <algorithm>
#include <cmath>

namespace meshflow {

namespace {

std::size_t auto_chunk_size(std::size_t set_size, std::size_t workers) {
  if (set_size == 0) return 1;
  std::size_t c = set_size / (4 * std::max<std::size_t>(1, workers));
  return std::clamp<std::size_t>(c, 1, set_size);
}

ChunkPlan split(std::size_t set_size, std::size_t chunk) {
  ChunkPlan plan;
  for (std::size_t off = 0; off < set_size; off += chunk)
    plan.blocks.push_back({off, std::min(chunk, set_size - off)});
  return plan;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ChunkPlan plan_chunks(std::size_t set_size, const ExecutionPolicy& policy,
                      std::size_t workers, const ChunkGroupTable* groups,
                      const std::string& loop_name) {
  if (set_size == 0) return {};
  switch (policy.chunk.kind) {
    case ChunkPolicy::Kind::Fixed: {
      std::size_t c = std::clamp<std::size_t>(policy.chunk.fixed_size, 1, set_size);
      return split(set_size, c);
    }
    case ChunkPolicy::Kind::Auto:
      return split(set_size, auto_chunk_size(set_size, workers));
    case ChunkPolicy::Kind::PersistentAuto: {
      if (groups) {
        auto c = groups->planned_chunk(policy.chunk.group, loop_name, set_size);
        if (c) return split(set_size, *c);
      }
      return split(set_size, auto_chunk_size(set_size, workers));
    }
  }
  return {};
}

std::optional<std::size_t> ChunkGroupTable::planned_chunk(
    int group, const std::string& loop, std::size_t set_size) const {
  std::lock_guard lk(mu_);
  auto git = groups_.find(group);
  if (git == groups_.end() || !git->second.calibrated) return std::nullopt;
  auto cit = git->second.cost_per_elem_s.find(loop);
  if (cit == git->second.cost_per_elem_s.end() || cit->second <= 0)
    return std::nullopt;
  auto c = std::size_t(std::llround(git->second.t_ref_s / cit->second));
  return std::clamp<std::size_t>(c, 1, set_size);
}

void ChunkGroupTable::record(int group, const std::string& loop,
                             std::span<const ChunkTiming> timings) {
  std::vector<double> per_elem;
  std::vector<double> durations;
  std::size_t max_nelem = 0;
  for (const ChunkTiming& t : timings)
    max_nelem = std::max(max_nelem, t.nelem);
  for (const ChunkTiming& t : timings) {
    if (t.nelem == 0) continue;
    double d = double(t.end_ns - t.start_ns) * 1e-9;
    per_elem.push_back(d / double(t.nelem));
    // T_ref comes from full-size chunks only; the tail block would bias it.
    if (t.nelem == max_nelem) durations.push_back(d);
  }
  if (per_elem.empty()) return;
  double cost = median(std::move(per_elem));
  double dur = median(std::move(durations));

  std::lock_guard lk(mu_);
  Group& g = groups_[group];
  if (!g.calibrated && dur > 0) {
    g.t_ref_s = dur;
    g.calibrated = true;
  }
  double& c = g.cost_per_elem_s[loop];
  c = c > 0 ? (1 - kSmoothing) * c + kSmoothing * cost : cost;
}

double ChunkGroupTable::t_ref(int group) const {
  std::lock_guard lk(mu_);
  auto it = groups_.find(group);
  return it == groups_.end() ? 0 : it->second.t_ref_s;
}

double ChunkGroupTable::cost_per_element(int group,
                                         const std::string& loop) const {
  std::lock_guard lk(mu_);
  auto it = groups_.find(group);
  if (it == groups_.end()) return 0;
  auto cit = it->second.cost_per_elem_s.find(loop);
  return cit == it->second.cost_per_elem_s.end() ? 0 : cit->second;
}

}  // namespace meshflow
