#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "meshflow/types.hpp"

namespace meshflow {

// How chunks of a loop execute: Seq variants run chunks one after another on
// a single worker, Par variants spread chunks over the pool. The *Task
// variants only document driver-side asynchrony; every submitted loop is
// asynchronous at the task level regardless.
enum class ExecMode { Seq, Par, SeqTask, ParTask };

inline bool chunks_parallel(ExecMode m) {
  return m == ExecMode::Par || m == ExecMode::ParTask;
}

struct ChunkPolicy {
  enum class Kind { Fixed, Auto, PersistentAuto };
  Kind kind = Kind::Auto;
  std::size_t fixed_size = 0;
  int group = 0;

  static ChunkPolicy fixed(std::size_t n) {
    return ChunkPolicy{Kind::Fixed, n, 0};
  }
  static ChunkPolicy automatic() { return ChunkPolicy{Kind::Auto, 0, 0}; }
  static ChunkPolicy persistent(int group) {
    return ChunkPolicy{Kind::PersistentAuto, 0, group};
  }
};

struct ExecutionPolicy {
  ExecMode mode = ExecMode::Par;
  ChunkPolicy chunk = ChunkPolicy::automatic();
  // 0 disables in-loop prefetch hints; otherwise the distance factor fed to
  // the prefetch distance formula over the loop's direct containers.
  unsigned prefetch_distance_factor = 0;
};

struct ChunkBlock {
  std::size_t offset = 0;  // start index within the iteration set
  std::size_t nelem = 0;
};

// Ordered, disjoint blocks covering [0, set_size) exactly.
struct ChunkPlan {
  std::vector<ChunkBlock> blocks;
  std::size_t nblocks() const { return blocks.size(); }
};

// One measured chunk execution. Timestamps come from a monotonic clock.
struct ChunkTiming {
  std::uint64_t task = 0;
  std::uint32_t chunk = 0;
  std::int32_t color = 0;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;
  std::size_t nelem = 0;  // elements actually executed in this (chunk, color)
};

// Shared state behind persistent_auto_chunk_size. The first loop of a group
// that runs with an auto plan calibrates the reference chunk duration T_ref;
// later loops get chunk sizes of T_ref / cost_per_element so chunks of all
// member loops take about the same wall time. Cost estimates are smoothed
// across repeated submissions.
class ChunkGroupTable {
 public:
  // Chunk size to use for `loop` in `group`, or nullopt if the loop must
  // run an auto plan first (either to calibrate T_ref or to seed its own
  // per-element cost estimate).
  std::optional<std::size_t> planned_chunk(int group, const std::string& loop,
                                           std::size_t set_size) const;

  // Feed back measured chunk timings for one completed execution.
  void record(int group, const std::string& loop,
              std::span<const ChunkTiming> timings);

  double t_ref(int group) const;
  double cost_per_element(int group, const std::string& loop) const;

 private:
  struct Group {
    bool calibrated = false;
    double t_ref_s = 0;
    std::unordered_map<std::string, double> cost_per_elem_s;
  };
  mutable std::mutex mu_;
  std::unordered_map<int, Group> groups_;
  static constexpr double kSmoothing = 0.3;
};

// Partition [0, set_size) per the policy's chunk rule. For PersistentAuto,
// `groups` supplies the calibrated size; a null/uncalibrated group falls
// back to the auto rule of set_size / (4 * workers) blocks per worker.
ChunkPlan plan_chunks(std::size_t set_size, const ExecutionPolicy& policy,
                      std::size_t workers, const ChunkGroupTable* groups,
                      const std::string& loop_name);

}  // namespace meshflow
