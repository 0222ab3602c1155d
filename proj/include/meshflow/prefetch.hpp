#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "meshflow/chunking.hpp"
#include "meshflow/thread_pool.hpp"
#include "meshflow/types.hpp"

namespace meshflow {

// One container registered with a prefetcher context. base is addressed by
// absolute element index: element i lives at base + i * elem_bytes, valid
// for every i in [0, length).
struct PrefetchView {
  const std::byte* base = nullptr;
  std::size_t elem_bytes = 0;
  std::size_t length = 0;
};

template <class T>
PrefetchView view_of(std::span<const T> s) {
  return {reinterpret_cast<const std::byte*>(s.data()), sizeof(T), s.size()};
}

// Test/reporting hook: when installed, hints are counted instead of issued.
struct HintSink {
  virtual ~HintSink() = default;
  virtual void on_hint(std::size_t container, std::size_t index) = 0;
};

// Iteration range plus registered containers and the derived lookahead.
// Immutable after construction and shareable across workers. While iterating,
// every `distance()` indices one hint per container is issued for the element
// `distance()` ahead (clamped to the last index, never past the range).
class PrefetchContext {
 public:
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }
  std::size_t distance() const { return distance_; }
  std::size_t num_containers() const { return views_.size(); }
  const std::vector<PrefetchView>& containers() const { return views_; }

  void set_hint_sink(HintSink* sink) { sink_ = sink; }

  // Issue the hint batch due at index i, if any. Hints are semantically
  // invisible; bodies never observe them.
  void maybe_hint(std::size_t i) const {
    if ((i - begin_) % distance_ != 0) return;
    std::size_t target = i + distance_;
    if (target >= end_) target = end_ - 1;
    for (std::size_t c = 0; c < views_.size(); ++c) {
      if (sink_) {
        sink_->on_hint(c, target);
      } else {
        const PrefetchView& v = views_[c];
        __builtin_prefetch(v.base + target * v.elem_bytes);
      }
    }
  }

 private:
  friend PrefetchContext make_prefetcher_context(std::size_t, std::size_t,
                                                 unsigned,
                                                 std::vector<PrefetchView>,
                                                 std::size_t);
  std::size_t begin_ = 0, end_ = 0, distance_ = 1;
  std::vector<PrefetchView> views_;
  HintSink* sink_ = nullptr;
};

// distance = factor * max(1, cache_line_bytes / element_bytes) where
// element_bytes is the largest registered element (one shared conservative
// distance per context).
std::size_t prefetch_distance(unsigned distance_factor,
                              std::size_t max_elem_bytes,
                              std::size_t cache_line_bytes = 64);

PrefetchContext make_prefetcher_context(std::size_t begin, std::size_t end,
                                        unsigned distance_factor,
                                        std::vector<PrefetchView> containers,
                                        std::size_t cache_line_bytes = 64);

// Apply body to every index in ctx's range exactly once, ascending within
// each chunk, issuing hints along the way. Par mode needs a pool; pass
// nullptr (or Seq mode) for sequential iteration. Blocks the caller until
// the whole range is done; body errors propagate.
void for_each_prefetched(const PrefetchContext& ctx, ExecMode mode,
                         ThreadPool* pool,
                         const std::function<void(std::size_t)>& body);

}  // namespace meshflow
