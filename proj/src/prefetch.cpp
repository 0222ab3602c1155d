#include "meshflow/prefetch.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>

namespace meshflow {

std::size_t prefetch_distance(unsigned distance_factor,
                              std::size_t max_elem_bytes,
                              std::size_t cache_line_bytes) {
  std::size_t lines = max_elem_bytes == 0
                          ? 1
                          : std::max<std::size_t>(1, cache_line_bytes / max_elem_bytes);
  return std::max<std::size_t>(1, std::size_t(distance_factor) * lines);
}

PrefetchContext make_prefetcher_context(std::size_t begin, std::size_t end,
                                        unsigned distance_factor,
                                        std::vector<PrefetchView> containers,
                                        std::size_t cache_line_bytes) {
  if (begin > end) throw RangeError("prefetcher range: begin > end");
  if (containers.empty())
    throw EmptyContainers("prefetcher context needs at least one container");
  if (distance_factor == 0)
    throw RangeError("prefetch_distance_factor must be positive");
  std::size_t max_elem = 0;
  for (const PrefetchView& v : containers) {
    if (v.length < end)
      throw RangeError("container does not cover the iteration range");
    max_elem = std::max(max_elem, v.elem_bytes);
  }
  PrefetchContext ctx;
  ctx.begin_ = begin;
  ctx.end_ = end;
  ctx.distance_ = prefetch_distance(distance_factor, max_elem, cache_line_bytes);
  ctx.views_ = std::move(containers);
  return ctx;
}

namespace {

void run_span(const PrefetchContext& ctx, std::size_t lo, std::size_t hi,
              const std::function<void(std::size_t)>& body) {
  for (std::size_t i = lo; i < hi; ++i) {
    ctx.maybe_hint(i);
    body(i);
  }
}

}  // namespace

void for_each_prefetched(const PrefetchContext& ctx, ExecMode mode,
                         ThreadPool* pool,
                         const std::function<void(std::size_t)>& body) {
  std::size_t len = ctx.end() - ctx.begin();
  if (len == 0) return;
  if (!chunks_parallel(mode) || !pool || pool->size() <= 1) {
    run_span(ctx, ctx.begin(), ctx.end(), body);
    return;
  }

  std::size_t chunk =
      std::clamp<std::size_t>(len / (4 * pool->size()), 1, len);
  std::size_t njobs = (len + chunk - 1) / chunk;

  std::mutex mu;
  std::condition_variable cv;
  std::size_t left = njobs;
  std::exception_ptr err;

  for (std::size_t j = 0; j < njobs; ++j) {
    std::size_t lo = ctx.begin() + j * chunk;
    std::size_t hi = std::min(lo + chunk, ctx.end());
    pool->post([&, lo, hi] {
      std::exception_ptr e;
      try {
        run_span(ctx, lo, hi, body);
      } catch (...) {
        e = std::current_exception();
      }
      std::lock_guard lk(mu);
      if (e && !err) err = e;
      if (--left == 0) cv.notify_all();
    });
  }
  std::unique_lock lk(mu);
  cv.wait(lk, [&] { return left == 0; });
  if (err) std::rethrow_exception(err);
}

}  // namespace meshflow
