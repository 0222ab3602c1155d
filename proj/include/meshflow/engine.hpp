#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "meshflow/chunking.hpp"
#include "meshflow/coloring.hpp"
#include "meshflow/mesh.hpp"
#include "meshflow/thread_pool.hpp"
#include "meshflow/types.hpp"

namespace meshflow {

// One argument of a submitted loop: a dat accessed directly (the iterated
// element's own row) or through one slot of a map, or a global cell.
struct LoopArg {
  enum class Kind { Dat, Gbl };
  Kind kind = Kind::Dat;
  DatId dat{};
  MapId map{};      // value 0 = direct access
  int map_slot = -1;
  GblId cell{};
  AccessMode mode = AccessMode::Read;

  static LoopArg dat_direct(DatId d, AccessMode m) {
    LoopArg a;
    a.dat = d;
    a.mode = m;
    return a;
  }
  static LoopArg dat_via(DatId d, MapId map, int slot, AccessMode m) {
    LoopArg a;
    a.dat = d;
    a.map = map;
    a.map_slot = slot;
    a.mode = m;
    return a;
  }
  static LoopArg gbl(GblId g, AccessMode m) {
    LoopArg a;
    a.kind = Kind::Gbl;
    a.cell = g;
    a.mode = m;
    return a;
  }

  bool direct() const { return map.value == 0; }
};

// Per-element view handed to a kernel. Pointer i resolves argument i of the
// submitted loop: direct args point at the element's own row, indirect args
// at the mapped neighbor's row, INC args at a zeroed accumulation buffer
// the executor applies afterwards, global INC args at this element's
// contribution row. Kernels must be pure over these declared views.
class KernelScope {
 public:
  std::size_t element() const { return elem_; }
  double* f64(std::size_t arg) const {
    return static_cast<double*>(ptrs_[arg]);
  }
  float* f32(std::size_t arg) const { return static_cast<float*>(ptrs_[arg]); }
  std::int32_t* i32(std::size_t arg) const {
    return static_cast<std::int32_t*>(ptrs_[arg]);
  }

  std::size_t elem_ = 0;
  void* const* ptrs_ = nullptr;
};

using Kernel = std::function<void(const KernelScope&)>;

// Completion token for a dat version (or global cell state) produced by a
// submitted loop. Becomes ready exactly once, when the producing task's last
// chunk has completed; get() blocks only its caller.
struct DeferredValue {
  std::uint64_t task = 0;  // 0 = ready at issue time
  bool is_gbl = false;
  DatId dat{};
  GblId cell{};
  std::uint64_t version = 0;
};

// Snapshot of the task graph: one node per submitted loop, one edge per
// (producer, consumer, resource) dependency (RAW, WAR and WAW alike).
struct DependencyGraph {
  struct Node {
    std::uint64_t id = 0;
    std::string name;
    std::string set;
  };
  struct Edge {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    std::string dat;  // dat name, or "$gbl:<name>" for global cells
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::string to_json() const;
  std::string to_dot() const;
};

struct RuntimeOptions {
  // 0 = take MESHFLOW_WORKERS from the environment, falling back to the
  // hardware concurrency.
  std::size_t workers = 0;
  std::size_t cache_line_bytes = 64;
};

struct TaskRec;

// A single-node runtime instance: declaration registries plus the
// asynchronous loop engine. submit_loop/get/wait_all are driver-thread
// calls; execution happens on an internal worker pool.
class Runtime {
 public:
  explicit Runtime(RuntimeOptions opts = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  // --- declarations (driver thread only) ---
  SetId decl_set(std::size_t size, std::string name);
  MapId decl_map(SetId from, SetId to, int arity,
                 std::span<const std::int32_t> table, std::string name);
  DatId decl_dat(SetId set, int dim, std::span<const double> init,
                 std::string name);
  DatId decl_dat(SetId set, int dim, std::span<const float> init,
                 std::string name);
  DatId decl_dat(SetId set, int dim, std::span<const std::int32_t> init,
                 std::string name);
  DatId decl_dat_raw(SetId set, int dim, ScalarKind kind,
                     std::span<const std::byte> init, std::string name);
  GblId decl_gbl(int dim, std::span<const double> init, std::string name);
  GblId decl_gbl(int dim, std::span<const std::int32_t> init, std::string name);

  const MeshStore& mesh() const { return mesh_; }

  // --- loop engine ---
  // Registers the loop, wires its dependencies from the per-dat version
  // chains and returns one token per mutated dat (in argument order) plus
  // one per global INC cell. Never blocks on execution.
  std::vector<DeferredValue> submit_loop(std::string name, SetId iter_set,
                                         std::vector<LoopArg> args,
                                         Kernel kernel,
                                         ExecutionPolicy policy = {});

  // Blocks until the producing task completed; rethrows TaskPanicked for
  // tokens downstream of a failed kernel.
  void get(const DeferredValue& token);
  bool is_ready(const DeferredValue& token) const;

  // Drains every submitted task; reports the first stored failure.
  void wait_all();

  DependencyGraph export_graph() const;

  // Per-chunk timing records of all tasks submitted so far. Call after the
  // tasks of interest completed (e.g. post wait_all).
  std::vector<ChunkTiming> timing_log() const;
  // Loop name a task id belongs to (for per-loop breakdowns).
  std::string task_name(std::uint64_t task_id) const;

  template <class T>
  std::vector<T> read_gbl(GblId id) const {
    const GblInfo& g = mesh_.gbl(id);
    std::vector<T> out(std::size_t(g.dim));
    std::memcpy(out.data(), g.storage.data(), g.storage.size());
    return out;
  }

  std::size_t workers() const { return pool_.size(); }
  const ChunkGroupTable& chunk_groups() const { return groups_; }

 private:
  struct DatSched {
    std::uint64_t last_producer = 0;
    std::vector<std::uint64_t> readers;  // readers of the current version
    std::uint64_t next_version = 0;
  };

  void validate_args(SetId iter_set, const std::vector<LoopArg>& args) const;
  void schedule(TaskRec* t);
  void run_task(TaskRec* t);
  void start_phase(TaskRec* t, std::int32_t color);
  void run_chunk(TaskRec* t, std::uint32_t block, std::int32_t color);
  void finalize(TaskRec* t);
  void finalize_locked(TaskRec* t);
  std::shared_ptr<const ColorPlan> colors_for(SetId set,
                                              const std::vector<LoopArg>& args);

  MeshStore mesh_;
  ThreadPool pool_;
  ChunkGroupTable groups_;
  std::size_t cache_line_bytes_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<std::unique_ptr<TaskRec>> tasks_;
  std::vector<DatSched> dat_sched_;
  std::vector<DatSched> gbl_sched_;
  struct EdgeRec {
    std::uint64_t from, to;
    bool gbl;
    std::uint32_t res;
  };
  std::vector<EdgeRec> edges_;
  std::size_t completed_ = 0;
  std::string first_error_;
  bool has_error_ = false;
  std::map<std::vector<std::uint32_t>, std::shared_ptr<const ColorPlan>>
      color_cache_;
};

}  // namespace meshflow
