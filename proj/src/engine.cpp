#include "meshflow/engine.hpp"

#include "meshflow/prefetch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <set>
#include <sstream>

#include <json.hpp>

namespace meshflow {

namespace {

std::uint64_t now_ns() {
  return std::uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now().time_since_epoch())
                           .count());
}

std::size_t default_workers() {
  if (const char* env = std::getenv("MESHFLOW_WORKERS")) {
    long v = std::atol(env);
    if (v > 0) return std::size_t(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

void add_into(ScalarKind kind, std::byte* dst, const std::byte* src, int dim) {
  switch (kind) {
    case ScalarKind::F64: {
      auto* d = reinterpret_cast<double*>(dst);
      auto* s = reinterpret_cast<const double*>(src);
      for (int i = 0; i < dim; ++i) d[i] += s[i];
      break;
    }
    case ScalarKind::F32: {
      auto* d = reinterpret_cast<float*>(dst);
      auto* s = reinterpret_cast<const float*>(src);
      for (int i = 0; i < dim; ++i) d[i] += s[i];
      break;
    }
    case ScalarKind::I32: {
      auto* d = reinterpret_cast<std::int32_t*>(dst);
      auto* s = reinterpret_cast<const std::int32_t*>(src);
      for (int i = 0; i < dim; ++i) d[i] += s[i];
      break;
    }
  }
}

}  // namespace

// Internal record of one submitted loop.
struct TaskRec {
  std::uint64_t id = 0;
  std::string name;
  SetId set{};
  std::size_t set_size = 0;
  std::vector<LoopArg> args;
  Kernel kernel;
  ExecutionPolicy policy;

  std::vector<std::uint64_t> dep_ids;
  std::vector<std::uint64_t> dependents;  // guarded by Runtime::mu_
  std::size_t remaining = 0;              // guarded by Runtime::mu_
  bool done = false;                      // guarded by Runtime::mu_
  bool poisoned = false;                  // guarded by Runtime::mu_
  std::string error_msg;

  std::vector<DatId> out_dats;
  std::vector<GblId> out_cells;

  // Execution state, owned by the running task.
  ChunkPlan plan;
  std::shared_ptr<const ColorPlan> colors;
  std::vector<ChunkTiming> timings;  // nblocks * num_colors slots
  std::atomic<std::size_t> phase_left{0};
  std::atomic<bool> panicked{false};
  std::mutex panic_mu;
  std::string panic_msg;

  struct RArg {
    std::byte* base = nullptr;  // dat storage, gbl storage, or gbl staging
    std::size_t stride = 0;
    const std::int32_t* table = nullptr;
    int arity = 0;
    int slot = 0;
    ScalarKind kind = ScalarKind::F64;
    int dim = 0;
    bool is_dat_inc = false;
    int scratch = -1;  // scratch buffer index for INC dat args
  };
  std::vector<RArg> rargs;
  std::size_t n_scratch = 0;
  std::vector<std::vector<std::byte>> gbl_staging;
  std::vector<std::pair<GblId, int>> gbl_inc;  // (cell, staging index)

  std::size_t pf_distance = 0;
  std::vector<std::pair<const std::byte*, std::size_t>> pf_views;
};

Runtime::Runtime(RuntimeOptions opts)
    : pool_(opts.workers ? opts.workers : default_workers()),
      cache_line_bytes_(opts.cache_line_bytes) {}

Runtime::~Runtime() {
  try {
    wait_all();
  } catch (...) {
    // failures were already surfaced through tokens; nothing to do here
  }
}

// --- declarations ------------------------------------------------------

SetId Runtime::decl_set(std::size_t size, std::string name) {
  std::lock_guard lk(mu_);
  return mesh_.decl_set(size, std::move(name));
}

MapId Runtime::decl_map(SetId from, SetId to, int arity,
                        std::span<const std::int32_t> table,
                        std::string name) {
  std::lock_guard lk(mu_);
  return mesh_.decl_map(from, to, arity, table, std::move(name));
}

DatId Runtime::decl_dat_raw(SetId set, int dim, ScalarKind kind,
                            std::span<const std::byte> init,
                            std::string name) {
  std::lock_guard lk(mu_);
  DatId id = mesh_.decl_dat(set, dim, kind, init, std::move(name));
  dat_sched_.resize(mesh_.num_dats());
  return id;
}

DatId Runtime::decl_dat(SetId set, int dim, std::span<const double> init,
                        std::string name) {
  return decl_dat_raw(set, dim, ScalarKind::F64, as_bytes_of(init),
                      std::move(name));
}

DatId Runtime::decl_dat(SetId set, int dim, std::span<const float> init,
                        std::string name) {
  return decl_dat_raw(set, dim, ScalarKind::F32, as_bytes_of(init),
                      std::move(name));
}

DatId Runtime::decl_dat(SetId set, int dim, std::span<const std::int32_t> init,
                        std::string name) {
  return decl_dat_raw(set, dim, ScalarKind::I32, as_bytes_of(init),
                      std::move(name));
}

GblId Runtime::decl_gbl(int dim, std::span<const double> init,
                        std::string name) {
  std::lock_guard lk(mu_);
  GblId id = mesh_.decl_gbl(dim, ScalarKind::F64, as_bytes_of(init),
                            std::move(name));
  gbl_sched_.resize(id.value);
  return id;
}

GblId Runtime::decl_gbl(int dim, std::span<const std::int32_t> init,
                        std::string name) {
  std::lock_guard lk(mu_);
  GblId id = mesh_.decl_gbl(dim, ScalarKind::I32, as_bytes_of(init),
                            std::move(name));
  gbl_sched_.resize(id.value);
  return id;
}

// --- submission --------------------------------------------------------

void Runtime::validate_args(SetId iter_set,
                            const std::vector<LoopArg>& args) const {
  for (const LoopArg& a : args) {
    if (a.kind == LoopArg::Kind::Gbl) {
      mesh_.gbl(a.cell);
      if (a.mode != AccessMode::Read && a.mode != AccessMode::Inc)
        throw InvalidArg("global arguments support READ or INC only");
      continue;
    }
    const DatInfo& d = mesh_.dat(a.dat);
    if (a.direct()) {
      if (!(d.set == iter_set))
        throw InvalidArg("direct arg on dat '" + d.name +
                         "' declared on a different set than the loop");
    } else {
      const MapInfo& m = mesh_.map(a.map);
      if (!(m.to == d.set))
        throw InvalidArg("map '" + m.name + "' does not target the set of dat '" +
                         d.name + "'");
      if (!(m.from == iter_set))
        throw InvalidArg("map '" + m.name + "' does not start at the loop's set");
      if (a.map_slot < 0 || a.map_slot >= m.arity)
        throw InvalidArg("map_slot out of range for map '" + m.name + "'");
    }
  }
}

std::vector<DeferredValue> Runtime::submit_loop(std::string name,
                                                SetId iter_set,
                                                std::vector<LoopArg> args,
                                                Kernel kernel,
                                                ExecutionPolicy policy) {
  validate_args(iter_set, args);

  std::unique_lock lk(mu_);
  const SetInfo& s = mesh_.set(iter_set);

  auto t = std::make_unique<TaskRec>();
  TaskRec* tp = t.get();
  tp->id = tasks_.size() + 1;
  tp->name = std::move(name);
  tp->set = iter_set;
  tp->set_size = s.size;
  tp->args = std::move(args);
  tp->kernel = std::move(kernel);
  tp->policy = policy;

  // Aggregate per resource in first-appearance order.
  struct Touch {
    bool gbl;
    std::uint32_t res;
    bool writes = false;
  };
  std::vector<Touch> touches;
  auto touch = [&](bool gbl, std::uint32_t res, bool writes) {
    for (Touch& x : touches)
      if (x.gbl == gbl && x.res == res) {
        x.writes |= writes;
        return;
      }
    touches.push_back({gbl, res, writes});
  };
  for (const LoopArg& a : tp->args) {
    if (a.kind == LoopArg::Kind::Gbl)
      touch(true, a.cell.value, a.mode == AccessMode::Inc);
    else
      touch(false, a.dat.value, a.mode != AccessMode::Read);
  }

  std::set<std::uint64_t> deps;
  auto add_dep = [&](std::uint64_t p, bool gbl, std::uint32_t res) {
    if (p == 0 || p == tp->id) return;
    edges_.push_back({p, tp->id, gbl, res});
    TaskRec* pt = tasks_[p - 1].get();
    if (!pt->done) {
      deps.insert(p);
    } else if (pt->poisoned && !tp->poisoned) {
      tp->poisoned = true;
      tp->error_msg = pt->error_msg;
    }
  };

  std::vector<DeferredValue> tokens;
  for (const Touch& x : touches) {
    DatSched& ds = x.gbl ? gbl_sched_[x.res - 1] : dat_sched_[x.res - 1];
    add_dep(ds.last_producer, x.gbl, x.res);
    if (x.writes) {
      // WAR: overwriting the current version waits for all its readers.
      for (std::uint64_t r : ds.readers) add_dep(r, x.gbl, x.res);
      ds.readers.clear();
      ds.last_producer = tp->id;
      ++ds.next_version;
      DeferredValue tok;
      tok.task = tp->id;
      tok.version = ds.next_version;
      if (x.gbl) {
        tok.is_gbl = true;
        tok.cell = GblId{x.res};
        tp->out_cells.push_back(tok.cell);
      } else {
        tok.dat = DatId{x.res};
        tp->out_dats.push_back(tok.dat);
      }
      tokens.push_back(tok);
    } else {
      ds.readers.push_back(tp->id);
    }
  }

  tp->dep_ids.assign(deps.begin(), deps.end());
  tp->remaining = deps.size();
  for (std::uint64_t d : deps) tasks_[d - 1]->dependents.push_back(tp->id);
  tasks_.push_back(std::move(t));

  if (tp->remaining == 0) {
    if (tp->set_size == 0) {
      // No kernel to run and nothing to wait for: complete in place so the
      // returned tokens are ready immediately.
      finalize_locked(tp);
    } else {
      lk.unlock();
      pool_.post([this, tp] { run_task(tp); });
    }
  }
  return tokens;
}

// --- execution ---------------------------------------------------------

std::shared_ptr<const ColorPlan> Runtime::colors_for(
    SetId set, const std::vector<LoopArg>& args) {
  std::vector<std::uint32_t> map_ids;
  for (const LoopArg& a : args)
    if (a.kind == LoopArg::Kind::Dat && a.mode == AccessMode::Inc && !a.direct())
      map_ids.push_back(a.map.value);
  std::sort(map_ids.begin(), map_ids.end());
  map_ids.erase(std::unique(map_ids.begin(), map_ids.end()), map_ids.end());
  if (map_ids.empty()) {
    static const auto trivial = std::make_shared<const ColorPlan>();
    return trivial;
  }

  std::vector<std::uint32_t> key;
  key.push_back(set.value);
  key.insert(key.end(), map_ids.begin(), map_ids.end());

  std::lock_guard lk(mu_);
  auto it = color_cache_.find(key);
  if (it != color_cache_.end()) return it->second;
  std::vector<IncMapView> views;
  for (std::uint32_t m : map_ids) {
    const MapInfo& mi = mesh_.map(MapId{m});
    views.push_back({std::span<const std::int32_t>(mi.table), mi.arity});
  }
  auto plan = std::make_shared<const ColorPlan>(
      color_iteration_set(mesh_.set(set).size, views));
  color_cache_.emplace(std::move(key), plan);
  return plan;
}

void Runtime::run_task(TaskRec* t) {
  bool poisoned;
  std::unique_lock lk(mu_);
  if (!t->poisoned) {
    for (std::uint64_t d : t->dep_ids) {
      TaskRec* dep = tasks_[d - 1].get();
      if (dep->poisoned) {
        t->poisoned = true;
        t->error_msg = dep->error_msg;
        break;
      }
    }
  }
  poisoned = t->poisoned;
  if (poisoned) {
    finalize_locked(t);
    return;
  }

  // Resolve argument bases under the lock: the registry vectors may still
  // grow from driver-side declarations, but the storage buffers they own
  // never move, so the raw pointers stay valid afterwards.
  t->rargs.clear();
  t->gbl_staging.clear();
  t->gbl_inc.clear();
  t->n_scratch = 0;
  std::size_t max_direct_stride = 0;
  for (const LoopArg& a : t->args) {
    TaskRec::RArg r;
    if (a.kind == LoopArg::Kind::Gbl) {
      GblInfo& g = mesh_.gbl_mut(a.cell);
      r.kind = g.kind;
      r.dim = g.dim;
      r.stride = scalar_size(g.kind) * std::size_t(g.dim);
      if (a.mode == AccessMode::Inc) {
        int idx = int(t->gbl_staging.size());
        t->gbl_staging.emplace_back(t->set_size * r.stride, std::byte{0});
        t->gbl_inc.emplace_back(a.cell, idx);
        r.base = t->gbl_staging[std::size_t(idx)].data();
        r.arity = -1;  // marks "per-element staging row"
      } else {
        r.base = g.storage.data();
        r.arity = -2;  // marks "shared cell"
      }
    } else {
      DatInfo& d = mesh_.dat_mut(a.dat);
      r.base = d.storage.data();
      r.kind = d.kind;
      r.dim = d.dim;
      r.stride = d.elem_bytes();
      if (!a.direct()) {
        const MapInfo& m = mesh_.map(a.map);
        r.table = m.table.data();
        r.arity = m.arity;
        r.slot = a.map_slot;
      }
      if (a.mode == AccessMode::Inc) {
        r.is_dat_inc = true;
        r.scratch = int(t->n_scratch++);
      }
      if (a.direct()) max_direct_stride = std::max(max_direct_stride, r.stride);
    }
    t->rargs.push_back(r);
  }

  t->pf_views.clear();
  t->pf_distance = 0;
  if (t->policy.prefetch_distance_factor > 0) {
    for (std::size_t i = 0; i < t->args.size(); ++i) {
      const LoopArg& a = t->args[i];
      if (a.kind == LoopArg::Kind::Dat && a.direct())
        t->pf_views.emplace_back(t->rargs[i].base, t->rargs[i].stride);
    }
    if (!t->pf_views.empty())
      t->pf_distance = prefetch_distance(t->policy.prefetch_distance_factor,
                                         max_direct_stride, cache_line_bytes_);
  }
  lk.unlock();

  t->plan = plan_chunks(t->set_size, t->policy, pool_.size(), &groups_, t->name);
  t->colors = colors_for(t->set, t->args);
  std::size_t ncolors = std::size_t(t->colors->num_colors);
  t->timings.assign(t->plan.nblocks() * ncolors, ChunkTiming{});

  if (t->plan.nblocks() == 0) {
    finalize(t);
    return;
  }

  if (!chunks_parallel(t->policy.mode)) {
    for (std::int32_t c = 0; c < t->colors->num_colors; ++c)
      for (std::uint32_t b = 0; b < t->plan.nblocks(); ++b)
        run_chunk(t, b, c);
    finalize(t);
    return;
  }
  start_phase(t, 0);
}

void Runtime::start_phase(TaskRec* t, std::int32_t color) {
  std::size_t nblocks = t->plan.nblocks();
  t->phase_left.store(nblocks, std::memory_order_relaxed);
  for (std::uint32_t b = 0; b < nblocks; ++b) {
    pool_.post([this, t, b, color] {
      run_chunk(t, b, color);
      if (t->phase_left.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        if (color + 1 < t->colors->num_colors)
          start_phase(t, color + 1);
        else
          finalize(t);
      }
    });
  }
}

void Runtime::run_chunk(TaskRec* t, std::uint32_t block, std::int32_t color) {
  const ChunkBlock& blk = t->plan.blocks[block];
  ChunkTiming& slot =
      t->timings[std::size_t(color) * t->plan.nblocks() + block];
  slot.task = t->id;
  slot.chunk = block;
  slot.color = color;
  slot.start_ns = now_ns();
  std::size_t executed = 0;

  if (!t->panicked.load(std::memory_order_relaxed)) {
    try {
      std::vector<void*> ptrs(t->rargs.size());
      std::vector<std::vector<std::byte>> scratch(t->n_scratch);
      for (const TaskRec::RArg& r : t->rargs)
        if (r.scratch >= 0)
          scratch[std::size_t(r.scratch)].assign(r.stride, std::byte{0});

      const ColorPlan& colors = *t->colors;
      KernelScope scope;
      scope.ptrs_ = ptrs.data();
      for (std::size_t n = blk.offset; n < blk.offset + blk.nelem; ++n) {
        if (t->pf_distance && n % t->pf_distance == 0) {
          std::size_t target = std::min(n + t->pf_distance, t->set_size - 1);
          for (auto& [base, stride] : t->pf_views)
            __builtin_prefetch(base + target * stride);
        }
        if (colors.color_of(n) != color) continue;

        for (std::size_t i = 0; i < t->rargs.size(); ++i) {
          const TaskRec::RArg& r = t->rargs[i];
          if (r.is_dat_inc) {
            auto& buf = scratch[std::size_t(r.scratch)];
            std::memset(buf.data(), 0, buf.size());
            ptrs[i] = buf.data();
          } else if (r.arity == -1) {
            ptrs[i] = r.base + n * r.stride;  // gbl INC staging row
          } else if (r.arity == -2) {
            ptrs[i] = r.base;  // shared gbl cell (read)
          } else if (r.table) {
            std::size_t m = std::size_t(
                r.table[n * std::size_t(r.arity) + std::size_t(r.slot)]);
            ptrs[i] = r.base + m * r.stride;
          } else {
            ptrs[i] = r.base + n * r.stride;
          }
        }
        scope.elem_ = n;
        t->kernel(scope);

        // Apply staged INC contributions; coloring makes this race-free.
        for (const TaskRec::RArg& r : t->rargs) {
          if (!r.is_dat_inc) continue;
          std::byte* target;
          if (r.table) {
            std::size_t m = std::size_t(
                r.table[n * std::size_t(r.arity) + std::size_t(r.slot)]);
            target = r.base + m * r.stride;
          } else {
            target = r.base + n * r.stride;
          }
          add_into(r.kind, target, scratch[std::size_t(r.scratch)].data(),
                   r.dim);
        }
        ++executed;
      }
    } catch (const std::exception& e) {
      std::lock_guard lk(t->panic_mu);
      if (!t->panicked.exchange(true)) t->panic_msg = e.what();
    } catch (...) {
      std::lock_guard lk(t->panic_mu);
      if (!t->panicked.exchange(true)) t->panic_msg = "unknown kernel error";
    }
  }

  slot.end_ns = now_ns();
  slot.nelem = executed;
}

void Runtime::finalize(TaskRec* t) {
  std::lock_guard lk(mu_);
  finalize_locked(t);
}

void Runtime::finalize_locked(TaskRec* t) {
  if (t->panicked.load() && !t->poisoned) {
    t->poisoned = true;
    t->error_msg = "task '" + t->name + "' failed: " + t->panic_msg;
  }
  if (t->poisoned) {
    if (!has_error_) {
      has_error_ = true;
      first_error_ = t->error_msg;
    }
  } else {
    // Fold global INC staging in ascending element order: deterministic and
    // independent of chunking and worker count.
    for (auto& [cell, idx] : t->gbl_inc) {
      GblInfo& g = mesh_.gbl_mut(cell);
      const std::vector<std::byte>& staging = t->gbl_staging[std::size_t(idx)];
      std::size_t row = scalar_size(g.kind) * std::size_t(g.dim);
      for (std::size_t n = 0; n < t->set_size; ++n)
        add_into(g.kind, g.storage.data(), staging.data() + n * row, g.dim);
    }
    if (t->policy.chunk.kind == ChunkPolicy::Kind::PersistentAuto)
      groups_.record(t->policy.chunk.group, t->name, t->timings);
  }

  for (DatId d : t->out_dats) mesh_.dat_mut(d).version += 1;

  t->done = true;
  ++completed_;
  for (std::uint64_t d : t->dependents) {
    TaskRec* dt = tasks_[d - 1].get();
    if (--dt->remaining == 0)
      pool_.post([this, dt] { run_task(dt); });
  }
  cv_.notify_all();
}

// --- driver-side waiting -----------------------------------------------

void Runtime::get(const DeferredValue& token) {
  if (token.task == 0) return;
  std::unique_lock lk(mu_);
  TaskRec* t = tasks_.at(token.task - 1).get();
  cv_.wait(lk, [t] { return t->done; });
  if (t->poisoned) throw TaskPanicked(t->error_msg);
}

bool Runtime::is_ready(const DeferredValue& token) const {
  if (token.task == 0) return true;
  std::lock_guard lk(mu_);
  return tasks_.at(token.task - 1)->done;
}

void Runtime::wait_all() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [this] { return completed_ == tasks_.size(); });
  if (has_error_) throw TaskPanicked(first_error_);
}

// --- observability ------------------------------------------------------

DependencyGraph Runtime::export_graph() const {
  std::lock_guard lk(mu_);
  DependencyGraph g;
  for (const auto& t : tasks_)
    g.nodes.push_back({t->id, t->name, mesh_.set(t->set).name});
  for (const EdgeRec& e : edges_) {
    std::string res = e.gbl ? "$gbl:" + mesh_.gbl(GblId{e.res}).name
                            : mesh_.dat(DatId{e.res}).name;
    g.edges.push_back({e.from, e.to, std::move(res)});
  }
  return g;
}

std::vector<ChunkTiming> Runtime::timing_log() const {
  std::lock_guard lk(mu_);
  std::vector<ChunkTiming> out;
  for (const auto& t : tasks_) {
    if (!t->done) continue;
    out.insert(out.end(), t->timings.begin(), t->timings.end());
  }
  return out;
}

std::string Runtime::task_name(std::uint64_t task_id) const {
  std::lock_guard lk(mu_);
  return tasks_.at(task_id - 1)->name;
}

std::string DependencyGraph::to_json() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  j["edges"] = nlohmann::json::array();
  for (const Node& n : nodes)
    j["nodes"].push_back({{"id", n.id}, {"name", n.name}, {"set", n.set}});
  for (const Edge& e : edges)
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"dat", e.dat}});
  return j.dump(2);
}

std::string DependencyGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph loops {\n";
  for (const Node& n : nodes)
    os << "  t" << n.id << " [label=\"" << n.name << " (" << n.set << ")\"];\n";
  for (const Edge& e : edges)
    os << "  t" << e.from << " -> t" << e.to << " [label=\"" << e.dat
       << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace meshflow
