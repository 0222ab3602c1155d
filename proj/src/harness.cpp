#include "meshflow/harness.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

namespace meshflow {

namespace {

struct OneRun {
  double wall_s = 0;
  std::uint64_t checksum = 0;
  std::map<std::string, double> loop_seconds;
};

OneRun run_once(const RunSpec& spec, RunMode mode, unsigned workers,
                ExecMode exec, unsigned prefetch) {
  Runtime rt(RuntimeOptions{workers});
  AirfoilMesh mesh = generate_mesh(rt, spec.bench);

  ExecutionPolicy policy;
  policy.mode = exec;
  policy.chunk = spec.chunk;

  auto t0 = std::chrono::steady_clock::now();
  AirfoilResult res = run_airfoil(rt, mesh, spec.bench, mode, policy, prefetch);
  auto t1 = std::chrono::steady_clock::now();

  OneRun out;
  out.wall_s = std::chrono::duration<double>(t1 - t0).count();
  out.checksum = res.checksum;
  for (const ChunkTiming& t : rt.timing_log())
    out.loop_seconds[rt.task_name(t.task)] +=
        double(t.end_ns - t.start_ns) * 1e-9;
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string chunk_name(const ChunkPolicy& c) {
  switch (c.kind) {
    case ChunkPolicy::Kind::Fixed:
      return "fixed:" + std::to_string(c.fixed_size);
    case ChunkPolicy::Kind::Auto:
      return "auto";
    case ChunkPolicy::Kind::PersistentAuto:
      return "persistent";
  }
  return "?";
}

ResultRow measure_cell(const RunSpec& spec, const std::string& mode_name,
                       RunMode mode, unsigned workers, ExecMode exec,
                       unsigned prefetch, std::uint64_t oracle) {
  run_once(spec, mode, workers, exec, prefetch);  // warm-up, discarded
  std::vector<double> walls;
  OneRun last;
  for (unsigned r = 0; r < spec.repetitions; ++r) {
    last = run_once(spec, mode, workers, exec, prefetch);
    if (oracle != 0 && last.checksum != oracle)
      throw ChecksumMismatch(
          "run (" + mode_name + ", workers=" + std::to_string(workers) +
          ", prefetch=" + std::to_string(prefetch) +
          ") disagrees with the sequential oracle; refusing to emit timings");
    walls.push_back(last.wall_s);
  }
  ResultRow row;
  row.mode = mode_name;
  row.workers = workers;
  row.chunk = chunk_name(spec.chunk);
  row.prefetch_distance = prefetch;
  row.repetitions = spec.repetitions;
  row.median_wall_s = median_of(std::move(walls));
  row.loop_seconds = std::move(last.loop_seconds);
  row.checksum = last.checksum;
  return row;
}

}  // namespace

MatrixResult run_matrix(const RunSpec& spec) {
  if (spec.repetitions < 3)
    throw ConfigError("repetitions must be >= 3 for timing claims");
  if (spec.workers.empty()) throw ConfigError("workers list is empty");
  if (spec.prefetch_distances.empty())
    throw ConfigError("prefetch distance list is empty");

  MatrixResult out;
  out.spec = spec;

  // Correctness gate first: the 1-worker sequential barrier run defines the
  // oracle checksum every cell must reproduce.
  ResultRow baseline = measure_cell(spec, "baseline", RunMode::Barrier, 1,
                                    ExecMode::Seq, 0, 0);
  out.oracle_checksum = baseline.checksum;
  double base_time = baseline.median_wall_s;
  baseline.speedup_vs_seq1 = 1.0;
  out.rows.push_back(baseline);

  std::string mode_name = spec.mode == RunMode::Barrier ? "barrier" : "dataflow";
  for (unsigned w : spec.workers)
    for (unsigned pf : spec.prefetch_distances) {
      ResultRow row = measure_cell(spec, mode_name, spec.mode, w, ExecMode::Par,
                                   pf, out.oracle_checksum);
      row.speedup_vs_seq1 = row.median_wall_s > 0
                                ? base_time / row.median_wall_s
                                : 0.0;
      out.rows.push_back(std::move(row));
    }

  // Short dataflow run for the dependency-graph artifact.
  {
    Runtime rt(RuntimeOptions{2});
    BenchConfig small = spec.bench;
    small.iterations = std::min<std::size_t>(small.iterations, 2);
    AirfoilMesh mesh = generate_mesh(rt, small);
    run_airfoil(rt, mesh, small, RunMode::Dataflow, {});
    out.graph = rt.export_graph();
  }
  return out;
}

void write_csv(const MatrixResult& result, std::ostream& os) {
  static const char* loops[] = {"save_soln", "adt_calc", "res_calc",
                                "bres_calc", "update"};
  os << "# meshflow-results v1\n";
  os << "grid_n,grid_m,iters,seed,mode,workers,chunk,prefetch_distance,reps,"
        "median_wall_s,speedup_vs_seq1";
  for (const char* l : loops) os << ",t_" << l;
  os << ",checksum\n";
  const BenchConfig& b = result.spec.bench;
  for (const ResultRow& r : result.rows) {
    os << b.grid_n << "," << b.grid_m << "," << b.iterations << "," << b.seed
       << "," << r.mode << "," << r.workers << "," << r.chunk << ","
       << r.prefetch_distance << "," << r.repetitions << "," << r.median_wall_s
       << "," << r.speedup_vs_seq1;
    for (const char* l : loops) {
      auto it = r.loop_seconds.find(l);
      os << "," << (it == r.loop_seconds.end() ? 0.0 : it->second);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(r.checksum));
    os << "," << buf << "\n";
  }
}

}  // namespace meshflow
