#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "meshflow/airfoil.hpp"

namespace meshflow {

// One experiment matrix: the cross product of worker counts and prefetch
// distances for a fixed bench config, mode and chunk policy. repetitions
// must be >= 3; the median is reported and a warm-up run is discarded.
struct RunSpec {
  BenchConfig bench;
  RunMode mode = RunMode::Dataflow;
  std::vector<unsigned> workers{1};
  ChunkPolicy chunk = ChunkPolicy::automatic();
  std::vector<unsigned> prefetch_distances{0};  // 0 = prefetch off
  unsigned repetitions = 3;
};

struct ResultRow {
  std::string mode;  // "baseline", "barrier" or "dataflow"
  unsigned workers = 1;
  std::string chunk;
  unsigned prefetch_distance = 0;
  unsigned repetitions = 0;
  double median_wall_s = 0;
  double speedup_vs_seq1 = 0;
  std::map<std::string, double> loop_seconds;  // per-loop chunk time, last rep
  std::uint64_t checksum = 0;
};

struct MatrixResult {
  RunSpec spec;
  std::uint64_t oracle_checksum = 0;
  std::vector<ResultRow> rows;
  DependencyGraph graph;  // from a short dataflow run of the same config
};

// Runs every (workers, prefetch_distance) cell `repetitions` times plus a
// discarded warm-up, after a 1-worker sequential baseline that fixes the
// oracle checksum. Timing wraps submission + drain only; mesh generation is
// excluded. Throws ChecksumMismatch before emitting anything if any run
// disagrees with the oracle.
MatrixResult run_matrix(const RunSpec& spec);

void write_csv(const MatrixResult& result, std::ostream& os);

}  // namespace meshflow
