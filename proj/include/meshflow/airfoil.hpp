#pragma once

#include <cstdint>
#include <vector>

#include "meshflow/engine.hpp"

namespace meshflow {

// Desk-scale stand-in for the Airfoil mini-app: an N x M quad grid expressed
// as unstructured sets (cells, interior edges, boundary edges, nodes) with
// the classic five-loop iteration structure. Kernels are deterministic
// surrogates that reproduce the original access patterns (direct copy,
// indirect gather, indirect increment, global reduction) without the CFD
// math.
struct BenchConfig {
  std::size_t grid_n = 4;   // cells along x
  std::size_t grid_m = 4;   // cells along y
  std::size_t iterations = 1;
  std::uint64_t seed = 42;
};

struct AirfoilMesh {
  SetId nodes, cells, edges, bedges;
  MapId edge_cells;  // interior edge -> its two adjacent cells
  MapId edge_nodes;  // interior edge -> its two endpoint nodes
  MapId bedge_cell;  // boundary edge -> its one adjacent cell
  MapId cell_nodes;  // cell -> its four corner nodes
  DatId q;           // cells, dim 4
  DatId qold;        // cells, dim 4
  DatId res;         // cells, dim 4
  DatId adt;         // cells, dim 1
  DatId coords;      // nodes, dim 2

  std::vector<DatId> state_dats() const { return {q, qold, res, adt, coords}; }
};

enum class RunMode { Barrier, Dataflow };

struct AirfoilResult {
  std::vector<double> rms;  // one reduction value per iteration
  std::uint64_t checksum = 0;
};

// Counter-based generator used for all seeded initial state, so independent
// implementations reproduce identical inputs: splitmix64 over
// (seed ^ tag, index) mapped to [0, 1).
std::uint64_t splitmix64(std::uint64_t x);
double seeded_unit(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

// Deterministic mesh for (grid_n, grid_m, seed); excludes any loop work.
AirfoilMesh generate_mesh(Runtime& rt, const BenchConfig& cfg);

// Run the five-loop iteration `cfg.iterations` times. Barrier mode awaits
// every loop's outputs before submitting the next; dataflow mode submits
// everything and drains once at the end.
AirfoilResult run_airfoil(Runtime& rt, const AirfoilMesh& mesh,
                          const BenchConfig& cfg, RunMode mode,
                          ExecutionPolicy policy,
                          unsigned prefetch_distance_factor = 0);

}  // namespace meshflow
