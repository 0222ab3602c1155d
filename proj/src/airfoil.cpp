#include "meshflow/airfoil.hpp"

#include <cmath>
#include <string>

#include "meshflow/checksum.hpp"

namespace meshflow {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double seeded_unit(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(splitmix64(seed ^ tag) ^ index);
  return double(h >> 11) * 0x1p-53;  // 53 uniform bits in [0,1)
}

AirfoilMesh generate_mesh(Runtime& rt, const BenchConfig& cfg) {
  const std::size_t N = cfg.grid_n, M = cfg.grid_m;
  if (N == 0 || M == 0) throw ConfigError("grid dimensions must be positive");

  AirfoilMesh mesh;
  const std::size_t n_nodes = (N + 1) * (M + 1);
  const std::size_t n_cells = N * M;
  const std::size_t n_edges = N * (M - 1) + M * (N - 1);
  const std::size_t n_bedges = 2 * N + 2 * M;

  mesh.nodes = rt.decl_set(n_nodes, "nodes");
  mesh.cells = rt.decl_set(n_cells, "cells");
  mesh.edges = rt.decl_set(n_edges, "edges");
  mesh.bedges = rt.decl_set(n_bedges, "bedges");

  auto cell = [N](std::size_t i, std::size_t j) {
    return std::int32_t(j * N + i);
  };
  auto node = [N](std::size_t i, std::size_t j) {
    return std::int32_t(j * (N + 1) + i);
  };

  // Interior edges: first the x-neighbor interfaces, then the y-neighbor
  // ones, both row-major. Each maps to two distinct cells and the two
  // endpoint nodes of the shared grid edge.
  std::vector<std::int32_t> e_cells, e_nodes;
  e_cells.reserve(2 * n_edges);
  e_nodes.reserve(2 * n_edges);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t i = 0; i + 1 < N; ++i) {
      e_cells.push_back(cell(i, j));
      e_cells.push_back(cell(i + 1, j));
      e_nodes.push_back(node(i + 1, j));
      e_nodes.push_back(node(i + 1, j + 1));
    }
  for (std::size_t j = 0; j + 1 < M; ++j)
    for (std::size_t i = 0; i < N; ++i) {
      e_cells.push_back(cell(i, j));
      e_cells.push_back(cell(i, j + 1));
      e_nodes.push_back(node(i, j + 1));
      e_nodes.push_back(node(i + 1, j + 1));
    }
  mesh.edge_cells = rt.decl_map(mesh.edges, mesh.cells, 2, e_cells, "edge_cells");
  mesh.edge_nodes = rt.decl_map(mesh.edges, mesh.nodes, 2, e_nodes, "edge_nodes");

  // Boundary edges: bottom row, top row, left column, right column.
  std::vector<std::int32_t> b_cell;
  b_cell.reserve(n_bedges);
  for (std::size_t i = 0; i < N; ++i) b_cell.push_back(cell(i, 0));
  for (std::size_t i = 0; i < N; ++i) b_cell.push_back(cell(i, M - 1));
  for (std::size_t j = 0; j < M; ++j) b_cell.push_back(cell(0, j));
  for (std::size_t j = 0; j < M; ++j) b_cell.push_back(cell(N - 1, j));
  mesh.bedge_cell = rt.decl_map(mesh.bedges, mesh.cells, 1, b_cell, "bedge_cell");

  std::vector<std::int32_t> c_nodes;
  c_nodes.reserve(4 * n_cells);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t i = 0; i < N; ++i) {
      c_nodes.push_back(node(i, j));
      c_nodes.push_back(node(i + 1, j));
      c_nodes.push_back(node(i + 1, j + 1));
      c_nodes.push_back(node(i, j + 1));
    }
  mesh.cell_nodes = rt.decl_map(mesh.cells, mesh.nodes, 4, c_nodes, "cell_nodes");

  std::vector<double> xy(2 * n_nodes);
  for (std::size_t j = 0; j <= M; ++j)
    for (std::size_t i = 0; i <= N; ++i) {
      xy[2 * std::size_t(node(i, j))] = double(i);
      xy[2 * std::size_t(node(i, j)) + 1] = double(j);
    }
  mesh.coords = rt.decl_dat(mesh.nodes, 2, xy, "coords");

  std::vector<double> q0(4 * n_cells);
  for (std::size_t k = 0; k < q0.size(); ++k)
    q0[k] = 0.5 + seeded_unit(cfg.seed, 0x71, k);
  mesh.q = rt.decl_dat(mesh.cells, 4, q0, "p_q");

  std::vector<double> zeros4(4 * n_cells, 0.0), zeros1(n_cells, 0.0);
  mesh.qold = rt.decl_dat(mesh.cells, 4, zeros4, "p_qold");
  mesh.res = rt.decl_dat(mesh.cells, 4, zeros4, "p_res");
  mesh.adt = rt.decl_dat(mesh.cells, 1, zeros1, "p_adt");
  return mesh;
}

namespace {

// Surrogate kernels. Fixed closed-form arithmetic chosen to exercise every
// declared access; documented in the README.

void save_soln_kernel(const KernelScope& s) {
  const double* q = s.f64(0);
  double* qold = s.f64(1);
  for (int d = 0; d < 4; ++d) qold[d] = q[d];
}

void adt_calc_kernel(const KernelScope& s) {
  double acc = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double* x = s.f64(std::size_t(c));
    acc += std::fabs(x[0]) + std::fabs(x[1]);
  }
  const double* q = s.f64(4);
  double qacc = 0.0;
  for (int d = 0; d < 4; ++d) qacc += std::fabs(q[d]);
  s.f64(5)[0] = 0.015625 + acc / 64.0 + qacc / 8.0;
}

void res_calc_kernel(const KernelScope& s) {
  const double* q1 = s.f64(0);
  const double* q2 = s.f64(1);
  double adt1 = s.f64(2)[0], adt2 = s.f64(3)[0];
  double* r1 = s.f64(4);
  double* r2 = s.f64(5);
  for (int d = 0; d < 4; ++d) {
    double f = 0.5 * (q1[d] - q2[d]) + 0.125 * (adt1 - adt2);
    r1[d] += f;
    r2[d] -= f;
  }
}

void bres_calc_kernel(const KernelScope& s) {
  const double* q = s.f64(0);
  double adt = s.f64(1)[0];
  double* r = s.f64(2);
  for (int d = 0; d < 4; ++d) r[d] += 0.25 * (1.0 - q[d]) + 0.0625 * adt;
}

void update_kernel(const KernelScope& s) {
  const double* qold = s.f64(0);
  double* q = s.f64(1);
  double* res = s.f64(2);
  double adt = s.f64(3)[0];
  double* rms = s.f64(4);
  for (int d = 0; d < 4; ++d) {
    double del = res[d] / (1.0 + adt);
    q[d] = qold[d] - 0.25 * del;
    res[d] *= 0.5;
    rms[0] += del * del;
  }
}

}  // namespace

AirfoilResult run_airfoil(Runtime& rt, const AirfoilMesh& mesh,
                          const BenchConfig& cfg, RunMode mode,
                          ExecutionPolicy policy,
                          unsigned prefetch_distance_factor) {
  policy.prefetch_distance_factor = prefetch_distance_factor;
  using A = LoopArg;
  const AccessMode R = AccessMode::Read, W = AccessMode::Write,
                   RW = AccessMode::ReadWrite, I = AccessMode::Inc;

  std::vector<GblId> rms_cells;
  rms_cells.reserve(cfg.iterations);
  std::vector<double> zero{0.0};

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    GblId rms = rt.decl_gbl(1, zero, "rms_" + std::to_string(it));
    rms_cells.push_back(rms);

    auto await = [&](const std::vector<DeferredValue>& toks) {
      if (mode == RunMode::Barrier)
        for (const DeferredValue& t : toks) rt.get(t);
    };

    await(rt.submit_loop("save_soln", mesh.cells,
                         {A::dat_direct(mesh.q, R), A::dat_direct(mesh.qold, W)},
                         save_soln_kernel, policy));
    await(rt.submit_loop(
        "adt_calc", mesh.cells,
        {A::dat_via(mesh.coords, mesh.cell_nodes, 0, R),
         A::dat_via(mesh.coords, mesh.cell_nodes, 1, R),
         A::dat_via(mesh.coords, mesh.cell_nodes, 2, R),
         A::dat_via(mesh.coords, mesh.cell_nodes, 3, R),
         A::dat_direct(mesh.q, R), A::dat_direct(mesh.adt, W)},
        adt_calc_kernel, policy));
    await(rt.submit_loop("res_calc", mesh.edges,
                         {A::dat_via(mesh.q, mesh.edge_cells, 0, R),
                          A::dat_via(mesh.q, mesh.edge_cells, 1, R),
                          A::dat_via(mesh.adt, mesh.edge_cells, 0, R),
                          A::dat_via(mesh.adt, mesh.edge_cells, 1, R),
                          A::dat_via(mesh.res, mesh.edge_cells, 0, I),
                          A::dat_via(mesh.res, mesh.edge_cells, 1, I)},
                         res_calc_kernel, policy));
    await(rt.submit_loop("bres_calc", mesh.bedges,
                         {A::dat_via(mesh.q, mesh.bedge_cell, 0, R),
                          A::dat_via(mesh.adt, mesh.bedge_cell, 0, R),
                          A::dat_via(mesh.res, mesh.bedge_cell, 0, I)},
                         bres_calc_kernel, policy));
    await(rt.submit_loop("update", mesh.cells,
                         {A::dat_direct(mesh.qold, R), A::dat_direct(mesh.q, W),
                          A::dat_direct(mesh.res, RW),
                          A::dat_direct(mesh.adt, R), A::gbl(rms, I)},
                         update_kernel, policy));
  }
  rt.wait_all();

  AirfoilResult out;
  out.rms.reserve(cfg.iterations);
  for (GblId g : rms_cells) out.rms.push_back(rt.read_gbl<double>(g)[0]);
  auto dats = mesh.state_dats();
  out.checksum = combined_checksum(rt.mesh(), dats);
  return out;
}

}  // namespace meshflow
