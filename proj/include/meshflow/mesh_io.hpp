#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "meshflow/engine.hpp"

namespace meshflow {

// Handles of the entities declared while loading a mesh file.
struct LoadedMesh {
  std::map<std::string, SetId> sets;
  std::map<std::string, MapId> maps;
  std::map<std::string, DatId> dats;
};

// Plain-text mesh format (see README for the grammar):
//   meshflow-mesh v1
//   sets K    -> K lines  "<name> <size>"
//   maps M    -> M records "<name> <from> <to> <arity>" + table entries
//   dats D    -> D records "<name> <set> <dim> <kind>" + values
// f64/f32 values are written as hexfloat so a dump/load round trip is
// bit-exact.
void dump_mesh(const MeshStore& mesh, std::ostream& os);

// Declares everything from `is` into `rt`; declaration-time validation
// (length and bounds checks) applies as usual.
LoadedMesh load_mesh(std::istream& is, Runtime& rt);

}  // namespace meshflow
