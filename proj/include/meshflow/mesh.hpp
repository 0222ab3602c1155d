#pragma once

#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "meshflow/types.hpp"

namespace meshflow {

struct SetInfo {
  SetId id;
  std::size_t size = 0;
  std::string name;
};

// Immutable after declaration. table has from.size * arity entries, each in
// [0, to.size).
struct MapInfo {
  MapId id;
  SetId from;
  SetId to;
  int arity = 0;
  std::vector<std::int32_t> table;
  std::string name;
};

// Flat per-element storage, set.size * dim values of `kind`. version counts
// completed loops that wrote or incremented this dat.
struct DatInfo {
  DatId id;
  SetId set;
  int dim = 0;
  ScalarKind kind = ScalarKind::F64;
  std::vector<std::byte> storage;
  std::uint64_t version = 0;
  std::string name;

  std::size_t elem_bytes() const { return scalar_size(kind) * std::size_t(dim); }
};

// Global reduction cell (the op_arg_gbl target).
struct GblInfo {
  GblId id;
  int dim = 0;
  ScalarKind kind = ScalarKind::F64;
  std::vector<std::byte> storage;
  std::string name;
};

// Declaration registry for sets, maps, dats and global cells. Declarations
// happen on the driver thread; reads after declaration are safe from any
// thread (entries are never moved or mutated except dat storage/version,
// which the engine guards through its dependency tracking).
class MeshStore {
 public:
  SetId decl_set(std::size_t size, std::string name);
  MapId decl_map(SetId from, SetId to, int arity,
                 std::span<const std::int32_t> table, std::string name);
  DatId decl_dat(SetId set, int dim, ScalarKind kind,
                 std::span<const std::byte> init, std::string name);
  GblId decl_gbl(int dim, ScalarKind kind, std::span<const std::byte> init,
                 std::string name);

  const SetInfo& set(SetId id) const;
  const MapInfo& map(MapId id) const;
  const DatInfo& dat(DatId id) const;
  const GblInfo& gbl(GblId id) const;

  DatInfo& dat_mut(DatId id);
  GblInfo& gbl_mut(GblId id);

  std::size_t num_sets() const { return sets_.size(); }
  std::size_t num_maps() const { return maps_.size(); }
  std::size_t num_dats() const { return dats_.size(); }

  const std::vector<SetInfo>& sets() const { return sets_; }
  const std::vector<MapInfo>& maps() const { return maps_; }
  const std::vector<DatInfo>& dats() const { return dats_; }

  template <class T>
  std::span<const T> values(DatId id) const {
    const DatInfo& d = dat(id);
    return {reinterpret_cast<const T*>(d.storage.data()),
            d.storage.size() / sizeof(T)};
  }

 private:
  std::vector<SetInfo> sets_;
  std::vector<MapInfo> maps_;
  std::vector<DatInfo> dats_;
  std::vector<GblInfo> gbls_;
};

// Typed decl_dat helpers.
template <class T>
inline std::span<const std::byte> as_bytes_of(std::span<const T> v) {
  return {reinterpret_cast<const std::byte*>(v.data()), v.size_bytes()};
}

}  // namespace meshflow
