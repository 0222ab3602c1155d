#include "meshflow/mesh.hpp"

namespace meshflow {

SetId MeshStore::decl_set(std::size_t size, std::string name) {
  SetId id{std::uint32_t(sets_.size() + 1)};
  sets_.push_back(SetInfo{id, size, std::move(name)});
  return id;
}

const SetInfo& MeshStore::set(SetId id) const {
  if (id.value == 0 || id.value > sets_.size())
    throw UnknownHandle("unknown set handle");
  return sets_[id.value - 1];
}

MapId MeshStore::decl_map(SetId from, SetId to, int arity,
                          std::span<const std::int32_t> table,
                          std::string name) {
  const SetInfo& f = set(from);
  const SetInfo& t = set(to);
  if (arity <= 0) throw InvalidArg("map arity must be positive: " + name);
  if (table.size() != f.size * std::size_t(arity))
    throw LengthMismatch("map '" + name + "': table length " +
                         std::to_string(table.size()) + " != from.size*arity " +
                         std::to_string(f.size * std::size_t(arity)));
  for (std::int32_t e : table)
    if (e < 0 || std::size_t(e) >= t.size)
      throw IndexOutOfRange("map '" + name + "': entry " + std::to_string(e) +
                            " outside target set of size " +
                            std::to_string(t.size));
  MapId id{std::uint32_t(maps_.size() + 1)};
  maps_.push_back(MapInfo{id, from, to, arity,
                          std::vector<std::int32_t>(table.begin(), table.end()),
                          std::move(name)});
  return id;
}

const MapInfo& MeshStore::map(MapId id) const {
  if (id.value == 0 || id.value > maps_.size())
    throw UnknownHandle("unknown map handle");
  return maps_[id.value - 1];
}

DatId MeshStore::decl_dat(SetId set_h, int dim, ScalarKind kind,
                          std::span<const std::byte> init, std::string name) {
  const SetInfo& s = set(set_h);
  if (dim <= 0) throw InvalidArg("dat dim must be positive: " + name);
  std::size_t want = s.size * std::size_t(dim) * scalar_size(kind);
  if (init.size() != want)
    throw LengthMismatch("dat '" + name + "': init length " +
                         std::to_string(init.size() / scalar_size(kind)) +
                         " values != set.size*dim " +
                         std::to_string(s.size * std::size_t(dim)));
  DatId id{std::uint32_t(dats_.size() + 1)};
  DatInfo d;
  d.id = id;
  d.set = set_h;
  d.dim = dim;
  d.kind = kind;
  d.storage.assign(init.begin(), init.end());  // value snapshot
  d.name = std::move(name);
  dats_.push_back(std::move(d));
  return id;
}

const DatInfo& MeshStore::dat(DatId id) const {
  if (id.value == 0 || id.value > dats_.size())
    throw UnknownHandle("unknown dat handle");
  return dats_[id.value - 1];
}

DatInfo& MeshStore::dat_mut(DatId id) {
  return const_cast<DatInfo&>(dat(id));
}

GblId MeshStore::decl_gbl(int dim, ScalarKind kind,
                          std::span<const std::byte> init, std::string name) {
  if (dim <= 0) throw InvalidArg("gbl dim must be positive: " + name);
  if (init.size() != std::size_t(dim) * scalar_size(kind))
    throw LengthMismatch("gbl '" + name + "': init length mismatch");
  GblId id{std::uint32_t(gbls_.size() + 1)};
  gbls_.push_back(GblInfo{id, dim, kind,
                          std::vector<std::byte>(init.begin(), init.end()),
                          std::move(name)});
  return id;
}

const GblInfo& MeshStore::gbl(GblId id) const {
  if (id.value == 0 || id.value > gbls_.size())
    throw UnknownHandle("unknown gbl handle");
  return gbls_[id.value - 1];
}

GblInfo& MeshStore::gbl_mut(GblId id) {
  return const_cast<GblInfo&>(gbl(id));
}

}  // namespace meshflow
