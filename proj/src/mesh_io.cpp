#include "meshflow/mesh_io.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <vector>

namespace meshflow {

namespace {

ScalarKind parse_kind(const std::string& s) {
  if (s == "f64") return ScalarKind::F64;
  if (s == "f32") return ScalarKind::F32;
  if (s == "i32") return ScalarKind::I32;
  throw ConfigError("mesh file: unknown scalar kind '" + s + "'");
}

void expect_word(std::istream& is, const char* word) {
  std::string s;
  if (!(is >> s) || s != word)
    throw ConfigError(std::string("mesh file: expected '") + word + "', got '" +
                      s + "'");
}

}  // namespace

void dump_mesh(const MeshStore& mesh, std::ostream& os) {
  os << "meshflow-mesh v1\n";
  os << "sets " << mesh.num_sets() << "\n";
  for (const SetInfo& s : mesh.sets()) os << s.name << " " << s.size << "\n";
  os << "maps " << mesh.num_maps() << "\n";
  for (const MapInfo& m : mesh.maps()) {
    os << m.name << " " << mesh.set(m.from).name << " " << mesh.set(m.to).name
       << " " << m.arity << "\n";
    for (std::size_t i = 0; i < m.table.size(); ++i)
      os << m.table[i] << ((i + 1) % 16 == 0 || i + 1 == m.table.size() ? '\n' : ' ');
    if (m.table.empty()) os << "\n";
  }
  os << "dats " << mesh.num_dats() << "\n";
  for (const DatInfo& d : mesh.dats()) {
    os << d.name << " " << mesh.set(d.set).name << " " << d.dim << " "
       << scalar_name(d.kind) << "\n";
    std::size_t n = mesh.set(d.set).size * std::size_t(d.dim);
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
      switch (d.kind) {
        case ScalarKind::F64:
          std::snprintf(buf, sizeof buf, "%a",
                        reinterpret_cast<const double*>(d.storage.data())[i]);
          break;
        case ScalarKind::F32:
          std::snprintf(buf, sizeof buf, "%a",
                        double(reinterpret_cast<const float*>(d.storage.data())[i]));
          break;
        case ScalarKind::I32:
          std::snprintf(buf, sizeof buf, "%d",
                        reinterpret_cast<const std::int32_t*>(d.storage.data())[i]);
          break;
      }
      os << buf << ((i + 1) % 8 == 0 || i + 1 == n ? '\n' : ' ');
    }
    if (n == 0) os << "\n";
  }
}

LoadedMesh load_mesh(std::istream& is, Runtime& rt) {
  expect_word(is, "meshflow-mesh");
  expect_word(is, "v1");
  LoadedMesh out;

  std::size_t nsets = 0;
  expect_word(is, "sets");
  is >> nsets;
  for (std::size_t i = 0; i < nsets; ++i) {
    std::string name;
    std::size_t size;
    if (!(is >> name >> size)) throw ConfigError("mesh file: bad set record");
    out.sets[name] = rt.decl_set(size, name);
  }

  auto set_of = [&](const std::string& n) {
    auto it = out.sets.find(n);
    if (it == out.sets.end())
      throw ConfigError("mesh file: unknown set '" + n + "'");
    return it->second;
  };

  std::size_t nmaps = 0;
  expect_word(is, "maps");
  is >> nmaps;
  for (std::size_t i = 0; i < nmaps; ++i) {
    std::string name, from, to;
    int arity;
    if (!(is >> name >> from >> to >> arity))
      throw ConfigError("mesh file: bad map record");
    SetId from_id = set_of(from);
    std::size_t n = rt.mesh().set(from_id).size * std::size_t(arity);
    std::vector<std::int32_t> table(n);
    for (auto& e : table)
      if (!(is >> e)) throw ConfigError("mesh file: truncated map table");
    out.maps[name] = rt.decl_map(from_id, set_of(to), arity, table, name);
  }

  std::size_t ndats = 0;
  expect_word(is, "dats");
  is >> ndats;
  for (std::size_t i = 0; i < ndats; ++i) {
    std::string name, set_name, kind_s;
    int dim;
    if (!(is >> name >> set_name >> dim >> kind_s))
      throw ConfigError("mesh file: bad dat record");
    SetId set_id = set_of(set_name);
    ScalarKind kind = parse_kind(kind_s);
    std::size_t n = rt.mesh().set(set_id).size * std::size_t(dim);
    // operator>> does not accept hexfloat; go through strtod/strtol.
    std::vector<std::byte> bytes(n * scalar_size(kind));
    std::string tok;
    for (std::size_t k = 0; k < n; ++k) {
      if (!(is >> tok)) throw ConfigError("mesh file: truncated dat values");
      switch (kind) {
        case ScalarKind::F64: {
          double v = std::strtod(tok.c_str(), nullptr);
          std::memcpy(bytes.data() + k * 8, &v, 8);
          break;
        }
        case ScalarKind::F32: {
          float v = std::strtof(tok.c_str(), nullptr);
          std::memcpy(bytes.data() + k * 4, &v, 4);
          break;
        }
        case ScalarKind::I32: {
          std::int32_t v = std::int32_t(std::strtol(tok.c_str(), nullptr, 10));
          std::memcpy(bytes.data() + k * 4, &v, 4);
          break;
        }
      }
    }
    out.dats[name] = rt.decl_dat_raw(set_id, dim, kind, bytes, name);
  }
  return out;
}

}  // namespace meshflow
