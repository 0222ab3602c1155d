#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace meshflow {

// Scalar kinds supported for dat storage and global cells.
enum class ScalarKind { F64, F32, I32 };

inline std::size_t scalar_size(ScalarKind k) {
  switch (k) {
    case ScalarKind::F64: return 8;
    case ScalarKind::F32: return 4;
    case ScalarKind::I32: return 4;
  }
  return 0;
}

inline const char* scalar_name(ScalarKind k) {
  switch (k) {
    case ScalarKind::F64: return "f64";
    case ScalarKind::F32: return "f32";
    case ScalarKind::I32: return "i32";
  }
  return "?";
}

// How a loop argument touches its dat. INC contributions are combined
// additively; WRITE/RW grant exclusive mutation of the element.
enum class AccessMode { Read, Write, ReadWrite, Inc };

inline const char* access_name(AccessMode m) {
  switch (m) {
    case AccessMode::Read: return "READ";
    case AccessMode::Write: return "WRITE";
    case AccessMode::ReadWrite: return "RW";
    case AccessMode::Inc: return "INC";
  }
  return "?";
}

// Runtime-scoped opaque handles. 0 is never a valid index-carrying handle;
// handles are only meaningful against the Runtime that issued them.
struct SetId { std::uint32_t value = 0; };
struct MapId { std::uint32_t value = 0; };
struct DatId { std::uint32_t value = 0; };
struct GblId { std::uint32_t value = 0; };

inline bool operator==(SetId a, SetId b) { return a.value == b.value; }
inline bool operator==(MapId a, MapId b) { return a.value == b.value; }
inline bool operator==(DatId a, DatId b) { return a.value == b.value; }
inline bool operator==(GblId a, GblId b) { return a.value == b.value; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct InvalidArg : Error { using Error::Error; };
struct UnknownHandle : Error { using Error::Error; };
struct TaskPanicked : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct EmptyContainers : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace meshflow
