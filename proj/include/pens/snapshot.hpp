#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <variant>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"

// Field snapshot file ("PENS" v1), all integers and floats little-endian:
//
//   char[4] magic "PENS" | u32 version = 1 | u32 n | u32 N | f64 L |
//   u32 kind (0 scalar physical, 1 vector physical) |
//   f64 samples, row-major per component, component-major for vectors.

namespace pens {

enum class SnapshotKind : std::uint32_t { Scalar = 0, Vector = 1 };

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("snapshot: truncated file");
  return to_little(v);
}

inline void put_header(std::ostream& os, const Grid& g, SnapshotKind kind) {
  os.write("PENS", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.modes()));
  put<double>(os, g.length());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
}

inline void put_samples(std::ostream& os, const RealField& f) {
  for (double x : f.data) put<double>(os, x);
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const RealField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("snapshot: cannot open " + path);
  detail::put_header(os, f.grid, SnapshotKind::Scalar);
  detail::put_samples(os, f);
}

inline void write_snapshot(const std::string& path, const RealVectorField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("snapshot: cannot open " + path);
  detail::put_header(os, f.grid(), SnapshotKind::Vector);
  for (const auto& c : f.comp) detail::put_samples(os, c);
}

using Snapshot = std::variant<RealField, RealVectorField>;

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("snapshot: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PENS", 4) != 0) throw InvalidArgument("snapshot: bad magic in " + path);
  const auto version = detail::get<std::uint32_t>(is);
  if (version != 1) throw InvalidArgument("snapshot: unsupported version " + std::to_string(version));
  const auto n = detail::get<std::uint32_t>(is);
  const auto N = detail::get<std::uint32_t>(is);
  const auto L = detail::get<double>(is);
  const auto kind = detail::get<std::uint32_t>(is);
  const Grid g = make_grid(static_cast<int>(n), static_cast<int>(N), L);
  auto read_field = [&] {
    RealField f(g);
    for (auto& x : f.data) x = detail::get<double>(is);
    return f;
  };
  if (kind == static_cast<std::uint32_t>(SnapshotKind::Scalar)) return read_field();
  if (kind == static_cast<std::uint32_t>(SnapshotKind::Vector)) {
    RealVectorField v(g);
    for (auto& c : v.comp) c = read_field();
    return v;
  }
  throw InvalidArgument("snapshot: unknown field kind " + std::to_string(kind));
}

}  // namespace pens
