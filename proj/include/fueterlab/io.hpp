#pragma once
// Binary section files. Layout (little-endian):
//   char[8] magic, u32 format version, u32 target id, u32 convention table version,
//   u32 n, f64 L, then n^D nodes of 4 x f64 chart-0 coordinates, node-major.
// Trajectory bundles prepend "FUETTRJ\0", u32 version, u32 count, f64 t0, f64 dt
// to `count` concatenated slices.

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "fueterlab/fields3d/section.hpp"

namespace fueterlab {

namespace io {

constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("io: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

inline void put_magic(std::ostream& os, const char (&m)[9]) { os.write(m, 8); }

inline void expect_magic(std::istream& is, const char (&m)[9]) {
  char b[8];
  if (!is.read(b, 8) || std::memcmp(b, m, 8) != 0)
    throw Error(std::string("io: bad magic, expected ") + std::string(m, 5));
}

constexpr char kSection3Magic[9] = {'F', 'U', 'E', 'T', '1', 0, 0, 0, 0};
constexpr char kSection4Magic[9] = {'F', 'U', 'E', 'T', '4', 0, 0, 0, 0};

template <int D>
constexpr const char (&section_magic())[9] {
  if constexpr (D == 3) return kSection3Magic;
  else return kSection4Magic;
}

constexpr char kTrajectoryMagic[9] = {'F', 'U', 'E', 'T', 'T', 'R', 'J', 0, 0};

}  // namespace io

template <int D>
void write_section(std::ostream& os, const GridSection<D>& s) {
  if (s.has_monodromy()) throw PreconditionError("write_section: the file format stores periodic sections only");
  io::put_magic(os, io::section_magic<D>());
  io::put<std::uint32_t>(os, io::kFormatVersion);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.target->id()));
  io::put<std::uint32_t>(os, Conventions::version);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.n));
  io::put<double>(os, s.grid.L);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ChartPoint p = s.nodes[i].chart == 0 ? s.nodes[i] : s.target->to_chart(s.nodes[i], 0);
    if (!s.target->in_domain(p))
      throw DomainError("write_section: node " + std::to_string(i) + " has no chart-0 coordinates");
    for (int c = 0; c < 4; ++c) io::put<double>(os, p.x[c]);
  }
  if (!os) throw Error("write_section: write failed");
}

// `target` may be null, in which case the stored id selects a default target.
template <int D>
GridSection<D> read_section(std::istream& is, TargetPtr target = nullptr) {
  io::expect_magic(is, io::section_magic<D>());
  auto version = io::get<std::uint32_t>(is);
  if (version != io::kFormatVersion) throw Error("read_section: unsupported format version");
  auto id = static_cast<TargetId>(io::get<std::uint32_t>(is));
  auto conv = io::get<std::uint32_t>(is);
  if (conv != Conventions::version) throw Error("read_section: convention table version mismatch");
  auto n = io::get<std::uint32_t>(is);
  double L = io::get<double>(is);
  if (!target) target = make_target(id);
  if (target->id() != id) throw PreconditionError("read_section: file target differs from the supplied target");
  GridSection<D> s(PeriodicGrid<D>(static_cast<int>(n), L), target);
  for (auto& p : s.nodes) {
    p.target = id;
    p.chart = 0;
    for (int c = 0; c < 4; ++c) p.x[c] = io::get<double>(is);
  }
  return s;
}

template <int D>
void save_section(const std::string& path, const GridSection<D>& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_section: cannot open " + path);
  write_section(os, s);
}

template <int D>
GridSection<D> load_section(const std::string& path, TargetPtr target = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_section: cannot open " + path);
  return read_section<D>(is, std::move(target));
}

template <int D>
void write_trajectory(std::ostream& os, const std::vector<GridSection<D>>& slices, double t0, double dt) {
  io::put_magic(os, io::kTrajectoryMagic);
  io::put<std::uint32_t>(os, io::kFormatVersion);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(slices.size()));
  io::put<double>(os, t0);
  io::put<double>(os, dt);
  for (auto& s : slices) write_section(os, s);
}

template <int D>
struct TrajectoryFile {
  double t0 = 0, dt = 0;
  std::vector<GridSection<D>> slices;
};

template <int D>
TrajectoryFile<D> read_trajectory(std::istream& is, TargetPtr target = nullptr) {
  io::expect_magic(is, io::kTrajectoryMagic);
  if (io::get<std::uint32_t>(is) != io::kFormatVersion) throw Error("read_trajectory: unsupported version");
  auto count = io::get<std::uint32_t>(is);
  TrajectoryFile<D> tf;
  tf.t0 = io::get<double>(is);
  tf.dt = io::get<double>(is);
  for (std::uint32_t k = 0; k < count; ++k) {
    tf.slices.push_back(read_section<D>(is, target));
    if (!target) target = tf.slices.back().target;
  }
  return tf;
}

}  // namespace fueterlab
