#pragma once
// Sphere map files. Layout (little-endian): "FUSP1\0\0\0", u32 format version,
// u32 target id, u32 convention tag, u32 m, then six panel blocks of m x m
// nodes (row index along a, column along b), 4 x f64 chart-0 coordinates each.

#include "fueterlab/io.hpp"
#include "fueterlab/spheremaps/map.hpp"

namespace fueterlab {

namespace io {
constexpr char kSphereMagic[9] = {'F', 'U', 'S', 'P', '1', 0, 0, 0, 0};
}

inline void write_sphere_map(std::ostream& os, const SphereMap& map) {
  io::put_magic(os, io::kSphereMagic);
  io::put<std::uint32_t>(os, io::kFormatVersion);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(map.tgt().id()));
  io::put<std::uint32_t>(os, map.convention().tag());
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(map.grid().m()));
  for (std::size_t n = 0; n < map.size(); ++n) {
    const ChartPoint& q = map.node(n);
    ChartPoint p = q.chart == 0 ? q : map.tgt().to_chart(q, 0);
    if (!map.tgt().in_domain(p))
      throw DomainError("write_sphere_map: node " + std::to_string(n) + " has no chart-0 coordinates");
    for (int c = 0; c < 4; ++c) io::put<double>(os, p.x[c]);
  }
  if (!os) throw Error("write_sphere_map: write failed");
}

inline SphereMap read_sphere_map(std::istream& is, TargetPtr target = nullptr) {
  io::expect_magic(is, io::kSphereMagic);
  if (io::get<std::uint32_t>(is) != io::kFormatVersion) throw Error("read_sphere_map: unsupported version");
  auto id = static_cast<TargetId>(io::get<std::uint32_t>(is));
  auto conv = SphereConvention::from_tag(io::get<std::uint32_t>(is));
  int m = static_cast<int>(io::get<std::uint32_t>(is));
  if (!target) target = make_target(id);
  if (target->id() != id) throw PreconditionError("read_sphere_map: file target differs from the supplied target");
  SphereMap map(SphereGrid(m), target, conv);
  std::vector<ChartPoint> nodes(map.grid().size());
  for (auto& p : nodes) {
    p.target = id;
    p.chart = 0;
    for (int c = 0; c < 4; ++c) p.x[c] = io::get<double>(is);
  }
  map.set_nodes(std::move(nodes));
  return map;
}

}  // namespace fueterlab
