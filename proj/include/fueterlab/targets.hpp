#pragma once
#include "fueterlab/targets/atiyah_hitchin.hpp"
#include "fueterlab/targets/core.hpp"
#include "fueterlab/targets/flat.hpp"
#include "fueterlab/targets/geometry.hpp"
#include "fueterlab/targets/gibbons_hawking.hpp"

namespace fueterlab {

inline TargetPtr make_target(TargetId id) {
  switch (id) {
    case TargetId::flat: return std::make_shared<FlatTarget>();
    case TargetId::taubnut: return make_taubnut();
    case TargetId::eguchi_hanson: return make_eguchi_hanson();
    case TargetId::atiyah_hitchin: return make_atiyah_hitchin();
  }
  throw PreconditionError("make_target: unknown id");
}

inline TargetPtr make_target(const std::string& name) { return make_target(target_from_string(name)); }

}  // namespace fueterlab
