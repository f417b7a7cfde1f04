#pragma once

// Deliberately wrong constructions. The law checks must reject them.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "cocycle.hpp"
#include "error.hpp"
#include "flowspace.hpp"
#include "functional.hpp"

namespace ssmma::controls {

/// Cyclic cocycle with b1 raised to [ln c]_{q(z)} instead of [v + ln c]_{q(z)}.
/// Not a cocycle as soon as some b1(z) = -1.
inline Cocycle misindexed_cyclic_cocycle(FiberSign b1, SignFunction b, const FlowSpace& space) {
  if (space.kind() != FlowSpace::Kind::Cyclic) throw UnsupportedOperation("misindexed cocycle requires a cyclic flow");
  if (!b1 || !b) throw InvalidArgument("misindexed cocycle: b1 and b are required");
  return Cocycle::from_signs(
      space,
      [b1 = std::move(b1), b = std::move(b), space](Scale s, const Point& p) {
        const long long n = floor_mod(s.log_c, space.period(p.fiber)).n;
        const int winding_sign = sign_power(checked_sign(b1(p.fiber), "cyclic b1"), n);
        return winding_sign * checked_sign(b(p), "cyclic b") * checked_sign(b(space.apply(s, p)), "cyclic b");
      },
      "cyclic (misindexed winding)");
}

/// Cyclic 2-semi-additive candidate at H = 1/alpha whose logarithmic term
/// j1(z)/b(z,v) [v + ln c]_{q(z)} is kept on fibers with b1(z) = -1 as well.
inline SemiAdditiveFunctional cyclic_two_semi_without_indicator(const FlowSpace& space, double alpha, PointFunction j,
                                                                TwoSemiData data) {
  if (!data.j1) throw InvalidArgument("indicator-free control needs j1");
  const SelfSimilarity ss = SelfSimilarity::critical_for(alpha);
  FiberSign b1 = data.b1 ? data.b1 : FiberSign([](std::size_t) { return 1; });
  SignFunction bfun = data.b ? data.b : SignFunction([](const Point&) { return 1; });
  const Cocycle b = cyclic_cocycle(b1, bfun, space);
  return SemiAdditiveFunctional::two_semi(
      ss, b, radon_nikodym_cocycle(space),
      [j = std::move(j), b, bfun, space, j1 = data.j1](Scale s, const Point& p) {
        return b.at(s, p) * j(space.apply(s, p)) - j(p) +
               j1(p.fiber) * static_cast<double>(checked_sign(bfun(p), "cyclic b")) *
                   static_cast<double>(space.winding(s, p));
      },
      "j (cyclic, indicator dropped)");
}

}  // namespace ssmma::controls
