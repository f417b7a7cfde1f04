#pragma once

// Cocycles b_c for a multiplicative flow: b_{c1 c2}(p) = b_{c1}(p) b_{c2}(psi_{c1}(p)).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "error.hpp"
#include "flowspace.hpp"
#include "random.hpp"
#include "report.hpp"

namespace ssmma {

enum class Codomain { Sign, Positive, NonZero };

inline const char* codomain_name(Codomain c) {
  switch (c) {
    case Codomain::Sign: return "{-1,1}";
    case Codomain::Positive: return "(0,inf)";
    case Codomain::NonZero: return "R\\{0}";
  }
  return "?";
}

using PointFunction = std::function<double(const Point&)>;
using SignFunction = std::function<int(const Point&)>;
using FiberFunction = std::function<double(std::size_t)>;
using FiberSign = std::function<int(std::size_t)>;

inline int checked_sign(int s, const char* what) {
  if (s != 1 && s != -1) {
    throw InvalidArgument(std::string(what) + " must take values in {-1, 1}, got " + std::to_string(s));
  }
  return s;
}

/// (-1)^n b for b in {-1, 1}.
inline int sign_power(int b, long long n) { return (b == -1 && (n % 2 != 0)) ? -1 : 1; }

/// Immutable cocycle on a flow space. Sign cocycles are evaluated in integers so
/// law checks on them are exact.
class Cocycle {
 public:
  using Evaluator = std::function<double(Scale, const Point&)>;
  using SignEvaluator = std::function<int(Scale, const Point&)>;

  static Cocycle from_values(FlowSpace space, Codomain codomain, Evaluator eval, std::string name) {
    if (codomain == Codomain::Sign) throw InvalidArgument("sign cocycles must be built with from_signs");
    auto impl = std::make_shared<Impl>(Impl{std::move(space), codomain, std::move(eval), {}, std::move(name)});
    return Cocycle(std::move(impl));
  }

  static Cocycle from_signs(FlowSpace space, SignEvaluator eval, std::string name) {
    auto impl = std::make_shared<Impl>(Impl{std::move(space), Codomain::Sign, {}, std::move(eval), std::move(name)});
    return Cocycle(std::move(impl));
  }

  double operator()(double c, const Point& p) const { return at(Scale::of(c), p); }
  double at_log(double t, const Point& p) const { return at(Scale::from_log(t), p); }

  double at(Scale s, const Point& p) const {
    impl_->space.require(p);
    if (impl_->codomain == Codomain::Sign) return static_cast<double>(checked_sign(impl_->sign(s, p), "sign cocycle"));
    return impl_->eval(s, p);
  }

  int sign(Scale s, const Point& p) const {
    if (impl_->codomain != Codomain::Sign) throw UnsupportedOperation("cocycle '" + name() + "' is not sign valued");
    impl_->space.require(p);
    return checked_sign(impl_->sign(s, p), "sign cocycle");
  }
  int sign(double c, const Point& p) const { return sign(Scale::of(c), p); }

  Codomain codomain() const { return impl_->codomain; }
  const FlowSpace& space() const { return impl_->space; }
  const std::string& name() const { return impl_->name; }
  bool same_as(const Cocycle& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    FlowSpace space;
    Codomain codomain;
    Evaluator eval;
    SignEvaluator sign;
    std::string name;
  };

  explicit Cocycle(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

namespace detail {

// Evaluates f at a spread of points so that bad user functions fail at construction.
template <class F>
void probe_points(const FlowSpace& space, F&& f, std::size_t count = 64) {
  CounterRng rng(0x70726F6265, space.size());
  for (std::size_t z = 0; z < space.size(); ++z) f(Point{z, 0.0});
  for (std::size_t i = 0; i < count; ++i) f(space.sample(rng));
}

}  // namespace detail

/// b_c = 1.
inline Cocycle unit_cocycle(const FlowSpace& space) {
  return Cocycle::from_signs(space, [](Scale, const Point&) { return 1; }, "unit");
}

/// b_c(p) = b(psi_c(p)) / b(p) with b taking values in {-1, 1}.
inline Cocycle coboundary_cocycle(SignFunction b, const FlowSpace& space) {
  if (!b) throw InvalidArgument("coboundary_cocycle: b is empty");
  detail::probe_points(space, [&](const Point& p) { checked_sign(b(p), "coboundary b"); });
  return Cocycle::from_signs(
      space,
      [b = std::move(b), space](Scale s, const Point& p) {
        const int here = checked_sign(b(p), "coboundary b");
        const int there = checked_sign(b(space.apply(s, p)), "coboundary b");
        return here * there;  // b^{-1} = b on {-1, 1}
      },
      "coboundary");
}

/// b_c(z,v) = b1(z)^{[v + ln c]_{q(z)}} b(psi_c(z,v)) / b(z,v) on a cyclic flow.
inline Cocycle cyclic_cocycle(FiberSign b1, SignFunction b, const FlowSpace& space) {
  if (space.kind() != FlowSpace::Kind::Cyclic) throw UnsupportedOperation("cyclic_cocycle requires a cyclic flow");
  if (!b1 || !b) throw InvalidArgument("cyclic_cocycle: b1 and b are required");
  for (std::size_t z = 0; z < space.size(); ++z) checked_sign(b1(z), "cyclic b1");
  detail::probe_points(space, [&](const Point& p) { checked_sign(b(p), "cyclic b"); });
  return Cocycle::from_signs(
      space,
      [b1 = std::move(b1), b = std::move(b), space](Scale s, const Point& p) {
        const long long n = space.winding(s, p);
        const int winding_sign = sign_power(checked_sign(b1(p.fiber), "cyclic b1"), n);
        const int here = checked_sign(b(p), "cyclic b");
        const int there = checked_sign(b(space.apply(s, p)), "cyclic b");
        return winding_sign * here * there;
      },
      "cyclic");
}

/// The constant-1 version of d(mu o psi_c)/d mu. All built-in flows preserve their
/// product measures, so this is a cocycle version of the Radon-Nikodym derivative.
inline Cocycle radon_nikodym_cocycle(const FlowSpace& space) {
  return Cocycle::from_values(space, Codomain::Positive, [](Scale, const Point&) { return 1.0; }, "radon-nikodym");
}

/// Alternative Radon-Nikodym version on a dissipative flow which differs from the
/// constant one on the single null fiber `special_fiber`: b(u + ln c) / b(u) there.
inline Cocycle nontrivial_rn_version(std::function<double(double)> b, std::size_t special_fiber,
                                     const FlowSpace& space) {
  if (space.kind() != FlowSpace::Kind::Dissipative)
    throw UnsupportedOperation("nontrivial_rn_version requires a dissipative flow");
  if (!b) throw InvalidArgument("nontrivial_rn_version: b is empty");
  if (special_fiber >= space.size()) throw InvalidArgument("nontrivial_rn_version: fiber out of range");
  auto positive = [](double value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw InvalidArgument("nontrivial_rn_version: b must be strictly positive, got " + std::to_string(value));
    return value;
  };
  detail::probe_points(space, [&](const Point& p) { positive(b(p.coord)); });
  return Cocycle::from_values(
      space, Codomain::Positive,
      [b = std::move(b), special_fiber, positive](Scale s, const Point& p) {
        if (p.fiber != special_fiber) return 1.0;
        return positive(b(p.coord + s.log_c)) / positive(b(p.coord));
      },
      "radon-nikodym (fiber " + std::to_string(special_fiber) + " modified)");
}

/// Self-similarity parameters. `critical` declares H = 1/alpha exactly; the
/// exponent H - 1/alpha is then taken to be 0.
struct SelfSimilarity {
  double H = 0.5;
  double alpha = 1.0;
  bool critical = false;

  double kappa() const { return critical ? 0.0 : H - 1.0 / alpha; }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
    if (!(H > 0.0) || !std::isfinite(H)) throw InvalidArgument("H must be positive");
    if (critical && std::fabs(H - 1.0 / alpha) > 1e-9 * (1.0 + H))
      throw InvalidArgument("critical branch declared but H != 1/alpha");
  }

  static SelfSimilarity critical_for(double alpha) { return {1.0 / alpha, alpha, true}; }
};

/// B_c = c^{H - 1/alpha} b_c (d(mu o psi_c)/d mu)^{1/alpha}.
inline Cocycle transform_cocycle_B(SelfSimilarity ss, const Cocycle& b, const Cocycle& rn) {
  ss.validate();
  if (b.codomain() != Codomain::Sign) throw InvalidArgument("transform_cocycle_B: b must be sign valued");
  if (rn.codomain() != Codomain::Positive) throw InvalidArgument("transform_cocycle_B: rn must be positive valued");
  if (!b.space().same_as(rn.space())) throw InvalidArgument("transform_cocycle_B: b and rn live on different flows");
  const double kappa = ss.kappa();
  const double inv_alpha = 1.0 / ss.alpha;
  return Cocycle::from_values(
      b.space(), Codomain::NonZero,
      [kappa, inv_alpha, b, rn](Scale s, const Point& p) {
        const double r = rn.at(s, p);
        const double jac = r == 1.0 ? 1.0 : std::pow(r, inv_alpha);
        return std::pow(s.c, kappa) * static_cast<double>(b.sign(s, p)) * jac;
      },
      "B(" + b.name() + ")");
}

/// B_c = c, the cocycle attached to c g_c for a 1-semi-additive g.
inline Cocycle dilation_cocycle(const FlowSpace& space) {
  return Cocycle::from_values(space, Codomain::Positive, [](Scale s, const Point&) { return s.c; }, "c");
}

namespace detail {

inline bool in_codomain(Codomain codomain, double value) {
  switch (codomain) {
    case Codomain::Sign: return value == 1.0 || value == -1.0;
    case Codomain::Positive: return value > 0.0 && std::isfinite(value);
    case Codomain::NonZero: return value != 0.0 && std::isfinite(value);
  }
  return false;
}

}  // namespace detail

/// Samples the cocycle law at random (c1, c2, p) and the normalisation b_1 = 1.
/// Residuals are |lhs - rhs| / max(|lhs|, |rhs|); a value outside the declared
/// codomain (in particular 0) counts as residual 1.
inline VerificationReport verify_cocycle(const Cocycle& coc, std::size_t samples, std::uint64_t seed,
                                         double tol = 1e-12, LawSampling opts = {}) {
  if (samples == 0) throw InvalidArgument("verify_cocycle: samples must be >= 1");
  const FlowSpace& space = coc.space();
  CounterRng rng(seed, 0x636F6379);  // "cocy"
  ResidualAccumulator acc;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t identity_failures = 0;

  for (std::size_t i = 0; i < samples; ++i) {
    const Scale s1 = Scale::from_log(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const Scale s2 = Scale::from_log(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const Scale s12 = Scale::of(s1.c * s2.c);
    const Point p = space.sample(rng);
    const Point moved = space.apply(s1, p);
    Counterexample where{p.fiber, p.coord, nan, s1.c, s2.c, 0.0, ""};

    if (coc.codomain() == Codomain::Sign) {
      const int lhs = coc.sign(s12, p);
      const int rhs = coc.sign(s1, p) * coc.sign(s2, moved);
      acc.add(lhs == rhs ? 0.0 : 2.0, where);
    } else {
      const double lhs = coc.at(s12, p);
      const double a = coc.at(s1, p);
      const double b = coc.at(s2, moved);
      if (!detail::in_codomain(coc.codomain(), lhs) || !detail::in_codomain(coc.codomain(), a) ||
          !detail::in_codomain(coc.codomain(), b)) {
        where.note = "value outside codomain";
        acc.add(1.0, where);
      } else {
        const double rhs = a * b;
        acc.add(std::fabs(lhs - rhs) / std::max(std::fabs(lhs), std::fabs(rhs)), where);
      }
    }

    const double one = coc.at(Scale{1.0, 0.0}, p);
    if (one != 1.0) {
      ++identity_failures;
      acc.add(std::fabs(one - 1.0), {p.fiber, p.coord, nan, 1.0, nan, 0.0, "b_1 != 1"});
    }
  }
  std::ostringstream desc;
  desc << samples << " random (c1, c2, p), ln c uniform on [-" << opts.log_c_range << ", " << opts.log_c_range
       << "], codomain " << codomain_name(coc.codomain()) << ", plus b_1 = 1 at every sampled p";
  auto report = acc.finish("cocycle law: " + coc.name(), desc.str(), tol);
  report.diagnostics.emplace_back("identity_failures", static_cast<double>(identity_failures));
  return report;
}

}  // namespace ssmma
