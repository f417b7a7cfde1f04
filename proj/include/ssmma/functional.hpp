#pragma once

// Semi-additive functionals on multiplicative flows.
//
//   related to B:  J_{c1 c2}(p) = J_{c1}(p) + B_{c1}(p) J_{c2}(psi_{c1}(p))
//   1-semi:        g_{c1 c2}(p) = g_{c1}(p) / c2 + g_{c2}(psi_{c1}(p))
//   2-semi:        j_{c1 c2}(p) = c2^{-(H-1/alpha)} j_{c1}(p)
//                                 + b_{c1}(p) rn_{c1}(p)^{1/alpha} j_{c2}(psi_{c1}(p))

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "cocycle.hpp"
#include "error.hpp"
#include "flowspace.hpp"
#include "random.hpp"
#include "report.hpp"

namespace ssmma {

enum class FunctionalKind { Related, OneSemi, TwoSemi };

inline const char* functional_kind_name(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::Related: return "related-to-cocycle";
    case FunctionalKind::OneSemi: return "1-semi-additive";
    case FunctionalKind::TwoSemi: return "2-semi-additive";
  }
  return "?";
}

class SemiAdditiveFunctional {
 public:
  using Evaluator = std::function<double(Scale, const Point&)>;

  static SemiAdditiveFunctional related(Cocycle B, Evaluator eval, std::string name) {
    FlowSpace space = B.space();
    return SemiAdditiveFunctional(Impl{FunctionalKind::Related, std::move(space), std::move(B), std::nullopt, {},
                                       std::move(eval), std::move(name)});
  }

  static SemiAdditiveFunctional one_semi(FlowSpace space, Evaluator eval, std::string name) {
    return SemiAdditiveFunctional(
        Impl{FunctionalKind::OneSemi, std::move(space), std::nullopt, std::nullopt, {}, std::move(eval), std::move(name)});
  }

  /// b is the sign cocycle and rn the Radon-Nikodym cocycle entering the 2-semi law.
  static SemiAdditiveFunctional two_semi(SelfSimilarity ss, Cocycle b, Cocycle rn, Evaluator eval, std::string name) {
    ss.validate();
    if (b.codomain() != Codomain::Sign) throw InvalidArgument("2-semi-additive functional: b must be sign valued");
    if (rn.codomain() != Codomain::Positive) throw InvalidArgument("2-semi-additive functional: rn must be positive");
    if (!b.space().same_as(rn.space())) throw InvalidArgument("2-semi-additive functional: b and rn flows differ");
    FlowSpace space = b.space();
    return SemiAdditiveFunctional(
        Impl{FunctionalKind::TwoSemi, std::move(space), std::move(b), std::move(rn), ss, std::move(eval), std::move(name)});
  }

  double operator()(double c, const Point& p) const { return at(Scale::of(c), p); }
  double at_log(double t, const Point& p) const { return at(Scale::from_log(t), p); }
  double at(Scale s, const Point& p) const {
    impl_->space.require(p);
    return impl_->eval(s, p);
  }

  FunctionalKind kind() const { return impl_->kind; }
  const FlowSpace& space() const { return impl_->space; }
  const std::string& name() const { return impl_->name; }
  const Evaluator& evaluator() const { return impl_->eval; }

  /// B for related functionals, b for 2-semi-additive ones.
  const Cocycle& cocycle() const {
    if (!impl_->cocycle) throw UnsupportedOperation("1-semi-additive functionals carry no cocycle");
    return *impl_->cocycle;
  }
  const Cocycle& jacobian() const {
    if (!impl_->jacobian) throw UnsupportedOperation("only 2-semi-additive functionals carry a Radon-Nikodym cocycle");
    return *impl_->jacobian;
  }
  const SelfSimilarity& params() const {
    if (impl_->kind != FunctionalKind::TwoSemi) throw UnsupportedOperation("only 2-semi-additive functionals carry (H, alpha)");
    return impl_->params;
  }

 private:
  struct Impl {
    FunctionalKind kind;
    FlowSpace space;
    std::optional<Cocycle> cocycle;
    std::optional<Cocycle> jacobian;
    SelfSimilarity params;
    Evaluator eval;
    std::string name;
  };

  explicit SemiAdditiveFunctional(Impl impl) : impl_(std::make_shared<const Impl>(std::move(impl))) {
    if (!impl_->eval) throw InvalidArgument("functional '" + impl_->name + "' has no evaluator");
  }

  std::shared_ptr<const Impl> impl_;
};

/// J_c(p) = A_c(p) F(psi_c(p)) - F(p), related to A for any F.
inline SemiAdditiveFunctional coboundary_functional(const Cocycle& A, PointFunction F) {
  if (!F) throw InvalidArgument("coboundary_functional: F is empty");
  const FlowSpace space = A.space();
  return SemiAdditiveFunctional::related(
      A,
      [A, F = std::move(F), space](Scale s, const Point& p) { return A.at(s, p) * F(space.apply(s, p)) - F(p); },
      "coboundary(" + A.name() + ")");
}

namespace detail {

inline const SpecialRep& rep_of(const Cocycle& A, const SpecialRep* rep) {
  const SpecialRep& own = A.space().special_rep();
  if (rep != nullptr && !(*rep == own))
    throw InvalidArgument("special representation does not match the cocycle's flow");
  return own;
}

inline double nonzero(double value, const char* where) {
  if (value == 0.0 || !std::isfinite(value)) throw DegenerateCocycle(std::string("cocycle vanishes at ") + where);
  return value;
}

}  // namespace detail

/// A_{r_k(y)}(y, 0): the cocycle accumulated along the orbit of the roof point (y, 0)
/// over k roof crossings. Evaluated as a product of single-crossing factors, each at
/// an exact roof time, so every intermediate point is exactly (V^i y, 0).
inline double orbit_cocycle(const Cocycle& A, std::size_t y, long long k, const SpecialRep* rep = nullptr) {
  const SpecialRep& r = detail::rep_of(A, rep);
  double product = 1.0;
  std::size_t base = y;
  for (long long i = 0; i < k; ++i) {
    product *= A.at(Scale::from_log(r.roof(base)), Point{base, 0.0});
    base = r.successor(base);
  }
  for (long long i = 0; i > k; --i) {
    const std::size_t prev = r.predecessor(base);
    product *= A.at(Scale::from_log(-r.roof(prev)), Point{base, 0.0});
    base = prev;
  }
  return product;
}

/// G~_n(y) = sum_{k in [0,n)} A_{r_k(y)}(y,0) G1(V^k y) for n >= 0, and
/// G~_n(y) = -sum_{k=n}^{-1} A_{r_k(y)}(y,0) G1(V^k y) for n < 0, the sign forced by
/// G~_0 = 0 and G~_{n+m}(y) = G~_n(y) + A_{r_n(y)}(y,0) G~_m(V^n y).
inline double g_tilde_n(const Cocycle& A, const FiberFunction& G1, const SpecialRep& rep, std::size_t y, long long n) {
  const SpecialRep& r = detail::rep_of(A, &rep);
  if (!G1) throw InvalidArgument("g_tilde_n: G1 is empty");
  double sum = 0.0;
  double weight = 1.0;
  std::size_t base = y;
  if (n >= 0) {
    for (long long k = 0; k < n; ++k) {
      sum += weight * G1(base);
      weight *= A.at(Scale::from_log(r.roof(base)), Point{base, 0.0});
      base = r.successor(base);
    }
    return sum;
  }
  for (long long k = -1; k >= n; --k) {
    const std::size_t prev = r.predecessor(base);
    weight *= A.at(Scale::from_log(-r.roof(prev)), Point{base, 0.0});
    base = prev;
    sum += weight * G1(base);
  }
  return -sum;
}

/// J^{(2)}_c(y,u) = (A_{e^u}(y,0))^{-1} G~_n(y) with r_n(y) <= ln c + u < r_{n+1}(y).
inline SemiAdditiveFunctional special_second_component(const Cocycle& A, FiberFunction F1,
                                                       const SpecialRep* rep = nullptr) {
  detail::rep_of(A, rep);
  if (!F1) throw InvalidArgument("special_second_component: F1 is empty");
  return SemiAdditiveFunctional::related(
      A,
      [A, F1 = std::move(F1)](Scale s, const Point& p) {
        const SpecialRep& r = A.space().special_rep();
        const long long n = r.locate(p.fiber, p.coord + s.log_c).n;
        if (n == 0) return 0.0;
        const double lift = detail::nonzero(A.at(Scale::from_log(p.coord), Point{p.fiber, 0.0}), "(y, 0) at time u");
        return g_tilde_n(A, F1, r, p.fiber, n) / lift;
      },
      "special(" + A.name() + ")");
}

/// Closed-form 1-semi-additive functional generated by g:
///   identity     (c^{-1} - 1) g(x)
///   dissipative  g(y, u + ln c) - c^{-1} g(y, u)
///   cyclic       g(z, {v + ln c}_{q(z)}) - c^{-1} g(z, v)
/// Special flows use the same g(psi_c p) - c^{-1} g(p) form.
inline SemiAdditiveFunctional solve_one_semi(const FlowSpace& space, PointFunction g) {
  if (!g) throw InvalidArgument("solve_one_semi: g is empty");
  if (space.kind() == FlowSpace::Kind::Identity) {
    return SemiAdditiveFunctional::one_semi(
        space, [g = std::move(g)](Scale s, const Point& p) { return (1.0 / s.c - 1.0) * g(p); }, "g (identity)");
  }
  return SemiAdditiveFunctional::one_semi(
      space, [g = std::move(g), space](Scale s, const Point& p) { return g(space.apply(s, p)) - g(p) / s.c; },
      std::string("g (") + FlowSpace::kind_name(space.kind()) + ")");
}

/// Flow-specific data of the 2-semi-additive solution. Empty members mean b = 1,
/// b1 = 1 and no logarithmic term respectively.
struct TwoSemiData {
  SignFunction b;    // dissipative and cyclic
  FiberSign b1;      // cyclic only
  FiberFunction j1;  // cyclic only, used on the H = 1/alpha, b1(z) = 1 branch
};

/// Closed-form 2-semi-additive functional generated by j with the constant-1
/// Radon-Nikodym cocycle:
///   identity, H != 1/alpha   j(x) (1 - c^{-(H-1/alpha)})
///   identity, H  = 1/alpha   j(x) ln c
///   dissipative              b_c(y,u) j(psi_c(y,u)) - c^{-(H-1/alpha)} j(y,u)
///   cyclic                   b_c(z,v) j(psi_c(z,v)) - c^{-(H-1/alpha)} j(z,v)
///                            + j1(z)/b(z,v) [v + ln c]_{q(z)} 1{b1(z)=1} 1{H=1/alpha}
inline SemiAdditiveFunctional solve_two_semi(const FlowSpace& space, SelfSimilarity ss, PointFunction j,
                                             TwoSemiData data = {}) {
  ss.validate();
  if (!j) throw InvalidArgument("solve_two_semi: j is empty");
  const double kappa = ss.kappa();
  const Cocycle rn = radon_nikodym_cocycle(space);

  switch (space.kind()) {
    case FlowSpace::Kind::Identity: {
      if (data.b || data.b1 || data.j1)
        throw InvalidArgument("solve_two_semi: identity flows take no b, b1 or j1 (b_c = 1 is forced)");
      if (ss.critical) {
        return SemiAdditiveFunctional::two_semi(
            ss, unit_cocycle(space), rn, [j = std::move(j)](Scale s, const Point& p) { return j(p) * s.log_c; },
            "j (identity, H = 1/alpha)");
      }
      return SemiAdditiveFunctional::two_semi(
          ss, unit_cocycle(space), rn,
          [j = std::move(j), kappa](Scale s, const Point& p) { return j(p) * (1.0 - std::pow(s.c, -kappa)); },
          "j (identity)");
    }
    case FlowSpace::Kind::Dissipative: {
      if (data.b1 || data.j1) throw InvalidArgument("solve_two_semi: b1 and j1 apply to cyclic flows only");
      const Cocycle b = data.b ? coboundary_cocycle(data.b, space) : unit_cocycle(space);
      return SemiAdditiveFunctional::two_semi(
          ss, b, rn,
          [j = std::move(j), b, kappa, space](Scale s, const Point& p) {
            return b.at(s, p) * j(space.apply(s, p)) - std::pow(s.c, -kappa) * j(p);
          },
          "j (dissipative)");
    }
    case FlowSpace::Kind::Cyclic: {
      FiberSign b1 = data.b1 ? data.b1 : FiberSign([](std::size_t) { return 1; });
      SignFunction bfun = data.b ? data.b : SignFunction([](const Point&) { return 1; });
      const Cocycle b = cyclic_cocycle(b1, bfun, space);
      const bool log_branch = ss.critical && static_cast<bool>(data.j1);
      return SemiAdditiveFunctional::two_semi(
          ss, b, rn,
          [j = std::move(j), b, kappa, space, log_branch, b1, bfun, j1 = data.j1](Scale s, const Point& p) {
            double value = b.at(s, p) * j(space.apply(s, p)) - std::pow(s.c, -kappa) * j(p);
            if (log_branch && b1(p.fiber) == 1) {
              value += j1(p.fiber) * static_cast<double>(checked_sign(bfun(p), "cyclic b")) *
                       static_cast<double>(space.winding(s, p));
            }
            return value;
          },
          log_branch ? "j (cyclic, H = 1/alpha)" : "j (cyclic)");
    }
    case FlowSpace::Kind::Special:
      break;
  }
  throw UnsupportedOperation("solve_two_semi: no closed form for general special flows");
}

/// J_c = c g_c related to B_c = c, or J_c = c^{H-1/alpha} j_c related to
/// B_c = c^{H-1/alpha} b_c rn_c^{1/alpha}.
inline SemiAdditiveFunctional to_related(const SemiAdditiveFunctional& f) {
  switch (f.kind()) {
    case FunctionalKind::Related:
      throw IdempotenceError("to_related: functional '" + f.name() + "' is already related to a cocycle");
    case FunctionalKind::OneSemi:
      return SemiAdditiveFunctional::related(
          dilation_cocycle(f.space()), [f](Scale s, const Point& p) { return s.c * f.at(s, p); }, "c * " + f.name());
    case FunctionalKind::TwoSemi: {
      const double kappa = f.params().kappa();
      return SemiAdditiveFunctional::related(
          transform_cocycle_B(f.params(), f.cocycle(), f.jacobian()),
          [f, kappa](Scale s, const Point& p) { return std::pow(s.c, kappa) * f.at(s, p); },
          "c^{H-1/alpha} * " + f.name());
    }
  }
  throw InvalidArgument("to_related: unknown functional kind");
}

/// True if the two cocycles are the same object, or agree on the same flow at
/// `samples` random (c, p).
inline bool cocycles_agree(const Cocycle& a, const Cocycle& b, std::size_t samples = 256) {
  if (a.same_as(b)) return true;
  if (a.codomain() != b.codomain() || !a.space().same_as(b.space())) return false;
  CounterRng rng(0x61677265, samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const Scale s = Scale::from_log(rng.uniform(-5.0, 5.0));
    const Point p = a.space().sample(rng);
    const double x = a.at(s, p);
    const double y = b.at(s, p);
    if (std::fabs(x - y) > 1e-14 * std::max(std::fabs(x), std::fabs(y))) return false;
  }
  return true;
}

/// Pointwise sum of two functionals of the same kind and cocycle.
inline SemiAdditiveFunctional sum(const SemiAdditiveFunctional& f1, const SemiAdditiveFunctional& f2) {
  if (f1.kind() != f2.kind()) throw InvalidArgument("sum: functionals of different kinds");
  if (!f1.space().same_as(f2.space())) throw InvalidArgument("sum: functionals live on different flows");
  auto eval = [f1, f2](Scale s, const Point& p) { return f1.at(s, p) + f2.at(s, p); };
  const std::string name = f1.name() + " + " + f2.name();
  switch (f1.kind()) {
    case FunctionalKind::Related:
      if (!cocycles_agree(f1.cocycle(), f2.cocycle())) throw InvalidArgument("sum: mismatched cocycles");
      return SemiAdditiveFunctional::related(f1.cocycle(), eval, name);
    case FunctionalKind::OneSemi:
      return SemiAdditiveFunctional::one_semi(f1.space(), eval, name);
    case FunctionalKind::TwoSemi: {
      const auto& a = f1.params();
      const auto& b = f2.params();
      if (a.H != b.H || a.alpha != b.alpha || a.critical != b.critical)
        throw InvalidArgument("sum: 2-semi-additive functionals with different (H, alpha)");
      if (!cocycles_agree(f1.cocycle(), f2.cocycle()) || !cocycles_agree(f1.jacobian(), f2.jacobian()))
        throw InvalidArgument("sum: mismatched cocycles");
      return SemiAdditiveFunctional::two_semi(a, f1.cocycle(), f1.jacobian(), eval, name);
    }
  }
  throw InvalidArgument("sum: unknown functional kind");
}

/// Right-hand side of the kind-appropriate law at (c1, c2, p).
inline double law_rhs(const SemiAdditiveFunctional& f, Scale s1, Scale s2, const Point& p) {
  const Point moved = f.space().apply(s1, p);
  switch (f.kind()) {
    case FunctionalKind::Related:
      return f.at(s1, p) + f.cocycle().at(s1, p) * f.at(s2, moved);
    case FunctionalKind::OneSemi:
      return f.at(s1, p) / s2.c + f.at(s2, moved);
    case FunctionalKind::TwoSemi: {
      const SelfSimilarity& ss = f.params();
      const double rn = f.jacobian().at(s1, p);
      const double jac = rn == 1.0 ? 1.0 : std::pow(rn, 1.0 / ss.alpha);
      return std::pow(s2.c, -ss.kappa()) * f.at(s1, p) + f.cocycle().at(s1, p) * jac * f.at(s2, moved);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Samples the kind-appropriate law at random (c1, c2, p). Residuals are
/// |lhs - rhs| / (1 + |lhs|); each sample also contributes |f_1(p)| (the c = 1
/// vanishing check), whose maximum is reported as the diagnostic `identity_max`.
inline VerificationReport verify_functional(const SemiAdditiveFunctional& f, std::size_t samples, std::uint64_t seed,
                                            double tol = 1e-11, LawSampling opts = {}) {
  if (samples == 0) throw InvalidArgument("verify_functional: samples must be >= 1");
  const FlowSpace& space = f.space();
  CounterRng rng(seed, 0x66756E63);  // "func"
  ResidualAccumulator acc;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double identity_max = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Scale s1 = Scale::from_log(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const Scale s2 = Scale::from_log(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const Point p = space.sample(rng);
    const double lhs = f.at(Scale::of(s1.c * s2.c), p);
    const double rhs = law_rhs(f, s1, s2, p);
    acc.add(std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)), {p.fiber, p.coord, nan, s1.c, s2.c, 0.0, ""});

    const double at_one = std::fabs(f.at(Scale{1.0, 0.0}, p));
    identity_max = std::max(identity_max, at_one);
    if (at_one != 0.0) acc.add(at_one, {p.fiber, p.coord, nan, 1.0, nan, 0.0, "f_1 != 0"});
  }
  std::ostringstream desc;
  desc << samples << " random (c1, c2, p), ln c uniform on [-" << opts.log_c_range << ", " << opts.log_c_range
       << "], " << functional_kind_name(f.kind()) << " law on the " << FlowSpace::kind_name(space.kind()) << " flow";
  auto report = acc.finish(std::string(functional_kind_name(f.kind())) + " law: " + f.name(), desc.str(), tol);
  report.diagnostics.emplace_back("identity_max", identity_max);
  return report;
}

/// Law check for the pointwise sum J = J^{(1)} + J^{(2)} of two functionals
/// related to the same cocycle.
inline VerificationReport decompose_check(const SemiAdditiveFunctional& f1, const SemiAdditiveFunctional& f2,
                                          std::size_t samples, std::uint64_t seed, double tol = 1e-11,
                                          LawSampling opts = {}) {
  if (f1.kind() != FunctionalKind::Related || f2.kind() != FunctionalKind::Related)
    throw InvalidArgument("decompose_check: both parts must be related to a cocycle");
  auto report = verify_functional(sum(f1, f2), samples, seed, tol, opts);
  report.check = "decomposition: " + f1.name() + " + " + f2.name();
  return report;
}

}  // namespace ssmma
