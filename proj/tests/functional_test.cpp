#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ssmma/controls.hpp"
#include "ssmma/functional.hpp"

using namespace ssmma;

namespace {

constexpr double kE = std::numbers::e;

int sign_of_cos(const Point& p) { return std::cos(p.coord) >= 0.0 ? 1 : -1; }
int sign_of_sin(const Point& p) { return std::sin(p.coord) >= 0.0 ? 1 : -1; }

// Special flow over {0, 1, 2} with V = (0 1 2) and dyadic roofs, so every roof time
// and every partial sum is exact.
SpecialRep three_point_rep() { return SpecialRep({1.0, 0.5, 2.25}, {1, 2, 0}); }

// A_t(y, h) = prod over the roof crossings of a(base): a cocycle whose values are
// exact dyadic rationals. Crossing downward divides by a.
Cocycle dyadic_cocycle(const FlowSpace& space, std::vector<double> a) {
  return Cocycle::from_values(
      space, Codomain::NonZero,
      [space, a](Scale s, const Point& p) {
        const SpecialRep& rep = space.special_rep();
        const long long n = rep.locate(p.fiber, p.coord + s.log_c).n;
        double prod = 1.0;
        std::size_t y = p.fiber;
        for (long long k = 0; k < n; ++k, y = rep.successor(y)) prod *= a[y];
        for (long long k = 0; k > n; --k) {
          y = rep.predecessor(y);
          prod /= a[y];
        }
        return prod;
      },
      "dyadic");
}

// The two sums of the G_n definition written out term by term.
double forward_sum(const Cocycle& A, const FiberFunction& G1, const SpecialRep& rep, std::size_t y, long long n) {
  double s = 0.0;
  for (long long k = 0; k < n; ++k)
    s += A.at(Scale::from_log(rep.partial_sum(y, k)), {y, 0.0}) * G1(rep.iterate(y, k));
  return s;
}
double backward_sum(const Cocycle& A, const FiberFunction& G1, const SpecialRep& rep, std::size_t y, long long n) {
  double s = 0.0;
  for (long long k = n; k <= -1; ++k)
    s += A.at(Scale::from_log(rep.partial_sum(y, k)), {y, 0.0}) * G1(rep.iterate(y, k));
  return s;
}

double ulp(double x) { return std::nextafter(std::fabs(x), std::numeric_limits<double>::infinity()) - std::fabs(x); }

}  // namespace

// ---------------------------------------------------------------------------
// coboundary_functional

TEST(CoboundaryFunctional, ZeroF) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const auto f = coboundary_functional(unit_cocycle(s), [](const Point&) { return 0.0; });
  CounterRng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(f(std::exp(rng.uniform(-5, 5)), s.sample(rng)), 0.0);
}

TEST(CoboundaryFunctional, IdentityFlowUnitCocycle) {
  const FlowSpace s = FlowSpace::identity({"a", "b"});
  const auto f = coboundary_functional(unit_cocycle(s), [](const Point& p) { return 3.0 + p.fiber; });
  for (double c : {0.1, 2.0, 50.0}) {
    EXPECT_EQ(f(c, {0, 0.0}), 0.0);
    EXPECT_EQ(f(c, {1, 0.0}), 0.0);
  }
}

TEST(CoboundaryFunctional, CyclicTransformLaw) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 0.75});
  const Cocycle b = cyclic_cocycle([](std::size_t z) { return z == 0 ? -1 : 1; }, sign_of_sin, s);
  const Cocycle B = transform_cocycle_B({0.7, 1.2, false}, b, radon_nikodym_cocycle(s));
  const auto f = coboundary_functional(B, [](const Point& p) { return p.coord * p.coord; });
  const auto r = verify_functional(f, 10000, 2);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);

  // two-sided evaluation by hand
  CounterRng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Scale s1 = Scale::from_log(rng.uniform(-5, 5)), s2 = Scale::from_log(rng.uniform(-5, 5));
    const Point p = s.sample(rng);
    const Scale s12 = Scale::from_log(s1.log_c + s2.log_c);
    const Point p1 = s.apply(s1, p);
    const Point p12 = s.apply(s12, p);
    const double lhs = B.at(s12, p) * p12.coord * p12.coord - p.coord * p.coord;
    const double rhs = (B.at(s1, p) * p1.coord * p1.coord - p.coord * p.coord) +
                       B.at(s1, p) * (B.at(s2, p1) * p12.coord * p12.coord - p1.coord * p1.coord);
    ASSERT_LE(std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)), 1e-11);
  }
}

// ---------------------------------------------------------------------------
// G~_n

TEST(GTilde, EmptyAndUnitSums) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const Cocycle one = unit_cocycle(s);
  const FiberFunction G1 = [](std::size_t) { return 1.0; };
  for (long long n = 0; n <= 20; ++n) EXPECT_EQ(g_tilde_n(one, G1, s.special_rep(), 0, n), static_cast<double>(n));
}

TEST(GTilde, MatchesLiteralSums) {
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const SpecialRep& rep = s.special_rep();
  const Cocycle A = dyadic_cocycle(s, {2.0, -0.5, 4.0});
  const FiberFunction G1 = [](std::size_t y) { return static_cast<double>(3 * y + 1) / 8.0; };
  for (std::size_t y = 0; y < 3; ++y) {
    for (long long n = 0; n <= 5; ++n) EXPECT_EQ(g_tilde_n(A, G1, rep, y, n), forward_sum(A, G1, rep, y, n));
    for (long long n = -5; n < 0; ++n) EXPECT_EQ(g_tilde_n(A, G1, rep, y, n), -backward_sum(A, G1, rep, y, n));
  }
}

TEST(GTilde, MinusOneIsForcedByRecursion) {
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const SpecialRep& rep = s.special_rep();
  const Cocycle A = dyadic_cocycle(s, {2.0, -0.5, 4.0});
  const FiberFunction G1 = [](std::size_t y) { return 1.0 + static_cast<double>(y); };
  for (std::size_t y = 0; y < 3; ++y) {
    const std::size_t prev = rep.predecessor(y);
    const double a = A.at(Scale::from_log(rep.partial_sum(y, -1)), {y, 0.0});
    EXPECT_EQ(g_tilde_n(A, G1, rep, y, -1), -a * G1(prev));
  }
}

TEST(GTilde, RecursionHoldsExactly) {
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const SpecialRep& rep = s.special_rep();
  const Cocycle A = dyadic_cocycle(s, {2.0, -0.5, 4.0});
  const FiberFunction G1 = [](std::size_t y) { return static_cast<double>(3 * y + 1) / 8.0; };
  for (std::size_t y = 0; y < 3; ++y) {
    EXPECT_EQ(g_tilde_n(A, G1, rep, y, 0), 0.0);
    for (long long n = -5; n <= 5; ++n) {
      for (long long m = -5; m <= 5; ++m) {
        const double lhs = g_tilde_n(A, G1, rep, y, n + m);
        const double rhs = g_tilde_n(A, G1, rep, y, n) +
                           A.at(Scale::from_log(rep.partial_sum(y, n)), {y, 0.0}) *
                               g_tilde_n(A, G1, rep, rep.iterate(y, n), m);
        EXPECT_EQ(lhs, rhs) << "y = " << y << " n = " << n << " m = " << m;
      }
    }
  }
}

TEST(GTilde, UnsignedBackwardConventionBreaksRecursion) {
  // G_n = +sum_{k=n}^{-1} ... for n < 0 violates the recursion at n = -1, m = 1
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const SpecialRep& rep = s.special_rep();
  const Cocycle A = dyadic_cocycle(s, {2.0, -0.5, 4.0});
  const FiberFunction G1 = [](std::size_t) { return 1.0; };
  auto unsigned_g = [&](std::size_t y, long long n) {
    return n >= 0 ? forward_sum(A, G1, rep, y, n) : backward_sum(A, G1, rep, y, n);
  };
  const std::size_t y = 0;
  const double lhs = unsigned_g(y, 0);
  const double rhs =
      unsigned_g(y, -1) + A.at(Scale::from_log(rep.partial_sum(y, -1)), {y, 0.0}) * unsigned_g(rep.iterate(y, -1), 1);
  EXPECT_NE(lhs, rhs);
}

TEST(GTilde, DyadicCocycleIsACocycle) {
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const auto r = verify_cocycle(dyadic_cocycle(s, {2.0, -0.5, 4.0}), 10000, 4);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_residual, 0.0);
}

// ---------------------------------------------------------------------------
// special_second_component

TEST(SpecialSecond, EmptySumWindow) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const auto f = special_second_component(unit_cocycle(s), [](std::size_t) { return 1.0; });
  EXPECT_EQ(f(std::exp(0.2), {0, 0.5}), 0.0);
  EXPECT_EQ(f(1.0, {0, 1.9}), 0.0);
}

TEST(SpecialSecond, SingleUnitTerm) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const auto f = special_second_component(unit_cocycle(s), [](std::size_t) { return 1.0; });
  EXPECT_EQ(f(kE, {0, 1.5}), 1.0);
}

TEST(SpecialSecond, GeometricClosedForm) {
  const double q = 1.5, H = 0.7, alpha = 1.2;
  const FlowSpace s = FlowSpace::cyclic({"z"}, {q});
  const SelfSimilarity ss{H, alpha, false};
  const Cocycle B = transform_cocycle_B(ss, unit_cocycle(s), radon_nikodym_cocycle(s));
  const double F1 = 0.75;
  const auto f = special_second_component(B, [F1](std::size_t) { return F1; });
  const double kappa = ss.kappa();
  const double rho = std::exp(kappa * q);
  CounterRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform(0.0, q);
    const double t = rng.uniform(-10.0, 10.0);
    const long long n = static_cast<long long>(std::floor((u + t) / q));
    double closed = std::exp(-kappa * u) * F1 * (std::pow(rho, static_cast<double>(n)) - 1.0) / (rho - 1.0);
    const double got = f.at_log(t, {0, u});
    if (std::fabs((u + t) / q - std::round((u + t) / q)) < 1e-9) continue;  // skip exact roof hits
    EXPECT_NEAR(got, closed, 1e-12 * (1.0 + std::fabs(closed))) << "n = " << n;
  }
}

TEST(SpecialSecond, RelatedLawOnCyclicFlow) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 1.25});
  const Cocycle b = cyclic_cocycle([](std::size_t z) { return z == 0 ? -1 : 1; }, sign_of_sin, s);
  const Cocycle B = transform_cocycle_B({0.7, 1.2, false}, b, radon_nikodym_cocycle(s));
  const auto f = special_second_component(B, [](std::size_t z) { return 1.0 + 2.0 * static_cast<double>(z); });
  const auto r = verify_functional(f, 10000, 6);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);
}

TEST(SpecialSecond, RelatedLawOnSpecialFlow) {
  const FlowSpace s = FlowSpace::special(three_point_rep());
  const auto f = special_second_component(dyadic_cocycle(s, {1.5, -0.75, 1.25}),
                                          [](std::size_t y) { return std::cos(static_cast<double>(y)); });
  const auto r = verify_functional(f, 10000, 7);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);
}

TEST(SpecialSecond, VanishingCocycleIsDegenerate) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const Cocycle zero = Cocycle::from_values(
      s, Codomain::NonZero, [](Scale sc, const Point&) { return sc.log_c == 0.0 ? 1.0 : 0.0; }, "zero");
  const auto f = special_second_component(zero, [](std::size_t) { return 1.0; });
  EXPECT_THROW(f(std::exp(3.0), {0, 0.5}), DegenerateCocycle);
}

TEST(SpecialSecond, RequiresSpecialRepresentation) {
  EXPECT_THROW(special_second_component(unit_cocycle(FlowSpace::dissipative({"y"})), [](std::size_t) { return 1.0; }),
               UnsupportedOperation);
}

// ---------------------------------------------------------------------------
// solve_one_semi

TEST(OneSemi, UnitScaleVanishes) {
  const FlowSpace spaces[] = {FlowSpace::identity({"x"}), FlowSpace::dissipative({"y"}),
                              FlowSpace::cyclic({"z"}, {2.0})};
  CounterRng rng(8);
  for (const auto& s : spaces) {
    const auto g = solve_one_semi(s, [](const Point& p) { return std::sin(p.coord) + 2.0; });
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(g(1.0, s.sample(rng)), 0.0);
  }
}

TEST(OneSemi, CyclicWorkedValue) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const auto g = solve_one_semi(s, [](const Point& p) { return p.coord; });
  // g_{e^2} = g_e / e + g_e o psi_e with g_e(0.5) = 1.5 - 0.5/e and g_e(1.5) = 0.5 - 1.5/e
  const double by_law = (1.5 - 0.5 / kE) / kE + (0.5 - 1.5 / kE);
  EXPECT_NEAR(by_law, 0.5 - 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(g.at(Scale::from_log(2.0), {0, 0.5}), by_law, 1e-12);
  EXPECT_NEAR(g(std::exp(2.0), {0, 0.5}), 0.432332358381693654, 1e-12);
}

TEST(OneSemi, IdentityDirectFormula) {
  const auto g = solve_one_semi(FlowSpace::identity({"x"}), [](const Point&) { return 3.0; });
  EXPECT_EQ(g(2.0, {0, 0.0}), -1.5);
}

TEST(OneSemi, LawOnEveryFlow) {
  const FlowSpace spaces[] = {FlowSpace::identity({"a", "b"}), FlowSpace::dissipative({"y0", "y1"}),
                              FlowSpace::cyclic({"z0", "z1"}, {2.0, std::numbers::pi}),
                              FlowSpace::special(three_point_rep())};
  for (const auto& s : spaces) {
    const auto g = solve_one_semi(s, [](const Point& p) { return std::sin(p.coord) + 0.5 * p.fiber; });
    const auto r = verify_functional(g, 10000, 9);
    EXPECT_TRUE(r.pass) << FlowSpace::kind_name(s.kind());
    EXPECT_LE(r.max_residual, 1e-11) << FlowSpace::kind_name(s.kind());
  }
}

// ---------------------------------------------------------------------------
// solve_two_semi

TEST(TwoSemi, IdentityExamples) {
  const FlowSpace s = FlowSpace::identity({"x"});
  const auto one = [](const Point&) { return 1.0; };
  // H - 1/alpha = 0.5 with H = 1.5, alpha = 1
  const auto k = solve_two_semi(s, {1.5, 1.0, false}, one);
  EXPECT_NEAR(k(4.0, {0, 0.0}), 0.5, 1e-15);
  const auto crit = solve_two_semi(s, SelfSimilarity::critical_for(1.25), one);
  EXPECT_NEAR(crit(kE, {0, 0.0}), 1.0, 1e-15);
}

TEST(TwoSemi, CyclicLogBranchExample) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  TwoSemiData d;
  d.j1 = [](std::size_t) { return 1.0; };
  const auto j = solve_two_semi(s, SelfSimilarity::critical_for(1.5), [](const Point&) { return 0.0; }, d);
  EXPECT_EQ(j(kE, {0, 1.5}), 1.0);
  // both sides of the 2-semi law at (c1, c2) = (e, e^{0.3})
  const Scale s1 = Scale::from_log(1.0), s2 = Scale::from_log(0.3);
  EXPECT_NEAR(j.at(Scale::from_log(1.3), {0, 1.5}), law_rhs(j, s1, s2, {0, 1.5}), 1e-15);
}

TEST(TwoSemi, DissipativeLaw) {
  const FlowSpace s = FlowSpace::dissipative({"y0", "y1"});
  TwoSemiData d;
  d.b = sign_of_cos;
  const SelfSimilarity ss{0.9, 1.0 / 0.6, false};
  ASSERT_NEAR(ss.kappa(), 0.3, 1e-15);
  const auto j = solve_two_semi(s, ss, [](const Point& p) { return std::exp(-0.1 * p.coord * p.coord) + p.fiber; }, d);
  const auto r = verify_functional(j, 10000, 10);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);
}

TEST(TwoSemi, IdentityLawBothBranches) {
  const FlowSpace s = FlowSpace::identity({"a", "b"});
  const auto jf = [](const Point& p) { return 2.0 - 3.0 * p.fiber; };
  for (const SelfSimilarity& ss : {SelfSimilarity{0.7, 1.2, false}, SelfSimilarity::critical_for(1.2)}) {
    const auto r = verify_functional(solve_two_semi(s, ss, jf), 10000, 11);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_residual, 1e-11);
  }
}

TEST(TwoSemi, CyclicLawBothBranches) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b", "c"}, {2.0, 0.6, 1.7});
  TwoSemiData d;
  d.b = sign_of_sin;
  d.b1 = [](std::size_t z) { return z == 1 ? -1 : 1; };
  d.j1 = [](std::size_t z) { return 0.5 + static_cast<double>(z); };
  const auto jf = [](const Point& p) { return std::cos(3.0 * p.coord) + p.coord; };
  const auto crit = solve_two_semi(s, SelfSimilarity::critical_for(1.4), jf, d);
  const auto r1 = verify_functional(crit, 10000, 12);
  EXPECT_TRUE(r1.pass);
  EXPECT_LE(r1.max_residual, 1e-11);

  d.j1 = nullptr;
  const auto off = solve_two_semi(s, {0.4, 1.4, false}, jf, d);
  const auto r2 = verify_functional(off, 10000, 13);
  EXPECT_TRUE(r2.pass);
  EXPECT_LE(r2.max_residual, 1e-11);
}

TEST(TwoSemi, LogBranchStraddlesWindings) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  TwoSemiData d;
  d.j1 = [](std::size_t) { return 1.0; };
  const auto j = solve_two_semi(s, SelfSimilarity::critical_for(1.5), [](const Point&) { return 0.0; }, d);
  CounterRng rng(14);
  int crossings = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point p = s.sample(rng);
    const double t1 = rng.uniform(-5, 5), t2 = rng.uniform(-5, 5);
    const long long n1 = s.winding_log(t1, p);
    const long long n2 = s.winding_log(t2, s.apply_log(t1, p));
    crossings += (n1 != 0 && n2 != 0) ? 1 : 0;
    ASSERT_EQ(j.at_log(t1 + t2, p), static_cast<double>(n1 + n2));
  }
  EXPECT_GT(crossings, 1000);
}

TEST(TwoSemi, WithoutIndicatorFails) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 1.0});
  TwoSemiData d;
  d.b1 = [](std::size_t z) { return z == 0 ? -1 : 1; };
  d.j1 = [](std::size_t) { return 1.0; };
  const auto bad = controls::cyclic_two_semi_without_indicator(s, 1.5, [](const Point&) { return 0.0; }, d);
  const auto r = verify_functional(bad, 10000, 15);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_residual, 0.1);
}

TEST(TwoSemi, Errors) {
  TwoSemiData d;
  d.j1 = [](std::size_t) { return 1.0; };
  const auto jf = [](const Point&) { return 1.0; };
  EXPECT_THROW(solve_two_semi(FlowSpace::identity({"x"}), {0.7, 1.2, false}, jf, d), InvalidArgument);
  EXPECT_THROW(solve_two_semi(FlowSpace::dissipative({"y"}), {0.7, 1.2, false}, jf, d), InvalidArgument);
  EXPECT_THROW(solve_two_semi(FlowSpace::identity({"x"}), {0.7, 2.0, false}, jf), InvalidArgument);
  EXPECT_THROW(solve_two_semi(FlowSpace::identity({"x"}), {0.7, 1.2, true}, jf), InvalidArgument);
  EXPECT_THROW(solve_two_semi(FlowSpace::special(three_point_rep()), {0.7, 1.2, false}, jf), UnsupportedOperation);
}

// ---------------------------------------------------------------------------
// to_related

TEST(ToRelated, ZeroStaysZero) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const auto J = to_related(SemiAdditiveFunctional::one_semi(s, [](Scale, const Point&) { return 0.0; }, "0"));
  CounterRng rng(16);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(J(std::exp(rng.uniform(-5, 5)), s.sample(rng)), 0.0);
}

TEST(ToRelated, IdentityOneSemi) {
  const auto J = to_related(solve_one_semi(FlowSpace::identity({"x"}), [](const Point&) { return 3.0; }));
  EXPECT_EQ(J.kind(), FunctionalKind::Related);
  for (double c : {0.25, 2.0, 8.0}) EXPECT_NEAR(J(c, {0, 0.0}), (1.0 - c) * 3.0, 1e-13);
  EXPECT_EQ(J.cocycle()(5.0, {0, 0.0}), 5.0);
}

TEST(ToRelated, CyclicTwoSemiPassesRelatedLaw) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 0.8});
  TwoSemiData d;
  d.b = sign_of_sin;
  d.b1 = [](std::size_t z) { return z == 0 ? -1 : 1; };
  const auto jf = [](const Point& p) { return p.coord * (1.0 + p.fiber); };
  for (const SelfSimilarity& ss : {SelfSimilarity{0.6, 1.3, false}, SelfSimilarity::critical_for(1.3)}) {
    TwoSemiData dd = d;
    if (ss.critical) dd.j1 = [](std::size_t) { return 2.0; };
    const auto J = to_related(solve_two_semi(s, ss, jf, dd));
    const auto r = verify_functional(J, 10000, 17);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_residual, 1e-11);
  }
}

TEST(ToRelated, RoundTripWithinTwoUlps) {
  const FlowSpace s = FlowSpace::dissipative({"y"});
  const auto g = solve_one_semi(s, [](const Point& p) { return std::sin(p.coord); });
  TwoSemiData d;
  d.b = sign_of_cos;
  const SelfSimilarity ss{0.9, 1.0 / 0.6, false};
  const auto j = solve_two_semi(s, ss, [](const Point& p) { return std::cos(p.coord); }, d);
  const auto Jg = to_related(g);
  const auto Jj = to_related(j);
  CounterRng rng(18);
  for (int i = 0; i < 10000; ++i) {
    const Scale sc = Scale::from_log(rng.uniform(-5, 5));
    const Point p = s.sample(rng);
    const double a = g.at(sc, p), b = j.at(sc, p);
    ASSERT_LE(std::fabs(Jg.at(sc, p) / sc.c - a), 2.0 * ulp(a));
    ASSERT_LE(std::fabs(Jj.at(sc, p) / std::pow(sc.c, ss.kappa()) - b), 2.0 * ulp(b));
  }
}

TEST(ToRelated, AlreadyRelatedIsAnError) {
  const FlowSpace s = FlowSpace::identity({"x"});
  const auto J = to_related(solve_one_semi(s, [](const Point&) { return 1.0; }));
  EXPECT_THROW(to_related(J), IdempotenceError);
}

// ---------------------------------------------------------------------------
// decompose_check and verify_functional

TEST(Decompose, ZeroSecondPartKeepsResidual) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 1.25});
  const Cocycle B = transform_cocycle_B({0.7, 1.2, false}, cyclic_cocycle([](std::size_t) { return 1; }, sign_of_sin, s),
                                        radon_nikodym_cocycle(s));
  const auto f1 = coboundary_functional(B, [](const Point& p) { return p.coord * p.coord; });
  const auto f2 = SemiAdditiveFunctional::related(B, [](Scale, const Point&) { return 0.0; }, "0");
  const auto alone = verify_functional(f1, 5000, 19);
  const auto both = decompose_check(f1, f2, 5000, 19);
  EXPECT_EQ(both.max_residual, alone.max_residual);
}

TEST(Decompose, CoboundaryPlusSpecial) {
  const FlowSpace s = FlowSpace::cyclic({"a", "b"}, {2.0, 1.25});
  const Cocycle B = transform_cocycle_B({0.7, 1.2, false}, cyclic_cocycle([](std::size_t) { return 1; }, sign_of_sin, s),
                                        radon_nikodym_cocycle(s));
  const auto f1 = coboundary_functional(B, [](const Point& p) { return p.coord * p.coord; });
  const auto f2 = special_second_component(B, [](std::size_t z) { return 1.0 + 2.0 * static_cast<double>(z); });
  const auto r = decompose_check(f1, f2, 10000, 20);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);
}

TEST(Decompose, BothZero) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const Cocycle B = unit_cocycle(s);
  const auto z = SemiAdditiveFunctional::related(B, [](Scale, const Point&) { return 0.0; }, "0");
  const auto r = decompose_check(z, z, 1000, 21);
  EXPECT_EQ(r.max_residual, 0.0);
}

TEST(Decompose, MismatchedCocyclesRejected) {
  const FlowSpace s = FlowSpace::cyclic({"z"}, {2.0});
  const Cocycle B1 = transform_cocycle_B({0.7, 1.2, false}, unit_cocycle(s), radon_nikodym_cocycle(s));
  const Cocycle B2 = transform_cocycle_B({0.9, 1.2, false}, unit_cocycle(s), radon_nikodym_cocycle(s));
  const auto f1 = coboundary_functional(B1, [](const Point& p) { return p.coord; });
  const auto f2 = coboundary_functional(B2, [](const Point& p) { return p.coord; });
  EXPECT_THROW(decompose_check(f1, f2, 100, 22), InvalidArgument);
  EXPECT_THROW(decompose_check(f1, solve_one_semi(s, [](const Point&) { return 1.0; }), 100, 22), InvalidArgument);
}

TEST(VerifyFunctional, ZeroFunctional) {
  const FlowSpace s = FlowSpace::dissipative({"y"});
  const auto z = SemiAdditiveFunctional::one_semi(s, [](Scale, const Point&) { return 0.0; }, "0");
  const auto r = verify_functional(z, 10000, 23);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_residual, 0.0);
}

TEST(VerifyFunctional, CyclicSinOneSemi) {
  const auto g = solve_one_semi(FlowSpace::cyclic({"z"}, {2.0}), [](const Point& p) { return std::sin(p.coord); });
  const auto r = verify_functional(g, 10000, 24);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-11);
}

TEST(VerifyFunctional, WrongLawIsCaught) {
  // c g_c is related to B_c = c, not 1-semi-additive
  const FlowSpace s = FlowSpace::dissipative({"y"});
  const auto g = solve_one_semi(s, [](const Point& p) { return std::sin(p.coord); });
  const auto wrong = SemiAdditiveFunctional::one_semi(
      s, [g](Scale sc, const Point& p) { return sc.c * g.at(sc, p); }, "c g_c");
  EXPECT_FALSE(verify_functional(wrong, 2000, 25).pass);
}

TEST(Vanishing, EveryConstructorAtUnitScale) {
  const FlowSpace cyc = FlowSpace::cyclic({"a", "b"}, {2.0, 0.7});
  const FlowSpace dis = FlowSpace::dissipative({"y"});
  const Cocycle B = transform_cocycle_B({0.7, 1.2, false}, cyclic_cocycle([](std::size_t) { return -1; }, sign_of_sin, cyc),
                                        radon_nikodym_cocycle(cyc));
  TwoSemiData d;
  d.j1 = [](std::size_t) { return 1.0; };
  TwoSemiData dd;
  dd.b = sign_of_cos;
  const std::vector<SemiAdditiveFunctional> fs = {
      coboundary_functional(B, [](const Point& p) { return p.coord * p.coord; }),
      special_second_component(B, [](std::size_t) { return 1.0; }),
      solve_one_semi(cyc, [](const Point& p) { return p.coord; }),
      solve_one_semi(dis, [](const Point& p) { return std::sin(p.coord); }),
      solve_two_semi(cyc, SelfSimilarity::critical_for(1.5), [](const Point& p) { return p.coord; }, d),
      solve_two_semi(dis, {0.9, 1.0 / 0.6, false}, [](const Point& p) { return std::cos(p.coord); }, dd),
      to_related(solve_one_semi(cyc, [](const Point& p) { return p.coord; })),
  };
  CounterRng rng(26);
  for (const auto& f : fs) {
    for (int i = 0; i < 1000; ++i) {
      const Point p = f.space().sample(rng);
      EXPECT_LE(std::fabs(f(1.0, p)), 1e-14) << f.name();
    }
  }
}
