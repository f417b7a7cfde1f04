#pragma once

// Canonical multiplicative flows psi_c, c > 0, on finitely presented spaces:
//   identity     psi_c(x)   = x
//   dissipative  psi_c(y,u) = (y, u + ln c)
//   cyclic       psi_c(z,v) = (z, {v + ln c}_{q(z)})
//   special      vertical unit-speed flow under a roof r over a permutation V
// All maps are evaluated in additive time t = ln c internally.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "random.hpp"
#include "report.hpp"

namespace ssmma {

struct FloorMod {
  long long n = 0;   // [v]_a = max{n : n a <= v}
  double rem = 0.0;  // {v}_a = v - a [v]_a, always in [0, a)
};

/// Integer and fractional parts of v relative to the period a > 0.
inline FloorMod floor_mod(double v, double a) {
  if (!std::isfinite(v)) throw InvalidArgument("floor_mod: v must be finite");
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("floor_mod: period must be positive and finite");
  const double q = std::floor(v / a);
  if (!(std::fabs(q) < 0x1p62)) throw InvalidArgument("floor_mod: v/a exceeds the integer range");
  double n = q;
  double rem = std::fma(-a, n, v);
  // v/a may round across an integer; one step in either direction restores n a <= v < (n+1) a
  if (rem < 0.0) {
    n -= 1.0;
    rem = std::fma(-a, n, v);
  } else if (rem >= a) {
    // the fma sign is exact, so this tests (n + 1) a <= v without rounding
    const double next = std::fma(-a, n + 1.0, v);
    if (next >= 0.0) {
      n += 1.0;
      rem = next;
    }
  }
  if (rem < 0.0) rem = 0.0;
  if (rem >= a) rem = std::nextafter(a, 0.0);
  return {static_cast<long long>(n), rem};
}

/// A point of a flow space: a fiber label (by index) and a real coordinate.
/// Identity-flow points carry coord = 0.
struct Point {
  std::size_t fiber = 0;
  double coord = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Special-flow data over a finite base: base map V (a permutation), roof r > 0,
/// and the partial sums r_n with r_{n+m}(y) = r_n(y) + r_m(V^n y) for all n, m in Z.
class SpecialRep {
 public:
  struct Location {
    long long n = 0;        // r_n(y) <= s < r_{n+1}(y)
    std::size_t base = 0;   // V^n y
    double height = 0.0;    // s - r_n(y), in [0, r(V^n y))
  };

  SpecialRep(std::vector<double> roof, std::vector<std::size_t> successor)
      : roof_(std::move(roof)), next_(std::move(successor)), prev_(next_.size()) {
    if (roof_.empty()) throw InvalidArgument("special flow: empty base");
    if (roof_.size() != next_.size()) throw InvalidArgument("special flow: roof and base map sizes differ");
    std::vector<bool> hit(next_.size(), false);
    for (std::size_t y = 0; y < next_.size(); ++y) {
      if (!(roof_[y] > 0.0) || !std::isfinite(roof_[y]))
        throw InvalidArgument("special flow: roof must be positive and finite at every base point");
      if (next_[y] >= next_.size() || hit[next_[y]])
        throw InvalidArgument("special flow: base map is not a permutation");
      hit[next_[y]] = true;
      prev_[next_[y]] = y;
    }
    stationary_ = true;
    for (std::size_t y = 0; y < next_.size(); ++y) stationary_ = stationary_ && next_[y] == y;
  }

  /// V = id, r_n(y) = n r(y): the representation of the cyclic flow.
  static SpecialRep stationary(std::vector<double> roof) {
    std::vector<std::size_t> id(roof.size());
    std::iota(id.begin(), id.end(), std::size_t{0});
    return SpecialRep(std::move(roof), std::move(id));
  }

  std::size_t size() const { return roof_.size(); }
  bool is_stationary() const { return stationary_; }
  double roof(std::size_t y) const { return roof_.at(y); }
  std::size_t successor(std::size_t y) const { return next_.at(y); }
  std::size_t predecessor(std::size_t y) const { return prev_.at(y); }
  const std::vector<double>& roofs() const { return roof_; }
  const std::vector<std::size_t>& successors() const { return next_; }

  /// V^n y.
  std::size_t iterate(std::size_t y, long long n) const {
    check_base(y);
    if (stationary_) return y;
    check_steps(n);
    for (; n > 0; --n) y = next_[y];
    for (; n < 0; ++n) y = prev_[y];
    return y;
  }

  /// r_n(y). For n < 0 this is -sum_{k=n}^{-1} r(V^k y), the sign forced by
  /// r_0 = 0 and additivity.
  double partial_sum(std::size_t y, long long n) const {
    check_base(y);
    if (stationary_) return static_cast<double>(n) * roof_[y];
    check_steps(n);
    double sum = 0.0;
    if (n >= 0) {
      for (long long k = 0; k < n; ++k, y = next_[y]) sum += roof_[y];
    } else {
      for (long long k = -1; k >= n; --k) {
        y = prev_[y];
        sum -= roof_[y];
      }
    }
    return sum;
  }

  /// Where the vertical flow started at (y, 0) sits after time s.
  Location locate(std::size_t y, double s) const {
    check_base(y);
    if (!std::isfinite(s)) throw InvalidArgument("special flow: non-finite time");
    if (stationary_) {
      const auto fm = floor_mod(s, roof_[y]);
      return {fm.n, y, fm.rem};
    }
    Location loc{0, y, s};
    std::size_t steps = 0;
    while (loc.height >= roof_[loc.base]) {
      loc.height -= roof_[loc.base];
      loc.base = next_[loc.base];
      ++loc.n;
      guard(++steps);
    }
    while (loc.height < 0.0) {
      loc.base = prev_[loc.base];
      loc.height += roof_[loc.base];
      --loc.n;
      guard(++steps);
    }
    if (loc.height >= roof_[loc.base]) loc.height = std::nextafter(roof_[loc.base], 0.0);
    return loc;
  }

  friend bool operator==(const SpecialRep& a, const SpecialRep& b) {
    return a.roof_ == b.roof_ && a.next_ == b.next_;
  }

 private:
  static constexpr long long kMaxSteps = 100'000'000;

  void check_base(std::size_t y) const {
    if (y >= roof_.size()) throw InvalidArgument("special flow: base point out of range");
  }
  static void check_steps(long long n) {
    if (n > kMaxSteps || n < -kMaxSteps) throw InvalidArgument("special flow: orbit index too large");
  }
  static void guard(std::size_t steps) {
    if (steps > static_cast<std::size_t>(kMaxSteps)) throw InvalidArgument("special flow: time too large for the roof");
  }

  std::vector<double> roof_;
  std::vector<std::size_t> next_;
  std::vector<std::size_t> prev_;
  bool stationary_ = false;
};

/// A dilation c > 0 carried together with ln c. Flows and windings read log_c;
/// power factors such as c^{-1} read c. Scale::from_log keeps ln c exact, which
/// matters when a time lands exactly on a roof crossing.
struct Scale {
  double c = 1.0;
  double log_c = 0.0;

  static Scale of(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("flow: c must be positive and finite");
    return {c, std::log(c)};
  }
  static Scale from_log(double t) {
    if (!std::isfinite(t)) throw InvalidArgument("flow: ln c must be finite");
    return {std::exp(t), t};
  }
};

/// Immutable description of a flow space. Copies share the same data, so
/// closures can hold a FlowSpace by value.
class FlowSpace {
 public:
  enum class Kind { Identity, Dissipative, Cyclic, Special };

  static FlowSpace identity(std::vector<std::string> labels, std::vector<double> weights = {}) {
    return FlowSpace(Kind::Identity, std::move(labels), std::move(weights), std::nullopt, 0.0);
  }

  /// Y x R with nu(dy) du; sample_range bounds |u| when drawing verification points.
  static FlowSpace dissipative(std::vector<std::string> labels, std::vector<double> weights = {},
                               double sample_range = 10.0) {
    if (!(sample_range > 0.0)) throw InvalidArgument("dissipative flow: sample range must be positive");
    return FlowSpace(Kind::Dissipative, std::move(labels), std::move(weights), std::nullopt, sample_range);
  }

  /// Z x [0, q(.)) with sigma(dz) dv.
  static FlowSpace cyclic(std::vector<std::string> labels, std::vector<double> periods,
                          std::vector<double> weights = {}) {
    if (periods.size() != labels.size()) throw InvalidArgument("cyclic flow: one period per fiber required");
    for (double q : periods) {
      if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("cyclic flow: q(z) must be positive and finite");
    }
    return FlowSpace(Kind::Cyclic, std::move(labels), std::move(weights), SpecialRep::stationary(std::move(periods)), 0.0);
  }

  static FlowSpace special(SpecialRep rep, std::vector<std::string> labels = {},
                           std::vector<double> weights = {}) {
    if (labels.empty()) {
      for (std::size_t y = 0; y < rep.size(); ++y) labels.push_back("y" + std::to_string(y));
    }
    if (labels.size() != rep.size()) throw InvalidArgument("special flow: one label per base point required");
    return FlowSpace(Kind::Special, std::move(labels), std::move(weights), std::move(rep), 0.0);
  }

  Kind kind() const { return data_->kind; }
  std::size_t size() const { return data_->labels.size(); }
  const std::string& label(std::size_t i) const { return data_->labels.at(i); }
  double weight(std::size_t i) const { return data_->weights.at(i); }
  const std::vector<double>& weights() const { return data_->weights; }
  double sample_range() const { return data_->sample_range; }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (data_->labels[i] == label) return i;
    }
    return std::nullopt;
  }

  bool has_special_rep() const { return data_->rep.has_value(); }

  const SpecialRep& special_rep() const {
    if (!data_->rep) throw UnsupportedOperation("special representation requires a cyclic or special flow");
    return *data_->rep;
  }

  /// q(z) for cyclic flows, r(y) for special flows.
  double period(std::size_t z) const { return special_rep().roof(z); }

  bool contains(const Point& p) const {
    if (p.fiber >= size() || !std::isfinite(p.coord)) return false;
    switch (kind()) {
      case Kind::Identity:
      case Kind::Dissipative:
        return true;
      case Kind::Cyclic:
      case Kind::Special:
        return p.coord >= 0.0 && p.coord < period(p.fiber);
    }
    return false;
  }

  void require(const Point& p) const {
    if (contains(p)) return;
    std::ostringstream os;
    os << "point (" << p.fiber << ", " << p.coord << ") is outside the " << kind_name(kind()) << " flow space";
    throw InvalidArgument(os.str());
  }

  /// psi_{e^t}(p).
  Point apply_log(double t, const Point& p) const {
    if (!std::isfinite(t)) throw InvalidArgument("flow: ln c must be finite");
    require(p);
    switch (kind()) {
      case Kind::Identity:
        return p;
      case Kind::Dissipative:
        return {p.fiber, p.coord + t};
      case Kind::Cyclic:
      case Kind::Special: {
        const auto loc = data_->rep->locate(p.fiber, p.coord + t);
        return {loc.base, loc.height};
      }
    }
    return p;
  }

  Point apply(Scale s, const Point& p) const { return apply_log(s.log_c, p); }
  Point apply(double c, const Point& p) const { return apply_log(log_of(c), p); }

  /// [v + t]_{q(z)}, the number of roof crossings.
  long long winding_log(double t, const Point& p) const {
    if (!has_special_rep()) throw UnsupportedOperation("flow_winding requires a cyclic flow");
    if (!std::isfinite(t)) throw InvalidArgument("flow: ln c must be finite");
    require(p);
    return data_->rep->locate(p.fiber, p.coord + t).n;
  }

  long long winding(Scale s, const Point& p) const { return winding_log(s.log_c, p); }
  long long winding(double c, const Point& p) const { return winding_log(log_of(c), p); }

  /// Uniform fiber, then uniform coordinate over the fiber's range.
  Point sample(CounterRng& rng) const {
    Point p{static_cast<std::size_t>(rng.below(size())), 0.0};
    switch (kind()) {
      case Kind::Identity:
        break;
      case Kind::Dissipative:
        p.coord = rng.uniform(-sample_range(), sample_range());
        break;
      case Kind::Cyclic:
      case Kind::Special:
        p.coord = rng.uniform() * period(p.fiber);
        if (p.coord >= period(p.fiber)) p.coord = 0.0;
        break;
    }
    return p;
  }

  /// Same data handle, or structurally identical.
  bool same_as(const FlowSpace& other) const {
    if (data_ == other.data_) return true;
    const auto& a = *data_;
    const auto& b = *other.data_;
    return a.kind == b.kind && a.labels == b.labels && a.weights == b.weights && a.rep == b.rep &&
           a.sample_range == b.sample_range;
  }

  static double log_of(double c) { return Scale::of(c).log_c; }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::Identity: return "identity";
      case Kind::Dissipative: return "dissipative";
      case Kind::Cyclic: return "cyclic";
      case Kind::Special: return "special";
    }
    return "?";
  }

 private:
  struct Data {
    Kind kind;
    std::vector<std::string> labels;
    std::vector<double> weights;
    std::optional<SpecialRep> rep;
    double sample_range;
  };

  FlowSpace(Kind kind, std::vector<std::string> labels, std::vector<double> weights,
            std::optional<SpecialRep> rep, double sample_range) {
    if (labels.empty()) throw InvalidArgument("flow space needs at least one fiber");
    if (weights.empty()) weights.assign(labels.size(), 1.0);
    if (weights.size() != labels.size()) throw InvalidArgument("flow space: one weight per fiber required");
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("flow space: fiber weights must be positive");
    }
    data_ = std::make_shared<const Data>(Data{kind, std::move(labels), std::move(weights), std::move(rep), sample_range});
  }

  std::shared_ptr<const Data> data_;
};

inline Point flow_apply(const FlowSpace& space, double c, const Point& p) { return space.apply(c, p); }

inline long long flow_winding(const FlowSpace& space, double c, const Point& p) { return space.winding(c, p); }

/// How law checks draw (c1, c2, p): ln c uniform on [-log_c_range, log_c_range].
struct LawSampling {
  double log_c_range = 5.0;
  double tolerance = 1e-12;
};

/// Coordinate discrepancy between psi_{c1 c2}(p) and psi_{c1}(psi_{c2}(p)).
inline VerificationReport group_law_check(const FlowSpace& space, std::size_t samples, std::uint64_t seed,
                                          LawSampling opts = {}) {
  if (samples == 0) throw InvalidArgument("group_law_check: samples must be >= 1");
  CounterRng rng(seed, 0x666C6F77);  // "flow"
  ResidualAccumulator acc;
  for (std::size_t i = 0; i < samples; ++i) {
    const double c1 = std::exp(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const double c2 = std::exp(rng.uniform(-opts.log_c_range, opts.log_c_range));
    const Point p = space.sample(rng);
    const Point lhs = space.apply(c1 * c2, p);
    const Point rhs = space.apply(c1, space.apply(c2, p));
    const double residual = lhs.fiber == rhs.fiber ? std::fabs(lhs.coord - rhs.coord)
                                                   : std::numeric_limits<double>::infinity();
    acc.add(residual, {p.fiber, p.coord, std::numeric_limits<double>::quiet_NaN(), c1, c2, 0.0, ""});

    const Point same = space.apply(1.0, p);
    acc.add(same == p ? 0.0 : std::fabs(same.coord - p.coord) + (same.fiber == p.fiber ? 0.0 : 1.0),
            {p.fiber, p.coord, std::numeric_limits<double>::quiet_NaN(), 1.0,
             std::numeric_limits<double>::quiet_NaN(), 0.0, "psi_1 != id"});
  }
  std::ostringstream desc;
  desc << samples << " random (c1, c2, p), ln c uniform on [-" << opts.log_c_range << ", " << opts.log_c_range
       << "], " << FlowSpace::kind_name(space.kind()) << " flow";
  return acc.finish("flow group law", desc.str(), opts.tolerance);
}

}  // namespace ssmma
