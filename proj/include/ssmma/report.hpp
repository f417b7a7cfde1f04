#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ssmma {

/// One sampled location where a law was evaluated. Fields that do not apply to a
/// check (c2 for single-c checks, u for non-kernel checks) are NaN.
struct Counterexample {
  std::size_t fiber = 0;
  double coord = std::numeric_limits<double>::quiet_NaN();
  double u = std::numeric_limits<double>::quiet_NaN();
  double c1 = std::numeric_limits<double>::quiet_NaN();
  double c2 = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  std::string note;
};

struct VerificationReport {
  std::string check;
  std::string sampling;
  std::size_t evaluations = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::vector<Counterexample> worst;  // descending residual, at most 10
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> warnings;

  double diagnostic(const std::string& name) const {
    for (const auto& [key, value] : diagnostics) {
      if (key == name) return value;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// Streaming max/mean reduction that keeps the worst samples. Merging two
/// accumulators gives the same max and the same top list as a serial pass.
class ResidualAccumulator {
 public:
  static constexpr std::size_t kWorstKept = 10;

  void add(double residual, Counterexample where) {
    // NaN residuals are law violations
    if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
    ++count_;
    if (std::isfinite(residual)) {
      sum_ += residual;
    } else {
      ++non_finite_;
    }
    max_ = std::max(max_, residual);
    where.residual = residual;
    if (residual > 0.0) keep(std::move(where));
  }

  void merge(const ResidualAccumulator& other) {
    count_ += other.count_;
    non_finite_ += other.non_finite_;
    sum_ += other.sum_;
    max_ = std::max(max_, other.max_);
    for (const auto& w : other.worst_) keep(w);
  }

  std::size_t count() const { return count_; }
  double max() const { return max_; }
  double mean() const {
    if (count_ == 0) return 0.0;
    if (non_finite_ > 0) return std::numeric_limits<double>::infinity();
    return sum_ / static_cast<double>(count_);
  }

  VerificationReport finish(std::string check, std::string sampling, double tolerance) const {
    VerificationReport r;
    r.check = std::move(check);
    r.sampling = std::move(sampling);
    r.evaluations = count_;
    r.max_residual = max_;
    r.mean_residual = mean();
    r.tolerance = tolerance;
    r.pass = max_ <= tolerance;
    r.worst = worst_;
    return r;
  }

 private:
  void keep(Counterexample w) {
    auto pos = std::find_if(worst_.begin(), worst_.end(),
                            [&](const Counterexample& e) { return e.residual < w.residual; });
    if (pos == worst_.end() && worst_.size() >= kWorstKept) return;
    worst_.insert(pos, std::move(w));
    if (worst_.size() > kWorstKept) worst_.pop_back();
  }

  std::size_t count_ = 0;
  std::size_t non_finite_ = 0;
  double sum_ = 0.0;
  double max_ = 0.0;
  std::vector<Counterexample> worst_;
};

namespace detail {

inline nlohmann::json number_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["sampling"] = r.sampling;
  j["evaluations"] = r.evaluations;
  j["max_residual"] = detail::number_or_null(r.max_residual);
  j["mean_residual"] = detail::number_or_null(r.mean_residual);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  auto& worst = j["worst"] = nlohmann::json::array();
  for (const auto& w : r.worst) {
    worst.push_back({{"fiber", w.fiber},
                     {"coord", detail::number_or_null(w.coord)},
                     {"u", detail::number_or_null(w.u)},
                     {"c1", detail::number_or_null(w.c1)},
                     {"c2", detail::number_or_null(w.c2)},
                     {"residual", detail::number_or_null(w.residual)},
                     {"note", w.note}});
  }
  auto& diag = j["diagnostics"] = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = detail::number_or_null(v);
  j["warnings"] = r.warnings;
  return j;
}

/// Counterexample records as delimited text, one row per sample.
inline void write_csv(std::ostream& os, const VerificationReport& r) {
  os << "check,fiber,coord,u,c1,c2,residual,note\n";
  for (const auto& w : r.worst) {
    os << r.check << ',' << w.fiber << ',' << detail::csv_number(w.coord) << ','
       << detail::csv_number(w.u) << ',' << detail::csv_number(w.c1) << ','
       << detail::csv_number(w.c2) << ',' << detail::csv_number(w.residual) << ',' << w.note
       << '\n';
  }
}

inline std::string summary_line(const VerificationReport& r) {
  std::ostringstream os;
  os.precision(3);
  os << (r.pass ? "PASS " : "FAIL ") << r.check << ": max residual " << std::scientific
     << r.max_residual << " (tol " << r.tolerance << ", " << std::defaultfloat << r.evaluations
     << " evaluations)";
  return os.str();
}

}  // namespace ssmma
