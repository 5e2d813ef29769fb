#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "semigroup_lab/parallel.hpp"

namespace semigroup_lab {

/// Growth data of a generator B used to bound t -> ||exp(tB) (.)|| between samples.
struct GrowthRates {
  double log_norm_plus = 0.0;  // max(0, mu_2(B)); first-order bound exp(h mu)
  double square_norm = 0.0;    // ||B^2||; second-order (interpolation) bound
};

struct CertifiedMaximum {
  double bound = 0.0;  // sound upper bound of the sup over [0, t_end]
  double best = 0.0;   // largest sampled value
  double argmax = 0.0;
  std::vector<double> t;  // sorted sample times
  std::vector<double> value;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

struct Interval {
  double a, b, fa, fb;
  bool frozen = false;
};

// Bound of f on [a, b] where f(t) = ||S(t) y|| for a semigroup S with generator B.
//  first order:  f(a + s) <= f(a) exp(s mu+)
//  second order: S on [a,b] minus its linear interpolant is at most h^2/8 ||B^2|| max||S||,
//                so max f <= max(fa, fb) / (1 - h^2 ||B^2|| / 8).
inline double interval_bound(const Interval& iv, const GrowthRates& rates) {
  double h = iv.b - iv.a;
  double first = iv.fa * std::exp(h * rates.log_norm_plus);
  double q = h * h * rates.square_norm / 8.0;
  double second = q < 1.0 ? std::max(iv.fa, iv.fb) / (1.0 - q) : std::numeric_limits<double>::infinity();
  return std::max({std::min(first, second), iv.fa, iv.fb});
}

}  // namespace detail

/// Certified maximum of a semigroup orbit norm over [0, t_end] by adaptive bisection:
/// intervals are split until every interval bound is within (1 + rel_tol) of the best
/// sample. The returned bound is sound whether or not the evaluation budget ran out.
template <class F>
CertifiedMaximum certify_maximum(F&& f, double t_end, const GrowthRates& rates, double rel_tol,
                                 std::size_t initial_intervals = 64,
                                 std::size_t max_evaluations = 200000) {
  CertifiedMaximum out;
  std::vector<double> t0(initial_intervals + 1);
  for (std::size_t i = 0; i <= initial_intervals; ++i)
    t0[i] = t_end * static_cast<double>(i) / static_cast<double>(initial_intervals);
  t0.front() = 0.0;
  t0.back() = t_end;
  std::vector<double> f0 = parallel_map<double>(t0.size(), [&](std::size_t i) { return f(t0[i]); });
  out.evaluations = t0.size();

  std::vector<detail::Interval> intervals;
  intervals.reserve(initial_intervals);
  double best = 0.0;
  double argmax = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    if (f0[i] > best) { best = f0[i]; argmax = t0[i]; }
    if (i + 1 < f0.size()) intervals.push_back({t0[i], t0[i + 1], f0[i], f0[i + 1]});
  }

  while (true) {
    double threshold = best * (1.0 + rel_tol);
    std::vector<std::size_t> split;
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (!intervals[i].frozen && detail::interval_bound(intervals[i], rates) > threshold) split.push_back(i);
    if (split.empty()) break;
    if (out.evaluations + split.size() > max_evaluations) break;

    std::vector<double> mids(split.size());
    for (std::size_t k = 0; k < split.size(); ++k) {
      const auto& iv = intervals[split[k]];
      mids[k] = iv.a + 0.5 * (iv.b - iv.a);
    }
    std::vector<double> fm = parallel_map<double>(mids.size(), [&](std::size_t k) {
      const auto& iv = intervals[split[k]];
      return (mids[k] > iv.a && mids[k] < iv.b) ? f(mids[k]) : 0.0;
    });
    out.evaluations += split.size();

    std::vector<detail::Interval> next;
    next.reserve(intervals.size() + split.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (k < split.size() && split[k] == i) {
        const auto& iv = intervals[i];
        if (!(mids[k] > iv.a && mids[k] < iv.b)) {
          auto frozen = iv;
          frozen.frozen = true;  // cannot be split further in binary64
          next.push_back(frozen);
        } else {
          next.push_back({iv.a, mids[k], iv.fa, fm[k]});
          next.push_back({mids[k], iv.b, fm[k], iv.fb});
          if (fm[k] > best) { best = fm[k]; argmax = mids[k]; }
        }
        ++k;
      } else {
        next.push_back(intervals[i]);
      }
    }
    intervals.swap(next);
  }

  double bound = best;
  for (const auto& iv : intervals) bound = std::max(bound, detail::interval_bound(iv, rates));
  out.bound = bound;
  out.converged = bound <= best * (1.0 + rel_tol);
  out.best = best;
  out.argmax = argmax;
  out.t.reserve(intervals.size() + 1);
  out.value.reserve(intervals.size() + 1);
  for (const auto& iv : intervals) {
    out.t.push_back(iv.a);
    out.value.push_back(iv.fa);
  }
  out.t.push_back(intervals.back().b);
  out.value.push_back(intervals.back().fb);
  return out;
}

}  // namespace semigroup_lab
