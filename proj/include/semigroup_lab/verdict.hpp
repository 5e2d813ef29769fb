#pragma once

#include <cmath>
#include <string>

namespace semigroup_lab {

enum class Status { pass, tight, fail, marginal };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::tight: return "tight";
    case Status::fail: return "fail";
    case Status::marginal: return "marginal";
  }
  return "?";
}

/// Verdict for a claim `ratio <= 1` checked with relative slack `tol`.
/// Equality within the slack is reported as tight, not as a failure.
inline Status classify_ratio(double ratio, double tol) {
  if (!(ratio <= 1.0 + tol)) return Status::fail;
  if (std::abs(ratio - 1.0) <= tol) return Status::tight;
  return Status::pass;
}

inline bool passed(Status s) { return s == Status::pass || s == Status::tight; }

}  // namespace semigroup_lab
