#pragma once

// The two adjustment formulas that turn nuisance values into an estimate of
// the assignment effect. Every learner and plug-in estimator in this library
// funnels through these three functions.

#include "catea/core.hpp"

namespace catea::adjustment {

struct CateaValue {
  double value = 0.0;
};

struct InvalidPropensity : DataError {
  using DataError::DataError;
};
struct OneSidedContract : DataError {
  using DataError::DataError;
};

// Standard backdoor adjustment: difference of assignment-conditional outcome
// means.
inline CateaValue sbd_catea(double y_t1, double y_t0) { return {y_t1 - y_t0}; }

namespace detail {
inline void require_propensity(double pi) {
  if (!(pi > 0.0 && pi < 1.0))
    throw InvalidPropensity("propensity must lie strictly inside (0,1), got " +
                            std::to_string(pi));
}
}  // namespace detail

// Conditional front-door adjustment, one-sided non-adherence:
//   [(Y(1,1) - Y(0,0))(1 - pi) + (Y(1,1) - Y(0,1)) pi] * A(1)
// Requires A(0) = 0; the y_given_at[1][0] slot is ignored.
inline CateaValue cfd_catea_one_sided(const NuisanceValues& nv) {
  detail::require_propensity(nv.pi);
  if (nv.a_given_t[0] != 0.0)
    throw OneSidedContract("one-sided CFD requires A(t=0) = 0, got " +
                           std::to_string(nv.a_given_t[0]));
  const double y11 = nv.y_given_at[1][1];
  const double y00 = nv.y_given_at[0][0];
  const double y01 = nv.y_given_at[0][1];
  return {((y11 - y00) * (1.0 - nv.pi) + (y11 - y01) * nv.pi) * nv.a_given_t[1]};
}

// Conditional front-door adjustment, two-sided non-adherence:
//   [(Y(1,0) - Y(0,0))(1 - pi) + (Y(1,1) - Y(0,1)) pi] * (A(1) - A(0))
inline CateaValue cfd_catea_two_sided(const NuisanceValues& nv) {
  detail::require_propensity(nv.pi);
  const double contrast =
      (nv.y_given_at[1][0] - nv.y_given_at[0][0]) * (1.0 - nv.pi) +
      (nv.y_given_at[1][1] - nv.y_given_at[0][1]) * nv.pi;
  return {contrast * (nv.a_given_t[1] - nv.a_given_t[0])};
}

inline CateaValue cfd_catea(const NuisanceValues& nv, NonAdherenceMode mode) {
  return mode == NonAdherenceMode::OneSided ? cfd_catea_one_sided(nv)
                                            : cfd_catea_two_sided(nv);
}

}  // namespace catea::adjustment
