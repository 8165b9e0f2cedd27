#pragma once

// Closed-form estimator variances, the asymptotic variance bounds for SBD and
// CFD estimation, the variance-reduction lower bound, and the grid generator
// used to visualize where CFD is guaranteed to beat SBD.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "catea/core.hpp"

namespace catea::theory {

struct InvalidRho : DataError {
  using DataError::DataError;
};
struct OutOfRange : DataError {
  using DataError::DataError;
};
struct UnequalVariances : DataError {
  using DataError::DataError;
};
struct ZeroCell : DataError {
  using DataError::DataError;
};
struct InvalidConfig : ConfigError {
  using ConfigError::ConfigError;
};

// Population quantities parameterizing the closed-form variances and bounds:
// variances and means of the potential intakes A_{t} and outcomes Y_{a},
// plus the propensity. Delta_A and Delta_Y are always derived, never stored.
struct VarianceParams {
  double v_y0 = 0.0, v_y1 = 0.0;  // V(Y_{a=0}), V(Y_{a=1})
  double v_a0 = 0.0, v_a1 = 0.0;  // V(A_{t=0}), V(A_{t=1})
  double e_a0 = 0.0, e_a1 = 0.0;  // E(A_{t=0}), E(A_{t=1})
  double e_y0 = 0.0, e_y1 = 0.0;  // E(Y_{a=0}), E(Y_{a=1})
  double pi = 0.5;
  NonAdherenceMode mode = NonAdherenceMode::TwoSided;

  double delta_a() const { return e_a1 - e_a0; }
  double delta_y() const { return e_y1 - e_y0; }
};

struct CellProbabilities {
  double omega[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [a][t]
};

// Minimum probability among the intake/assignment combinations an individual
// can experience: (1,0) is impossible under one-sided non-adherence and is
// excluded from the minimum.
inline double rho(const CellProbabilities& cells, NonAdherenceMode mode) {
  double m = 1.0;
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      if (mode == NonAdherenceMode::OneSided && a == 1 && t == 0) continue;
      m = std::min(m, cells.omega[a][t]);
    }
  return m;
}

namespace detail {
// Variance of the assignment-conditional outcome under full mediation:
// V(Y_t) = (1 - E(A_t)) V(Y_0) + E(A_t) V(Y_1) + Delta_Y^2 V(A_t).
inline double arm_outcome_variance(const VarianceParams& vp, double e_a, double v_a) {
  const double dy = vp.delta_y();
  return (1.0 - e_a) * vp.v_y0 + e_a * vp.v_y1 + dy * dy * v_a;
}
}  // namespace detail

// Exact finite-n variance of the SBD plug-in estimator,
//   Var = V(Y_{t=1}) / (n pi) + V(Y_{t=0}) / (n (1-pi)),
// with the arm variances expanded by full mediation. One-sided non-adherence
// pins the control arm to V(Y_{t=0}) = V(Y_{a=0}).
inline double sbd_variance_closed_form(const VarianceParams& vp, std::size_t n) {
  if (n < 1) throw ConfigError("sbd_variance_closed_form requires n >= 1");
  const double nd = static_cast<double>(n);
  const double treated = detail::arm_outcome_variance(vp, vp.e_a1, vp.v_a1);
  const double control = vp.mode == NonAdherenceMode::OneSided
                             ? vp.v_y0
                             : detail::arm_outcome_variance(vp, vp.e_a0, vp.v_a0);
  return treated / (nd * vp.pi) + control / (nd * (1.0 - vp.pi));
}

// Limit of n * Var for the CFD plug-in estimator. Every cell probability that
// the mode makes possible appears as a denominator and must be positive.
inline double cfd_asymptotic_variance(const VarianceParams& vp,
                                      const CellProbabilities& cells) {
  for (int a = 0; a < 2; ++a)
    for (int t = 0; t < 2; ++t) {
      if (vp.mode == NonAdherenceMode::OneSided && a == 1 && t == 0) continue;
      if (!(cells.omega[a][t] > 0.0))
        throw ZeroCell("cell (a=" + std::to_string(a) + ",t=" + std::to_string(t) +
                       ") has zero probability");
    }
  if (!(vp.pi > 0.0 && vp.pi < 1.0))
    throw ZeroCell("propensity must lie strictly inside (0,1)");
  const double da2 = vp.delta_a() * vp.delta_a();
  const double dy2 = vp.delta_y() * vp.delta_y();
  const double pi2 = vp.pi * vp.pi;
  const double qi2 = (1.0 - vp.pi) * (1.0 - vp.pi);
  const double y0_term =
      vp.v_y0 * (da2 * qi2 / cells.omega[0][0] + da2 * pi2 / cells.omega[0][1]);
  if (vp.mode == NonAdherenceMode::OneSided)
    return y0_term + vp.v_y1 * da2 / cells.omega[1][1] + vp.v_a1 * dy2 / vp.pi;
  const double y1_term =
      vp.v_y1 * (da2 * qi2 / cells.omega[1][0] + da2 * pi2 / cells.omega[1][1]);
  return y0_term + y1_term + dy2 * (vp.v_a1 / vp.pi + vp.v_a0 / (1.0 - vp.pi));
}

// Lower bound on lim n Var of SBD-based estimation.
inline double sbd_variance_lower_bound(const VarianceParams& vp) {
  const double dy2 = vp.delta_y() * vp.delta_y();
  if (vp.mode == NonAdherenceMode::OneSided)
    return vp.v_y0 * (2.0 - vp.e_a1) + vp.v_y1 * vp.e_a1 + dy2 * vp.v_a1;
  return vp.v_y0 * (2.0 - vp.e_a0 - vp.e_a1) + vp.v_y1 * (vp.e_a0 + vp.e_a1) +
         dy2 * (vp.v_a0 + vp.v_a1);
}

// Upper bound on lim n Var of CFD-based estimation; tightest when every
// intake/assignment combination is equally likely (rho large).
inline double cfd_variance_upper_bound(const VarianceParams& vp, double rho_val) {
  if (!(rho_val > 0.0 && rho_val <= 1.0))
    throw InvalidRho("rho must lie in (0,1], got " + std::to_string(rho_val));
  const double da2 = vp.delta_a() * vp.delta_a();
  const double dy2 = vp.delta_y() * vp.delta_y();
  const double va = vp.mode == NonAdherenceMode::OneSided ? vp.v_a1 : vp.v_a0 + vp.v_a1;
  return ((vp.v_y0 + vp.v_y1) * da2 + va * dy2) / rho_val;
}

// Guaranteed asymptotic variance reduction of CFD over SBD under the
// equal-variance assumption V(Y_0)=V(Y_1)=V_Y, V(A_0)=V(A_1)=V_A (one-sided
// uses V_A = V(A_{t=1}) only):
//   one-sided:  2 V_Y - (2/rho) V_Y Delta_A^2 -   ((1-rho)/rho) V_A Delta_Y^2
//   two-sided:  2 V_Y - (2/rho) V_Y Delta_A^2 - (2 (1-rho)/rho) V_A Delta_Y^2
inline double reduction_lower_bound(const VarianceParams& vp, double rho_val) {
  if (!(rho_val > 0.0 && rho_val < 1.0))
    throw InvalidRho("rho must lie in (0,1), got " + std::to_string(rho_val));
  constexpr double kTol = 1e-12;
  if (std::abs(vp.v_y0 - vp.v_y1) > kTol)
    throw UnequalVariances("reduction bound assumes V(Y_0) = V(Y_1)");
  if (vp.mode == NonAdherenceMode::TwoSided && std::abs(vp.v_a0 - vp.v_a1) > kTol)
    throw UnequalVariances("reduction bound assumes V(A_0) = V(A_1)");
  const double vy = vp.v_y0;
  const double va = vp.v_a1;
  const double da2 = vp.delta_a() * vp.delta_a();
  const double dy2 = vp.delta_y() * vp.delta_y();
  const double a_coeff = vp.mode == NonAdherenceMode::OneSided ? 1.0 : 2.0;
  return 2.0 * vy - (2.0 / rho_val) * vy * da2 -
         a_coeff * ((1.0 - rho_val) / rho_val) * va * dy2;
}

// For a binary variable, V = E (1 - E).
inline double binary_variance(double mean) {
  if (!(mean >= 0.0 && mean <= 1.0))
    throw OutOfRange("binary mean must lie in [0,1], got " + std::to_string(mean));
  return mean * (1.0 - mean);
}

struct AxisSpec {
  double min = 0.0;
  double max = 1.0;
  std::size_t steps = 101;  // number of grid points, endpoints included

  double at(std::size_t i) const {
    if (steps == 1) return min;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

struct GridConfig {
  double rho = 0.1;
  std::vector<double> e_y0_values = {0.1, 0.3, 0.5, 0.7, 0.9};
  double e_a0 = 0.0;
  AxisSpec delta_a;
  AxisSpec delta_y;
  NonAdherenceMode mode = NonAdherenceMode::OneSided;
};

struct GridCell {
  double e_y0 = 0.0;
  double delta_a = 0.0;
  double delta_y = 0.0;
  double bound = 0.0;
  bool feasible = false;
};

// One pane per E(Y_{a=0}) value; cells row-major by Delta_A then Delta_Y.
// Every binary mean is derived from (e_a0, e_y0, Delta_A, Delta_Y) and the
// variances from the binary trick; the bound is the difference between the
// SBD lower bound and the CFD upper bound, with unequal variances permitted.
// Cells whose derived means leave [0,1] are emitted as infeasible, not NaN.
inline std::vector<GridCell> reduction_grid(const GridConfig& cfg) {
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0))
    throw InvalidConfig("grid rho must lie in (0,1]");
  if (!(cfg.e_a0 >= 0.0 && cfg.e_a0 <= 1.0))
    throw InvalidConfig("grid e_a0 must lie in [0,1]");
  if (cfg.mode == NonAdherenceMode::OneSided && cfg.e_a0 != 0.0)
    throw InvalidConfig("one-sided grids require e_a0 = 0");
  if (cfg.delta_a.min < 0.0 || cfg.delta_y.min < 0.0)
    throw InvalidConfig("grid deltas must be non-negative");
  if (cfg.delta_a.max < cfg.delta_a.min || cfg.delta_y.max < cfg.delta_y.min)
    throw InvalidConfig("grid axis max must be >= min");
  if (cfg.delta_a.steps < 1 || cfg.delta_y.steps < 1)
    throw InvalidConfig("grid axes need at least one step");
  for (double e : cfg.e_y0_values)
    if (!(e >= 0.0 && e <= 1.0)) throw InvalidConfig("grid e_y0 must lie in [0,1]");

  std::vector<GridCell> out;
  out.reserve(cfg.e_y0_values.size() * cfg.delta_a.steps * cfg.delta_y.steps);
  for (double e_y0 : cfg.e_y0_values) {
    for (std::size_t ia = 0; ia < cfg.delta_a.steps; ++ia) {
      const double da = cfg.delta_a.at(ia);
      for (std::size_t iy = 0; iy < cfg.delta_y.steps; ++iy) {
        const double dy = cfg.delta_y.at(iy);
        GridCell cell{e_y0, da, dy, 0.0, false};
        const double e_a1 = cfg.e_a0 + da;
        const double e_y1 = e_y0 + dy;
        if (e_a1 <= 1.0 && e_y1 <= 1.0) {
          VarianceParams vp;
          vp.mode = cfg.mode;
          vp.e_a0 = cfg.e_a0;
          vp.e_a1 = e_a1;
          vp.e_y0 = e_y0;
          vp.e_y1 = e_y1;
          vp.v_a0 = binary_variance(cfg.e_a0);
          vp.v_a1 = binary_variance(e_a1);
          vp.v_y0 = binary_variance(e_y0);
          vp.v_y1 = binary_variance(e_y1);
          cell.bound = sbd_variance_lower_bound(vp) - cfd_variance_upper_bound(vp, cfg.rho);
          cell.feasible = true;
        }
        out.push_back(cell);
      }
    }
  }
  return out;
}

}  // namespace catea::theory
