#pragma once

// Power-law fit cost(s) = a * s^k by ordinary least squares on
// (ln s, ln cost). R² is reported in the same log space.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "opq/core.hpp"

namespace opq {

inline constexpr std::string_view kFitSpace = "log-log";

enum class ScalingClass { SubLinear, Linear, SuperLinear };

inline constexpr std::string_view to_string(ScalingClass c) {
  switch (c) {
    case ScalingClass::SubLinear: return "SubLinear";
    case ScalingClass::Linear: return "Linear";
    case ScalingClass::SuperLinear: return "SuperLinear";
  }
  return "Unknown";
}

inline CostCurve fit_power_law(std::span<const CostSample> samples) {
  if (samples.size() < 2)
    throw Error(ErrorCode::InsufficientPoints, std::to_string(samples.size()) + " sample(s)");

  std::set<PacketSize> sizes;
  for (const auto& s : samples) {
    if (s.packet_size == 0) throw Error(ErrorCode::NonPositiveSize, s.op);
    if (!(s.cost_cycles > 0.0) || !std::isfinite(s.cost_cycles))
      throw Error(ErrorCode::NonPositiveCost,
                  s.op + " at " + std::to_string(s.packet_size) + " B");
    if (!sizes.insert(s.packet_size).second)
      throw Error(ErrorCode::DuplicateSize, s.op + " at " + std::to_string(s.packet_size) + " B");
  }

  // Sort by size so the floating-point summation order, and therefore the
  // result, does not depend on input order.
  std::vector<CostSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CostSample& l, const CostSample& r) { return l.packet_size < r.packet_size; });

  const auto n = static_cast<double>(sorted.size());
  std::vector<double> xs, ys;
  xs.reserve(sorted.size());
  ys.reserve(sorted.size());
  for (const auto& s : sorted) {
    xs.push_back(std::log(static_cast<double>(s.packet_size)));
    ys.push_back(std::log(s.cost_cycles));
  }

  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= n;
  y_mean /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x_mean;
    const double dy = ys[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  const bool flat = std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); });

  CostCurve curve;
  curve.op = sorted.front().op;
  curve.n_points = sorted.size();
  if (flat) {
    curve.exponent_k = 0.0;
    curve.coefficient_a = sorted.front().cost_cycles;
    curve.r_squared = 1.0;  // zero variance to explain
  } else {
    curve.exponent_k = sxy / sxx;
    const double intercept = y_mean - curve.exponent_k * x_mean;
    curve.coefficient_a = std::exp(intercept);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (intercept + curve.exponent_k * xs[i]);
      ss_res += r * r;
    }
    curve.r_squared = 1.0 - ss_res / syy;
  }
  const auto s_min = static_cast<double>(sorted.front().packet_size);
  curve.base_cost = curve.coefficient_a * std::pow(s_min, curve.exponent_k);
  return curve;
}

inline double eval_curve(const CostCurve& curve, PacketSize packet_size) {
  if (packet_size == 0) throw Error(ErrorCode::NonPositiveSize, curve.op);
  return curve.coefficient_a * std::pow(static_cast<double>(packet_size), curve.exponent_k);
}

/// Builds the curve whose value at `smallest_size` is `base_cost`.
inline CostCurve curve_from_base(std::string op, double base_cost, double exponent_k,
                                 PacketSize smallest_size, double r_squared = 1.0,
                                 std::size_t n_points = 3) {
  if (smallest_size == 0) throw Error(ErrorCode::NonPositiveSize, op);
  CostCurve c;
  c.op = std::move(op);
  c.exponent_k = exponent_k;
  c.coefficient_a = base_cost / std::pow(static_cast<double>(smallest_size), exponent_k);
  c.base_cost = base_cost;
  c.r_squared = r_squared;
  c.n_points = n_points;
  return c;
}

inline ScalingClass classify_scaling(double exponent_k) {
  if (!std::isfinite(exponent_k)) throw Error(ErrorCode::NonFiniteExponent, "");
  if (exponent_k > 1.0) return ScalingClass::SuperLinear;
  if (exponent_k < 1.0) return ScalingClass::SubLinear;
  return ScalingClass::Linear;
}

}  // namespace opq
