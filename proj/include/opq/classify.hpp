#pragma once

// Operator Performance Quadrants: base cost (median split) against the
// power-law exponent (split at k = 1), plus cross-platform shifts.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opq/core.hpp"
#include "opq/derivation.hpp"
#include "opq/fit.hpp"

namespace opq {

enum class BaseCostSource { Measured, Curve };

inline constexpr std::string_view to_string(BaseCostSource s) {
  return s == BaseCostSource::Measured ? "measured" : "curve";
}

struct BaseCost {
  double cycles = 0.0;
  BaseCostSource source = BaseCostSource::Measured;
};

/// Net cost at the smallest packet size: the measured sample when one
/// exists, otherwise the fitted curve evaluated there.
inline BaseCost base_cost_of(std::span<const CostSample> samples, const CostCurve* curve,
                             PacketSize smallest_size) {
  for (const auto& s : samples)
    if (s.packet_size == smallest_size) return {s.cost_cycles, BaseCostSource::Measured};
  if (curve != nullptr && smallest_size > 0)
    return {eval_curve(*curve, smallest_size), BaseCostSource::Curve};
  throw Error(ErrorCode::MissingSmallestSize, std::to_string(smallest_size) + " B");
}

inline double median_threshold(std::span<const double> base_costs) {
  if (base_costs.empty()) throw Error(ErrorCode::EmptyDataset, "no base costs");
  return median({base_costs.begin(), base_costs.end()});
}

inline QuadrantLabel classify_quadrant(double base_cost, double exponent_k, double threshold) {
  return quadrant_of(base_cost, exponent_k, threshold);
}

struct OpqInput {
  std::string op;
  double base_cost = 0.0;
  double exponent_k = 0.0;
};

/// Classifies one platform's operators. Without an override the threshold
/// is the median base cost of exactly these inputs.
inline std::vector<OpqPoint> classify_platform(const std::string& platform,
                                               std::span<const OpqInput> inputs,
                                               std::optional<double> threshold_override = {}) {
  if (inputs.empty()) throw Error(ErrorCode::EmptyDataset, "platform " + platform);
  double threshold = 0.0;
  if (threshold_override) {
    threshold = *threshold_override;
  } else {
    std::vector<double> bases;
    for (const auto& in : inputs) bases.push_back(in.base_cost);
    threshold = median_threshold(bases);
  }
  std::vector<OpqPoint> out;
  for (const auto& in : inputs)
    out.push_back({in.op, platform, in.base_cost, in.exponent_k,
                   classify_quadrant(in.base_cost, in.exponent_k, threshold), threshold});
  return out;
}

struct ShiftResult {
  std::vector<ShiftRecord> shifts;
  std::vector<std::string> skipped;  // present on only one side
};

inline ShiftResult compute_shift(std::span<const OpqPoint> from, std::span<const OpqPoint> to) {
  std::map<std::string, const OpqPoint*> to_by_op;
  for (const auto& p : to) to_by_op[p.op] = &p;

  ShiftResult result;
  std::map<std::string, bool> matched;
  for (const auto& f : from) {
    auto it = to_by_op.find(f.op);
    if (it == to_by_op.end()) {
      result.skipped.push_back(f.op);
      continue;
    }
    const OpqPoint& t = *it->second;
    matched[f.op] = true;
    result.shifts.push_back({f.op, f.platform, t.platform, f.quadrant, t.quadrant,
                             t.base_cost - f.base_cost, t.exponent_k - f.exponent_k,
                             f.threshold_used, t.threshold_used});
  }
  for (const auto& t : to)
    if (!matched.count(t.op)) result.skipped.push_back(t.op);
  if (result.shifts.empty())
    throw Error(ErrorCode::NoCommonOperators, "no operator is present on both platforms");
  return result;
}

inline double normalize_to_time(double cost_cycles, double cpu_hz) {
  if (!(cpu_hz > 0.0)) throw Error(ErrorCode::NonPositiveFrequency, "");
  return cost_cycles / cpu_hz * 1e9;
}

inline double fold_change(double cost_a, double cost_b) {
  if (cost_b == 0.0) throw Error(ErrorCode::DivisionByZero, "fold change against zero cost");
  if (!(cost_b > 0.0)) throw Error(ErrorCode::NonPositiveCost, "fold change denominator");
  return cost_a / cost_b;
}

}  // namespace opq
