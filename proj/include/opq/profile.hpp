#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opq/classify.hpp"
#include "opq/core.hpp"
#include "opq/derivation.hpp"
#include "opq/fit.hpp"

namespace opq {

inline constexpr std::string_view kSchemaVersion = "1";

/// Everything known about one platform: fitted curves, the samples they
/// came from, and the quadrant classification.
struct ProfileDocument {
  std::string schema_version{kSchemaVersion};
  PlatformSpec platform;
  std::vector<CostCurve> curves;
  std::vector<CostSample> samples;
  std::vector<OpqPoint> opq_points;
  std::string provenance;  // bench | simulated | ingested | reference
  std::string fit_space{kFitSpace};
  std::vector<std::string> notes;

  const CostCurve* find_curve(std::string_view op) const {
    for (const auto& c : curves)
      if (c.op == op) return &c;
    return nullptr;
  }

  std::vector<CostSample> samples_of(std::string_view op) const {
    std::vector<CostSample> out;
    for (const auto& s : samples)
      if (s.op == op) out.push_back(s);
    return out;
  }

  bool operator==(const ProfileDocument&) const = default;
};

inline void validate_profile(const ProfileDocument& doc) {
  if (doc.schema_version.empty())
    throw Error(ErrorCode::InvalidDocument, "schema_version missing");
  validate_platform(doc.platform);
  std::set<std::string> names;
  for (const auto& c : doc.curves) {
    require_user_operator_name(c.op);
    if (!names.insert(c.op).second)
      throw Error(ErrorCode::InvalidDocument, "duplicate curve for " + c.op);
  }
  for (const auto& p : doc.opq_points) {
    if (!names.count(p.op))
      throw Error(ErrorCode::InvalidDocument, "OPQ point " + p.op + " has no matching curve");
    if (!p.consistent())
      throw Error(ErrorCode::InvalidDocument, "OPQ point " + p.op + " quadrant is inconsistent");
  }
}

/// Fits one curve per derived operator. Operators whose samples cannot be
/// fitted (a zero cost, fewer than two valid sizes) keep their samples and
/// get a note instead of a curve.
inline ProfileDocument build_profile(const PlatformSpec& platform, std::string provenance,
                                     const std::map<std::string, DerivationResult>& derived) {
  ProfileDocument doc;
  doc.platform = platform;
  doc.provenance = std::move(provenance);
  for (const auto& [op, result] : derived) {
    doc.samples.insert(doc.samples.end(), result.samples.begin(), result.samples.end());
    for (const auto& w : result.warnings)
      doc.notes.push_back(op + ": " + std::string(to_string(w.flag)) + " at " +
                          std::to_string(w.packet_size) + " B (" + w.op + ")");
    try {
      doc.curves.push_back(fit_power_law(result.samples));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveCost && e.code() != ErrorCode::InsufficientPoints)
        throw;
      doc.notes.push_back(op + ": not fitted (" + e.what() + ")");
    }
  }
  return doc;
}

/// Fills `opq_points` for every curve. The base cost is the measured sample
/// at the operator's smallest size when present, else the curve's base.
inline void classify_profile(ProfileDocument& doc, std::optional<double> threshold_override = {}) {
  std::vector<OpqInput> inputs;
  for (const auto& curve : doc.curves) {
    const auto samples = doc.samples_of(curve.op);
    double base = curve.base_cost;
    if (!samples.empty()) {
      const auto smallest = std::min_element(
          samples.begin(), samples.end(),
          [](const CostSample& l, const CostSample& r) { return l.packet_size < r.packet_size; });
      base = base_cost_of(samples, &curve, smallest->packet_size).cycles;
    }
    inputs.push_back({curve.op, base, curve.exponent_k});
  }
  doc.opq_points.clear();
  if (inputs.empty()) return;
  doc.opq_points = classify_platform(doc.platform.name, inputs, threshold_override);
}

}  // namespace opq
