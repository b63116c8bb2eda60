#pragma once

// Shared domain types for operator cost profiling.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace opq {

using PacketSize = std::uint32_t;

inline constexpr std::string_view kBaselineOperator = "baseline";

enum class ErrorCode {
  NonPositiveThroughput,
  EmptyOperatorName,
  ZeroPacketSize,
  ReservedOperatorName,
  NonPositiveInput,
  NegativeCost,
  MismatchedSizeSets,
  DuplicateSize,
  InconsistentRecords,
  InsufficientPoints,
  NonPositiveCost,
  NonPositiveSize,
  NonFiniteExponent,
  MissingSmallestSize,
  EmptyDataset,
  NoCommonOperators,
  NonPositiveFrequency,
  DivisionByZero,
  UnknownOperator,
  ClockResolutionTooCoarse,
  InvalidConfig,
  MissingHeader,
  BadRow,
  EmptyFile,
  UnclassifiedPoints,
  InvalidDocument,
  Io,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveThroughput: return "NonPositiveThroughput";
    case ErrorCode::EmptyOperatorName: return "EmptyOperatorName";
    case ErrorCode::ZeroPacketSize: return "ZeroPacketSize";
    case ErrorCode::ReservedOperatorName: return "ReservedOperatorName";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::NegativeCost: return "NegativeCost";
    case ErrorCode::MismatchedSizeSets: return "MismatchedSizeSets";
    case ErrorCode::DuplicateSize: return "DuplicateSize";
    case ErrorCode::InconsistentRecords: return "InconsistentRecords";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NonPositiveCost: return "NonPositiveCost";
    case ErrorCode::NonPositiveSize: return "NonPositiveSize";
    case ErrorCode::NonFiniteExponent: return "NonFiniteExponent";
    case ErrorCode::MissingSmallestSize: return "MissingSmallestSize";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoCommonOperators: return "NoCommonOperators";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::ClockResolutionTooCoarse: return "ClockResolutionTooCoarse";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::BadRow: return "BadRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::UnclassifiedPoints: return "UnclassifiedPoints";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. All toolkit failures
/// surface as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct PlatformSpec {
  std::string name;
  double cpu_hz = 0.0;
  std::string description;

  bool operator==(const PlatformSpec&) const = default;
};

inline void validate_platform(const PlatformSpec& p) {
  if (p.name.empty()) throw Error(ErrorCode::InvalidConfig, "platform name is empty");
  if (!(p.cpu_hz > 0.0) || !std::isfinite(p.cpu_hz))
    throw Error(ErrorCode::NonPositiveFrequency, "platform " + p.name);
}

/// One saturation-throughput observation.
struct MeasurementRecord {
  std::string platform;
  std::string op;  // "baseline" denotes the base forwarding system
  PacketSize packet_size = 0;
  double throughput_pps = 0.0;
  std::optional<std::int64_t> run_id;

  bool operator==(const MeasurementRecord&) const = default;
};

/// Net operator cost in cycles per packet at one packet size.
struct CostSample {
  std::string op;
  PacketSize packet_size = 0;
  double cost_cycles = 0.0;

  bool operator==(const CostSample&) const = default;
};

/// Power-law cost curve cost(s) = a * s^k.
struct CostCurve {
  std::string op;
  double coefficient_a = 0.0;
  double exponent_k = 0.0;
  double r_squared = 0.0;
  double base_cost = 0.0;
  std::size_t n_points = 0;

  bool operator==(const CostCurve&) const = default;
};

enum class QuadrantLabel { LatentTrap, HighStartupCost, Ideal, EmergentBottleneck };

inline constexpr std::string_view to_string(QuadrantLabel q) {
  switch (q) {
    case QuadrantLabel::LatentTrap: return "LatentTrap";
    case QuadrantLabel::HighStartupCost: return "HighStartupCost";
    case QuadrantLabel::Ideal: return "Ideal";
    case QuadrantLabel::EmergentBottleneck: return "EmergentBottleneck";
  }
  return "Unknown";
}

inline std::optional<QuadrantLabel> quadrant_from_string(std::string_view s) {
  for (auto q : {QuadrantLabel::LatentTrap, QuadrantLabel::HighStartupCost,
                 QuadrantLabel::Ideal, QuadrantLabel::EmergentBottleneck})
    if (to_string(q) == s) return q;
  return std::nullopt;
}

/// Optimization strategy associated with each quadrant (advisory text).
inline constexpr std::string_view strategy_for(QuadrantLabel q) {
  switch (q) {
    case QuadrantLabel::LatentTrap: return "algorithm replacement / hardware offload";
    case QuadrantLabel::HighStartupCost: return "batch processing";
    case QuadrantLabel::Ideal: return "none";
    case QuadrantLabel::EmergentBottleneck: return "hybrid algorithm";
  }
  return "";
}

/// Total over finite inputs. Ties: base == threshold is high, k == 1 is
/// on the sub-linear side.
inline constexpr QuadrantLabel quadrant_of(double base_cost, double exponent_k,
                                           double threshold) noexcept {
  const bool high = base_cost >= threshold;
  const bool super = exponent_k > 1.0;
  if (high) return super ? QuadrantLabel::LatentTrap : QuadrantLabel::HighStartupCost;
  return super ? QuadrantLabel::EmergentBottleneck : QuadrantLabel::Ideal;
}

struct OpqPoint {
  std::string op;
  std::string platform;
  double base_cost = 0.0;
  double exponent_k = 0.0;
  QuadrantLabel quadrant = QuadrantLabel::Ideal;
  double threshold_used = 0.0;

  bool consistent() const noexcept {
    return quadrant == quadrant_of(base_cost, exponent_k, threshold_used);
  }

  bool operator==(const OpqPoint&) const = default;
};

struct ShiftRecord {
  std::string op;
  std::string from_platform;
  std::string to_platform;
  QuadrantLabel from_quadrant = QuadrantLabel::Ideal;
  QuadrantLabel to_quadrant = QuadrantLabel::Ideal;
  double delta_base = 0.0;
  double delta_k = 0.0;
  double from_threshold = 0.0;
  double to_threshold = 0.0;

  bool shifted() const noexcept { return from_quadrant != to_quadrant; }

  bool operator==(const ShiftRecord&) const = default;
};

inline const MeasurementRecord& validate_record(const MeasurementRecord& r) {
  if (!(r.throughput_pps > 0.0) || !std::isfinite(r.throughput_pps))
    throw Error(ErrorCode::NonPositiveThroughput,
                r.op + "@" + std::to_string(r.packet_size));
  if (r.op.empty()) throw Error(ErrorCode::EmptyOperatorName, "");
  if (r.packet_size == 0) throw Error(ErrorCode::ZeroPacketSize, r.op);
  return r;
}

/// Rejects names that would collide with the baseline side of a pairing.
inline void require_user_operator_name(std::string_view name) {
  if (name.empty()) throw Error(ErrorCode::EmptyOperatorName, "");
  if (name == kBaselineOperator)
    throw Error(ErrorCode::ReservedOperatorName, std::string(name));
}

}  // namespace opq
