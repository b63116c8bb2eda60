#pragma once

// Saturation-throughput-delta cost derivation.
//
// A CPU-saturated pipeline satisfies  rate * cycles_per_packet = cpu_hz.
// Measuring the base system and the base system plus one operator gives
// the operator's net cost as  cpu_hz * (1/r_op - 1/r_base).

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "opq/core.hpp"

namespace opq {

enum class Validity { Valid, LineRateBound, Noisy };

inline constexpr std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::Valid: return "Valid";
    case Validity::LineRateBound: return "LineRateBound";
    case Validity::Noisy: return "Noisy";
  }
  return "Unknown";
}

inline constexpr double kDefaultLineRateMargin = 0.02;
inline constexpr double kDefaultNoisyRatio = 1.10;

inline double derive_base_cost(double cpu_hz, double r_base) {
  if (!(cpu_hz > 0.0) || !(r_base > 0.0))
    throw Error(ErrorCode::NonPositiveInput, "cpu_hz and r_base must be > 0");
  return cpu_hz / r_base;
}

inline double derive_operator_cost(double cpu_hz, double r_base, double r_op) {
  if (!(cpu_hz > 0.0) || !(r_base > 0.0) || !(r_op > 0.0))
    throw Error(ErrorCode::NonPositiveInput, "cpu_hz, r_base and r_op must be > 0");
  if (r_op > r_base)
    throw Error(ErrorCode::NegativeCost, "SUT throughput exceeds baseline throughput");
  return cpu_hz * (1.0 / r_op - 1.0 / r_base);
}

/// Line rate of an Ethernet link for a given frame size: preamble and
/// inter-frame gap add 20 bytes on the wire per frame.
inline double ethernet_line_rate_pps(double link_bits_per_second, PacketSize frame_bytes) {
  return link_bits_per_second / ((static_cast<double>(frame_bytes) + 20.0) * 8.0);
}

inline Validity check_saturation_validity(const MeasurementRecord& record, double line_rate_pps,
                                          double margin = kDefaultLineRateMargin) {
  return record.throughput_pps >= (1.0 - margin) * line_rate_pps ? Validity::LineRateBound
                                                                 : Validity::Valid;
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct SizeWarning {
  PacketSize packet_size = 0;
  std::string op;  // which side raised it: "baseline" or the operator
  Validity flag = Validity::Valid;

  bool operator==(const SizeWarning&) const = default;
};

struct DerivationResult {
  std::vector<CostSample> samples;
  std::map<PacketSize, double> base_costs;
  std::vector<SizeWarning> warnings;

  std::vector<PacketSize> excluded_sizes() const {
    std::set<PacketSize> out;
    for (const auto& w : warnings)
      if (w.flag == Validity::LineRateBound) out.insert(w.packet_size);
    return {out.begin(), out.end()};
  }
};

struct DerivationOptions {
  /// Per-size NIC cap; when unset no line-rate guard is applied.
  std::function<double(PacketSize)> line_rate_pps;
  double line_rate_margin = kDefaultLineRateMargin;
  /// Repeats whose max/min pps ratio exceeds this are flagged Noisy.
  double noisy_ratio = kDefaultNoisyRatio;
};

namespace detail {

struct SizeAggregate {
  double median_pps = 0.0;
  double spread = 1.0;  // max/min
  MeasurementRecord representative;
};

inline std::map<PacketSize, SizeAggregate> aggregate_by_size(
    std::span<const MeasurementRecord> records) {
  std::map<PacketSize, std::vector<const MeasurementRecord*>> by_size;
  for (const auto& r : records) by_size[validate_record(r).packet_size].push_back(&r);

  std::map<PacketSize, SizeAggregate> out;
  for (const auto& [size, group] : by_size) {
    std::set<std::optional<std::int64_t>> run_ids;
    std::vector<double> pps;
    for (const auto* r : group) {
      if (!run_ids.insert(r->run_id).second)
        throw Error(ErrorCode::DuplicateSize,
                    r->op + " has two records at " + std::to_string(size) + " B with the same run_id");
      pps.push_back(r->throughput_pps);
    }
    SizeAggregate agg;
    agg.median_pps = median(pps);
    auto [lo, hi] = std::minmax_element(pps.begin(), pps.end());
    agg.spread = *hi / *lo;
    agg.representative = *group.front();
    agg.representative.throughput_pps = agg.median_pps;
    agg.representative.run_id.reset();
    out.emplace(size, std::move(agg));
  }
  return out;
}

inline std::string single_operator(std::span<const MeasurementRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records");
  const std::string& name = records.front().op;
  for (const auto& r : records)
    if (r.op != name)
      throw Error(ErrorCode::InconsistentRecords, "mixed operators " + name + " and " + r.op);
  return name;
}

}  // namespace detail

/// Derives one cost sample per packet size shared by `baseline` and `sut`.
/// Repeated runs at a size are reduced to their median pps first.
inline DerivationResult derive_sweep(double cpu_hz, std::span<const MeasurementRecord> baseline,
                                     std::span<const MeasurementRecord> sut,
                                     const DerivationOptions& options = {}) {
  if (!(cpu_hz > 0.0)) throw Error(ErrorCode::NonPositiveInput, "cpu_hz must be > 0");
  const std::string base_name = detail::single_operator(baseline);
  const std::string op_name = detail::single_operator(sut);
  if (base_name != kBaselineOperator)
    throw Error(ErrorCode::InconsistentRecords, "baseline records carry operator " + base_name);
  require_user_operator_name(op_name);

  const auto base = detail::aggregate_by_size(baseline);
  const auto op = detail::aggregate_by_size(sut);

  std::vector<PacketSize> base_sizes, op_sizes;
  for (const auto& [s, _] : base) base_sizes.push_back(s);
  for (const auto& [s, _] : op) op_sizes.push_back(s);
  if (base_sizes != op_sizes)
    throw Error(ErrorCode::MismatchedSizeSets, op_name + " sizes differ from baseline sizes");

  DerivationResult result;
  for (PacketSize size : base_sizes) {
    const auto& b = base.at(size);
    const auto& o = op.at(size);

    bool bound = false;
    if (options.line_rate_pps) {
      const double cap = options.line_rate_pps(size);
      for (const auto* agg : {&b, &o}) {
        if (check_saturation_validity(agg->representative, cap, options.line_rate_margin) ==
            Validity::LineRateBound) {
          result.warnings.push_back({size, agg->representative.op, Validity::LineRateBound});
          bound = true;
        }
      }
    }
    for (const auto* agg : {&b, &o})
      if (agg->spread > options.noisy_ratio)
        result.warnings.push_back({size, agg->representative.op, Validity::Noisy});
    if (bound) continue;

    double cost = 0.0;
    try {
      cost = derive_operator_cost(cpu_hz, b.median_pps, o.median_pps);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NegativeCost)
        throw Error(ErrorCode::NegativeCost, op_name + " at " + std::to_string(size) + " B");
      throw;
    }
    result.base_costs.emplace(size, derive_base_cost(cpu_hz, b.median_pps));
    result.samples.push_back({op_name, size, cost});
  }
  return result;
}

}  // namespace opq
