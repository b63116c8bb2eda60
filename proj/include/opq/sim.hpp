#pragma once

// Forward model of a CPU-saturated data plane. Given a base cost and an
// operator cost it produces the throughput a measurement would observe,
// optionally capped by a NIC line rate and perturbed by lognormal noise.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "opq/core.hpp"
#include "opq/derivation.hpp"
#include "opq/fit.hpp"

namespace opq {

enum class Bound { CpuBound, LineRateBound };

/// Standard normal variates with an output stream fixed across platforms:
/// mt19937_64 (sequence defined by the standard) feeding Box-Muller.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1], 53 bits.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Cost as a function of packet size.
using SizeFunction = std::function<double(PacketSize)>;

inline SizeFunction power_law(double a, double k) {
  return [a, k](PacketSize s) { return a * std::pow(static_cast<double>(s), k); };
}

inline SizeFunction constant(double value) {
  return [value](PacketSize) { return value; };
}

inline SizeFunction ethernet_line_rate(double link_bits_per_second) {
  return [link_bits_per_second](PacketSize s) {
    return ethernet_line_rate_pps(link_bits_per_second, s);
  };
}

inline constexpr double k100GbE = 100e9;

struct SimConfig {
  double cpu_hz = 0.0;
  SizeFunction base_cost_fn;
  SizeFunction line_rate_pps_fn;  // empty: no cap
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string platform = "sim";

  void validate(std::span<const PacketSize> sizes = {}) const {
    if (!(cpu_hz > 0.0) || !std::isfinite(cpu_hz))
      throw Error(ErrorCode::InvalidConfig, "cpu_hz must be > 0");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_sigma must be >= 0");
    if (!base_cost_fn) throw Error(ErrorCode::InvalidConfig, "base_cost_fn missing");
    for (PacketSize s : sizes) {
      if (s == 0) throw Error(ErrorCode::ZeroPacketSize, "sim sweep");
      if (!(base_cost_fn(s) > 0.0))
        throw Error(ErrorCode::InvalidConfig, "base cost must be > 0 at " + std::to_string(s) + " B");
    }
  }
};

struct SimSample {
  double pps = 0.0;
  Bound bound = Bound::CpuBound;
};

/// Stateful simulator: successive calls draw successive noise values from
/// the seeded stream.
class Simulator {
 public:
  explicit Simulator(SimConfig config) : config_(std::move(config)), noise_(config_.seed) {
    config_.validate();
  }

  const SimConfig& config() const noexcept { return config_; }

  SimSample throughput(PacketSize packet_size, double op_cost) {
    if (!(op_cost >= 0.0)) throw Error(ErrorCode::NonPositiveInput, "op_cost must be >= 0");
    double pps = config_.cpu_hz / (config_.base_cost_fn(packet_size) + op_cost);
    if (config_.noise_sigma > 0.0) pps *= std::exp(config_.noise_sigma * noise_.next());
    if (config_.line_rate_pps_fn) {
      const double cap = config_.line_rate_pps_fn(packet_size);
      if (pps >= cap) return {cap, Bound::LineRateBound};
    }
    return {pps, Bound::CpuBound};
  }

 private:
  SimConfig config_;
  NormalStream noise_;
};

inline SimSample simulate_throughput(const SimConfig& config, PacketSize packet_size,
                                     double op_cost) {
  Simulator sim(config);
  return sim.throughput(packet_size, op_cost);
}

struct InjectedOperator {
  std::string name;
  SizeFunction cost_fn;
};

/// Several operators against one shared baseline: per size and
/// repetition, the baseline draw comes first, then each operator in order.
inline std::vector<MeasurementRecord> simulate_sweep(const SimConfig& config,
                                                     std::span<const InjectedOperator> operators,
                                                     std::span<const PacketSize> sizes, int runs) {
  for (const auto& op : operators) require_user_operator_name(op.name);
  if (sizes.empty()) throw Error(ErrorCode::InvalidConfig, "no packet sizes");
  if (runs < 1) throw Error(ErrorCode::InvalidConfig, "runs must be >= 1");
  config.validate(sizes);

  Simulator sim(config);
  std::vector<MeasurementRecord> out;
  for (PacketSize s : sizes) {
    for (int run = 0; run < runs; ++run) {
      out.push_back(
          {config.platform, std::string(kBaselineOperator), s, sim.throughput(s, 0.0).pps, run});
      for (const auto& op : operators)
        out.push_back({config.platform, op.name, s, sim.throughput(s, op.cost_fn(s)).pps, run});
    }
  }
  return out;
}

struct ProtocolRecords {
  std::vector<MeasurementRecord> baseline;
  std::vector<MeasurementRecord> sut;
};

/// Runs the baseline/SUT protocol for one injected operator.
inline ProtocolRecords run_protocol(const SimConfig& config, const std::string& op_name,
                                    const SizeFunction& op_cost_fn,
                                    std::span<const PacketSize> sizes, int runs) {
  const InjectedOperator op{op_name, op_cost_fn};
  ProtocolRecords out;
  for (auto& r : simulate_sweep(config, {&op, 1}, sizes, runs))
    (r.op == kBaselineOperator ? out.baseline : out.sut).push_back(std::move(r));
  return out;
}

struct RoundtripReport {
  std::vector<CostSample> injected;
  std::vector<CostSample> recovered;
  std::vector<PacketSize> excluded_sizes;
  double max_relative_error = 0.0;  // |recovered - injected| / max(injected, 1)
  std::optional<CostCurve> curve;
  double delta_a = 0.0;
  double delta_k = 0.0;
  bool degenerate = false;  // recovered costs could not be fitted
  std::string note;
};

/// run_protocol -> derive_sweep -> fit_power_law. When `injected_curve`
/// is given, the (a, k) deltas are reported against it.
inline RoundtripReport end_to_end_roundtrip(const SimConfig& config, const SizeFunction& op_cost_fn,
                                            std::span<const PacketSize> sizes,
                                            std::optional<CostCurve> injected_curve = {},
                                            int runs = 1) {
  const auto records = run_protocol(config, "injected", op_cost_fn, sizes, runs);
  DerivationOptions options;
  options.line_rate_pps = config.line_rate_pps_fn;
  const auto derived = derive_sweep(config.cpu_hz, records.baseline, records.sut, options);

  RoundtripReport report;
  report.excluded_sizes = derived.excluded_sizes();
  report.recovered = derived.samples;
  for (const auto& s : derived.samples) {
    const double truth = op_cost_fn(s.packet_size);
    report.injected.push_back({s.op, s.packet_size, truth});
    report.max_relative_error = std::max(
        report.max_relative_error, std::abs(s.cost_cycles - truth) / std::max(truth, 1.0));
  }
  try {
    report.curve = fit_power_law(derived.samples);
    if (injected_curve) {
      report.delta_a = report.curve->coefficient_a - injected_curve->coefficient_a;
      report.delta_k = report.curve->exponent_k - injected_curve->exponent_k;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonPositiveCost && e.code() != ErrorCode::InsufficientPoints) throw;
    report.degenerate = true;
    report.note = e.what();
  }
  return report;
}

}  // namespace opq
