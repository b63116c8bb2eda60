#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "opq/io.hpp"
#include "opq/sim.hpp"

namespace {

using opq::Bound;
using opq::ErrorCode;

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const opq::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected opq::Error";
  return ErrorCode::Io;
}

const std::vector<opq::PacketSize> kSizes{64, 128, 256};

opq::SimConfig config(double hz, double base, double sigma = 0.0, std::uint64_t seed = 0) {
  return {hz, opq::constant(base), {}, sigma, seed, "sim"};
}

TEST(NormalStream, EngineMatchesStandardSequence) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  std::mt19937_64 e;
  e.discard(9999);
  EXPECT_EQ(e(), 9981545732273789042ULL);
}

TEST(NormalStream, BoxMullerOnEngineOutput) {
  std::mt19937_64 e(42);
  const double u1 = static_cast<double>((e() >> 11) + 1) / 9007199254740992.0;
  const double u2 = static_cast<double>((e() >> 11) + 1) / 9007199254740992.0;
  const double r = std::sqrt(-2.0 * std::log(u1));
  opq::NormalStream s(42);
  EXPECT_EQ(s.next(), r * std::cos(2.0 * M_PI * u2));
  EXPECT_EQ(s.next(), r * std::sin(2.0 * M_PI * u2));
}

TEST(NormalStream, MomentsAreStandard) {
  opq::NormalStream s(5);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = s.next();
    sum += x;
    sum2 += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.01);
}

TEST(SimulateThroughput, InvertsBaseCost) {
  const auto s = opq::simulate_throughput(config(1e9, 100), 64, 0.0);
  EXPECT_DOUBLE_EQ(s.pps, 1.0e7);
  EXPECT_EQ(s.bound, Bound::CpuBound);
}

TEST(SimulateThroughput, LineRateCap) {
  auto cfg = config(1e9, 5);
  cfg.line_rate_pps_fn = opq::constant(5e7);
  const auto s = opq::simulate_throughput(cfg, 64, 5);
  EXPECT_EQ(s.pps, 5.0e7);
  EXPECT_EQ(s.bound, Bound::LineRateBound);
}

TEST(SimulateThroughput, CrcOnArm) {
  const auto s = opq::simulate_throughput(config(1.8e9, 400), 64, 823);
  EXPECT_NEAR(s.pps, 1471790.6786590351, 1e-6);
  EXPECT_EQ(s.bound, Bound::CpuBound);
}

TEST(SimulateThroughput, RejectsNegativeOpCost) {
  EXPECT_EQ(code_of([] { opq::simulate_throughput(config(1e9, 100), 64, -1); }),
            ErrorCode::NonPositiveInput);
}

TEST(SimConfig, Invariants) {
  EXPECT_EQ(code_of([] { opq::Simulator s(config(0, 100)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { opq::Simulator s(config(1e9, 100, -0.1)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { config(1e9, 0).validate(kSizes); }), ErrorCode::InvalidConfig);
}

TEST(SimulateThroughput, MonotoneInCostAndFrequency) {
  for (double base : {1.0, 50.0, 1000.0}) {
    double prev = INFINITY;
    for (double op = 0; op < 5000; op += 7.5) {
      const double pps = opq::simulate_throughput(config(2e9, base), 64, op).pps;
      ASSERT_LT(pps, prev);
      prev = pps;
    }
    prev = 0;
    for (double hz = 1e8; hz < 5e9; hz += 1e8) {
      const double pps = opq::simulate_throughput(config(hz, base), 64, 10).pps;
      ASSERT_GT(pps, prev);
      prev = pps;
    }
  }
}

TEST(SimulateThroughput, BoundFlagIffCapReturned) {
  auto cfg = config(2e9, 10, 0.2, 77);
  cfg.line_rate_pps_fn = opq::ethernet_line_rate(opq::k100GbE);
  opq::Simulator sim(cfg);
  int bound = 0;
  for (int i = 0; i < 5000; ++i) {
    const opq::PacketSize size = i % 2 ? 64 : 128;
    const auto s = sim.throughput(size, (i % 7) * 1.5);
    const double cap = opq::ethernet_line_rate_pps(opq::k100GbE, size);
    ASSERT_EQ(s.bound == Bound::LineRateBound, s.pps == cap);
    ASSERT_LE(s.pps, cap);
    bound += s.bound == Bound::LineRateBound;
  }
  EXPECT_GT(bound, 0);
  EXPECT_LT(bound, 5000);
}

TEST(SimulateThroughput, NoiseUnbiasedInLogSpace) {
  const double sigma = 0.05;
  opq::Simulator sim(config(1.8e9, 400, sigma, 2024));
  const double truth = 1.8e9 / 400;
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += std::log(sim.throughput(64, 0).pps) - std::log(truth);
  // Four standard errors of the mean.
  EXPECT_LT(std::abs(sum / n), 4 * sigma / std::sqrt(n));
}

TEST(RunProtocol, ClosedLoopRecoversInjectedCosts) {
  const auto recs = opq::run_protocol(config(1.8e9, 400), "crc", opq::power_law(2, 1.3), kSizes, 1);
  ASSERT_EQ(recs.baseline.size(), 3u);
  ASSERT_EQ(recs.sut.size(), 3u);
  for (const auto& r : recs.baseline) EXPECT_EQ(r.op, "baseline");
  for (const auto& r : recs.sut) EXPECT_EQ(r.op, "crc");
  const auto derived = opq::derive_sweep(1.8e9, recs.baseline, recs.sut);
  for (const auto& s : derived.samples) {
    const double want = 2 * std::pow(s.packet_size, 1.3);
    EXPECT_LE(std::abs(s.cost_cycles - want) / want, 1e-9);
  }
}

TEST(RunProtocol, NoiselessRepeatsAreIdentical) {
  const auto recs = opq::run_protocol(config(2.2e9, 100), "crc", opq::constant(50), kSizes, 5);
  ASSERT_EQ(recs.sut.size(), 15u);
  for (std::size_t i = 0; i < recs.sut.size(); i += 5)
    for (std::size_t j = 1; j < 5; ++j) {
      EXPECT_EQ(recs.sut[i + j].throughput_pps, recs.sut[i].throughput_pps);
      EXPECT_EQ(recs.sut[i + j].packet_size, recs.sut[i].packet_size);
      EXPECT_EQ(recs.sut[i + j].run_id, static_cast<std::int64_t>(j));
    }
}

TEST(RunProtocol, SameSeedSameBytes) {
  const auto cfg = config(1.8e9, 400, 0.03, 99);
  const auto a = opq::run_protocol(cfg, "crc", opq::power_law(2, 1.37), kSizes, 4);
  const auto b = opq::run_protocol(cfg, "crc", opq::power_law(2, 1.37), kSizes, 4);
  EXPECT_EQ(opq::emit_measurements_csv(a.sut), opq::emit_measurements_csv(b.sut));
  EXPECT_EQ(opq::emit_measurements_csv(a.baseline), opq::emit_measurements_csv(b.baseline));
  const auto c = opq::run_protocol(config(1.8e9, 400, 0.03, 100), "crc", opq::power_law(2, 1.37),
                                   kSizes, 4);
  EXPECT_NE(opq::emit_measurements_csv(a.sut), opq::emit_measurements_csv(c.sut));
}

TEST(RunProtocol, RejectsBadArguments) {
  EXPECT_EQ(code_of([] { opq::run_protocol(config(1e9, 1), "crc", opq::constant(1), {}, 1); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { opq::run_protocol(config(1e9, 1), "crc", opq::constant(1), kSizes, 0); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(
      code_of([] { opq::run_protocol(config(1e9, 1), "baseline", opq::constant(1), kSizes, 1); }),
      ErrorCode::ReservedOperatorName);
}

TEST(SimulateSweep, SingleOperatorMatchesRunProtocol) {
  const auto cfg = config(1.8e9, 400, 0.02, 5);
  const opq::InjectedOperator op{"crc", opq::power_law(2, 1.37)};
  const auto sweep = opq::simulate_sweep(cfg, {&op, 1}, kSizes, 3);
  const auto proto = opq::run_protocol(cfg, "crc", op.cost_fn, kSizes, 3);
  std::vector<opq::MeasurementRecord> base, sut;
  for (const auto& r : sweep) (r.op == "baseline" ? base : sut).push_back(r);
  EXPECT_EQ(base, proto.baseline);
  EXPECT_EQ(sut, proto.sut);
}

TEST(EndToEnd, RecoversExponent) {
  const auto injected = opq::curve_from_base("injected", 2 * std::pow(64, 1.37), 1.37, 64);
  const auto report = opq::end_to_end_roundtrip(config(1.8e9, 400), opq::power_law(2, 1.37),
                                                kSizes, injected);
  ASSERT_TRUE(report.curve);
  EXPECT_FALSE(report.degenerate);
  EXPECT_LT(std::abs(report.delta_k), 1e-6);
  EXPECT_LT(std::abs(report.delta_a) / 2.0, 1e-6);
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(EndToEnd, ZeroCostOperatorIsDegenerate) {
  const auto report = opq::end_to_end_roundtrip(config(1.8e9, 400), opq::constant(0), kSizes);
  EXPECT_TRUE(report.degenerate);
  EXPECT_FALSE(report.curve);
  ASSERT_EQ(report.recovered.size(), 3u);
  for (const auto& s : report.recovered) EXPECT_EQ(s.cost_cycles, 0.0);
  EXPECT_EQ(report.max_relative_error, 0.0);
}

TEST(EndToEnd, LineRateCapExcludesSmallestSize) {
  // Base cost proportional to size at 2.2 GHz gives baseline rates of
  // 1.6e8, 8e7 and 4e7 pps; the 100GbE caps are 1.488e8, 8.446e7 and
  // 4.529e7 pps, so only 64 B is NIC-limited (8e7 < 0.98 * 8.446e7).
  opq::SimConfig cfg{2.2e9, opq::power_law(0.21484375, 1.0),
                     opq::ethernet_line_rate(opq::k100GbE), 0.0, 0, "sim"};
  const auto report = opq::end_to_end_roundtrip(cfg, opq::power_law(2, 1.3), kSizes);
  EXPECT_EQ(report.excluded_sizes, std::vector<opq::PacketSize>{64});
  ASSERT_EQ(report.recovered.size(), 2u);
  EXPECT_EQ(report.recovered[0].packet_size, 128u);
  ASSERT_TRUE(report.curve);
  EXPECT_NEAR(report.curve->exponent_k, 1.3, 1e-9);
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(EndToEnd, NoiselessGridRoundTrip) {
  for (double base : {50.0, 400.0, 1000.0})
    for (double op : {0.5, 10.0, 823.0, 12006.0}) {
      opq::Simulator sim(config(1.8e9, base));
      const double got =
          opq::derive_operator_cost(1.8e9, sim.throughput(64, 0).pps, sim.throughput(64, op).pps);
      EXPECT_LT(std::abs(got - op) / std::max(op, 1.0), 1e-9) << base << " " << op;
    }
}

}  // namespace
