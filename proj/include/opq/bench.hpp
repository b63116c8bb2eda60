#pragma once

// In-process packet pipeline micro-benchmark.
//
// Each measurement window spins on: fetch the next pooled packet, touch
// its first cache line and bump a counter (the "minimal forwarding"
// baseline), then call the operator body. Throughput is packets divided
// by elapsed monotonic time. The loop is single-threaded; run it pinned
// to an isolated core with frequency scaling disabled.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opq/core.hpp"
#include "opq/derivation.hpp"
#include "opq/profile.hpp"

namespace opq::bench {

// ---------------------------------------------------------------------------
// Operator primitives

namespace detail {

constexpr std::array<std::uint32_t, 256> make_crc32_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int bit = 0; bit < 8; ++bit) c = (c & 1U) ? 0xEDB88320U ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

inline constexpr auto kCrc32Table = make_crc32_table();

}  // namespace detail

/// CRC-32 (reflected, polynomial 0xEDB88320, init and final xor 0xFFFFFFFF).
inline std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept {
  std::uint32_t crc = 0xFFFFFFFFU;
  for (std::uint8_t b : data) crc = detail::kCrc32Table[(crc ^ b) & 0xFFU] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFU;
}

/// RFC 1071 internet checksum: one's-complement of the one's-complement
/// sum of big-endian 16-bit words; an odd trailing byte is zero-padded.
inline std::uint16_t internet_checksum(std::span<const std::uint8_t> data) noexcept {
  std::uint64_t sum = 0;
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2)
    sum += static_cast<std::uint32_t>(data[i]) << 8 | data[i + 1];
  if (i < data.size()) sum += static_cast<std::uint32_t>(data[i]) << 8;
  while (sum >> 16) sum = (sum & 0xFFFFU) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum & 0xFFFFU);
}

inline constexpr std::size_t kFlowKeyBytes = 13;
using FlowKey = std::array<std::uint8_t, kFlowKeyBytes>;

// IPv4/UDP header offsets inside an Ethernet frame.
inline constexpr std::size_t kEtherTypeOffset = 12;
inline constexpr std::size_t kIpProtoOffset = 23;
inline constexpr std::size_t kIpSrcOffset = 26;
inline constexpr std::size_t kIpDstOffset = 30;
inline constexpr std::size_t kUdpSrcPortOffset = 34;
inline constexpr std::size_t kUdpDstPortOffset = 36;
inline constexpr std::size_t kMinFrameStorage = 64;

/// src ip, dst ip, src port, dst port, protocol.
inline FlowKey read_flow_key(const std::uint8_t* frame) noexcept {
  FlowKey key;
  std::memcpy(key.data(), frame + kIpSrcOffset, 4);
  std::memcpy(key.data() + 4, frame + kIpDstOffset, 4);
  std::memcpy(key.data() + 8, frame + kUdpSrcPortOffset, 2);
  std::memcpy(key.data() + 10, frame + kUdpDstPortOffset, 2);
  key[12] = frame[kIpProtoOffset];
  return key;
}

inline void write_flow_key(std::uint8_t* frame, const FlowKey& key) noexcept {
  std::memcpy(frame + kIpSrcOffset, key.data(), 4);
  std::memcpy(frame + kIpDstOffset, key.data() + 4, 4);
  std::memcpy(frame + kUdpSrcPortOffset, key.data() + 8, 2);
  std::memcpy(frame + kUdpDstPortOffset, key.data() + 10, 2);
  frame[kIpProtoOffset] = key[12];
}

/// Open-addressing (linear probing) flow table with a power-of-two
/// capacity.
class FlowTable {
 public:
  explicit FlowTable(std::size_t capacity) : slots_(capacity) {
    if (capacity == 0 || (capacity & (capacity - 1)) != 0)
      throw Error(ErrorCode::InvalidConfig, "flow table capacity must be a power of two");
  }

  static std::uint64_t hash(const FlowKey& key) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (std::uint8_t b : key) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
    return h ^ (h >> 29);
  }

  /// Returns false if the key was already present or the table is full.
  bool insert(const FlowKey& key, std::uint32_t value) {
    if (size_ == slots_.size()) return false;
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash(key) & mask;; i = (i + 1) & mask) {
      Slot& slot = slots_[i];
      if (!slot.used) {
        slot = {key, value, true};
        ++size_;
        return true;
      }
      if (slot.key == key) return false;
    }
  }

  std::optional<std::uint32_t> find(const FlowKey& key) const noexcept {
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash(key) & mask, probes = 0; probes < slots_.size();
         i = (i + 1) & mask, ++probes) {
      const Slot& slot = slots_[i];
      if (!slot.used) return std::nullopt;
      if (slot.key == key) return slot.value;
    }
    return std::nullopt;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return slots_.size(); }

 private:
  struct Slot {
    FlowKey key{};
    std::uint32_t value = 0;
    bool used = false;
  };
  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

/// Fixed-capacity in-memory log; appends wrap around and never allocate.
class RingLog {
 public:
  explicit RingLog(std::size_t capacity) : buffer_(capacity) {}

  void append(std::string_view line) noexcept {
    for (char c : line) {
      buffer_[head_] = c;
      if (++head_ == buffer_.size()) head_ = 0;
    }
    written_ += line.size();
  }

  std::uint64_t bytes_written() const noexcept { return written_; }

  /// Most recent `n` bytes in write order.
  std::string tail(std::size_t n) const {
    n = std::min({n, buffer_.size(), static_cast<std::size_t>(written_)});
    std::string out;
    out.reserve(n);
    std::size_t start = (head_ + buffer_.size() - n) % buffer_.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(buffer_[(start + i) % buffer_.size()]);
    return out;
  }

 private:
  std::vector<char> buffer_;
  std::size_t head_ = 0;
  std::uint64_t written_ = 0;
};

// ---------------------------------------------------------------------------
// Configuration

struct BenchConfig {
  std::vector<PacketSize> packet_sizes{64, 128, 256};
  double warmup_duration = 0.05;   // seconds
  double measure_duration = 0.25;  // seconds
  int repetitions = 3;
  std::optional<double> cpu_hz_override;
  std::size_t pool_size = 1024;
  std::uint64_t seed = 1;
  std::string platform = "host";
  /// Destination of the printf operator; empty means standard error.
  std::string printf_target;

  void validate() const {
    if (!(warmup_duration > 0.0) || !(measure_duration > 0.0))
      throw Error(ErrorCode::InvalidConfig, "durations must be > 0");
    if (repetitions < 1) throw Error(ErrorCode::InvalidConfig, "repetitions must be >= 1");
    if (pool_size < 1) throw Error(ErrorCode::InvalidConfig, "pool_size must be >= 1");
    if (packet_sizes.empty()) throw Error(ErrorCode::InvalidConfig, "no packet sizes");
    for (PacketSize s : packet_sizes)
      if (s < 18)
        throw Error(ErrorCode::InvalidConfig, "packet size " + std::to_string(s) + " < 18 B");
    if (cpu_hz_override && !(*cpu_hz_override > 0.0))
      throw Error(ErrorCode::InvalidConfig, "cpu_hz override must be > 0");
  }
};

inline constexpr std::array<std::string_view, 7> kOperatorIds{
    "baseline", "crc", "checksum", "htons", "hash", "printf", "ringlog"};

inline bool is_known_operator(std::string_view id) {
  return std::find(kOperatorIds.begin(), kOperatorIds.end(), id) != kOperatorIds.end();
}

// ---------------------------------------------------------------------------
// CPU frequency calibration

namespace detail {

/// Eight serially dependent adds per iteration; the empty asm keeps the
/// compiler from folding the chain.
[[gnu::noinline]] inline std::uint64_t dependent_add_chain(std::uint64_t iterations) {
  std::uint64_t x = 0;
  std::uint64_t one = 1;
  asm volatile("" : "+r"(one));
  // Register operand: some renamers fold chains of immediate adds.
  for (std::uint64_t i = 0; i < iterations; ++i) {
#define OPQ_DEP_ADD \
  x += one;         \
  asm volatile("" : "+r"(x));
    OPQ_DEP_ADD OPQ_DEP_ADD OPQ_DEP_ADD OPQ_DEP_ADD
    OPQ_DEP_ADD OPQ_DEP_ADD OPQ_DEP_ADD OPQ_DEP_ADD
#undef OPQ_DEP_ADD
  }
  return x;
}

inline constexpr std::uint64_t kAddsPerIteration = 8;

}  // namespace detail

/// Smallest positive step observed between consecutive monotonic clock
/// reads, in seconds.
inline double monotonic_clock_granularity() {
  using clock = std::chrono::steady_clock;
  double best = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = clock::now();
    auto b = clock::now();
    while (b == a) b = clock::now();
    best = std::min(best, std::chrono::duration<double>(b - a).count());
  }
  return best;
}

inline double calibrate_cpu_hz(const BenchConfig& config) {
  config.validate();
  if (config.cpu_hz_override) return *config.cpu_hz_override;
  if (monotonic_clock_granularity() > 1e-6)
    throw Error(ErrorCode::ClockResolutionTooCoarse, "monotonic clock step exceeds 1 us");

  using clock = std::chrono::steady_clock;
  constexpr std::uint64_t kIterations = 4'000'000;
  detail::dependent_add_chain(kIterations / 4);  // warm up
  std::vector<double> trials;
  for (int t = 0; t < 5; ++t) {
    const auto start = clock::now();
    const std::uint64_t x = detail::dependent_add_chain(kIterations);
    const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
    trials.push_back(static_cast<double>(x) / elapsed);
  }
  return median(trials);
}

// ---------------------------------------------------------------------------
// Pipeline

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};

}  // namespace detail

/// Mutable state reachable from operator bodies.
struct PipelineState {
  std::uint64_t sink = 0;
  std::uint64_t counter = 0;
  const FlowTable* flows = nullptr;
  RingLog* ring = nullptr;
  std::FILE* printf_out = nullptr;
};

using OperatorBody = void (*)(std::uint8_t* frame, PacketSize size, PipelineState& state);

namespace ops {

// noinline keeps every body behind the same indirect call, so the
// baseline and the SUT differ only by the body itself.

[[gnu::noinline]] inline void baseline(std::uint8_t*, PacketSize, PipelineState&) {
  asm volatile("");
}

[[gnu::noinline]] inline void crc(std::uint8_t* frame, PacketSize size, PipelineState& st) {
  st.sink += crc32({frame, size});
}

[[gnu::noinline]] inline void checksum(std::uint8_t* frame, PacketSize size, PipelineState& st) {
  st.sink += internet_checksum({frame, size});
}

[[gnu::noinline]] inline void htons(std::uint8_t* frame, PacketSize, PipelineState&) {
  std::uint16_t v;
  std::memcpy(&v, frame + kEtherTypeOffset, sizeof v);
  v = static_cast<std::uint16_t>((v << 8) | (v >> 8));
  std::memcpy(frame + kEtherTypeOffset, &v, sizeof v);
}

[[gnu::noinline]] inline void hash(std::uint8_t* frame, PacketSize, PipelineState& st) {
  st.sink += st.flows->find(read_flow_key(frame)).value_or(0xFFFFFFFFU);
}

/// "<name> <counter>\n" without going through stdio.
inline std::size_t format_log_line(char* out, std::size_t cap, std::string_view name,
                                   std::uint64_t counter) noexcept {
  std::size_t n = std::min(name.size(), cap);
  std::memcpy(out, name.data(), n);
  if (n < cap) out[n++] = ' ';
  auto res = std::to_chars(out + n, out + cap, counter);
  n = static_cast<std::size_t>(res.ptr - out);
  if (n < cap) out[n++] = '\n';
  return n;
}

[[gnu::noinline]] inline void printf_log(std::uint8_t*, PacketSize, PipelineState& st) {
  std::fprintf(st.printf_out, "printf %llu\n", static_cast<unsigned long long>(st.counter));
}

[[gnu::noinline]] inline void ringlog(std::uint8_t*, PacketSize, PipelineState& st) {
  char line[48];
  const std::size_t n = format_log_line(line, sizeof line, "printf", st.counter);
  st.ring->append({line, n});
}

}  // namespace ops

inline OperatorBody operator_body(std::string_view id) {
  if (id == "baseline") return ops::baseline;
  if (id == "crc") return ops::crc;
  if (id == "checksum") return ops::checksum;
  if (id == "htons") return ops::htons;
  if (id == "hash") return ops::hash;
  if (id == "printf") return ops::printf_log;
  if (id == "ringlog") return ops::ringlog;
  throw Error(ErrorCode::UnknownOperator, std::string(id));
}

inline constexpr std::size_t kFlowTableCapacity = 65536;
inline constexpr double kFlowTableLoad = 0.6;
inline constexpr std::size_t kRingLogBytes = 1 << 20;

/// Packet pool, flow table and log sinks shared by every measurement of
/// one benchmark session.
class Pipeline {
 public:
  explicit Pipeline(const BenchConfig& config)
      : config_(config), flows_(kFlowTableCapacity), ring_(kRingLogBytes) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);

    std::vector<FlowKey> keys;
    const auto n_keys = static_cast<std::size_t>(kFlowTableLoad * kFlowTableCapacity);
    while (keys.size() < n_keys) {
      FlowKey key;
      for (auto& b : key) b = static_cast<std::uint8_t>(rng());
      key[12] = 17;  // UDP
      if (flows_.insert(key, static_cast<std::uint32_t>(keys.size()))) keys.push_back(key);
    }

    const PacketSize largest =
        *std::max_element(config_.packet_sizes.begin(), config_.packet_sizes.end());
    stride_ = (std::max<std::size_t>(largest, kMinFrameStorage) + 63) / 64 * 64;
    storage_.assign(stride_ * config_.pool_size, 0);
    for (std::size_t p = 0; p < config_.pool_size; ++p) {
      std::uint8_t* frame = storage_.data() + p * stride_;
      for (std::size_t i = 0; i < stride_; ++i) frame[i] = static_cast<std::uint8_t>(rng());
      frame[kEtherTypeOffset] = 0x08;
      frame[kEtherTypeOffset + 1] = 0x00;
      frame[14] = 0x45;  // IPv4, IHL 5
      write_flow_key(frame, keys[rng() % keys.size()]);
    }

    if (config_.printf_target.empty()) {
      printf_out_ = stderr;
    } else {
      owned_out_.reset(std::fopen(config_.printf_target.c_str(), "w"));
      if (!owned_out_) throw Error(ErrorCode::Io, "cannot open " + config_.printf_target);
      std::setvbuf(owned_out_.get(), nullptr, _IONBF, 0);
      printf_out_ = owned_out_.get();
    }
    state_.flows = &flows_;
    state_.ring = &ring_;
    state_.printf_out = printf_out_;
  }

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const BenchConfig& config() const noexcept { return config_; }
  std::uint64_t sink() const noexcept { return state_.sink + ring_.bytes_written(); }
  const FlowTable& flows() const noexcept { return flows_; }

  /// Saturation throughput of one window (after warm-up) in packets/s.
  double measure(std::string_view operator_id, PacketSize size) {
    const OperatorBody body = operator_body(operator_id);
    if (std::find(config_.packet_sizes.begin(), config_.packet_sizes.end(), size) ==
        config_.packet_sizes.end())
      throw Error(ErrorCode::InvalidConfig, "size " + std::to_string(size) + " not in sweep");
    spin(body, size, config_.warmup_duration);
    return spin(body, size, config_.measure_duration);
  }

 private:
  double spin(OperatorBody body, PacketSize size, double seconds) {
    using clock = std::chrono::steady_clock;
    constexpr int kBatch = 64;
    const auto window = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(seconds));
    std::uint64_t packets = 0;
    std::size_t idx = 0;
    const std::size_t pool = config_.pool_size;
    const auto start = clock::now();
    const auto deadline = start + window;
    auto now = start;
    do {
      for (int i = 0; i < kBatch; ++i) {
        std::uint8_t* frame = storage_.data() + idx * stride_;
        if (++idx == pool) idx = 0;
        std::uint64_t word;
        std::memcpy(&word, frame, sizeof word);
        state_.sink += word;
        ++state_.counter;
        body(frame, size, state_);
      }
      packets += kBatch;
      now = clock::now();
    } while (now < deadline);
    return static_cast<double>(packets) / std::chrono::duration<double>(now - start).count();
  }

  BenchConfig config_;
  FlowTable flows_;
  RingLog ring_;
  std::vector<std::uint8_t> storage_;
  std::size_t stride_ = 0;
  std::unique_ptr<std::FILE, detail::FileCloser> owned_out_;
  std::FILE* printf_out_ = nullptr;
  PipelineState state_;
};

inline std::vector<MeasurementRecord> run_pipeline(Pipeline& pipeline,
                                                   std::string_view operator_id) {
  if (!is_known_operator(operator_id))
    throw Error(ErrorCode::UnknownOperator, std::string(operator_id));
  const auto& config = pipeline.config();
  std::vector<MeasurementRecord> out;
  for (PacketSize size : config.packet_sizes)
    for (int rep = 0; rep < config.repetitions; ++rep)
      out.push_back({config.platform, std::string(operator_id), size,
                     pipeline.measure(operator_id, size), rep});
  return out;
}

inline std::vector<MeasurementRecord> run_pipeline(const BenchConfig& config,
                                                   std::string_view operator_id) {
  if (!is_known_operator(operator_id))
    throw Error(ErrorCode::UnknownOperator, std::string(operator_id));
  Pipeline pipeline(config);
  return run_pipeline(pipeline, operator_id);
}

struct BenchProfile {
  ProfileDocument document;
  std::vector<MeasurementRecord> records;
  double cpu_hz = 0.0;
  std::uint64_t sink = 0;
  std::vector<std::string> retried;
};

/// Measures baseline and operators interleaved per (repetition, size),
/// derives, fits and classifies. An operator whose derivation yields a
/// negative cost is re-measured once against a fresh baseline; a second
/// failure propagates.
inline BenchProfile bench_to_profile(const BenchConfig& config,
                                     const std::vector<std::string>& operators) {
  for (const auto& op : operators) {
    require_user_operator_name(op);
    if (!is_known_operator(op)) throw Error(ErrorCode::UnknownOperator, op);
  }
  BenchProfile out;
  out.cpu_hz = calibrate_cpu_hz(config);
  Pipeline pipeline(config);

  std::map<std::string, std::vector<MeasurementRecord>> by_op;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    for (PacketSize size : config.packet_sizes) {
      by_op["baseline"].push_back(
          {config.platform, "baseline", size, pipeline.measure("baseline", size), rep});
      for (const auto& op : operators)
        by_op[op].push_back({config.platform, op, size, pipeline.measure(op, size), rep});
    }
  }
  for (const auto& [op, records] : by_op)
    out.records.insert(out.records.end(), records.begin(), records.end());

  std::map<std::string, DerivationResult> derived;
  for (const auto& op : operators) {
    try {
      derived[op] = derive_sweep(out.cpu_hz, by_op["baseline"], by_op[op]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NegativeCost) throw;
      out.retried.push_back(op);
      std::vector<MeasurementRecord> base, sut;
      for (int rep = 0; rep < config.repetitions; ++rep) {
        for (PacketSize size : config.packet_sizes) {
          base.push_back(
              {config.platform, "baseline", size, pipeline.measure("baseline", size), rep});
          sut.push_back({config.platform, op, size, pipeline.measure(op, size), rep});
        }
      }
      derived[op] = derive_sweep(out.cpu_hz, base, sut);
    }
  }

  PlatformSpec platform{config.platform, out.cpu_hz, "in-process pipeline benchmark"};
  out.document = build_profile(platform, "bench", derived);
  for (const auto& op : out.retried)
    out.document.notes.push_back(op + ": re-measured once after a negative derived cost");
  classify_profile(out.document);
  out.sink = pipeline.sink();
  return out;
}

}  // namespace opq::bench
