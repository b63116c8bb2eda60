// opqprof: operator cost profiling from saturation throughput.
//
//   opqprof simulate --config sim.json --out m.csv
//   opqprof derive --input m.csv --cpu-hz 1.8e9 --out p.json
//   opqprof fit --input p.json --out p.json
//   opqprof classify --input p.json --out p.json
//   opqprof report --input p.json
//
// Exit codes: 0 ok, 1 usage, 2 data/validation, 3 measurement validity.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>

#include "opq/opq.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitValidity = 3;

struct ValidityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<double> cpu_hz;
  std::optional<double> threshold;
  std::optional<double> line_rate_pps;
  std::optional<double> link_gbps;
  std::optional<std::uint64_t> seed;
  std::vector<opq::PacketSize> sizes;
  std::string out;
  bool strict = false;
};

bool color_enabled() {
  return std::getenv("OPQ_NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) != 0;
}

std::string paint(opq::QuadrantLabel q) {
  std::string label(opq::to_string(q));
  if (!color_enabled()) return label;
  const char* code = "0";
  switch (q) {
    case opq::QuadrantLabel::LatentTrap: code = "31"; break;
    case opq::QuadrantLabel::HighStartupCost: code = "33"; break;
    case opq::QuadrantLabel::Ideal: code = "32"; break;
    case opq::QuadrantLabel::EmergentBottleneck: code = "35"; break;
  }
  return "\033[" + std::string(code) + "m" + label + "\033[0m";
}

void emit(const GlobalOptions& g, const std::string& content) {
  if (g.out.empty() || g.out == "-") std::cout << content;
  else opq::write_file_atomic(g.out, content);
}

opq::DerivationOptions derivation_options(const GlobalOptions& g) {
  opq::DerivationOptions options;
  if (g.link_gbps) options.line_rate_pps = opq::ethernet_line_rate(*g.link_gbps * 1e9);
  else if (g.line_rate_pps) options.line_rate_pps = opq::constant(*g.line_rate_pps);
  return options;
}

void print_points(const opq::ProfileDocument& doc) {
  for (const auto& p : doc.opq_points)
    std::cout << p.platform << "  " << p.op << "  base=" << opq::format_cost(p.base_cost)
              << "  k=" << opq::format_exponent(p.exponent_k)
              << "  threshold=" << opq::format_cost(p.threshold_used) << "  " << paint(p.quadrant)
              << "  strategy: " << opq::strategy_for(p.quadrant) << '\n';
}

int cmd_calibrate(const GlobalOptions& g) {
  opq::bench::BenchConfig config;
  config.cpu_hz_override = g.cpu_hz;
  std::cout << opq::format_exact(opq::bench::calibrate_cpu_hz(config)) << '\n';
  return kExitOk;
}

struct BenchOptions {
  std::vector<std::string> operators{"crc", "checksum", "htons", "hash", "printf", "ringlog"};
  double warmup = 0.05;
  double duration = 0.25;
  int repetitions = 3;
  std::size_t pool = 1024;
  std::string printf_target;
  std::string csv;
};

int cmd_bench(const GlobalOptions& g, const BenchOptions& b) {
  opq::bench::BenchConfig config;
  if (!g.sizes.empty()) config.packet_sizes = g.sizes;
  config.warmup_duration = b.warmup;
  config.measure_duration = b.duration;
  config.repetitions = b.repetitions;
  config.pool_size = b.pool;
  config.cpu_hz_override = g.cpu_hz;
  config.printf_target = b.printf_target;
  if (g.seed) config.seed = *g.seed;

  std::cerr << "bench: pin this process to an isolated core and disable frequency scaling "
               "for stable results\n";
  auto result = opq::bench::bench_to_profile(config, b.operators);
  if (g.threshold) opq::classify_profile(result.document, g.threshold);
  if (!b.csv.empty())
    opq::write_file_atomic(b.csv, opq::emit_measurements_csv(result.records));
  emit(g, opq::emit_profile(result.document));
  std::cerr << "bench: cpu_hz=" << opq::format_exact(result.cpu_hz) << " sink=" << result.sink
            << " operators=" << b.operators.size() << '\n';
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& config_path) {
  auto spec = opq::parse_sim_spec(opq::read_file(config_path));
  if (g.seed) spec.config.seed = *g.seed;
  if (g.cpu_hz) spec.config.cpu_hz = *g.cpu_hz;
  if (!g.sizes.empty()) spec.sizes = g.sizes;
  spec.config.validate(spec.sizes);
  const auto records = opq::simulate_sweep(spec.config, spec.operators, spec.sizes, spec.runs);
  emit(g, opq::emit_measurements_csv(records));
  return kExitOk;
}

int cmd_derive(const GlobalOptions& g, const std::string& input, const std::string& platform) {
  if (!g.cpu_hz) throw opq::Error(opq::ErrorCode::InvalidConfig, "derive needs --cpu-hz");
  auto records = opq::parse_measurements_csv(input);

  std::set<std::string> platforms;
  for (const auto& r : records) platforms.insert(r.platform);
  std::string chosen = platform;
  if (chosen.empty()) {
    if (platforms.size() != 1)
      throw opq::Error(opq::ErrorCode::InconsistentRecords,
                       "input holds several platforms; choose one with --platform");
    chosen = *platforms.begin();
  }

  std::map<std::string, std::vector<opq::MeasurementRecord>> by_op;
  for (auto& r : records)
    if (r.platform == chosen) by_op[r.op].push_back(std::move(r));
  if (!by_op.count(std::string(opq::kBaselineOperator)))
    throw opq::Error(opq::ErrorCode::InconsistentRecords, "no baseline records for " + chosen);

  const auto options = derivation_options(g);
  std::map<std::string, opq::DerivationResult> derived;
  for (const auto& [op, recs] : by_op) {
    if (op == opq::kBaselineOperator) continue;
    derived[op] = opq::derive_sweep(*g.cpu_hz, by_op.at("baseline"), recs, options);
  }

  opq::ProfileDocument doc;
  doc.platform = {chosen, *g.cpu_hz, ""};
  doc.provenance = "ingested";
  bool bound = false;
  for (const auto& [op, result] : derived) {
    doc.samples.insert(doc.samples.end(), result.samples.begin(), result.samples.end());
    for (const auto& w : result.warnings) {
      const std::string note = op + ": " + std::string(opq::to_string(w.flag)) + " at " +
                               std::to_string(w.packet_size) + " B (" + w.op + ")";
      doc.notes.push_back(note);
      std::cerr << "derive: " << note << '\n';
      bound = bound || w.flag == opq::Validity::LineRateBound;
    }
  }
  if (bound && g.strict)
    throw ValidityFailure("line-rate bound measurements present (strict mode)");
  emit(g, opq::emit_profile(doc));
  return kExitOk;
}

int cmd_fit(const GlobalOptions& g, const std::string& input) {
  auto doc = opq::load_profile(input);
  std::map<std::string, opq::DerivationResult> by_op;
  for (const auto& s : doc.samples) by_op[s.op].samples.push_back(s);
  auto fitted = opq::build_profile(doc.platform, doc.provenance, by_op);
  fitted.notes.insert(fitted.notes.begin(), doc.notes.begin(), doc.notes.end());
  emit(g, opq::emit_profile(fitted));
  return kExitOk;
}

int cmd_classify(const GlobalOptions& g, const std::string& input) {
  auto doc = opq::load_profile(input);
  opq::classify_profile(doc, g.threshold);
  emit(g, opq::emit_profile(doc));
  if (!g.out.empty() && g.out != "-") print_points(doc);
  return kExitOk;
}

int cmd_shift(const GlobalOptions& g, const std::string& from_path, const std::string& to_path) {
  auto from = opq::load_profile(from_path);
  auto to = opq::load_profile(to_path);
  if (from.opq_points.empty() || g.threshold) opq::classify_profile(from, g.threshold);
  if (to.opq_points.empty() || g.threshold) opq::classify_profile(to, g.threshold);
  const auto result = opq::compute_shift(from.opq_points, to.opq_points);
  emit(g, opq::dump_json(opq::emit_opq_plot_data({&from, 1}, {&to, 1})));
  if (!g.out.empty() && g.out != "-") {
    for (const auto& s : result.shifts)
      std::cout << s.op << "  " << paint(s.from_quadrant) << " -> " << paint(s.to_quadrant)
                << "  dbase=" << opq::format_cost(s.delta_base)
                << "  dk=" << opq::format_exponent(s.delta_k) << (s.shifted() ? "  SHIFT" : "")
                << '\n';
    for (const auto& op : result.skipped) std::cout << op << "  skipped (one platform only)\n";
  }
  return kExitOk;
}

int cmd_report(const GlobalOptions& g, const std::vector<std::string>& inputs,
               const std::string& plot_path) {
  std::vector<opq::ProfileDocument> docs;
  for (const auto& path : inputs) {
    docs.push_back(opq::load_profile(path));
    if (docs.back().opq_points.empty() || g.threshold) opq::classify_profile(docs.back(), g.threshold);
  }
  emit(g, opq::emit_table_report(docs));
  if (!plot_path.empty()) {
    std::span<const opq::ProfileDocument> all(docs);
    const auto plot = docs.size() == 2 ? opq::emit_opq_plot_data(all.first(1), all.last(1))
                                       : opq::emit_opq_plot_data(all);
    opq::write_file_atomic(plot_path, opq::dump_json(plot));
  }
  return kExitOk;
}

int cmd_reference(const GlobalOptions& g, const std::string& out_dir, const std::string& plot_path) {
  auto ref = opq::load_reference_profiles();
  opq::classify_profile(ref.arm, g.threshold);
  opq::classify_profile(ref.x86, g.threshold);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    opq::write_file_atomic(std::filesystem::path(out_dir) / "arm.json", opq::emit_profile(ref.arm));
    opq::write_file_atomic(std::filesystem::path(out_dir) / "x86.json", opq::emit_profile(ref.x86));
  }
  if (!plot_path.empty())
    opq::write_file_atomic(plot_path,
                           opq::dump_json(opq::emit_opq_plot_data({&ref.arm, 1}, {&ref.x86, 1})));
  const std::vector<opq::ProfileDocument> docs{ref.arm, ref.x86};
  emit(g, opq::emit_table_report(docs));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator cost profiling from saturation throughput"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--cpu-hz", g.cpu_hz, "CPU frequency in Hz")->check(CLI::PositiveNumber);
  app.add_option("--threshold", g.threshold, "Fixed base-cost threshold in cycles");
  app.add_option("--line-rate-pps", g.line_rate_pps, "Constant NIC cap in packets/s")
      ->check(CLI::PositiveNumber);
  app.add_option("--link-gbps", g.link_gbps, "Ethernet link speed; cap follows frame size")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--sizes", g.sizes, "Packet sizes in bytes")->delimiter(',');
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_flag("--strict", g.strict, "Line-rate bound data is an error (exit 3)");

  app.add_subcommand("calibrate", "Estimate the CPU frequency");

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Benchmark operators on this host");
  bench->add_option("--operators", bench_opts.operators, "Operators to measure")
      ->delimiter(',')
      ->check(CLI::IsMember({"crc", "checksum", "htons", "hash", "printf", "ringlog"}));
  bench->add_option("--warmup", bench_opts.warmup, "Warm-up seconds per window");
  bench->add_option("--duration", bench_opts.duration, "Measurement seconds per window");
  bench->add_option("--reps", bench_opts.repetitions, "Repetitions per size");
  bench->add_option("--pool", bench_opts.pool, "Packets in the buffer pool");
  bench->add_option("--printf-target", bench_opts.printf_target,
                    "File receiving printf output (default: stderr)");
  bench->add_option("--csv", bench_opts.csv, "Also write raw measurements here");

  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "Generate measurements from a model");
  simulate->add_option("--config", sim_config, "Simulation config (JSON)")->required();

  std::string derive_input, derive_platform;
  auto* derive = app.add_subcommand("derive", "Derive operator costs from measurements");
  derive->add_option("--input", derive_input, "Measurement CSV")->required();
  derive->add_option("--platform", derive_platform, "Platform to derive");

  std::string fit_input;
  auto* fit = app.add_subcommand("fit", "Fit power-law curves to derived costs");
  fit->add_option("--input", fit_input, "Profile document")->required();

  std::string classify_input;
  auto* classify = app.add_subcommand("classify", "Assign performance quadrants");
  classify->add_option("--input", classify_input, "Profile document")->required();

  std::string shift_from, shift_to;
  auto* shift = app.add_subcommand("shift", "Quadrant shift between two platforms");
  shift->add_option("--from", shift_from, "Source platform profile")->required();
  shift->add_option("--to", shift_to, "Target platform profile")->required();

  std::vector<std::string> report_inputs;
  std::string report_plot;
  auto* report = app.add_subcommand("report", "Tabulate profiles");
  report->add_option("--input", report_inputs, "Profile documents")->required();
  report->add_option("--plot", report_plot, "Also write plot data here");

  std::string reference_dir, reference_plot;
  auto* reference = app.add_subcommand("reference", "Bundled two-platform reference dataset");
  reference->add_option("--out-dir", reference_dir, "Write arm.json and x86.json here");
  reference->add_option("--plot", reference_plot, "Also write plot data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (g.line_rate_pps && g.link_gbps) {
    std::cerr << "error: --line-rate-pps and --link-gbps are mutually exclusive\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("calibrate")) return cmd_calibrate(g);
    if (*bench) return cmd_bench(g, bench_opts);
    if (*simulate) return cmd_simulate(g, sim_config);
    if (*derive) return cmd_derive(g, derive_input, derive_platform);
    if (*fit) return cmd_fit(g, fit_input);
    if (*classify) return cmd_classify(g, classify_input);
    if (*shift) return cmd_shift(g, shift_from, shift_to);
    if (*report) return cmd_report(g, report_inputs, report_plot);
    if (*reference) return cmd_reference(g, reference_dir, reference_plot);
  } catch (const ValidityFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidity;
  } catch (const opq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == opq::ErrorCode::NegativeCost ? kExitValidity : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
