#pragma once

// Files and documents: measurement CSV, profile and plot JSON documents,
// the bundled two-platform reference dataset, and the text report.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "opq/classify.hpp"
#include "opq/core.hpp"
#include "opq/fit.hpp"
#include "opq/profile.hpp"
#include "opq/sim.hpp"

namespace opq {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// At least four significant digits; the integer part is never rounded.
inline std::string format_cost(double v) {
  if (!std::isfinite(v)) return format_exact(v);
  int decimals = 3;
  if (v != 0.0) {
    const int int_digits = static_cast<int>(std::floor(std::log10(std::abs(v)))) + 1;
    decimals = std::max(0, 4 - int_digits);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string format_exponent(double k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", k);
  return buf;
}

// ---------------------------------------------------------------------------
// Atomic file output

/// Writes to a sibling temporary and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename onto " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Measurement CSV

inline constexpr std::string_view kCsvHeader =
    "platform,operator,packet_size_bytes,throughput_pps,run_id";

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

inline void require_csv_safe(std::string_view field) {
  if (field.find_first_of(",\"\r\n") != std::string_view::npos)
    throw Error(ErrorCode::InvalidDocument, "field not representable in CSV: " + std::string(field));
}

}  // namespace detail

inline std::vector<MeasurementRecord> parse_measurements_csv_text(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(ErrorCode::EmptyFile, "");

  std::vector<MeasurementRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!header_seen) {
      if (line != kCsvHeader)
        throw Error(ErrorCode::MissingHeader, "line " + std::to_string(line_no) +
                                                  ": expected '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }

    auto bad = [&](const std::string& reason) {
      return Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": " + reason);
    };
    const auto fields = detail::split_commas(line);
    if (fields.size() != 5)
      throw bad("expected 5 fields, found " + std::to_string(fields.size()));

    MeasurementRecord r;
    r.platform = std::string(fields[0]);
    r.op = std::string(fields[1]);
    const auto size = detail::parse_number<std::uint64_t>(fields[2]);
    if (!size) throw bad("non-numeric packet_size_bytes '" + std::string(fields[2]) + "'");
    if (*size > UINT32_MAX) throw bad("packet_size_bytes out of range");
    r.packet_size = static_cast<PacketSize>(*size);
    const auto pps = detail::parse_number<double>(fields[3]);
    if (!pps) throw bad("non-numeric throughput_pps '" + std::string(fields[3]) + "'");
    r.throughput_pps = *pps;
    if (!fields[4].empty()) {
      const auto run = detail::parse_number<std::int64_t>(fields[4]);
      if (!run) throw bad("non-numeric run_id '" + std::string(fields[4]) + "'");
      r.run_id = *run;
    }
    if (r.platform.empty()) throw bad("empty platform");
    try {
      validate_record(r);
    } catch (const Error& e) {
      throw bad(e.what());
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw Error(ErrorCode::MissingHeader, "");
  return out;
}

inline std::vector<MeasurementRecord> parse_measurements_csv(const std::filesystem::path& path) {
  return parse_measurements_csv_text(read_file(path));
}

inline std::string emit_measurements_csv(std::span<const MeasurementRecord> records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    detail::require_csv_safe(r.platform);
    detail::require_csv_safe(r.op);
    out += r.platform;
    out += ',';
    out += r.op;
    out += ',';
    out += std::to_string(r.packet_size);
    out += ',';
    out += format_exact(r.throughput_pps);
    out += ',';
    if (r.run_id) out += std::to_string(*r.run_id);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON canonical forms

template <class J>
void to_json(J& j, const PlatformSpec& p) {
  j = J{{"name", p.name}, {"cpu_hz", p.cpu_hz}, {"description", p.description}};
}
template <class J>
void from_json(const J& j, PlatformSpec& p) {
  p.name = j.at("name").template get<std::string>();
  p.cpu_hz = j.at("cpu_hz").template get<double>();
  p.description = j.value("description", std::string{});
}

template <class J>
void to_json(J& j, const MeasurementRecord& r) {
  j = J{{"platform", r.platform},
        {"operator", r.op},
        {"packet_size", r.packet_size},
        {"throughput_pps", r.throughput_pps},
        {"run_id", nullptr}};
  if (r.run_id) j["run_id"] = *r.run_id;
}
template <class J>
void from_json(const J& j, MeasurementRecord& r) {
  r.platform = j.at("platform").template get<std::string>();
  r.op = j.at("operator").template get<std::string>();
  r.packet_size = j.at("packet_size").template get<PacketSize>();
  r.throughput_pps = j.at("throughput_pps").template get<double>();
  r.run_id.reset();
  if (j.contains("run_id") && !j.at("run_id").is_null())
    r.run_id = j.at("run_id").template get<std::int64_t>();
}

template <class J>
void to_json(J& j, const CostSample& s) {
  j = J{{"operator", s.op}, {"packet_size", s.packet_size}, {"cost_cycles", s.cost_cycles}};
}
template <class J>
void from_json(const J& j, CostSample& s) {
  s.op = j.at("operator").template get<std::string>();
  s.packet_size = j.at("packet_size").template get<PacketSize>();
  s.cost_cycles = j.at("cost_cycles").template get<double>();
}

template <class J>
void to_json(J& j, const CostCurve& c) {
  j = J{{"operator", c.op},          {"coefficient_a", c.coefficient_a},
        {"exponent_k", c.exponent_k}, {"r_squared", c.r_squared},
        {"base_cost", c.base_cost},   {"n_points", c.n_points}};
}
template <class J>
void from_json(const J& j, CostCurve& c) {
  c.op = j.at("operator").template get<std::string>();
  c.coefficient_a = j.at("coefficient_a").template get<double>();
  c.exponent_k = j.at("exponent_k").template get<double>();
  c.r_squared = j.at("r_squared").template get<double>();
  c.base_cost = j.at("base_cost").template get<double>();
  c.n_points = j.at("n_points").template get<std::size_t>();
}

template <class J>
void to_json(J& j, const QuadrantLabel& q) {
  j = std::string(to_string(q));
}
template <class J>
void from_json(const J& j, QuadrantLabel& q) {
  const auto parsed = quadrant_from_string(j.template get<std::string>());
  if (!parsed) throw Error(ErrorCode::InvalidDocument, "unknown quadrant " + j.dump());
  q = *parsed;
}

template <class J>
void to_json(J& j, const OpqPoint& p) {
  j = J{{"operator", p.op},
        {"platform", p.platform},
        {"base_cost", p.base_cost},
        {"exponent_k", p.exponent_k},
        {"quadrant", p.quadrant},
        {"threshold_used", p.threshold_used}};
}
template <class J>
void from_json(const J& j, OpqPoint& p) {
  p.op = j.at("operator").template get<std::string>();
  p.platform = j.at("platform").template get<std::string>();
  p.base_cost = j.at("base_cost").template get<double>();
  p.exponent_k = j.at("exponent_k").template get<double>();
  p.quadrant = j.at("quadrant").template get<QuadrantLabel>();
  p.threshold_used = j.at("threshold_used").template get<double>();
}

template <class J>
void to_json(J& j, const ShiftRecord& s) {
  j = J{{"operator", s.op},
        {"from_platform", s.from_platform},
        {"to_platform", s.to_platform},
        {"from_quadrant", s.from_quadrant},
        {"to_quadrant", s.to_quadrant},
        {"delta_base", s.delta_base},
        {"delta_k", s.delta_k},
        {"from_threshold", s.from_threshold},
        {"to_threshold", s.to_threshold},
        {"shifted", s.shifted()}};
}
template <class J>
void from_json(const J& j, ShiftRecord& s) {
  s.op = j.at("operator").template get<std::string>();
  s.from_platform = j.at("from_platform").template get<std::string>();
  s.to_platform = j.at("to_platform").template get<std::string>();
  s.from_quadrant = j.at("from_quadrant").template get<QuadrantLabel>();
  s.to_quadrant = j.at("to_quadrant").template get<QuadrantLabel>();
  s.delta_base = j.at("delta_base").template get<double>();
  s.delta_k = j.at("delta_k").template get<double>();
  s.from_threshold = j.value("from_threshold", 0.0);
  s.to_threshold = j.value("to_threshold", 0.0);
  if (j.contains("shifted") && j.at("shifted").template get<bool>() != s.shifted())
    throw Error(ErrorCode::InvalidDocument, "shifted flag contradicts quadrants for " + s.op);
}

template <class J>
void to_json(J& j, const ProfileDocument& d) {
  j = J{{"schema_version", d.schema_version},
        {"platform", d.platform},
        {"provenance", d.provenance},
        {"fit_space", d.fit_space},
        {"curves", d.curves},
        {"samples", d.samples},
        {"opq_points", d.opq_points},
        {"notes", d.notes}};
}
template <class J>
void from_json(const J& j, ProfileDocument& d) {
  d.schema_version = j.at("schema_version").template get<std::string>();
  d.platform = j.at("platform").template get<PlatformSpec>();
  d.provenance = j.value("provenance", std::string{});
  d.fit_space = j.value("fit_space", std::string(kFitSpace));
  d.curves = j.value("curves", std::vector<CostCurve>{});
  d.samples = j.value("samples", std::vector<CostSample>{});
  d.opq_points = j.value("opq_points", std::vector<OpqPoint>{});
  d.notes = j.value("notes", std::vector<std::string>{});
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline std::string emit_profile(const ProfileDocument& doc) { return dump_json(Json(doc)); }

inline ProfileDocument parse_profile_text(std::string_view text) {
  ProfileDocument doc;
  try {
    doc = Json::parse(text).get<ProfileDocument>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidDocument, e.what());
  }
  validate_profile(doc);
  return doc;
}

inline ProfileDocument load_profile(const std::filesystem::path& path) {
  return parse_profile_text(read_file(path));
}

// ---------------------------------------------------------------------------
// Bundled reference dataset: 64-byte base cost and exponent per operator on
// a 1.8 GHz Arm server and a 2.2 GHz Xeon, with the R² each fit reported.

struct ReferenceRow {
  std::string_view op;
  double base_cost;
  double exponent_k;
  double r_squared;
};

inline constexpr PacketSize kReferenceSmallestSize = 64;
inline constexpr std::array<PacketSize, 3> kDefaultSizes{64, 128, 256};

inline constexpr std::array<ReferenceRow, 6> kReferenceArm{{
    {"CRC", 823, 1.3700, 0.9976},
    {"Checksum", 65, 0.1632, 0.9981},
    {"hash", 34, 0.2606, 0.9762},
    {"htons", 49, 0.2067, 0.9993},
    {"printf", 12006, 0.1130, 0.9358},
    {"rte_log", 108, 0.2429, 0.9327},
}};

inline constexpr std::array<ReferenceRow, 6> kReferenceX86{{
    {"CRC", 747, 1.2699, 0.9997},
    {"Checksum", 27, 0.1551, 0.9995},
    {"hash", 9, 0.1547, 0.9988},
    {"htons", 1.5, 0.0644, 0.9634},
    {"printf", 29129, 0.2222, 0.9561},
    {"rte_log", 49, 0.1509, 0.9653},
}};

inline ProfileDocument reference_profile(const PlatformSpec& platform,
                                         std::span<const ReferenceRow> rows) {
  ProfileDocument doc;
  doc.platform = platform;
  doc.provenance = "reference";
  for (const auto& row : rows)
    doc.curves.push_back(curve_from_base(std::string(row.op), row.base_cost, row.exponent_k,
                                         kReferenceSmallestSize, row.r_squared,
                                         kDefaultSizes.size()));
  doc.notes.push_back("r_squared values are as published, not recomputed");
  return doc;
}

struct ReferenceProfiles {
  ProfileDocument arm;
  ProfileDocument x86;
};

inline ReferenceProfiles load_reference_profiles() {
  return {reference_profile({"arm", 1.8e9, "Marvell CN96XX"}, kReferenceArm),
          reference_profile({"x86", 2.2e9, "Intel Xeon Silver 4210"}, kReferenceX86)};
}

// ---------------------------------------------------------------------------
// Text report

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Position in the published operator order; unknown operators sort after.
inline int operator_rank(std::string_view op) {
  static const std::map<std::string, int> order{
      {"crc", 0},    {"checksum", 1}, {"hash", 2},    {"htons", 3},
      {"printf", 4}, {"rte_log", 5},  {"ringlog", 5},
  };
  auto it = order.find(lower(op));
  return it == order.end() ? 100 : it->second;
}

}  // namespace detail

/// Table with columns Operator, Platform, Base Cost, Exponent k, R².
/// Rows are grouped by operator (published order, then name) and keep the
/// order of `profiles` within a group.
inline std::string emit_table_report(std::span<const ProfileDocument> profiles) {
  struct Row {
    std::string op, platform, base, k, r2;
    int rank;
    std::size_t profile_index;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& doc = profiles[i];
    for (const auto& c : doc.curves) {
      double base = c.base_cost;
      for (const auto& p : doc.opq_points)
        if (p.op == c.op) base = p.base_cost;
      rows.push_back({c.op, doc.platform.name, format_cost(base), format_exponent(c.exponent_k),
                      format_exponent(c.r_squared), detail::operator_rank(c.op), i});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& l, const Row& r) {
    if (l.rank != r.rank) return l.rank < r.rank;
    if (l.op != r.op) return l.op < r.op;
    return l.profile_index < r.profile_index;
  });

  const std::vector<std::string> header{"Operator", "Platform", "Base Cost", "Exponent k", "R²"};
  std::vector<std::size_t> width;
  for (const auto& h : header) width.push_back(h == "R²" ? 2 : h.size());
  for (const auto& r : rows) {
    width[0] = std::max(width[0], r.op.size());
    width[1] = std::max(width[1], r.platform.size());
    width[2] = std::max(width[2], r.base.size());
    width[3] = std::max(width[3], r.k.size());
    width[4] = std::max(width[4], r.r2.size());
  }

  std::ostringstream out;
  auto cell = [&](const std::string& text, std::size_t w, bool right, std::size_t display) {
    const std::size_t pad = w > display ? w - display : 0;
    if (right) out << std::string(pad, ' ') << text;
    else out << text << std::string(pad, ' ');
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << "  ";
    cell(header[c], width[c], c >= 2, header[c] == "R²" ? 2 : header[c].size());
  }
  out << '\n';
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';

  std::string last_op;
  for (const auto& r : rows) {
    cell(r.op == last_op ? "" : r.op, width[0], false, r.op == last_op ? 0 : r.op.size());
    last_op = r.op;
    out << "  ";
    cell(r.platform, width[1], false, r.platform.size());
    out << "  ";
    cell(r.base, width[2], true, r.base.size());
    out << "  ";
    cell(r.k, width[3], true, r.k.size());
    out << "  ";
    cell(r.r2, width[4], true, r.r2.size());
    out << '\n';
  }
  if (!rows.empty()) {
    out << '\n';
    for (const auto& doc : profiles)
      out << "* " << doc.platform.name << ": provenance " << doc.provenance << ", fit space "
          << doc.fit_space << ", base cost in cycles at the smallest packet size\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Plot data

/// Points on (exponent k, base cost) axes, quadrant boundaries, shift
/// arrows between two platforms, per-operator cost-vs-size series and
/// printf/log bar pairs.
inline Json emit_opq_plot_data(std::span<const ProfileDocument> from,
                               std::span<const ProfileDocument> to = {}) {
  auto check = [](const ProfileDocument& d) {
    if (d.opq_points.empty() || d.opq_points.size() != d.curves.size())
      throw Error(ErrorCode::UnclassifiedPoints, "profile " + d.platform.name);
  };
  for (const auto& d : from) check(d);
  for (const auto& d : to) check(d);

  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["axes"] = {{"x", "exponent_k"}, {"y", "base_cost_cycles"}, {"y_log_scale", true}};

  Json thresholds = Json::array();
  Json points = Json::array();
  Json series = Json::array();
  Json bars = Json::array();
  auto add_profile = [&](const ProfileDocument& d) {
    thresholds.push_back({{"platform", d.platform.name},
                          {"threshold", d.opq_points.front().threshold_used}});
    for (const auto& p : d.opq_points)
      points.push_back({{"operator", p.op},
                        {"platform", p.platform},
                        {"x", p.exponent_k},
                        {"y", p.base_cost},
                        {"quadrant", p.quadrant}});
    for (const auto& c : d.curves) {
      Json sizes = Json::array(), costs = Json::array();
      auto samples = d.samples_of(c.op);
      std::sort(samples.begin(), samples.end(), [](const CostSample& l, const CostSample& r) {
        return l.packet_size < r.packet_size;
      });
      std::string source = "measured";
      if (samples.empty()) {
        source = "curve";
        for (PacketSize s : kDefaultSizes) samples.push_back({c.op, s, eval_curve(c, s)});
      }
      for (const auto& s : samples) {
        sizes.push_back(s.packet_size);
        costs.push_back(s.cost_cycles);
      }
      series.push_back({{"operator", c.op},
                        {"platform", d.platform.name},
                        {"source", source},
                        {"packet_size", sizes},
                        {"cost_cycles", costs}});
    }
    const OpqPoint* sys = nullptr;
    const OpqPoint* light = nullptr;
    for (const auto& p : d.opq_points) {
      const auto name = detail::lower(p.op);
      if (name == "printf") sys = &p;
      if (name == "rte_log" || name == "ringlog") light = &p;
    }
    if (sys && light && light->base_cost > 0.0)
      bars.push_back({{"platform", d.platform.name},
                      {"heavy", {{"operator", sys->op}, {"base_cost", sys->base_cost}}},
                      {"light", {{"operator", light->op}, {"base_cost", light->base_cost}}},
                      {"fold_change", fold_change(sys->base_cost, light->base_cost)}});
  };
  for (const auto& d : from) add_profile(d);
  for (const auto& d : to) add_profile(d);

  doc["boundaries"] = {{"k", 1.0}, {"thresholds", thresholds}};
  doc["points"] = points;

  Json arrows = Json::array();
  for (std::size_t i = 0; i < std::min(from.size(), to.size()); ++i) {
    for (const auto& s : compute_shift(from[i].opq_points, to[i].opq_points).shifts) {
      const OpqPoint *f = nullptr, *t = nullptr;
      for (const auto& p : from[i].opq_points)
        if (p.op == s.op) f = &p;
      for (const auto& p : to[i].opq_points)
        if (p.op == s.op) t = &p;
      arrows.push_back({{"operator", s.op},
                        {"from", {{"platform", s.from_platform}, {"x", f->exponent_k}, {"y", f->base_cost}}},
                        {"to", {{"platform", s.to_platform}, {"x", t->exponent_k}, {"y", t->base_cost}}},
                        {"shift", s}});
    }
  }
  doc["arrows"] = arrows;
  doc["scaling_series"] = series;
  doc["log_comparison"] = bars;
  return doc;
}

// ---------------------------------------------------------------------------
// Simulation config files

struct SimSpec {
  SimConfig config;
  std::vector<PacketSize> sizes{kDefaultSizes.begin(), kDefaultSizes.end()};
  int runs = 1;
  std::vector<InjectedOperator> operators;
};

namespace detail {

inline SizeFunction parse_power_law(const Json& j, const std::string& what) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("a"))
    throw Error(ErrorCode::InvalidConfig, what + " needs a number or {\"a\", \"k\"}");
  return power_law(j.at("a").get<double>(), j.value("k", 0.0));
}

}  // namespace detail

/// {
///   "platform": "sim", "cpu_hz": 1.8e9,
///   "base_cost": 400 | {"a": .., "k": ..},
///   "line_rate": null | {"link_gbps": 100} | {"pps": 1.5e8},
///   "noise_sigma": 0, "seed": 1, "runs": 1, "sizes": [64, 128, 256],
///   "operators": [{"name": "crc", "a": 2, "k": 1.37}]
/// }
inline SimSpec parse_sim_spec(std::string_view text) {
  SimSpec spec;
  try {
    const Json j = Json::parse(text);
    spec.config.platform = j.value("platform", std::string("sim"));
    spec.config.cpu_hz = j.at("cpu_hz").get<double>();
    spec.config.base_cost_fn = detail::parse_power_law(j.at("base_cost"), "base_cost");
    if (j.contains("line_rate") && !j.at("line_rate").is_null()) {
      const auto& lr = j.at("line_rate");
      if (lr.contains("link_gbps"))
        spec.config.line_rate_pps_fn = ethernet_line_rate(lr.at("link_gbps").get<double>() * 1e9);
      else if (lr.contains("pps"))
        spec.config.line_rate_pps_fn = constant(lr.at("pps").get<double>());
      else
        throw Error(ErrorCode::InvalidConfig, "line_rate needs link_gbps or pps");
    }
    spec.config.noise_sigma = j.value("noise_sigma", 0.0);
    spec.config.seed = j.value("seed", std::uint64_t{0});
    spec.runs = j.value("runs", 1);
    if (j.contains("sizes")) spec.sizes = j.at("sizes").get<std::vector<PacketSize>>();
    for (const auto& op : j.value("operators", Json::array())) {
      const auto name = op.at("name").get<std::string>();
      require_user_operator_name(name);
      spec.operators.push_back({name, detail::parse_power_law(op, "operator " + name)});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  spec.config.validate(spec.sizes);
  return spec;
}

}  // namespace opq
