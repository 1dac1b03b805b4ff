#pragma once

// Verification reports: JSON (full) and CSV series with header "name,param,value".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "uclab/config.hpp"
#include "uclab/error.hpp"
#include "uclab/verifier.hpp"

namespace uclab {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (param, value)
};

struct VerificationReport {
  std::string command;
  Json config = Json::object();
  std::vector<CheckRecord> records;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<Series> series;
  std::string timestamp;

  /// fail iff any record fails; inconclusive records do not fail a run.
  Status overall() const {
    for (const auto& r : records)
      if (r.status == Status::fail) return Status::fail;
    return Status::pass;
  }

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  void add(const std::vector<CheckRecord>& rs) { records.insert(records.end(), rs.begin(), rs.end()); }

  /// Deterministic order for merged parallel results.
  void sort() {
    std::stable_sort(records.begin(), records.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    std::stable_sort(series.begin(), series.end(), [](const Series& a, const Series& b) { return a.name < b.name; });
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline Json environment_stamp() {
  Json e;
#if defined(__clang__)
  e["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  e["compiler"] = "gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__) + "." +
                  std::to_string(__GNUC_PATCHLEVEL__);
#else
  e["compiler"] = "unknown";
#endif
  e["cplusplus"] = static_cast<long>(__cplusplus);
#ifdef NDEBUG
  e["build"] = "release";
#else
  e["build"] = "debug";
#endif
  e["library_version"] = "1.0.0";
  return e;
}

/// Non-finite numbers are written as strings so the document stays valid JSON.
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline Json to_json(const CheckRecord& r) {
  Json j;
  j["name"] = r.name;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["margin"] = number(r.margin);
  j["residual"] = number(r.residual);
  j["tolerance"] = number(r.tolerance);
  j["order"] = number(r.order);
  j["status"] = to_string(r.status);
  j["detail"] = r.detail;
  Json v = Json::object();
  for (const auto& [k, x] : r.values) v[k] = number(x);
  j["values"] = v;
  return j;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Report body without timestamp or hash.
inline Json report_body(const VerificationReport& rep) {
  Json j;
  j["command"] = rep.command;
  j["config"] = rep.config;
  j["environment"] = environment_stamp();
  Json recs = Json::array();
  for (const auto& r : rep.records) recs.push_back(to_json(r));
  j["records"] = recs;
  Json cons = Json::object();
  for (const auto& [k, x] : rep.constants) cons[k] = number(x);
  j["constants"] = cons;
  Json ser = Json::object();
  for (const auto& s : rep.series) {
    Json pts = Json::array();
    for (const auto& [p, v] : s.points) pts.push_back({number(p), number(v)});
    ser[s.name] = pts;
  }
  j["series"] = ser;
  j["overall"] = to_string(rep.overall());
  return j;
}

inline std::string stability_hash(const VerificationReport& rep) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(report_body(rep).dump());
  return os.str();
}

inline Json to_json(const VerificationReport& rep) {
  Json j = report_body(rep);
  j["timestamp"] = rep.timestamp;
  j["stability_hash"] = stability_hash(rep);
  return j;
}

inline std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string series_csv(const Series& s) {
  std::ostringstream os;
  os << "name,param,value\n";
  for (const auto& [p, v] : s.points) os << csv_text(s.name) << "," << csv_number(p) << "," << csv_number(v) << "\n";
  return os.str();
}

/// One row per record field: name = record name, param = field, value = number.
inline std::string records_csv(const VerificationReport& rep) {
  std::ostringstream os;
  os << "name,param,value\n";
  for (const auto& r : rep.records) {
    const std::pair<const char*, double> rows[] = {{"lhs", r.lhs},           {"rhs", r.rhs},
                                                   {"margin", r.margin},     {"residual", r.residual},
                                                   {"tolerance", r.tolerance}, {"order", r.order}};
    for (const auto& [k, x] : rows) os << csv_text(r.name) << "," << k << "," << csv_number(x) << "\n";
    os << csv_text(r.name) << ",pass," << (r.status == Status::pass ? 1 : 0) << "\n";
    for (const auto& [k, x] : r.values) os << csv_text(r.name) << "," << csv_text(k) << "," << csv_number(x) << "\n";
  }
  return os.str();
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + p.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + p.string());
}

inline std::string file_stem(const std::string& name) {
  std::string s = name;
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  return s;
}

}  // namespace detail

/// Writes report.json, plus records.csv and one CSV per series for the csv-bundle format.
/// Returns the written paths.
inline std::vector<std::string> emit(const VerificationReport& rep, const std::string& dir, const std::string& format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  std::vector<std::string> out;
  const fs::path json_path = fs::path(dir) / "report.json";
  detail::write_file(json_path, to_json(rep).dump(2) + "\n");
  out.push_back(json_path.string());
  if (format == "csv-bundle") {
    const fs::path rp = fs::path(dir) / "records.csv";
    detail::write_file(rp, records_csv(rep));
    out.push_back(rp.string());
    for (const auto& s : rep.series) {
      const fs::path sp = fs::path(dir) / (detail::file_stem(s.name) + ".csv");
      detail::write_file(sp, series_csv(s));
      out.push_back(sp.string());
    }
  } else if (format != "json") {
    throw Error(ErrorCode::config_error, "format: unknown '" + format + "'");
  }
  return out;
}

}  // namespace uclab
