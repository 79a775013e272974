#pragma once

// Text formats: event CSV files, intensity CSV files, and the JSON result
// document written by the segment command.
//
// Events file: header row, comma-separated, column `time` (original scale)
// and optional column `mark` (> 0). Other columns are ignored.
//
// Intensity file: header row with columns `end`, `rate` and optional
// `mark_rate`; one row per segment on the unit interval, segments contiguous
// from 0, the last `end` equal to 1.
//
// Result document ("ppseg-result/1", JSON): config echo, window, k_hat,
// change_points[{index, side, normalized, original}],
// segments[{start, end, start_original, end_original, count, length, rate,
// rate_original, mark_rate?}], contrast_path[{k, feasible, contrast}],
// cv_curve[{k, mean, std_error, replicates, selectable}], warnings.
// Non-finite numbers are written as the strings "inf" / "-inf".

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppseg/contrasts.hpp"
#include "ppseg/core_model.hpp"
#include "ppseg/model_selection.hpp"

namespace ppseg::io {

using Json = nlohmann::ordered_json;

// Shortest text that parses back to the same double (17 significant digits).
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " value '" +
                                std::string(text) + "'");
  }
  return value;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    if (!have_header) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        throw std::invalid_argument("CSV row has " + std::to_string(fields.size()) +
                                    " fields, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw std::invalid_argument("CSV input is empty");
  return table;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// Original-scale events as read from a file.
struct EventsTable {
  std::vector<double> times;
  std::optional<std::vector<double>> marks;
};

inline EventsTable read_events_csv(std::istream& in) {
  const auto table = detail::read_csv(in);
  const auto time_col = table.column("time");
  if (!time_col) throw std::invalid_argument("events file needs a 'time' column");
  const auto mark_col = table.column("mark");
  EventsTable out;
  if (mark_col) out.marks.emplace();
  for (const auto& row : table.rows) {
    out.times.push_back(parse_double(row[*time_col], "time"));
    if (mark_col) {
      const double x = parse_double(row[*mark_col], "mark");
      if (!(x > 0.0)) throw std::invalid_argument("marks must be positive");
      out.marks->push_back(x);
    }
  }
  return out;
}

inline EventsTable read_events_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_events_csv(in);
}

inline void write_events_csv(std::ostream& out, std::span<const double> times,
                             std::optional<std::span<const double>> marks = std::nullopt) {
  if (marks && marks->size() != times.size()) {
    throw std::invalid_argument("mark count differs from event count");
  }
  out << (marks ? "time,mark\n" : "time\n");
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i]);
    if (marks) out << ',' << format_double((*marks)[i]);
    out << '\n';
  }
}

// Window spanning the data, padded by `padding` times the data range on each
// side. Degenerate ranges (a single distinct time) are padded by 0.5.
inline Window default_window(std::span<const double> times, double padding = 0.01) {
  if (times.empty()) throw std::invalid_argument("cannot infer a window from no events");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double range = *hi - *lo;
  const double pad = range > 0.0 ? padding * range : 0.5;
  return {*lo - pad, *hi + pad};
}

inline PiecewiseIntensity read_intensity_csv(std::istream& in) {
  const auto table = detail::read_csv(in);
  const auto end_col = table.column("end");
  const auto rate_col = table.column("rate");
  if (!end_col || !rate_col) throw std::invalid_argument("intensity file needs 'end' and 'rate'");
  const auto mark_col = table.column("mark_rate");
  std::vector<double> bounds{0.0}, rates, mark_rates;
  for (const auto& row : table.rows) {
    bounds.push_back(parse_double(row[*end_col], "end"));
    rates.push_back(parse_double(row[*rate_col], "rate"));
    if (mark_col) mark_rates.push_back(parse_double(row[*mark_col], "mark_rate"));
  }
  if (mark_col) return {std::move(bounds), std::move(rates), std::move(mark_rates)};
  return {std::move(bounds), std::move(rates)};
}

inline PiecewiseIntensity read_intensity_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_intensity_csv(in);
}

inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw std::invalid_argument("expected a number in result document");
}

inline ContrastKind parse_contrast(std::string_view name) {
  if (name == "pg" || name == "poisson_gamma") return ContrastKind::poisson_gamma;
  if (name == "poisson") return ContrastKind::poisson;
  if (name == "mp" || name == "marked_poisson") return ContrastKind::marked_poisson;
  if (name == "mpgeg" || name == "marked_pgeg") return ContrastKind::marked_pgeg;
  throw std::invalid_argument("unknown contrast '" + std::string(name) + "'");
}

// Settings echoed into the result document.
struct RunConfig {
  std::string mode;  // "cv" or "fixed"
  std::size_t k_max = 12;
  std::optional<std::size_t> k;
  double f = 0.8;
  std::size_t replicates = 500;
  std::uint64_t seed = 0;
  bool default_hyperparameters = true;
  double window_padding = 0.01;
};

inline Json result_document(const FitResult& fit, const Window& window, const RunConfig& cfg) {
  const double scale = 1.0 / window.width();
  Json doc;
  doc["format"] = "ppseg-result/1";
  Json config;
  config["mode"] = cfg.mode;
  config["contrast"] = to_string(fit.spec.kind);
  config["a"] = fit.spec.a;
  config["b"] = fit.spec.b;
  if (is_marked(fit.spec.kind)) {
    config["a_rho"] = fit.spec.a_rho;
    config["b_rho"] = fit.spec.b_rho;
  }
  config["default_hyperparameters"] = cfg.default_hyperparameters;
  config["forbid_zero_length"] = fit.spec.forbids_zero_length();
  if (cfg.k) config["k"] = *cfg.k;
  config["k_max"] = cfg.k_max;
  if (cfg.mode == "cv") {
    config["f"] = cfg.f;
    config["replicates"] = cfg.replicates;
    config["seed"] = cfg.seed;
  }
  config["window_padding"] = cfg.window_padding;
  doc["config"] = std::move(config);
  doc["window"] = {{"t_min", window.t_min}, {"t_max", window.t_max}};
  doc["k_hat"] = fit.k_hat;

  Json cps = Json::array();
  for (const auto& gp : fit.change_points) {
    cps.push_back({{"index", gp.index},
                   {"side", to_string(gp.side)},
                   {"normalized", gp.value},
                   {"original", window.denormalize(gp.value)}});
  }
  doc["change_points"] = std::move(cps);

  Json segs = Json::array();
  const auto& s = fit.segments;
  for (std::size_t k = 0; k < s.lambda.size(); ++k) {
    Json seg{{"start", s.boundaries[k]},
             {"end", s.boundaries[k + 1]},
             {"start_original", window.denormalize(s.boundaries[k])},
             {"end_original", window.denormalize(s.boundaries[k + 1])},
             {"count", s.counts[k]},
             {"length", s.lengths[k]},
             {"rate", number(s.lambda[k])},
             {"rate_original", number(s.lambda[k] * scale)}};
    if (s.rho) seg["mark_rate"] = number((*s.rho)[k]);
    segs.push_back(std::move(seg));
  }
  doc["segments"] = std::move(segs);
  doc["contrast"] = number(fit.contrast);

  Json path = Json::array();
  for (const auto& e : fit.path) {
    path.push_back({{"k", e.k}, {"feasible", e.feasible},
                    {"contrast", e.feasible ? number(e.contrast) : Json(nullptr)}});
  }
  doc["contrast_path"] = std::move(path);

  Json curve = Json::array();
  if (fit.curve) {
    for (const auto& p : fit.curve->points) {
      curve.push_back({{"k", p.k},
                       {"mean", p.replicates_used ? number(p.mean) : Json(nullptr)},
                       {"std_error", number(p.std_error)},
                       {"replicates", p.replicates_used},
                       {"selectable", p.selectable}});
    }
  }
  doc["cv_curve"] = std::move(curve);
  doc["warnings"] = fit.warnings;
  return doc;
}

// The parts of a result document needed for evaluation.
struct EstimateSummary {
  Window window;
  std::size_t k_hat = 1;
  std::vector<double> change_points;  // normalized
  PiecewiseIntensity intensity = PiecewiseIntensity::constant(0.0);
};

inline EstimateSummary read_result_document(const Json& doc) {
  if (doc.value("format", std::string{}) != "ppseg-result/1") {
    throw std::invalid_argument("not a ppseg result document");
  }
  EstimateSummary out;
  out.window = {to_double(doc.at("window").at("t_min")), to_double(doc.at("window").at("t_max"))};
  out.k_hat = doc.at("k_hat").get<std::size_t>();
  for (const auto& cp : doc.at("change_points")) out.change_points.push_back(to_double(cp.at("normalized")));
  std::vector<double> bounds{0.0}, rates;
  for (const auto& seg : doc.at("segments")) {
    if (to_double(seg.at("length")) <= 0.0) continue;
    bounds.push_back(to_double(seg.at("end")));
    rates.push_back(to_double(seg.at("rate")));
  }
  out.intensity = PiecewiseIntensity(std::move(bounds), std::move(rates));
  return out;
}

inline EstimateSummary read_result_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_result_document(Json::parse(in));
}

}  // namespace ppseg::io
