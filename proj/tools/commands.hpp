#pragma once

// Subcommand implementations behind the ppseg executable. Each command takes
// a plain options struct plus output streams so it can be driven from tests.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppseg/ppseg.hpp"

namespace ppseg::cli {

// --seed, else CPT_SEED, else 0.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CPT_SEED"); env != nullptr && *env != '\0') {
    std::size_t used = 0;
    const std::string text(env);
    unsigned long long value = 0;
    try {
      value = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.front() == '-') {
      throw std::invalid_argument("CPT_SEED must be a non-negative integer, got '" + text + "'");
    }
    return value;
  }
  return 0;
}

// Writes `text` to `path`, or to `fallback` when the path is empty or "-".
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::optional<double> mean_intensity;
  std::optional<double> ratio;
  bool marked = false;
  std::optional<double> rho_odd;
  std::optional<double> rho_even;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> intensity_file;
};

inline void run_simulate(const SimulateOptions& o, std::ostream& data_out, std::ostream& log) {
  const std::uint64_t seed = resolve_seed(o.seed);
  Rng rng = make_rng(seed);
  if ((o.rho_odd || o.rho_even) && !o.marked) {
    throw std::invalid_argument("--rho-odd/--rho-even need --marked");
  }
  std::ostringstream text;
  if (o.intensity_file) {
    if (o.mean_intensity || o.ratio || o.rho_odd || o.rho_even) {
      throw std::invalid_argument("--intensity-file excludes the design flags");
    }
    const PiecewiseIntensity intensity = io::read_intensity_file(*o.intensity_file);
    if (o.marked) {
      if (!intensity.mark_rates()) {
        throw std::invalid_argument("--marked needs a 'mark_rate' column in the intensity file");
      }
      const auto data = simulate_marked(intensity, rng);
      io::write_events_csv(text, data.times(), data.marks());
      log << "events: " << data.size() << '\n';
    } else {
      const auto data = simulate_pp(intensity, rng);
      io::write_events_csv(text, data.times());
      log << "events: " << data.size() << '\n';
    }
    emit(o.out, text.str(), data_out);
    return;
  }

  BenchmarkDesign design;
  design.mean_intensity = o.mean_intensity.value_or(100.0);
  design.ratio = o.ratio.value_or(1.0);
  if (o.marked) {
    if (!o.rho_odd) throw std::invalid_argument("--marked needs --rho-odd");
    design.rho_odd = *o.rho_odd;
    design.rho_even = o.rho_even.value_or(*o.rho_odd);
    if (!(*design.rho_odd > 0.0) || !(*design.rho_even > 0.0)) {
      throw std::invalid_argument("mark rates must be positive");
    }
  }
  const auto [low, high] = design.rates();
  const PiecewiseIntensity intensity = design.intensity();
  std::size_t count = 0;
  if (design.marked()) {
    const auto data = simulate_marked(intensity, rng);
    io::write_events_csv(text, data.times(), data.marks());
    count = data.size();
  } else {
    const auto data = simulate_pp(intensity, rng);
    io::write_events_csv(text, data.times());
    count = data.size();
  }
  emit(o.out, text.str(), data_out);
  log << "events: " << count << '\n'
      << "rates: " << io::format_double(low) << ' ' << io::format_double(high) << '\n';
}

// ---------------------------------------------------------------- segment

struct SegmentOptions {
  std::string input;
  std::optional<std::pair<double, double>> window;
  double window_padding = 0.01;
  std::string contrast = "pg";
  std::optional<std::size_t> k;
  std::optional<std::size_t> k_max;
  double a = 1.0;
  std::optional<double> b;
  double a_rho = 2.01;
  std::optional<double> b_rho;
  double f = 0.8;
  std::size_t replicates = 500;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
};

struct LoadedData {
  Window window;
  std::optional<EventSeries> plain;
  std::optional<MarkedEventSeries> marked;
};

inline LoadedData load_events(const std::string& path,
                              const std::optional<std::pair<double, double>>& window,
                              double padding, bool need_marks) {
  const io::EventsTable table = io::read_events_file(path);
  if (table.times.empty()) throw std::invalid_argument("input '" + path + "' holds no events");
  if (need_marks && !table.marks) {
    throw std::invalid_argument("marked contrast needs a 'mark' column in '" + path + "'");
  }
  LoadedData out;
  out.window = window ? Window{window->first, window->second}
                      : io::default_window(table.times, padding);
  out.window.validate();
  if (need_marks) {
    out.marked = MarkedEventSeries::from_original(table.times, *table.marks, out.window);
  } else {
    out.plain = EventSeries::from_original(table.times, out.window);
  }
  return out;
}

inline ContrastSpec segment_spec(const SegmentOptions& o, bool& default_rule) {
  ContrastSpec spec;
  spec.kind = io::parse_contrast(o.contrast);
  spec.a = o.a;
  spec.a_rho = o.a_rho;
  const bool marked = is_marked(spec.kind);
  if (!marked && o.b_rho) throw std::invalid_argument("--b-rho applies to marked contrasts only");
  default_rule = !o.b && !o.b_rho;
  if (!default_rule) {
    if (!o.b) throw std::invalid_argument("--b-rho needs --b as well");
    if (spec.kind == ContrastKind::marked_pgeg && !o.b_rho) {
      throw std::invalid_argument("--b with the mpgeg contrast needs --b-rho as well");
    }
    spec.b = *o.b;
    if (o.b_rho) spec.b_rho = *o.b_rho;
  }
  spec.validate();
  return spec;
}

inline std::string segment_document(const SegmentOptions& o) {
  if (o.k && o.k_max) throw std::invalid_argument("--k and --kmax are mutually exclusive");
  bool default_rule = true;
  const ContrastSpec spec = segment_spec(o, default_rule);
  const LoadedData data =
      load_events(o.input, o.window, o.window_padding, is_marked(spec.kind));

  io::RunConfig run;
  run.default_hyperparameters = default_rule;
  run.window_padding = o.window ? 0.0 : o.window_padding;
  FitResult result;
  if (o.k) {
    run.mode = "fixed";
    run.k = *o.k;
    run.k_max = *o.k;
    result = data.marked ? fit_fixed_k(*data.marked, spec, *o.k, default_rule)
                         : fit_fixed_k(*data.plain, spec, *o.k, default_rule);
  } else {
    if (!is_bayesian(spec.kind)) {
      throw std::invalid_argument("selecting K by cross-validation needs the pg or mpgeg "
                                  "contrast; use --k with " + o.contrast);
    }
    CvConfig cfg;
    cfg.f = o.f;
    cfg.replicates = o.replicates;
    cfg.k_max = o.k_max.value_or(12);
    cfg.seed = resolve_seed(o.seed);
    cfg.refresh_hyperparameters = default_rule;
    cfg.threads = o.threads;
    run.mode = "cv";
    run.k_max = cfg.k_max;
    run.f = cfg.f;
    run.replicates = cfg.replicates;
    run.seed = cfg.seed;
    result = data.marked ? fit(*data.marked, spec, cfg) : fit(*data.plain, spec, cfg);
  }
  return io::result_document(result, data.window, run).dump(2) + "\n";
}

inline void run_segment(const SegmentOptions& o, std::ostream& doc_out, std::ostream& log) {
  const std::string doc = segment_document(o);
  emit(o.out, doc, doc_out);
  const auto parsed = io::Json::parse(doc);
  log << "k_hat: " << parsed.at("k_hat").get<std::size_t>() << '\n';
  for (const auto& w : parsed.at("warnings")) log << "warning: " << w.get<std::string>() << '\n';
}

// ---------------------------------------------------------------- cv-curve

inline std::string cv_curve_table(const SegmentOptions& o) {
  if (o.k) throw std::invalid_argument("cv-curve does not take --k");
  bool default_rule = true;
  const ContrastSpec spec = segment_spec(o, default_rule);
  if (!is_bayesian(spec.kind)) {
    throw std::invalid_argument("cross-validation needs the pg or mpgeg contrast");
  }
  const LoadedData data =
      load_events(o.input, o.window, o.window_padding, is_marked(spec.kind));
  CvConfig cfg;
  cfg.f = o.f;
  cfg.replicates = o.replicates;
  cfg.k_max = o.k_max.value_or(12);
  cfg.seed = resolve_seed(o.seed);
  cfg.refresh_hyperparameters = default_rule;
  cfg.threads = o.threads;
  const CvCurve curve =
      data.marked ? cross_validate(*data.marked, spec, cfg) : cross_validate(*data.plain, spec, cfg);
  std::ostringstream out;
  out << "k,mean_test_contrast,std_error,replicates,selectable,selected\n";
  for (const auto& p : curve.points) {
    out << p.k << ',' << (p.replicates_used ? io::format_double(p.mean) : std::string("nan"))
        << ',' << io::format_double(p.std_error) << ',' << p.replicates_used << ','
        << (p.selectable ? 1 : 0) << ',' << (p.k == curve.selected_k ? 1 : 0) << '\n';
  }
  return out.str();
}

inline void run_cv_curve(const SegmentOptions& o, std::ostream& table_out, std::ostream& log) {
  const std::string table = cv_curve_table(o);
  emit(o.out, table, table_out);
  log << "table rows: " << o.k_max.value_or(12) << '\n';
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string truth;
  std::string estimate;
  std::optional<std::pair<double, double>> truth_window;
  std::string out;
};

struct Truth {
  PiecewiseIntensity intensity = PiecewiseIntensity::constant(1.0);
  ChangePointSet points{{0.0, 1.0}};
  double normalization = 1.0;
};

// "design:MEAN:RATIO[:RHO_ODD:RHO_EVEN]" or an intensity CSV file.
inline Truth parse_truth(const std::string& spec) {
  Truth truth;
  if (spec.rfind("design:", 0) == 0) {
    std::vector<double> fields;
    std::string rest = spec.substr(7);
    std::size_t start = 0;
    while (true) {
      const auto colon = rest.find(':', start);
      fields.push_back(io::parse_double(rest.substr(start, colon - start), "design"));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (fields.size() != 2 && fields.size() != 4) {
      throw std::invalid_argument("design truth is design:MEAN:RATIO[:RHO_ODD:RHO_EVEN]");
    }
    BenchmarkDesign design;
    design.mean_intensity = fields[0];
    design.ratio = fields[1];
    if (fields.size() == 4) {
      design.rho_odd = fields[2];
      design.rho_even = fields[3];
    }
    truth.intensity = design.intensity();
    truth.points = design.constant()
                       ? ChangePointSet({0.0, 1.0})
                       : ChangePointSet({BenchmarkDesign::kBoundaries.begin(),
                                         BenchmarkDesign::kBoundaries.end()});
    truth.normalization = design.mean_intensity;
    return truth;
  }
  truth.intensity = io::read_intensity_file(spec);
  const auto bp = truth.intensity.breakpoints();
  // Adjacent segments with equal rates are one segment of the truth.
  std::vector<double> points{0.0};
  const auto values = truth.intensity.values();
  const auto& rho = truth.intensity.mark_rates();
  for (std::size_t k = 1; k < values.size(); ++k) {
    const bool same = values[k] == values[k - 1] && (!rho || (*rho)[k] == (*rho)[k - 1]);
    if (!same) points.push_back(bp[k]);
  }
  points.push_back(1.0);
  truth.points = ChangePointSet(std::move(points));
  truth.normalization = truth.intensity.total();
  if (!(truth.normalization > 0.0)) {
    throw std::invalid_argument("truth intensity integrates to zero; l2 is undefined");
  }
  return truth;
}

inline std::string evaluate_document(const EvaluateOptions& o) {
  const Truth truth = parse_truth(o.truth);
  const io::EstimateSummary est = io::read_result_file(o.estimate);
  const Window truth_window = o.truth_window ? Window{o.truth_window->first, o.truth_window->second}
                                             : Window{0.0, 1.0};
  if (!(est.window == truth_window)) {
    throw std::invalid_argument(
        "estimate window [" + io::format_double(est.window.t_min) + ", " +
        io::format_double(est.window.t_max) + "] differs from truth window [" +
        io::format_double(truth_window.t_min) + ", " + io::format_double(truth_window.t_max) +
        "]; segment with a matching --window");
  }
  const auto d = hausdorff(truth.points, ChangePointSet::from_interior(est.change_points));
  const double l2 = l2_cumulative(truth.intensity, est.intensity, truth.normalization);
  io::Json doc;
  doc["d1"] = d.d1;
  doc["d2"] = d.d2;
  doc["d"] = d.d;
  doc["l2"] = io::number(l2);
  doc["k_hat"] = est.k_hat;
  doc["k_true"] = truth.points.points().size() - 1;
  return doc.dump(2) + "\n";
}

inline void run_evaluate(const EvaluateOptions& o, std::ostream& doc_out) {
  emit(o.out, evaluate_document(o), doc_out);
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string preset;
  std::size_t replicates = 20;
  std::size_t cv_samples = 100;
  std::size_t k_max = 12;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t threads = 1;
};

inline std::string bench_csv(const BenchOptions& o) {
  const auto scenarios = bench::preset(o.preset);
  bench::Settings settings;
  settings.replicates = o.replicates;
  settings.cv_samples = o.cv_samples;
  settings.k_max = o.k_max;
  settings.seed = resolve_seed(o.seed);
  settings.threads = o.threads;
  if (settings.replicates < 1 || settings.cv_samples < 1) {
    throw std::invalid_argument("--replicates and --cv-samples must be positive");
  }
  const auto rows = bench::run(scenarios, settings);
  std::ostringstream out;
  bench::write_csv(out, o.preset, rows, settings);
  return out.str();
}

inline void run_bench(const BenchOptions& o, std::ostream& log) {
  const std::string csv = bench_csv(o);
  std::filesystem::create_directories(o.out_dir);
  const auto path = (std::filesystem::path(o.out_dir) / (o.preset + ".csv")).string();
  emit(path, csv, log);
  log << "wrote " << path << '\n';
}

}  // namespace ppseg::cli
