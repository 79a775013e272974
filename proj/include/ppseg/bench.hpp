#pragma once

// Simulation benchmark: repeated simulate -> cross-validated fit -> score on
// the six-segment design, with the parameter grids of the published study.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppseg/contrasts.hpp"
#include "ppseg/evaluation.hpp"
#include "ppseg/model_selection.hpp"
#include "ppseg/numeric.hpp"
#include "ppseg/parallel.hpp"
#include "ppseg/random.hpp"
#include "ppseg/simulation.hpp"

namespace ppseg::bench {

// Which change-point set counts as the truth for the Hausdorff distance.
// `effective` collapses to {0, 1} when the design has no change at all;
// `design` always uses the six-segment boundaries.
enum class TruthConvention { effective, design };

struct Scenario {
  std::string name;
  BenchmarkDesign design;
  double a = 1.0;
  double f = 0.8;
  TruthConvention truth = TruthConvention::effective;
};

struct Settings {
  std::size_t replicates = 20;   // simulated processes per scenario
  std::size_t cv_samples = 100;  // thinning replicates per fit
  std::size_t k_max = 12;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct Outcome {
  std::size_t k_hat = 1;
  std::size_t events = 0;
  double hausdorff = 0.0;
  double l2 = 0.0;
};

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

inline Moments moments(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  m.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq;
    for (double v : values) sq.push_back((v - m.mean) * (v - m.mean));
    m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return m;
}

struct Row {
  Scenario scenario;
  std::vector<Outcome> outcomes;
  Moments k_hat, hausdorff, l2;
};

inline ChangePointSet truth_set(const Scenario& s) {
  if (s.truth == TruthConvention::effective && s.design.constant()) {
    return ChangePointSet({0.0, 1.0});
  }
  return ChangePointSet({BenchmarkDesign::kBoundaries.begin(), BenchmarkDesign::kBoundaries.end()});
}

// One simulated process of scenario `stream`, replicate `b`.
inline Outcome run_replicate(const Scenario& s, const Settings& settings, std::uint64_t stream,
                             std::uint64_t b) {
  Rng rng = make_rng(settings.seed, {stream, b, 0});
  const PiecewiseIntensity truth = s.design.intensity();

  CvConfig cfg;
  cfg.f = s.f;
  cfg.replicates = settings.cv_samples;
  cfg.k_max = settings.k_max;
  cfg.seed = derive_seed(settings.seed, {stream, b, 1});
  cfg.threads = 1;

  ContrastSpec spec;
  spec.kind = s.design.marked() ? ContrastKind::marked_pgeg : ContrastKind::poisson_gamma;
  spec.a = s.a;

  Outcome out;
  FitResult fitted;
  bool have_fit = false;
  if (s.design.marked()) {
    const auto data = simulate_marked(truth, rng);
    out.events = data.size();
    if (!data.empty()) {
      fitted = fit(data, spec, cfg);
      have_fit = true;
    }
  } else {
    const auto data = simulate_pp(truth, rng);
    out.events = data.size();
    if (!data.empty()) {
      fitted = fit(data, spec, cfg);
      have_fit = true;
    }
  }
  const auto estimate_points =
      have_fit ? ChangePointSet::from_interior(fitted.change_values()) : ChangePointSet({0.0, 1.0});
  const auto estimate_intensity =
      have_fit ? fitted.intensity() : PiecewiseIntensity::constant(0.0);
  out.k_hat = have_fit ? fitted.k_hat : 1;
  out.hausdorff = hausdorff(truth_set(s), estimate_points).d;
  out.l2 = l2_cumulative(truth, estimate_intensity, s.design.mean_intensity);
  return out;
}

// Runs every (scenario, replicate) pair; results do not depend on the
// thread count. Scenario i uses stream `first_stream + i`.
inline std::vector<Row> run(const std::vector<Scenario>& scenarios, const Settings& settings,
                            std::uint64_t first_stream = 0) {
  const std::size_t b_count = settings.replicates;
  std::vector<Outcome> flat(scenarios.size() * b_count);
  parallel_for(flat.size(), settings.threads, [&](std::size_t i) {
    const std::size_t s = i / b_count;
    const std::size_t b = i % b_count;
    flat[i] = run_replicate(scenarios[s], settings, first_stream + s, b);
  });
  std::vector<Row> rows;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    Row row;
    row.scenario = scenarios[s];
    std::vector<double> ks, ds, ls;
    for (std::size_t b = 0; b < b_count; ++b) {
      const Outcome& o = flat[s * b_count + b];
      row.outcomes.push_back(o);
      ks.push_back(static_cast<double>(o.k_hat));
      ds.push_back(o.hausdorff);
      ls.push_back(o.l2);
    }
    row.k_hat = moments(ks);
    row.hausdorff = moments(ds);
    row.l2 = moments(ls);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline const std::vector<double>& mean_intensity_grid() {
  static const std::vector<double> grid{32, 56, 100, 178, 316, 562, 1000};
  return grid;
}

inline const std::vector<double>& ratio_grid() {
  static const std::vector<double> grid{1, 2, 3, 4, 6, 8, 11, 16};
  return grid;
}

inline std::string scenario_name(const char* fmt, double x, double y = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, x, y);
  return buf;
}

inline std::vector<Scenario> preset(std::string_view name) {
  std::vector<Scenario> out;
  if (name == "k-selection" || name == "hausdorff-l2") {
    for (double lambda_bar : mean_intensity_grid()) {
      for (double ratio : ratio_grid()) {
        Scenario s;
        s.name = scenario_name("mean=%g ratio=%g", lambda_bar, ratio);
        s.design.mean_intensity = lambda_bar;
        s.design.ratio = ratio;
        out.push_back(s);
      }
    }
  } else if (name == "marked-table") {
    const struct {
      const char* label;
      double ratio;
      double rho_even;
    } rows[] = {{"lambda:none rho:none", 1.0, 0.1},
                {"lambda:none rho:signal", 1.0, 0.005},
                {"lambda:signal rho:none", 8.0, 0.1},
                {"lambda:signal rho:signal", 8.0, 0.005}};
    for (const auto& r : rows) {
      Scenario s;
      s.name = r.label;
      s.design.mean_intensity = 100.0;
      s.design.ratio = r.ratio;
      s.design.rho_odd = 0.1;
      s.design.rho_even = r.rho_even;
      s.truth = TruthConvention::design;
      out.push_back(s);
    }
  } else if (name == "robust-a") {
    for (double a : {0.1, 0.5, 1.0, 2.0, 10.0}) {
      Scenario s;
      s.name = scenario_name("a=%g", a);
      s.design.mean_intensity = 100.0;
      s.design.ratio = 8.0;
      s.a = a;
      out.push_back(s);
    }
  } else if (name == "robust-f") {
    for (double f : {1.0 / 2.0, 2.0 / 3.0, 4.0 / 5.0, 9.0 / 10.0}) {
      Scenario s;
      s.name = scenario_name("f=%.4g", f);
      s.design.mean_intensity = 100.0;
      s.design.ratio = 8.0;
      s.f = f;
      out.push_back(s);
    }
  } else {
    throw std::invalid_argument("unknown bench preset '" + std::string(name) + "'");
  }
  return out;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"k-selection", "hausdorff-l2", "marked-table",
                                              "robust-a", "robust-f"};
  return names;
}

inline void write_csv(std::ostream& out, std::string_view preset_name, const std::vector<Row>& rows,
                      const Settings& settings) {
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::string(buf);
  };
  out << "preset,scenario,mean_intensity,ratio,rho_odd,rho_even,a,f,replicates,cv_samples,"
         "mean_k,se_k,mean_d,se_d,mean_l2,se_l2\n";
  for (const auto& row : rows) {
    const auto& d = row.scenario.design;
    out << preset_name << ',' << row.scenario.name << ',' << num(d.mean_intensity) << ','
        << num(d.ratio) << ',' << (d.rho_odd ? num(*d.rho_odd) : "") << ','
        << (d.rho_even ? num(*d.rho_even) : "") << ',' << num(row.scenario.a) << ','
        << num(row.scenario.f) << ',' << settings.replicates << ',' << settings.cv_samples << ','
        << num(row.k_hat.mean) << ',' << num(row.k_hat.std_error) << ','
        << num(row.hausdorff.mean) << ',' << num(row.hausdorff.std_error) << ','
        << num(row.l2.mean) << ',' << num(row.l2.std_error) << '\n';
  }
}

}  // namespace ppseg::bench
