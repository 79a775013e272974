#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

// CLI11 fills plain values; these carry "was it given" into the option structs.
template <class T>
std::optional<T> given(const CLI::Option* opt, const T& value) {
  return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

std::optional<std::pair<double, double>> window_of(const CLI::Option* opt,
                                                   const std::vector<double>& values) {
  if (opt->count() == 0) return std::nullopt;
  return std::make_pair(values.at(0), values.at(1));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ppseg::cli;
  CLI::App app{"Change-point detection for Poisson and marked Poisson event data"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate the six-segment benchmark design");
  SimulateOptions so;
  double mean = 100.0, ratio = 1.0, rho_odd = 0.1, rho_even = 0.1;
  std::uint64_t seed = 0;
  std::string intensity_file;
  auto* o_mean = sim->add_option("--mean-intensity", mean, "Mean intensity (default 100)");
  auto* o_ratio = sim->add_option("--ratio", ratio, "High/low intensity ratio (default 1)");
  sim->add_flag("--marked", so.marked, "Draw exponential marks");
  auto* o_rho_odd = sim->add_option("--rho-odd", rho_odd, "Mark rate on odd segments");
  auto* o_rho_even = sim->add_option("--rho-even", rho_even, "Mark rate on even segments");
  auto* o_sim_seed = sim->add_option("--seed", seed, "Seed (falls back to CPT_SEED)");
  sim->add_option("--out", so.out, "Output CSV (default stdout)");
  auto* o_ifile = sim->add_option("--intensity-file", intensity_file,
                                  "Custom design: CSV with end, rate[, mark_rate]");

  // segment and cv-curve share their options
  SegmentOptions seg;
  std::vector<double> window;
  std::size_t k = 1, k_max = 12;
  double b = 1.0, b_rho = 1.0;
  std::uint64_t seg_seed = 0;
  struct SegmentFlags {
    CLI::Option *window, *k, *k_max, *b, *b_rho, *seed;
  };
  auto add_segment_options = [&](CLI::App* cmd, bool with_k) {
    SegmentFlags flags{};
    cmd->add_option("--input", seg.input, "Events CSV with a time column")->required();
    flags.window = cmd->add_option("--window", window, "Observation window T0 T1")->expected(2);
    cmd->add_option("--window-padding", seg.window_padding,
                    "Padding of the inferred window as a fraction of the data range");
    cmd->add_option("--contrast", seg.contrast, "pg | poisson | mp | mpgeg (default pg)");
    flags.k = with_k ? cmd->add_option("--k", k, "Fixed number of segments") : nullptr;
    flags.k_max = cmd->add_option("--kmax", k_max, "Largest K for cross-validation (default 12)");
    cmd->add_option("--a", seg.a, "Intensity prior shape (default 1)");
    flags.b = cmd->add_option("--b", b, "Intensity prior rate (default a/n)");
    cmd->add_option("--a-rho", seg.a_rho, "Mark-rate prior shape (default 2.01)");
    flags.b_rho = cmd->add_option("--b-rho", b_rho, "Mark-rate prior rate (default from mean mark)");
    cmd->add_option("--f", seg.f, "Learning fraction (default 0.8)");
    cmd->add_option("--replicates", seg.replicates, "Cross-validation replicates (default 500)");
    flags.seed = cmd->add_option("--seed", seg_seed, "Seed (falls back to CPT_SEED)");
    cmd->add_option("--out", seg.out, "Output file (default stdout)");
    cmd->add_option("--threads", seg.threads, "Worker threads, 0 = all cores (default 1)");
    return flags;
  };
  auto* segment = app.add_subcommand("segment", "Segment an event series");
  const SegmentFlags seg_flags = add_segment_options(segment, true);
  auto* cvc = app.add_subcommand("cv-curve", "Mean test contrast for every K");
  const SegmentFlags cv_flags = add_segment_options(cvc, false);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score an estimate against a truth");
  EvaluateOptions eo;
  std::vector<double> truth_window;
  eval->add_option("--truth", eo.truth, "design:MEAN:RATIO[:RHO_ODD:RHO_EVEN] or intensity CSV")
      ->required();
  eval->add_option("--estimate", eo.estimate, "Result document from segment")->required();
  auto* o_twin = eval->add_option("--truth-window", truth_window, "Truth window T0 T1 (default 0 1)")
                     ->expected(2);
  eval->add_option("--out", eo.out, "Output file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark preset");
  BenchOptions bo;
  std::uint64_t bench_seed = 0;
  bench->add_option("--preset", bo.preset,
                    "k-selection | hausdorff-l2 | marked-table | robust-a | robust-f")
      ->required();
  bench->add_option("--replicates", bo.replicates, "Simulated series per scenario (default 20)");
  bench->add_option("--cv-samples", bo.cv_samples, "Cross-validation replicates (default 100)");
  bench->add_option("--kmax", bo.k_max, "Largest K (default 12)");
  auto* o_bench_seed = bench->add_option("--seed", bench_seed, "Seed (falls back to CPT_SEED)");
  bench->add_option("--out-dir", bo.out_dir, "Directory for PRESET.csv (default .)");
  bench->add_option("--threads", bo.threads, "Worker threads, 0 = all cores (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      so.mean_intensity = given(o_mean, mean);
      so.ratio = given(o_ratio, ratio);
      so.rho_odd = given(o_rho_odd, rho_odd);
      so.rho_even = given(o_rho_even, rho_even);
      so.seed = given(o_sim_seed, seed);
      so.intensity_file = given(o_ifile, intensity_file);
      run_simulate(so, std::cout, std::cerr);
    } else if (segment->parsed() || cvc->parsed()) {
      const SegmentFlags& flags = segment->parsed() ? seg_flags : cv_flags;
      seg.window = window_of(flags.window, window);
      if (flags.k) seg.k = given(flags.k, k);
      seg.k_max = given(flags.k_max, k_max);
      seg.b = given(flags.b, b);
      seg.b_rho = given(flags.b_rho, b_rho);
      seg.seed = given(flags.seed, seg_seed);
      if (segment->parsed()) {
        run_segment(seg, std::cout, std::cerr);
      } else {
        run_cv_curve(seg, std::cout, std::cerr);
      }
    } else if (eval->parsed()) {
      eo.truth_window = window_of(o_twin, truth_window);
      run_evaluate(eo, std::cout);
    } else if (bench->parsed()) {
      bo.seed = given(o_bench_seed, bench_seed);
      run_bench(bo, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
