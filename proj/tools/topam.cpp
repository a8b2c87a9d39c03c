// Command-line front end: run a configuration or rebuild a report.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "topam/config.hpp"
#include "topam/errors.hpp"
#include "topam/optimizer.hpp"
#include "topam/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kNumerical = 3;

int run_command(const std::string& config_path, const std::string& preset, const std::string& out,
                int max_iters, const std::optional<std::string>& orientations, bool quiet) {
  topam::RunConfig cfg =
      preset.empty() ? topam::load_config(config_path) : topam::load_config(config_path, preset);
  if (!out.empty()) cfg.out_dir = out;
  if (max_iters > 0) cfg.max_iters = max_iters;
  if (orientations) {
    cfg.angles_deg = topam::parse_number_list(*orientations);
    if (cfg.angles_deg.empty()) throw topam::InputError("--orientations needs at least one angle");
    cfg.count = 0;
  }
  cfg.validate();

  auto progress = [&](const topam::IterationRecord& r) {
    if (quiet) return;
    const auto& o = r.objective;
    const double obj = o[1] ? *o[1] : (o[0] ? *o[0] : 0.0);
    std::fprintf(stderr, "it %4d  obj %.6g  beta %.3g  eta %.3f", r.iteration, obj, r.schedule.beta,
                 r.schedule.eta);
    if (r.theta_star) std::fprintf(stderr, "  theta* %.1f", *r.theta_star);
    std::fprintf(stderr, "\n");
  };
  const topam::RunResult res = topam::run_optimization(cfg, progress);
  const topam::PrintabilityReport rep = topam::write_run(res, cfg.out_dir);
  std::printf("objective_int = %.10g\n", res.objective[1]);
  if (res.theta_star) std::printf("theta_star = %g\n", *res.theta_star);
  std::printf("violation_fraction = %.6g\n", rep.violation_fraction);
  std::printf("seconds = %.3f\n", res.seconds);
  std::printf("output = %s\n", cfg.out_dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supporting topology optimization with build orientation"};
  app.require_subcommand(1);

  std::string config_path, preset, out, rundir;
  std::optional<std::string> orientations;
  int max_iters = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an optimization");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--preset", preset, "named preset applied before the file");
  run->add_option("--out", out, "output directory");
  run->add_option("--max-iters", max_iters, "iteration budget override");
  run->add_option("--orientations", orientations, "comma separated build angles in degrees");
  run->add_flag("-q,--quiet", quiet, "no per-iteration progress");

  auto* report = app.add_subcommand("report", "recompute the printability report of a run directory");
  report->add_option("rundir", rundir, "directory written by run")->required();

  auto* presets = app.add_subcommand("presets", "list the shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return run_command(config_path, preset, out, max_iters, orientations, quiet);
    if (*report) {
      std::cout << topam::format_report(topam::report_from_dir(rundir));
      return kOk;
    }
    if (*presets) {
      for (const auto& name : topam::preset_names()) std::cout << name << "\n";
      return kOk;
    }
  } catch (const topam::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const topam::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
