#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or configuration
// error, 2 data error, 3 internal invariant violation.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvtrans/app/config.hpp"
#include "mvtrans/app/evaluate.hpp"
#include "mvtrans/app/inspect.hpp"
#include "mvtrans/app/run.hpp"

namespace mvtrans::app {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

/// Errors caused by the inputs rather than by a broken invariant.
inline bool is_data_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::VersionMismatch:
    case ErrorCode::MissingScene:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::EmptyMask:
    case ErrorCode::CountMismatch:
    case ErrorCode::PlacementExhausted:
    case ErrorCode::GenerationExhausted:
      return true;
    default:
      return false;
  }
}

namespace cli_detail {

struct CommonFlags {
  std::string config;
  Overrides overrides;
};

inline void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.overrides.seed, "dataset seed");
  cmd->add_option("--scenes", f.overrides.scenes, "number of scenes");
  cmd->add_option("--views", f.overrides.views, "views per scene");
  cmd->add_option("--threads", f.overrides.threads, "worker threads");
  cmd->add_option("--out", f.overrides.out, "output directory");
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline RunConfig resolve(const CommonFlags& f) {
  try {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    apply(f.overrides, c);
    c.validate();
    return c;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Multi-view transparent object perception toolkit", "mvtrans"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, eval_flags, inspect_flags;
  std::optional<std::string> preset;
  auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
  add_common(gen, gen_flags);
  gen->add_option("--preset", preset, "split preset (syntodd-mini)");

  std::string run_dataset_dir;
  std::optional<int> rig_views;
  auto* run = app.add_subcommand("run", "run the pipeline on a dataset");
  add_common(run, run_flags);
  run->add_option("dataset", run_dataset_dir, "dataset directory")->required();
  run->add_option("--rig-views", rig_views, "views per inference (2, 3 or 5)");

  std::string pred_dir, gt_dir;
  auto* eval = app.add_subcommand("evaluate", "score predictions against a dataset");
  add_common(eval, eval_flags);
  eval->add_option("predictions", pred_dir, "prediction or dataset directory")->required();
  eval->add_option("ground_truth", gt_dir, "dataset directory")->required();

  std::string scene_dir;
  int view = 0;
  auto* inspect = app.add_subcommand("inspect", "write diagnostic images of one view");
  add_common(inspect, inspect_flags);
  inspect->add_option("scene", scene_dir, "scene directory")->required();
  inspect->add_option("view", view, "view index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (*gen) {
      RunConfig cfg = resolve(gen_flags);
      if (preset) {
        if (*preset != "syntodd-mini") throw UsageError("unknown preset '" + *preset + "'");
        cfg.generation.splits = synthgen::syntodd_splits();
      }
      const auto summary = synthgen::generate_dataset(cfg.generation, cfg.out);
      for (const auto& s : summary.scenes)
        if (!s.ok) err << s.name << " failed: " << s.error << '\n';
      err << "generated " << summary.generated() << "/" << summary.scenes.size() << " scenes in "
          << seconds_since(t0) << " s\n";
      out << cfg.out.string() << '\n';
      return summary.generated() > 0 ? kExitOk : kExitData;
    }
    if (*run) {
      RunConfig cfg = resolve(run_flags);
      if (rig_views) {
        cfg.pipeline.views = *rig_views;
        try {
          cfg.pipeline.validate();
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
      run_dataset(cfg, run_dataset_dir, cfg.out);
      err << "ran " << run_dataset_dir << " in " << seconds_since(t0) << " s\n";
      out << cfg.out.string() << '\n';
      return kExitOk;
    }
    if (*eval) {
      const RunConfig cfg = resolve(eval_flags);
      const Report report = evaluate(pred_dir, gt_dir, cfg.threads);
      out << report.text();
      if (eval_flags.overrides.out) {
        const fs::path dir = *eval_flags.overrides.out;
        std::error_code ec;
        fs::create_directories(dir, ec);
        require(!ec, ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
        std::ofstream(dir / "report.txt") << report.text();
        std::ofstream(dir / "report.csv") << report.csv();
        std::ofstream(dir / "report.json") << report.json().dump(1) << '\n';
      }
      return kExitOk;
    }
    if (*inspect) {
      const fs::path dest = inspect_flags.overrides.out.value_or(fs::path("inspect"));
      for (const auto& p : inspect_view(scene_dir, view, dest)) out << p.string() << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_data_error(e.code()) ? kExitData : kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace mvtrans::app
