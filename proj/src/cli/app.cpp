#include "stopbench/cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "stopbench/cli/commands.hpp"
#include "stopbench/cli/config.hpp"

namespace stopbench::cli {

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed_base;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Experiment config file")->required();
  cmd->add_option("--out", o.out, "Output directory (overrides output_dir)");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--seed-base", o.seed_base, "First seed (overrides seed_base)");
}

ExperimentConfig effective_config(const Overrides& o) {
  auto cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed_base) cfg.seed_base = *o.seed_base;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_list(const std::string& text, double fallback) {
  if (text.empty()) return {fallback};
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_real(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark stopping criteria on recorded optimizer runs", "stopbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  Overrides gen_opts, rep_opts, eval_opts, report_opts;
  auto* generate = app.add_subcommand("generate", "Run the optimizer and store compact archives");
  add_common(generate, gen_opts);

  std::string archive;
  std::string inflate_out;
  auto* inflate = app.add_subcommand("inflate", "Expand one archive into per-iteration files");
  inflate->add_option("archive", archive, "Archive directory")->required();
  inflate->add_option("--out", inflate_out, "Directory for fP_<t>.csv files")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Replay archives through every criterion");
  add_common(replay_cmd, rep_opts);

  std::string alphas;
  std::string deltas;
  bool eval_sweep = false;
  auto* evaluate = app.add_subcommand("evaluate", "Score stop decisions with POSE");
  add_common(evaluate, eval_opts);
  evaluate->add_option("--alpha", alphas, "Penalty factor (comma list with --sweep)");
  evaluate->add_option("--delta", deltas, "HV update range (comma list with --sweep)");
  evaluate->add_flag("--sweep", eval_sweep, "Allow several alpha/delta values");

  bool report_sweep = false;
  auto* report = app.add_subcommand("report", "Average ranks and plot data");
  add_common(report, report_opts);
  report->add_flag("--sweep", report_sweep, "Emit one rank table per alpha/delta");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (generate->parsed()) {
      const auto cfg = effective_config(gen_opts);
      cmd_generate(cfg);
      out << "generated " << planned_runs(cfg).size() << " archives in "
          << (cfg.output_dir / "archives").string() << "\n";
    } else if (inflate->parsed()) {
      const auto r = cmd_inflate(archive, inflate_out);
      out << "files=" << r.files << "\ncompact_bytes=" << r.compact_bytes
          << "\nnaive_bytes=" << r.naive_bytes << "\nratio=" << format_real(r.ratio())
          << "\n";
    } else if (replay_cmd->parsed()) {
      const auto cfg = effective_config(rep_opts);
      out << "wrote " << cmd_replay(cfg).string() << "\n";
    } else if (evaluate->parsed()) {
      const auto cfg = effective_config(eval_opts);
      const auto a = parse_list(alphas, cfg.alpha);
      const auto d = parse_list(deltas, cfg.delta);
      if (!eval_sweep && (a.size() > 1 || d.size() > 1)) {
        throw ConfigError("several alpha/delta values need --sweep");
      }
      std::vector<PoseSetting> settings;
      for (double alpha : a) {
        for (double delta : d) settings.push_back({alpha, delta});
      }
      cmd_evaluate(cfg, settings);
      out << "wrote " << (cfg.output_dir / "pose.csv").string() << " and "
          << (cfg.output_dir / "pose_avg.csv").string() << "\n";
    } else if (report->parsed()) {
      const auto cfg = effective_config(report_opts);
      cmd_report(cfg, report_sweep);
      out << "wrote " << (cfg.output_dir / "ranks.csv").string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_data;
  }
  return exit_ok;
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace stopbench::cli
