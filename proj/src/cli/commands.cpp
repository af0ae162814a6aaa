#include "stopbench/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "stopbench/criteria.hpp"
#include "stopbench/indicators.hpp"
#include "stopbench/traceio.hpp"

#ifndef STOPBENCH_VERSION
#define STOPBENCH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace stopbench::cli {

namespace {

// Runs fn(0..n-1) on up to `jobs` threads. If tasks throw, the exception of
// the lowest failing index is rethrown so errors do not depend on timing.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  std::mutex failure_lock;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::string provenance(const ExperimentConfig& cfg) {
  return "# stopbench " + std::string(tool_version()) +
         " config_hash=" + config_hash(cfg) + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

class CsvTable {
 public:
  static CsvTable read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string() + " (run the earlier stage first)");
    CsvTable t;
    t.path_ = path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      auto fields = split(line);
      if (t.header_.empty()) {
        t.header_ = std::move(fields);
        continue;
      }
      if (fields.size() != t.header_.size()) {
        throw FormatError(t.path_, line_no,
                          "expected " + std::to_string(t.header_.size()) +
                              " fields, found " + std::to_string(fields.size()));
      }
      t.rows_.push_back(std::move(fields));
      t.lines_.push_back(line_no);
    }
    if (t.header_.empty()) throw FormatError(t.path_, line_no, "missing header row");
    return t;
  }

  std::size_t column(std::string_view name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) {
      throw FormatError(path_, 1, "missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header_.begin());
  }

  std::size_t size() const { return rows_.size(); }
  const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  double real(std::size_t row, std::size_t col) const {
    try {
      return parse_real(rows_[row][col]);
    } catch (const ConfigError& e) {
      throw FormatError(path_, lines_[row], e.what());
    }
  }

  std::uint64_t count(std::size_t row, std::size_t col) const {
    try {
      return parse_count(rows_[row][col]);
    } catch (const ConfigError& e) {
      throw FormatError(path_, lines_[row], e.what());
    }
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::string path_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

RunTrace load_run(const ExperimentConfig& cfg, const RunKey& run) {
  const auto dir = archive_dir(cfg, run);
  if (!fs::is_directory(dir)) {
    throw IoError("archive " + dir.string() + " not found (run generate first)");
  }
  return read_compact(TraceArchive::in(dir));
}

IndicatorSeries bhv_of(const RunTrace& trace) {
  return best_so_far_hv(trace, HvConfig::normalized(bounds_for(trace.meta)));
}

std::string setting_key(double alpha, double delta) {
  return format_real(alpha) + "," + format_real(delta);
}

}  // namespace

std::string_view tool_version() { return STOPBENCH_VERSION; }

std::string RunKey::name() const {
  return problem->label + "__" + algorithm->label + "__s" + std::to_string(seed);
}

std::vector<RunKey> planned_runs(const ExperimentConfig& cfg) {
  std::vector<RunKey> runs;
  for (const auto& p : cfg.problems) {
    for (const auto& a : cfg.algorithms) {
      for (std::size_t r = 0; r < cfg.runs; ++r) {
        runs.push_back({&p, &a, cfg.seed_base + r});
      }
    }
  }
  return runs;
}

fs::path archive_dir(const ExperimentConfig& cfg, const RunKey& run) {
  return cfg.output_dir / "archives" / run.name();
}

NormalizationBounds bounds_for(const RunMeta& meta) {
  return reference_bounds(make_problem(parse_problem_id(meta.problem_id), meta.m));
}

void cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto runs = planned_runs(cfg);
  const ExtraMeta extra{{"config_hash", config_hash(cfg)},
                        {"tool", "stopbench " + std::string(tool_version())}};
  fs::create_directories(cfg.output_dir / "archives");
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    const auto& run = runs[i];
    EvolverConfig evolver = run.algorithm->config;
    evolver.seed = run.seed;
    RunTrace trace = stopbench::run(run.problem->spec, evolver);
    trace.meta.encoding = cfg.encoding;
    ExtraMeta labels = extra;
    labels["problem_label"] = run.problem->label;
    write_compact(trace, archive_dir(cfg, run), labels);
  });
}

double InflateReport::ratio() const {
  return compact_bytes == 0 ? 0.0
                            : static_cast<double>(naive_bytes) /
                                  static_cast<double>(compact_bytes);
}

InflateReport cmd_inflate(const fs::path& archive, const fs::path& out) {
  const auto files = TraceArchive::in(archive);
  const RunTrace trace = read_compact(files);
  fs::create_directories(out);
  InflateReport report;
  report.compact_bytes = compact_size(files);
  for (const auto& path : write_naive(trace, out)) {
    report.naive_bytes += fs::file_size(path);
    ++report.files;
  }
  return report;
}

fs::path cmd_replay(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto runs = planned_runs(cfg);
  std::vector<RunTrace> traces(runs.size());
  std::vector<NormalizationBounds> bounds(runs.size());
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    traces[i] = load_run(cfg, runs[i]);
    bounds[i] = bounds_for(traces[i].meta);
  });

  const std::size_t k = cfg.criteria.size();
  std::vector<StopDecision> decisions(runs.size() * k);
  parallel_for(decisions.size(), cfg.jobs, [&](std::size_t task) {
    const std::size_t r = task / k;
    const std::size_t c = task % k;
    decisions[task] =
        replay(traces[r], std::span(&cfg.criteria[c].params, 1), bounds[r]).front();
  });

  std::ostringstream o;
  o << provenance(cfg)
    << "archive,problem,algorithm,seed,criterion,type,stopped,stop_iteration,fe_stop\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto& d = decisions[r * k + c];
      o << runs[r].name() << ',' << runs[r].problem->label << ','
        << runs[r].algorithm->label << ',' << runs[r].seed << ','
        << cfg.criteria[c].label << ',' << criterion_kind(cfg.criteria[c].params)
        << ',' << (d.stopped ? 1 : 0) << ',';
      if (d.stopped) {
        o << *d.stop_iteration << ',' << *d.fe_stop << '\n';
      } else {
        o << "NA,NA\n";
      }
    }
  }
  const auto path = cfg.output_dir / "decisions.csv";
  write_text(path, o.str());
  return path;
}

void cmd_evaluate(const ExperimentConfig& cfg, std::span<const PoseSetting> settings) {
  cfg.validate();
  if (settings.empty()) throw ConfigError("no (alpha, delta) setting to evaluate");
  for (const auto& s : settings) PoseParams{s.alpha, s.delta, 1}.validate();

  const auto runs = planned_runs(cfg);
  const std::size_t k = cfg.criteria.size();

  // (archive, criterion label) -> FEstop, or nullopt when not stopped.
  const auto table = CsvTable::read(cfg.output_dir / "decisions.csv");
  const auto c_archive = table.column("archive");
  const auto c_criterion = table.column("criterion");
  const auto c_stopped = table.column("stopped");
  const auto c_fe = table.column("fe_stop");
  std::map<std::pair<std::string, std::string>, std::optional<EvalCount>> stops;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::optional<EvalCount> fe;
    if (table.at(i, c_stopped) == "1") fe = table.count(i, c_fe);
    stops[{table.at(i, c_archive), table.at(i, c_criterion)}] = fe;
  }
  for (const auto& run : runs) {
    for (const auto& c : cfg.criteria) {
      if (!stops.count({run.name(), c.label})) {
        throw InputError("decisions.csv has no row for archive " + run.name() +
                         " and criterion " + c.label + " (run replay first)");
      }
    }
  }

  std::vector<RunMeta> metas(runs.size());
  std::vector<IndicatorSeries> bhv(runs.size());
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    const auto trace = load_run(cfg, runs[i]);
    metas[i] = trace.meta;
    bhv[i] = bhv_of(trace);
  });

  std::ostringstream rows;
  rows << provenance(cfg)
       << "archive,problem,algorithm,seed,criterion,alpha,delta,fe_star,fe_stop,"
          "fe_max,stopped,pose\n";
  // (setting index, problem, algorithm, criterion) -> sum, count
  std::map<std::tuple<std::size_t, const ProblemEntry*, const AlgorithmEntry*,
                      std::size_t>,
           std::pair<double, std::size_t>>
      sums;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    const EvalCount fe_max = metas[r].fe_max();
    for (std::size_t c = 0; c < k; ++c) {
      const auto& stop = stops.at({run.name(), cfg.criteria[c].label});
      const EvalCount fe_stop = stop.value_or(fe_max);
      if (fe_stop == 0 || fe_stop > fe_max) {
        throw InputError("decision for " + run.name() + " / " +
                         cfg.criteria[c].label + " has FEstop outside the run");
      }
      for (std::size_t s = 0; s < settings.size(); ++s) {
        const PoseParams params{settings[s].alpha, settings[s].delta, fe_max};
        const EvalCount star = fe_star(bhv[r], metas[r], params.delta);
        const double value = pose(star, fe_stop, params);
        rows << run.name() << ',' << run.problem->label << ',' << run.algorithm->label
             << ',' << run.seed << ',' << cfg.criteria[c].label << ','
             << format_real(params.alpha) << ',' << format_real(params.delta) << ','
             << star << ',' << fe_stop << ',' << fe_max << ','
             << (stop ? 1 : 0) << ',' << format_real(value) << '\n';
        auto& [sum, n] = sums[{s, run.problem, run.algorithm, c}];
        sum += value;
        ++n;
      }
    }
  }

  std::ostringstream avg;
  avg << provenance(cfg) << "problem,algorithm,criterion,alpha,delta,runs,mean_pose\n";
  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (const auto& p : cfg.problems) {
      for (const auto& a : cfg.algorithms) {
        for (std::size_t c = 0; c < k; ++c) {
          const auto [sum, n] = sums.at({s, &p, &a, c});
          avg << p.label << ',' << a.label << ',' << cfg.criteria[c].label << ','
              << format_real(settings[s].alpha) << ','
              << format_real(settings[s].delta) << ',' << n << ','
              << format_real(sum / static_cast<double>(n)) << '\n';
        }
      }
    }
  }
  write_text(cfg.output_dir / "pose.csv", rows.str());
  write_text(cfg.output_dir / "pose_avg.csv", avg.str());
}

void cmd_report(const ExperimentConfig& cfg, bool sweep) {
  cfg.validate();
  const auto avg = CsvTable::read(cfg.output_dir / "pose_avg.csv");
  const auto c_problem = avg.column("problem");
  const auto c_algorithm = avg.column("algorithm");
  const auto c_criterion = avg.column("criterion");
  const auto c_alpha = avg.column("alpha");
  const auto c_delta = avg.column("delta");
  const auto c_mean = avg.column("mean_pose");

  // Preserve first-appearance order of settings, instances and criteria.
  std::vector<PoseParams> settings;
  std::vector<std::pair<std::string, std::string>> instances;
  std::vector<std::string> criteria;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, double>
      cells;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    const PoseParams setting{avg.real(i, c_alpha), avg.real(i, c_delta), 1};
    if (std::none_of(settings.begin(), settings.end(), [&](const PoseParams& p) {
          return p.alpha == setting.alpha && p.delta == setting.delta;
        })) {
      settings.push_back(setting);
    }
    const std::pair instance{avg.at(i, c_problem), avg.at(i, c_algorithm)};
    if (std::find(instances.begin(), instances.end(), instance) == instances.end()) {
      instances.push_back(instance);
    }
    if (std::find(criteria.begin(), criteria.end(), avg.at(i, c_criterion)) ==
        criteria.end()) {
      criteria.push_back(avg.at(i, c_criterion));
    }
    cells[{setting_key(setting.alpha, setting.delta), instance.first,
           instance.second, avg.at(i, c_criterion)}] = avg.real(i, c_mean);
  }
  if (settings.empty()) throw InputError("pose_avg.csv has no rows");
  if (!sweep) require_single_setting(settings);

  const std::string head = provenance(cfg);
  std::ostringstream ranks;
  std::ostringstream per_problem;
  ranks << head << "alpha,delta,criterion,mean_rank\n";
  per_problem << head << "alpha,delta,problem,algorithm,criterion,rank\n";
  for (const auto& s : settings) {
    const auto key = setting_key(s.alpha, s.delta);
    std::vector<std::vector<double>> table(criteria.size(),
                                           std::vector<double>(instances.size()));
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      for (std::size_t p = 0; p < instances.size(); ++p) {
        const auto it = cells.find(
            {key, instances[p].first, instances[p].second, criteria[c]});
        table[c][p] = it == cells.end() ? std::nan("") : it->second;
      }
    }
    const auto by_problem = problem_ranks(table);
    const auto mean = average_ranks(table);
    std::ostringstream single;
    single << head << "criterion,mean_rank\n";
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      ranks << key << ',' << criteria[c] << ',' << format_real(mean[c]) << '\n';
      single << criteria[c] << ',' << format_real(mean[c]) << '\n';
      for (std::size_t p = 0; p < instances.size(); ++p) {
        per_problem << key << ',' << instances[p].first << ',' << instances[p].second
                    << ',' << criteria[c] << ',' << format_real(by_problem[c][p])
                    << '\n';
      }
    }
    if (sweep) {
      write_text(cfg.output_dir / ("ranks_a" + format_real(s.alpha) + "_d" +
                                   format_real(s.delta) + ".csv"),
                 single.str());
    }
  }
  write_text(cfg.output_dir / "ranks.csv", ranks.str());
  write_text(cfg.output_dir / "problem_ranks.csv", per_problem.str());

  // Plot data: FE* / FEstop markers from pose.csv, bHV series from archives.
  const auto rows = CsvTable::read(cfg.output_dir / "pose.csv");
  const std::size_t r_archive = rows.column("archive");
  const std::size_t r_criterion = rows.column("criterion");
  const std::size_t r_alpha = rows.column("alpha");
  const std::size_t r_delta = rows.column("delta");
  const std::size_t r_star = rows.column("fe_star");
  const std::size_t r_stop = rows.column("fe_stop");
  std::ostringstream markers;
  markers << head << "archive,criterion,alpha,delta,fe_star,fe_stop\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    markers << rows.at(i, r_archive) << ',' << rows.at(i, r_criterion) << ','
            << rows.at(i, r_alpha) << ',' << rows.at(i, r_delta) << ','
            << rows.at(i, r_star) << ',' << rows.at(i, r_stop) << '\n';
  }
  write_text(cfg.output_dir / "plot_markers.csv", markers.str());

  const auto runs = planned_runs(cfg);
  std::vector<std::string> series(runs.size());
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    const auto trace = load_run(cfg, runs[i]);
    const auto hv = hv_series(trace, HvConfig::normalized(bounds_for(trace.meta)));
    const auto best = best_so_far(hv);
    std::ostringstream o;
    for (std::size_t t = 0; t < hv.size(); ++t) {
      o << runs[i].name() << ',' << t + 1 << ','
        << fe_of_iteration(trace.meta, t + 1) << ',' << format_real(hv[t]) << ','
        << format_real(best[t]) << '\n';
    }
    series[i] = o.str();
  });
  std::string bhv = head + "archive,iteration,fe,hv,bhv\n";
  for (const auto& s : series) bhv += s;
  write_text(cfg.output_dir / "plot_bhv.csv", bhv);
}

}  // namespace stopbench::cli
