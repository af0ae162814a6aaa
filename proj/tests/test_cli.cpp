#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <sstream>

#include "stopbench/cli/app.hpp"
#include "stopbench/cli/commands.hpp"
#include "stopbench/cli/config.hpp"
#include "stopbench/traceio.hpp"
#include "support.hpp"

using namespace stopbench;
using namespace stopbench::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small experiment
[experiment]
runs = 3
seed_base = 7
encoding = text

[problem p2]
id = dtlz2
m = 2

[algorithm ga]
mu = 20
lambda = 20
fe_max = 2000

[criterion ocd]
type = ocd
window = 5
[criterion mgbm]
type = mgbm
[criterion esc]
type = esc
n_s = 5
[criterion eps]
type = eps
patience = 10
[criterion isc]
type = isc
patience = 10
)";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "exp.cfg";
  std::ofstream(p) << text;
  return p;
}

// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).generic_string()] = testing::slurp(e.path());
    }
  }
  return files;
}

std::vector<std::string> data_rows(const fs::path& csv) {
  std::istringstream in(testing::slurp(csv));
  std::vector<std::string> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string f;
  while (std::getline(s, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kSmall, "small.cfg");
  CHECK(cfg.runs == 3);
  CHECK(cfg.seed_base == 7);
  CHECK(cfg.encoding == Encoding::text);
  REQUIRE(cfg.problems.size() == 1);
  CHECK(cfg.problems[0].label == "p2");
  CHECK(cfg.problems[0].spec.n == 11);
  REQUIRE(cfg.algorithms.size() == 1);
  CHECK(cfg.algorithms[0].config.fe_max == 2000);
  REQUIRE(cfg.criteria.size() == 5);
  CHECK(std::get<OcdParams>(cfg.criteria[0].params).window == 5);
  CHECK(std::get<EscParams>(cfg.criteria[2].params).n_s == 5);
  CHECK(cfg.alpha == 2.0);
  CHECK(cfg.delta == 0.0);

  const auto desk = load_config(fs::path(STOPBENCH_SOURCE_DIR) / "configs" / "desk.cfg");
  CHECK(desk.problems.size() == 2);
  CHECK(desk.criteria.size() == 5);
  CHECK(desk.runs == 5);
}

TEST_CASE("config errors name the offending line") {
  auto expect_error = [](const std::string& text, const std::string& where) {
    try {
      parse_config(text, "bad.cfg");
      FAIL("expected a config error for: " << text);
    } catch (const ConfigError& e) {
      CAPTURE(text);
      const std::string message = e.what();
      CAPTURE(message);
      CHECK(std::string(e.what()).find(where) != std::string::npos);
    }
  };
  expect_error("[experiment]\nrunz = 3\n", "bad.cfg:2:");
  expect_error("[experiment]\nruns = 3\nruns = 4\n", "bad.cfg:3:");
  expect_error("[experiment]\nruns = three\n", "bad.cfg:2:");
  expect_error("[nonsense]\n", "bad.cfg:1:");
  expect_error("[experiment]\njust words\n", "bad.cfg:2:");
  expect_error("[criterion x]\ntype = magic\n", "bad.cfg:");
  expect_error("[criterion x]\ntype = isc\nwindow = 3\n", "bad.cfg:3:");
  expect_error("[problem p]\nid = zdt1\nm = 2\n", "bad.cfg:2:");

  // Structurally valid but incomplete.
  CHECK_THROWS_AS(parse_config("[experiment]\nruns = 1\n", "x").validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/stopbench.cfg"), ConfigError);
}

TEST_CASE("config hash ignores output location and parallelism") {
  auto a = parse_config(kSmall, "a");
  auto b = a;
  b.jobs = 8;
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.runs = 4;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(canonical_text(parse_config(canonical_text(a), "again")) == canonical_text(a));
  CHECK(format_real(0.1) == "0.1");
  CHECK(parse_real("1e-4") == 1e-4);
  CHECK_THROWS_AS(parse_real("1e-4x"), ConfigError);
  CHECK_THROWS_AS(parse_count("-3"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == exit_config);
  CHECK(invoke({"--help"}).code == exit_ok);
  CHECK(invoke({"frobnicate"}).code == exit_config);
  CHECK(invoke({"generate"}).code == exit_config);  // --config is required
  CHECK(invoke({"generate", "--config", "/nonexistent.cfg"}).code == exit_config);

  const auto dir = testing::scratch_dir("cli-exit");
  const auto bad = write_config(dir, "[experiment]\nruns = 0\n");
  CHECK(invoke({"replay", "--config", bad.string()}).code == exit_config);

  // A corrupt archive is a data error.
  const auto cfg_path = write_config(dir, kSmall);
  const std::string out = (dir / "out").string();
  REQUIRE(invoke({"generate", "--config", cfg_path.string(), "--out", out}).code == exit_ok);
  const auto fx = dir / "out" / "archives" / "p2__ga__s7" / "fx.csv";
  REQUIRE(fs::exists(fx));
  std::ofstream(fx, std::ios::app) << "garbage,line\n";
  const auto r = invoke({"replay", "--config", cfg_path.string(), "--out", out});
  CHECK(r.code == exit_data);
  CHECK(r.err.find("fx.csv") != std::string::npos);
  CHECK(invoke({"inflate", (dir / "nowhere").string(), "--out", (dir / "x").string()}).code ==
        exit_data);
}

TEST_CASE("pipeline counts, provenance and determinism") {
  const auto dir = testing::scratch_dir("cli-pipeline");
  const auto cfg_path = write_config(dir, kSmall);
  const auto cfg = load_config(cfg_path);
  const std::string hash_line = "config_hash=";

  auto pipeline = [&](const fs::path& out, const std::string& jobs) {
    const std::vector<std::string> common{"--config", cfg_path.string(), "--out", out.string(),
                                          "--jobs", jobs};
    for (std::string stage : {"generate", "replay", "evaluate", "report"}) {
      std::vector<std::string> args{stage};
      args.insert(args.end(), common.begin(), common.end());
      const auto r = invoke(args);
      REQUIRE_MESSAGE(r.code == exit_ok, stage << ": " << r.err);
    }
  };
  const auto first = dir / "first";
  const auto second = dir / "second";
  pipeline(first, "1");
  pipeline(second, "4");
  const auto a = snapshot_tree(first);
  const auto b = snapshot_tree(second);
  CHECK(a == b);

  CHECK(fs::is_directory(first / "archives" / "p2__ga__s7"));
  CHECK(fs::is_directory(first / "archives" / "p2__ga__s9"));
  const auto trace = read_compact(TraceArchive::in(first / "archives" / "p2__ga__s8"));
  CHECK(trace.meta.t_max == 100);
  CHECK(trace.memberships.size() == 100);

  CHECK(data_rows(first / "decisions.csv").size() == 15);
  CHECK(data_rows(first / "pose.csv").size() == 15);
  CHECK(data_rows(first / "pose_avg.csv").size() == 5);
  const auto ranks = data_rows(first / "ranks.csv");
  CHECK(ranks.size() == 5);
  double rank_sum = 0.0;
  for (const auto& row : ranks) rank_sum += std::stod(split(row).back());
  CHECK(rank_sum == doctest::Approx(15.0));
  for (const auto& row : data_rows(first / "decisions.csv")) {
    const auto f = split(row);
    if (f[6] == "1") CHECK(std::stoull(f[8]) <= 2000);
  }
  for (const char* name : {"decisions.csv", "pose.csv", "pose_avg.csv", "ranks.csv",
                           "problem_ranks.csv", "plot_bhv.csv", "plot_markers.csv"}) {
    const auto text = testing::slurp(first / name);
    CAPTURE(name);
    CHECK(text.rfind("# stopbench ", 0) == 0);
    CHECK(text.find(hash_line) != std::string::npos);
  }
}

TEST_CASE("replay leaves archives untouched and is repeatable") {
  const auto dir = testing::scratch_dir("cli-replay");
  const auto cfg_path = write_config(dir, kSmall);
  const std::string out = (dir / "out").string();
  REQUIRE(invoke({"generate", "--config", cfg_path.string(), "--out", out}).code == exit_ok);
  const auto before = snapshot_tree(dir / "out" / "archives");
  REQUIRE(invoke({"replay", "--config", cfg_path.string(), "--out", out}).code == exit_ok);
  const auto decisions = testing::slurp(dir / "out" / "decisions.csv");
  REQUIRE(invoke({"replay", "--config", cfg_path.string(), "--out", out}).code == exit_ok);
  CHECK(testing::slurp(dir / "out" / "decisions.csv") == decisions);
  CHECK(snapshot_tree(dir / "out" / "archives") == before);

  // Regenerating reproduces the archives byte for byte.
  REQUIRE(invoke({"generate", "--config", cfg_path.string(), "--out", out}).code == exit_ok);
  CHECK(snapshot_tree(dir / "out" / "archives") == before);
}

TEST_CASE("alpha and delta settings") {
  const auto dir = testing::scratch_dir("cli-sweep");
  const auto cfg_path = write_config(dir, kSmall);
  const std::string out = (dir / "out").string();
  const std::vector<std::string> common{"--config", cfg_path.string(), "--out", out};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), common.begin(), common.end());
    return invoke(head);
  };
  REQUIRE(with({"generate"}).code == exit_ok);
  REQUIRE(with({"replay"}).code == exit_ok);
  CHECK(with({"evaluate", "--alpha", "2,3"}).code == exit_config);
  CHECK(with({"evaluate", "--alpha", "0.5"}).code == exit_config);

  REQUIRE(with({"evaluate", "--alpha", "2,3,4,5", "--delta", "0,0.1", "--sweep"}).code == exit_ok);
  CHECK(data_rows(dir / "out" / "pose.csv").size() == 15 * 8);
  CHECK(data_rows(dir / "out" / "pose_avg.csv").size() == 5 * 8);
  CHECK(with({"report"}).code == exit_config);  // mixed settings need --sweep
  REQUIRE(with({"report", "--sweep"}).code == exit_ok);
  CHECK(fs::exists(dir / "out" / "ranks_a2_d0.csv"));
  CHECK(fs::exists(dir / "out" / "ranks_a5_d0.1.csv"));
}

TEST_CASE("inflate") {
  const auto dir = testing::scratch_dir("cli-inflate");
  auto trace = testing::figure_trace();
  const auto archive = write_compact(trace, dir / "fig");
  const auto r = invoke({"inflate", (dir / "fig").string(), "--out", (dir / "naive").string()});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("files=3") != std::string::npos);
  CHECK(testing::slurp(dir / "naive" / "fP_3.csv") ==
        "1.45,2.39\n3.14,2.91\n1.27,2.55\n2.88,0.98\n");

  trace.meta.t_max = 1;
  trace.all_points.resize(4);
  trace.memberships.resize(1);
  write_compact(trace, dir / "one");
  const auto report = cmd_inflate(dir / "one", dir / "one_naive");
  CHECK(report.files == 1);
  CHECK(fs::exists(dir / "one_naive" / "fP_1.csv"));
  CHECK_FALSE(fs::exists(dir / "one_naive" / "fP_2.csv"));
  CHECK(report.naive_bytes > 0);
  CHECK(report.ratio() == doctest::Approx(static_cast<double>(report.naive_bytes) /
                                          static_cast<double>(report.compact_bytes)));
}
