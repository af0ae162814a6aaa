#include "stopbench/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace stopbench::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (item.empty()) throw ConfigError("empty item in list");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool valid_label(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.';
  });
}

std::string_view indicator_name(OcdIndicator i) {
  switch (i) {
    case OcdIndicator::hv: return "hv";
    case OcdIndicator::epsilon: return "epsilon";
    case OcdIndicator::r2: return "r2";
  }
  return "?";
}

OcdIndicator parse_indicator(std::string_view s) {
  if (s == "hv") return OcdIndicator::hv;
  if (s == "epsilon") return OcdIndicator::epsilon;
  if (s == "r2") return OcdIndicator::r2;
  throw ConfigError("unknown OCD indicator '" + std::string(s) + "'");
}

struct Section {
  std::string kind;
  std::string label;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> lines;
};

using Setter = std::function<void(std::string_view)>;

void apply(const Section& sec, const std::map<std::string, Setter>& setters,
           std::string_view source) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sec.entries.size(); ++i) {
    const auto& [key, value] = sec.entries[i];
    const std::string where =
        std::string(source) + ":" + std::to_string(sec.lines[i]) + ": ";
    if (!seen.insert(key).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError(where + "unknown key '" + key + "' in [" + sec.kind + "]");
    }
    try {
      it->second(value);
    } catch (const Error& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
}

CriterionParams criterion_from(const Section& sec, std::string_view source) {
  const auto type_it =
      std::find_if(sec.entries.begin(), sec.entries.end(),
                   [](const auto& kv) { return kv.first == "type"; });
  const std::string type = type_it != sec.entries.end() ? type_it->second : sec.label;
  auto ignore_type = [](std::string_view) {};

  auto finish = [&](auto& params, std::map<std::string, Setter> setters) {
    setters["type"] = ignore_type;
    apply(sec, setters, source);
    try {
      params.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(sec.line) +
                        ": " + e.what());
    }
    return CriterionParams(std::move(params));
  };

  if (type == "ocd") {
    OcdParams p;
    return finish(p, {{"window", [&](auto v) { p.window = parse_count(v); }},
                      {"var_limit", [&](auto v) { p.var_limit = parse_real(v); }},
                      {"significance",
                       [&](auto v) { p.significance = parse_real(v); }},
                      {"indicators", [&](auto v) {
                         p.indicators.clear();
                         for (const auto& s : split_list(v)) {
                           p.indicators.push_back(parse_indicator(s));
                         }
                       }}});
  }
  if (type == "mgbm") {
    MgbmParams p;
    return finish(p, {{"i_min", [&](auto v) { p.i_min = parse_real(v); }},
                      {"r", [&](auto v) { p.r = parse_real(v); }},
                      {"q", [&](auto v) { p.q = parse_real(v); }},
                      {"x0", [&](auto v) { p.x0 = parse_real(v); }},
                      {"p0", [&](auto v) { p.p0 = parse_real(v); }}});
  }
  if (type == "esc") {
    EscParams p;
    return finish(p, {{"n_b", [&](auto v) { p.n_b = parse_count(v); }},
                      {"n_s", [&](auto v) { p.n_s = parse_count(v); }},
                      {"diss_tol", [&](auto v) { p.diss_tol = parse_real(v); }},
                      {"mode", [&](std::string_view v) {
                         if (v == "stability") {
                           p.mode = EscMode::stability;
                         } else if (v == "below_threshold") {
                           p.mode = EscMode::below_threshold;
                         } else {
                           throw ConfigError("mode must be stability or "
                                             "below_threshold");
                         }
                       }}});
  }
  if (type == "eps") {
    EpsParams p;
    return finish(p, {{"epsilon", [&](auto v) { p.epsilon = parse_real(v); }},
                      {"patience", [&](auto v) { p.patience = parse_count(v); }}});
  }
  if (type == "isc") {
    IscParams p;
    return finish(p, {{"patience", [&](auto v) { p.patience = parse_count(v); }}});
  }
  throw ConfigError(std::string(source) + ":" + std::to_string(sec.line) +
                    ": unknown criterion type '" + type + "'");
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty() ||
      !std::isfinite(v)) {
    throw ConfigError("'" + std::string(s) + "' is not a finite number");
  }
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw ConfigError("'" + std::string(s) + "' is not a nonnegative integer");
  }
  return v;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (problems.empty()) throw ConfigError("no [problem] section");
  if (algorithms.empty()) throw ConfigError("no [algorithm] section");
  if (criteria.empty()) throw ConfigError("no [criterion] section");
  auto unique = [](const auto& entries, std::string_view what) {
    std::set<std::string> labels;
    for (const auto& e : entries) {
      if (!valid_label(e.label)) {
        throw ConfigError(std::string(what) + " label '" + e.label +
                          "' may only use letters, digits, '_', '-' and '.'");
      }
      if (!labels.insert(e.label).second) {
        throw ConfigError("duplicate " + std::string(what) + " label '" +
                          e.label + "'");
      }
    }
  };
  unique(problems, "problem");
  unique(algorithms, "algorithm");
  unique(criteria, "criterion");
  for (const auto& p : problems) p.spec.validate();
  for (const auto& a : algorithms) a.config.validate();
  PoseParams{alpha, delta, 1}.validate();
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  std::vector<Section> sections;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const auto body = trim(line.substr(1, line.size() - 2));
      const auto space = body.find_first_of(" \t");
      Section sec;
      sec.kind = std::string(body.substr(0, space));
      if (space != std::string_view::npos) sec.label = std::string(trim(body.substr(space)));
      sec.line = line_no;
      sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (sections.empty()) throw ConfigError(where + "key outside any section");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    sections.back().entries.emplace_back(std::string(key), std::string(value));
    sections.back().lines.push_back(line_no);
  }

  ExperimentConfig cfg;
  bool seen_experiment = false;
  bool seen_pose = false;
  for (const auto& sec : sections) {
    const std::string where =
        std::string(source) + ":" + std::to_string(sec.line) + ": ";
    if (sec.kind == "experiment") {
      if (seen_experiment) throw ConfigError(where + "second [experiment] section");
      seen_experiment = true;
      apply(sec,
            {{"output_dir", [&](std::string_view v) { cfg.output_dir = std::string(v); }},
             {"runs", [&](auto v) { cfg.runs = parse_count(v); }},
             {"seed_base", [&](auto v) { cfg.seed_base = parse_count(v); }},
             {"encoding", [&](auto v) { cfg.encoding = parse_encoding(v); }},
             {"jobs", [&](auto v) { cfg.jobs = parse_count(v); }}},
            source);
    } else if (sec.kind == "problem") {
      std::string id;
      std::size_t m = 0;
      std::optional<std::size_t> n;
      apply(sec,
            {{"id",
              [&](std::string_view v) {
                parse_problem_id(v);
                id = std::string(v);
              }},
             {"m", [&](auto v) { m = parse_count(v); }},
             {"n", [&](auto v) { n = parse_count(v); }}},
            source);
      if (id.empty() || m == 0) throw ConfigError(where + "[problem] needs id and m");
      try {
        const auto pid = parse_problem_id(id);
        ProblemEntry e;
        e.spec = n ? make_problem(pid, m, *n) : make_problem(pid, m);
        e.label = sec.label.empty() ? id + "_m" + std::to_string(m) : sec.label;
        cfg.problems.push_back(std::move(e));
      } catch (const Error& e) {
        throw ConfigError(where + e.what());
      }
    } else if (sec.kind == "algorithm") {
      AlgorithmEntry a;
      a.label = sec.label.empty() ? "nsga2" : sec.label;
      auto& c = a.config;
      apply(sec,
            {{"mu", [&](auto v) { c.mu = parse_count(v); }},
             {"lambda", [&](auto v) { c.lambda = parse_count(v); }},
             {"fe_max", [&](auto v) { c.fe_max = parse_count(v); }},
             {"sbx_eta", [&](auto v) { c.sbx_eta = parse_real(v); }},
             {"sbx_prob", [&](auto v) { c.sbx_prob = parse_real(v); }},
             {"pm_eta", [&](auto v) { c.pm_eta = parse_real(v); }},
             {"pm_prob", [&](auto v) { c.pm_prob = parse_real(v); }}},
            source);
      c.algorithm_id = a.label;
      try {
        c.validate();
      } catch (const Error& e) {
        throw ConfigError(where + e.what());
      }
      cfg.algorithms.push_back(std::move(a));
    } else if (sec.kind == "criterion") {
      CriterionEntry e;
      e.params = criterion_from(sec, source);
      e.label = sec.label.empty() ? std::string(criterion_kind(e.params)) : sec.label;
      cfg.criteria.push_back(std::move(e));
    } else if (sec.kind == "pose") {
      if (seen_pose) throw ConfigError(where + "second [pose] section");
      seen_pose = true;
      apply(sec,
            {{"alpha", [&](auto v) { cfg.alpha = parse_real(v); }},
             {"delta", [&](auto v) { cfg.delta = parse_real(v); }}},
            source);
    } else {
      throw ConfigError(where + "unknown section [" + sec.kind + "]");
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string canonical_text(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << "[experiment]\nruns=" << cfg.runs << "\nseed_base=" << cfg.seed_base
    << "\nencoding=" << to_string(cfg.encoding) << "\n";
  for (const auto& p : cfg.problems) {
    o << "[problem " << p.label << "]\nid=" << to_string(p.spec.id)
      << "\nm=" << p.spec.m << "\nn=" << p.spec.n << "\n";
  }
  for (const auto& a : cfg.algorithms) {
    const auto& c = a.config;
    o << "[algorithm " << a.label << "]\nmu=" << c.mu << "\nlambda=" << c.lambda
      << "\nfe_max=" << c.fe_max << "\nsbx_eta=" << format_real(c.sbx_eta)
      << "\nsbx_prob=" << format_real(c.sbx_prob)
      << "\npm_eta=" << format_real(c.pm_eta)
      << "\npm_prob=" << format_real(c.pm_prob) << "\n";
  }
  for (const auto& c : cfg.criteria) {
    o << "[criterion " << c.label << "]\ntype=" << criterion_kind(c.params) << "\n";
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, OcdParams>) {
            o << "window=" << p.window << "\nvar_limit=" << format_real(p.var_limit)
              << "\nsignificance=" << format_real(p.significance) << "\nindicators=";
            for (std::size_t i = 0; i < p.indicators.size(); ++i) {
              o << (i ? "," : "") << indicator_name(p.indicators[i]);
            }
            o << "\n";
          } else if constexpr (std::is_same_v<T, MgbmParams>) {
            o << "i_min=" << format_real(p.i_min) << "\nr=" << format_real(p.r)
              << "\nq=" << format_real(p.q) << "\nx0=" << format_real(p.x0)
              << "\np0=" << format_real(p.p0) << "\n";
          } else if constexpr (std::is_same_v<T, EscParams>) {
            o << "n_b=" << p.n_b << "\nn_s=" << p.n_s
              << "\ndiss_tol=" << format_real(p.diss_tol) << "\nmode="
              << (p.mode == EscMode::stability ? "stability" : "below_threshold")
              << "\n";
          } else if constexpr (std::is_same_v<T, EpsParams>) {
            o << "epsilon=" << format_real(p.epsilon) << "\npatience=" << p.patience
              << "\n";
          } else {
            o << "patience=" << p.patience << "\n";
          }
        },
        c.params);
  }
  o << "[pose]\nalpha=" << format_real(cfg.alpha)
    << "\ndelta=" << format_real(cfg.delta) << "\n";
  return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace stopbench::cli
