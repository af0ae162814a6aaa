#include "stopbench/problems.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace stopbench {

namespace {

constexpr double kPi = std::numbers::pi;

struct NamedProblem {
  ProblemId id;
  std::string_view name;
};

constexpr NamedProblem kNames[] = {
    {ProblemId::dtlz1, "dtlz1"}, {ProblemId::dtlz2, "dtlz2"},
    {ProblemId::dtlz3, "dtlz3"}, {ProblemId::dtlz4, "dtlz4"},
    {ProblemId::dtlz5, "dtlz5"}, {ProblemId::dtlz6, "dtlz6"},
    {ProblemId::dtlz7, "dtlz7"}, {ProblemId::cdtlz2, "cdtlz2"},
};

// Sum over the distance variables x[m-1 .. n-1].
template <typename F>
double distance_sum(std::span<const double> x, std::size_t m, F term) {
  double s = 0.0;
  for (std::size_t i = m - 1; i < x.size(); ++i) s += term(x[i]);
  return s;
}

double g_rastrigin(std::span<const double> x, std::size_t m) {
  const double k = static_cast<double>(x.size() - m + 1);
  const double s = distance_sum(x, m, [](double v) {
    const double d = v - 0.5;
    return d * d - std::cos(20.0 * kPi * d);
  });
  return 100.0 * (k + s);
}

double g_sphere(std::span<const double> x, std::size_t m) {
  return distance_sum(x, m, [](double v) { return (v - 0.5) * (v - 0.5); });
}

// f_i = (1+g) * prod_{j < m-1-i} cos(theta_j) * (i > 0 ? sin(theta_{m-1-i}) : 1)
ObjectiveVector spherical(std::span<const double> theta, std::size_t m,
                          double g) {
  ObjectiveVector f(m, 1.0 + g);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j + 1 + i < m; ++j) f[i] *= std::cos(theta[j]);
    if (i > 0) f[i] *= std::sin(theta[m - 1 - i]);
  }
  return f;
}

ObjectiveVector eval_dtlz1(std::span<const double> x, std::size_t m) {
  const double g = g_rastrigin(x, m);
  ObjectiveVector f(m, 0.5 * (1.0 + g));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j + 1 + i < m; ++j) f[i] *= x[j];
    if (i > 0) f[i] *= 1.0 - x[m - 1 - i];
  }
  return f;
}

ObjectiveVector eval_angular(std::span<const double> x, std::size_t m,
                             double g, double exponent) {
  std::vector<double> theta(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    theta[j] = 0.5 * kPi * std::pow(x[j], exponent);
  }
  return spherical(theta, m, g);
}

ObjectiveVector eval_degenerate(std::span<const double> x, std::size_t m,
                                double g) {
  std::vector<double> theta(m - 1);
  theta[0] = 0.5 * kPi * x[0];
  const double t = kPi / (4.0 * (1.0 + g));
  for (std::size_t j = 1; j + 1 < m; ++j) {
    theta[j] = t * (1.0 + 2.0 * g * x[j]);
  }
  return spherical(theta, m, g);
}

ObjectiveVector eval_dtlz7(std::span<const double> x, std::size_t m) {
  const double k = static_cast<double>(x.size() - m + 1);
  const double g = 1.0 + 9.0 / k * distance_sum(x, m, [](double v) { return v; });
  ObjectiveVector f(m);
  double h = static_cast<double>(m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    f[i] = x[i];
    h -= f[i] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * f[i]));
  }
  f[m - 1] = (1.0 + g) * h;
  return f;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(ProblemId id) {
  for (const auto& p : kNames) {
    if (p.id == id) return p.name;
  }
  return "unknown";
}

ProblemId parse_problem_id(std::string_view s) {
  for (const auto& p : kNames) {
    if (p.name == s) return p.id;
  }
  throw LookupError("unknown problem id '" + std::string(s) + "'");
}

void ProblemSpec::validate() const {
  if (m < 2) throw ConfigError("problem needs m >= 2");
  if (n < m) throw ConfigError("problem needs n >= m");
}

std::size_t default_k(ProblemId id) {
  switch (id) {
    case ProblemId::dtlz1:
      return 5;
    case ProblemId::dtlz7:
      return 20;
    default:
      return 10;
  }
}

ProblemSpec make_problem(ProblemId id, std::size_t m) {
  return make_problem(id, m, m + default_k(id) - 1);
}

ProblemSpec make_problem(ProblemId id, std::size_t m, std::size_t n) {
  ProblemSpec spec{id, m, n};
  spec.validate();
  return spec;
}

ObjectiveVector evaluate(const ProblemSpec& spec, std::span<const double> x) {
  spec.validate();
  if (x.size() != spec.n) {
    throw DomainError("expected " + std::to_string(spec.n) +
                      " decision variables, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("decision variable outside [0,1]");
    }
  }
  const std::size_t m = spec.m;
  switch (spec.id) {
    case ProblemId::dtlz1:
      return eval_dtlz1(x, m);
    case ProblemId::dtlz2:
      return eval_angular(x, m, g_sphere(x, m), 1.0);
    case ProblemId::dtlz3:
      return eval_angular(x, m, g_rastrigin(x, m), 1.0);
    case ProblemId::dtlz4:
      return eval_angular(x, m, g_sphere(x, m), 100.0);
    case ProblemId::dtlz5:
      return eval_degenerate(x, m, g_sphere(x, m));
    case ProblemId::dtlz6:
      return eval_degenerate(
          x, m, distance_sum(x, m, [](double v) { return std::pow(v, 0.1); }));
    case ProblemId::dtlz7:
      return eval_dtlz7(x, m);
    case ProblemId::cdtlz2: {
      auto f = eval_angular(x, m, g_sphere(x, m), 1.0);
      for (std::size_t i = 0; i + 1 < m; ++i) f[i] = std::pow(f[i], 4.0);
      f[m - 1] = f[m - 1] * f[m - 1];
      return f;
    }
  }
  throw LookupError("unhandled problem id");
}

double optimal_distance_value(ProblemId id) {
  switch (id) {
    case ProblemId::dtlz6:
    case ProblemId::dtlz7:
      return 0.0;
    default:
      return 0.5;
  }
}

ObjectiveVector front_point(const ProblemSpec& spec,
                            std::span<const double> position) {
  if (position.size() + 1 != spec.m) {
    throw DimensionError("front_point needs m-1 position variables");
  }
  std::vector<double> x(spec.n, optimal_distance_value(spec.id));
  std::copy(position.begin(), position.end(), x.begin());
  return evaluate(spec, x);
}

BoundsTable BoundsTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bounds file " + path.string());
  BoundsTable table;
  std::string line;
  std::size_t lineno = 0;
  const std::string file = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_commas(line);
    if (fields.size() < 2) throw FormatError(file, lineno, "too few fields");
    ProblemId id;
    try {
      id = parse_problem_id(fields[0]);
    } catch (const LookupError& e) {
      throw FormatError(file, lineno, e.what());
    }
    std::size_t m = 0;
    auto [p, ec] = std::from_chars(fields[1].data(),
                                   fields[1].data() + fields[1].size(), m);
    if (ec != std::errc() || p != fields[1].data() + fields[1].size() || m < 2) {
      throw FormatError(file, lineno, "bad objective count");
    }
    if (fields.size() != 2 + 2 * m) {
      throw FormatError(file, lineno,
                        "expected " + std::to_string(2 + 2 * m) + " fields");
    }
    NormalizationBounds b;
    for (std::size_t i = 0; i < 2 * m; ++i) {
      const auto f = fields[2 + i];
      double v = 0.0;
      auto [q, ec2] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec2 != std::errc() || q != f.data() + f.size() || !std::isfinite(v)) {
        throw FormatError(file, lineno, "bad value '" + std::string(f) + "'");
      }
      (i < m ? b.ideal : b.nadir).push_back(v);
    }
    try {
      b.validate();
    } catch (const BoundsError& e) {
      throw FormatError(file, lineno, e.what());
    }
    table.insert(id, m, std::move(b));
  }
  return table;
}

const BoundsTable& BoundsTable::shipped() {
  static const BoundsTable table = [] {
    const char* override_path = std::getenv("STOPBENCH_BOUNDS");
    const std::filesystem::path path =
        override_path != nullptr
            ? std::filesystem::path(override_path)
            : std::filesystem::path(STOPBENCH_DATA_DIR) / "bounds.csv";
    return load(path);
  }();
  return table;
}

std::optional<NormalizationBounds> BoundsTable::find(ProblemId id,
                                                     std::size_t m) const {
  auto it = entries_.find({id, m});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void BoundsTable::insert(ProblemId id, std::size_t m, NormalizationBounds b) {
  entries_[{id, m}] = std::move(b);
}

NormalizationBounds reference_bounds(const ProblemSpec& spec) {
  switch (spec.id) {
    case ProblemId::dtlz1:
    case ProblemId::dtlz2:
    case ProblemId::dtlz3:
    case ProblemId::dtlz4:
      return reference_bounds(spec, BoundsTable{});
    default:
      return reference_bounds(spec, BoundsTable::shipped());
  }
}

NormalizationBounds reference_bounds(const ProblemSpec& spec,
                                     const BoundsTable& table) {
  spec.validate();
  switch (spec.id) {
    case ProblemId::dtlz1:
      return {ObjectiveVector(spec.m, 0.0), ObjectiveVector(spec.m, 0.5)};
    case ProblemId::dtlz2:
    case ProblemId::dtlz3:
    case ProblemId::dtlz4:
      return {ObjectiveVector(spec.m, 0.0), ObjectiveVector(spec.m, 1.0)};
    default:
      break;
  }
  if (auto b = table.find(spec.id, spec.m)) return *b;
  throw LookupError("no reference bounds for " + std::string(to_string(spec.id)) +
                    " with m=" + std::to_string(spec.m) +
                    "; generate them with stopbench-sample-bounds");
}

}  // namespace stopbench
