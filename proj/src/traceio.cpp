#include "stopbench/traceio.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stopbench {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
}

// Lines of a file; a trailing newline does not start an extra line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
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

void append_vector(std::string& out, const ObjectiveVector& v, Encoding mode) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += encode_real(v[i], mode);
  }
  out += '\n';
}

ObjectiveVector parse_vector(std::string_view line, std::size_t m,
                             Encoding mode, const std::string& file,
                             std::size_t lineno) {
  const auto fields = split_fields(line);
  if (fields.size() != m) {
    throw FormatError(file, lineno,
                      "expected " + std::to_string(m) + " fields, got " +
                          std::to_string(fields.size()));
  }
  ObjectiveVector v;
  v.reserve(m);
  for (const auto f : fields) {
    try {
      v.push_back(decode_real(f, mode));
    } catch (const FormatError& e) {
      throw FormatError(file, lineno, e.what());
    }
  }
  return v;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

TraceArchive TraceArchive::in(const fs::path& dir) {
  return {dir / "meta.txt", dir / "fx.csv", dir / "id.csv"};
}

std::string encode_real(double x, Encoding mode) {
  if (!std::isfinite(x)) throw InputError("cannot encode a non-finite value");
  if (mode == Encoding::text) {
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), p);
  }
  const auto bits = std::bit_cast<std::uint64_t>(x);
  std::array<std::uint8_t, 8> bytes{};
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
  }
  std::string out;
  out.reserve(12);
  for (int i = 0; i < 8; i += 3) {
    const std::uint32_t b0 = bytes[i];
    const std::uint32_t b1 = i + 1 < 8 ? bytes[i + 1] : 0u;
    const std::uint32_t b2 = i + 2 < 8 ? bytes[i + 2] : 0u;
    const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
    out += kAlphabet[(triple >> 18) & 63];
    out += kAlphabet[(triple >> 12) & 63];
    out += i + 1 < 8 ? kAlphabet[(triple >> 6) & 63] : '=';
    out += i + 2 < 8 ? kAlphabet[triple & 63] : '=';
  }
  return out;
}

double decode_real(std::string_view field, Encoding mode) {
  if (mode == Encoding::text) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || p != field.data() + field.size() ||
        !std::isfinite(v)) {
      throw FormatError("malformed real '" + std::string(field) + "'");
    }
    return v;
  }
  if (field.size() != 12 || field[11] != '=') {
    throw FormatError("malformed base64 real '" + std::string(field) +
                      "' (expected 11 symbols and '=')");
  }
  std::uint64_t acc = 0;
  for (int i = 0; i < 11; ++i) {
    const int s = sextet(field[i]);
    if (s < 0) {
      throw FormatError("invalid base64 symbol in '" + std::string(field) + "'");
    }
    if (i < 10) {
      acc = (acc << 6) | static_cast<std::uint64_t>(s);
      continue;
    }
    // The last symbol carries 4 data bits and 2 bits of zero padding.
    if ((s & 3) != 0) {
      throw FormatError("non-canonical base64 real '" + std::string(field) + "'");
    }
    acc = (acc << 4) | static_cast<std::uint64_t>(s >> 2);
  }
  const double v = std::bit_cast<double>(acc);
  if (!std::isfinite(v)) {
    throw FormatError("base64 real '" + std::string(field) + "' is not finite");
  }
  return v;
}

TraceArchive write_compact(const RunTrace& trace, const fs::path& dir,
                           const ExtraMeta& extra) {
  trace.validate();
  ensure_dir(dir);
  const auto archive = TraceArchive::in(dir);
  const auto& meta = trace.meta;

  std::string m;
  m += "m=" + std::to_string(meta.m) + "\n";
  m += "mu=" + std::to_string(meta.mu) + "\n";
  m += "lambda=" + std::to_string(meta.lambda) + "\n";
  m += "t_max=" + std::to_string(meta.t_max) + "\n";
  m += "problem=" + meta.problem_id + "\n";
  m += "algorithm=" + meta.algorithm_id + "\n";
  m += "seed=" + std::to_string(meta.seed) + "\n";
  m += "encoding=" + std::string(to_string(meta.encoding)) + "\n";
  for (const auto& [k, v] : extra) m += k + "=" + v + "\n";
  write_file(archive.meta_path, m);

  std::string fx;
  for (const auto& p : trace.all_points) append_vector(fx, p, meta.encoding);
  write_file(archive.fx_path, fx);

  std::string id;
  for (const auto& row : trace.memberships) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) id += ',';
      id += std::to_string(row[i]);
    }
    id += '\n';
  }
  write_file(archive.id_path, id);
  return archive;
}

namespace {

struct MetaFile {
  RunMeta meta;
  ExtraMeta extra;
};

MetaFile parse_meta(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string file = path.string();
  const auto lines = split_lines(text);
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw FormatError(file, i + 1, "expected key=value");
    }
    std::string key(line.substr(0, eq));
    if (kv.count(key) != 0) {
      throw FormatError(file, i + 1, "duplicate key '" + key + "'");
    }
    kv[key] = {std::string(line.substr(eq + 1)), i + 1};
  }
  const std::size_t eof_line = lines.size() + 1;
  auto take = [&](const std::string& key) -> std::pair<std::string, std::size_t> {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(file, eof_line, "missing key '" + key + "'");
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_uint = [&](const std::string& key) -> std::uint64_t {
    const auto [value, line] = take(key);
    std::uint64_t out = 0;
    if (!parse_uint(value, out)) {
      throw FormatError(file, line, "key '" + key + "' needs an unsigned integer");
    }
    return out;
  };

  MetaFile mf;
  mf.meta.m = take_uint("m");
  mf.meta.mu = take_uint("mu");
  mf.meta.lambda = take_uint("lambda");
  mf.meta.t_max = take_uint("t_max");
  mf.meta.problem_id = take("problem").first;
  mf.meta.algorithm_id = take("algorithm").first;
  mf.meta.seed = take_uint("seed");
  {
    const auto [value, line] = take("encoding");
    try {
      mf.meta.encoding = parse_encoding(value);
    } catch (const ConfigError& e) {
      throw FormatError(file, line, e.what());
    }
  }
  try {
    mf.meta.validate();
  } catch (const InputError& e) {
    throw FormatError(file, eof_line, e.what());
  }
  for (auto& [k, v] : kv) mf.extra[k] = v.first;
  return mf;
}

}  // namespace

RunMeta read_meta(const fs::path& meta_path) { return parse_meta(meta_path).meta; }

ExtraMeta read_extra_meta(const fs::path& meta_path) {
  return parse_meta(meta_path).extra;
}

RunTrace read_compact(const TraceArchive& archive) {
  RunTrace trace;
  trace.meta = read_meta(archive.meta_path);
  const auto& meta = trace.meta;

  {
    const std::string file = archive.fx_path.string();
    const std::string text = read_file(archive.fx_path);
    const auto lines = split_lines(text);
    if (lines.size() != meta.fe_max()) {
      throw FormatError(file, lines.size(),
                        "has " + std::to_string(lines.size()) +
                            " lines, meta implies mu + lambda*(t_max-1) = " +
                            std::to_string(meta.fe_max()));
    }
    trace.all_points.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      trace.all_points.push_back(
          parse_vector(lines[i], meta.m, meta.encoding, file, i + 1));
    }
  }
  {
    const std::string file = archive.id_path.string();
    const std::string text = read_file(archive.id_path);
    const auto lines = split_lines(text);
    if (lines.size() != meta.t_max) {
      throw FormatError(file, lines.size(),
                        "has " + std::to_string(lines.size()) +
                            " lines, meta says t_max = " +
                            std::to_string(meta.t_max));
    }
    trace.memberships.reserve(lines.size());
    for (std::size_t t = 1; t <= lines.size(); ++t) {
      const auto fields = split_fields(lines[t - 1]);
      if (fields.size() != meta.mu) {
        throw FormatError(file, t,
                          "expected " + std::to_string(meta.mu) + " ids, got " +
                              std::to_string(fields.size()));
      }
      const EvalCount limit = fe_of_iteration(meta, t);
      std::vector<std::uint32_t> row;
      row.reserve(fields.size());
      for (const auto f : fields) {
        std::uint32_t id = 0;
        if (!parse_uint(f, id)) {
          throw FormatError(file, t, "malformed id '" + std::string(f) + "'");
        }
        if (id < 1 || id > limit) {
          throw FormatError(file, t,
                            "id " + std::to_string(id) + " outside [1, " +
                                std::to_string(limit) + "]");
        }
        row.push_back(id);
      }
      trace.memberships.push_back(std::move(row));
    }
  }
  return trace;
}

fs::path naive_file(const fs::path& dir, Iteration t) {
  return dir / ("fP_" + std::to_string(t) + ".csv");
}

std::vector<fs::path> write_naive(const RunTrace& trace, const fs::path& dir) {
  trace.validate();
  ensure_dir(dir);
  std::vector<fs::path> files;
  files.reserve(trace.meta.t_max);
  for (Iteration t = 1; t <= trace.meta.t_max; ++t) {
    std::string content;
    for (auto id : trace.memberships[t - 1]) {
      append_vector(content, trace.all_points[id - 1], trace.meta.encoding);
    }
    files.push_back(naive_file(dir, t));
    write_file(files.back(), content);
  }
  return files;
}

std::vector<ObjectiveVector> read_naive_file(const fs::path& path,
                                             std::size_t m, Encoding mode) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  std::vector<ObjectiveVector> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(parse_vector(lines[i], m, mode, path.string(), i + 1));
  }
  return out;
}

PopulationSnapshot snapshot(const RunTrace& trace, Iteration t) {
  if (t < 1 || t > trace.memberships.size()) {
    throw RangeError("iteration " + std::to_string(t) + " outside [1, " +
                     std::to_string(trace.memberships.size()) + "]");
  }
  PopulationSnapshot snap;
  snap.iteration = t;
  const auto& row = trace.memberships[t - 1];
  snap.members.reserve(row.size());
  for (auto id : row) snap.members.push_back(trace.all_points.at(id - 1));
  return snap;
}

std::vector<ObjectiveVector> unbounded_archive(const RunTrace& trace,
                                               Iteration t) {
  const auto count = fe_of_iteration(trace.meta, t);
  if (count > trace.all_points.size()) {
    throw RangeError("trace is shorter than its meta claims");
  }
  return nondominated_subset(std::span<const ObjectiveVector>(
      trace.all_points.data(), static_cast<std::size_t>(count)));
}

std::uintmax_t compact_size(const TraceArchive& archive) {
  return fs::file_size(archive.meta_path) + fs::file_size(archive.fx_path) +
         fs::file_size(archive.id_path);
}

}  // namespace stopbench
