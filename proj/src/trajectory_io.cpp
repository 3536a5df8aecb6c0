#include "pdmp/trajectory_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr std::string_view kMagic = "# pdmpnet-trajectory v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_state(std::ostream& os, std::span<const double> x) {
  for (double v : x) os << ',' << fmt(v);
  os << '\n';
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("trajectory line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("trajectory line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.dim();
  os << kMagic << '\n';
  os << "# model=" << (traj.model_id.empty() ? "-" : traj.model_id) << " seed=" << traj.seed << " n=" << n
     << " t_end=" << fmt(traj.t_end) << '\n';
  os << "record,t,i,j,xi,amount";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  os << '\n';
  os << "init," << fmt(traj.x0.t) << ",,,,";
  write_state(os, traj.x0.x);
  for (std::size_t k = 0; k < traj.events.size(); ++k) {
    const auto& e = traj.events[k];
    os << "event," << fmt(e.t) << ',' << e.edge.from + 1 << ',' << e.edge.to + 1 << ',' << fmt(e.xi) << ','
       << fmt(e.amount);
    write_state(os, traj.post_state(k));
  }
  for (const auto& s : traj.samples) {
    os << "sample," << fmt(s.t) << ",,,,";
    write_state(os, s.x);
  }
}

std::string trajectory_to_string(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory(os, traj);
  return os.str();
}

Trajectory read_trajectory(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() {
    if (!std::getline(is, line)) throw ConfigError("trajectory file ends early");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next();
  if (line != kMagic) throw ConfigError("not a version-1 trajectory file");

  Trajectory traj;
  std::size_t n = 0;
  bool have_n = false;
  bool have_t_end = false;
  next();
  if (line.rfind("# ", 0) != 0) throw ConfigError("trajectory metadata line missing");
  std::istringstream meta(line.substr(2));
  std::string kv;
  while (meta >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("bad metadata entry '" + kv + "'");
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    if (key == "model") {
      traj.model_id = val == "-" ? "" : val;
    } else if (key == "seed") {
      traj.seed = parse_u64(val, line_no);
    } else if (key == "n") {
      n = parse_u64(val, line_no);
      have_n = true;
    } else if (key == "t_end") {
      traj.t_end = parse_double(val, line_no);
      have_t_end = true;
    } else {
      throw ConfigError("unknown metadata key '" + key + "'");
    }
  }
  if (!have_n || !have_t_end) throw ConfigError("trajectory metadata needs n and t_end");

  next();
  const auto header = split(line, ',');
  if (header.size() != 6 + n || header[0] != "record") throw ConfigError("trajectory column header mismatch");

  bool have_init = false;
  double last_t = 0.0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6 + n) {
      throw ConfigError("trajectory line " + std::to_string(line_no) + ": expected " + std::to_string(6 + n) +
                        " fields");
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = parse_double(f[6 + i], line_no);
    const double t = parse_double(f[1], line_no);
    if (f[0] == "init") {
      if (have_init) throw ConfigError("duplicate init record");
      traj.x0 = State{std::move(x), t};
      have_init = true;
    } else if (f[0] == "event") {
      if (!have_init) throw ConfigError("event before init record");
      const auto i = parse_u64(f[2], line_no);
      const auto j = parse_u64(f[3], line_no);
      if (i < 1 || j < 1 || i > n || j > n || i == j) {
        throw ConfigError("trajectory line " + std::to_string(line_no) + ": bad edge");
      }
      if (!traj.events.empty() && !(t > last_t)) {
        throw ConfigError("trajectory line " + std::to_string(line_no) + ": event times must increase");
      }
      last_t = t;
      traj.events.push_back({t, Edge{i - 1, j - 1}, parse_double(f[4], line_no), parse_double(f[5], line_no)});
      traj.post_states.insert(traj.post_states.end(), x.begin(), x.end());
    } else if (f[0] == "sample") {
      traj.samples.push_back({t, std::move(x)});
    } else {
      throw ConfigError("trajectory line " + std::to_string(line_no) + ": unknown record '" + f[0] + "'");
    }
  }
  if (!have_init) throw ConfigError("trajectory has no init record");
  traj.event_count = traj.events.size();
  return traj;
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open trajectory file " + path);
  return read_trajectory(is);
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_trajectory(os, traj);
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace pdmp
