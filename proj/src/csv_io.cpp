#include "hybridvr/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError(path.string() + ": bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw ParseError(path.string() + ": bad integer '" + s + "'");
  return static_cast<int>(v);
}

std::string map_comment(const ImportanceMap& map) {
  std::ostringstream os;
  os << "# method=" << to_string(map.method) << " R=" << format_double(map.R)
     << " rho=" << format_double(map.rho) << " nx=" << map.nx << " ny=" << map.ny
     << " groups=" << map.groups << "\n";
  return os.str();
}

struct MapFile {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<std::string>> rows;
};

MapFile read_map_file(const std::filesystem::path& path, const std::string& header) {
  auto in = open_in(path);
  MapFile f;
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string kv;
      while (is >> kv) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos) f.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      continue;
    }
    if (!seen_header) {
      if (line != header) throw ParseError(path.string() + ": expected header '" + header + "'");
      seen_header = true;
      continue;
    }
    f.rows.push_back(split(line, ','));
  }
  for (const char* key : {"method", "R", "rho", "nx", "ny", "groups"})
    if (!f.meta.count(key)) throw ParseError(path.string() + ": comment line lacks " + key);
  return f;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_scalar_flux(const std::filesystem::path& path, const ScalarFluxField& phi,
                       const Mesh& mesh) {
  auto out = open_out(path);
  out << "i,j,group,value\n";
  for (int c = 0; c < phi.cells(); ++c)
    for (int g = 0; g < phi.groups(); ++g)
      out << mesh.column(c) << ',' << mesh.row(c) << ',' << g << ',' << format_double(phi(c, g))
          << '\n';
}

ScalarFluxField read_scalar_flux(const std::filesystem::path& path, const Mesh& mesh,
                                 int groups) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "i,j,group,value")
    throw ParseError(path.string() + ": expected header 'i,j,group,value'");
  ScalarFluxField phi(mesh.cell_count(), groups);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ParseError(path.string() + ": malformed row '" + line + "'");
    const int i = to_int(f[0], path), j = to_int(f[1], path), g = to_int(f[2], path);
    if (i < 0 || i >= mesh.nx || j < 0 || j >= mesh.ny || g < 0 || g >= groups)
      throw ParseError(path.string() + ": row outside mesh '" + line + "'");
    phi(mesh.index(i, j), g) = to_double(f[3], path);
  }
  return phi;
}

void write_angular_flux(const std::filesystem::path& path, const AngularFluxField& psi,
                        const Mesh& mesh) {
  auto out = open_out(path);
  out << "i,j,group,dir,value\n";
  for (int c = 0; c < psi.cells(); ++c)
    for (int g = 0; g < psi.groups(); ++g)
      for (int m = 0; m < psi.directions(); ++m)
        out << mesh.column(c) << ',' << mesh.row(c) << ',' << g << ',' << m << ','
            << format_double(psi(c, g, m)) << '\n';
}

void write_weight_windows(const std::filesystem::path& path, const ImportanceMap& map) {
  auto out = open_out(path);
  out << map_comment(map) << "i,j,group,w_low,w_surv,w_high\n";
  for (int c = 0; c < map.cells(); ++c)
    for (int g = 0; g < map.groups; ++g)
      out << c % map.nx << ',' << c / map.nx << ',' << g << ',' << format_double(map.w_low(c, g))
          << ',' << format_double(map.w_surv(c, g)) << ',' << format_double(map.w_high(c, g))
          << '\n';
}

void write_biased_source(const std::filesystem::path& path, const ImportanceMap& map) {
  auto out = open_out(path);
  out << map_comment(map) << "i,j,group,q_hat,w0\n";
  for (int c = 0; c < map.cells(); ++c)
    for (int g = 0; g < map.groups; ++g)
      if (map.q_hat(c, g) > 0.0)
        out << c % map.nx << ',' << c / map.nx << ',' << g << ',' << format_double(map.q_hat(c, g))
            << ',' << format_double(map.w0(c, g)) << '\n';
}

ImportanceMap read_importance_map(const std::filesystem::path& ww_file,
                                  const std::filesystem::path& src_file) {
  const MapFile ww = read_map_file(ww_file, "i,j,group,w_low,w_surv,w_high");
  const MapFile src = read_map_file(src_file, "i,j,group,q_hat,w0");

  ImportanceMap map;
  const auto method = parse_vr_method(ww.meta.at("method"));
  if (!method) throw ParseError(ww_file.string() + ": unknown method " + ww.meta.at("method"));
  map.method = *method;
  map.R = to_double(ww.meta.at("R"), ww_file);
  map.rho = to_double(ww.meta.at("rho"), ww_file);
  map.nx = to_int(ww.meta.at("nx"), ww_file);
  map.ny = to_int(ww.meta.at("ny"), ww_file);
  map.groups = to_int(ww.meta.at("groups"), ww_file);
  if (map.nx < 1 || map.ny < 1 || map.groups < 1)
    throw ParseError(ww_file.string() + ": bad dimensions");
  for (const char* key : {"nx", "ny", "groups"})
    if (src.meta.at(key) != ww.meta.at(key))
      throw ParseError("weight-window and biased-source files disagree on " + std::string(key));

  const int C = map.cells(), G = map.groups;
  map.q_hat = CellGroupField(C, G);
  map.w0 = CellGroupField(C, G);
  map.w_low = CellGroupField(C, G);
  map.w_surv = CellGroupField(C, G);
  map.w_high = CellGroupField(C, G);

  auto cell_of = [&](const std::vector<std::string>& r, const std::filesystem::path& p,
                     std::size_t width) {
    if (r.size() != width) throw ParseError(p.string() + ": malformed row");
    const int i = to_int(r[0], p), j = to_int(r[1], p), g = to_int(r[2], p);
    if (i < 0 || i >= map.nx || j < 0 || j >= map.ny || g < 0 || g >= G)
      throw ParseError(p.string() + ": row outside the declared dimensions");
    return std::pair<int, int>{j * map.nx + i, g};
  };
  for (const auto& r : ww.rows) {
    const auto [c, g] = cell_of(r, ww_file, 6);
    map.w_low(c, g) = to_double(r[3], ww_file);
    map.w_surv(c, g) = to_double(r[4], ww_file);
    map.w_high(c, g) = to_double(r[5], ww_file);
  }
  for (const auto& r : src.rows) {
    const auto [c, g] = cell_of(r, src_file, 5);
    map.q_hat(c, g) = to_double(r[3], src_file);
    map.w0(c, g) = to_double(r[4], src_file);
  }
  return map;
}

std::filesystem::path ww_path(const std::string& prefix) { return prefix + ".ww.csv"; }
std::filesystem::path biased_source_path(const std::string& prefix) { return prefix + ".src.csv"; }

std::string tally_to_csv(const Tally& tally, bool include_timing) {
  std::ostringstream os;
  os << "group,mean,rel_err\n";
  for (int g = 0; g < tally.groups; ++g)
    os << g << ',' << format_double(tally.mean[g]) << ','
       << (tally.scored[g] ? format_double(tally.rel_err[g]) : std::string("nan")) << '\n';
  os << "total," << format_double(tally.total_mean) << ','
     << (tally.total_scored ? format_double(tally.total_rel_err) : std::string("nan")) << '\n';
  os << "histories," << tally.histories << '\n';
  if (include_timing) {
    os << "time_minutes," << format_double(tally.time_minutes) << '\n';
    const bool ok = tally.total_scored && tally.total_rel_err > 0.0 && tally.time_minutes > 0.0;
    os << "fom," << (ok ? format_double(fom(tally.time_minutes, tally.total_rel_err)) : "nan")
       << '\n';
  }
  return os.str();
}

void write_tally(const std::filesystem::path& path, const Tally& tally, bool include_timing) {
  auto out = open_out(path);
  out << tally_to_csv(tally, include_timing);
}

}  // namespace hybridvr
