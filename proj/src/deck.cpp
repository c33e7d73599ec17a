#include "hybridvr/deck.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

using json = nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw ParseError(what); }

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) parse_fail(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) parse_fail("unknown key '" + it.key() + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) parse_fail(where + " must be an integer");
  return v.get<int>();
}

std::vector<double> as_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) parse_fail(where + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(as_number(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

Boundary as_boundary(const json& v, const std::string& where) {
  if (v == "vacuum") return Boundary::vacuum;
  if (v == "reflective") return Boundary::reflective;
  parse_fail(where + " must be \"vacuum\" or \"reflective\"");
}

const char* boundary_name(Boundary b) {
  return b == Boundary::vacuum ? "vacuum" : "reflective";
}

std::vector<int> cells_from_pairs(const json& v, const Mesh& mesh, const std::string& where) {
  if (!v.is_array()) parse_fail(where + " must be an array of [i, j] pairs");
  std::vector<int> cells;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const json& p = v[k];
    const std::string w = where + "[" + std::to_string(k) + "]";
    if (!p.is_array() || p.size() != 2) parse_fail(w + " must be an [i, j] pair");
    const int i = as_int(p[0], w);
    const int j = as_int(p[1], w);
    if (i < 0 || i >= mesh.nx || j < 0 || j >= mesh.ny)
      throw ValidationError(w + " is outside the mesh");
    cells.push_back(mesh.index(i, j));
  }
  return cells;
}

std::vector<int> cells_from_bbox(const json& v, const Mesh& mesh, const std::string& where) {
  const auto box = as_numbers(v, where);
  if (box.size() != 4) parse_fail(where + " must be [x0, x1, y0, y1]");
  std::vector<int> cells;
  for (int j = 0; j < mesh.ny; ++j) {
    const double yc = 0.5 * (mesh.y_edges[j] + mesh.y_edges[j + 1]);
    for (int i = 0; i < mesh.nx; ++i) {
      const double xc = 0.5 * (mesh.x_edges[i] + mesh.x_edges[i + 1]);
      if (xc >= box[0] && xc <= box[1] && yc >= box[2] && yc <= box[3])
        cells.push_back(mesh.index(i, j));
    }
  }
  if (cells.empty()) throw ValidationError(where + " selects no cells");
  return cells;
}

std::vector<int> region_cells(const json& obj, const Mesh& mesh, const std::string& where,
                              bool allow_point) {
  int given = static_cast<int>(obj.contains("cells")) + static_cast<int>(obj.contains("bbox")) +
              static_cast<int>(allow_point && obj.contains("point"));
  if (given != 1)
    parse_fail(where + std::string(" needs exactly one of cells, bbox") +
               (allow_point ? ", point" : ""));
  if (obj.contains("cells")) return cells_from_pairs(obj["cells"], mesh, where + ".cells");
  if (obj.contains("bbox")) return cells_from_bbox(obj["bbox"], mesh, where + ".bbox");
  const auto pt = as_numbers(obj["point"], where + ".point");
  if (pt.size() != 2) parse_fail(where + ".point must be [x, y]");
  const int c = mesh.locate(pt[0], pt[1]);
  if (c < 0) throw ValidationError(where + ".point is outside the mesh");
  return {c};
}

json cells_to_json(const std::vector<int>& cells, const Mesh& mesh) {
  json arr = json::array();
  for (int c : cells) arr.push_back({mesh.column(c), mesh.row(c)});
  return arr;
}

ProblemModel from_json(const json& root) {
  reject_unknown(root, "deck",
                 {"name", "groups", "mesh", "materials", "cell_map", "sources", "detectors"});
  ProblemModel model;
  if (root.contains("name")) {
    if (!root["name"].is_string()) parse_fail("name must be a string");
    model.name = root["name"].get<std::string>();
  }

  const json& groups = require(root, "groups", "deck");
  reject_unknown(groups, "groups", {"count"});
  model.xs.n_groups = as_int(require(groups, "count", "groups"), "groups.count");

  const json& mj = require(root, "mesh", "deck");
  reject_unknown(mj, "mesh", {"nx", "ny", "x_min", "x_max", "y_min", "y_max", "boundary"});
  Mesh& mesh = model.mesh;
  mesh.nx = as_int(require(mj, "nx", "mesh"), "mesh.nx");
  mesh.ny = as_int(require(mj, "ny", "mesh"), "mesh.ny");
  if (mesh.nx < 1 || mesh.ny < 1) throw ValidationError("mesh.nx and mesh.ny must be >= 1");
  const double x_min = as_number(require(mj, "x_min", "mesh"), "mesh.x_min");
  const double x_max = as_number(require(mj, "x_max", "mesh"), "mesh.x_max");
  const double y_min = as_number(require(mj, "y_min", "mesh"), "mesh.y_min");
  const double y_max = as_number(require(mj, "y_max", "mesh"), "mesh.y_max");
  if (!(x_max > x_min)) throw ValidationError("mesh.x_max must exceed mesh.x_min");
  if (!(y_max > y_min)) throw ValidationError("mesh.y_max must exceed mesh.y_min");
  mesh.x_edges = uniform_edges(x_min, x_max, mesh.nx);
  mesh.y_edges = uniform_edges(y_min, y_max, mesh.ny);
  const json& bj = require(mj, "boundary", "mesh");
  reject_unknown(bj, "mesh.boundary", {"west", "east", "south", "north"});
  const char* faces[4] = {"west", "east", "south", "north"};
  for (int f = 0; f < 4; ++f)
    mesh.boundary[f] = as_boundary(require(bj, faces[f], "mesh.boundary"),
                                   std::string("mesh.boundary.") + faces[f]);

  const json& mats = require(root, "materials", "deck");
  if (!mats.is_array()) parse_fail("materials must be an array");
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const std::string where = "materials[" + std::to_string(k) + "]";
    reject_unknown(mats[k], where, {"name", "sigma_t", "sigma_s"});
    Material mat;
    const json& name = require(mats[k], "name", where);
    if (!name.is_string()) parse_fail(where + ".name must be a string");
    mat.name = name.get<std::string>();
    mat.sigma_t = as_numbers(require(mats[k], "sigma_t", where), where + ".sigma_t");
    const json& ss = require(mats[k], "sigma_s", where);
    if (!ss.is_array()) parse_fail(where + ".sigma_s must be an array of rows");
    for (std::size_t g = 0; g < ss.size(); ++g)
      mat.sigma_s.push_back(as_numbers(ss[g], where + ".sigma_s[" + std::to_string(g) + "]"));
    model.xs.materials.push_back(std::move(mat));
  }

  const json& cm = require(root, "cell_map", "deck");
  if (!cm.is_array()) parse_fail("cell_map must be an array");
  for (std::size_t k = 0; k < cm.size(); ++k)
    mesh.cell_material.push_back(as_int(cm[k], "cell_map[" + std::to_string(k) + "]"));
  if (static_cast<int>(mesh.cell_material.size()) != mesh.cell_count())
    throw ValidationError("cell_map must have nx*ny = " + std::to_string(mesh.cell_count()) +
                          " entries, got " + std::to_string(mesh.cell_material.size()));

  if (root.contains("sources")) {
    const json& srcs = root["sources"];
    if (!srcs.is_array()) parse_fail("sources must be an array");
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      const std::string where = "sources[" + std::to_string(k) + "]";
      reject_unknown(srcs[k], where, {"kind", "cells", "bbox", "point", "spectrum", "strength"});
      SourceSpec src;
      const json& kind = require(srcs[k], "kind", where);
      if (kind == "cell_region")
        src.kind = SourceKind::cell_region;
      else if (kind == "point_in_cell")
        src.kind = SourceKind::point_in_cell;
      else
        parse_fail(where + ".kind must be \"cell_region\" or \"point_in_cell\"");
      if (src.kind == SourceKind::cell_region && srcs[k].contains("point"))
        parse_fail(where + ".point is only valid for point_in_cell sources");
      src.cells = region_cells(srcs[k], mesh, where, src.kind == SourceKind::point_in_cell);
      src.spectrum = as_numbers(require(srcs[k], "spectrum", where), where + ".spectrum");
      src.strength = as_number(require(srcs[k], "strength", where), where + ".strength");
      model.sources.push_back(std::move(src));
    }
  }

  if (root.contains("detectors")) {
    const json& dets = root["detectors"];
    if (!dets.is_array()) parse_fail("detectors must be an array");
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const std::string where = "detectors[" + std::to_string(k) + "]";
      reject_unknown(dets[k], where, {"name", "cells", "bbox", "sigma_d"});
      DetectorSpec det;
      if (dets[k].contains("name")) {
        if (!dets[k]["name"].is_string()) parse_fail(where + ".name must be a string");
        det.name = dets[k]["name"].get<std::string>();
      }
      det.cells = region_cells(dets[k], mesh, where, false);
      det.sigma_d = as_numbers(require(dets[k], "sigma_d", where), where + ".sigma_d");
      model.detectors.push_back(std::move(det));
    }
  }

  validate(model);
  return model;
}

json to_json(const ProblemModel& model) {
  const Mesh& mesh = model.mesh;
  json root;
  root["name"] = model.name;
  root["groups"] = {{"count", model.xs.n_groups}};
  root["mesh"] = {
      {"nx", mesh.nx},
      {"ny", mesh.ny},
      {"x_min", mesh.x_edges.front()},
      {"x_max", mesh.x_edges.back()},
      {"y_min", mesh.y_edges.front()},
      {"y_max", mesh.y_edges.back()},
      {"boundary",
       {{"west", boundary_name(mesh.boundary[0])},
        {"east", boundary_name(mesh.boundary[1])},
        {"south", boundary_name(mesh.boundary[2])},
        {"north", boundary_name(mesh.boundary[3])}}}};
  json mats = json::array();
  for (const auto& m : model.xs.materials)
    mats.push_back({{"name", m.name}, {"sigma_t", m.sigma_t}, {"sigma_s", m.sigma_s}});
  root["materials"] = mats;
  root["cell_map"] = mesh.cell_material;
  json srcs = json::array();
  for (const auto& s : model.sources) {
    srcs.push_back({{"kind", s.kind == SourceKind::cell_region ? "cell_region" : "point_in_cell"},
                    {"cells", cells_to_json(s.cells, mesh)},
                    {"spectrum", s.spectrum},
                    {"strength", s.strength}});
  }
  root["sources"] = srcs;
  json dets = json::array();
  for (const auto& d : model.detectors) {
    json dj = {{"cells", cells_to_json(d.cells, mesh)}, {"sigma_d", d.sigma_d}};
    if (!d.name.empty()) dj["name"] = d.name;
    dets.push_back(dj);
  }
  root["detectors"] = dets;
  return root;
}

}  // namespace

ProblemModel parse_deck(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("deck is not valid JSON: ") + e.what());
  }
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed deck: ") + e.what());
  }
}

ProblemModel load_deck(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open deck file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_deck(buf.str());
}

std::string deck_to_string(const ProblemModel& model) { return to_json(model).dump(1) + "\n"; }

void write_deck(const ProblemModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write deck file " + path.string());
  out << deck_to_string(model);
}

}  // namespace hybridvr
