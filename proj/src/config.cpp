// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <set>
#include <sstream>

#include "svilc/errors.hpp"

namespace svilc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ValidationError(field + ": " + what); }

const json* child(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
}

// Object check plus rejection of keys outside `known`, so typos do not pass silently.
void require_keys(const json& j, const std::string& field, std::initializer_list<const char*> known) {
  require_object(j, field);
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; });
    if (!ok) fail(field + "." + item.key(), "unknown key");
  }
}

double get_number(const json& obj, const char* key, const std::string& field, double fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) fail(field + "." + key, "expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) fail(field + "." + key, "must be finite");
  return d;
}

int get_int(const json& obj, const char* key, const std::string& field, int fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) fail(field + "." + key, "expected an integer");
  return v->get<int>();
}

bool get_bool(const json& obj, const char* key, const std::string& field, bool fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) fail(field + "." + key, "expected true or false");
  return v->get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& field, const std::string& fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) fail(field + "." + key, "expected a string");
  return v->get<std::string>();
}

Site parse_site(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    fail(field, "expected [x, y] with integer coordinates");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

json site_json(const Site& s) { return json::array({s.x, s.y}); }

std::vector<FeedPoint> parse_points(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected a list of sites");
  std::vector<FeedPoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (j[i].is_object()) {
      const json* s = child(j[i], "site");
      if (s == nullptr) fail(f, "missing site");
      out.push_back({parse_site(*s, f + ".site"), get_number(j[i], "weight", f, 1.0)});
    } else {
      out.push_back({parse_site(j[i], f), 1.0});
    }
  }
  return out;
}

json points_json(const std::vector<FeedPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) {
    if (p.magnitude == 1.0) {
      a.push_back(site_json(p.site));
    } else {
      a.push_back({{"site", site_json(p.site)}, {"weight", p.magnitude}});
    }
  }
  return a;
}

std::map<std::string, double> parse_feed_map(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object of feed name -> value");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) fail(field + "." + k, "expected a number");
    out[k] = v.get<double>();
  }
  return out;
}

std::vector<double> parse_grid(const json& j, const std::string& field) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) fail(field + "[" + std::to_string(i) + "]", "expected a number");
      grid.push_back(j[i].get<double>());
    }
  } else if (j.is_object()) {
    require_keys(j, field, {"start", "stop", "points"});
    const double a = get_number(j, "start", field, 0.0);
    const double b = get_number(j, "stop", field, 0.0);
    const int n = get_int(j, "points", field, 0);
    if (n < 2) fail(field + ".points", "needs at least 2 points");
    for (int i = 0; i < n; ++i) grid.push_back(a + (b - a) * i / (n - 1));
  } else {
    fail(field, "expected a list of values or {start, stop, points}");
  }
  if (grid.empty()) fail(field, "must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(field, "values must be strictly ascending");
  }
  return grid;
}

void parse_lattice(const json& j, LatticeSpec& l) {
  const std::string f = "lattice";
  require_keys(j, f, {"nx", "ny", "lattice_constant_nm", "barriers", "removed_sites"});
  l.nx = get_int(j, "nx", f, l.nx);
  l.ny = get_int(j, "ny", f, l.ny);
  l.lattice_constant_nm = get_number(j, "lattice_constant_nm", f, l.lattice_constant_nm);
  if (const json* b = child(j, "barriers")) {
    if (!b->is_array()) fail(f + ".barriers", "expected a list of {x, y_min, y_max} columns");
    l.barrier_sites.clear();
    for (std::size_t i = 0; i < b->size(); ++i) {
      const std::string bf = f + ".barriers[" + std::to_string(i) + "]";
      require_keys((*b)[i], bf, {"x", "y_min", "y_max"});
      const int x = get_int((*b)[i], "x", bf, 0);
      const int y0 = get_int((*b)[i], "y_min", bf, 1);
      const int y1 = get_int((*b)[i], "y_max", bf, l.ny);
      if (y1 < y0) fail(bf, "y_max is below y_min");
      for (int y = y0; y <= y1; ++y) {
        if (!l.contains({x, y})) fail(bf, "site " + to_string(Site{x, y}) + " outside lattice");
        l.barrier_sites.insert({x, y});
      }
    }
  }
  if (const json* r = child(j, "removed_sites")) {
    if (!r->is_array()) fail(f + ".removed_sites", "expected a list of [x, y]");
    l.hole_sites.clear();
    for (std::size_t i = 0; i < r->size(); ++i) {
      l.hole_sites.insert(parse_site((*r)[i], f + ".removed_sites[" + std::to_string(i) + "]"));
    }
  }
}

json lattice_json(const LatticeSpec& l) {
  json barriers = json::array();
  // Compress barrier sites into vertical runs.
  auto it = l.barrier_sites.begin();
  std::map<int, std::vector<int>> columns;
  for (; it != l.barrier_sites.end(); ++it) columns[it->x].push_back(it->y);
  for (auto& [x, ys] : columns) {
    std::sort(ys.begin(), ys.end());
    std::size_t i = 0;
    while (i < ys.size()) {
      std::size_t k = i;
      while (k + 1 < ys.size() && ys[k + 1] == ys[k] + 1) ++k;
      barriers.push_back({{"x", x}, {"y_min", ys[i]}, {"y_max", ys[k]}});
      i = k + 1;
    }
  }
  json removed = json::array();
  for (const auto& s : l.hole_sites) removed.push_back(site_json(s));
  return {{"nx", l.nx},
          {"ny", l.ny},
          {"lattice_constant_nm", l.lattice_constant_nm},
          {"barriers", barriers},
          {"removed_sites", removed}};
}

void parse_solver(const json& j, ScfOptions& scf, ChiOptions& chi) {
  require_keys(j, "solver", {"scf", "chi"});
  if (const json* s = child(j, "scf")) {
    const std::string f = "solver.scf";
    require_keys(*s, f, {"tol", "max_iter", "mixing", "anderson_depth", "pin_azimuth"});
    scf.tol = get_number(*s, "tol", f, scf.tol);
    scf.max_iter = get_int(*s, "max_iter", f, scf.max_iter);
    scf.mixing = get_number(*s, "mixing", f, scf.mixing);
    scf.anderson_depth = get_int(*s, "anderson_depth", f, scf.anderson_depth);
    scf.pin_azimuth = get_bool(*s, "pin_azimuth", f, scf.pin_azimuth);
    if (!(scf.tol > 0.0)) fail(f + ".tol", "must be positive");
    if (scf.max_iter < 1) fail(f + ".max_iter", "must be at least 1");
    if (!(scf.mixing > 0.0 && scf.mixing <= 1.0)) fail(f + ".mixing", "must lie in (0, 1]");
    if (scf.anderson_depth < 0) fail(f + ".anderson_depth", "must be non-negative");
  }
  if (const json* c = child(j, "chi")) {
    const std::string f = "solver.chi";
    require_keys(*c, f, {"tol", "max_iter", "regularization", "max_phase_step"});
    chi.tol = get_number(*c, "tol", f, chi.tol);
    chi.max_iter = get_int(*c, "max_iter", f, chi.max_iter);
    chi.regularization = get_number(*c, "regularization", f, chi.regularization);
    chi.max_phase_step = get_number(*c, "max_phase_step", f, chi.max_phase_step);
    if (!(chi.tol > 0.0)) fail(f + ".tol", "must be positive");
    if (chi.max_iter < 1) fail(f + ".max_iter", "must be at least 1");
    if (!(chi.regularization >= 0.0)) fail(f + ".regularization", "must be non-negative");
    if (!(chi.max_phase_step > 0.0)) fail(f + ".max_phase_step", "must be positive");
  }
}

RunConfig from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    static const std::set<std::string> known = {"preset", "lattice", "physics", "dcqs", "field", "feeds",
                                                "operating_point", "sweeps", "solver", "output_dir", "seed",
                                                "threads"};
    if (!known.count(key)) throw ValidationError(key + ": unknown key");
  }
  c.preset = get_string(doc, "preset", "config", "");
  QubitLayout& l = c.layout;
  l.name = c.preset.empty() ? std::string("custom") : c.preset;
  if (const json* j = child(doc, "lattice")) parse_lattice(*j, l.lattice);
  if (const json* j = child(doc, "physics")) {
    require_keys(*j, "physics", {"t_meV", "U_meV", "holes_per_svq", "n_electrons"});
    l.params.t_meV = get_number(*j, "t_meV", "physics", l.params.t_meV);
    l.params.U_meV = get_number(*j, "U_meV", "physics", l.params.U_meV);
    l.holes_per_svq = get_int(*j, "holes_per_svq", "physics", l.holes_per_svq);
    if (const json* n = child(*j, "n_electrons"); n != nullptr && !n->is_null()) {
      if (!n->is_number_integer()) fail("physics.n_electrons", "expected an integer or null");
      c.n_electrons = n->get<int>();
    }
    if (!(l.params.t_meV > 0.0)) fail("physics.t_meV", "must be positive");
    if (!(l.params.U_meV >= 0.0)) fail("physics.U_meV", "must be non-negative");
  }
  if (const json* j = child(doc, "dcqs")) {
    require_keys(*j, "dcqs", {"centers", "half_spacing"});
    if (const json* centers = child(*j, "centers")) {
      if (!centers->is_array()) fail("dcqs.centers", "expected a list of [x, y]");
      l.dcq_centers.clear();
      for (std::size_t i = 0; i < centers->size(); ++i) {
        l.dcq_centers.push_back(parse_site((*centers)[i], "dcqs.centers[" + std::to_string(i) + "]"));
      }
    }
    l.svq_half_spacing = get_number(*j, "half_spacing", "dcqs", l.svq_half_spacing);
  }
  if (const json* j = child(doc, "field")) {
    require_keys(*j, "field", {"cxx", "cx", "cyy", "cy", "c0", "gauge_offset"});
    l.field.cxx = get_number(*j, "cxx", "field", l.field.cxx);
    l.field.cx = get_number(*j, "cx", "field", l.field.cx);
    l.field.cyy = get_number(*j, "cyy", "field", l.field.cyy);
    l.field.cy = get_number(*j, "cy", "field", l.field.cy);
    l.field.c0 = get_number(*j, "c0", "field", l.field.c0);
    l.field.gauge_offset = get_number(*j, "gauge_offset", "field", l.field.gauge_offset);
  }
  if (const json* j = child(doc, "feeds")) {
    if (!j->is_array()) fail("feeds", "expected a list");
    l.feeds.clear();
    for (std::size_t i = 0; i < j->size(); ++i) {
      const std::string f = "feeds[" + std::to_string(i) + "]";
      require_keys((*j)[i], f, {"name", "sources", "drains"});
      FeedSpec feed;
      feed.name = get_string((*j)[i], "name", f, "");
      const json* s = child((*j)[i], "sources");
      const json* d = child((*j)[i], "drains");
      if (s == nullptr) fail(f + ".sources", "missing");
      if (d == nullptr) fail(f + ".drains", "missing");
      feed.sources = parse_points(*s, f + ".sources");
      feed.drains = parse_points(*d, f + ".drains");
      l.feeds.push_back(std::move(feed));
    }
  }
  if (const json* j = child(doc, "operating_point")) c.operating_point = parse_feed_map(*j, "operating_point");
  if (const json* j = child(doc, "sweeps")) {
    if (!j->is_array()) fail("sweeps", "expected a list");
    for (std::size_t i = 0; i < j->size(); ++i) {
      const std::string f = "sweeps[" + std::to_string(i) + "]";
      const json& s = (*j)[i];
      require_keys(s, f, {"name", "parameter", "grid", "fixed", "ratios", "refine_levels"});
      SweepSpec sp;
      sp.name = get_string(s, "name", f, "");
      if (sp.name.empty()) fail(f + ".name", "must not be empty");
      sp.parameter = get_string(s, "parameter", f, "");
      const json* g = child(s, "grid");
      if (g == nullptr) fail(f + ".grid", "missing");
      sp.grid = parse_grid(*g, f + ".grid");
      if (const json* x = child(s, "fixed")) sp.fixed = parse_feed_map(*x, f + ".fixed");
      if (const json* x = child(s, "ratios")) sp.ratios = parse_feed_map(*x, f + ".ratios");
      sp.refine_levels = get_int(s, "refine_levels", f, sp.refine_levels);
      c.sweeps.push_back(std::move(sp));
    }
  }
  if (const json* j = child(doc, "solver")) parse_solver(*j, l.scf, l.chi);
  c.output_dir = get_string(doc, "output_dir", "config", c.output_dir);
  if (const json* j = child(doc, "seed")) {
    if (!j->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j->get<std::uint64_t>();
  }
  c.threads = get_int(doc, "threads", "config", c.threads);
  validate_config(c);
  return c;
}

std::vector<SweepSpec> preset_sweeps(const std::string& name) {
  std::vector<SweepSpec> out;
  const auto grid = [](double a, double b, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
    return g;
  };
  if (name == "paper-3dcq") {
    out.push_back({"j4", "J4", grid(0.0, 1.2, 13), {}, {}, 3});
    out.push_back({"split124", "scale", grid(0.0, 0.3, 7), {}, {{"J1", 1.0}, {"J2", 2.0}, {"J3", 4.0}}, 3});
    out.push_back({"couple45", "scale", grid(0.0, 0.5, 6), {}, {{"J4", 1.0}, {"J5", 2.0}}, 3});
  } else if (name == "desk-1svq") {
    out.push_back({"j1", "J1", grid(-0.1, 0.1, 11), {}, {}, 3});
  }
  return out;
}

}  // namespace

Eigen::VectorXd RunConfig::operating_feeds() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.feeds.size()));
  for (const auto& [name, value] : operating_point) {
    const int i = layout.feed_index(name);
    if (i < 0) throw ValidationError("operating_point." + name + ": no feed with this name");
    v[i] = value;
  }
  return v;
}

const SweepSpec& RunConfig::sweep(const std::string& name) const {
  for (const auto& s : sweeps) {
    if (s.name == name) return s;
  }
  throw ValidationError("sweeps: no sweep named '" + name + "'");
}

QubitLayout resolved_layout(const RunConfig& config, const BondGraph& graph) {
  QubitLayout l = config.layout;
  assign_filling(l, graph);
  if (config.n_electrons) l.params.n_electrons = *config.n_electrons;
  l.params.validate(graph.n_sites());
  return l;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.layout = assemble_layout(name);
  c.sweeps = preset_sweeps(name);
  return c;
}

void validate_config(const RunConfig& c) {
  c.layout.validate();
  if (c.threads < 1) fail("threads", "must be at least 1");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
  if (c.n_electrons && *c.n_electrons <= 0) fail("physics.n_electrons", "must be positive");
  c.operating_feeds();
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.sweeps.size(); ++i) {
    const SweepSpec& s = c.sweeps[i];
    const std::string f = "sweeps[" + std::to_string(i) + "]";
    if (!names.insert(s.name).second) fail(f + ".name", "duplicate sweep name " + s.name);
    if (s.refine_levels < 0) fail(f + ".refine_levels", "must be non-negative");
    if (s.ratio_locked()) {
      for (const auto& [feed, r] : s.ratios) {
        if (c.layout.feed_index(feed) < 0) fail(f + ".ratios." + feed, "references an undeclared feed");
      }
    } else if (c.layout.feed_index(s.parameter) < 0) {
      fail(f + ".parameter", "references an undeclared feed '" + s.parameter + "'");
    }
    for (const auto& [feed, v] : s.fixed) {
      if (c.layout.feed_index(feed) < 0) fail(f + ".fixed." + feed, "references an undeclared feed");
      if (s.ratio_locked() ? s.ratios.count(feed) != 0 : feed == s.parameter) {
        fail(f + ".fixed." + feed, "is also the swept feed");
      }
    }
    if (s.grid.empty()) fail(f + ".grid", "must not be empty");
  }
}

RunConfig parse_config(const json& doc) {
  json merged = doc;
  if (doc.is_object() && doc.contains("preset")) {
    if (!doc["preset"].is_string()) fail("preset", "expected a string");
    merged = to_json(preset_config(doc["preset"].get<std::string>()));
    merged.merge_patch(doc);
  }
  return from_json(merged);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const RunConfig& c) {
  const QubitLayout& l = c.layout;
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  j["lattice"] = lattice_json(l.lattice);
  j["physics"] = {{"t_meV", l.params.t_meV},
                  {"U_meV", l.params.U_meV},
                  {"holes_per_svq", l.holes_per_svq},
                  {"n_electrons", c.n_electrons ? json(*c.n_electrons) : json(nullptr)}};
  json centers = json::array();
  for (const auto& s : l.dcq_centers) centers.push_back(site_json(s));
  j["dcqs"] = {{"centers", centers}, {"half_spacing", l.svq_half_spacing}};
  j["field"] = {{"cxx", l.field.cxx},
                {"cx", l.field.cx},
                {"cyy", l.field.cyy},
                {"cy", l.field.cy},
                {"c0", l.field.c0},
                {"gauge_offset", l.field.gauge_offset}};
  json feeds = json::array();
  for (const auto& f : l.feeds) {
    feeds.push_back({{"name", f.name}, {"sources", points_json(f.sources)}, {"drains", points_json(f.drains)}});
  }
  j["feeds"] = feeds;
  j["operating_point"] = json::object();
  for (const auto& [k, v] : c.operating_point) j["operating_point"][k] = v;
  json sweeps = json::array();
  for (const auto& s : c.sweeps) {
    json sj = {{"name", s.name}, {"parameter", s.parameter}, {"grid", s.grid}, {"refine_levels", s.refine_levels}};
    sj["fixed"] = json::object();
    for (const auto& [k, v] : s.fixed) sj["fixed"][k] = v;
    sj["ratios"] = json::object();
    for (const auto& [k, v] : s.ratios) sj["ratios"][k] = v;
    sweeps.push_back(sj);
  }
  j["sweeps"] = sweeps;
  j["solver"] = {{"scf",
                  {{"tol", l.scf.tol},
                   {"max_iter", l.scf.max_iter},
                   {"mixing", l.scf.mixing},
                   {"anderson_depth", l.scf.anderson_depth},
                   {"pin_azimuth", l.scf.pin_azimuth}}},
                 {"chi",
                  {{"tol", l.chi.tol},
                   {"max_iter", l.chi.max_iter},
                   {"regularization", l.chi.regularization},
                   {"max_phase_step", l.chi.max_phase_step}}}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

std::uint64_t config_hash(const RunConfig& c) {
  // Thread count and output location never change results, so they stay out of the hash.
  json j = to_json(c);
  j.erase("threads");
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

}  // namespace svilc
