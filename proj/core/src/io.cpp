#include "tafp/io.hpp"

#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "tafp/error.hpp"

namespace tafp {

namespace json_io {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

Json to_json(const StackSpec& s) {
  Json layers = Json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"si_height_um", l.si_height_um},
                      {"sio2_height_um", l.sio2_height_um},
                      {"epoxy_height_um", l.epoxy_height_um}});
  }
  return {{"width_um", s.width_um},       {"length_um", s.length_um},
          {"cell_xy_um", s.cell_xy_um},   {"ambient_K", s.ambient_K},
          {"layers", std::move(layers)}};
}

StackSpec stack_from(const Json& j) {
  StackSpec s;
  s.width_um = get_or(j, "width_um", s.width_um);
  s.length_um = get_or(j, "length_um", s.length_um);
  s.cell_xy_um = get_or(j, "cell_xy_um", s.cell_xy_um);
  s.ambient_K = get_or(j, "ambient_K", s.ambient_K);
  for (const auto& l : require(j, "layers")) {
    LayerSpec ls;
    ls.si_height_um = get_or(l, "si_height_um", ls.si_height_um);
    ls.sio2_height_um = get_or(l, "sio2_height_um", ls.sio2_height_um);
    ls.epoxy_height_um = get_or(l, "epoxy_height_um", ls.epoxy_height_um);
    s.layers.push_back(ls);
  }
  s.validate();
  return s;
}

Json to_json(const AirWall& w) {
  return {{"layer", w.layer},
          {"axis", w.axis == WallAxis::kX ? "x" : "y"},
          {"position_um", w.position_um},
          {"side", w.side == WallSide::kLeft ? "left" : "right"},
          {"thickness_cells", w.thickness_cells}};
}

AirWall wall_from(const Json& j) {
  AirWall w;
  w.layer = require(j, "layer").get<int>();
  const auto axis = get_or<std::string>(j, "axis", "x");
  const auto side = get_or<std::string>(j, "side", "left");
  if (axis != "x" && axis != "y") throw Error(ErrorCode::kParse, "wall axis must be x or y");
  if (side != "left" && side != "right") {
    throw Error(ErrorCode::kParse, "wall side must be left or right");
  }
  w.axis = axis == "x" ? WallAxis::kX : WallAxis::kY;
  w.side = side == "left" ? WallSide::kLeft : WallSide::kRight;
  w.position_um = require(j, "position_um").get<double>();
  w.thickness_cells = get_or(j, "thickness_cells", 1);
  return w;
}

Json to_json(const Floorplan& fp) {
  Json placements = Json::array();
  for (const auto& p : fp.placements) {
    placements.push_back(
        {{"fu_id", p.fu_id}, {"x", p.x}, {"y", p.y}, {"z", p.z}, {"rotated", p.rotated}});
  }
  Json tsvs = Json::array();
  for (const auto& t : fp.tsvs) tsvs.push_back({{"x", t.x}, {"y", t.y}, {"to_layer", t.to_layer}});
  Json channels = Json::array();
  for (const auto& c : fp.liquid_channels) {
    channels.push_back({{"x", c.x},
                        {"layer", c.layer},
                        {"h_conv_W_per_m2K", c.h_conv_W_per_m2K},
                        {"flow_W_per_K", c.flow_W_per_K},
                        {"coolant", c.coolant}});
  }
  Json walls = Json::array();
  for (const auto& w : fp.air_walls) walls.push_back(to_json(w));
  return {{"stack", to_json(fp.stack)},
          {"placements", std::move(placements)},
          {"tsvs", std::move(tsvs)},
          {"liquid_channels", std::move(channels)},
          {"air_walls", std::move(walls)}};
}

Floorplan floorplan_from(const Json& j) {
  Floorplan fp;
  fp.stack = stack_from(require(j, "stack"));
  for (const auto& p : get_or(j, "placements", Json::array())) {
    fp.placements.push_back({require(p, "fu_id").get<int>(), require(p, "x").get<int>(),
                             require(p, "y").get<int>(), require(p, "z").get<int>(),
                             get_or(p, "rotated", false)});
  }
  for (const auto& t : get_or(j, "tsvs", Json::array())) {
    fp.tsvs.push_back({require(t, "x").get<int>(), require(t, "y").get<int>(),
                       require(t, "to_layer").get<int>()});
  }
  for (const auto& c : get_or(j, "liquid_channels", Json::array())) {
    LiquidChannel ch;
    ch.x = require(c, "x").get<int>();
    ch.layer = require(c, "layer").get<int>();
    ch.h_conv_W_per_m2K = require(c, "h_conv_W_per_m2K").get<double>();
    ch.flow_W_per_K = require(c, "flow_W_per_K").get<double>();
    ch.coolant = get_or<std::string>(c, "coolant", "water");
    fp.liquid_channels.push_back(std::move(ch));
  }
  for (const auto& w : get_or(j, "air_walls", Json::array())) fp.air_walls.push_back(wall_from(w));
  return fp;
}

Json to_json(const Problem& p) {
  Json mats = Json::object();
  for (const auto& [name, m] : p.materials.all()) {
    mats[name] = {{"k_W_per_mK", m.k_W_per_mK},
                  {"k_quad_W_per_mK2", m.k_quad_W_per_mK2},
                  {"c_vol_J_per_m3K", m.c_vol_J_per_m3K}};
  }
  Json units = Json::array();
  for (const auto& u : p.units) {
    units.push_back({{"id", u.id},
                     {"label", u.label},
                     {"width_cells", u.width_cells},
                     {"length_cells", u.length_cells},
                     {"power_W", u.power_W},
                     {"kind", u.kind == FuKind::kHeatSource ? "heat_source" : "heat_sink"}});
  }
  Json nets = Json::array();
  for (const auto& n : p.netlist) nets.push_back({n.a, n.b});
  const auto& c = p.constraints;
  Json walls = Json::array();
  for (const auto& w : c.air_walls) walls.push_back(to_json(w));
  Json overrides = Json::object();
  for (const auto& [label, r] : c.regions.overrides) overrides[label] = std::string(to_string(r));
  Json regions = {{"hot_side", c.regions.hot_side == HotSide::kNear ? "near" : "far"},
                  {"threshold_W_per_cell", c.regions.threshold_W_per_cell
                                               ? Json(*c.regions.threshold_W_per_cell)
                                               : Json(nullptr)},
                  {"overrides", std::move(overrides)}};
  Json constraints = {{"layer_pitch_cells", c.layer_pitch_cells},
                      {"coincident_distance_cells", c.coincident_distance_cells},
                      {"air_walls", std::move(walls)},
                      {"regions", std::move(regions)},
                      {"min_tsvs", c.min_tsvs},
                      {"max_channels", c.max_channels ? Json(*c.max_channels) : Json(nullptr)},
                      {"tsv_route_vertical", c.tsv_route_vertical},
                      {"f7_silicon_only", c.f7_silicon_only}};
  const auto& t = p.thermal;
  Json thermal = {
      {"h_top_W_per_m2K", t.h_top_W_per_m2K},
      {"h_side_W_per_m2K", t.h_side_W_per_m2K},
      {"coolant_inlet_K", t.coolant_inlet_K ? Json(*t.coolant_inlet_K) : Json(nullptr)},
      {"channel_h_conv_W_per_m2K", t.channel_h_conv_W_per_m2K},
      {"channel_flow_W_per_K", t.channel_flow_W_per_K},
      {"si_temperature_dependent", t.si_temperature_dependent},
      {"si_reference_K", t.si_reference_K},
      {"air_k_override_W_per_mK",
       t.air_k_override_W_per_mK ? Json(*t.air_k_override_W_per_mK) : Json(nullptr)},
      {"picard_tolerance_K", t.picard_tolerance_K},
      {"picard_max_iterations", t.picard_max_iterations}};
  return {{"stack", to_json(p.stack)}, {"materials", std::move(mats)},
          {"units", std::move(units)}, {"netlist", std::move(nets)},
          {"constraints", std::move(constraints)}, {"thermal", std::move(thermal)}};
}

Problem problem_from(const Json& j) {
  Problem p;
  p.stack = stack_from(require(j, "stack"));
  p.materials = materials::reference_table();
  const Json mats = get_or(j, "materials", Json::object());
  for (const auto& [name, m] : mats.items()) {
    Material mat = p.materials.contains(name) ? p.materials.at(name) : Material{name};
    mat.name = name;
    mat.k_W_per_mK = get_or(m, "k_W_per_mK", mat.k_W_per_mK);
    mat.k_quad_W_per_mK2 = get_or(m, "k_quad_W_per_mK2", mat.k_quad_W_per_mK2);
    mat.c_vol_J_per_m3K = get_or(m, "c_vol_J_per_m3K", mat.c_vol_J_per_m3K);
    p.materials.set(std::move(mat));
  }
  for (const auto& u : require(j, "units")) {
    FunctionalUnit fu;
    fu.id = require(u, "id").get<int>();
    fu.label = get_or<std::string>(u, "label", "fu" + std::to_string(fu.id));
    fu.width_cells = require(u, "width_cells").get<int>();
    fu.length_cells = require(u, "length_cells").get<int>();
    fu.power_W = get_or(u, "power_W", 0.0);
    const auto kind = get_or<std::string>(u, "kind", "heat_sink");
    if (kind != "heat_source" && kind != "heat_sink") {
      throw Error(ErrorCode::kParse, "unit kind must be heat_source or heat_sink");
    }
    fu.kind = kind == "heat_source" ? FuKind::kHeatSource : FuKind::kHeatSink;
    p.units.push_back(std::move(fu));
  }
  for (const auto& n : get_or(j, "netlist", Json::array())) {
    if (!n.is_array() || n.size() != 2) throw Error(ErrorCode::kParse, "nets are [a, b] pairs");
    p.netlist.push_back({n[0].get<int>(), n[1].get<int>()});
  }
  const Json c = get_or(j, "constraints", Json::object());
  auto& pc = p.constraints;
  pc.layer_pitch_cells = get_or(c, "layer_pitch_cells", pc.layer_pitch_cells);
  pc.coincident_distance_cells = get_or(c, "coincident_distance_cells", pc.coincident_distance_cells);
  for (const auto& w : get_or(c, "air_walls", Json::array())) pc.air_walls.push_back(wall_from(w));
  const Json r = get_or(c, "regions", Json::object());
  const auto side = get_or<std::string>(r, "hot_side", "near");
  if (side != "near" && side != "far") throw Error(ErrorCode::kParse, "hot_side must be near or far");
  pc.regions.hot_side = side == "near" ? HotSide::kNear : HotSide::kFar;
  if (r.contains("threshold_W_per_cell") && !r["threshold_W_per_cell"].is_null()) {
    pc.regions.threshold_W_per_cell = r["threshold_W_per_cell"].get<double>();
  }
  const Json overrides = get_or(r, "overrides", Json::object());
  for (const auto& [label, v] : overrides.items()) {
    const auto s = v.get<std::string>();
    if (s != "hot" && s != "warm") throw Error(ErrorCode::kParse, "region must be hot or warm");
    pc.regions.overrides[label] = s == "hot" ? Region::kHot : Region::kWarm;
  }
  pc.min_tsvs = get_or(c, "min_tsvs", pc.min_tsvs);
  if (c.contains("max_channels") && !c["max_channels"].is_null()) {
    pc.max_channels = c["max_channels"].get<int>();
  }
  pc.tsv_route_vertical = get_or(c, "tsv_route_vertical", pc.tsv_route_vertical);
  pc.f7_silicon_only = get_or(c, "f7_silicon_only", pc.f7_silicon_only);

  const Json t = get_or(j, "thermal", Json::object());
  auto& pt = p.thermal;
  pt.h_top_W_per_m2K = get_or(t, "h_top_W_per_m2K", pt.h_top_W_per_m2K);
  pt.h_side_W_per_m2K = get_or(t, "h_side_W_per_m2K", pt.h_side_W_per_m2K);
  if (t.contains("coolant_inlet_K") && !t["coolant_inlet_K"].is_null()) {
    pt.coolant_inlet_K = t["coolant_inlet_K"].get<double>();
  }
  pt.channel_h_conv_W_per_m2K = get_or(t, "channel_h_conv_W_per_m2K", pt.channel_h_conv_W_per_m2K);
  pt.channel_flow_W_per_K = get_or(t, "channel_flow_W_per_K", pt.channel_flow_W_per_K);
  pt.si_temperature_dependent = get_or(t, "si_temperature_dependent", pt.si_temperature_dependent);
  pt.si_reference_K = get_or(t, "si_reference_K", pt.si_reference_K);
  if (t.contains("air_k_override_W_per_mK") && !t["air_k_override_W_per_mK"].is_null()) {
    pt.air_k_override_W_per_mK = t["air_k_override_W_per_mK"].get<double>();
  }
  pt.picard_tolerance_K = get_or(t, "picard_tolerance_K", pt.picard_tolerance_K);
  pt.picard_max_iterations = get_or(t, "picard_max_iterations", pt.picard_max_iterations);
  p.validate();
  return p;
}

}  // namespace json_io

namespace {

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

}  // namespace

std::string problem_to_json(const Problem& problem) {
  return json_io::to_json(problem).dump(2) + "\n";
}

Problem problem_from_json(std::string_view text) {
  return guarded([&] { return json_io::problem_from(json_io::parse(text)); });
}

std::string floorplan_to_json(const Floorplan& fp) { return json_io::to_json(fp).dump(2) + "\n"; }

Floorplan floorplan_from_json(std::string_view text) {
  return guarded([&] { return json_io::floorplan_from(json_io::parse(text)); });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Problem load_problem(const std::filesystem::path& path) {
  return problem_from_json(read_text_file(path));
}

void save_problem(const std::filesystem::path& path, const Problem& problem) {
  write_text_file(path, problem_to_json(problem));
}

Floorplan load_floorplan(const std::filesystem::path& path) {
  return floorplan_from_json(read_text_file(path));
}

void save_floorplan(const std::filesystem::path& path, const Floorplan& fp) {
  write_text_file(path, floorplan_to_json(fp));
}

}  // namespace tafp
