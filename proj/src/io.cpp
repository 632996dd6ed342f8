#include "visopt/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "visopt/errors.hpp"
#include "visopt/hash.hpp"

namespace visopt::io {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("expected a 3-element array for a vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json box_to_json(const ObjectBox& b, bool with_id) {
  json j;
  if (with_id) j["id"] = b.id;
  j["center"] = vec_to_json(b.center);
  j["size"] = vec_to_json(b.size);
  j["yaw"] = b.yaw;
  return j;
}

ObjectBox box_from_json(const json& j, bool with_id) {
  ObjectBox b;
  if (with_id) b.id = j.at("id").get<std::int32_t>();
  b.center = vec_from_json(j.at("center"));
  b.size = vec_from_json(j.at("size"));
  b.yaw = j.at("yaw").get<double>();
  return b;
}

json environment_to_json(const Environment& env) {
  json boxes = json::array();
  for (const ObjectBox& b : env.static_boxes)
    boxes.push_back(box_to_json(b, false));
  json ground;
  ground["min_x"] = env.ground.min_x;
  ground["max_x"] = env.ground.max_x;
  ground["min_z"] = env.ground.min_z;
  ground["max_z"] = env.ground.max_z;
  ground["y"] = env.ground.y;
  return json{{"boxes", std::move(boxes)}, {"ground", std::move(ground)}};
}

Environment environment_from_json(const json& j) {
  Environment env;
  for (const json& b : j.at("boxes")) {
    ObjectBox box = box_from_json(b, false);
    box.id = -1;  // environment boxes get ids at render time
    env.static_boxes.push_back(box);
  }
  const json& g = j.at("ground");
  env.ground.min_x = g.at("min_x").get<double>();
  env.ground.max_x = g.at("max_x").get<double>();
  env.ground.min_z = g.at("min_z").get<double>();
  env.ground.max_z = g.at("max_z").get<double>();
  env.ground.y = g.at("y").get<double>();
  return env;
}

json rails_to_json(const std::vector<VirtualRail>& rails) {
  json arr = json::array();
  for (const VirtualRail& r : rails)
    arr.push_back(json{{"p1", vec_to_json(r.p1)}, {"p2", vec_to_json(r.p2)}});
  return arr;
}

std::vector<VirtualRail> rails_from_json(const json& j) {
  std::vector<VirtualRail> rails;
  for (const json& r : j)
    rails.push_back(
        VirtualRail{vec_from_json(r.at("p1")), vec_from_json(r.at("p2"))});
  return rails;
}

// Little-endian scalar packing for the binary payloads.
void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
  s.push_back(char((v >> 16) & 0xff));
  s.push_back(char((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

void put_f32(std::string& s, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(s, u);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t u = get_u32(p);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void put_i32(std::string& s, std::int32_t v) {
  put_u32(s, static_cast<std::uint32_t>(v));
}

std::int32_t get_i32(const unsigned char* p) {
  return static_cast<std::int32_t>(get_u32(p));
}

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Header line + payload split for the binary formats.
std::pair<std::string, std::string> split_header(const std::string& content,
                                                 const std::string& path) {
  const std::size_t nl = content.find('\n');
  if (nl == std::string::npos)
    throw ParseError(path + ": missing header line");
  return {content.substr(0, nl), content.substr(nl + 1)};
}

std::string vismatrix_header(const VisibilityMatrix& vm) {
  json cols = json::array();
  for (const auto& [frame, id] : vm.columns)
    cols.push_back(json::array({frame, id}));
  json h;
  h["cols"] = vm.cols;
  h["columns"] = std::move(cols);
  h["height"] = vm.height;
  h["pitches"] = vm.pitches;
  h["positions"] = vm.positions;
  h["rails"] = vm.rail_count;
  h["rows"] = vm.rows;
  h["scenario_hash"] = hash_hex(vm.scenario_hash);
  h["width"] = vm.width;
  h["yaws"] = vm.yaws;
  return h.dump();
}

VisibilityMatrix vismatrix_from_header(const std::string& header,
                                       const std::string& path) {
  json h;
  try {
    h = json::parse(header);
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad matrix header: " + e.what());
  }
  try {
    VisibilityMatrix vm;
    vm.rows = h.at("rows").get<std::size_t>();
    vm.cols = h.at("cols").get<std::size_t>();
    vm.width = h.at("width").get<int>();
    vm.height = h.at("height").get<int>();
    vm.positions = h.at("positions").get<int>();
    vm.yaws = h.at("yaws").get<int>();
    vm.pitches = h.at("pitches").get<int>();
    vm.rail_count = h.at("rails").get<std::size_t>();
    vm.scenario_hash =
        std::stoull(h.at("scenario_hash").get<std::string>(), nullptr, 16);
    for (const json& c : h.at("columns"))
      vm.columns.emplace_back(c.at(0).get<std::size_t>(),
                              c.at(1).get<std::int32_t>());
    if (vm.columns.size() != vm.cols)
      throw ParseError(path + ": column map does not match column count");
    return vm;
  } catch (const json::exception& e) {
    throw ParseError(path + ": bad matrix header: " + e.what());
  }
}

std::string vismatrix_payload(const VisibilityMatrix& vm,
                              std::size_t row_count) {
  std::string payload;
  payload.reserve(row_count * vm.cols * 4);
  for (std::size_t k = 0; k < row_count * vm.cols; ++k)
    put_u32(payload, vm.counts[k]);
  return payload;
}

json rail_pose_to_json(const RailPose& rp) {
  json j;
  j["rail"] = rp.rail_index;
  j["t"] = rp.t;
  j["alpha"] = rp.alpha;
  j["beta"] = rp.beta;
  return j;
}

RailPose rail_pose_from_json(const json& j) {
  RailPose rp;
  rp.rail_index = j.at("rail").get<std::size_t>();
  rp.t = j.at("t").get<double>();
  rp.alpha = j.at("alpha").get<double>();
  rp.beta = j.at("beta").get<double>();
  return rp;
}

json canonical_to_json(const CanonicalPose& p) {
  json j;
  j["position"] = vec_to_json(p.position);
  j["yaw"] = p.yaw;
  j["pitch"] = p.pitch;
  return j;
}

CanonicalPose canonical_from_json(const json& j) {
  CanonicalPose p;
  p.position = vec_from_json(j.at("position"));
  p.yaw = j.at("yaw").get<double>();
  p.pitch = j.at("pitch").get<double>();
  return p;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path dir = target.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw ParseError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

Scenario load_scenario(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    Scenario sc;
    sc.environment = environment_from_json(j.at("environment"));
    sc.rails = rails_from_json(j.at("rails"));
    for (const json& f : j.at("frames")) {
      Frame frame;
      frame.id = f.at("id").get<std::int32_t>();
      for (const json& o : f.at("objects"))
        frame.objects.push_back(box_from_json(o, true));
      sc.frames.push_back(std::move(frame));
    }
    if (j.contains("focus_point"))
      sc.focus_point = vec_from_json(j.at("focus_point"));
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string scenario_to_json(const Scenario& scenario) {
  json j;
  j["environment"] = environment_to_json(scenario.environment);
  j["rails"] = rails_to_json(scenario.rails);
  json frames = json::array();
  for (const Frame& f : scenario.frames) {
    json objects = json::array();
    for (const ObjectBox& o : f.objects) objects.push_back(box_to_json(o, true));
    frames.push_back(json{{"id", f.id}, {"objects", std::move(objects)}});
  }
  j["frames"] = std::move(frames);
  if (scenario.focus_point)
    j["focus_point"] = vec_to_json(*scenario.focus_point);
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_file_atomic(path, scenario_to_json(scenario));
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  return fnv1a64(scenario_to_json(scenario));
}

PoseFile load_poses(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    PoseFile pf;
    if (j.contains("rail_poses"))
      for (const json& p : j.at("rail_poses"))
        pf.rail_poses.push_back(rail_pose_from_json(p));
    if (j.contains("canonical_poses"))
      for (const json& p : j.at("canonical_poses"))
        pf.canonical_poses.push_back(canonical_from_json(p));
    if (pf.rail_poses.empty() && pf.canonical_poses.empty())
      throw ParseError(path + ": no poses found");
    return pf;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_poses(const PoseFile& poses, const std::string& path) {
  json j;
  if (!poses.rail_poses.empty()) {
    json arr = json::array();
    for (const RailPose& rp : poses.rail_poses)
      arr.push_back(rail_pose_to_json(rp));
    j["rail_poses"] = std::move(arr);
  }
  if (!poses.canonical_poses.empty()) {
    json arr = json::array();
    for (const CanonicalPose& p : poses.canonical_poses)
      arr.push_back(canonical_to_json(p));
    j["canonical_poses"] = std::move(arr);
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<CanonicalPose> resolve_poses(const PoseFile& poses,
                                         const Scenario& scenario) {
  std::vector<CanonicalPose> out;
  for (const RailPose& rp : poses.rail_poses) {
    if (rp.rail_index >= scenario.rails.size())
      throw PreconditionError("pose references a missing rail");
    out.push_back(rail_to_canonical(scenario.rails[rp.rail_index], rp));
  }
  out.insert(out.end(), poses.canonical_poses.begin(),
             poses.canonical_poses.end());
  return out;
}

GeneratorSpec load_generator_spec(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    GeneratorSpec spec;
    spec.environment = environment_from_json(j.at("environment"));
    spec.rails = rails_from_json(j.at("rails"));
    if (j.contains("focus_point")) {
      spec.has_focus = true;
      spec.focus_point = vec_from_json(j.at("focus_point"));
    }
    const json& g = j.at("generator");
    FrameGenConfig& cfg = spec.generator;
    for (const json& lane : g.at("lanes")) {
      LaneSpec ls;
      ls.min_x = lane.at("min_x").get<double>();
      ls.max_x = lane.at("max_x").get<double>();
      ls.min_z = lane.at("min_z").get<double>();
      ls.max_z = lane.at("max_z").get<double>();
      ls.heading = lane.at("heading").get<double>();
      cfg.lanes.push_back(ls);
    }
    cfg.frame_count = g.at("frame_count").get<int>();
    cfg.min_objects = g.at("min_objects").get<int>();
    cfg.max_objects = g.at("max_objects").get<int>();
    cfg.ground_y = spec.environment.ground.y;
    const auto opt = [&g](const char* key, double& slot) {
      if (g.contains(key)) slot = g.at(key).get<double>();
    };
    opt("min_width", cfg.min_width);
    opt("max_width", cfg.max_width);
    opt("min_height", cfg.min_height);
    opt("max_height", cfg.max_height);
    opt("min_length", cfg.min_length);
    opt("max_length", cfg.max_length);
    opt("yaw_jitter", cfg.yaw_jitter);
    opt("ground_y", cfg.ground_y);
    if (g.contains("max_retries"))
      cfg.max_retries = g.at("max_retries").get<int>();
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_ply(const PointCloud& cloud, const std::string& path) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out +=
      "property float x\nproperty float y\nproperty float z\n"
      "property int object_id\nproperty int sensor_id\nend_header\n";
  for (const CloudPoint& cp : cloud) {
    out += fmt(cp.point.x(), "%.9g");
    out += ' ';
    out += fmt(cp.point.y(), "%.9g");
    out += ' ';
    out += fmt(cp.point.z(), "%.9g");
    out += ' ';
    out += std::to_string(cp.object_id);
    out += ' ';
    out += std::to_string(cp.sensor_id);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void save_depth(const DepthBuffer& db, const std::string& path) {
  std::string out = "depthbuf " + std::to_string(db.width) + " " +
                    std::to_string(db.height) + " f32le background=+inf\n";
  for (const float z : db.depth) put_f32(out, z);
  write_file_atomic(path, out);
}

DepthBuffer load_depth(const std::string& path) {
  const auto [header, payload] = split_header(read_file(path), path);
  int w = 0, h = 0;
  if (std::sscanf(header.c_str(), "depthbuf %d %d", &w, &h) != 2 || w < 1 ||
      h < 1)
    throw ParseError(path + ": bad depth header");
  if (payload.size() != std::size_t(w) * h * 4)
    throw ParseError(path + ": depth payload size mismatch");
  DepthBuffer db;
  db.width = w;
  db.height = h;
  db.depth.resize(std::size_t(w) * h);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < db.depth.size(); ++i)
    db.depth[i] = get_f32(p + 4 * i);
  return db;
}

void save_fragments(const FragmentBuffer& fb, const std::string& path) {
  std::string out = "fragbuf " + std::to_string(fb.width) + " " +
                    std::to_string(fb.height) + " i32le background=-1\n";
  for (const std::int32_t id : fb.frag) put_i32(out, id);
  write_file_atomic(path, out);
}

FragmentBuffer load_fragments(const std::string& path) {
  const auto [header, payload] = split_header(read_file(path), path);
  int w = 0, h = 0;
  if (std::sscanf(header.c_str(), "fragbuf %d %d", &w, &h) != 2 || w < 1 ||
      h < 1)
    throw ParseError(path + ": bad fragment header");
  if (payload.size() != std::size_t(w) * h * 4)
    throw ParseError(path + ": fragment payload size mismatch");
  FragmentBuffer fb;
  fb.width = w;
  fb.height = h;
  fb.frag.resize(std::size_t(w) * h);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < fb.frag.size(); ++i)
    fb.frag[i] = get_i32(p + 4 * i);
  return fb;
}

void save_vismatrix(const VisibilityMatrix& vm, const std::string& path) {
  write_file_atomic(path,
                    vismatrix_header(vm) + "\n" +
                        vismatrix_payload(vm, vm.rows));
}

VisibilityMatrix load_vismatrix(const std::string& path) {
  const auto [header, payload] = split_header(read_file(path), path);
  VisibilityMatrix vm = vismatrix_from_header(header, path);
  if (payload.size() != vm.rows * vm.cols * 4)
    throw ParseError(path + ": matrix payload size mismatch");
  vm.counts.resize(vm.rows * vm.cols);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t k = 0; k < vm.counts.size(); ++k)
    vm.counts[k] = get_u32(p + 4 * k);
  return vm;
}

VisibilityMatrix build_vismatrix_checkpointed(const CandidateGrid& grid,
                                              const Scenario& scenario,
                                              const Intrinsics& intr,
                                              const std::string& path,
                                              int threads) {
  validate(scenario);
  VisibilityMatrix vm;
  vm.rows = grid.candidates.size();
  vm.width = intr.width;
  vm.height = intr.height;
  vm.positions = grid.positions;
  vm.yaws = grid.yaws;
  vm.pitches = grid.pitches;
  vm.rail_count = grid.rail_count;
  vm.scenario_hash = scenario_hash(scenario);
  for (std::size_t l = 0; l < scenario.frames.size(); ++l)
    for (const ObjectBox& obj : scenario.frames[l].objects)
      vm.columns.emplace_back(l, obj.id);
  vm.cols = vm.columns.size();
  vm.counts.assign(vm.rows * vm.cols, 0u);

  const std::string header = vismatrix_header(vm);
  const std::string partial_path = path + ".partial";
  const std::size_t row_bytes = vm.cols * 4;

  std::size_t rows_done = 0;
  if (fs::exists(partial_path)) {
    const std::string content = read_file(partial_path);
    const std::size_t nl = content.find('\n');
    if (nl != std::string::npos && content.substr(0, nl) == header) {
      const std::size_t payload = content.size() - nl - 1;
      rows_done = std::min(payload / row_bytes, vm.rows);
      const auto* p =
          reinterpret_cast<const unsigned char*>(content.data() + nl + 1);
      for (std::size_t k = 0; k < rows_done * vm.cols; ++k)
        vm.counts[k] = get_u32(p + 4 * k);
    }
  }

  {
    // Rewrite the checkpoint (normalizes a truncated last row), then
    // append one row per computed candidate.
    std::ofstream ck(partial_path, std::ios::binary | std::ios::trunc);
    if (!ck) throw ParseError("cannot write " + partial_path);
    ck << header << '\n';
    ck.write(vismatrix_payload(vm, rows_done).data(),
             std::streamsize(rows_done * row_bytes));
    ck.flush();
    for (std::size_t i = rows_done; i < vm.rows; ++i) {
      fill_vismatrix_rows(vm, grid, scenario, intr, i, i + 1, threads);
      std::string row;
      row.reserve(row_bytes);
      for (std::size_t j = 0; j < vm.cols; ++j)
        put_u32(row, vm.counts[i * vm.cols + j]);
      ck.write(row.data(), std::streamsize(row.size()));
      ck.flush();
    }
  }

  write_file_atomic(path, header + "\n" + vismatrix_payload(vm, vm.rows));
  fs::remove(partial_path);
  return vm;
}

void save_ecdf_csv(const EvalReport& report, const std::string& path) {
  std::string out = "visibility,cum_fraction\n";
  for (const auto& [value, fraction] : report.ecdf)
    out += std::to_string(value) + "," + fmt(fraction) + "\n";
  write_file_atomic(path, out);
}

void save_report_csv(const EvalReport& report, const std::string& path) {
  std::string out = "object_id,frame_id,visibility\n";
  for (std::size_t k = 0; k < report.counts.size(); ++k) {
    out += std::to_string(report.columns[k].second) + "," +
           std::to_string(report.columns[k].first) + "," +
           std::to_string(report.counts[k]) + "\n";
  }
  write_file_atomic(path, out);
}

void save_compare_csv(const std::vector<CompareRow>& rows,
                      const std::string& path) {
  std::string out = "method,N,coverage_pct,min_visibility\n";
  for (const CompareRow& r : rows)
    out += r.method + "," + std::to_string(r.n) + "," + fmt(r.coverage_pct) +
           "," + std::to_string(r.min_visibility) + "\n";
  write_file_atomic(path, out);
}

void save_scores_csv(const ScoreBundle& bundle, const std::string& path) {
  std::string out = "x,y,z,score\n";
  for (std::size_t i = 0; i < bundle.points.size(); ++i) {
    out += fmt(bundle.points[i].x()) + "," + fmt(bundle.points[i].y()) + "," +
           fmt(bundle.points[i].z()) + "," + fmt(bundle.combined[i]) + "\n";
  }
  write_file_atomic(path, out);
}

void save_gd_report(const RunResult& result, const Scenario& scenario,
                    const std::string& path) {
  json j;
  j["best_min_visibility"] = result.best_min_visibility;
  json poses = json::array();
  for (const RailPose& rp : result.best_poses) {
    json p = rail_pose_to_json(rp);
    const CanonicalPose cp =
        rail_to_canonical(scenario.rails[rp.rail_index], rp);
    p["position"] = vec_to_json(cp.position);
    p["yaw"] = cp.yaw;
    p["pitch"] = cp.pitch;
    poses.push_back(std::move(p));
  }
  j["best_poses"] = std::move(poses);
  j["rail_assignment"] = result.rail_assignment;
  j["scenario_hash"] = hash_hex(scenario_hash(scenario));
  j["seed"] = result.seed;
  j["trace"] = result.trace;
  write_file_atomic(path, j.dump(2) + "\n");
}

void save_ip_report(const IPSolution& sol, const CandidateGrid& grid,
                    std::uint64_t sc_hash, bool include_iterations,
                    const std::string& path) {
  json j;
  j["chosen"] = sol.chosen;
  if (include_iterations) j["iterations"] = sol.iterations;
  json poses = json::array();
  for (const std::size_t i : sol.chosen) {
    const Candidate& c = grid.candidates[i];
    json p;
    p["rail"] = c.rail_index;
    p["fraction"] = c.fraction;
    p["yaw_index"] = c.yaw_index;
    p["pitch_index"] = c.pitch_index;
    p["position"] = vec_to_json(c.pose.position);
    p["yaw"] = c.pose.yaw;
    p["pitch"] = c.pose.pitch;
    poses.push_back(std::move(p));
  }
  j["poses"] = std::move(poses);
  j["scenario_hash"] = hash_hex(sc_hash);
  j["solver"] = sol.solver;
  j["z"] = sol.z;
  write_file_atomic(path, j.dump(2) + "\n");
}

AppConfig load_app_config(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    AppConfig cfg;
    const auto opt_int = [&j](const char* key, int& slot) {
      if (j.contains(key)) slot = j.at(key).get<int>();
    };
    const auto opt_dbl = [&j](const char* key, double& slot) {
      if (j.contains(key)) slot = j.at(key).get<double>();
    };
    opt_int("width", cfg.intr.width);
    opt_int("height", cfg.intr.height);
    opt_dbl("hfov", cfg.intr.hfov);
    opt_dbl("near", cfg.intr.d_near);
    opt_dbl("far", cfg.intr.d_far);
    opt_dbl("gamma", cfg.diff.gamma);
    opt_dbl("kappa", cfg.diff.kappa);
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace visopt::io
