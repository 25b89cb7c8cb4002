#include "buavc/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace buavc {
namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt(const Vec& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out + "]";
}

std::string fmt(const Mat& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ", ";
    out += "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ", ";
      out += fmt(m(r, c));
    }
    out += "]";
  }
  return out + "]";
}

int line_of(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void check_keys(const json& o, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) {
      throw ScenarioParseError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

double getd(const json& o, const char* key, double defv) {
  return o.contains(key) ? o.at(key).get<double>() : defv;
}

int geti(const json& o, const char* key, int defv) {
  return o.contains(key) ? o.at(key).get<int>() : defv;
}

bool getb(const json& o, const char* key, bool defv) {
  return o.contains(key) ? o.at(key).get<bool>() : defv;
}

Vec vec_of(const json& a, const std::string& where) {
  if (!a.is_array() || a.empty() || a.size() > 3) {
    throw ScenarioParseError(where + " must be an array of 1..3 numbers");
  }
  Vec v(int(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v[int(i)] = a[i].get<double>();
  return v;
}

Mat mat_of(const json& a, const std::string& where) {
  if (!a.is_array() || a.empty()) {
    throw ScenarioParseError(where + " must be an array of rows");
  }
  const int rows = int(a.size());
  if (!a[0].is_array()) {
    throw ScenarioParseError(where + " rows must be arrays");
  }
  const int cols = int(a[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!a[r].is_array() || int(a[r].size()) != cols) {
      throw ScenarioParseError(where + " rows must have equal length");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = a[r][c].get<double>();
  }
  return m;
}

RobotDynamics dynamics_of(const std::string& s) {
  if (s == "single") return RobotDynamics::Single;
  if (s == "double") return RobotDynamics::Double;
  if (s == "diffdrive") return RobotDynamics::DiffDrive;
  if (s == "mpc_double") return RobotDynamics::MpcDouble;
  if (s == "mpc_quadrotor") return RobotDynamics::MpcQuadrotor;
  throw ScenarioParseError("unknown dynamics '" + s + "'");
}

const char* dynamics_name(RobotDynamics d) {
  switch (d) {
    case RobotDynamics::Single: return "single";
    case RobotDynamics::Double: return "double";
    case RobotDynamics::DiffDrive: return "diffdrive";
    case RobotDynamics::MpcDouble: return "mpc_double";
    case RobotDynamics::MpcQuadrotor: return "mpc_quadrotor";
  }
  return "single";
}

RobotSpec robot_of(const json& o, const std::string& where) {
  check_keys(o,
             {"dynamics", "start", "goal", "r_s", "v_max", "acc_max",
              "sensing_range", "k_gain", "omega_max", "theta0", "own_cov",
              "others_cov"},
             where);
  RobotSpec r;
  if (o.contains("dynamics")) {
    r.dynamics = dynamics_of(o.at("dynamics").get<std::string>());
  }
  r.start = vec_of(o.at("start"), where + ".start");
  r.goal = vec_of(o.at("goal"), where + ".goal");
  r.r_s = getd(o, "r_s", r.r_s);
  r.v_max = getd(o, "v_max", r.v_max);
  r.acc_max = getd(o, "acc_max", r.acc_max);
  r.sensing_range = getd(o, "sensing_range", r.sensing_range);
  r.k_gain = getd(o, "k_gain", r.k_gain);
  r.omega_max = getd(o, "omega_max", r.omega_max);
  r.theta0 = getd(o, "theta0", r.theta0);
  const int d = int(r.start.size());
  r.own_cov = Mat::Zero(d, d);
  r.others_cov = Mat::Zero(d, d);
  if (o.contains("own_cov")) r.own_cov = mat_of(o.at("own_cov"), where);
  if (o.contains("others_cov")) {
    r.others_cov = mat_of(o.at("others_cov"), where);
  }
  return r;
}

UncertainObstacle obstacle_of(const json& o, const std::string& where) {
  check_keys(o, {"box", "vertices", "translation_cov"}, where);
  UncertainObstacle obs;
  if (o.contains("box") == o.contains("vertices")) {
    throw ScenarioParseError(where + " needs exactly one of box or vertices");
  }
  if (o.contains("box")) {
    const json& b = o.at("box");
    check_keys(b, {"lo", "hi"}, where + ".box");
    obs.nominal = make_box(vec_of(b.at("lo"), where + ".box.lo"),
                           vec_of(b.at("hi"), where + ".box.hi"));
  } else {
    const json& verts = o.at("vertices");
    if (!verts.is_array() || verts.size() < 3) {
      throw ScenarioParseError(where + ".vertices needs at least 3 points");
    }
    for (size_t i = 0; i < verts.size(); ++i) {
      Vec v = vec_of(verts[i], where + ".vertices");
      if (v.size() != 2) {
        throw ScenarioParseError(where +
                                 ".vertices form is 2D only; use box for 3D");
      }
      obs.nominal.vertices.push_back(v);
    }
  }
  const int d = obs.nominal.dim();
  obs.translation_cov = Mat::Zero(d, d);
  if (o.contains("translation_cov")) {
    obs.translation_cov = mat_of(o.at("translation_cov"), where);
  }
  return obs;
}

Scenario scenario_of(const json& root) {
  if (!root.is_object()) {
    throw ScenarioParseError("document root must be an object");
  }
  check_keys(root,
             {"version", "dimension", "workspace", "dt", "max_steps", "delta",
              "goal_tolerance", "seed", "method", "bvc_margin",
              "stopping_buffer", "mpc_stages", "deadlock", "estimation",
              "robots", "obstacles"},
             "document");
  if (!root.contains("version")) {
    throw ScenarioParseError("missing required field 'version'");
  }
  Scenario s;
  s.version = root.at("version").get<int>();
  if (s.version != 1) {
    throw ScenarioParseError("unsupported version " +
                             std::to_string(s.version));
  }
  s.dimension = geti(root, "dimension", s.dimension);
  if (root.contains("workspace")) {
    const json& w = root.at("workspace");
    check_keys(w, {"lo", "hi"}, "workspace");
    s.workspace_lo = vec_of(w.at("lo"), "workspace.lo");
    s.workspace_hi = vec_of(w.at("hi"), "workspace.hi");
  }
  s.dt = getd(root, "dt", s.dt);
  s.max_steps = geti(root, "max_steps", s.max_steps);
  s.delta = getd(root, "delta", s.delta);
  s.goal_tolerance = getd(root, "goal_tolerance", s.goal_tolerance);
  if (root.contains("seed")) s.seed = root.at("seed").get<uint64_t>();
  if (root.contains("method")) {
    const std::string m = root.at("method").get<std::string>();
    if (m == "buavc") {
      s.method = CellMethod::BUAVC;
    } else if (m == "bvc") {
      s.method = CellMethod::BVC;
    } else {
      throw ScenarioParseError("unknown method '" + m + "'");
    }
  }
  s.bvc_margin = getd(root, "bvc_margin", s.bvc_margin);
  s.stopping_buffer = getb(root, "stopping_buffer", s.stopping_buffer);
  s.mpc_stages = geti(root, "mpc_stages", s.mpc_stages);
  if (root.contains("deadlock")) {
    const json& d = root.at("deadlock");
    check_keys(d, {"n_dead", "dp_min"}, "deadlock");
    s.deadlock.n_dead = geti(d, "n_dead", s.deadlock.n_dead);
    s.deadlock.dp_min = getd(d, "dp_min", s.deadlock.dp_min);
  }
  if (root.contains("estimation")) {
    const json& e = root.at("estimation");
    check_keys(e, {"mode", "inflation_factor", "kf"}, "estimation");
    if (e.contains("mode")) {
      const std::string m = e.at("mode").get<std::string>();
      if (m == "inject") {
        s.estimation.mode = EstimationMode::Inject;
      } else if (m == "kalman") {
        s.estimation.mode = EstimationMode::Kalman;
      } else {
        throw ScenarioParseError("unknown estimation mode '" + m + "'");
      }
    }
    s.estimation.inflation_factor =
        getd(e, "inflation_factor", s.estimation.inflation_factor);
    if (e.contains("kf")) {
      const json& k = e.at("kf");
      check_keys(k, {"q", "r"}, "estimation.kf");
      s.estimation.kf.q = getd(k, "q", s.estimation.kf.q);
      s.estimation.kf.r = getd(k, "r", s.estimation.kf.r);
    }
  }
  if (root.contains("robots")) {
    const json& arr = root.at("robots");
    if (!arr.is_array()) throw ScenarioParseError("robots must be an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      s.robots.push_back(
          robot_of(arr[i], "robots[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("obstacles")) {
    const json& arr = root.at("obstacles");
    if (!arr.is_array()) {
      throw ScenarioParseError("obstacles must be an array");
    }
    for (size_t i = 0; i < arr.size(); ++i) {
      s.obstacles.push_back(
          obstacle_of(arr[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void apply_override(json& root, const std::string& kv) {
  const size_t eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ScenarioParseError("override must be key=value, got '" + kv + "'");
  }
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  json* node = &root;
  const std::vector<std::string> parts = split(key, '.');
  for (size_t i = 0; i < parts.size(); ++i) {
    const std::string& part = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ScenarioParseError("override '" + key +
                                 "': expected an index, got '" + part + "'");
      }
      if (idx >= node->size()) {
        throw ScenarioParseError("override '" + key + "': index " + part +
                                 " out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      // Missing intermediate objects are created; a typo in the final key
      // is caught by the schema check afterwards.
      if (!node->contains(part) && !last) (*node)[part] = json::object();
      node = &(*node)[part];
    } else {
      throw ScenarioParseError("override '" + key + "': '" + parts[i - 1] +
                               "' is not an object or array");
    }
    if (last) {
      json parsed;
      try {
        parsed = json::parse(val);
      } catch (const json::exception&) {
        parsed = val;  // bare strings like method=bvc
      }
      *node = parsed;
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text,
                        const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError("line " + std::to_string(line_of(text, e.byte)) +
                             ": " + e.what());
  }
  for (const std::string& kv : overrides) apply_override(root, kv);
  try {
    return scenario_of(root);
  } catch (const json::exception& e) {
    throw ScenarioParseError(std::string("bad field type: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioParseError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"version\": " << s.version << ",\n";
  o << "  \"dimension\": " << s.dimension << ",\n";
  o << "  \"workspace\": {\"lo\": " << fmt(s.workspace_lo)
    << ", \"hi\": " << fmt(s.workspace_hi) << "},\n";
  o << "  \"dt\": " << fmt(s.dt) << ",\n";
  o << "  \"max_steps\": " << s.max_steps << ",\n";
  o << "  \"delta\": " << fmt(s.delta) << ",\n";
  o << "  \"goal_tolerance\": " << fmt(s.goal_tolerance) << ",\n";
  o << "  \"seed\": " << s.seed << ",\n";
  o << "  \"method\": \""
    << (s.method == CellMethod::BUAVC ? "buavc" : "bvc") << "\",\n";
  o << "  \"bvc_margin\": " << fmt(s.bvc_margin) << ",\n";
  o << "  \"stopping_buffer\": " << (s.stopping_buffer ? "true" : "false")
    << ",\n";
  o << "  \"mpc_stages\": " << s.mpc_stages << ",\n";
  o << "  \"deadlock\": {\"n_dead\": " << s.deadlock.n_dead
    << ", \"dp_min\": " << fmt(s.deadlock.dp_min) << "},\n";
  o << "  \"estimation\": {\"mode\": \""
    << (s.estimation.mode == EstimationMode::Inject ? "inject" : "kalman")
    << "\", \"inflation_factor\": " << fmt(s.estimation.inflation_factor)
    << ", \"kf\": {\"q\": " << fmt(s.estimation.kf.q)
    << ", \"r\": " << fmt(s.estimation.kf.r) << "}},\n";
  o << "  \"robots\": [";
  for (size_t i = 0; i < s.robots.size(); ++i) {
    const RobotSpec& r = s.robots[i];
    o << (i ? ",\n" : "\n");
    o << "    {\n";
    o << "      \"dynamics\": \"" << dynamics_name(r.dynamics) << "\",\n";
    o << "      \"start\": " << fmt(r.start) << ",\n";
    o << "      \"goal\": " << fmt(r.goal) << ",\n";
    o << "      \"r_s\": " << fmt(r.r_s) << ",\n";
    o << "      \"v_max\": " << fmt(r.v_max) << ",\n";
    o << "      \"acc_max\": " << fmt(r.acc_max) << ",\n";
    o << "      \"sensing_range\": " << fmt(r.sensing_range) << ",\n";
    o << "      \"k_gain\": " << fmt(r.k_gain) << ",\n";
    o << "      \"omega_max\": " << fmt(r.omega_max) << ",\n";
    o << "      \"theta0\": " << fmt(r.theta0) << ",\n";
    o << "      \"own_cov\": " << fmt(r.own_cov) << ",\n";
    o << "      \"others_cov\": " << fmt(r.others_cov) << "\n";
    o << "    }";
  }
  o << (s.robots.empty() ? "],\n" : "\n  ],\n");
  o << "  \"obstacles\": [";
  for (size_t i = 0; i < s.obstacles.size(); ++i) {
    const UncertainObstacle& obs = s.obstacles[i];
    o << (i ? ",\n" : "\n");
    if (obs.nominal.dim() == 3) {
      // 3D obstacles round-trip through the box form; anything else has no
      // serialization (the face lists would not survive hand editing).
      Vec lo = obs.nominal.vertices.front();
      Vec hi = lo;
      for (const Vec& v : obs.nominal.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      const VPolytope ref = make_box(lo, hi);
      bool is_box = ref.vertices.size() == obs.nominal.vertices.size();
      for (size_t k = 0; is_box && k < ref.vertices.size(); ++k) {
        is_box = (ref.vertices[k].array() == obs.nominal.vertices[k].array())
                     .all();
      }
      if (!is_box) {
        throw ScenarioParseError(
            "3D obstacles must be axis-aligned boxes to serialize");
      }
      o << "    {\"box\": {\"lo\": " << fmt(lo) << ", \"hi\": " << fmt(hi)
        << "}, \"translation_cov\": " << fmt(obs.translation_cov) << "}";
    } else {
      o << "    {\"vertices\": [";
      for (size_t k = 0; k < obs.nominal.vertices.size(); ++k) {
        if (k) o << ", ";
        o << fmt(obs.nominal.vertices[k]);
      }
      o << "], \"translation_cov\": " << fmt(obs.translation_cov) << "}";
    }
  }
  o << (s.obstacles.empty() ? "]\n" : "\n  ]\n");
  o << "}\n";
  return o.str();
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioParseError("cannot write " + path);
  out << serialize_scenario(s);
}

uint64_t scenario_hash(const Scenario& s) {
  const std::string text = serialize_scenario(s);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string trajectory_csv(const World& w) {
  std::ostringstream o;
  o << "step,id,true_x,true_y,true_z,est_x,est_y,est_z,"
       "cov_xx,cov_yy,cov_zz,cmd_0,cmd_1,cmd_2,cmd_3,"
       "cell_empty,mode,status\n";
  auto axis = [](const Vec& v, int i) {
    return i < v.size() ? v[i] : 0.0;
  };
  for (const StepRecord& rec : w.records()) {
    for (size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotRecord& r = rec.robots[i];
      o << rec.step << "," << i;
      for (int a = 0; a < 3; ++a) o << "," << fmt(axis(r.true_pos, a));
      for (int a = 0; a < 3; ++a) o << "," << fmt(axis(r.est_mean, a));
      for (int a = 0; a < 3; ++a) {
        o << "," << fmt(a < r.est_cov.rows() ? r.est_cov(a, a) : 0.0);
      }
      for (int a = 0; a < 4; ++a) {
        o << "," << fmt(a < r.command.size() ? r.command[a] : 0.0);
      }
      o << "," << int(r.cell_empty);
      o << "," << (r.deadlock ? "resolve" : "normal");
      o << ","
        << (r.status == RobotStatus::Active
                ? "active"
                : r.status == RobotStatus::AtGoal ? "at_goal" : "collided");
      o << "\n";
    }
  }
  return o.str();
}

std::string metrics_summary(const Metrics& m, const Scenario& s,
                            double wall_seconds) {
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(scenario_hash(s)));
  std::ostringstream o;
  o << "{\n";
  o << "  \"collision_rate\": " << fmt(m.collision_rate) << ",\n";
  o << "  \"min_inter_robot_distance\": " << fmt(m.min_inter_robot_distance)
    << ",\n";
  o << "  \"min_robot_obstacle_distance\": "
    << fmt(m.min_robot_obstacle_distance) << ",\n";
  o << "  \"avg_travelled_distance\": " << fmt(m.avg_travelled_distance)
    << ",\n";
  o << "  \"completion_time\": " << fmt(m.completion_time) << ",\n";
  o << "  \"deadlock_count\": " << m.deadlock_count << ",\n";
  o << "  \"empty_cell_steps\": " << m.empty_cell_steps << ",\n";
  o << "  \"steps\": " << m.steps << ",\n";
  o << "  \"scenario_hash\": \"" << hash << "\",\n";
  o << "  \"seed\": " << s.seed << ",\n";
  o << "  \"wall_time_s\": " << fmt(wall_seconds) << "\n";
  o << "}\n";
  return o.str();
}

}  // namespace buavc
