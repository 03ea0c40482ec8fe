#include <cmat/schedule_io.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmat {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "cmat-schedule";
constexpr int kVersion = 1;

Json params_to_json(const CmatParameters& p) {
  Json j;
  j["v_f"] = p.flow.v_f;
  j["l"] = p.flow.l;
  j["tau_f"] = p.flow.tau_f;
  j["tau_c"] = p.flow.tau_c;
  j["tau_star"] = p.tau_star;
  j["lambda"] = p.lambda;
  j["c_bar"] = p.c_bar;
  return j;
}

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw std::invalid_argument("schedule file: " + path + ": " + what);
}

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) bad_field(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad_field(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double num(const Json& j, const std::string& path, const char* key) {
  const Json& v = member(j, path, key);
  if (!v.is_number()) {
    bad_field(path.empty() ? key : path + "." + key, "expected a number");
  }
  return v.get<double>();
}

std::string str(const Json& j, const std::string& path, const char* key) {
  const Json& v = member(j, path, key);
  if (!v.is_string()) {
    bad_field(path.empty() ? key : path + "." + key, "expected a string");
  }
  return v.get<std::string>();
}

CmatParameters params_from_json(const Json& j) {
  CmatParameters p;
  p.flow.v_f = num(j, "params", "v_f");
  p.flow.l = num(j, "params", "l");
  p.flow.tau_f = num(j, "params", "tau_f");
  p.flow.tau_c = num(j, "params", "tau_c");
  p.tau_star = num(j, "params", "tau_star");
  p.lambda = num(j, "params", "lambda");
  p.c_bar = num(j, "params", "c_bar");
  if (p.flow.v_f <= 0) bad_field("params.v_f", "must be positive");
  if (p.flow.l <= 0) bad_field("params.l", "must be positive");
  return p;
}

CyclicSchedule cyclic_from_json(const Json& j) {
  CyclicSchedule s;
  s.params = params_from_json(member(j, "", "params"));
  s.cycle = num(j, "", "cycle");
  if (s.cycle <= 0) bad_field("cycle", "must be positive");

  const Json& moves = member(j, "", "movements");
  if (!moves.is_object()) bad_field("movements", "expected an object");
  for (const auto& [pid, mj] : moves.items()) {
    const std::string path = "movements." + pid;
    MovementTiming t;
    t.red = num(mj, path, "red");
    t.green = num(mj, path, "green");
    const Json& lv = member(mj, path, "platoon");
    if (!lv.is_number_integer()) bad_field(path + ".platoon", "expected an integer");
    t.platoon = lv.get<int>();
    if (t.platoon < 1) bad_field(path + ".platoon", "must be at least 1");
    t.offset = num(mj, path, "offset");
    t.occupancy = num(mj, path, "occupancy");
    s.movements.emplace(pid, t);
  }

  const Json& nodes = member(j, "", "nodes");
  if (!nodes.is_object()) bad_field("nodes", "expected an object");
  for (const auto& [nid, nj] : nodes.items()) {
    const std::string path = "nodes." + nid;
    NodeTiming t;
    t.first = str(nj, path, "first");
    t.second = str(nj, path, "second");
    t.tau_lead = num(nj, path, "tau_lead");
    t.tau_wrap = num(nj, path, "tau_wrap");
    const Json& zv = member(nj, path, "z");
    if (!zv.is_boolean()) bad_field(path + ".z", "expected a boolean");
    t.z = zv.get<bool>();
    s.nodes.emplace(nid, t);
  }

  const Json& arr = member(j, "", "arrivals");
  if (!arr.is_object()) bad_field("arrivals", "expected an object");
  for (const auto& [pid, per_node] : arr.items()) {
    const std::string path = "arrivals." + pid;
    if (!per_node.is_object()) bad_field(path, "expected an object");
    if (!s.movements.count(pid)) bad_field(path, "unknown movement");
    auto& dst = s.arrivals[pid];
    for (const auto& [nid, tv] : per_node.items()) {
      if (!tv.is_number()) bad_field(path + "." + nid, "expected a number");
      dst.emplace(nid, tv.get<double>());
    }
  }
  for (const auto& [pid, mt] : s.movements) {
    (void)mt;
    if (!s.arrivals.count(pid)) bad_field("arrivals." + pid, "missing");
  }
  return s;
}

SignalPlan plan_from_json(const Json& j) {
  SignalPlan p;
  p.params = params_from_json(member(j, "", "params"));
  p.cycle = num(j, "", "cycle");
  if (p.cycle <= 0) bad_field("cycle", "must be positive");

  const Json& ins = member(j, "", "intersections");
  if (!ins.is_array()) bad_field("intersections", "expected an array");
  size_t k = 0;
  for (const Json& ij : ins) {
    const std::string path = "intersections[" + std::to_string(k++) + "]";
    IntersectionPlan ip;
    ip.id = str(ij, path, "id");
    ip.offset = num(ij, path, "offset");

    const Json& nodes = member(ij, path, "nodes");
    if (!nodes.is_array()) bad_field(path + ".nodes", "expected an array");
    for (const Json& nv : nodes) {
      if (!nv.is_string()) bad_field(path + ".nodes", "expected strings");
      ip.nodes.push_back(nv.get<std::string>());
    }

    const Json& phases = member(ij, path, "phases");
    if (!phases.is_array()) bad_field(path + ".phases", "expected an array");
    size_t f = 0;
    for (const Json& fj : phases) {
      const std::string fpath = path + ".phases[" + std::to_string(f++) + "]";
      SignalPhase ph;
      const Json& mel = member(fj, fpath, "movements");
      if (!mel.is_array()) bad_field(fpath + ".movements", "expected an array");
      for (const Json& mv : mel) {
        if (!mv.is_string()) bad_field(fpath + ".movements", "expected strings");
        ph.movements.push_back(mv.get<std::string>());
      }
      ph.green = num(fj, fpath, "green");
      ph.lost = num(fj, fpath, "lost");
      if (ph.green < 0) bad_field(fpath + ".green", "must be non-negative");
      ip.phases.push_back(std::move(ph));
    }
    p.intersections.push_back(std::move(ip));
  }
  if (p.intersections.empty()) bad_field("intersections", "must not be empty");
  return p;
}

Json envelope(const char* type, const CmatParameters& params) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["type"] = type;
  j["params"] = params_to_json(params);
  return j;
}

}  // namespace

std::string to_json(const CyclicSchedule& s) {
  Json j = envelope("cyclic", s.params);
  j["cycle"] = s.cycle;
  Json moves = Json::object();
  for (const auto& [pid, t] : s.movements) {
    Json m;
    m["red"] = t.red;
    m["green"] = t.green;
    m["platoon"] = t.platoon;
    m["offset"] = t.offset;
    m["occupancy"] = t.occupancy;
    moves[pid] = std::move(m);
  }
  j["movements"] = std::move(moves);
  Json nodes = Json::object();
  for (const auto& [nid, t] : s.nodes) {
    Json n;
    n["first"] = t.first;
    n["second"] = t.second;
    n["tau_lead"] = t.tau_lead;
    n["tau_wrap"] = t.tau_wrap;
    n["z"] = t.z;
    nodes[nid] = std::move(n);
  }
  j["nodes"] = std::move(nodes);
  Json arr = Json::object();
  for (const auto& [pid, per_node] : s.arrivals) {
    Json a = Json::object();
    for (const auto& [nid, tv] : per_node) a[nid] = tv;
    arr[pid] = std::move(a);
  }
  j["arrivals"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string to_json(const SignalPlan& p) {
  Json j = envelope("fixed_time", p.params);
  j["cycle"] = p.cycle;
  Json ins = Json::array();
  for (const auto& ip : p.intersections) {
    Json ij;
    ij["id"] = ip.id;
    ij["offset"] = ip.offset;
    ij["nodes"] = ip.nodes;
    Json phases = Json::array();
    for (const auto& ph : ip.phases) {
      Json fj;
      fj["movements"] = ph.movements;
      fj["green"] = ph.green;
      fj["lost"] = ph.lost;
      phases.push_back(std::move(fj));
    }
    ij["phases"] = std::move(phases);
    ins.push_back(std::move(ij));
  }
  j["intersections"] = std::move(ins);
  return j.dump(2) + "\n";
}

Controller controller_from_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw std::invalid_argument("schedule file: not valid JSON");
  }
  if (str(j, "", "format") != kFormat) {
    bad_field("format", "expected \"" + std::string(kFormat) + "\"");
  }
  const Json& ver = member(j, "", "version");
  if (!ver.is_number_integer() || ver.get<int>() != kVersion) {
    bad_field("version", "expected " + std::to_string(kVersion));
  }
  const std::string type = str(j, "", "type");
  if (type == "cyclic") return cyclic_from_json(j);
  if (type == "fixed_time") return plan_from_json(j);
  bad_field("type", "expected \"cyclic\" or \"fixed_time\"");
}

void write_controller(const Controller& c, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  std::visit([&](const auto& v) { out << to_json(v); }, c);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

Controller read_controller(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return controller_from_json(buf.str());
}

}  // namespace cmat
