#include "spincool/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spincool/errors.hpp"

namespace spincool {

namespace {

// Every key the grammar accepts, in the canonical render order.
const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "n_system",  "J",        "h_x",       "h_z",        "J_x",
      "boundary",  "trap_bond", "trap_J",   "bath_mask",  "T",
      "B_i",       "B_f",      "g_0",       "t_1",        "t_2",
      "n_steps",   "dtau",     "n_cycles",  "n_init",     "stopping",
      "stopping_k", "initial_state", "p_err", "eta_e",    "seed",
      "out_dir"};
  return keys;
}

// Keys a document set must supply (plus exactly one of p_err / eta_e).
const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = {
      "n_system", "J",       "h_x",      "h_z",    "T",      "B_i",
      "B_f",      "g_0",     "n_steps",  "n_cycles", "n_init"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// An entry with its provenance, used for merged lookups and error text.
struct Located {
  std::string value;
  std::string doc;
  int line;
};

std::string at(const Located& e) {
  return e.doc + " line " + std::to_string(e.line);
}

[[noreturn]] void fail(const Located& e, const std::string& what) {
  throw config_error("config error at " + at(e) + ": " + what);
}

double parse_double(const Located& e, const std::string& key) {
  const std::string& s = e.value;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
    fail(e, key + " expects a finite number, got '" + s + "'");
  return v;
}

long long parse_int(const Located& e, const std::string& key) {
  const std::string& s = e.value;
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    fail(e, key + " expects an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const Located& e, const std::string& key) {
  const std::string& s = e.value;
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    fail(e, key + " expects a non-negative integer, got '" + s + "'");
  return v;
}

bool parse_on_off(const Located& e, const std::string& key) {
  if (e.value == "on") return true;
  if (e.value == "off") return false;
  fail(e, key + " expects on or off, got '" + e.value + "'");
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void append_kv(std::string& out, const std::string& key,
               const std::string& value) {
  out += key;
  out += " = ";
  out += value;
  out += '\n';
}

}  // namespace

ConfigDoc parse_config_doc(const std::string& text, const std::string& name) {
  ConfigDoc doc;
  doc.name = name;
  std::map<std::string, int> seen;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;

    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw config_error("config error at " + name + " line " +
                         std::to_string(line) + ": expected 'key = value', got '" +
                         stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw config_error("config error at " + name + " line " +
                         std::to_string(line) + ": expected 'key = value', got '" +
                         stripped + "'");
    }
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw config_error("config error at " + name + " line " +
                         std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      throw config_error("config error at " + name + " line " +
                         std::to_string(line) + ": key '" + key +
                         "' already set on line " + std::to_string(it->second));
    }
    seen[key] = line;
    doc.entries.push_back({key, value, line});
  }
  return doc;
}

RunConfig build_config(const std::vector<ConfigDoc>& layers) {
  // Merge: later documents override earlier ones.  The two noise keys are
  // aliases of one quantity, so an override through either name replaces
  // both; only within a single document is the pair a contradiction.
  std::map<std::string, Located> merged;
  for (const auto& doc : layers) {
    for (const auto& entry : doc.entries) {
      if (entry.key == "p_err" || entry.key == "eta_e") {
        const std::string other = entry.key == "p_err" ? "eta_e" : "p_err";
        if (const auto it = merged.find(other); it != merged.end()) {
          if (it->second.doc == doc.name) {
            throw config_error(
                "config error at " + doc.name + " line " +
                std::to_string(entry.line) + ": '" + entry.key +
                "' conflicts with '" + other + "' on line " +
                std::to_string(it->second.line) +
                "; give the noise level exactly one way");
          }
          merged.erase(it);
        }
      }
      merged[entry.key] = {entry.value, doc.name, entry.line};
    }
  }

  // Everything required must be present before values are read.
  std::string missing;
  for (const auto& key : required_keys()) {
    if (!merged.count(key)) missing += missing.empty() ? key : ", " + key;
  }
  if (!merged.count("p_err") && !merged.count("eta_e"))
    missing += (missing.empty() ? "" : ", ") + std::string("one of p_err/eta_e");
  if (!missing.empty())
    throw config_error("config error: missing required keys: " + missing);

  RunConfig c;
  const auto get = [&](const char* key) -> const Located* {
    const auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };
  const auto num = [&](const char* key, double& slot) {
    if (const auto* e = get(key)) slot = parse_double(*e, key);
  };

  if (const auto* e = get("n_system")) {
    const long long n = parse_int(*e, "n_system");
    if (n < 2 || n > 12)
      fail(*e, "n_system must lie in [2, 12] (dense engine limit)");
    c.n_system = int(n);
  }
  num("J", c.J);
  num("h_x", c.h_x);
  num("h_z", c.h_z);
  num("J_x", c.J_x);
  if (const auto* e = get("boundary")) {
    if (e->value == "periodic") c.boundary = Boundary::periodic;
    else if (e->value == "open") c.boundary = Boundary::open;
    else fail(*e, "boundary expects periodic or open, got '" + e->value + "'");
  }
  if (const auto* e = get("trap_bond")) {
    const long long b = parse_int(*e, "trap_bond");
    if (b < -1) fail(*e, "trap_bond must be -1 (none) or a bond index");
    c.trap_bond = int(b);
  }
  num("trap_J", c.trap_J);
  if (const auto* e = get("bath_mask")) {
    c.bath_mask = e->value;
    if (int(c.bath_mask.size()) != c.n_system)
      fail(*e, "bath_mask needs one character per system site (" +
                   std::to_string(c.n_system) + ")");
    if (c.bath_mask.find_first_not_of("01") != std::string::npos)
      fail(*e, "bath_mask characters must be 0 or 1");
    if (c.bath_mask.find('1') == std::string::npos)
      fail(*e, "bath_mask disables every site; at least one must couple");
  }

  num("T", c.T);
  num("B_i", c.B_i);
  num("B_f", c.B_f);
  num("g_0", c.g_0);
  num("t_1", c.t_1);
  num("t_2", c.t_2);

  if (const auto* e = get("n_steps")) {
    const long long n = parse_int(*e, "n_steps");
    if (n < 1 || n > 10'000'000) fail(*e, "n_steps must lie in [1, 1e7]");
    c.n_steps = int(n);
  }
  if (const auto* e = get("dtau")) {
    c.dtau = parse_double(*e, "dtau");
    if (c.dtau < 0.0) fail(*e, "dtau must be positive (or omitted to derive it)");
  }

  if (const auto* e = get("n_cycles")) {
    const long long n = parse_int(*e, "n_cycles");
    if (n < 1) fail(*e, "n_cycles must be >= 1");
    c.n_cycles = int(n);
  }
  if (const auto* e = get("n_init")) {
    const long long n = parse_int(*e, "n_init");
    if (n < 1) fail(*e, "n_init must be >= 1");
    c.n_init = int(n);
  }
  if (const auto* e = get("stopping")) c.stopping = parse_on_off(*e, "stopping");
  if (const auto* e = get("stopping_k")) {
    const long long k = parse_int(*e, "stopping_k");
    if (k < 1) fail(*e, "stopping_k must be >= 1");
    c.stopping_k = int(k);
  }
  if (const auto* e = get("initial_state")) {
    if (e->value == "random_basis") c.initial_state = InitialState::random_basis;
    else if (e->value == "haar_product")
      c.initial_state = InitialState::haar_product;
    else if (e->value == "ground") c.initial_state = InitialState::ground;
    else
      fail(*e, "initial_state expects random_basis, haar_product or ground, "
               "got '" + e->value + "'");
  }

  if (const auto* e = get("p_err")) {
    const double p = parse_double(*e, "p_err");
    if (p < 0.0 || p > 1.0) fail(*e, "p_err must lie in [0, 1]");
    c.p_err = p;
  }
  if (const auto* e = get("eta_e")) {
    const double eta = parse_double(*e, "eta_e");
    if (eta < 0.0) fail(*e, "eta_e must be >= 0");
    if (p_err_from_eta(eta, c.n_steps) > 1.0)
      fail(*e, "eta_e implies a per-point error probability above 1");
    c.eta_e = eta;
  }

  if (const auto* e = get("seed")) c.seed = parse_u64(*e, "seed");
  if (const auto* e = get("out_dir")) c.out_dir = e->value;

  // Cross-field checks ride on the engine constructors so the config layer
  // cannot drift from what they accept.
  try {
    model_from(c);
    schedule_from(c);
    sweep_from(c);
  } catch (const config_error&) {
    throw;
  } catch (const std::invalid_argument& err) {
    throw config_error(std::string("config error: ") + err.what());
  }
  return c;
}

RunConfig parse_config(const std::string& text, const std::string& name) {
  return build_config({parse_config_doc(text, name)});
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string render_config(const RunConfig& c) {
  std::string out;
  append_kv(out, "n_system", std::to_string(c.n_system));
  append_kv(out, "J", format_double(c.J));
  append_kv(out, "h_x", format_double(c.h_x));
  append_kv(out, "h_z", format_double(c.h_z));
  if (c.J_x != 0.0) append_kv(out, "J_x", format_double(c.J_x));
  append_kv(out, "boundary",
            c.boundary == Boundary::periodic ? "periodic" : "open");
  if (c.trap_bond >= 0) {
    append_kv(out, "trap_bond", std::to_string(c.trap_bond));
    append_kv(out, "trap_J", format_double(c.trap_J));
  }
  if (!c.bath_mask.empty()) append_kv(out, "bath_mask", c.bath_mask);
  append_kv(out, "T", format_double(c.T));
  append_kv(out, "B_i", format_double(c.B_i));
  append_kv(out, "B_f", format_double(c.B_f));
  append_kv(out, "g_0", format_double(c.g_0));
  if (c.t_1 >= 0.0) append_kv(out, "t_1", format_double(c.t_1));
  if (c.t_2 >= 0.0) append_kv(out, "t_2", format_double(c.t_2));
  append_kv(out, "n_steps", std::to_string(c.n_steps));
  if (c.dtau > 0.0) append_kv(out, "dtau", format_double(c.dtau));
  append_kv(out, "n_cycles", std::to_string(c.n_cycles));
  append_kv(out, "n_init", std::to_string(c.n_init));
  append_kv(out, "stopping", c.stopping ? "on" : "off");
  append_kv(out, "stopping_k", std::to_string(c.stopping_k));
  const char* init = c.initial_state == InitialState::random_basis
                         ? "random_basis"
                         : c.initial_state == InitialState::haar_product
                               ? "haar_product"
                               : "ground";
  append_kv(out, "initial_state", init);
  if (c.p_err) append_kv(out, "p_err", format_double(*c.p_err));
  if (c.eta_e) append_kv(out, "eta_e", format_double(*c.eta_e));
  append_kv(out, "seed", std::to_string(c.seed));
  append_kv(out, "out_dir", c.out_dir);
  return out;
}

namespace {

// Preset documents.  The shared schedule (T = 6, B: 5 -> 0.7, g_0 = 0.5,
// 101 steps) frames every chain variant; presets differ in the chain
// parameters, the noise level and the ensemble size.
struct Preset {
  std::string name;
  std::string text;
};

constexpr const char* kSchedule =
    "T = 6\n"
    "B_i = 5\n"
    "B_f = 0.7\n"
    "g_0 = 0.5\n"
    "n_steps = 101\n"
    "n_cycles = 100\n"
    "seed = 1\n";

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> p;
    const auto add = [&](std::string name, std::string body) {
      p.push_back({std::move(name), std::move(body)});
    };
    add("fig2a",
        "# Noiseless cooling of the nonintegrable ferromagnet\n"
        "n_system = 8\nJ = 1\nh_x = 1\nh_z = 0.2\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 100\neta_e = 0\n");
    add("fig2b",
        "# Same chain with a finite per-spin error budget\n"
        "n_system = 8\nJ = 1\nh_x = 1\nh_z = 0.2\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 100\neta_e = 2e-2\n");
    add("fig3",
        "# Ferromagnetic chain for noise scans\n"
        "n_system = 8\nJ = 1\nh_x = 0.5\nh_z = 0\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    add("fig3-pm",
        "# Paramagnetic chain for noise scans\n"
        "n_system = 8\nJ = 0.5\nh_x = 1\nh_z = 0\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    add("fig3-nonint",
        "# Nonintegrable chain (longitudinal field) for noise scans\n"
        "n_system = 8\nJ = 0.4\nh_x = 0.5\nh_z = 0.8\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    add("fig5",
        "# Open ferromagnet with a weak-bond trap at the middle bond\n"
        "n_system = 8\nJ = 1\nh_x = 0.5\nh_z = 0\nboundary = open\n"
        "trap_bond = 3\ntrap_J = 0.33\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    add("fig6",
        "# Paramagnet instrumented for eigenstate occupation histograms\n"
        "n_system = 8\nJ = 0.5\nh_x = 1\nh_z = 0\nboundary = periodic\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    add("fig9",
        "# Ferromagnet with an integrability-breaking x-x coupling\n"
        "n_system = 8\nJ = 1\nh_x = 0.5\nh_z = 0\nJ_x = 0.2\n"
        "boundary = periodic\n" +
            std::string(kSchedule) + "n_init = 1000\neta_e = 2e-2\n");
    return p;
  }();
  return all;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& p : presets()) n.push_back(p.name);
    return n;
  }();
  return names;
}

const std::string& preset_text(const std::string& name) {
  static const std::map<std::string, std::string> by_name = [] {
    std::map<std::string, std::string> m;
    for (const auto& p : presets()) m[p.name] = p.text;
    return m;
  }();
  const auto it = by_name.find(name);
  if (it == by_name.end()) {
    std::string choices;
    for (const auto& n : preset_names())
      choices += choices.empty() ? n : ", " + n;
    throw config_error("unknown preset '" + name + "'; available: " + choices);
  }
  return it->second;
}

RunConfig preset_config(const std::string& name) {
  return parse_config(preset_text(name), name);
}

SpinModelSpec model_from(const RunConfig& c) {
  auto model = build_ising(c.n_system, c.J, c.h_x, c.h_z, c.boundary, c.J_x,
                           c.trap_bond, c.trap_J);
  if (!c.bath_mask.empty()) {
    for (int i = 0; i < c.n_system; ++i)
      model.bath_mask[i] = c.bath_mask[i] == '1';
  }
  return model;
}

ScheduleSpec schedule_from(const RunConfig& c) {
  return make_schedule(c.T, c.g_0, c.B_i, c.B_f, c.t_1, c.t_2);
}

SweepSpec sweep_from(const RunConfig& c) {
  const auto schedule = schedule_from(c);
  return c.dtau > 0.0 ? make_sweep_fixed_dt(schedule, c.n_steps, c.dtau)
                      : make_sweep(schedule, c.n_steps);
}

ProtocolSpec protocol_from(const RunConfig& c) {
  ProtocolSpec spec;
  spec.model = model_from(c);
  spec.schedule = schedule_from(c);
  spec.n_steps = c.n_steps;
  spec.dtau = c.dtau;
  spec.noise = NoiseSpec{p_err_of(c)};
  spec.n_cycles = c.n_cycles;
  spec.initial_state = c.initial_state;
  spec.stopping = c.stopping ? StoppingMode::stop : StoppingMode::off;
  spec.stopping_k = c.stopping_k;
  return spec;
}

double p_err_of(const RunConfig& c) {
  if (c.p_err) return *c.p_err;
  if (c.eta_e) return p_err_from_eta(*c.eta_e, c.n_steps);
  throw config_error("config carries no noise level");
}

double eta_e_of(const RunConfig& c) {
  if (c.eta_e) return *c.eta_e;
  if (c.p_err) return eta_from_p_err(*c.p_err, c.n_steps);
  throw config_error("config carries no noise level");
}

}  // namespace spincool
