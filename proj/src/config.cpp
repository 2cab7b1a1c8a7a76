#include "qmarket/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qmarket/errors.hpp"

namespace qmarket {

namespace {

using nlohmann::json;

// Object view that records which keys were consumed; done() rejects the rest.
class Keys {
 public:
  Keys(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + ": expected an object");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }

  const json& at(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end()) throw ConfigError(ctx_ + ": missing key '" + k + "'");
    return *it;
  }

  double num(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number()) throw ConfigError(ctx_ + ": '" + k + "' must be a number");
    return v.get<double>();
  }

  double num_or(const std::string& k, double def) { return has(k) ? num(k) : def; }

  int integer(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number_integer()) throw ConfigError(ctx_ + ": '" + k + "' must be an integer");
    return v.get<int>();
  }

  int integer_or(const std::string& k, int def) { return has(k) ? integer(k) : def; }

  std::string str(const std::string& k) {
    const json& v = at(k);
    if (!v.is_string()) throw ConfigError(ctx_ + ": '" + k + "' must be a string");
    return v.get<std::string>();
  }

  std::string str_or(const std::string& k, const std::string& def) {
    return has(k) ? str(k) : def;
  }

  bool boolean_or(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = at(k);
    if (!v.is_boolean()) throw ConfigError(ctx_ + ": '" + k + "' must be a boolean");
    return v.get<bool>();
  }

  std::array<double, 2> pair(const std::string& k) {
    const json& v = at(k);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(ctx_ + ": '" + k + "' must be an array of two numbers");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  void done() {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(ctx_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

MarketInit parse_init(const json& j, const std::string& ctx, bool with_loi) {
  Keys k(j, ctx);
  MarketInit init;
  init.shares = k.num("shares");
  init.cash = k.num("cash");
  if (with_loi) init.loi = k.num("loi");
  k.done();
  if (init.shares < 0 || init.cash < 0 || init.loi < 0)
    throw ConfigError(ctx + ": occupations must be non-negative");
  return init;
}

const json& traders_array(Keys& top, size_t max_traders = 2) {
  const json& arr = top.at("traders");
  if (!arr.is_array() || arr.empty() || arr.size() > max_traders)
    throw ConfigError("config: 'traders' must be an array of 1 or 2 blocks");
  return arr;
}

void parse_model1(Keys& top, ExperimentConfig& cfg) {
  for (const json& jt : traders_array(top)) {
    Keys k(jt, "trader");
    Model1Trader t;
    t.params.omega_s = k.num("omega_s");
    t.params.omega_c = k.num("omega_c");
    t.params.Omega = k.num("Omega");
    t.params.lambda_inf = k.num("lambda_inf");
    t.init = parse_init(k.at("init"), "trader.init", true);
    k.done();
    cfg.traders1.push_back(t);
  }
}

void parse_model2(Keys& top, ExperimentConfig& cfg) {
  for (const json& jt : traders_array(top)) {
    Keys k(jt, "trader");
    Model2Trader t;
    t.spec.omega = k.num("omega");
    t.spec.Omega = k.num("Omega");
    t.spec.lambda_inf = k.num("lambda_inf");
    t.spec.n_I = k.num("n_loi_density");
    t.spec.window_halfwidth = k.num_or("window_halfwidth", 0.0);
    t.init = parse_init(k.at("init"), "trader.init", false);
    k.done();
    if (t.spec.n_I < 0) throw ConfigError("trader: 'n_loi_density' must be non-negative");
    cfg.traders2.push_back(t);
  }
}

void parse_model3(Keys& top, ExperimentConfig& cfg) {
  for (const json& jt : traders_array(top)) {
    Keys k(jt, "trader");
    Model3Trader t;
    t.spec.omega_s = k.num("omega_s");
    t.spec.omega_c = k.num("omega_c");
    t.spec.Omega = k.num("Omega");
    t.spec.Omega_r = k.num("Omega_r");
    t.spec.gamma = k.num("gamma");
    t.spec.lambda_inf = k.num("lambda_inf");
    t.spec.n_r = k.num_or("n_r", 0.0);
    t.spec.window_halfwidth = k.num_or("window_halfwidth", 0.0);
    t.init = parse_init(k.at("init"), "trader.init", true);
    k.done();
    if (t.spec.n_r < 0) throw ConfigError("trader: 'n_r' must be non-negative");
    cfg.traders3.push_back(t);
  }
  cfg.with_bath_term = top.boolean_or("with_bath_term", true);
}

void parse_pilotwave(Keys& top, ExperimentConfig& cfg) {
  PilotwaveSetup& p = cfg.pilot;
  {
    Keys g(top.at("grid"), "grid");
    p.grid.n1 = g.integer("n1");
    p.grid.n2 = g.integer("n2");
    p.grid.q1_min = g.num("q1_min");
    p.grid.q1_max = g.num("q1_max");
    p.grid.q2_min = g.num("q2_min");
    p.grid.q2_max = g.num("q2_max");
    g.done();
  }
  {
    Keys w(top.at("wave"), "wave");
    p.sigma = w.num("sigma");
    p.center1 = w.num_or("center1", 0.0);
    p.center2 = w.num_or("center2", 0.0);
    p.hbar = w.num_or("hbar", 1.0);
    p.mass = w.num_or("mass", 1.0);
    w.done();
  }
  p.r_floor_rel = top.num_or("r_floor", 1e-6);
  if (!(p.r_floor_rel > 0)) throw ConfigError("config: 'r_floor' must be positive");
  if (top.has("pi0")) p.pi0 = top.pair("pi0");
  if (top.has("path"))
    p.path = top.pair("path");
  else
    p.path = {0.5 * (p.grid.q1_min + p.grid.q1_max), 0.5 * (p.grid.q2_min + p.grid.q2_max)};
  if (top.has("potential")) {
    Keys v(top.at("potential"), "potential");
    const std::string type = v.str("type");
    if (type == "zero") {
      v.done();
    } else if (type == "harmonic") {
      p.harmonic = true;
      p.k1 = v.num("k1");
      p.k2 = v.num("k2");
      p.vc1 = v.num_or("center1", 0.0);
      p.vc2 = v.num_or("center2", 0.0);
      v.done();
    } else {
      throw ConfigError("potential: unknown type '" + type + "'");
    }
  }
}

OracleSettings parse_oracle(const json& j) {
  Keys k(j, "oracle");
  OracleSettings o;
  o.k_min = k.num_or("k_min", 0.0);
  o.k_max = k.num_or("k_max", 0.0);
  o.n_k = k.integer_or("n_k", 0);
  o.t_check = k.num_or("t_check", 0.0);
  o.tolerance = k.num_or("tolerance", 0.0);
  o.leakage_max = k.num_or("leakage_max", 1e-3);
  o.n_times = k.integer_or("n_times", 50);
  o.max_total = k.num_or("max_total", 8);
  k.done();
  if (o.n_times < 2) throw ConfigError("oracle: 'n_times' must be at least 2");
  return o;
}

ExperimentConfig parse_document(const json& j) {
  Keys top(j, "config");
  if (top.integer("schema") != 1) throw ConfigError("config: unsupported schema version");

  ExperimentConfig cfg;
  const std::string model = top.str("model");
  {
    Keys t(top.at("time"), "time");
    cfg.time.t_max = t.num("t_max");
    cfg.time.n_samples = t.integer("n_samples");
    t.done();
    if (!(cfg.time.t_max > 0) || cfg.time.n_samples < 2)
      throw ConfigError("time: need t_max > 0 and n_samples >= 2");
  }
  if (top.has("output")) {
    Keys o(top.at("output"), "output");
    cfg.csv_prefix = o.str_or("csv_prefix", "");
    cfg.svg_path = o.str_or("svg", "");
    cfg.report_path = o.str_or("report", "");
    cfg.fields_prefix = o.str_or("fields_prefix", "");
    o.done();
  }

  if (model == "model1") {
    cfg.model = ModelKind::model1;
    parse_model1(top, cfg);
  } else if (model == "model2") {
    cfg.model = ModelKind::model2;
    parse_model2(top, cfg);
  } else if (model == "model3") {
    cfg.model = ModelKind::model3;
    parse_model3(top, cfg);
  } else if (model == "pilotwave") {
    cfg.model = ModelKind::pilotwave;
    parse_pilotwave(top, cfg);
  } else {
    throw ConfigError("config: unknown model '" + model + "'");
  }

  if (top.has("oracle")) cfg.oracle = parse_oracle(top.at("oracle"));
  top.done();
  return cfg;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  return parse_document(parse_json(json_text, "config"));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

SweepSpec parse_sweep(const std::string& json_text) {
  const json j = parse_json(json_text, "sweep");
  Keys top(j, "sweep");
  SweepSpec spec;
  const json& params = top.at("params");
  if (!params.is_array() || params.size() > 2)
    throw ConfigError("sweep: 'params' must be an array of at most 2 entries");
  for (const json& jp : params) {
    Keys k(jp, "sweep param");
    SweepParam p;
    p.pointer = k.str("pointer");
    p.min = k.num("min");
    p.max = k.num("max");
    p.steps = k.integer("steps");
    k.done();
    if (p.pointer.empty() || p.pointer[0] != '/')
      throw ConfigError("sweep: parameter pointer must start with '/'");
    if (p.steps < 2) throw ConfigError("sweep: 'steps' must be at least 2");
    if (!(p.max > p.min)) throw ConfigError("sweep: need max > min");
    spec.params.push_back(p);
  }
  const std::string obj = top.str("objective");
  if (obj == "delta_pi")
    spec.objective = SweepObjective::delta_pi;
  else if (obj == "amplitude")
    spec.objective = SweepObjective::amplitude;
  else if (obj == "dominant_frequency")
    spec.objective = SweepObjective::dominant_frequency;
  else if (obj == "ordering")
    spec.objective = SweepObjective::ordering;
  else
    throw ConfigError("sweep: unknown objective '" + obj + "'");
  {
    Keys o(top.at("output"), "sweep output");
    spec.csv_path = o.str("csv");
    o.done();
  }
  top.done();
  return spec;
}

SweepSpec load_sweep(const std::string& path) { return parse_sweep(read_text_file(path)); }

ExperimentConfig apply_overrides(
    const std::string& json_text,
    const std::vector<std::pair<std::string, double>>& overrides) {
  json j = parse_json(json_text, "config");
  for (const auto& [ptr, value] : overrides) {
    json::json_pointer jp;
    try {
      jp = json::json_pointer(ptr);
    } catch (const json::exception&) {
      throw ConfigError("sweep: malformed parameter pointer '" + ptr + "'");
    }
    if (!j.contains(jp)) throw ConfigError("sweep: no such parameter '" + ptr + "'");
    if (!j.at(jp).is_number())
      throw ConfigError("sweep: parameter '" + ptr + "' is not numeric");
    j.at(jp) = value;
  }
  return parse_document(j);
}

}  // namespace qmarket
