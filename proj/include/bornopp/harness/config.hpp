#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bornopp/bornopp.hpp"

namespace bornopp::harness {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

enum class ExperimentKind { theorem1, theorem4, proposition3, proposition5, observables };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::theorem1: return "theorem1";
    case ExperimentKind::theorem4: return "theorem4";
    case ExperimentKind::proposition3: return "proposition3";
    case ExperimentKind::proposition5: return "proposition5";
    case ExperimentKind::observables: return "observables";
  }
  return "theorem1";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::theorem1, ExperimentKind::theorem4, ExperimentKind::proposition3,
                 ExperimentKind::proposition5, ExperimentKind::observables})
    if (to_string(k) == s) return k;
  throw precondition_error("unknown experiment '" + s +
                           "' (available: theorem1, theorem4, proposition3, proposition5, observables)");
}

struct GridSpec {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t n = 256;
};

struct StateSpec {
  std::string kind = "coherent";  // coherent | sharp_momentum | sharp_position | wkb
  double q0 = 0.0;
  double p0 = 0.0;
  std::string profile = "gaussian";
  double center = 0.0;  // sharp_momentum envelope center; wkb amplitude center
  double width = 1.0;   // wkb amplitude width
  double linear = 0.0;  // wkb phase S = linear X + quadratic X^2 / 2
  double quadratic = 0.0;
  std::vector<double> components;  // fiber weights; empty: lift to the band
};

struct AExtSpec {
  double amplitude = 0.0;
  int periods = 1;  // A(X) = amplitude sin(2 pi periods (X - x_min) / L)
};

struct HittingSpec {
  double dt = 1e-3;
  double cloud_spacing = 0.05;
  double horizon = 10.0;
};

// One pass/fail statement about a scan.
struct Assertion {
  std::string type;  // slope_range | min_error_at_least | max_error_at_most | ratio_at_most | t_plus_at_least
  double t = 0.0;
  double min = -infinity;
  double max = infinity;
  double value = 0.0;
  double epsilon = 0.0;
  double t_num = 0.0;
  double t_den = 0.0;
  double t_plus_fraction = 0.0;  // > 0: t = t_plus_fraction * T_+
};

struct ExperimentConfig {
  int version = schema_version;
  ExperimentKind experiment = ExperimentKind::theorem1;
  std::string name = "experiment";
  std::string model = "avoided_crossing";
  ElectronicModel::Params model_params;
  GridSpec grid;
  std::vector<int> bands = {0};
  int lift_band = 0;
  Gauge gauge = Gauge::parallel_transport;
  Interval lambda = Interval::whole();
  double delta = 0.0;
  std::vector<Rectangle> gamma;
  double alpha = 0.0;
  std::vector<double> epsilons = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> times = {1.0};
  std::vector<double> logged_times;  // evaluated and reported, never asserted or validated
  std::vector<double> t_plus_fractions;         // extra times as multiples of T_+
  std::vector<double> logged_t_plus_fractions;  // logged times as multiples of T_+
  std::vector<StateSpec> states;
  bool include_a_geo = true;
  std::optional<double> energy_cutoff;
  std::optional<AExtSpec> a_ext;
  std::vector<std::string> symbols;
  double fit_threshold = 0.15;
  HittingSpec hitting;
  std::string output_directory = "results";
  std::string output_stem;
  bool wigner_snapshots = false;
  bool record_timing = false;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<Assertion> assertions;

  Grid1D make_grid() const { return bornopp::make_grid(grid.x_min, grid.x_max, grid.n); }
  ElectronicModel make_model() const { return models::from_tag(model, model_params); }
  std::string stem() const { return output_stem.empty() ? name : output_stem; }
};

// --- JSON mapping ------------------------------------------------------------

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double number_or(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->template get<T>();
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw precondition_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline json to_json(const StateSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "coherent" || s.kind == "sharp_position") j["q0"] = s.q0;
  if (s.kind == "coherent" || s.kind == "sharp_momentum") j["p0"] = s.p0;
  if (s.kind != "wkb") j["profile"] = s.profile;
  if (s.kind == "sharp_momentum" || s.kind == "wkb") j["center"] = s.center;
  if (s.kind == "wkb") {
    j["width"] = s.width;
    j["linear"] = s.linear;
    j["quadratic"] = s.quadratic;
  }
  if (!s.components.empty()) j["components"] = s.components;
  return j;
}

inline StateSpec state_from_json(const json& j) {
  detail::check_keys(j, {"kind", "q0", "p0", "profile", "center", "width", "linear", "quadratic", "components"},
                     "state");
  StateSpec s;
  s.kind = detail::get_or<std::string>(j, "kind", "coherent");
  if (s.kind != "coherent" && s.kind != "sharp_momentum" && s.kind != "sharp_position" && s.kind != "wkb")
    throw precondition_error("config: unknown state kind '" + s.kind +
                             "' (available: coherent, sharp_momentum, sharp_position, wkb)");
  s.q0 = detail::get_or(j, "q0", 0.0);
  s.p0 = detail::get_or(j, "p0", 0.0);
  s.profile = detail::get_or<std::string>(j, "profile", "gaussian");
  s.center = detail::get_or(j, "center", 0.0);
  s.width = detail::get_or(j, "width", 1.0);
  s.linear = detail::get_or(j, "linear", 0.0);
  s.quadratic = detail::get_or(j, "quadratic", 0.0);
  s.components = detail::get_or(j, "components", std::vector<double>{});
  return s;
}

inline json to_json(const Assertion& a) {
  json j;
  j["type"] = a.type;
  if (a.type == "t_plus_at_least") {
    j["value"] = a.value;
    return j;
  }
  if (a.type == "ratio_at_most") {
    j["epsilon"] = a.epsilon;
    j["t_num"] = a.t_num;
    j["t_den"] = a.t_den;
    j["value"] = a.value;
    return j;
  }
  if (a.t_plus_fraction > 0.0) j["t_plus_fraction"] = a.t_plus_fraction;
  else j["t"] = a.t;
  if (a.type == "slope_range") {
    j["min"] = detail::number_or_null(a.min);
    j["max"] = detail::number_or_null(a.max);
  } else {
    j["value"] = a.value;
  }
  return j;
}

inline Assertion assertion_from_json(const json& j) {
  detail::check_keys(j, {"type", "t", "t_plus_fraction", "min", "max", "value", "epsilon", "t_num", "t_den"}, "assertion");
  Assertion a;
  a.type = j.at("type").get<std::string>();
  if (a.type != "slope_range" && a.type != "min_error_at_least" && a.type != "max_error_at_most" &&
      a.type != "ratio_at_most" && a.type != "t_plus_at_least")
    throw precondition_error("config: unknown assertion type '" + a.type +
                             "' (available: slope_range, min_error_at_least, max_error_at_most, ratio_at_most, "
                             "t_plus_at_least)");
  a.t = detail::get_or(j, "t", 0.0);
  a.min = j.contains("min") ? detail::number_or(j["min"], -infinity) : -infinity;
  a.max = j.contains("max") ? detail::number_or(j["max"], infinity) : infinity;
  a.value = detail::get_or(j, "value", 0.0);
  a.epsilon = detail::get_or(j, "epsilon", 0.0);
  a.t_num = detail::get_or(j, "t_num", 0.0);
  a.t_den = detail::get_or(j, "t_den", 0.0);
  a.t_plus_fraction = detail::get_or(j, "t_plus_fraction", 0.0);
  return a;
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.version;
  j["experiment"] = to_string(c.experiment);
  j["name"] = c.name;
  json params = json::object();
  for (const auto& [k, v] : c.model_params) params[k] = v;
  j["model"] = {{"tag", c.model}, {"params", params}};
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n", c.grid.n}};
  j["bands"] = c.bands;
  j["lift_band"] = c.lift_band;
  j["gauge"] = to_string(c.gauge);
  j["lambda"] = json::array({detail::number_or_null(c.lambda.lo), detail::number_or_null(c.lambda.hi)});
  j["delta"] = c.delta;
  json rects = json::array();
  for (const auto& r : c.gamma) rects.push_back({r.q1, r.q2, r.p1, r.p2});
  j["gamma"] = {{"rectangles", rects}, {"alpha", c.alpha}};
  j["epsilons"] = c.epsilons;
  j["times"] = c.times;
  j["logged_times"] = c.logged_times;
  j["t_plus_fractions"] = c.t_plus_fractions;
  j["logged_t_plus_fractions"] = c.logged_t_plus_fractions;
  json states = json::array();
  for (const auto& s : c.states) states.push_back(to_json(s));
  j["states"] = states;
  json flags;
  flags["include_A_geo"] = c.include_a_geo;
  flags["energy_cutoff"] = c.energy_cutoff ? json(*c.energy_cutoff) : json(nullptr);
  flags["A_ext"] = c.a_ext ? json{{"amplitude", c.a_ext->amplitude}, {"periods", c.a_ext->periods}} : json(nullptr);
  j["flags"] = flags;
  j["symbols"] = c.symbols;
  j["fit"] = {{"threshold", c.fit_threshold}};
  j["hitting"] = {{"dt", c.hitting.dt}, {"cloud_spacing", c.hitting.cloud_spacing}, {"horizon", c.hitting.horizon}};
  j["output"] = {{"directory", c.output_directory},
                 {"stem", c.output_stem},
                 {"wigner", c.wigner_snapshots},
                 {"timing", c.record_timing}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  json asserts = json::array();
  for (const auto& a : c.assertions) asserts.push_back(to_json(a));
  j["assertions"] = asserts;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  using detail::get_or;
  if (!j.is_object()) throw precondition_error("config: top level must be a JSON object");
  detail::check_keys(j,
                     {"schema_version", "experiment", "name", "model", "grid", "bands", "lift_band", "gauge", "lambda",
                      "delta", "gamma", "epsilons", "times", "logged_times", "t_plus_fractions",
                      "logged_t_plus_fractions", "states", "flags", "symbols", "fit",
                      "hitting", "output", "seed", "workers", "assertions"},
                     "config");
  ExperimentConfig c;
  c.version = get_or(j, "schema_version", 0);
  if (c.version != schema_version)
    throw precondition_error("config: schema_version " + std::to_string(c.version) + " is not supported (expected " +
                             std::to_string(schema_version) + ")");
  c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  c.name = get_or<std::string>(j, "name", "experiment");
  if (j.contains("model")) {
    const json& m = j["model"];
    c.model = m.at("tag").get<std::string>();
    if (m.contains("params"))
      for (auto it = m["params"].begin(); it != m["params"].end(); ++it) c.model_params[it.key()] = it->get<double>();
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    c.grid.x_min = g.at("x_min").get<double>();
    c.grid.x_max = g.at("x_max").get<double>();
    c.grid.n = g.at("n").get<std::size_t>();
  }
  c.bands = get_or(j, "bands", c.bands);
  c.lift_band = get_or(j, "lift_band", c.bands.empty() ? 0 : c.bands.front());
  c.gauge = gauge_from_string(get_or<std::string>(j, "gauge", "parallel_transport"));
  if (j.contains("lambda") && !j["lambda"].is_null()) {
    const json& l = j["lambda"];
    if (!l.is_array() || l.size() != 2) throw precondition_error("config: lambda must be [lo, hi] (null for infinite)");
    c.lambda = {detail::number_or(l[0], -infinity), detail::number_or(l[1], infinity)};
  }
  c.delta = get_or(j, "delta", 0.0);
  if (j.contains("gamma") && !j["gamma"].is_null()) {
    const json& g = j["gamma"];
    for (const auto& r : g.at("rectangles")) {
      if (!r.is_array() || r.size() != 4) throw precondition_error("config: gamma rectangles are [q1, q2, p1, p2]");
      c.gamma.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()});
    }
    c.alpha = g.at("alpha").get<double>();
  }
  c.epsilons = get_or(j, "epsilons", c.epsilons);
  c.times = get_or(j, "times", c.times);
  c.logged_times = get_or(j, "logged_times", c.logged_times);
  c.t_plus_fractions = get_or(j, "t_plus_fractions", c.t_plus_fractions);
  c.logged_t_plus_fractions = get_or(j, "logged_t_plus_fractions", c.logged_t_plus_fractions);
  if (j.contains("states"))
    for (const auto& s : j["states"]) c.states.push_back(state_from_json(s));
  if (j.contains("flags")) {
    const json& f = j["flags"];
    detail::check_keys(f, {"include_A_geo", "energy_cutoff", "A_ext"}, "flags");
    c.include_a_geo = get_or(f, "include_A_geo", true);
    if (f.contains("energy_cutoff") && !f["energy_cutoff"].is_null()) c.energy_cutoff = f["energy_cutoff"].get<double>();
    if (f.contains("A_ext") && !f["A_ext"].is_null())
      c.a_ext = AExtSpec{f["A_ext"].at("amplitude").get<double>(), get_or(f["A_ext"], "periods", 1)};
  }
  c.symbols = get_or(j, "symbols", c.symbols);
  if (j.contains("fit")) c.fit_threshold = get_or(j["fit"], "threshold", c.fit_threshold);
  if (j.contains("hitting")) {
    const json& h = j["hitting"];
    c.hitting.dt = get_or(h, "dt", c.hitting.dt);
    c.hitting.cloud_spacing = get_or(h, "cloud_spacing", c.hitting.cloud_spacing);
    c.hitting.horizon = get_or(h, "horizon", c.hitting.horizon);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    c.output_directory = get_or<std::string>(o, "directory", c.output_directory);
    c.output_stem = get_or<std::string>(o, "stem", "");
    c.wigner_snapshots = get_or(o, "wigner", false);
    c.record_timing = get_or(o, "timing", false);
  }
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.workers = get_or(j, "workers", 1);
  if (j.contains("assertions"))
    for (const auto& a : j["assertions"]) c.assertions.push_back(assertion_from_json(a));
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw precondition_error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// BORNOPP_OUTPUT_DIR overrides the configured output directory.
inline std::string output_directory(const ExperimentConfig& c) {
  if (const char* env = std::getenv("BORNOPP_OUTPUT_DIR"); env && *env) return env;
  return c.output_directory;
}

// --- symbols and states from their config names ------------------------------

inline Symbol symbol_from_name(const std::string& name) {
  if (name == "1") return symbols::one();
  if (name == "q") return symbols::position();
  if (name == "p") return symbols::momentum();
  if (name == "q2") return symbols::position_squared();
  if (name == "p2") return symbols::momentum_squared();
  const std::string w = "windowed_p2:";
  if (name.rfind(w, 0) == 0) return symbols::windowed_momentum_squared(std::stod(name.substr(w.size())));
  throw precondition_error("unknown symbol '" + name + "' (available: 1, q, p, q2, p2, windowed_p2:<width>)");
}

inline SemiclassicalState make_state(const StateSpec& s, const Grid1D& g, double eps) {
  if (s.kind == "coherent") return coherent_state(g, eps, s.q0, s.p0, profiles::from_name(s.profile));
  if (s.kind == "sharp_momentum") return sharp_momentum_state(g, eps, s.p0, profiles::from_name(s.profile), s.center);
  if (s.kind == "sharp_position") return sharp_position_state(g, eps, s.q0, profiles::from_name(s.profile));
  const double c = s.center, w = s.width, a = s.linear, b = s.quadratic;
  return wkb_state(
      g, eps, [c, w](double x) { return std::exp(-0.5 * std::pow((x - c) / w, 2)); },
      [a, b](double x) { return a * x + 0.5 * b * x * x; }, [a, b](double x) { return a + b * x; });
}

// --- validation ---------------------------------------------------------------

namespace detail {
inline BandOptions band_options(const ExperimentConfig& c, Gauge gauge) {
  BandOptions o;
  o.lambda = c.lambda;
  o.gauge = gauge;
  return o;
}
}  // namespace detail

inline HittingTimes config_hitting_times(const ExperimentConfig& c) {
  BandData band = band_decompose(c.make_model(), c.make_grid(), {c.bands.front()},
                                 detail::band_options(c, Gauge::none));
  HittingOptions opt{c.hitting.dt, c.hitting.cloud_spacing, c.hitting.horizon};
  return hitting_times(PhaseSpaceRegion(c.gamma, c.alpha), c.lambda, c.delta, potentials::band(band), opt);
}

inline std::string describe_window(const HittingTimes& h) {
  std::ostringstream s;
  s << "T_- = " << (h.minus_capped ? "<= " : "") << h.t_minus << ", T_+ = " << (h.plus_capped ? ">= " : "")
    << h.t_plus;
  if (h.plus_capped || h.minus_capped) s << " (capped at the horizon)";
  return s.str();
}

inline std::vector<double> asserted_times(const ExperimentConfig& c, const std::optional<HittingTimes>& h) {
  std::vector<double> out = c.times;
  if (h)
    for (double f : c.t_plus_fractions) out.push_back(f * h->t_plus);
  return out;
}

inline std::vector<double> logged_times(const ExperimentConfig& c, const std::optional<HittingTimes>& h) {
  std::vector<double> out = c.logged_times;
  if (h)
    for (double f : c.logged_t_plus_fractions) out.push_back(f * h->t_plus);
  return out;
}

// Throws with an actionable message; returns the hitting times when the
// experiment needs them.
inline std::optional<HittingTimes> validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw precondition_error("config: " + m); };
  if (c.epsilons.size() < 3) fail("the epsilon ladder needs at least 3 values");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0 && c.epsilons[i] < 1.0)) fail("epsilon values must lie in (0, 1)");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) fail("epsilon values must be strictly decreasing");
  }
  if (c.times.empty() && c.t_plus_fractions.empty()) fail("at least one time sample is required");
  for (double t : c.times)
    if (!std::isfinite(t)) fail("time samples must be finite");
  for (double f : c.t_plus_fractions)
    if (!(f > 0.0)) fail("t_plus_fractions must be positive");
  if (c.bands.empty()) fail("bands must not be empty");
  if (!(c.fit_threshold > 0.0)) fail("fit threshold must be positive");
  if (c.workers < 1) fail("workers must be at least 1");
  (void)c.make_grid();
  ElectronicModel model = c.make_model();
  for (int b : c.bands)
    if (b < 0 || b >= model.fiber_dim()) fail("band index " + std::to_string(b) + " out of range");
  if (c.experiment != ExperimentKind::proposition5 && c.states.empty()) fail("at least one state is required");
  if (c.experiment == ExperimentKind::proposition5 && c.symbols.size() != 1)
    fail("proposition5 needs exactly one symbol");
  if (c.experiment == ExperimentKind::observables && c.symbols.empty()) fail("observables needs at least one symbol");
  for (const auto& s : c.symbols) (void)symbol_from_name(s);
  for (const auto& s : c.states) (void)profiles::from_name(s.profile);

  const bool needs_window = c.experiment == ExperimentKind::theorem4 || c.experiment == ExperimentKind::proposition3;
  if (!needs_window) {
    if (!c.t_plus_fractions.empty() || !c.logged_t_plus_fractions.empty())
      fail("times relative to T_+ need a theorem4 or proposition3 experiment");
    return std::nullopt;
  }
  if (c.bands.size() != 1) fail(to_string(c.experiment) + " needs a single band");
  if (c.gamma.empty()) fail(to_string(c.experiment) + " needs a phase-space region gamma");
  if (c.lambda.bounded() && !(c.delta > 0.0)) fail("delta must be positive for a bounded lambda");
  PhaseSpaceRegion region(c.gamma, c.alpha);
  const Interval inner = c.lambda.shrink(c.delta);
  const Interval gq = region.q_hull();
  if (!(gq.lo > inner.lo && gq.hi < inner.hi)) {
    std::ostringstream m;
    m << "Gamma_q = [" << gq.lo << ", " << gq.hi << "] is not inside Lambda - delta = (" << inner.lo << ", "
      << inner.hi << "); move or shrink Gamma, or reduce delta";
    fail(m.str());
  }
  HittingTimes h = config_hitting_times(c);
  for (double t : asserted_times(c, h))
    if (t > h.t_plus || t < h.t_minus) {
      std::ostringstream m;
      m << "time sample t = " << t << " lies outside the hitting-time window (" << describe_window(h)
        << "); the bound is not asserted there. Move it to logged_times or pick t in [T_-, T_+]";
      fail(m.str());
    }
  return h;
}

}  // namespace bornopp::harness
