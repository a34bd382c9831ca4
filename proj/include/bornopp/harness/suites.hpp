#pragma once

#include <random>

#include "bornopp/harness/report.hpp"

namespace bornopp::harness {

struct SuiteCriterion {
  std::string id;  // "C1", "C2", ...
  std::string description;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 1;
  std::vector<SuiteCriterion> criteria;
  std::vector<ScanResult> scans;
  bool passed = false;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  int workers = 1;
};

inline const std::vector<std::string>& available_suites() {
  static const std::vector<std::string> names = {"identities", "semiclassics", "thm1",        "thm4", "berry",
                                                 "prop3",      "prop5",        "examples", "determinism", "all"};
  return names;
}

inline std::string suite_list() {
  std::string s;
  for (const auto& n : available_suites()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

// --- built-in scan configurations -------------------------------------------

namespace suites {

inline const std::vector<double>& ladder() {
  static const std::vector<double> l = {0.2, 0.1, 0.05, 0.025};
  return l;
}

inline StateSpec coherent(double q0, double p0, const std::string& profile = "gaussian",
                          std::vector<double> components = {}) {
  StateSpec s;
  s.kind = "coherent";
  s.q0 = q0;
  s.p0 = p0;
  s.profile = profile;
  s.components = std::move(components);
  return s;
}

inline Assertion slope_between(double t, double lo, double hi) {
  Assertion a;
  a.type = "slope_range";
  a.t = t;
  a.min = lo;
  a.max = hi;
  return a;
}

inline Assertion error_bound(const std::string& type, double t, double value) {
  Assertion a;
  a.type = type;
  a.t = t;
  a.value = value;
  return a;
}

inline ExperimentConfig base(ExperimentKind kind, const std::string& name) {
  ExperimentConfig c;
  c.experiment = kind;
  c.name = name;
  c.epsilons = ladder();
  return c;
}

// Crossing pair of the three-level model, ten initial states.
inline ExperimentConfig thm1(bool cutoff) {
  ExperimentConfig c = base(ExperimentKind::theorem1, cutoff ? "thm1_cutoff" : "thm1_sobolev");
  c.model = "three_level";
  c.model_params = {{"mixing", 0.5}};
  c.grid = {-6.0, 6.0, 256};
  c.bands = {0, 1};
  c.lift_band = 0;
  c.gauge = Gauge::none;
  for (double q0 : {-1.0, 0.0, 1.0})
    for (double p0 : {-0.5, 0.0, 0.5}) c.states.push_back(coherent(q0, p0));
  StateSpec wkb;
  wkb.kind = "wkb";
  wkb.center = 0.0;
  wkb.width = 0.8;
  wkb.linear = 0.3;
  wkb.quadratic = 0.2;
  c.states.push_back(wkb);
  if (cutoff) {
    c.energy_cutoff = 2.0;
    c.times = {1.0, 2.0};
    Assertion ratio;
    ratio.type = "ratio_at_most";
    ratio.epsilon = 0.05;
    ratio.t_num = 2.0;
    ratio.t_den = 1.0;
    ratio.value = 3.0;
    c.assertions = {slope_between(1.0, 0.75, infinity), ratio};
  } else {
    c.times = {1.0};
    c.assertions = {slope_between(1.0, 0.75, 1.25)};
  }
  return c;
}

inline ExperimentConfig locally_isolated_window(ExperimentKind kind, const std::string& name) {
  ExperimentConfig c = base(kind, name);
  c.model = "locally_isolated";
  c.grid = {-4.0, 4.0, 512};
  c.bands = {0};
  c.gauge = Gauge::parallel_transport;
  c.lambda = {-2.0, 2.0};
  c.delta = 0.4;
  c.alpha = 0.3;
  return c;
}

inline ExperimentConfig thm4() {
  ExperimentConfig c = locally_isolated_window(ExperimentKind::theorem4, "thm4_locally_isolated");
  c.gamma = {{-0.6, 0.6, 0.0, 1.2}};
  c.states = {coherent(0.0, 0.6)};
  c.times = {1.0};
  c.logged_t_plus_fractions = {1.2};
  c.hitting.horizon = 2.0;
  Assertion tp;
  tp.type = "t_plus_at_least";
  tp.value = 1.5;
  c.assertions = {tp, slope_between(1.0, 0.75, 1.25)};
  return c;
}

inline ExperimentConfig berry(bool geometric) {
  ExperimentConfig c = base(ExperimentKind::theorem4, geometric ? "berry_on" : "berry_off");
  c.model = "avoided_crossing";
  c.grid = {-6.0, 6.0, 512};
  c.bands = {0};
  c.gauge = Gauge::reference_component;
  c.lambda = {-4.0, 4.0};
  c.delta = 0.5;
  c.gamma = {{0.1, 0.9, 0.6, 1.4}};
  c.alpha = 0.3;
  c.states = {coherent(0.5, 1.0)};
  c.times = {1.0};
  c.include_a_geo = geometric;
  c.assertions = {geometric ? slope_between(1.0, 0.75, infinity) : error_bound("min_error_at_least", 1.0, 0.05)};
  return c;
}

// The leakage decays faster than the first-order bound and the log-log
// curve bends, so the fit threshold is wider than the default.
inline ExperimentConfig prop3() {
  ExperimentConfig c = locally_isolated_window(ExperimentKind::proposition3, "prop3_leakage");
  c.gamma = {{0.4, 1.5, -1.3, -0.1}};
  c.states = {coherent(0.95, -0.7)};
  c.times = {};
  c.t_plus_fractions = {0.8};
  c.fit_threshold = 0.5;
  Assertion a = slope_between(0.0, 0.75, infinity);
  a.t_plus_fraction = 0.8;
  c.assertions = {a};
  return c;
}

inline ExperimentConfig prop5(const std::string& symbol) {
  ExperimentConfig c = base(ExperimentKind::proposition5, "prop5_" + (symbol == "p" ? std::string("p")
                                                                      : symbol == "q" ? std::string("q")
                                                                                      : std::string("windowed_p2")));
  c.model = "avoided_crossing";
  c.grid = {-6.0, 6.0, 256};
  c.bands = {0};
  c.gauge = Gauge::parallel_transport;
  c.lambda = {-4.0, 4.0};
  c.delta = 0.5;
  c.symbols = {symbol};
  c.times = {0.0};
  for (double q0 : {-0.5, 0.5}) c.states.push_back(coherent(q0, 0.4, "gaussian", {1.0, 0.5}));
  c.assertions = {symbol == "q" ? error_bound("max_error_at_most", 0.0, 1e-9) : slope_between(0.0, 0.75, infinity)};
  return c;
}

inline ExperimentConfig example(const std::string& which) {
  ExperimentConfig c = base(ExperimentKind::observables, "examples_" + which);
  c.model = "harmonic";
  c.model_params = {{"omega", std::sqrt(2.0)}};
  c.grid = {-8.0, 8.0, 512};
  c.bands = {0};
  c.gauge = Gauge::none;
  c.symbols = {"q", "p", "p2"};
  c.times = {0.0, 0.5};
  StateSpec s;
  if (which == "coherent") {
    s = coherent(0.3, 0.5, "gauss_poly");
    c.assertions = {slope_between(0.0, 0.35, 0.75), slope_between(0.5, 0.35, 0.75)};
  } else if (which == "sharp_momentum") {
    s.kind = "sharp_momentum";
    s.p0 = 0.5;
    s.center = 0.3;
    s.profile = "gauss_chirp";
    c.assertions = {slope_between(0.0, 0.75, 1.25), slope_between(0.5, 0.75, 1.25)};
  } else {
    s.kind = "wkb";
    s.center = 0.3;
    s.width = 0.8;
    s.linear = 0.5;
    s.quadratic = -0.2;
    c.assertions = {slope_between(0.0, 0.35, infinity), slope_between(0.5, 0.35, infinity)};
  }
  c.states = {s};
  return c;
}

}  // namespace suites

// Scan configurations of a suite, in execution order (empty for suites of
// direct checks).
inline std::vector<ExperimentConfig> suite_configs(const std::string& name) {
  if (name == "thm1") return {suites::thm1(false), suites::thm1(true)};
  if (name == "thm4") return {suites::thm4()};
  if (name == "berry") return {suites::berry(true), suites::berry(false)};
  if (name == "prop3") return {suites::prop3()};
  if (name == "prop5") return {suites::prop5("p"), suites::prop5("windowed_p2:1.0"), suites::prop5("q")};
  if (name == "examples")
    return {suites::example("coherent"), suites::example("sharp_momentum"), suites::example("wkb")};
  if (name == "identities" || name == "semiclassics" || name == "determinism" || name == "all") return {};
  throw precondition_error("unknown suite '" + name + "' (available: " + suite_list() + ")");
}

inline std::vector<ExperimentConfig> all_builtin_configs() {
  std::vector<ExperimentConfig> out;
  for (const char* s : {"thm1", "thm4", "berry", "prop3", "prop5", "examples"})
    for (auto& c : suite_configs(s)) out.push_back(std::move(c));
  return out;
}

// --- direct checks ------------------------------------------------------------

namespace detail {

inline SuiteCriterion bound(const std::string& id, const std::string& what, double value, double tol) {
  std::ostringstream d;
  d.precision(3);
  d << std::scientific << "max residual " << value << " (tolerance " << tol << ")";
  return {id, what + " <= " + fmt(tol), std::isfinite(value) && value <= tol, d.str()};
}

template <typename F>
SuiteCriterion guarded(const std::string& id, const std::string& what, double tol, F&& f) {
  try {
    return bound(id, what, f(), tol);
  } catch (const std::exception& e) {
    return {id, what + " <= " + fmt(tol), false, std::string("failed: ") + e.what()};
  }
}

struct IdentityFixture {
  std::string label;
  BandData band;
  Interval sample;  // X drawn from here
};

inline std::vector<IdentityFixture> identity_fixtures() {
  const Grid1D g = make_grid(-6, 6, 128);
  BandOptions whole;
  BandOptions pair;
  pair.gauge = Gauge::none;
  BandOptions local;
  local.lambda = {-2.0, 2.0};
  const Grid1D gl = make_grid(-4, 4, 128);
  return {{"avoided_crossing", band_decompose(models::avoided_crossing(), g, {0}, whole), {-4.0, 4.0}},
          {"three_level pair", band_decompose(models::three_level(0.5), g, {0, 1}, pair), {-3.0, 3.0}},
          {"locally_isolated", band_decompose(models::locally_isolated(), gl, {0}, local), {-1.6, 1.6}}};
}

inline std::vector<double> sample_points(const Interval& i, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(i.lo, i.hi);
  std::vector<double> xs;
  for (int k = 0; k < count; ++k) xs.push_back(u(rng));
  return xs;
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(z(rng), z(rng));
  return v;
}

inline std::vector<SuiteCriterion> identity_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto fixtures = identity_fixtures();
  std::vector<std::pair<const IdentityFixture*, std::vector<double>>> samples;
  for (const auto& f : fixtures) samples.push_back({&f, sample_points(f.sample, 16, rng)});

  std::vector<SuiteCriterion> out;
  out.push_back(guarded("C7", "Riesz vs spectral projection", 1e-10, [&] {
    double worst = 0.0;
    for (const auto& [f, xs] : samples) {
      ContourSpec c = contour_around(f->band);
      for (double x : xs)
        worst = std::max(worst, (riesz_projection(f->band.model(), x, c) - bornopp::detail::fiber_split(f->band, x).p).cwiseAbs().maxCoeff());
    }
    return worst;
  }));
  out.push_back(guarded("C7", "(G1) reconstruction of grad P", 1e-8, [&] {
    double worst = 0.0;
    for (const auto& [f, xs] : samples)
      for (double x : xs) {
        G1Residuals r = g1_residuals(f->band, x);
        worst = std::max({worst, r.reconstruction, r.diagonal_block});
      }
    return worst;
  }));
  out.push_back(guarded("C7", "(K2) residual on Lambda - delta", 1e-8, [&] {
    double worst = 0.0;
    for (const auto& [f, xs] : samples)
      for (double x : xs) worst = std::max(worst, k2_residual(f->band, x));
    return worst;
  }));
  out.push_back(guarded("C7", "B~ contour vs spectral", 1e-8, [&] {
    double worst = 0.0;
    for (const auto& [f, xs] : samples)
      for (double x : xs)
        worst = std::max(worst, (btilde(f->band, x, BTildeMethod::contour) - btilde(f->band, x)).cwiseAbs().maxCoeff());
    return worst;
  }));
  out.push_back(guarded("C7", "gauge-conjugation covariance of H_BO", 1e-9, [&] {
    const Grid1D g = make_grid(-2 * pi, 2 * pi, 128);
    BandData b = band_decompose(models::avoided_crossing(), g, {0});
    auto theta = [](double x) { return 0.3 * std::sin(x); };
    auto dtheta = [](double x) { return 0.3 * std::cos(x); };
    BandData s = b.with_gauge_shift(theta, dtheta);
    const double eps = 0.1;
    CMatrix h0 = assemble_bo(b, eps).matrix, h1 = assemble_bo(s, eps).matrix;
    CVector phase(g.ssize());
    for (Eigen::Index i = 0; i < g.ssize(); ++i) phase[i] = std::exp(imag_unit * theta(g.points()[i]));
    double worst = 0.0;
    for (double k : {0.0, 2.0, -5.0}) {
      CVector v(g.ssize());
      for (Eigen::Index i = 0; i < g.ssize(); ++i) {
        const double x = g.points()[i];
        v[i] = std::exp(-std::pow((x - 0.3) / 0.5, 2) / 2.0) * std::exp(imag_unit * (k * x));
      }
      CVector d = h1 * v - phase.conjugate().asDiagonal() * (h0 * (phase.asDiagonal() * v));
      worst = std::max(worst, d.norm() / v.norm());
    }
    return worst;
  }));
  out.push_back(guarded("C7", "U isometry (U U* = 1, |U* phi| = |phi|)", 1e-12, [&] {
    double worst = 0.0;
    for (const auto& f : fixtures) {
      if (f.band.bands().size() != 1) continue;
      BandData b = f.band;
      const Grid1D& g = b.grid();
      for (int trial = 0; trial < 4; ++trial) {
        NuclearWave phi(g, 0.1, random_vector(g.ssize(), rng));
        MolecularWave up = u_star_map(phi, b);
        NuclearWave back = u_map(up, b);
        worst = std::max({worst, l2_norm(CVector(back.values - phi.values), g) / norm(phi),
                          std::abs(norm(up) - norm(phi)) / norm(phi)});
      }
    }
    return worst;
  }));
  out.push_back(guarded("C7", "unitarity and energy conservation of evolve", 1e-10, [&] {
    const Grid1D g = make_grid(-6, 6, 256);
    const double eps = 0.05;
    BandData b = band_decompose(models::avoided_crossing(), g, {0});
    DenseHamiltonian h = assemble_full(models::avoided_crossing(), g, eps);
    SpectralPropagator p = diagonalize(h);
    MolecularWave psi = lift_to_band(coherent_state(g, eps, -1.0, 0.8).wave, b);
    const double n0 = norm(psi), e0 = energy(h, psi);
    double worst = 0.0;
    for (double t : {0.5, 2.0, 5.0}) {
      MolecularWave w = evolve(p, psi, t);
      worst = std::max({worst, std::abs(norm(w) - n0), std::abs(energy(h, w) - e0) / std::max(1.0, std::abs(e0))});
    }
    return worst;
  }));
  return out;
}

inline std::vector<SuiteCriterion> semiclassics_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SuiteCriterion> out;
  out.push_back(guarded("C8", "Weyl quantization of 1, q, p", 1e-10, [&] {
    const Grid1D g = make_grid(-6, 6, 128);
    const double eps = 0.1;
    const Eigen::Index n = g.ssize();
    const CMatrix id = CMatrix::Identity(n, n);
    const CMatrix x = g.points().cast<Complex>().asDiagonal();
    const CMatrix p = eps * spectral_derivative_matrix(g);
    return std::max({(weyl_quantize(symbols::one(), g, eps) - id).cwiseAbs().maxCoeff(),
                     (weyl_quantize(symbols::position(), g, eps) - x).cwiseAbs().maxCoeff(),
                     (weyl_quantize(symbols::momentum(), g, eps) - p).cwiseAbs().maxCoeff()});
  }));
  out.push_back(guarded("C8", "Wigner normalization", 1e-8, [&] {
    const Grid1D g = make_grid(-6, 6, 256);
    double worst = 0.0;
    std::uniform_real_distribution<double> uq(-2.0, 2.0), up(-1.0, 1.0);
    for (double eps : {0.1, 0.05}) {
      for (int trial = 0; trial < 3; ++trial) {
        NuclearWave w = coherent_state(g, eps, uq(rng), up(rng)).wave;
        worst = std::max(worst, std::abs(wigner_marginal(w).total() - 1.0));
      }
      BandData b = band_decompose(models::avoided_crossing(), g, {0});
      MolecularWave m = lift_to_band(coherent_state(g, eps, 0.5, 0.3).wave, b);
      worst = std::max(worst, std::abs(wigner_marginal(m).total() - 1.0));
    }
    return worst;
  }));
  out.push_back(guarded("C8", "Verlet harmonic period error at dt = 1e-3", 1e-6, [&] {
    PhasePoint z = classical_flow(potentials::harmonic(), {1.0, 0.5}, 2 * pi, {1e-3});
    return std::max(std::abs(z.q - 1.0), std::abs(z.p - 0.5));
  }));
  HittingOptions opt;
  opt.dt = 1e-3;
  opt.cloud_spacing = 0.05;
  const double resolution = 2 * (opt.cloud_spacing + opt.dt);
  out.push_back(guarded("C8", "free-motion hitting time vs 2/1.1", resolution, [&] {
    HittingTimes h = hitting_times({{0, 0, 0.9, 1.1}}, {-2.4, 2.4}, 0.4, potentials::free(), opt);
    if (h.plus_capped || h.minus_capped) return infinity;
    return std::max(std::abs(h.t_plus - 2.0 / 1.1), std::abs(h.t_minus + 2.0 / 1.1));
  }));
  return out;
}

}  // namespace detail

inline json to_json(const SuiteReport& r) {
  json j;
  j["schema_version"] = report_schema_version;
  j["suite"] = r.suite;
  j["seed"] = r.seed;
  json crit = json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"id", c.id}, {"description", c.description}, {"passed", c.passed}, {"detail", c.detail}});
  j["criteria"] = crit;
  json scans = json::array();
  for (const auto& s : r.scans) scans.push_back(to_json(s));
  j["scans"] = scans;
  j["passed"] = r.passed;
  return j;
}

inline std::string criterion_id(const std::string& suite) {
  if (suite == "identities") return "C7";
  if (suite == "semiclassics") return "C8";
  if (suite == "thm1") return "C1";
  if (suite == "thm4") return "C2";
  if (suite == "berry") return "C3";
  if (suite == "prop3") return "C4";
  if (suite == "prop5") return "C5";
  if (suite == "examples") return "C6";
  return "C9";
}

inline SuiteReport run_suite(const std::string& name, SuiteOptions opt = {});

namespace detail {
inline void absorb(SuiteReport& into, const SuiteReport& part) {
  into.criteria.insert(into.criteria.end(), part.criteria.begin(), part.criteria.end());
  into.scans.insert(into.scans.end(), part.scans.begin(), part.scans.end());
}

// Two runs of a suite must serialize to identical bytes.
inline std::vector<SuiteCriterion> determinism_checks(SuiteOptions opt) {
  std::vector<SuiteCriterion> out;
  for (const char* s : {"prop5", "identities"}) {
    const std::string a = json_text(to_json(run_suite(s, opt)));
    const std::string b = json_text(to_json(run_suite(s, opt)));
    out.push_back({"C9", std::string("suite '") + s + "' JSON byte-identical across two runs", a == b,
                   std::to_string(a.size()) + " bytes" + (a == b ? "" : ", contents differ")});
  }
  // the worker count changes scheduling, never results
  ExperimentConfig c = suites::example("coherent");
  c.workers = 1;
  ScanResult serial = eps_scan(c);
  c.workers = 4;
  ScanResult pooled = eps_scan(c);
  const bool same = serial.points == pooled.points && serial.criteria == pooled.criteria;
  out.push_back({"C9", "scan points independent of the worker count", same, same ? "identical" : "points differ"});
  return out;
}
}  // namespace detail

inline SuiteReport run_suite(const std::string& name, SuiteOptions opt) {
  std::vector<ExperimentConfig> configs = suite_configs(name);  // validates the name
  SuiteReport r;
  r.suite = name;
  r.seed = opt.seed;
  if (name == "all") {
    for (const auto& s : available_suites())
      if (s != "all") detail::absorb(r, run_suite(s, opt));
  } else if (name == "identities") {
    r.criteria = detail::identity_checks(opt.seed);
  } else if (name == "semiclassics") {
    r.criteria = detail::semiclassics_checks(opt.seed);
  } else if (name == "determinism") {
    r.criteria = detail::determinism_checks(opt);
  } else {
    for (auto& c : configs) {
      c.seed = opt.seed;
      c.workers = opt.workers;
      ScanResult s;
      try {
        s = eps_scan(c);
      } catch (const std::exception& e) {
        r.criteria.push_back({criterion_id(name), c.name + ": configuration", false, e.what()});
        continue;
      }
      for (const auto& k : s.criteria)
        r.criteria.push_back({criterion_id(name), c.name + ": " + k.description, k.passed, k.detail});
      r.scans.push_back(std::move(s));
    }
  }
  r.passed = !r.criteria.empty() &&
             std::all_of(r.criteria.begin(), r.criteria.end(), [](const SuiteCriterion& c) { return c.passed; });
  return r;
}

}  // namespace bornopp::harness
