#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <thread>

#include "bornopp/harness/config.hpp"

namespace bornopp::harness {

struct ScanPoint {
  double epsilon = 0.0;
  double t = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  bool logged = false;  // outside the asserted set
  std::string message;
  double seconds = 0.0;  // wall clock for the whole epsilon row; never serialized unless asked for

  bool operator==(const ScanPoint& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return same(epsilon, o.epsilon) && same(t, o.t) && same(error, o.error) && ok == o.ok && logged == o.logged &&
           message == o.message;
  }
};

struct TimeFit {
  double t = 0.0;
  SlopeFit fit;
};

struct CriterionResult {
  std::string description;
  bool passed = false;
  std::string detail;

  bool operator==(const CriterionResult&) const = default;
};

struct WignerSnapshot {
  double epsilon = 0.0;
  double t = 0.0;
  WignerMarginal marginal;
};

struct ScanResult {
  ExperimentConfig config;
  std::vector<ScanPoint> points;
  std::vector<TimeFit> fits;
  std::optional<HittingTimes> hitting;
  std::vector<CriterionResult> criteria;
  bool passed = false;
  std::vector<WignerSnapshot> snapshots;  // written separately, never part of the JSON report
};

// Points sorted by epsilon descending (ladder order), then t ascending.
inline void sort_points(std::vector<ScanPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const ScanPoint& a, const ScanPoint& b) {
    if (a.epsilon != b.epsilon) return a.epsilon > b.epsilon;
    return a.t < b.t;
  });
}

namespace detail {

inline bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

inline std::vector<double> errors_at(const std::vector<ScanPoint>& pts, double t, std::vector<double>* eps = nullptr) {
  std::vector<double> out;
  for (const auto& p : pts)
    if (!p.logged && same_time(p.t, t)) {
      out.push_back(p.ok ? p.error : std::numeric_limits<double>::quiet_NaN());
      if (eps) eps->push_back(p.epsilon);
    }
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

inline MolecularWave with_components(const NuclearWave& phi, const std::vector<double>& c, int m) {
  require(static_cast<int>(c.size()) == m, "state components: expected " + std::to_string(m) + " fiber weights");
  CVector v = Eigen::Map<const RVector>(c.data(), m).cast<Complex>();
  require(v.norm() > 0.0, "state components: all weights are zero");
  v /= v.norm();
  const Eigen::Index n = phi.grid.ssize();
  CVector out(n * m);
  for (Eigen::Index i = 0; i < n; ++i) out.segment(i * m, m) = phi.values[i] * v;
  return MolecularWave(phi.grid, m, phi.epsilon, std::move(out));
}

inline Field a_ext_field(const ExperimentConfig& c) {
  if (!c.a_ext) return nullptr;
  const double a = c.a_ext->amplitude, x0 = c.grid.x_min, len = c.grid.x_max - c.grid.x_min;
  const int k = c.a_ext->periods;
  return [a, x0, len, k](double x) { return a * std::sin(2.0 * pi * k * (x - x0) / len); };
}

// Errors for one epsilon at every time; throws only for setup failures.
struct Row {
  std::vector<double> errors;
  std::vector<std::string> messages;
  std::vector<WignerSnapshot> snapshots;
};

template <typename F>
void per_time(Row& row, const std::vector<double>& times, F&& f) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    try {
      row.errors[k] = f(times[k]);
    } catch (const std::exception& e) {
      row.messages[k] = e.what();
    }
  }
}

inline Row evaluate_theorem1(const ExperimentConfig& c, double eps, const std::vector<double>& times) {
  Row row{std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()),
          std::vector<std::string>(times.size()), {}};
  const Grid1D g = c.make_grid();
  const ElectronicModel model = c.make_model();
  BandData band = band_decompose(model, g, c.bands, band_options(c, Gauge::none));
  DenseHamiltonian h = assemble_full(model, g, eps, a_ext_field(c));
  DenseHamiltonian hd;
  if (std::isfinite(c.lambda.lo) || std::isfinite(c.lambda.hi))
    hd = assemble_diag_local(h, smoothed_projection_family(band, c.delta)[3]);
  else
    hd = assemble_diag(h, full_projection(band));
  SpectralPropagator full = diagonalize(h);
  SpectralPropagator diag = diagonalize(hd);
  std::optional<ProjectionOperator> cutoff;
  if (c.energy_cutoff) cutoff = energy_cutoff(full, *c.energy_cutoff);

  std::vector<MolecularWave> states;
  for (const auto& s : c.states) {
    NuclearWave phi = make_state(s, g, eps).wave;
    states.push_back(s.components.empty() ? lift_to_tracked_band(phi, band, c.lift_band)
                                          : with_components(phi, s.components, model.fiber_dim()));
  }
  per_time(row, times, [&](double t) {
    double worst = 0.0;
    for (const auto& psi : states)
      worst = std::max(worst, cutoff ? theorem1_cutoff_error(full, diag, *cutoff, psi, t) : theorem1_error(full, diag, psi, t));
    return worst;
  });
  if (c.wigner_snapshots && !states.empty())
    for (double t : times) {
      MolecularWave w = evolve(full, states.front(), t);
      row.snapshots.push_back({eps, t, wigner_marginal(w)});
    }
  return row;
}

inline Row evaluate_theorem4(const ExperimentConfig& c, double eps, const std::vector<double>& times,
                             const std::optional<TimeWindow>& window, std::size_t asserted) {
  Row row{std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()),
          std::vector<std::string>(times.size()), {}};
  const Grid1D g = c.make_grid();
  const ElectronicModel model = c.make_model();
  BandData band = band_decompose(model, g, c.bands, band_options(c, c.gauge));
  const Field aext = a_ext_field(c);
  SpectralPropagator full = diagonalize(assemble_full(model, g, eps, aext));
  SpectralPropagator bo = diagonalize(assemble_bo(band, eps, aext, {c.include_a_geo, c.delta}));
  ApproxProjection pg(band, c.delta, PhaseSpaceRegion(c.gamma, c.alpha), eps);
  std::vector<MolecularWave> states;
  for (const auto& s : c.states) {
    NuclearWave phi = make_state(s, g, eps).wave;
    states.push_back(s.components.empty() ? lift_to_band(phi, band)
                                          : with_components(phi, s.components, model.fiber_dim()));
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto w = k < asserted ? window : std::nullopt;
    try {
      double worst = 0.0;
      for (const auto& psi : states) worst = std::max(worst, theorem4_error(full, bo, band, pg, psi, times[k], w));
      row.errors[k] = worst;
    } catch (const std::exception& e) {
      row.messages[k] = e.what();
    }
  }
  if (c.wigner_snapshots && !states.empty())
    for (double t : times) row.snapshots.push_back({eps, t, wigner_marginal(evolve(full, pg.apply(states.front()), t))});
  return row;
}

inline Row evaluate_proposition3(const ExperimentConfig& c, double eps, const std::vector<double>& times,
                                 const std::optional<TimeWindow>& window, std::size_t asserted) {
  Row row{std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()),
          std::vector<std::string>(times.size()), {}};
  const Grid1D g = c.make_grid();
  BandData band = band_decompose(c.make_model(), g, c.bands, band_options(c, c.gauge));
  SpectralPropagator bo = diagonalize(assemble_bo(band, eps, a_ext_field(c), {c.include_a_geo, c.delta}));
  const PhaseSpaceRegion region(c.gamma, c.alpha);
  std::vector<NuclearWave> states;
  for (const auto& s : c.states) states.push_back(make_state(s, g, eps).wave);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto w = k < asserted ? window : std::nullopt;
    try {
      double worst = 0.0;
      for (const auto& phi : states)
        worst = std::max(worst, proposition3_leakage(bo, c.lambda, c.delta, region, phi, times[k], w));
      row.errors[k] = worst;
    } catch (const std::exception& e) {
      row.messages[k] = e.what();
    }
  }
  return row;
}

// Time-independent: every time sample receives the same residual.
inline Row evaluate_proposition5(const ExperimentConfig& c, double eps, const std::vector<double>& times) {
  Row row{std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()),
          std::vector<std::string>(times.size()), {}};
  const Grid1D g = c.make_grid();
  const ElectronicModel model = c.make_model();
  BandData band = band_decompose(model, g, c.bands, band_options(c, c.gauge));
  std::vector<MolecularWave> states;
  for (const auto& s : c.states) {
    NuclearWave phi = make_state(s, g, eps).wave;
    states.push_back(s.components.empty() ? lift_to_band(phi, band)
                                          : with_components(phi, s.components, model.fiber_dim()));
  }
  const double r = proposition5_residual(symbol_from_name(c.symbols.front()), band, c.delta, eps, states);
  std::fill(row.errors.begin(), row.errors.end(), r);
  return row;
}

// Max over states and symbols of |<phi_t, a^W phi_t> - int a o Phi^t d rho|
// for a scalar model, where the band energy is the potential itself.
inline Row evaluate_observables(const ExperimentConfig& c, double eps, const std::vector<double>& times) {
  Row row{std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN()),
          std::vector<std::string>(times.size()), {}};
  const Grid1D g = c.make_grid();
  const ElectronicModel model = c.make_model();
  require(model.fiber_dim() == 1, "observables: needs a scalar model (fiber dimension 1)");
  BandData band = band_decompose(model, g, {0}, band_options(c, Gauge::none));
  const Potential pot = potentials::band(band);
  SpectralPropagator h = diagonalize(assemble_full(model, g, eps, a_ext_field(c)));
  std::vector<SemiclassicalState> states;
  for (const auto& s : c.states) states.push_back(make_state(s, g, eps));
  FlowOptions flow;
  flow.dt = c.hitting.dt;
  per_time(row, times, [&](double t) {
    double worst = 0.0;
    for (const auto& s : states)
      for (const auto& name : c.symbols)
        worst = std::max(worst, egorov_residual(h, symbol_from_name(name), s.wave, s.density, pot, t, flow));
    return worst;
  });
  if (c.wigner_snapshots && !states.empty())
    for (double t : times) {
      NuclearWave w = states.front().wave;
      w.values = h.evolve(w.values, t);
      row.snapshots.push_back({eps, t, wigner_marginal(w)});
    }
  return row;
}

inline std::string describe(const Assertion& a, double t) {
  const std::string at = " at t = " + fmt(t);
  if (a.type == "slope_range") {
    if (std::isfinite(a.max)) return "slope in [" + fmt(a.min) + ", " + fmt(a.max) + "]" + at;
    return "slope >= " + fmt(a.min) + at;
  }
  if (a.type == "t_plus_at_least") return "T_+ >= " + fmt(a.value);
  if (a.type == "min_error_at_least") return "min error over the ladder >= " + fmt(a.value) + at;
  if (a.type == "max_error_at_most") return "max error over the ladder <= " + fmt(a.value) + at;
  return "error(t = " + fmt(a.t_num) + ") / error(t = " + fmt(a.t_den) + ") <= " + fmt(a.value) + " at eps = " +
         fmt(a.epsilon);
}

inline CriterionResult judge(const Assertion& a, const ScanResult& r) {
  if (a.type == "t_plus_at_least") {
    CriterionResult out{describe(a, 0.0), false, "no hitting times"};
    if (r.hitting) {
      out.detail = describe_window(*r.hitting);
      out.passed = r.hitting->t_plus >= a.value;
    }
    return out;
  }
  double t = a.t;
  if (a.t_plus_fraction > 0.0) {
    if (!r.hitting) return {describe(a, t), false, "no hitting times available for a T_+-relative time"};
    t = a.t_plus_fraction * r.hitting->t_plus;
  }
  CriterionResult out{describe(a, t), false, ""};
  if (a.type == "slope_range") {
    const TimeFit* tf = nullptr;
    for (const auto& f : r.fits)
      if (same_time(f.t, t)) tf = &f;
    if (!tf) {
      out.detail = "no asserted time sample at t = " + fmt(t);
      return out;
    }
    const SlopeFit& f = tf->fit;
    std::ostringstream d;
    d << "slope " << fmt(f.slope) << ", residual " << fmt(f.residual) << (f.dropped_largest ? ", largest eps dropped" : "");
    if (!f.reported) d << ", residual above threshold " << fmt(r.config.fit_threshold) << " so no slope is reported";
    out.detail = d.str();
    out.passed = f.reported && f.slope >= a.min && f.slope <= a.max;
    return out;
  }
  if (a.type == "min_error_at_least" || a.type == "max_error_at_most") {
    std::vector<double> e = errors_at(r.points, t);
    if (e.empty()) {
      out.detail = "no asserted time sample at t = " + fmt(t);
      return out;
    }
    bool finite = true;
    double lo = infinity, hi = 0.0;
    for (double x : e) {
      finite = finite && std::isfinite(x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    out.detail = "min " + fmt(lo) + ", max " + fmt(hi);
    out.passed = finite && (a.type == "min_error_at_least" ? lo >= a.value : hi <= a.value);
    if (!finite) out.detail += ", some points failed";
    return out;
  }
  double num = std::numeric_limits<double>::quiet_NaN(), den = num;
  for (const auto& p : r.points) {
    if (p.epsilon != a.epsilon || !p.ok) continue;
    if (same_time(p.t, a.t_num)) num = p.error;
    if (same_time(p.t, a.t_den)) den = p.error;
  }
  const double ratio = num / den;
  out.detail = "ratio " + fmt(ratio);
  out.passed = std::isfinite(ratio) && ratio <= a.value;
  return out;
}

}  // namespace detail

// Fit per asserted time and evaluate the configured assertions.
inline void finalize(ScanResult& r, const std::vector<double>& asserted) {
  sort_points(r.points);
  r.fits.clear();
  std::vector<double> ts = asserted;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), detail::same_time), ts.end());
  for (double t : ts) {
    std::vector<double> eps;
    std::vector<double> err = detail::errors_at(r.points, t, &eps);
    r.fits.push_back({t, fit_slope(eps, err, r.config.fit_threshold)});
  }
  r.criteria.clear();
  for (const auto& a : r.config.assertions) r.criteria.push_back(detail::judge(a, r));
  r.passed = std::all_of(r.criteria.begin(), r.criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

// Runs f(i) for i in [0, n) on `workers` threads; results are written by index
// so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

// Validates, evaluates every (eps, t) point and fits. Point failures are
// recorded, not thrown; invalid configs throw precondition_error.
inline ScanResult eps_scan(const ExperimentConfig& c) {
  ScanResult r;
  r.config = c;
  r.hitting = validate(c);
  const std::vector<double> asserted = asserted_times(c, r.hitting);
  const std::vector<double> logged = logged_times(c, r.hitting);
  std::vector<double> times = asserted;
  times.insert(times.end(), logged.begin(), logged.end());
  std::optional<TimeWindow> window;
  if (r.hitting) window = TimeWindow{r.hitting->t_minus, r.hitting->t_plus};

  std::vector<detail::Row> rows(c.epsilons.size());
  std::vector<std::string> failures(c.epsilons.size());
  std::vector<double> seconds(c.epsilons.size(), 0.0);
  parallel_for(c.epsilons.size(), c.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = c.epsilons[i];
    try {
      switch (c.experiment) {
        case ExperimentKind::theorem1: rows[i] = detail::evaluate_theorem1(c, eps, times); break;
        case ExperimentKind::theorem4:
          rows[i] = detail::evaluate_theorem4(c, eps, times, window, asserted.size());
          break;
        case ExperimentKind::proposition3:
          rows[i] = detail::evaluate_proposition3(c, eps, times, window, asserted.size());
          break;
        case ExperimentKind::proposition5: rows[i] = detail::evaluate_proposition5(c, eps, times); break;
        case ExperimentKind::observables: rows[i] = detail::evaluate_observables(c, eps, times); break;
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t i = 0; i < c.epsilons.size(); ++i)
    for (std::size_t k = 0; k < times.size(); ++k) {
      ScanPoint p;
      p.epsilon = c.epsilons[i];
      p.t = times[k];
      p.logged = k >= asserted.size();
      p.seconds = seconds[i];
      if (!failures[i].empty()) {
        p.message = failures[i];
      } else {
        p.error = rows[i].errors[k];
        p.message = rows[i].messages[k];
        p.ok = p.message.empty() && std::isfinite(p.error);
        if (p.message.empty() && !p.ok) p.message = "non-finite error";
      }
      r.points.push_back(std::move(p));
    }
  for (auto& row : rows)
    for (auto& s : row.snapshots) r.snapshots.push_back(std::move(s));
  finalize(r, asserted);
  return r;
}

// Least-squares slope over the points with the same t and epsilon >= p's,
// in ladder order; NaN with fewer than two points.
inline double slope_so_far(const std::vector<ScanPoint>& pts, const ScanPoint& p) {
  std::vector<double> eps, err;
  for (const auto& q : pts)
    if (detail::same_time(q.t, p.t) && q.logged == p.logged && q.epsilon >= p.epsilon && q.ok) {
      eps.push_back(q.epsilon);
      err.push_back(q.error);
    }
  return least_squares_slope(eps, err).slope;
}

}  // namespace bornopp::harness
