#pragma once

#include <filesystem>
#include <iomanip>

#include "bornopp/harness/scan.hpp"

namespace bornopp::harness {

inline constexpr int report_schema_version = 1;

inline json to_json(const SlopeFit& f) {
  return {{"slope", detail::number_or_null(f.slope)},
          {"intercept", detail::number_or_null(f.intercept)},
          {"residual", detail::number_or_null(f.residual)},
          {"dropped_largest", f.dropped_largest},
          {"reported", f.reported},
          {"points", f.points}};
}

inline SlopeFit slope_fit_from_json(const json& j) {
  SlopeFit f;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.slope = detail::number_or(j.at("slope"), nan);
  f.intercept = detail::number_or(j.at("intercept"), nan);
  f.residual = detail::number_or(j.at("residual"), nan);
  f.dropped_largest = j.at("dropped_largest").get<bool>();
  f.reported = j.at("reported").get<bool>();
  f.points = j.at("points").get<std::size_t>();
  return f;
}

inline json to_json(const ScanResult& r) {
  const bool timing = r.config.record_timing;
  json j;
  j["schema_version"] = report_schema_version;
  j["config"] = to_json(r.config);
  json pts = json::array();
  for (const auto& p : r.points) {
    json q = {{"epsilon", p.epsilon},
              {"t", p.t},
              {"error", detail::number_or_null(p.error)},
              {"status", p.ok ? "ok" : "error"},
              {"logged", p.logged},
              {"message", p.message}};
    if (timing) q["seconds"] = p.seconds;
    pts.push_back(q);
  }
  j["points"] = pts;
  json fits = json::array();
  for (const auto& f : r.fits) fits.push_back({{"t", f.t}, {"fit", to_json(f.fit)}});
  j["fits"] = fits;
  if (r.hitting)
    j["hitting"] = {{"t_minus", r.hitting->t_minus},
                    {"t_plus", r.hitting->t_plus},
                    {"minus_capped", r.hitting->minus_capped},
                    {"plus_capped", r.hitting->plus_capped},
                    {"cloud_size", r.hitting->cloud_size}};
  else
    j["hitting"] = nullptr;
  json crit = json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"description", c.description}, {"passed", c.passed}, {"detail", c.detail}});
  j["criteria"] = crit;
  j["passed"] = r.passed;
  return j;
}

inline ScanResult scan_result_from_json(const json& j) {
  if (j.value("schema_version", 0) != report_schema_version)
    throw precondition_error("report: unsupported schema_version (expected " + std::to_string(report_schema_version) +
                             ")");
  ScanResult r;
  r.config = config_from_json(j.at("config"));
  for (const auto& q : j.at("points")) {
    ScanPoint p;
    p.epsilon = q.at("epsilon").get<double>();
    p.t = q.at("t").get<double>();
    p.error = detail::number_or(q.at("error"), std::numeric_limits<double>::quiet_NaN());
    p.ok = q.at("status").get<std::string>() == "ok";
    p.logged = q.at("logged").get<bool>();
    p.message = q.at("message").get<std::string>();
    p.seconds = q.value("seconds", 0.0);
    r.points.push_back(std::move(p));
  }
  for (const auto& f : j.at("fits")) r.fits.push_back({f.at("t").get<double>(), slope_fit_from_json(f.at("fit"))});
  if (!j.at("hitting").is_null()) {
    const json& h = j["hitting"];
    HittingTimes ht;
    ht.t_minus = h.at("t_minus").get<double>();
    ht.t_plus = h.at("t_plus").get<double>();
    ht.minus_capped = h.at("minus_capped").get<bool>();
    ht.plus_capped = h.at("plus_capped").get<bool>();
    ht.cloud_size = h.at("cloud_size").get<std::size_t>();
    r.hitting = ht;
  }
  for (const auto& c : j.at("criteria"))
    r.criteria.push_back(
        {c.at("description").get<std::string>(), c.at("passed").get<bool>(), c.at("detail").get<std::string>()});
  r.passed = j.at("passed").get<bool>();
  return r;
}

// Field-wise equality with NaN == NaN; snapshots are not part of the report.
inline bool same_report(const ScanResult& a, const ScanResult& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  if (to_json(a.config) != to_json(b.config) || a.points != b.points || a.criteria != b.criteria ||
      a.passed != b.passed || a.fits.size() != b.fits.size() || a.hitting.has_value() != b.hitting.has_value())
    return false;
  for (std::size_t i = 0; i < a.fits.size(); ++i) {
    const SlopeFit &f = a.fits[i].fit, &g = b.fits[i].fit;
    if (!same(a.fits[i].t, b.fits[i].t) || !same(f.slope, g.slope) || !same(f.intercept, g.intercept) ||
        !same(f.residual, g.residual) || f.dropped_largest != g.dropped_largest || f.reported != g.reported ||
        f.points != g.points)
      return false;
  }
  if (a.hitting) {
    const HittingTimes &h = *a.hitting, &k = *b.hitting;
    if (h.t_minus != k.t_minus || h.t_plus != k.t_plus || h.minus_capped != k.minus_capped ||
        h.plus_capped != k.plus_capped || h.cloud_size != k.cloud_size)
      return false;
  }
  return true;
}

inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

inline std::string csv_text(const ScanResult& r) {
  std::ostringstream s;
  s << "epsilon,t,error,slope_so_far\n";
  s << std::setprecision(17);
  for (const auto& p : r.points) {
    s << p.epsilon << ',' << p.t << ',';
    if (p.ok) s << p.error;
    s << ',';
    const double sl = p.ok ? slope_so_far(r.points, p) : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(sl)) s << sl;
    s << '\n';
  }
  return s.str();
}

inline std::string wigner_csv_text(const WignerSnapshot& w, const Grid1D& g) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "# wigner marginal, grid [" << g.x_min() << ", " << g.x_max() << ") n = " << g.size() << ", epsilon = "
    << w.epsilon << ", t = " << w.t << "\n";
  s << "q,p,w\n";
  const WignerMarginal& m = w.marginal;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) s << m.q[i] << ',' << m.p[j] << ',' << m.values(i, j) << '\n';
  return s.str();
}

enum class ReportFormat { csv, json };

inline ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw precondition_error("unknown report format '" + s + "' (available: csv, json)");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void emit_report(const ScanResult& r, const std::filesystem::path& path, ReportFormat format) {
  write_text(path, format == ReportFormat::json ? json_text(to_json(r)) : csv_text(r));
}

inline ScanResult read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report '" + path.string() + "'");
  return scan_result_from_json(json::parse(in));
}

// <dir>/<stem>.json, <stem>.csv and, when enabled, one Wigner CSV per point.
inline std::vector<std::filesystem::path> write_outputs(const ScanResult& r, const std::filesystem::path& dir) {
  const std::string stem = r.config.stem();
  std::vector<std::filesystem::path> written{dir / (stem + ".json"), dir / (stem + ".csv")};
  emit_report(r, written[0], ReportFormat::json);
  emit_report(r, written[1], ReportFormat::csv);
  const Grid1D g = r.config.make_grid();
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    std::ostringstream name;
    name << stem << "_wigner_" << std::setw(3) << std::setfill('0') << k << ".csv";
    written.push_back(dir / name.str());
    write_text(written.back(), wigner_csv_text(r.snapshots[k], g));
  }
  return written;
}

}  // namespace bornopp::harness
