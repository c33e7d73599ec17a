#include "hybridvr/compare.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hybridvr/csv_io.hpp"

namespace hybridvr {

namespace {

double safe_fom(double minutes, double rel_err) {
  if (minutes <= 0.0 || rel_err <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return fom(minutes, rel_err);
}

}  // namespace

const CompareRow& CompareReport::row(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return r;
  throw std::out_of_range("no compare row for " + method);
}

CompareRow make_row(std::string method, const Tally& tally, double t_det_minutes,
                    int deterministic_solves) {
  CompareRow r;
  r.method = std::move(method);
  r.tally = tally;
  r.t_mc = tally.time_minutes;
  r.t_det = t_det_minutes;
  r.deterministic_solves = deterministic_solves;
  r.fom_mc = safe_fom(r.t_mc, tally.total_rel_err);
  r.fom_adjusted = safe_fom(r.t_mc + r.t_det, tally.total_rel_err);
  return r;
}

CompareReport run_compare(const ProblemModel& model, const QuadratureSet& quad,
                          const CompareOptions& options) {
  CompareReport report;
  report.rows.push_back(make_row("analog", run_histories(model, nullptr, options.mc), 0.0, 0));

  for (VrMethod method : {VrMethod::cadis, VrMethod::cadis_omega}) {
    VrOptions vr;
    vr.method = method;
    vr.rho = options.rho;
    vr.solve = options.solve;
    const VrResult result = make_vr(model, quad, vr);
    const Tally tally = run_histories(model, &result.map, options.mc);
    report.rows.push_back(make_row(std::string(to_string(method)), tally, result.seconds / 60.0,
                                   static_cast<int>(result.solves.size())));
  }
  return report;
}

std::string format_compare_table(const CompareReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s %14s %12s %10s\n", "method",
                "T_MC(min)", "T_det(min)", "FOM_MC", "FOM_adj", "total_mean", "sigma", "RE");
  os << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-12s %12.4g %12.4g %12.4g %12.4g %14.6e %12.4e %10.4g\n",
                  r.method.c_str(), r.t_mc, r.t_det, r.fom_mc, r.fom_adjusted,
                  r.tally.total_mean, r.sigma(), r.tally.total_rel_err);
    os << line;
  }
  return os.str();
}

std::string compare_groups_csv(const CompareReport& report) {
  std::ostringstream os;
  os << "method,group,mean,rel_err\n";
  for (const auto& r : report.rows) {
    for (int g = 0; g < r.tally.groups; ++g)
      os << r.method << ',' << g << ',' << format_double(r.tally.mean[g]) << ','
         << (r.tally.scored[g] ? format_double(r.tally.rel_err[g]) : std::string("nan")) << '\n';
    os << r.method << ",total," << format_double(r.tally.total_mean) << ','
       << (r.tally.total_scored ? format_double(r.tally.total_rel_err) : std::string("nan"))
       << '\n';
  }
  return os.str();
}

std::string compare_summary_csv(const CompareReport& report) {
  std::ostringstream os;
  os << "method,t_mc_min,t_det_min,fom_mc,fom_adjusted,total_mean,total_sigma\n";
  for (const auto& r : report.rows)
    os << r.method << ',' << format_double(r.t_mc) << ',' << format_double(r.t_det) << ','
       << format_double(r.fom_mc) << ',' << format_double(r.fom_adjusted) << ','
       << format_double(r.tally.total_mean) << ',' << format_double(r.sigma()) << '\n';
  return os.str();
}

}  // namespace hybridvr
