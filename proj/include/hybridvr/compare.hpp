#ifndef HYBRIDVR_COMPARE_HPP
#define HYBRIDVR_COMPARE_HPP

#include <string>
#include <vector>

#include "hybridvr/importance.hpp"
#include "hybridvr/mc_engine.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/quadrature.hpp"

namespace hybridvr {

struct CompareRow {
  std::string method;  // "analog", "cadis" or "cadis_omega"
  double t_mc = 0.0;   // minutes
  double t_det = 0.0;  // minutes
  double fom_mc = 0.0;
  double fom_adjusted = 0.0;
  int deterministic_solves = 0;
  Tally tally;

  double sigma() const { return tally.total_mean * tally.total_rel_err; }
};

struct CompareReport {
  std::vector<CompareRow> rows;

  const CompareRow& row(const std::string& method) const;
};

struct CompareOptions {
  McOptions mc;
  SolveOptions solve;
  double rho = 5.0;
};

// Runs analog, CADIS and CADIS-Omega Monte Carlo with identical history
// counts and seeds.
CompareReport run_compare(const ProblemModel& model, const QuadratureSet& quad,
                          const CompareOptions& options);

// Builds one report row from a finished tally and deterministic time.
CompareRow make_row(std::string method, const Tally& tally, double t_det_minutes,
                    int deterministic_solves);

// Fixed-width table with one line per method.
std::string format_compare_table(const CompareReport& report);

// "method,group,mean,rel_err" rows, one per method and group, followed by
// the method totals with group "total".
std::string compare_groups_csv(const CompareReport& report);

// "method,t_mc_min,t_det_min,fom_mc,fom_adjusted,total_mean,total_sigma"
std::string compare_summary_csv(const CompareReport& report);

}  // namespace hybridvr

#endif  // HYBRIDVR_COMPARE_HPP
