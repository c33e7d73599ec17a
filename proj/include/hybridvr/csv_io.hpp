#ifndef HYBRIDVR_CSV_IO_HPP
#define HYBRIDVR_CSV_IO_HPP

#include <filesystem>
#include <string>

#include "hybridvr/importance.hpp"
#include "hybridvr/mc_engine.hpp"
#include "hybridvr/sn_solver.hpp"

namespace hybridvr {

// All numeric values are written with 17 significant digits so that reading
// a file back reproduces the in-memory doubles exactly.

// "i,j,group,value"
void write_scalar_flux(const std::filesystem::path& path, const ScalarFluxField& phi,
                       const Mesh& mesh);
ScalarFluxField read_scalar_flux(const std::filesystem::path& path, const Mesh& mesh,
                                 int groups);

// "i,j,group,dir,value"
void write_angular_flux(const std::filesystem::path& path, const AngularFluxField& psi,
                        const Mesh& mesh);

// Weight-window file: "# method=<tag> R=<R> rho=<rho> nx=<nx> ny=<ny> groups=<G>"
// then "i,j,group,w_low,w_surv,w_high" for every cell and group (zeros where
// there is no window). Biased-source file: same comment line, then
// "i,j,group,q_hat,w0" for every bin with q_hat > 0.
void write_weight_windows(const std::filesystem::path& path, const ImportanceMap& map);
void write_biased_source(const std::filesystem::path& path, const ImportanceMap& map);

// Reads "<prefix>.ww.csv" and "<prefix>.src.csv" back into a map.
ImportanceMap read_importance_map(const std::filesystem::path& ww_path,
                                  const std::filesystem::path& src_path);

std::filesystem::path ww_path(const std::string& prefix);
std::filesystem::path biased_source_path(const std::string& prefix);

// "group,mean,rel_err" rows followed by "total,<mean>,<rel_err>",
// "histories,<N>", and, when include_timing is set, "time_minutes,<T>" and
// "fom,<value>". Groups without score are written with rel_err "nan".
std::string tally_to_csv(const Tally& tally, bool include_timing);
void write_tally(const std::filesystem::path& path, const Tally& tally, bool include_timing);

// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace hybridvr

#endif  // HYBRIDVR_CSV_IO_HPP
