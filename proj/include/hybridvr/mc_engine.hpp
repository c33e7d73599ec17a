#ifndef HYBRIDVR_MC_ENGINE_HPP
#define HYBRIDVR_MC_ENGINE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "hybridvr/importance.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/rng.hpp"

namespace hybridvr {

// Detector track-length tally. mean[g] is the detector-averaged reaction
// rate density S * E[sum w * l * sigma_d] / V_det, so for sigma_d = 1 it is
// the mean scalar flux over the detector cells.
struct Tally {
  int groups = 0;
  std::vector<double> mean;
  std::vector<double> rel_err;  // 0 with scored[g] == false means "no score"
  std::vector<bool> scored;
  double total_mean = 0.0;
  double total_rel_err = 0.0;
  bool total_scored = false;
  std::uint64_t histories = 0;
  double time_minutes = 0.0;
  double detector_volume = 0.0;

  // Weight escaping through each face (Face order) per source particle.
  std::array<double, 4> leakage{};
  std::array<double, 4> leakage_rel_err{};

  // Diagnostics.
  std::uint64_t collisions = 0;
  std::uint64_t splits = 0;
  std::uint64_t roulette_kills = 0;
  std::uint64_t tracks = 0;  // particle tracks started, including split copies
  double min_weight = 0.0;
  double max_weight = 0.0;

  // Detector response in responses/s: total_mean * detector_volume.
  double response() const { return total_mean * detector_volume; }
};

// Relative error of a mean estimated from per-history sums.
// Returns 0 when the mean is zero.
double relative_error(double sum, double sum_sq, std::uint64_t n);

// Figure of merit 1 / (T * RE^2). Throws std::invalid_argument unless both
// are positive.
double fom(double minutes, double rel_err);

struct WindowBounds {
  double low = 0.0;
  double surv = 0.0;
  double high = 0.0;
};

struct WindowAction {
  enum class Kind { unchanged, split, roulette_survive, roulette_kill };
  Kind kind = Kind::unchanged;
  int copies = 1;       // number of particles after the event
  double weight = 0.0;  // weight of each surviving particle
};

constexpr int kMaxSplit = 10;

// Splits above w_high into min(ceil(w / w_surv), 10) equal copies, plays
// roulette below w_low with survival probability w / w_surv, otherwise
// leaves the particle alone.
WindowAction apply_weight_window(double weight, const WindowBounds& bounds, Rng& rng);

struct SourceSite {
  int cell = 0;
  int group = 0;
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;  // direction cosines (x, y, z)
  double v = 0.0;
  double w = 0.0;
  double weight = 1.0;
};

// Discrete sampler over (cell, group) bins of q_hat * dV in row-major cell
// then group order.
class BiasedSourceSampler {
 public:
  BiasedSourceSampler(const ImportanceMap& map, const Mesh& mesh);
  // First bin whose cumulative probability exceeds u.
  std::pair<int, int> select(double u) const;
  SourceSite sample(Rng& rng) const;

 private:
  const ImportanceMap& map_;
  const Mesh& mesh_;
  std::vector<double> cdf_;
  std::vector<int> bins_;  // flat c * G + g of each nonzero bin
};

SourceSite sample_biased_source(const ImportanceMap& map, const Mesh& mesh, Rng& rng);

struct McOptions {
  std::uint64_t histories = 1000000;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Runs N independent histories. With an importance map, births are drawn
// from q_hat with weight w0 and mesh weight windows are applied on entry to
// a windowed cell and after collisions inside one. Results are bit-identical
// for any worker count.
Tally run_histories(const ProblemModel& model, const ImportanceMap* importance,
                    const McOptions& options);

}  // namespace hybridvr

#endif  // HYBRIDVR_MC_ENGINE_HPP
