#include "hybridvr/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlockSize = 1000;

void isotropic(Rng& rng, double& u, double& v, double& w) {
  w = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  u = s * std::cos(phi);
  v = s * std::sin(phi);
}

struct Particle {
  double x, y;
  double u, v, w;
  int i, j, g;
  double weight;
  double tau;  // remaining optical depth to the next collision, < 0 if unsampled
};

// Sums over the histories of one block, merged in block order.
struct BlockSums {
  std::vector<double> sum, sum_sq;
  double total = 0.0, total_sq = 0.0;
  std::array<double, 4> leak{}, leak_sq{};
  std::uint64_t collisions = 0, splits = 0, kills = 0, tracks = 0;
  double min_weight = kInf, max_weight = 0.0;
};

// Read-only per-run tables shared by all workers.
struct Tables {
  const Mesh* mesh = nullptr;
  int G = 0;
  std::vector<double> sigma_t;     // [c * G + g]
  std::vector<double> p_absorb;    // [c * G + g]
  std::vector<double> sigma_d;     // [c * G + g]
  std::vector<int> material;       // [c]
  std::vector<std::vector<double>> scatter_cdf;  // [mat * G + g][g']
  std::array<Boundary, 4> boundary{};

  // Analog source selection.
  std::vector<double> source_cdf;  // over sources
  const std::vector<SourceSpec>* sources = nullptr;
  std::vector<std::vector<double>> spectrum_cdf;

  const ImportanceMap* map = nullptr;
  const BiasedSourceSampler* sampler = nullptr;
};

int sample_discrete(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<int>(it - cdf.begin()), static_cast<int>(cdf.size()) - 1);
}

class HistoryRunner {
 public:
  explicit HistoryRunner(const Tables& t) : t_(t), score_(static_cast<std::size_t>(t.G)) {}

  void run(std::uint64_t seed, std::uint64_t history, BlockSums& acc) {
    Rng rng(seed, history);
    std::fill(score_.begin(), score_.end(), 0.0);
    leak_.fill(0.0);
    bank_.clear();
    bank_.push_back(birth(rng));
    while (!bank_.empty()) {
      Particle p = bank_.back();
      bank_.pop_back();
      ++acc.tracks;
      transport(p, rng, acc);
    }
    double tot = 0.0;
    for (int g = 0; g < t_.G; ++g) {
      acc.sum[g] += score_[g];
      acc.sum_sq[g] += score_[g] * score_[g];
      tot += score_[g];
    }
    acc.total += tot;
    acc.total_sq += tot * tot;
    for (int f = 0; f < 4; ++f) {
      acc.leak[f] += leak_[f];
      acc.leak_sq[f] += leak_[f] * leak_[f];
    }
  }

 private:
  Particle birth(Rng& rng) const {
    const Mesh& mesh = *t_.mesh;
    SourceSite s;
    if (t_.sampler) {
      s = t_.sampler->sample(rng);
    } else {
      const SourceSpec& src = (*t_.sources)[sample_discrete(t_.source_cdf, rng.uniform())];
      const int k = std::min(static_cast<int>(rng.uniform() * src.cells.size()),
                             static_cast<int>(src.cells.size()) - 1);
      s.cell = src.cells[k];
      const auto& spec_cdf = t_.spectrum_cdf[&src - t_.sources->data()];
      s.group = sample_discrete(spec_cdf, rng.uniform());
      const int i = mesh.column(s.cell), j = mesh.row(s.cell);
      s.x = mesh.x_edges[i] + rng.uniform() * (mesh.x_edges[i + 1] - mesh.x_edges[i]);
      s.y = mesh.y_edges[j] + rng.uniform() * (mesh.y_edges[j + 1] - mesh.y_edges[j]);
      isotropic(rng, s.u, s.v, s.w);
      s.weight = 1.0;
    }
    return {s.x, s.y, s.u, s.v, s.w, mesh.column(s.cell), mesh.row(s.cell), s.group, s.weight, -1.0};
  }

  // Applies the weight window of the particle's current cell and group.
  // Returns false when the particle is killed.
  bool window(Particle& p, Rng& rng, BlockSums& acc) {
    if (!t_.map) return true;
    const int c = p.j * t_.mesh->nx + p.i;
    if (!t_.map->has_window(c, p.g)) return true;
    const WindowBounds b{t_.map->w_low(c, p.g), t_.map->w_surv(c, p.g), t_.map->w_high(c, p.g)};
    const WindowAction a = apply_weight_window(p.weight, b, rng);
    switch (a.kind) {
      case WindowAction::Kind::unchanged:
        return true;
      case WindowAction::Kind::roulette_kill:
        ++acc.kills;
        return false;
      case WindowAction::Kind::roulette_survive:
        p.weight = a.weight;
        return true;
      case WindowAction::Kind::split:
        p.weight = a.weight;
        acc.splits += static_cast<std::uint64_t>(a.copies - 1);
        for (int k = 1; k < a.copies; ++k) {
          Particle copy = p;
          copy.tau = -1.0;
          bank_.push_back(copy);
        }
        return true;
    }
    return true;
  }

  void transport(Particle& p, Rng& rng, BlockSums& acc) {
    const Mesh& mesh = *t_.mesh;
    const int nx = mesh.nx, ny = mesh.ny, G = t_.G;
    const auto& xe = mesh.x_edges;
    const auto& ye = mesh.y_edges;
    for (;;) {
      acc.min_weight = std::min(acc.min_weight, p.weight);
      acc.max_weight = std::max(acc.max_weight, p.weight);
      const int c = p.j * nx + p.i;
      const std::size_t cg = static_cast<std::size_t>(c) * G + p.g;
      const double st = t_.sigma_t[cg];
      if (p.tau < 0.0) p.tau = -std::log(1.0 - rng.uniform());
      const double d_coll = st > 0.0 ? p.tau / st : kInf;
      const double tx = p.u > 0.0 ? (xe[p.i + 1] - p.x) / p.u
                        : p.u < 0.0 ? (xe[p.i] - p.x) / p.u : kInf;
      const double ty = p.v > 0.0 ? (ye[p.j + 1] - p.y) / p.v
                        : p.v < 0.0 ? (ye[p.j] - p.y) / p.v : kInf;
      const double d_edge = std::max(0.0, std::min(tx, ty));

      if (d_coll < d_edge) {
        p.x += p.u * d_coll;
        p.y += p.v * d_coll;
        score_[p.g] += p.weight * d_coll * t_.sigma_d[cg];
        p.tau = -1.0;
        ++acc.collisions;
        if (rng.uniform() < t_.p_absorb[cg]) return;
        const auto& cdf = t_.scatter_cdf[static_cast<std::size_t>(t_.material[c]) * G + p.g];
        p.g = sample_discrete(cdf, rng.uniform());
        isotropic(rng, p.u, p.v, p.w);
        if (!window(p, rng, acc)) return;
        continue;
      }

      score_[p.g] += p.weight * d_edge * t_.sigma_d[cg];
      if (st > 0.0) p.tau = std::max(0.0, p.tau - st * d_edge);
      if (tx <= ty) {
        p.y += p.v * d_edge;
        if (p.u > 0.0) {
          p.x = xe[p.i + 1];
          if (++p.i == nx) {
            --p.i;
            if (t_.boundary[1] == Boundary::vacuum) {
              leak_[1] += p.weight;
              return;
            }
            p.u = -p.u;
            continue;
          }
        } else {
          p.x = xe[p.i];
          if (--p.i < 0) {
            ++p.i;
            if (t_.boundary[0] == Boundary::vacuum) {
              leak_[0] += p.weight;
              return;
            }
            p.u = -p.u;
            continue;
          }
        }
      } else {
        p.x += p.u * d_edge;
        if (p.v > 0.0) {
          p.y = ye[p.j + 1];
          if (++p.j == ny) {
            --p.j;
            if (t_.boundary[3] == Boundary::vacuum) {
              leak_[3] += p.weight;
              return;
            }
            p.v = -p.v;
            continue;
          }
        } else {
          p.y = ye[p.j];
          if (--p.j < 0) {
            ++p.j;
            if (t_.boundary[2] == Boundary::vacuum) {
              leak_[2] += p.weight;
              return;
            }
            p.v = -p.v;
            continue;
          }
        }
      }
      if (!window(p, rng, acc)) return;
    }
  }

  const Tables& t_;
  std::vector<double> score_;
  std::array<double, 4> leak_{};
  std::vector<Particle> bank_;
};

}  // namespace

double relative_error(double sum, double sum_sq, std::uint64_t n) {
  if (n < 2 || sum == 0.0) return 0.0;
  const double N = static_cast<double>(n);
  const double mean = sum / N;
  const double var = std::max(0.0, sum_sq / N - mean * mean);
  return std::sqrt(var / ((N - 1.0) * mean * mean));
}

double fom(double minutes, double rel_err) {
  if (!(minutes > 0.0) || !(rel_err > 0.0))
    throw std::invalid_argument("fom: time and relative error must be positive");
  return 1.0 / (minutes * rel_err * rel_err);
}

WindowAction apply_weight_window(double weight, const WindowBounds& b, Rng& rng) {
  WindowAction a;
  a.weight = weight;
  if (weight > b.high) {
    const int n = static_cast<int>(std::min<double>(std::ceil(weight / b.surv), kMaxSplit));
    a.kind = WindowAction::Kind::split;
    a.copies = std::max(n, 1);
    a.weight = weight / a.copies;
  } else if (weight < b.low) {
    if (rng.uniform() < weight / b.surv) {
      a.kind = WindowAction::Kind::roulette_survive;
      a.weight = b.surv;
    } else {
      a.kind = WindowAction::Kind::roulette_kill;
      a.copies = 0;
      a.weight = 0.0;
    }
  }
  return a;
}

BiasedSourceSampler::BiasedSourceSampler(const ImportanceMap& map, const Mesh& mesh)
    : map_(map), mesh_(mesh) {
  const int G = map.groups;
  const double vol = mesh.cell_volume();
  double total = 0.0;
  for (int c = 0; c < map.cells(); ++c)
    for (int g = 0; g < G; ++g) {
      const double p = map.q_hat(c, g) * vol;
      if (p > 0.0) {
        total += p;
        cdf_.push_back(total);
        bins_.push_back(c * G + g);
      }
    }
  if (cdf_.empty()) throw SolverError("biased source is empty");
  for (double& v : cdf_) v /= total;
  cdf_.back() = 1.0;
}

std::pair<int, int> BiasedSourceSampler::select(double u) const {
  const int k = sample_discrete(cdf_, u);
  return {bins_[k] / map_.groups, bins_[k] % map_.groups};
}

SourceSite BiasedSourceSampler::sample(Rng& rng) const {
  SourceSite s;
  std::tie(s.cell, s.group) = select(rng.uniform());
  const int i = mesh_.column(s.cell), j = mesh_.row(s.cell);
  s.x = mesh_.x_edges[i] + rng.uniform() * (mesh_.x_edges[i + 1] - mesh_.x_edges[i]);
  s.y = mesh_.y_edges[j] + rng.uniform() * (mesh_.y_edges[j + 1] - mesh_.y_edges[j]);
  isotropic(rng, s.u, s.v, s.w);
  s.weight = map_.w0(s.cell, s.group);
  return s;
}

SourceSite sample_biased_source(const ImportanceMap& map, const Mesh& mesh, Rng& rng) {
  return BiasedSourceSampler(map, mesh).sample(rng);
}

Tally run_histories(const ProblemModel& model, const ImportanceMap* importance,
                    const McOptions& options) {
  if (options.histories < 1) throw std::invalid_argument("run_histories: need at least one history");
  const Mesh& mesh = model.mesh;
  const int C = mesh.cell_count();
  const int G = model.n_groups();
  const double S = total_source_strength(model);
  if (!(S > 0.0)) throw SolverError("run_histories: zero source");
  if (importance && (importance->nx != mesh.nx || importance->ny != mesh.ny ||
                     importance->groups != G))
    throw SolverError("importance map is " + std::to_string(importance->nx) + "x" +
                      std::to_string(importance->ny) + "x" + std::to_string(importance->groups) +
                      " (nx x ny x groups) but the model is " + std::to_string(mesh.nx) + "x" +
                      std::to_string(mesh.ny) + "x" + std::to_string(G));

  const auto t_start = std::chrono::steady_clock::now();

  Tables t;
  t.mesh = &mesh;
  t.G = G;
  t.boundary = mesh.boundary;
  t.sigma_t.resize(static_cast<std::size_t>(C) * G);
  t.p_absorb.resize(t.sigma_t.size());
  t.material = mesh.cell_material;
  const CellGroupField sigma_d = response_density(model);
  t.sigma_d.assign(sigma_d.values().begin(), sigma_d.values().end());
  for (int c = 0; c < C; ++c) {
    const Material& mat = model.material(c);
    for (int g = 0; g < G; ++g) {
      const double st = mat.sigma_t[g];
      t.sigma_t[static_cast<std::size_t>(c) * G + g] = st;
      t.p_absorb[static_cast<std::size_t>(c) * G + g] =
          st > 0.0 ? std::clamp(mat.absorption(g) / st, 0.0, 1.0) : 1.0;
    }
  }
  for (const Material& mat : model.xs.materials)
    for (int g = 0; g < G; ++g) {
      std::vector<double> cdf(G);
      double acc = 0.0;
      for (int gp = 0; gp < G; ++gp) cdf[gp] = (acc += mat.sigma_s[g][gp]);
      if (acc > 0.0)
        for (double& v : cdf) v /= acc;
      else
        std::fill(cdf.begin(), cdf.end(), 1.0);
      t.scatter_cdf.push_back(std::move(cdf));
    }
  double acc = 0.0;
  for (const auto& src : model.sources) {
    t.source_cdf.push_back(acc += src.strength);
    std::vector<double> cdf(G);
    double a = 0.0;
    for (int g = 0; g < G; ++g) cdf[g] = (a += src.spectrum[g]);
    for (double& v : cdf) v /= a;
    t.spectrum_cdf.push_back(std::move(cdf));
  }
  for (double& v : t.source_cdf) v /= acc;
  t.sources = &model.sources;

  std::optional<BiasedSourceSampler> sampler;
  if (importance) {
    sampler.emplace(*importance, mesh);
    t.map = importance;
    t.sampler = &*sampler;
  }

  const std::uint64_t N = options.histories;
  const std::uint64_t n_blocks = (N + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> blocks(n_blocks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    HistoryRunner runner(t);
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      BlockSums& s = blocks[b];
      s.sum.assign(G, 0.0);
      s.sum_sq.assign(G, 0.0);
      const std::uint64_t end = std::min(N, (b + 1) * kBlockSize);
      for (std::uint64_t h = b * kBlockSize; h < end; ++h) runner.run(options.seed, h, s);
    }
  };
  const int n_workers = std::max(1, options.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < n_workers; ++k) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  BlockSums total;
  total.sum.assign(G, 0.0);
  total.sum_sq.assign(G, 0.0);
  for (const BlockSums& b : blocks) {
    for (int g = 0; g < G; ++g) {
      total.sum[g] += b.sum[g];
      total.sum_sq[g] += b.sum_sq[g];
    }
    total.total += b.total;
    total.total_sq += b.total_sq;
    for (int f = 0; f < 4; ++f) {
      total.leak[f] += b.leak[f];
      total.leak_sq[f] += b.leak_sq[f];
    }
    total.collisions += b.collisions;
    total.splits += b.splits;
    total.kills += b.kills;
    total.tracks += b.tracks;
    total.min_weight = std::min(total.min_weight, b.min_weight);
    total.max_weight = std::max(total.max_weight, b.max_weight);
  }

  Tally tally;
  tally.groups = G;
  tally.histories = N;
  const auto det = detector_cells(model);
  tally.detector_volume = mesh.cell_volume() * static_cast<double>(det.size());
  const double scale =
      tally.detector_volume > 0.0 ? S / (static_cast<double>(N) * tally.detector_volume) : 0.0;
  for (int g = 0; g < G; ++g) {
    tally.mean.push_back(total.sum[g] * scale);
    tally.scored.push_back(total.sum[g] > 0.0);
    tally.rel_err.push_back(relative_error(total.sum[g], total.sum_sq[g], N));
  }
  tally.total_mean = total.total * scale;
  tally.total_scored = total.total > 0.0;
  tally.total_rel_err = relative_error(total.total, total.total_sq, N);
  for (int f = 0; f < 4; ++f) {
    tally.leakage[f] = total.leak[f] / static_cast<double>(N);
    tally.leakage_rel_err[f] = relative_error(total.leak[f], total.leak_sq[f], N);
  }
  tally.collisions = total.collisions;
  tally.splits = total.splits;
  tally.roulette_kills = total.kills;
  tally.tracks = total.tracks;
  tally.min_weight = total.min_weight;
  tally.max_weight = total.max_weight;
  tally.time_minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() / 60.0;
  return tally;
}

}  // namespace hybridvr
