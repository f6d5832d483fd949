// Copyright 2026 The FracPatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FRACPATCH_GA_HPP
#define FRACPATCH_GA_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fracpatch/errors.hpp"
#include "fracpatch/geometry.hpp"
#include "fracpatch/rf_metrics.hpp"
#include "fracpatch/text_doc.hpp"

namespace fracpatch {
namespace ga {

// All randomness flows through one seeded engine. Integer draws avoid
// std::uniform_int_distribution so the sequence depends only on the engine,
// not the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  double next_unit() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  int next_below(int n) {  // [0, n), multiply-shift bound
    return static_cast<int>((static_cast<unsigned __int128>(eng_()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  std::string state() const {
    std::ostringstream ss;
    ss << eng_;
    return ss.str();
  }

  void restore(const std::string& s) {
    std::istringstream ss(s);
    ss >> eng_;
    if (!ss) throw corrupt_checkpoint_error("unreadable RNG state");
  }

 private:
  std::mt19937_64 eng_;
};

enum class Symmetry { none, mirror_x, quad };
enum class RepairPolicy { reject, reconnect };

inline std::string to_string(Symmetry s) {
  switch (s) {
    case Symmetry::none: return "none";
    case Symmetry::mirror_x: return "mirror_x";
    case Symmetry::quad: return "quad";
  }
  return "none";
}

inline Symmetry symmetry_from_string(const std::string& s) {
  if (s == "none") return Symmetry::none;
  if (s == "mirror_x") return Symmetry::mirror_x;
  if (s == "quad") return Symmetry::quad;
  throw invalid_input_error("unknown symmetry '" + s + "' (none|mirror_x|quad)");
}

inline std::string to_string(RepairPolicy p) {
  return p == RepairPolicy::reject ? "reject" : "reconnect";
}

inline RepairPolicy repair_from_string(const std::string& s) {
  if (s == "reject") return RepairPolicy::reject;
  if (s == "reconnect") return RepairPolicy::reconnect;
  throw invalid_input_error("unknown repair policy '" + s + "' (reject|reconnect)");
}

struct GaConfig {
  int population_size = 24;
  int generations = 30;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // negative = auto (1/n^2); 0 is a real zero
  int tournament_size = 3;
  int elitism_count = 2;
  std::uint64_t rng_seed = 1;
  Symmetry symmetry = Symmetry::mirror_x;
  RepairPolicy repair_policy = RepairPolicy::reconnect;
  int grid_order = 19;

  double resolved_mutation_rate() const {
    return mutation_rate >= 0.0
               ? mutation_rate
               : 1.0 / (static_cast<double>(grid_order) * grid_order);
  }

  void validate() const {
    if (population_size < 4 || population_size % 2 != 0)
      throw invalid_input_error("population must be even and >= 4");
    if (generations < 0) throw invalid_input_error("generations must be >= 0");
    if (crossover_rate < 0.0 || crossover_rate > 1.0)
      throw invalid_input_error("crossover rate must be in [0, 1]");
    if (mutation_rate > 1.0)
      throw invalid_input_error("mutation rate must be in [0, 1] (or negative for auto)");
    if (tournament_size < 2) throw invalid_input_error("tournament size must be >= 2");
    if (elitism_count < 1 || elitism_count >= population_size)
      throw invalid_input_error("elitism count must be in [1, population)");
    if (grid_order < 1) throw invalid_input_error("grid order must be >= 1");
  }
};

struct FitnessSpec {
  std::vector<double> targets{3.5e9, 6.0e9};
  std::vector<double> rl_weights{1.0, 1.0};
  double gain_weight = 1.0;
  double vswr_cap = 2.0;
  double vswr_penalty = 10.0;
  double invalid_penalty = 1e6;

  void validate() const {
    if (targets.empty()) throw invalid_input_error("at least one target frequency");
    if (rl_weights.size() != targets.size())
      throw invalid_input_error("one RL weight per target required");
    double total = gain_weight;
    for (double w : rl_weights) {
      if (w < 0.0) throw invalid_input_error("weights must be >= 0");
      total += w;
    }
    if (gain_weight < 0.0) throw invalid_input_error("weights must be >= 0");
    if (!(total > 0.0)) throw invalid_input_error("at least one nonzero weight");
  }
};

/// fitness = sum_t rl_w_t * (-RL_t) + gain_w * sum_t gain_t
///           - vswr_penalty * [any VSWR_t > cap]. Higher is better.
inline double fitness(const rf::BandSummary& summary, const FitnessSpec& spec) {
  spec.validate();
  if (summary.targets.size() != spec.targets.size())
    throw invalid_input_error("summary does not cover the fitness targets");
  double f = 0.0;
  bool vswr_violated = false;
  for (size_t i = 0; i < summary.targets.size(); ++i) {
    const auto& m = summary.targets[i];
    f += spec.rl_weights[i] * (-m.return_loss_db);
    f += spec.gain_weight * m.gain_dbi;
    if (!(m.vswr <= spec.vswr_cap)) vswr_violated = true;
  }
  if (vswr_violated) f -= spec.vswr_penalty;
  return f;
}

// ---------------------------------------------------------------------------
// Symmetry helpers

inline geometry::Chromosome mirrored_x(const geometry::Chromosome& c) {
  geometry::Chromosome m = c;
  for (int r = 0; r < c.n; ++r)
    for (int col = 0; col < c.n; ++col) m.set(r, col, c.at(r, c.n - 1 - col));
  return m;
}

/// Canonical symmetric form: left half (and bottom half for quad) wins.
inline geometry::Chromosome symmetrize(const geometry::Chromosome& c, Symmetry sym) {
  geometry::Chromosome out = c;
  if (sym == Symmetry::none) return out;
  const int n = c.n;
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) {
      int sr = r, sc = col;
      if (sc >= (n + 1) / 2) sc = n - 1 - sc;
      if (sym == Symmetry::quad && sr >= (n + 1) / 2) sr = n - 1 - sr;
      out.set(r, col, c.at(sr, sc));
    }
  return out;
}

inline bool is_symmetric(const geometry::Chromosome& c, Symmetry sym) {
  return symmetrize(c, sym).genes == c.genes;
}

namespace detail {

// Genotype for variation: full grid for none, left half-columns for
// mirror_x, lower-left quadrant for quad. Operators act on this string and
// the phenotype is rebuilt by reflection.
struct GenotypeShape {
  int rows, cols, n;
  Symmetry sym;
};

inline GenotypeShape genotype_shape(int n, Symmetry sym) {
  switch (sym) {
    case Symmetry::none: return {n, n, n, sym};
    case Symmetry::mirror_x: return {n, (n + 1) / 2, n, sym};
    case Symmetry::quad: return {(n + 1) / 2, (n + 1) / 2, n, sym};
  }
  return {n, n, n, sym};
}

inline std::vector<std::uint8_t> extract_genotype(const geometry::Chromosome& c,
                                                  const GenotypeShape& g) {
  std::vector<std::uint8_t> s(static_cast<size_t>(g.rows) * g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int col = 0; col < g.cols; ++col)
      s[static_cast<size_t>(r) * g.cols + col] = c.at(r, col);
  return s;
}

inline geometry::Chromosome build_phenotype(const std::vector<std::uint8_t>& s,
                                            const GenotypeShape& g) {
  geometry::Chromosome c;
  c.n = g.n;
  c.genes.assign(static_cast<size_t>(g.n) * g.n, 0);
  for (int r = 0; r < g.n; ++r)
    for (int col = 0; col < g.n; ++col) {
      int sr = r, sc = col;
      if (g.sym != Symmetry::none && sc >= (g.n + 1) / 2) sc = g.n - 1 - sc;
      if (g.sym == Symmetry::quad && sr >= (g.n + 1) / 2) sr = g.n - 1 - sr;
      c.set(r, col, s[static_cast<size_t>(sr) * g.cols + sc]);
    }
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Repair

/// Pixel columns of row 0 that overlap the feed line footprint; the genome's
/// electrical attachment points (same graph materialize validates against).
inline std::vector<int> feed_columns(const geometry::AntennaLayout& base, int n) {
  return geometry::feed_pixel_columns(base, n);
}

namespace detail {

struct BfsResult {
  std::vector<int> dist;
  std::vector<int> parent;
};

// 0/1-cost BFS over the pixel grid: traversing a 1-gene is free, a 0-gene
// costs one flip. Deterministic: sources and neighbors are visited in fixed
// row-major order, and a strictly-better distance is required to re-label.
inline BfsResult zero_one_bfs(const geometry::Chromosome& c,
                              const std::vector<int>& sources) {
  const int n = c.n;
  BfsResult res;
  res.dist.assign(static_cast<size_t>(n) * n, -1);
  res.parent.assign(static_cast<size_t>(n) * n, -1);
  std::deque<int> dq;
  for (int s : sources) {
    const int w = c.genes[s] ? 0 : 1;
    if (res.dist[s] == -1 || w < res.dist[s]) {
      res.dist[s] = w;
      if (w == 0)
        dq.push_front(s);
      else
        dq.push_back(s);
    }
  }
  while (!dq.empty()) {
    const int cur = dq.front();
    dq.pop_front();
    const int r = cur / n, col = cur % n;
    const int dr[4] = {-1, 0, 0, 1};
    const int dc[4] = {0, -1, 1, 0};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = col + dc[k];
      if (nr < 0 || nc < 0 || nr >= n || nc >= n) continue;
      const int nidx = nr * n + nc;
      const int w = c.genes[nidx] ? 0 : 1;
      const int nd = res.dist[cur] + w;
      if (res.dist[nidx] == -1 || nd < res.dist[nidx]) {
        res.dist[nidx] = nd;
        res.parent[nidx] = cur;
        if (w == 0)
          dq.push_front(nidx);
        else
          dq.push_back(nidx);
      }
    }
  }
  return res;
}

}  // namespace detail

/// Reconnect repair: flips the minimum number of 0-genes along shortest
/// pixel paths until every copper island joins the feed-attached component.
/// Already-connected genomes come back unchanged. Ties break by the BFS's
/// row-major visit order.
inline geometry::Chromosome repair(const geometry::Chromosome& chromosome,
                                   const geometry::AntennaLayout& base,
                                   RepairPolicy policy) {
  if (policy != RepairPolicy::reconnect) return chromosome;
  geometry::Chromosome c = chromosome;
  c.validate();
  const int n = c.n;
  if (c.popcount() == 0) return c;  // nothing to connect; evaluator rejects it

  const std::vector<int> fcols = feed_columns(base, n);
  std::vector<int> feed_cells;
  for (int col : fcols) feed_cells.push_back(col);  // row 0 indices

  for (int guard = 0; guard < n * n; ++guard) {
    const std::vector<int> comp = geometry::pixel_components(c);
    // Component(s) already touching the feed.
    std::vector<std::uint8_t> feed_comp(static_cast<size_t>(16 + n * n), 0);
    bool any_attached = false;
    for (int cell : feed_cells)
      if (c.genes[cell]) {
        feed_comp[comp[cell]] = 1;
        any_attached = true;
      }

    // First detached 1-gene in row-major order.
    int target = -1;
    for (int i = 0; i < n * n && target == -1; ++i)
      if (c.genes[i] && (!any_attached || !feed_comp[comp[i]])) target = i;
    if (target == -1) return c;  // single feed-attached island

    const auto bfs = detail::zero_one_bfs(c, feed_cells);
    // Cheapest entry point into the target's component (row-major tie-break).
    int entry = -1;
    for (int i = 0; i < n * n; ++i)
      if (c.genes[i] && comp[i] == comp[target] && bfs.dist[i] >= 0 &&
          (entry == -1 || bfs.dist[i] < bfs.dist[entry]))
        entry = i;
    if (entry == -1 || bfs.dist[entry] < 0)
      return c;  // unreachable (cannot happen on a filled grid)
    for (int cur = entry; cur != -1; cur = bfs.parent[cur]) c.genes[cur] = 1;
  }
  return c;
}

/// Repair that preserves an enforced symmetry: the repaired genome is
/// unioned with its own reflection. Adding copper cannot disconnect, so the
/// result stays a single island; flip count is no longer strictly minimal.
inline geometry::Chromosome repair_symmetric(const geometry::Chromosome& chromosome,
                                             const geometry::AntennaLayout& base,
                                             RepairPolicy policy, Symmetry sym) {
  geometry::Chromosome r = repair(chromosome, base, policy);
  if (sym == Symmetry::none) return r;
  geometry::Chromosome m = mirrored_x(r);
  if (sym == Symmetry::quad) {
    geometry::Chromosome flipped = r;
    for (int row = 0; row < r.n; ++row)
      for (int col = 0; col < r.n; ++col)
        flipped.set(row, col, r.at(r.n - 1 - row, col));
    for (size_t i = 0; i < r.genes.size(); ++i)
      m.genes[i] = static_cast<std::uint8_t>(m.genes[i] | flipped.genes[i]);
  }
  for (size_t i = 0; i < r.genes.size(); ++i)
    r.genes[i] = static_cast<std::uint8_t>(r.genes[i] | m.genes[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Evolution

struct EvalResult {
  bool valid = true;
  double fitness = 0.0;
  rf::BandSummary summary;
};

using EvaluatorFn = std::function<EvalResult(const geometry::Chromosome&)>;

struct EvaluationRecord {
  std::uint64_t genome_hash = 0;
  bool valid = false;
  double fitness = 0.0;
  rf::BandSummary summary;
  double wall_ms = 0.0;  // in-memory only; never serialized (determinism)
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::string best_genome_hex;
};

struct OptimizationRun {
  GaConfig config;
  FitnessSpec fitness_spec;
  Rng rng;
  int generation = 0;
  std::vector<geometry::Chromosome> population;
  std::vector<double> fitness_values;
  std::map<std::uint64_t, EvaluationRecord> cache;  // ordered => stable files
  std::vector<GenerationStats> history;
  geometry::Chromosome best;
  double best_fitness = 0.0;
  bool has_best = false;

  const EvaluationRecord* record_for(const geometry::Chromosome& c) const {
    auto it = cache.find(c.hash());
    return it == cache.end() ? nullptr : &it->second;
  }
};

/// Default seeding: the all-ones baseline, the Fig.-2 cut genome when the
/// caller supplies one, and biased-random fills (80% copper) for the rest.
inline std::vector<geometry::Chromosome> make_seed_population(
    const GaConfig& config, Rng& rng,
    const std::optional<geometry::Chromosome>& fractal_seed = std::nullopt) {
  const int n = config.grid_order;
  std::vector<geometry::Chromosome> pop;
  pop.push_back(geometry::Chromosome::all_ones(n));
  if (fractal_seed) {
    if (fractal_seed->n != n)
      throw invalid_input_error("fractal seed grid order mismatch");
    pop.push_back(symmetrize(*fractal_seed, config.symmetry));
  }
  const auto shape = detail::genotype_shape(n, config.symmetry);
  while (static_cast<int>(pop.size()) < config.population_size) {
    std::vector<std::uint8_t> s(static_cast<size_t>(shape.rows) * shape.cols);
    for (auto& g : s) g = rng.next_unit() < 0.8 ? 1 : 0;
    pop.push_back(detail::build_phenotype(s, shape));
  }
  pop.resize(config.population_size);
  return pop;
}

namespace detail {

// Evaluates a generation. Repair happens first (Lamarckian: the repaired
// genome replaces the individual), then every not-yet-cached unique genome
// is evaluated -- across `eval_threads` workers when asked -- and inserted
// into the cache in first-occurrence order. Fitness is then assigned by
// population index, so evaluation completion order can never leak into the
// run. The expensive evaluator sees each genome at most once per run.
inline void evaluate_population(OptimizationRun& run, const EvaluatorFn& evaluator,
                                const geometry::AntennaLayout* base_for_repair,
                                int eval_threads) {
  run.fitness_values.assign(run.population.size(), 0.0);
  for (auto& indiv : run.population) {
    if (run.config.repair_policy == RepairPolicy::reconnect && base_for_repair)
      indiv = repair_symmetric(indiv, *base_for_repair, run.config.repair_policy,
                               run.config.symmetry);
  }

  std::vector<const geometry::Chromosome*> todo;
  std::vector<std::uint64_t> todo_hash;
  for (const auto& indiv : run.population) {
    const std::uint64_t h = indiv.hash();
    if (run.cache.count(h)) continue;
    if (std::find(todo_hash.begin(), todo_hash.end(), h) != todo_hash.end()) continue;
    todo.push_back(&indiv);
    todo_hash.push_back(h);
  }

  std::vector<EvalResult> results(todo.size());
  std::vector<std::uint8_t> threw(todo.size(), 0);
  auto eval_one = [&](size_t i) {
    try {
      results[i] = evaluator(*todo[i]);
    } catch (const error&) {
      threw[i] = 1;
    }
  };
  const int workers = std::min<int>(eval_threads, static_cast<int>(todo.size()));
  if (workers > 1) {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= todo.size()) return;
          eval_one(i);
        }
      });
    for (auto& th : pool) th.join();
  } else {
    for (size_t i = 0; i < todo.size(); ++i) eval_one(i);
  }

  for (size_t i = 0; i < todo.size(); ++i) {
    EvaluationRecord rec;
    rec.genome_hash = todo_hash[i];
    if (threw[i] || !results[i].valid) {
      rec.valid = false;
      rec.fitness = -run.fitness_spec.invalid_penalty;
    } else {
      rec.valid = true;
      rec.fitness = results[i].fitness;
      rec.summary = results[i].summary;
    }
    run.cache.emplace(todo_hash[i], std::move(rec));
  }

  for (size_t i = 0; i < run.population.size(); ++i)
    run.fitness_values[i] = run.cache.at(run.population[i].hash()).fitness;
}

inline void record_generation(OptimizationRun& run) {
  GenerationStats st;
  st.generation = run.generation;
  size_t best_idx = 0;
  double sum = 0.0;
  for (size_t i = 0; i < run.fitness_values.size(); ++i) {
    sum += run.fitness_values[i];
    if (run.fitness_values[i] > run.fitness_values[best_idx]) best_idx = i;
  }
  st.best_fitness = run.fitness_values[best_idx];
  st.mean_fitness = sum / static_cast<double>(run.fitness_values.size());
  st.best_genome_hex = run.population[best_idx].to_hex();
  run.history.push_back(st);
  if (!run.has_best || st.best_fitness > run.best_fitness) {
    run.best_fitness = st.best_fitness;
    run.best = run.population[best_idx];
    run.has_best = true;
  }
}

inline int tournament_pick(const OptimizationRun& run, Rng& rng) {
  int winner = rng.next_below(static_cast<int>(run.population.size()));
  for (int k = 1; k < run.config.tournament_size; ++k) {
    const int challenger = rng.next_below(static_cast<int>(run.population.size()));
    if (run.fitness_values[challenger] > run.fitness_values[winner] ||
        (run.fitness_values[challenger] == run.fitness_values[winner] &&
         challenger < winner))
      winner = challenger;
  }
  return winner;
}

inline std::vector<geometry::Chromosome> next_generation(OptimizationRun& run) {
  const GaConfig& cfg = run.config;
  const auto shape = genotype_shape(cfg.grid_order, cfg.symmetry);
  const double mut = cfg.resolved_mutation_rate();

  // Elites first, by (fitness desc, index asc).
  std::vector<size_t> order(run.population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return run.fitness_values[a] > run.fitness_values[b];
  });
  std::vector<geometry::Chromosome> next;
  for (int e = 0; e < cfg.elitism_count; ++e)
    next.push_back(run.population[order[e]]);

  while (static_cast<int>(next.size()) < cfg.population_size) {
    const int p1 = tournament_pick(run, run.rng);
    const int p2 = tournament_pick(run, run.rng);
    auto g1 = extract_genotype(run.population[p1], shape);
    auto g2 = extract_genotype(run.population[p2], shape);
    if (run.rng.next_unit() < cfg.crossover_rate && g1.size() >= 2) {
      // Two-point crossover on the row-major genotype string.
      int a = run.rng.next_below(static_cast<int>(g1.size()) + 1);
      int b = run.rng.next_below(static_cast<int>(g1.size()) + 1);
      if (a > b) std::swap(a, b);
      for (int i = a; i < b; ++i) std::swap(g1[i], g2[i]);
    }
    for (auto& g : g1)
      if (run.rng.next_unit() < mut) g ^= 1u;
    for (auto& g : g2)
      if (run.rng.next_unit() < mut) g ^= 1u;
    next.push_back(build_phenotype(g1, shape));
    if (static_cast<int>(next.size()) < cfg.population_size)
      next.push_back(build_phenotype(g2, shape));
  }
  return next;
}

}  // namespace detail

using GenerationCallback = std::function<void(const OptimizationRun&)>;

/// Continues a run (fresh or restored from a checkpoint) to completion.
/// resume_evolve(checkpointed run) reproduces the uninterrupted generation
/// sequence bit-for-bit: all state lives in OptimizationRun.
inline OptimizationRun resume_evolve(OptimizationRun run, const EvaluatorFn& evaluator,
                                     const geometry::AntennaLayout* base_for_repair = nullptr,
                                     const GenerationCallback& on_generation = nullptr,
                                     int eval_threads = 1) {
  while (true) {
    detail::evaluate_population(run, evaluator, base_for_repair, eval_threads);
    detail::record_generation(run);
    if (on_generation) on_generation(run);
    if (run.generation >= run.config.generations) break;
    run.population = detail::next_generation(run);
    ++run.generation;
  }
  return run;
}

/// Generational GA: tournament selection, two-point crossover, per-gene
/// mutation, elitism. Deterministic for a fixed seed: variation RNG is
/// consumed in a fixed order and fitness is assigned by genome, never by
/// evaluation completion order. Evaluator failures become invalid-fitness
/// records; the run itself never aborts.
inline OptimizationRun evolve(
    const GaConfig& config, const FitnessSpec& fitness_spec,
    const EvaluatorFn& evaluator,
    const std::optional<std::vector<geometry::Chromosome>>& initial = std::nullopt,
    const geometry::AntennaLayout* base_for_repair = nullptr,
    const GenerationCallback& on_generation = nullptr, int eval_threads = 1) {
  config.validate();
  fitness_spec.validate();

  OptimizationRun run;
  run.config = config;
  run.fitness_spec = fitness_spec;
  run.rng = Rng(config.rng_seed);
  if (initial) {
    if (static_cast<int>(initial->size()) != config.population_size)
      throw invalid_input_error("initial population size mismatch");
    run.population = *initial;
    for (auto& c : run.population) c = symmetrize(c, config.symmetry);
  } else {
    run.population = make_seed_population(config, run.rng);
  }
  return resume_evolve(std::move(run), evaluator, base_for_repair, on_generation,
                       eval_threads);
}

// ---------------------------------------------------------------------------
// Checkpointing

namespace detail {

inline std::string f64str(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.17g", v);
  return b;
}

inline std::string join_f64(const std::vector<double>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += " ";
    s += f64str(xs[i]);
  }
  return s;
}

inline std::vector<double> split_f64(const std::string& s) {
  std::istringstream ss(s);
  std::vector<double> out;
  double x;
  while (ss >> x) out.push_back(x);
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline std::string checkpoint_to_string(const OptimizationRun& run) {
  TextDoc d;
  d.set_i64("checkpoint.version", kCheckpointVersion);
  const GaConfig& c = run.config;
  d.set_i64("config.population_size", c.population_size);
  d.set_i64("config.generations", c.generations);
  d.set("config.crossover_rate", detail::f64str(c.crossover_rate));
  d.set("config.mutation_rate", detail::f64str(c.mutation_rate));
  d.set_i64("config.tournament_size", c.tournament_size);
  d.set_i64("config.elitism_count", c.elitism_count);
  d.set("config.rng_seed", std::to_string(c.rng_seed));
  d.set("config.symmetry", to_string(c.symmetry));
  d.set("config.repair_policy", to_string(c.repair_policy));
  d.set_i64("config.grid_order", c.grid_order);
  d.set("fitness.targets", detail::join_f64(run.fitness_spec.targets));
  d.set("fitness.rl_weights", detail::join_f64(run.fitness_spec.rl_weights));
  d.set("fitness.gain_weight", detail::f64str(run.fitness_spec.gain_weight));
  d.set("fitness.vswr_cap", detail::f64str(run.fitness_spec.vswr_cap));
  d.set("fitness.vswr_penalty", detail::f64str(run.fitness_spec.vswr_penalty));
  d.set("fitness.invalid_penalty", detail::f64str(run.fitness_spec.invalid_penalty));
  d.set("rng.state", run.rng.state());
  d.set_i64("run.generation", run.generation);
  d.set_i64("population.count", static_cast<long long>(run.population.size()));
  for (size_t i = 0; i < run.population.size(); ++i)
    d.set("population." + std::to_string(i), run.population[i].to_hex());
  d.set_i64("history.count", static_cast<long long>(run.history.size()));
  for (size_t i = 0; i < run.history.size(); ++i) {
    const auto& h = run.history[i];
    d.set("history." + std::to_string(i),
          std::to_string(h.generation) + " " + detail::f64str(h.best_fitness) + " " +
              detail::f64str(h.mean_fitness) + " " + h.best_genome_hex);
  }
  d.set_i64("cache.count", static_cast<long long>(run.cache.size()));
  size_t ci = 0;
  for (const auto& [hash, rec] : run.cache) {
    const std::string p = "cache." + std::to_string(ci++);
    d.set(p, std::to_string(hash) + " " + (rec.valid ? "1" : "0") + " " +
                 detail::f64str(rec.fitness));
    if (rec.valid) rf::summary_to_doc(d, p + ".summary", rec.summary);
  }
  std::string body = d.serialize();
  body += "checkpoint.digest = " + std::to_string(detail::fnv1a(body)) + "\n";
  return body;
}

inline void write_checkpoint(const OptimizationRun& run, const std::filesystem::path& path) {
  atomic_write_file(path, checkpoint_to_string(run));
}

inline OptimizationRun checkpoint_from_string(const std::string& content,
                                              const std::string& source) {
  // Digest covers everything before the digest line.
  const std::string digest_key = "checkpoint.digest = ";
  const auto pos = content.rfind(digest_key);
  if (pos == std::string::npos)
    throw corrupt_checkpoint_error(source + ": missing digest");
  const std::string body = content.substr(0, pos);
  TextDoc d = TextDoc::parse(content, source);
  const std::uint64_t want = std::stoull(d.get("checkpoint.digest"));
  if (detail::fnv1a(body) != want)
    throw corrupt_checkpoint_error(source + ": digest mismatch (file modified or truncated)");
  const long long version = d.get_i64("checkpoint.version");
  if (version != kCheckpointVersion)
    throw corrupt_checkpoint_error(source + ": checkpoint version " +
                                   std::to_string(version) + " unsupported (expected " +
                                   std::to_string(kCheckpointVersion) + ")");

  OptimizationRun run;
  GaConfig& c = run.config;
  c.population_size = static_cast<int>(d.get_i64("config.population_size"));
  c.generations = static_cast<int>(d.get_i64("config.generations"));
  c.crossover_rate = d.get_f64("config.crossover_rate");
  c.mutation_rate = d.get_f64("config.mutation_rate");
  c.tournament_size = static_cast<int>(d.get_i64("config.tournament_size"));
  c.elitism_count = static_cast<int>(d.get_i64("config.elitism_count"));
  c.rng_seed = std::stoull(d.get("config.rng_seed"));
  c.symmetry = symmetry_from_string(d.get("config.symmetry"));
  c.repair_policy = repair_from_string(d.get("config.repair_policy"));
  c.grid_order = static_cast<int>(d.get_i64("config.grid_order"));
  run.fitness_spec.targets = detail::split_f64(d.get("fitness.targets"));
  run.fitness_spec.rl_weights = detail::split_f64(d.get("fitness.rl_weights"));
  run.fitness_spec.gain_weight = d.get_f64("fitness.gain_weight");
  run.fitness_spec.vswr_cap = d.get_f64("fitness.vswr_cap");
  run.fitness_spec.vswr_penalty = d.get_f64("fitness.vswr_penalty");
  run.fitness_spec.invalid_penalty = d.get_f64("fitness.invalid_penalty");
  run.rng.restore(d.get("rng.state"));
  run.generation = static_cast<int>(d.get_i64("run.generation"));
  const long long np = d.get_i64("population.count");
  for (long long i = 0; i < np; ++i)
    run.population.push_back(geometry::Chromosome::from_hex(
        c.grid_order, d.get("population." + std::to_string(i))));
  const long long nh = d.get_i64("history.count");
  for (long long i = 0; i < nh; ++i) {
    std::istringstream ss(d.get("history." + std::to_string(i)));
    GenerationStats st;
    ss >> st.generation >> st.best_fitness >> st.mean_fitness >> st.best_genome_hex;
    if (!ss) throw corrupt_checkpoint_error(source + ": bad history row");
    run.history.push_back(st);
  }
  const long long ncache = d.get_i64("cache.count");
  for (long long i = 0; i < ncache; ++i) {
    const std::string p = "cache." + std::to_string(i);
    std::istringstream ss(d.get(p));
    EvaluationRecord rec;
    int valid = 0;
    ss >> rec.genome_hash >> valid >> rec.fitness;
    if (!ss) throw corrupt_checkpoint_error(source + ": bad cache row");
    rec.valid = valid != 0;
    if (rec.valid) rec.summary = rf::summary_from_doc(d, p + ".summary");
    run.cache.emplace(rec.genome_hash, std::move(rec));
  }
  // Rebuild best-so-far from history.
  for (const auto& h : run.history) {
    if (!run.has_best || h.best_fitness > run.best_fitness) {
      run.best_fitness = h.best_fitness;
      run.best = geometry::Chromosome::from_hex(c.grid_order, h.best_genome_hex);
      run.has_best = true;
    }
  }
  // The stored population is the post-evaluation snapshot; its fitness comes
  // straight back out of the cache.
  run.fitness_values.reserve(run.population.size());
  for (const auto& indiv : run.population) {
    auto it = run.cache.find(indiv.hash());
    if (it == run.cache.end())
      throw corrupt_checkpoint_error(source + ": population genome missing from cache");
    run.fitness_values.push_back(it->second.fitness);
  }
  return run;
}

inline OptimizationRun read_checkpoint(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    throw corrupt_checkpoint_error("checkpoint '" + path.string() + "' does not exist");
  return checkpoint_from_string(read_file(path), path.string());
}

/// Restored runs re-enter the loop one generation further: the on-disk state
/// is the post-evaluation snapshot of `generation`.
inline OptimizationRun continue_from_checkpoint(const std::filesystem::path& path,
                                                const EvaluatorFn& evaluator,
                                                const geometry::AntennaLayout* base_for_repair = nullptr,
                                                const GenerationCallback& on_generation = nullptr,
                                                int eval_threads = 1) {
  OptimizationRun run = read_checkpoint(path);
  if (run.generation >= run.config.generations) return run;  // already complete
  run.population = detail::next_generation(run);
  ++run.generation;
  return resume_evolve(std::move(run), evaluator, base_for_repair, on_generation,
                       eval_threads);
}

}  // namespace ga
}  // namespace fracpatch

#endif  // FRACPATCH_GA_HPP
