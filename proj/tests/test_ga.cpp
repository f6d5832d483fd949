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

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>
#include <set>

#include "fracpatch/evaluator.hpp"
#include "fracpatch/ga.hpp"
#include "fracpatch/geometry.hpp"
#include "oracles.hpp"

using namespace fracpatch;
using geometry::Chromosome;
using Catch::Approx;

namespace {

geometry::AntennaLayout table_one_layout() {
  geometry::SubstrateSpec sub;
  auto patch = geometry::patch_from_dimensions(19e-3, 19e-3, sub, 7e9);
  return geometry::build_baseline_layout(sub, patch, geometry::FeedSpec{},
                                         geometry::GroundSpec{});
}

// Deterministic pattern fitness used for GA sanity checks: number of ones.
ga::EvalResult onemax(const Chromosome& c) {
  ga::EvalResult r;
  r.fitness = static_cast<double>(c.popcount());
  return r;
}

std::vector<Chromosome> random_population(int count, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<Chromosome> pop;
  for (int i = 0; i < count; ++i) {
    Chromosome c;
    c.n = n;
    c.genes.resize(static_cast<size_t>(n) * n);
    for (auto& g : c.genes) g = static_cast<std::uint8_t>(rng() & 1u);
    pop.push_back(c);
  }
  return pop;
}

ga::GaConfig plain_config(int n, int pop, int gens, std::uint64_t seed) {
  ga::GaConfig cfg;
  cfg.grid_order = n;
  cfg.population_size = pop;
  cfg.generations = gens;
  cfg.rng_seed = seed;
  cfg.symmetry = ga::Symmetry::none;
  cfg.repair_policy = ga::RepairPolicy::reject;
  return cfg;
}

ga::FitnessSpec plain_fitness() {
  ga::FitnessSpec f;
  return f;
}

}  // namespace

TEST_CASE("fitness formula reproduces the paper's optimized-design arithmetic") {
  rf::BandSummary s;
  s.targets = {{3.5e9, -12.968, 1.58, 1.56}, {6.0e9, -12.184, 1.65, 2.2}};
  ga::FitnessSpec spec;
  CHECK(ga::fitness(s, spec) == Approx(28.912).epsilon(1e-12));
}

TEST_CASE("fitness applies the VSWR cap penalty once") {
  rf::BandSummary s;
  s.targets = {{3.5e9, -3.0, 5.8, 1.0}, {6.0e9, -3.0, 5.8, 1.0}};
  ga::FitnessSpec spec;
  CHECK(ga::fitness(s, spec) == Approx(3.0 + 3.0 + 2.0 - spec.vswr_penalty));
}

TEST_CASE("zero gain weight and 0 dB return loss cannot be positive") {
  rf::BandSummary s;
  s.targets = {{3.5e9, 0.0, 1e9, 1.5}, {6.0e9, 0.0, 1e9, 1.5}};
  ga::FitnessSpec spec;
  spec.gain_weight = 0.0;
  CHECK(ga::fitness(s, spec) <= 0.0);
}

TEST_CASE("an evaluator that always fails yields exactly -invalid_penalty") {
  auto cfg = plain_config(3, 8, 2, 5);
  auto run = ga::evolve(cfg, plain_fitness(),
                        [](const Chromosome&) -> ga::EvalResult {
                          throw disconnected_island_error("nope");
                        });
  for (const auto& [hash, rec] : run.cache) {
    CHECK_FALSE(rec.valid);
    CHECK(rec.fitness == -plain_fitness().invalid_penalty);
  }
  CHECK(run.best_fitness == -plain_fitness().invalid_penalty);
}

TEST_CASE("OneMax sanity benchmark reaches the exact optimum") {
  auto cfg = plain_config(5, 20, 40, 42);
  cfg.mutation_rate = 1.0 / 25.0;
  auto initial = random_population(20, 5, 99);
  auto run = ga::evolve(cfg, plain_fitness(), onemax, initial);
  CHECK(run.best_fitness == 25.0);
  CHECK(run.best.popcount() == 25);
}

TEST_CASE("no variation operators means no new genetic material") {
  auto cfg = plain_config(4, 8, 10, 3);
  cfg.crossover_rate = 0.0;
  cfg.mutation_rate = 0.0;
  cfg.elitism_count = 7;
  auto initial = random_population(8, 4, 7);
  std::set<std::string> initial_set;
  for (const auto& c : initial) initial_set.insert(c.to_hex());

  std::set<std::string> seen;
  auto run = ga::evolve(cfg, plain_fitness(), onemax, initial, nullptr,
                        [&](const ga::OptimizationRun& r) {
                          for (const auto& c : r.population) seen.insert(c.to_hex());
                        });
  for (const auto& hex : seen) CHECK(initial_set.count(hex) == 1);
  // Best individual survives unchanged through elitism.
  CHECK(run.history.front().best_fitness == run.history.back().best_fitness);
}

TEST_CASE("elitism makes the best fitness trace non-decreasing") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull}) {
    auto cfg = plain_config(4, 12, 25, seed);
    auto run = ga::evolve(cfg, plain_fitness(), onemax, random_population(12, 4, 5));
    for (size_t g = 1; g < run.history.size(); ++g)
      CHECK(run.history[g].best_fitness >= run.history[g - 1].best_fitness);
  }
}

TEST_CASE("same seed gives an identical run; different parallelism too") {
  const auto base = table_one_layout();
  ga::GaConfig cfg;
  cfg.grid_order = 5;
  cfg.population_size = 12;
  cfg.generations = 8;
  cfg.rng_seed = 77;
  cfg.symmetry = ga::Symmetry::mirror_x;
  cfg.repair_policy = ga::RepairPolicy::reconnect;
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};

  auto r1 = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base,
                       nullptr, 1);
  auto r2 = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base,
                       nullptr, 1);
  auto r4 = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base,
                       nullptr, 4);
  REQUIRE(r1.history.size() == r2.history.size());
  REQUIRE(r1.history.size() == r4.history.size());
  for (size_t g = 0; g < r1.history.size(); ++g) {
    CHECK(r1.history[g].best_genome_hex == r2.history[g].best_genome_hex);
    CHECK(r1.history[g].best_fitness == r2.history[g].best_fitness);
    CHECK(r1.history[g].best_genome_hex == r4.history[g].best_genome_hex);
    CHECK(r1.history[g].best_fitness == r4.history[g].best_fitness);
    CHECK(r1.history[g].mean_fitness == r4.history[g].mean_fitness);
  }
}

TEST_CASE("mirror symmetry closure holds in every generation") {
  const auto base = table_one_layout();
  ga::GaConfig cfg;
  cfg.grid_order = 7;
  cfg.population_size = 10;
  cfg.generations = 6;
  cfg.rng_seed = 9;
  cfg.symmetry = ga::Symmetry::mirror_x;
  cfg.repair_policy = ga::RepairPolicy::reconnect;
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};
  bool all_symmetric = true;
  ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base,
             [&](const ga::OptimizationRun& r) {
               for (const auto& c : r.population)
                 all_symmetric = all_symmetric && ga::is_symmetric(c, cfg.symmetry);
             });
  CHECK(all_symmetric);
}

TEST_CASE("GA equals exhaustive enumeration on the 3x3 surrogate landscape") {
  const auto base = table_one_layout();
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};

  // Brute-force oracle over all 512 genomes through the same evaluator
  // pipeline (invalid genomes score -invalid_penalty).
  double brute_best = -1e18;
  for (int bits = 0; bits < 512; ++bits) {
    Chromosome c;
    c.n = 3;
    c.genes.resize(9);
    for (int b = 0; b < 9; ++b) c.genes[b] = (bits >> b) & 1;
    double f;
    try {
      f = surrogate(c).fitness;
    } catch (const error&) {
      f = -plain_fitness().invalid_penalty;
    }
    brute_best = std::max(brute_best, f);
  }

  auto cfg = plain_config(3, 16, 20, 7);
  auto run = ga::evolve(cfg, plain_fitness(), surrogate);
  CHECK(run.best_fitness == Approx(brute_best).epsilon(1e-12));
}

TEST_CASE("repair leaves connected genomes unchanged") {
  const auto base = table_one_layout();
  Chromosome c = Chromosome::all_ones(19);
  c.set(5, 5, 0);
  const Chromosome r = ga::repair(c, base, ga::RepairPolicy::reconnect);
  CHECK(r.genes == c.genes);
}

TEST_CASE("repair flips exactly one gene for a diagonal island") {
  const auto base = table_one_layout();
  Chromosome c;
  c.n = 19;
  c.genes.assign(19 * 19, 0);
  // Feed-attached blob around the feed columns (7..11 for n=19).
  for (int row = 0; row < 4; ++row)
    for (int col = 7; col < 12; ++col) c.set(row, col, 1);
  // Island diagonal to the blob corner (4,12).
  c.set(4, 12, 1);
  const int before = c.popcount();

  const Chromosome r = ga::repair(c, base, ga::RepairPolicy::reconnect);
  CHECK(r.popcount() == before + 1);

  // Independent 0/1-BFS oracle agrees one flip suffices.
  std::vector<int> sources;
  for (int col = 7; col < 12; ++col) sources.push_back(col);  // row-0 cells
  std::vector<std::uint8_t> target(19 * 19, 0);
  target[4 * 19 + 12] = 1;
  CHECK(oracles::min_flips_to_connect(c.genes, 19, sources, target) == 1);
  CHECK(geometry::is_single_island(geometry::materialize(r, base)));
}

TEST_CASE("repair ignores an all-zero-except-feed-row genome") {
  const auto base = table_one_layout();
  Chromosome c;
  c.n = 19;
  c.genes.assign(19 * 19, 0);
  for (int col = 0; col < 19; ++col) c.set(0, col, 1);
  const Chromosome r = ga::repair(c, base, ga::RepairPolicy::reconnect);
  CHECK(r.genes == c.genes);
}

TEST_CASE("repair is idempotent on random genomes") {
  const auto base = table_one_layout();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Chromosome c;
    c.n = 9;
    c.genes.resize(81);
    for (auto& g : c.genes) g = static_cast<std::uint8_t>(rng() & 1u);
    const Chromosome r1 = ga::repair(c, base, ga::RepairPolicy::reconnect);
    const Chromosome r2 = ga::repair(r1, base, ga::RepairPolicy::reconnect);
    CHECK(r1.genes == r2.genes);
    if (r1.popcount() > 0)
      CHECK_NOTHROW(geometry::materialize(r1, base));
  }
}

TEST_CASE("repair flip count matches the BFS oracle for single islands") {
  const auto base = table_one_layout();
  std::mt19937_64 rng(13);
  int tested = 0;
  for (int trial = 0; trial < 60 && tested < 15; ++trial) {
    const int n = 11;
    Chromosome c;
    c.n = n;
    c.genes.assign(static_cast<size_t>(n) * n, 0);
    // Feed blob.
    auto fcols = ga::feed_columns(base, n);
    for (int row = 0; row < 3; ++row)
      for (int col : fcols) c.set(row, col, 1);
    // One random 2x2 island somewhere in the upper half.
    const int ir = 5 + static_cast<int>(rng() % 4);
    const int ic = static_cast<int>(rng() % (n - 1));
    c.set(ir, ic, 1);
    c.set(ir + 1, ic, 1);
    c.set(ir, ic + 1, 1);
    c.set(ir + 1, ic + 1, 1);
    const auto comp_count_before = c.popcount();

    std::vector<int> sources;
    for (int col : fcols) sources.push_back(col);
    std::vector<std::uint8_t> target(static_cast<size_t>(n) * n, 0);
    target[ir * n + ic] = 1;
    target[(ir + 1) * n + ic] = 1;
    target[ir * n + ic + 1] = 1;
    target[(ir + 1) * n + ic + 1] = 1;
    const int oracle = oracles::min_flips_to_connect(c.genes, n, sources, target);
    if (oracle <= 0) continue;
    ++tested;
    const Chromosome r = ga::repair(c, base, ga::RepairPolicy::reconnect);
    CHECK(r.popcount() == comp_count_before + oracle);
  }
  CHECK(tested >= 5);
}

TEST_CASE("checkpoint round-trips byte-identically and resumes bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fracpatch_ga_test";
  fs::create_directories(dir);
  const fs::path ckpt = dir / "run.ckpt";

  const auto base = table_one_layout();
  ga::GaConfig cfg;
  cfg.grid_order = 5;
  cfg.population_size = 10;
  cfg.generations = 9;
  cfg.rng_seed = 123;
  cfg.symmetry = ga::Symmetry::mirror_x;
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};

  // Uninterrupted reference run.
  auto full = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base);

  // Interrupted run: stop (by capturing a checkpoint) at generation 4.
  std::string mid_ckpt;
  ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base,
             [&](const ga::OptimizationRun& r) {
               if (r.generation == 4) mid_ckpt = ga::checkpoint_to_string(r);
             });
  REQUIRE_FALSE(mid_ckpt.empty());
  atomic_write_file(ckpt, mid_ckpt);

  auto resumed = ga::continue_from_checkpoint(ckpt, surrogate, &base);
  REQUIRE(resumed.history.size() == full.history.size());
  for (size_t g = 0; g < full.history.size(); ++g) {
    CHECK(resumed.history[g].best_fitness == full.history[g].best_fitness);
    CHECK(resumed.history[g].best_genome_hex == full.history[g].best_genome_hex);
    CHECK(resumed.history[g].mean_fitness == full.history[g].mean_fitness);
  }

  // Serialization round trip is byte-stable.
  const std::string once = ga::checkpoint_to_string(full);
  const auto parsed = ga::checkpoint_from_string(once, "mem");
  CHECK(ga::checkpoint_to_string(parsed) == once);

  fs::remove_all(dir);
}

TEST_CASE("checkpoint twice without stepping is identical") {
  const auto base = table_one_layout();
  auto cfg = plain_config(4, 8, 3, 11);
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};
  auto run = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base);
  CHECK(ga::checkpoint_to_string(run) == ga::checkpoint_to_string(run));
}

TEST_CASE("checkpoint errors: missing file, bad digest, bad version") {
  CHECK_THROWS_AS(ga::read_checkpoint("/nonexistent/path/run.ckpt"),
                  corrupt_checkpoint_error);

  const auto base = table_one_layout();
  auto cfg = plain_config(4, 8, 1, 2);
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};
  auto run = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base);
  std::string good = ga::checkpoint_to_string(run);

  std::string tampered = good;
  const auto pos = tampered.find("config.population_size = 8");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 26, "config.population_size = 6");
  CHECK_THROWS_AS(ga::checkpoint_from_string(tampered, "mem"), corrupt_checkpoint_error);

  std::string wrong_version = good;
  const auto vpos = wrong_version.find("checkpoint.version = 1");
  REQUIRE(vpos != std::string::npos);
  wrong_version.replace(vpos, 22, "checkpoint.version = 9");
  CHECK_THROWS_WITH(ga::checkpoint_from_string(wrong_version, "mem"),
                    Catch::Matchers::ContainsSubstring("digest"));
}

TEST_CASE("version mismatch is reported when the digest is consistent") {
  const auto base = table_one_layout();
  auto cfg = plain_config(4, 8, 1, 2);
  eval::SurrogateEvaluator surrogate{base, plain_fitness()};
  auto run = ga::evolve(cfg, plain_fitness(), surrogate, std::nullopt, &base);

  // Rebuild a fully consistent checkpoint that claims version 9.
  std::string s = ga::checkpoint_to_string(run);
  std::string body = s.substr(0, s.rfind("checkpoint.digest = "));
  const auto vpos = body.find("checkpoint.version = 1");
  body.replace(vpos, 22, "checkpoint.version = 9");
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : body) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  body += "checkpoint.digest = " + std::to_string(h) + "\n";
  CHECK_THROWS_WITH(ga::checkpoint_from_string(body, "mem"),
                    Catch::Matchers::ContainsSubstring("version"));
}

TEST_CASE("seed population: all-ones first, fractal second, biased rest") {
  const auto base = table_one_layout();
  ga::GaConfig cfg;
  cfg.grid_order = 19;
  cfg.population_size = 12;
  cfg.symmetry = ga::Symmetry::mirror_x;
  ga::Rng rng(1);
  const auto fractal = geometry::chromosome_from_cuts(base, geometry::FractalCutSpec{}, 19);
  auto pop = ga::make_seed_population(cfg, rng, fractal);
  REQUIRE(static_cast<int>(pop.size()) == 12);
  CHECK(pop[0].popcount() == 361);
  CHECK(pop[1].popcount() < 361);
  double fill = 0.0;
  for (size_t i = 2; i < pop.size(); ++i)
    fill += pop[i].popcount() / 361.0;
  fill /= (pop.size() - 2);
  CHECK(fill == Approx(0.8).margin(0.08));
}

TEST_CASE("config validation rejects the documented bad configs") {
  ga::GaConfig cfg;
  cfg.population_size = 3;
  CHECK_THROWS_AS(cfg.validate(), invalid_input_error);
  cfg.population_size = 6;
  cfg.elitism_count = 6;
  CHECK_THROWS_AS(cfg.validate(), invalid_input_error);
  cfg.elitism_count = 2;
  cfg.tournament_size = 1;
  CHECK_THROWS_AS(cfg.validate(), invalid_input_error);
}
