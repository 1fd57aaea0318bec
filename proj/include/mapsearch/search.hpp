/*******************************************************************************
 * Copyright 2026 The mapsearch authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *******************************************************************************/

#ifndef MAPSEARCH_SEARCH_HPP
#define MAPSEARCH_SEARCH_HPP

#include <chrono>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mapsearch/costmodel.hpp"
#include "mapsearch/surrogate.hpp"

namespace mapsearch {

enum class Method { kMm, kSa, kGa, kRandom };
const char* method_name(Method m);
Method method_from_name(std::string_view name);

struct SearchBudget {
  enum Kind { kIterations, kWallSeconds };
  Kind kind = kIterations;
  uint64_t iterations = 1000;
  double seconds = 0;

  static SearchBudget iters(uint64_t n) { return {kIterations, n, 0}; }
  static SearchBudget wall(double s) { return {kWallSeconds, 0, s}; }
  void validate() const;
};

// Iteration timing source. The fixed-rate clock advances a configured
// amount per iteration, which keeps trace files byte-reproducible; the real
// clock measures wall time for live iso-time experiments.
class SearchClock {
 public:
  virtual ~SearchClock() = default;
  virtual void tick() {}
  virtual uint64_t now_ns() const = 0;
};

class RealClock final : public SearchClock {
 public:
  RealClock() : start_(std::chrono::steady_clock::now()) {}
  uint64_t now_ns() const override {
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                     std::chrono::steady_clock::now() - start_)
                                     .count());
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class FixedRateClock final : public SearchClock {
 public:
  explicit FixedRateClock(uint64_t step_ns) : step_ns_(step_ns) {}
  void tick() override { ++steps_; }
  uint64_t now_ns() const override { return steps_ * step_ns_; }

 private:
  uint64_t step_ns_;
  uint64_t steps_ = 0;
};

constexpr double kNoObj = std::numeric_limits<double>::quiet_NaN();

struct TraceStep {
  uint64_t iteration = 0;
  uint64_t elapsed_ns = 0;
  uint32_t candidate_id = 0;
  double predicted_obj = kNoObj;  // surrogate objective (gradient search only)
  double true_obj = kNoObj;       // cost-model EDP (baselines only)
  uint32_t best_id = 0;           // best-so-far candidate under the searcher's objective
};

struct SearchTrace {
  Method method = Method::kRandom;
  uint64_t seed = 0;
  std::vector<TraceStep> steps;
  std::vector<Mapping> candidates;  // indexed by candidate id
  uint64_t eval_calls = 0;          // true-cost evaluations performed
  uint32_t best_id = 0;
  CostVector final_cost;            // best candidate re-evaluated by the cost model
  double final_true_edp = 0;
};

struct GradSearchConfig {
  double alpha = 1.0;
  int inject_every = 10;
  double t0 = 50.0;
  double anneal_factor = 0.75;
  int anneal_every = 50;  // injections per annealing step

  void validate() const;
};

struct SaConfig {
  double t0 = 0;       // <= 0 selects auto-tuning of the start temperature
  double cooling = 0;  // <= 0 selects a budget-derived geometric factor
  bool auto_tune = true;
};

struct GaConfig {
  int population = 100;
  double crossover = 0.75;
  double mutation = 0.05;
  int elites = 1;
  int tournament = 3;

  void validate() const;
};

// Metropolis rule: always accept an improvement, otherwise accept with
// probability exp(-(candidate - incumbent) / temperature).
bool accept(double candidate_cost, double incumbent_cost, double temperature,
            std::mt19937_64& rng);

// Projected gradient descent on the surrogate with periodic random
// injections. The cost model is never queried during the run; the final
// best candidate is re-evaluated exactly once.
SearchTrace gradient_search(const MapSpace& space, const MlpModel& model,
                            const GradSearchConfig& cfg, const SearchBudget& budget,
                            uint64_t seed, SearchClock& clock);

SearchTrace simulated_annealing(const MapSpace& space, const SaConfig& cfg,
                                const SearchBudget& budget, uint64_t seed, SearchClock& clock);

SearchTrace genetic_search(const MapSpace& space, const GaConfig& cfg,
                           const SearchBudget& budget, uint64_t seed, SearchClock& clock);

SearchTrace random_search(const MapSpace& space, const SearchBudget& budget, uint64_t seed,
                          SearchClock& clock);

}  // namespace mapsearch

#endif  // MAPSEARCH_SEARCH_HPP
