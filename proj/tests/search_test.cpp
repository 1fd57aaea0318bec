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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mapsearch/search.hpp"
#include "testutil.hpp"

using namespace mapsearch;
using testutil::tiny_accel;

namespace {

// Model with matching fingerprints and identity normalization; zero_weights
// makes the surrogate constant (pure-injection behavior).
MlpModel fake_model(const MapSpace& space, uint64_t seed, bool zero_weights = false) {
  int in = static_cast<int>(space.flat_len());
  int out = CostVector::component_count(space.problem().kind);
  MlpModel m = make_model(space.problem().kind, {in, 8, out}, Activation::kSoftplus, seed);
  if (zero_weights)
    for (auto& l : m.w) std::fill(l.begin(), l.end(), 0.0);
  m.norm.kind = m.kind;
  m.norm.accel = space.accel();
  m.norm.pid_len = space.pid_len();
  m.norm.in_mean.assign(in, 0.0);
  m.norm.in_std.assign(in, 1.0);
  m.norm.out_mean.assign(out, 0.0);
  m.norm.out_std.assign(out, 1.0);
  m.accel_fp = space.accel().fingerprint();
  return m;
}

bool same_trace(const SearchTrace& a, const SearchTrace& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (size_t i = 0; i < a.steps.size(); ++i) {
    const auto &x = a.steps[i], &y = b.steps[i];
    bool pred_same = (std::isnan(x.predicted_obj) && std::isnan(y.predicted_obj)) ||
                     x.predicted_obj == y.predicted_obj;
    bool true_same =
        (std::isnan(x.true_obj) && std::isnan(y.true_obj)) || x.true_obj == y.true_obj;
    if (x.iteration != y.iteration || x.candidate_id != y.candidate_id || !pred_same ||
        !true_same || x.best_id != y.best_id)
      return false;
  }
  return a.candidates == b.candidates && a.final_true_edp == b.final_true_edp;
}

}  // namespace

TEST_CASE("accept: improvement always, uphill per Metropolis") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) CHECK(accept(1.0, 2.0, 0.5, rng));
  // delta == T: acceptance frequency ~ 1/e
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += accept(3.0, 2.0, 1.0, rng);
  double p = std::exp(-1.0);
  double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(hits - n * p) <= 3 * sigma);
  // vanishing temperature: uphill move never accepted
  hits = 0;
  for (int i = 0; i < n; ++i) hits += accept(2.0 + 1e-3, 2.0, 1e-12, rng);
  CHECK(hits == 0);
}

TEST_CASE("gradient search with a constant surrogate only moves at injections") {
  MapSpace space = testutil::tiny_conv1d_space();
  MlpModel model = fake_model(space, 3, /*zero_weights=*/true);
  GradSearchConfig cfg;
  cfg.inject_every = 10;
  for (double alpha : {1.0, 0.0}) {
    cfg.alpha = alpha;
    FixedRateClock clock(1000);
    SearchTrace tr = gradient_search(space, model, cfg, SearchBudget::iters(50), 5, clock);
    REQUIRE(tr.steps.size() == 50);
    for (size_t i = 1; i < tr.steps.size(); ++i) {
      bool after_injection = tr.steps[i - 1].iteration % cfg.inject_every == 0;
      if (!after_injection)
        CHECK(tr.steps[i].candidate_id == tr.steps[i - 1].candidate_id);
    }
  }
}

TEST_CASE("gradient search candidates are always valid and evaluate is called once") {
  MapSpace space = testutil::tiny_conv1d_space();
  MlpModel model = fake_model(space, 7);
  FixedRateClock clock(1000);
  SearchTrace tr =
      gradient_search(space, model, GradSearchConfig{}, SearchBudget::iters(120), 11, clock);
  for (const auto& st : tr.steps) CHECK(space.is_member(tr.candidates[st.candidate_id]));
  CHECK(tr.eval_calls == 1);
  CHECK(tr.final_true_edp == evaluate(space, tr.candidates[tr.best_id]).edp);
}

TEST_CASE("gradient search incumbent worsens only at injection boundaries") {
  MapSpace space = testutil::tiny_conv1d_space();
  MlpModel model = fake_model(space, 13);
  GradSearchConfig cfg;
  cfg.inject_every = 10;
  FixedRateClock clock(1000);
  SearchTrace tr = gradient_search(space, model, cfg, SearchBudget::iters(100), 2, clock);
  for (size_t i = 1; i < tr.steps.size(); ++i) {
    double prev = tr.steps[i - 1].predicted_obj;
    double cur = tr.steps[i].predicted_obj;
    if (cur > prev + 1e-12)
      CHECK(tr.steps[i - 1].iteration % cfg.inject_every == 0);
  }
}

TEST_CASE("model/context mismatches are refused") {
  MapSpace space = testutil::tiny_conv1d_space();
  MapSpace other({AlgorithmKind::kMttkrp, {2, 3, 4, 5}}, testutil::small_accel());
  MlpModel model = fake_model(other, 1);
  FixedRateClock clock(1);
  CHECK_THROWS_AS(
      gradient_search(space, model, GradSearchConfig{}, SearchBudget::iters(5), 1, clock),
      std::invalid_argument);
}

TEST_CASE("all searchers are deterministic given a seed") {
  MapSpace space = testutil::tiny_conv1d_space();
  MlpModel model = fake_model(space, 21);
  auto run_twice = [&](auto&& f) {
    FixedRateClock c1(100), c2(100);
    auto a = f(c1);
    auto b = f(c2);
    CHECK(same_trace(a, b));
  };
  run_twice([&](SearchClock& c) {
    return gradient_search(space, model, GradSearchConfig{}, SearchBudget::iters(60), 9, c);
  });
  run_twice([&](SearchClock& c) {
    return simulated_annealing(space, SaConfig{}, SearchBudget::iters(80), 9, c);
  });
  run_twice([&](SearchClock& c) {
    GaConfig g;
    g.population = 10;
    return genetic_search(space, g, SearchBudget::iters(60), 9, c);
  });
  run_twice(
      [&](SearchClock& c) { return random_search(space, SearchBudget::iters(40), 9, c); });
}

TEST_CASE("baselines call evaluate exactly once per iteration") {
  MapSpace space = testutil::tiny_conv1d_space();
  FixedRateClock c1(100), c2(100), c3(100);
  auto sa = simulated_annealing(space, SaConfig{}, SearchBudget::iters(70), 3, c1);
  CHECK(sa.eval_calls == sa.steps.size());
  CHECK(sa.steps.size() == 70);
  GaConfig g;
  g.population = 8;
  auto ga = genetic_search(space, g, SearchBudget::iters(50), 3, c2);
  CHECK(ga.eval_calls == ga.steps.size());
  CHECK(ga.steps.size() == 50);
  auto rs = random_search(space, SearchBudget::iters(40), 3, c3);
  CHECK(rs.eval_calls == rs.steps.size());
}

TEST_CASE("simulated annealing: greedy at epsilon temperature, optimum on tiny space") {
  MapSpace space = testutil::tiny_conv1d_space();
  auto all = testutil::all_valid_mappings(space);
  double opt = std::numeric_limits<double>::infinity();
  for (const auto& m : all) opt = std::min(opt, evaluate(space, m).edp);

  SaConfig greedy;
  greedy.t0 = 1e-12;
  greedy.cooling = 0.5;
  greedy.auto_tune = false;
  FixedRateClock c0(100);
  auto tr = simulated_annealing(space, greedy, SearchBudget::iters(200), 5, c0);
  // the recorded best id always carries the running-minimum cost
  double best = std::numeric_limits<double>::infinity();
  for (const auto& st : tr.steps) {
    best = std::min(best, st.true_obj);
    CHECK(evaluate(space, tr.candidates[st.best_id]).edp == best);
  }

  int hits = 0;
  uint64_t budget = 10 * all.size();
  for (uint64_t seed = 0; seed < 5; ++seed) {
    FixedRateClock c(100);
    auto t = simulated_annealing(space, SaConfig{}, SearchBudget::iters(budget), seed, c);
    if (t.final_true_edp <= opt * (1 + 1e-12)) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("genetic search: frozen population under degenerate config, valid children") {
  MapSpace space = testutil::tiny_conv1d_space();
  GaConfig cfg;
  cfg.population = 12;
  cfg.crossover = 0;
  cfg.mutation = 0;
  cfg.elites = 12;
  FixedRateClock c(100);
  auto tr = genetic_search(space, cfg, SearchBudget::iters(500), 7, c);
  CHECK(tr.steps.size() == 12);  // only the initial population is ever evaluated

  GaConfig busy;
  busy.population = 16;
  FixedRateClock c2(100);
  auto tr2 = genetic_search(space, busy, SearchBudget::iters(600), 7, c2);
  CHECK(tr2.steps.size() == 600);
  for (const auto& st : tr2.steps) CHECK(space.is_member(tr2.candidates[st.candidate_id]));
}

TEST_CASE("random search matches the uniform order statistic on a tiny space") {
  MapSpace space = testutil::tiny_conv1d_space();
  auto all = testutil::all_valid_mappings(space);
  std::vector<double> edps;
  for (const auto& m : all) edps.push_back(evaluate(space, m).edp);
  std::sort(edps.begin(), edps.end());

  const uint64_t k = 20;
  double n = static_cast<double>(edps.size());
  double expected = 0;  // E[min of k uniform draws with replacement]
  for (size_t i = 0; i < edps.size(); ++i) {
    double p = std::pow((n - static_cast<double>(i)) / n, static_cast<double>(k)) -
               std::pow((n - static_cast<double>(i) - 1) / n, static_cast<double>(k));
    expected += edps[i] * p;
  }

  const int runs = 400;
  double mean = 0, m2 = 0;
  for (int r = 0; r < runs; ++r) {
    FixedRateClock c(100);
    auto tr = random_search(space, SearchBudget::iters(k), 1000 + r, c);
    REQUIRE(tr.steps.size() == k);
    double v = tr.final_true_edp;
    mean += v;
    m2 += v * v;
  }
  mean /= runs;
  double var = m2 / runs - mean * mean;
  double sev = std::sqrt(std::max(var, 0.0) / runs);
  CHECK(std::abs(mean - expected) <= 5 * sev + 1e-12);

  FixedRateClock c(100);
  auto one = random_search(space, SearchBudget::iters(1), 3, c);
  CHECK(one.steps.size() == 1);
}

TEST_CASE("wall-clock budgets terminate against the fixed clock") {
  MapSpace space = testutil::tiny_conv1d_space();
  FixedRateClock c(1000000);  // 1 ms per iteration
  auto tr = random_search(space, SearchBudget::wall(0.02), 5, c);
  CHECK(tr.steps.size() == 20);
}
