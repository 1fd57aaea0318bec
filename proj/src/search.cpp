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

#include "mapsearch/search.hpp"

#include <algorithm>
#include <cmath>

#include "mapsearch/common.hpp"

namespace mapsearch {

const char* method_name(Method m) {
  switch (m) {
    case Method::kMm: return "mm";
    case Method::kSa: return "sa";
    case Method::kGa: return "ga";
    case Method::kRandom: return "random";
  }
  return "?";
}

Method method_from_name(std::string_view name) {
  if (name == "mm") return Method::kMm;
  if (name == "sa") return Method::kSa;
  if (name == "ga") return Method::kGa;
  if (name == "random") return Method::kRandom;
  throw std::invalid_argument("unknown search method: " + std::string(name));
}

void SearchBudget::validate() const {
  if (kind == kIterations && iterations < 1)
    throw std::invalid_argument("budget: iterations must be >= 1");
  if (kind == kWallSeconds && seconds <= 0)
    throw std::invalid_argument("budget: wall seconds must be > 0");
}

void GradSearchConfig::validate() const {
  if (alpha < 0) throw std::invalid_argument("mm: alpha must be >= 0");
  if (inject_every < 1) throw std::invalid_argument("mm: inject_every must be >= 1");
  if (t0 <= 0) throw std::invalid_argument("mm: t0 must be > 0");
  if (anneal_factor <= 0 || anneal_factor >= 1)
    throw std::invalid_argument("mm: anneal_factor in (0,1)");
  if (anneal_every < 1) throw std::invalid_argument("mm: anneal_every must be >= 1");
}

void GaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("ga: population must be >= 2");
  if (crossover < 0 || crossover > 1 || mutation < 0 || mutation > 1)
    throw std::invalid_argument("ga: probabilities in [0,1]");
  if (elites < 0 || tournament < 1) throw std::invalid_argument("ga: bad selection config");
}

bool accept(double candidate_cost, double incumbent_cost, double temperature,
            std::mt19937_64& rng) {
  if (candidate_cost <= incumbent_cost) return true;
  double p = std::exp(-(candidate_cost - incumbent_cost) / temperature);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

namespace {

bool budget_allows(const SearchBudget& budget, uint64_t iters_done, const SearchClock& clock) {
  if (budget.kind == SearchBudget::kIterations) return iters_done < budget.iterations;
  return static_cast<double>(clock.now_ns()) < budget.seconds * 1e9;
}

// Shared bookkeeping: candidate registry, step log, best-so-far tracking.
struct Run {
  SearchTrace trace;
  SearchClock& clock;
  uint64_t iter = 0;
  double best_obj = 0;
  bool have_best = false;

  Run(Method m, uint64_t seed, SearchClock& c) : clock(c) {
    trace.method = m;
    trace.seed = seed;
  }

  uint32_t add_candidate(const Mapping& m) {
    trace.candidates.push_back(m);
    return static_cast<uint32_t>(trace.candidates.size() - 1);
  }

  void consider_best(uint32_t id, double obj) {
    if (!have_best || obj < best_obj || (obj == best_obj && id < trace.best_id)) {
      have_best = true;
      best_obj = obj;
      trace.best_id = id;
    }
  }

  void step(uint32_t id, double predicted, double true_obj) {
    ++iter;
    clock.tick();
    trace.steps.push_back({iter, clock.now_ns(), id, predicted, true_obj, trace.best_id});
  }
};

Mapping neighbor(const MapSpace& space, const Mapping& m, std::mt19937_64& rng) {
  Mapping c = m;
  int group = std::uniform_int_distribution<int>(0, MapSpace::kNumAttrGroups - 1)(rng);
  space.resample_group(c, group, rng);
  return space.get_projection(space.encode(c));
}

void check_model(const MapSpace& space, const MlpModel& model) {
  if (model.kind != space.problem().kind)
    throw std::invalid_argument("gradient_search: model was trained for a different kind");
  if (model.accel_fp != space.accel().fingerprint())
    throw std::invalid_argument("gradient_search: model was trained for a different accelerator");
  if (model.widths.empty() ||
      static_cast<size_t>(model.widths.front()) != space.flat_len() ||
      model.widths.back() != CostVector::component_count(space.problem().kind))
    throw std::invalid_argument("gradient_search: model width does not match the map space");
}

}  // namespace

SearchTrace gradient_search(const MapSpace& space, const MlpModel& model,
                            const GradSearchConfig& cfg, const SearchBudget& budget,
                            uint64_t seed, SearchClock& clock) {
  cfg.validate();
  budget.validate();
  check_model(space, model);

  std::mt19937_64 rng(seed);
  Run run(Method::kMm, seed, clock);

  Mapping m = space.get_mapping(rng);
  std::vector<double> x = normalize_input(model.norm, space.encode(m));
  uint32_t id = run.add_candidate(m);

  double temp = cfg.t0;
  int injections = 0;
  std::vector<double> grad;
  while (budget_allows(budget, run.iter, clock)) {
    double pred = predict_norm_edp_grad(model, x, grad);
    run.consider_best(id, pred);
    run.step(id, pred, kNoObj);

    for (size_t i = 0; i < x.size(); ++i) x[i] -= cfg.alpha * grad[i];
    Mapping next = space.get_projection(denormalize_input(model.norm, x));
    uint32_t next_id = next == m ? id : run.add_candidate(next);

    if (run.iter % static_cast<uint64_t>(cfg.inject_every) == 0) {
      Mapping rand_m = space.get_mapping(rng);
      std::vector<double> rand_x = normalize_input(model.norm, space.encode(rand_m));
      double rand_pred = predict_norm_edp(model, rand_x);
      uint32_t rand_id = run.add_candidate(rand_m);
      run.consider_best(rand_id, rand_pred);
      if (accept(rand_pred, pred, temp, rng)) {
        next = std::move(rand_m);
        next_id = rand_id;
      }
      ++injections;
      if (injections % cfg.anneal_every == 0) temp *= cfg.anneal_factor;
    }

    m = std::move(next);
    id = next_id;
    x = normalize_input(model.norm, space.encode(m));
  }

  run.trace.final_cost = evaluate(space, run.trace.candidates[run.trace.best_id]);
  run.trace.eval_calls = 1;
  run.trace.final_true_edp = run.trace.final_cost.edp;
  return run.trace;
}

SearchTrace simulated_annealing(const MapSpace& space, const SaConfig& cfg,
                                const SearchBudget& budget, uint64_t seed,
                                SearchClock& clock) {
  budget.validate();
  std::mt19937_64 rng(seed);
  Run run(Method::kSa, seed, clock);
  CostVector best_cv;

  auto eval_step = [&](const Mapping& m) {
    CostVector cv = evaluate(space, m);
    ++run.trace.eval_calls;
    uint32_t id = run.add_candidate(m);
    bool better = !run.have_best || cv.edp < run.best_obj;
    run.consider_best(id, cv.edp);
    if (better) best_cv = cv;
    run.step(id, kNoObj, cv.edp);
    return cv;
  };

  Mapping current = space.get_mapping(rng);
  CostVector current_cv = eval_step(current);

  double t0 = cfg.t0;
  if (t0 <= 0) {
    if (cfg.auto_tune && budget_allows(budget, run.iter + 64, clock)) {
      // Short pre-pass around the start point; pick T0 so an average uphill
      // move is accepted with probability ~0.8.
      double up_sum = 0, abs_sum = 0;
      int up_n = 0, n = 0;
      for (int k = 0; k < 32 && budget_allows(budget, run.iter, clock); ++k) {
        Mapping probe = neighbor(space, current, rng);
        CostVector cv = eval_step(probe);
        double delta = cv.edp - current_cv.edp;
        if (delta > 0) {
          up_sum += delta;
          ++up_n;
        }
        abs_sum += std::abs(delta);
        ++n;
      }
      double scale = up_n > 0 ? up_sum / up_n : (n > 0 ? abs_sum / n : 0);
      t0 = scale > 0 ? scale / std::log(1.0 / 0.8) : 0.1 * current_cv.edp;
    } else {
      t0 = 0.1 * current_cv.edp;
    }
    if (t0 <= 0) t0 = 1.0;
  }

  double factor = cfg.cooling;
  if (factor <= 0) {
    if (budget.kind == SearchBudget::kIterations) {
      uint64_t remaining = budget.iterations > run.iter ? budget.iterations - run.iter : 1;
      factor = std::pow(1e-3, 1.0 / static_cast<double>(remaining));
    } else {
      factor = 0.9995;
    }
  }

  double temp = t0;
  while (budget_allows(budget, run.iter, clock)) {
    Mapping cand = neighbor(space, current, rng);
    CostVector cv = eval_step(cand);
    if (accept(cv.edp, current_cv.edp, temp, rng)) {
      current = std::move(cand);
      current_cv = cv;
    }
    temp *= factor;
  }

  run.trace.final_cost = best_cv;
  run.trace.final_true_edp = best_cv.edp;
  return run.trace;
}

namespace {

struct Individual {
  Mapping m;
  double edp;
  uint32_t id;
};

// Attribute-group crossover/mutation. Genes: one (tile chain, par) triple
// per dim, one permutation per level, one alloc cell per (level, tensor).
void crossover_genes(const MapSpace& space, Mapping& a, Mapping& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int d = 0; d < space.dims(); ++d)
    if (u01(rng) < 0.5) {
      std::swap(a.tile[kL2][d], b.tile[kL2][d]);
      std::swap(a.tile[kL1][d], b.tile[kL1][d]);
      std::swap(a.par[d], b.par[d]);
    }
  for (int l = 0; l < kNumLevels; ++l)
    if (u01(rng) < 0.5) std::swap(a.order[l], b.order[l]);
  for (int l = 0; l < kNumOnChip; ++l)
    for (int t = 0; t < space.tensors(); ++t)
      if (u01(rng) < 0.5) std::swap(a.alloc[l][t], b.alloc[l][t]);
}

void mutate_genes(const MapSpace& space, Mapping& m, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int d = 0; d < space.dims(); ++d)
    if (u01(rng) < p) {
      auto cs = space.chains(d);
      const auto& c = cs[std::uniform_int_distribution<size_t>(0, cs.size() - 1)(rng)];
      m.tile[kL2][d] = c[0];
      m.tile[kL1][d] = c[1];
      m.par[d] = c[2];
    }
  for (int l = 0; l < kNumLevels; ++l)
    if (u01(rng) < p) std::shuffle(m.order[l].begin(), m.order[l].end(), rng);
  for (int l = 0; l < kNumOnChip; ++l)
    for (int t = 0; t < space.tensors(); ++t)
      if (u01(rng) < p)
        m.alloc[l][t] = static_cast<int>(
            std::uniform_int_distribution<int64_t>(0, space.accel().num_banks[l])(rng));
}

}  // namespace

SearchTrace genetic_search(const MapSpace& space, const GaConfig& cfg,
                           const SearchBudget& budget, uint64_t seed, SearchClock& clock) {
  cfg.validate();
  budget.validate();
  std::mt19937_64 rng(seed);
  Run run(Method::kGa, seed, clock);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  size_t pop_size = static_cast<size_t>(cfg.population);
  SpaceSize ss = space.space_size();
  if (ss.exact && ss.count < pop_size) pop_size = std::max<uint64_t>(2, ss.count);

  CostVector best_cv;
  auto eval_ind = [&](Mapping m) {
    CostVector cv = evaluate(space, m);
    ++run.trace.eval_calls;
    uint32_t id = run.add_candidate(m);
    bool better = !run.have_best || cv.edp < run.best_obj;
    run.consider_best(id, cv.edp);
    if (better) best_cv = cv;
    run.step(id, kNoObj, cv.edp);
    return Individual{std::move(m), cv.edp, id};
  };

  std::vector<Individual> pop;
  for (size_t i = 0; i < pop_size && budget_allows(budget, run.iter, clock); ++i)
    pop.push_back(eval_ind(space.get_mapping(rng)));
  if (pop.size() < 2) {
    // Budget too small for a population; report the trace so far.
    if (!pop.empty()) {
      run.trace.final_cost = best_cv;
      run.trace.final_true_edp = best_cv.edp;
    }
    return run.trace;
  }

  auto fitter = [](const Individual& a, const Individual& b) {
    return a.edp < b.edp || (a.edp == b.edp && a.id < b.id);
  };
  auto tournament = [&]() -> const Individual& {
    size_t best = std::uniform_int_distribution<size_t>(0, pop.size() - 1)(rng);
    for (int k = 1; k < cfg.tournament; ++k) {
      size_t c = std::uniform_int_distribution<size_t>(0, pop.size() - 1)(rng);
      if (fitter(pop[c], pop[best])) best = c;
    }
    return pop[best];
  };

  while (budget_allows(budget, run.iter, clock)) {
    std::vector<Individual> next;
    std::vector<size_t> rank(pop.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(),
              [&](size_t a, size_t b) { return fitter(pop[a], pop[b]); });
    for (int e = 0; e < cfg.elites && next.size() < pop.size(); ++e)
      next.push_back(pop[rank[e]]);

    uint64_t evals_before = run.trace.eval_calls;
    while (next.size() < pop.size() && budget_allows(budget, run.iter, clock)) {
      Mapping a = tournament().m;
      Mapping b = tournament().m;
      if (u01(rng) < cfg.crossover) crossover_genes(space, a, b, rng);
      mutate_genes(space, a, cfg.mutation, rng);
      mutate_genes(space, b, cfg.mutation, rng);
      a = space.get_projection(space.encode(a));
      next.push_back(eval_ind(std::move(a)));
      if (next.size() < pop.size() && budget_allows(budget, run.iter, clock)) {
        b = space.get_projection(space.encode(b));
        next.push_back(eval_ind(std::move(b)));
      }
    }
    if (run.trace.eval_calls == evals_before) break;  // frozen population
    pop = std::move(next);
  }

  run.trace.final_cost = best_cv;
  run.trace.final_true_edp = best_cv.edp;
  return run.trace;
}

SearchTrace random_search(const MapSpace& space, const SearchBudget& budget, uint64_t seed,
                          SearchClock& clock) {
  budget.validate();
  std::mt19937_64 rng(seed);
  Run run(Method::kRandom, seed, clock);
  CostVector best_cv;
  while (budget_allows(budget, run.iter, clock)) {
    Mapping m = space.get_mapping(rng);
    CostVector cv = evaluate(space, m);
    ++run.trace.eval_calls;
    uint32_t id = run.add_candidate(m);
    bool better = !run.have_best || cv.edp < run.best_obj;
    run.consider_best(id, cv.edp);
    if (better) best_cv = cv;
    run.step(id, kNoObj, cv.edp);
  }
  run.trace.final_cost = best_cv;
  run.trace.final_true_edp = best_cv.edp;
  return run.trace;
}

}  // namespace mapsearch
