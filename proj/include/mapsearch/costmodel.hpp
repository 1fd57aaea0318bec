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

#ifndef MAPSEARCH_COSTMODEL_HPP
#define MAPSEARCH_COSTMODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapsearch/accel.hpp"
#include "mapsearch/mapspace.hpp"
#include "mapsearch/workload.hpp"

namespace mapsearch {

// Meta-statistics of one mapping evaluation. `energy` is level-major
// (DRAM, L2, L1) x tensor, in pJ; the component vector exposed to the
// surrogate is [energy..., energy_total, cycles, utilization] (12 entries
// for the 3-tensor kinds, 15 for MTTKRP). EDP is derived:
// energy_total * cycles / clock_hz.
struct CostVector {
  AlgorithmKind kind;
  std::vector<double> energy;  // kNumLevels * tensor_count entries
  double energy_total = 0;
  double cycles = 0;
  double utilization = 0;
  double edp = 0;

  std::vector<double> components() const;
  static int component_count(AlgorithmKind kind);
};

// CSV column names in component order, for dataset and report files.
std::string cost_csv_header(AlgorithmKind kind);

// Word transfers into each level (DRAM row = DRAM->L2 fills, L2 row =
// L2->L1 fills summed over PEs, L1 row = L1->PE operand reads summed over
// PEs), level-major x tensor.
std::vector<uint64_t> access_counts(const MapSpace& space, const Mapping& m);

// Analytical cost. Counts one transfer per resident-tile change under the
// stationarity rule: a tile is reused across trailing loops irrelevant to
// its tensor and refetched once any relevant loop outside them advances.
// Throws std::invalid_argument when the mapping is not a member.
CostVector evaluate(const MapSpace& space, const Mapping& m);

struct SimulationResult {
  std::vector<uint64_t> access;  // same layout as access_counts
  std::vector<double> output;
};

// Concrete tiled-loop-nest execution: walks the mapped nest, moves tiles
// between levels whenever a resident tile's coordinate tuple changes, and
// computes the functional output for comparison against golden_execute.
// Tractability cap: every problem dim must be <= dim_cap.
SimulationResult simulate(const MapSpace& space, const Mapping& m,
                          std::span<const std::vector<double>> inputs,
                          int64_t dim_cap = 64);

// Lower bound assuming perfect reuse (each word moves once per level) and
// 100% PE utilization. Componentwise: energy[l][t] = footprint(t) * e_l.
CostVector algorithmic_minimum(const AcceleratorConfig& accel, const Problem& p);

struct Objective {
  enum Kind { kEdp, kWeightedSum };
  Kind kind = kEdp;
  std::vector<double> weights;  // component weights for kWeightedSum

  static Objective edp() { return {}; }
  static Objective weighted(std::vector<double> w) { return {kWeightedSum, std::move(w)}; }
};

double objective_value(const CostVector& cv, const Objective& obj);

}  // namespace mapsearch

#endif  // MAPSEARCH_COSTMODEL_HPP
