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

#include "mapsearch/costmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mapsearch {

std::vector<double> CostVector::components() const {
  std::vector<double> v = energy;
  v.push_back(energy_total);
  v.push_back(cycles);
  v.push_back(utilization);
  return v;
}

int CostVector::component_count(AlgorithmKind kind) {
  return kNumLevels * tensor_count(kind) + 3;
}

std::string cost_csv_header(AlgorithmKind kind) {
  std::ostringstream os;
  const char* levels[] = {"dram", "l2", "l1"};
  auto tn = tensor_names(kind);
  for (int l = 0; l < kNumLevels; ++l)
    for (int t = 0; t < tensor_count(kind); ++t) os << "energy_" << levels[l] << "_" << tn[t] << ",";
  os << "energy_total,cycles,utilization";
  return os.str();
}

namespace {

struct Loop {
  int dim;
  int64_t trips;
};

// Concatenated nest, outermost first: DRAM loops (iterate L2 tiles), L2
// loops (iterate L1 tiles), then the per-PE loops over the L1 shard.
std::vector<Loop> build_nest(const MapSpace& space, const Mapping& m) {
  std::vector<Loop> loops;
  loops.reserve(3 * space.dims());
  for (int d : m.order[kDram]) loops.push_back({d, m.tile[kDram][d] / m.tile[kL2][d]});
  for (int d : m.order[kL2]) loops.push_back({d, m.tile[kL2][d] / m.tile[kL1][d]});
  for (int d : m.order[kL1]) loops.push_back({d, m.tile[kL1][d] / m.par[d]});
  return loops;
}

// Transfers per execution for a tensor whose relevant tile is keyed on the
// given loop prefix: trailing irrelevant loops reuse the resident tile, so
// the count is the trip product out to the innermost relevant loop.
// Degenerate (single-trip) loops never force a refetch.
uint64_t refetch(std::span<const Loop> prefix, AlgorithmKind kind, int tensor) {
  int last = -1;
  for (size_t i = 0; i < prefix.size(); ++i)
    if (prefix[i].trips > 1 && tensor_uses_dim(kind, tensor, prefix[i].dim))
      last = static_cast<int>(i);
  uint64_t r = 1;
  for (int i = 0; i <= last; ++i) r *= static_cast<uint64_t>(prefix[i].trips);
  return r;
}

}  // namespace

std::vector<uint64_t> access_counts(const MapSpace& space, const Mapping& m) {
  const auto kind = space.problem().kind;
  const int D = space.dims();
  const int T = space.tensors();
  auto loops = build_nest(space, m);
  uint64_t par_prod = static_cast<uint64_t>(m.par_product());

  std::vector<uint64_t> counts(kNumLevels * T, 0);
  for (int t = 0; t < T; ++t) {
    uint64_t fills_l2 = refetch(std::span(loops).first(D), kind, t);
    counts[kDram * T + t] =
        fills_l2 * static_cast<uint64_t>(space.tile_footprint(m, kL2, t));

    uint64_t fills_l1 = refetch(std::span(loops).first(2 * D), kind, t);
    counts[kL2 * T + t] =
        fills_l1 * par_prod * static_cast<uint64_t>(space.tile_footprint(m, kL1, t));

    uint64_t reads = refetch(loops, kind, t);
    counts[kL1 * T + t] = reads * par_prod;
  }
  return counts;
}

CostVector evaluate(const MapSpace& space, const Mapping& m) {
  if (!space.is_member(m))
    throw std::invalid_argument("evaluate: mapping is not a member of the map space");
  const auto& accel = space.accel();
  const int T = space.tensors();
  auto counts = access_counts(space, m);

  CostVector cv;
  cv.kind = space.problem().kind;
  cv.energy.resize(counts.size());
  double sum = 0;
  for (int l = 0; l < kNumLevels; ++l)
    for (int t = 0; t < T; ++t) {
      cv.energy[l * T + t] =
          static_cast<double>(counts[l * T + t]) * accel.energy_per_word[l];
      sum += cv.energy[l * T + t];
    }
  int64_t flops = required_flops(space.problem());
  cv.energy_total = sum + accel.mac_energy * static_cast<double>(flops);
  int64_t lanes = accel.flops_per_pe * m.par_product();
  cv.cycles = static_cast<double>((flops + lanes - 1) / lanes);
  cv.utilization =
      static_cast<double>(m.par_product()) / static_cast<double>(accel.num_pes);
  cv.edp = cv.energy_total * cv.cycles / accel.clock_hz;
  return cv;
}

namespace {

// Interpreter state: concrete loop walk with per-(level, tensor) resident
// tile keys. A transfer is counted whenever the key (the loop-index tuple
// restricted to the tensor's relevant dims) differs from the previous visit.
struct Interp {
  const MapSpace& space;
  const Mapping& m;
  AlgorithmKind kind;
  int D, T;
  std::vector<Loop> dram_loops, l2_loops, l1_loops;
  std::vector<int64_t> dram_idx, l2_idx, l1_idx, spatial, shard;
  uint64_t par_prod;

  std::vector<std::vector<int>> rel;  // per tensor, relevant dims

  std::vector<std::vector<int64_t>> key_l2, key_l1;        // per tensor
  std::vector<char> has_l2, has_l1;
  std::vector<std::vector<std::vector<int64_t>>> key_pe;   // per tensor x pe
  std::vector<std::vector<char>> has_pe;

  std::vector<uint64_t> counts;

  std::span<const std::vector<double>> inputs;
  std::vector<double> output;
  std::vector<int64_t> g;  // element coordinates

  Interp(const MapSpace& s, const Mapping& mm, std::span<const std::vector<double>> in)
      : space(s), m(mm), kind(s.problem().kind), D(s.dims()), T(s.tensors()), inputs(in) {
    for (int d : m.order[kDram]) dram_loops.push_back({d, m.tile[kDram][d] / m.tile[kL2][d]});
    for (int d : m.order[kL2]) l2_loops.push_back({d, m.tile[kL2][d] / m.tile[kL1][d]});
    for (int d : m.order[kL1]) l1_loops.push_back({d, m.tile[kL1][d] / m.par[d]});
    dram_idx.assign(D, 0);
    l2_idx.assign(D, 0);
    l1_idx.assign(D, 0);
    spatial.assign(D, 0);
    shard.resize(D);
    for (int d = 0; d < D; ++d) shard[d] = m.tile[kL1][d] / m.par[d];
    par_prod = static_cast<uint64_t>(m.par_product());
    rel.resize(T);
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d)
        if (tensor_uses_dim(kind, t, d)) rel[t].push_back(d);
    key_l2.resize(T);
    key_l1.resize(T);
    has_l2.assign(T, 0);
    has_l1.assign(T, 0);
    key_pe.assign(T, std::vector<std::vector<int64_t>>(par_prod));
    has_pe.assign(T, std::vector<char>(par_prod, 0));
    counts.assign(kNumLevels * T, 0);
    output.assign(tensor_footprint(space.problem(), output_tensor(kind)), 0.0);
    g.assign(D, 0);
  }

  void run() { walk_dram(0); }

  void walk_dram(size_t pos) {
    if (pos == dram_loops.size()) {
      fill_l2();
      walk_l2(0);
      return;
    }
    const auto& lp = dram_loops[pos];
    for (int64_t i = 0; i < lp.trips; ++i) {
      dram_idx[lp.dim] = i;
      walk_dram(pos + 1);
    }
  }

  void fill_l2() {
    for (int t = 0; t < T; ++t) {
      std::vector<int64_t> key;
      key.reserve(rel[t].size());
      for (int d : rel[t]) key.push_back(dram_idx[d]);
      if (!has_l2[t] || key != key_l2[t]) {
        counts[kDram * T + t] += static_cast<uint64_t>(space.tile_footprint(m, kL2, t));
        key_l2[t] = std::move(key);
        has_l2[t] = 1;
      }
    }
  }

  void walk_l2(size_t pos) {
    if (pos == l2_loops.size()) {
      fill_l1();
      walk_pes();
      return;
    }
    const auto& lp = l2_loops[pos];
    for (int64_t i = 0; i < lp.trips; ++i) {
      l2_idx[lp.dim] = i;
      walk_l2(pos + 1);
    }
  }

  void fill_l1() {
    for (int t = 0; t < T; ++t) {
      std::vector<int64_t> key;
      key.reserve(2 * rel[t].size());
      for (int d : rel[t]) {
        key.push_back(dram_idx[d]);
        key.push_back(l2_idx[d]);
      }
      if (!has_l1[t] || key != key_l1[t]) {
        counts[kL2 * T + t] +=
            par_prod * static_cast<uint64_t>(space.tile_footprint(m, kL1, t));
        key_l1[t] = std::move(key);
        has_l1[t] = 1;
      }
    }
  }

  void walk_pes() {
    for (uint64_t pe = 0; pe < par_prod; ++pe) {
      uint64_t rest = pe;
      for (int d = D - 1; d >= 0; --d) {
        spatial[d] = static_cast<int64_t>(rest % static_cast<uint64_t>(m.par[d]));
        rest /= static_cast<uint64_t>(m.par[d]);
      }
      walk_l1(0, pe);
    }
  }

  void walk_l1(size_t pos, uint64_t pe) {
    if (pos == l1_loops.size()) {
      element(pe);
      return;
    }
    const auto& lp = l1_loops[pos];
    for (int64_t i = 0; i < lp.trips; ++i) {
      l1_idx[lp.dim] = i;
      walk_l1(pos + 1, pe);
    }
  }

  void element(uint64_t pe) {
    for (int t = 0; t < T; ++t) {
      std::vector<int64_t> key;
      key.reserve(3 * rel[t].size());
      for (int d : rel[t]) {
        key.push_back(dram_idx[d]);
        key.push_back(l2_idx[d]);
        key.push_back(l1_idx[d]);
      }
      if (!has_pe[t][pe] || key != key_pe[t][pe]) {
        counts[kL1 * T + t] += 1;
        key_pe[t][pe] = std::move(key);
        has_pe[t][pe] = 1;
      }
    }
    for (int d = 0; d < D; ++d)
      g[d] = dram_idx[d] * m.tile[kL2][d] + l2_idx[d] * m.tile[kL1][d] +
             spatial[d] * shard[d] + l1_idx[d];
    const auto& dims = space.problem().dims;
    if (kind == AlgorithmKind::kConv1d) {
      output[g[0]] += inputs[0][g[0] + g[1]] * inputs[1][g[1]];
    } else if (kind == AlgorithmKind::kConvLayer) {
      int64_t c = dims[2], h = dims[3], w = dims[4], r = dims[5], s = dims[6];
      int64_t k_ext = dims[1], y_ext = h - s + 1, x_ext = w - r + 1;
      int64_t ii = ((g[0] * c + g[2]) * h + (g[3] + g[6])) * w + (g[4] + g[5]);
      int64_t fi = ((g[1] * c + g[2]) * r + g[5]) * s + g[6];
      int64_t oi = ((g[0] * k_ext + g[1]) * x_ext + g[4]) * y_ext + g[3];
      output[oi] += inputs[1][fi] * inputs[0][ii];
    } else {
      int64_t dj = dims[1], dk = dims[2], dl = dims[3];
      output[g[0] * dj + g[1]] += inputs[0][(g[0] * dk + g[2]) * dl + g[3]] *
                                  inputs[1][g[2] * dj + g[1]] *
                                  inputs[2][g[3] * dj + g[1]];
    }
  }
};

}  // namespace

SimulationResult simulate(const MapSpace& space, const Mapping& m,
                          std::span<const std::vector<double>> inputs, int64_t dim_cap) {
  for (int64_t d : space.problem().dims)
    if (d > dim_cap) throw std::invalid_argument("simulate: problem dim exceeds the tractability cap");
  if (!space.is_member(m))
    throw std::invalid_argument("simulate: mapping is not a member of the map space");
  int out = output_tensor(space.problem().kind);
  size_t pos = 0;
  for (int t = 0; t < space.tensors(); ++t) {
    if (t == out) continue;
    if (pos >= inputs.size() ||
        static_cast<int64_t>(inputs[pos].size()) != tensor_footprint(space.problem(), t))
      throw std::invalid_argument("simulate: input tensor shape mismatch");
    ++pos;
  }

  Interp interp(space, m, inputs);
  interp.run();
  return {std::move(interp.counts), std::move(interp.output)};
}

CostVector algorithmic_minimum(const AcceleratorConfig& accel, const Problem& p) {
  p.validate();
  accel.validate();
  const int T = tensor_count(p.kind);
  CostVector cv;
  cv.kind = p.kind;
  cv.energy.resize(kNumLevels * T);
  double sum = 0;
  for (int l = 0; l < kNumLevels; ++l)
    for (int t = 0; t < T; ++t) {
      cv.energy[l * T + t] =
          static_cast<double>(tensor_footprint(p, t)) * accel.energy_per_word[l];
      sum += cv.energy[l * T + t];
    }
  int64_t flops = required_flops(p);
  cv.energy_total = sum + accel.mac_energy * static_cast<double>(flops);
  int64_t lanes = accel.flops_per_pe * accel.num_pes;
  cv.cycles = static_cast<double>((flops + lanes - 1) / lanes);
  cv.utilization = 1.0;
  cv.edp = cv.energy_total * cv.cycles / accel.clock_hz;
  return cv;
}

double objective_value(const CostVector& cv, const Objective& obj) {
  if (obj.kind == Objective::kEdp) return cv.edp;
  auto comps = cv.components();
  if (obj.weights.size() != comps.size())
    throw std::invalid_argument("objective: weight vector length mismatch");
  double v = 0;
  for (size_t i = 0; i < comps.size(); ++i) v += obj.weights[i] * comps[i];
  return v;
}

}  // namespace mapsearch
