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

#ifndef MAPSEARCH_DATASET_HPP
#define MAPSEARCH_DATASET_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mapsearch/costmodel.hpp"

namespace mapsearch {

// Per-dim sampling intervals for representative problems of one algorithm.
struct ProblemRange {
  AlgorithmKind kind;
  std::vector<std::pair<int64_t, int64_t>> lo_hi;  // inclusive, per dim

  void validate() const;
};

// Per-dim independent uniform; log-uniform for dims spanning >= 8x. Invalid
// combinations (e.g. R > W) are resampled; throws on unsatisfiable ranges.
Problem sample_problem(const ProblemRange& range, std::mt19937_64& rng);

struct SampleRecord {
  int split = 0;               // 0 = train, 1 = held-out test
  std::vector<double> input;   // flat mapping vector; p_id dims are its prefix
  std::vector<double> cost;    // raw cost components
};

struct Dataset {
  AlgorithmKind kind;
  uint64_t accel_fp = 0;
  uint64_t seed = 0;
  double test_frac = 0.1;
  size_t flat_len = 0;
  size_t cost_len = 0;
  std::vector<SampleRecord> records;

  uint64_t fingerprint() const;  // of the identifying header fields
  Problem problem_of(const SampleRecord& r) const;
};

// Phase-1 generation: sample a problem from the range, draw a valid mapping,
// evaluate it, append. Only valid mappings are stored. Deterministic per seed.
Dataset generate_dataset(const AcceleratorConfig& accel, AlgorithmKind kind,
                         const ProblemRange& range, size_t n, uint64_t seed,
                         double test_frac = 0.1);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// Frozen normalization: outputs are first divided by the lower-bound-derived
// divisor of their p_id (energy components by the bound total energy, cycles
// by the bound cycles, utilization untouched), then standardized; inputs are
// standardized directly. Statistics come from the training split only.
struct NormStats {
  AlgorithmKind kind;
  AcceleratorConfig accel;  // the divisors are a function of (accel, p_id)
  size_t pid_len = 0;
  std::vector<double> in_mean, in_std;
  std::vector<double> out_mean, out_std;
  uint64_t dataset_fp = 0;
  uint64_t train_fp = 0;  // fingerprint of the training split contents

  static constexpr double kStdFloor = 1e-8;
};

std::vector<double> lower_bound_divisors(const AcceleratorConfig& accel, const Problem& p);

NormStats fit_norm(const Dataset& ds, const AcceleratorConfig& accel);

// Normalized (input, output) pair for one record. Asserts the record's
// dataset matches the stats' fingerprint, so test-split leakage into the
// statistics is structurally impossible.
std::pair<std::vector<double>, std::vector<double>> apply_norm(const NormStats& stats,
                                                               const Dataset& ds,
                                                               const SampleRecord& r);

std::vector<double> normalize_input(const NormStats& stats, std::span<const double> flat);
std::vector<double> denormalize_input(const NormStats& stats, std::span<const double> x);

// Exactly reverses apply_norm's output path for the given p_id.
CostVector invert_norm(const NormStats& stats, std::span<const double> norm_out,
                       const Problem& p);

struct NormalizedData {
  std::vector<std::vector<double>> x_train, y_train, x_test, y_test;
};
NormalizedData normalize_dataset(const NormStats& stats, const Dataset& ds);

}  // namespace mapsearch

#endif  // MAPSEARCH_DATASET_HPP
