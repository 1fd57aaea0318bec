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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mapsearch/dataset.hpp"
#include "testutil.hpp"

using namespace mapsearch;
using testutil::tiny_accel;

namespace {

ProblemRange conv1d_range() {
  return {AlgorithmKind::kConv1d, {{8, 64}, {2, 8}}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("problem sampling respects ranges and validity") {
  std::mt19937_64 rng(1);
  ProblemRange r = conv1d_range();
  for (int i = 0; i < 500; ++i) {
    Problem p = sample_problem(r, rng);
    CHECK(p.dims[0] >= 8);
    CHECK(p.dims[0] <= 64);
    CHECK(p.dims[1] >= 2);
    CHECK(p.dims[1] <= 8);
    CHECK(p.dims[1] <= p.dims[0]);
  }
  ProblemRange bad{AlgorithmKind::kConv1d, {{2, 3}, {5, 8}}};  // R can never fit W
  CHECK_THROWS(sample_problem(bad, rng));
}

TEST_CASE("dataset generation is deterministic and stores only valid mappings") {
  AcceleratorConfig a = tiny_accel();
  Dataset d1 = generate_dataset(a, AlgorithmKind::kConv1d, conv1d_range(), 200, 42);
  Dataset d2 = generate_dataset(a, AlgorithmKind::kConv1d, conv1d_range(), 200, 42);

  auto tmp = std::filesystem::temp_directory_path();
  std::string p1 = (tmp / "ds1.txt").string(), p2 = (tmp / "ds2.txt").string();
  write_dataset(d1, p1);
  write_dataset(d2, p2);
  CHECK(slurp(p1) == slurp(p2));  // byte-identical

  for (const auto& rec : d1.records) {
    Problem p = d1.problem_of(rec);
    MapSpace space(p, a);
    Mapping m = space.decode(rec.input);
    CHECK(space.is_member(m));
  }

  Dataset rt = read_dataset(p1);
  CHECK(rt.records.size() == d1.records.size());
  CHECK(rt.fingerprint() == d1.fingerprint());
  for (size_t i = 0; i < rt.records.size(); ++i) {
    CHECK(rt.records[i].input == d1.records[i].input);
    CHECK(rt.records[i].cost == d1.records[i].cost);
    CHECK(rt.records[i].split == d1.records[i].split);
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("desk-scale conv1d generation stays within the time budget") {
  AcceleratorConfig a = tiny_accel();
  auto t0 = std::chrono::steady_clock::now();
  Dataset ds = generate_dataset(a, AlgorithmKind::kConv1d, conv1d_range(), 50000, 7);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(ds.records.size() == 50000);
  CHECK(secs < 60.0);
  MESSAGE("generated 50k records in ", secs, " s");
}

TEST_CASE("normalization: round trip, moments, and split hygiene") {
  AcceleratorConfig a = tiny_accel();
  Dataset ds = generate_dataset(a, AlgorithmKind::kConv1d, conv1d_range(), 3000, 11);
  NormStats st = fit_norm(ds, a);

  // invert(apply) is the identity to 1e-9 relative
  for (size_t i = 0; i < 1000; ++i) {
    const auto& rec = ds.records[i % ds.records.size()];
    auto [x, y] = apply_norm(st, ds, rec);
    CostVector cv = invert_norm(st, y, ds.problem_of(rec));
    auto comps = cv.components();
    REQUIRE(comps.size() == rec.cost.size());
    for (size_t c = 0; c < comps.size(); ++c) {
      double denom = std::max(std::abs(rec.cost[c]), 1e-30);
      CHECK(std::abs(comps[c] - rec.cost[c]) / denom < 1e-9);
    }
    auto flat = denormalize_input(st, x);
    for (size_t c = 0; c < flat.size(); ++c)
      CHECK(flat[c] == doctest::Approx(rec.input[c]).epsilon(1e-12));
  }

  // training-split moments are exactly standardized
  size_t n_train = 0;
  std::vector<double> mean, var;
  for (const auto& rec : ds.records) {
    if (rec.split != 0) continue;
    auto [x, y] = apply_norm(st, ds, rec);
    if (mean.empty()) {
      mean.assign(x.size() + y.size(), 0.0);
      var.assign(x.size() + y.size(), 0.0);
    }
    for (size_t c = 0; c < x.size(); ++c) mean[c] += x[c];
    for (size_t c = 0; c < y.size(); ++c) mean[x.size() + c] += y[c];
    ++n_train;
  }
  for (auto& m : mean) m /= static_cast<double>(n_train);
  for (const auto& rec : ds.records) {
    if (rec.split != 0) continue;
    auto [x, y] = apply_norm(st, ds, rec);
    for (size_t c = 0; c < x.size(); ++c) var[c] += (x[c] - mean[c]) * (x[c] - mean[c]);
    for (size_t c = 0; c < y.size(); ++c)
      var[x.size() + c] += (y[c] - mean[x.size() + c]) * (y[c] - mean[x.size() + c]);
  }
  size_t flat = st.in_mean.size();
  for (size_t c = 0; c < mean.size(); ++c) {
    CHECK(std::abs(mean[c]) < 1e-6);
    double sd = std::sqrt(var[c] / static_cast<double>(n_train));
    // constant coordinates (p_id-independent zeros) are floored, not scaled
    if (sd > 1e-7) CHECK(sd == doctest::Approx(1.0).epsilon(1e-6));
    (void)flat;
  }

  // stats refuse records from a different dataset
  Dataset other = generate_dataset(a, AlgorithmKind::kConv1d, conv1d_range(), 50, 12);
  CHECK_THROWS_AS(apply_norm(st, other, other.records[0]), std::invalid_argument);
}

TEST_CASE("lower-bound divisors scale energy and cycles only") {
  AcceleratorConfig a = tiny_accel();
  Problem p{AlgorithmKind::kConv1d, {16, 4}};
  CostVector bound = algorithmic_minimum(a, p);
  auto div = lower_bound_divisors(a, p);
  REQUIRE(div.size() == 12);
  for (int i = 0; i < 10; ++i) CHECK(div[i] == bound.energy_total);
  CHECK(div[10] == bound.cycles);
  CHECK(div[11] == 1.0);
}

TEST_CASE("a record equal to the training mean maps to zero") {
  // Single-problem range so the mean record's p_id is exact.
  AcceleratorConfig a = tiny_accel();
  ProblemRange fixed{AlgorithmKind::kConv1d, {{16, 16}, {4, 4}}};
  Dataset ds = generate_dataset(a, AlgorithmKind::kConv1d, fixed, 400, 5);
  NormStats st = fit_norm(ds, a);
  SampleRecord rec = ds.records[0];
  Problem p = ds.problem_of(rec);
  auto div = lower_bound_divisors(a, p);
  for (size_t c = 0; c < rec.cost.size(); ++c) rec.cost[c] = st.out_mean[c] * div[c];
  for (size_t c = 0; c < rec.input.size(); ++c) rec.input[c] = st.in_mean[c];
  auto [x, y] = apply_norm(st, ds, rec);
  for (double v : x) CHECK(v == doctest::Approx(0.0));
  for (double v : y) CHECK(v == doctest::Approx(0.0));
}
