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

#include <stdexcept>

#include "mapsearch/workload.hpp"

using namespace mapsearch;

TEST_CASE("required_flops closed forms") {
  CHECK(required_flops({AlgorithmKind::kConv1d, {8, 3}}) == 18);
  // ResNet conv_3 shape
  Problem p{AlgorithmKind::kConvLayer, {16, 128, 128, 28, 28, 3, 3}};
  CHECK(required_flops(p) == 16ll * 128 * 128 * 26 * 26 * 9);
  CHECK(required_flops({AlgorithmKind::kMttkrp, {2, 3, 4, 5}}) == 120);
}

TEST_CASE("tensor footprints") {
  Problem c1{AlgorithmKind::kConv1d, {8, 3}};
  CHECK(tensor_footprint(c1, 0) == 8);   // I
  CHECK(tensor_footprint(c1, 1) == 6);   // O = W-R+1
  CHECK(tensor_footprint(c1, 2) == 3);   // F
  Problem mk{AlgorithmKind::kMttkrp, {2, 3, 4, 5}};
  CHECK(tensor_footprint(mk, 0) == 40);  // A = I*K*L
  CHECK(tensor_footprint(mk, 1) == 12);  // B = K*J
  CHECK(tensor_footprint(mk, 2) == 15);  // C = L*J
  CHECK(tensor_footprint(mk, 3) == 6);   // O = I*J
  CHECK_THROWS(tensor_axes(AlgorithmKind::kConv1d, 3));
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS((Problem{AlgorithmKind::kConv1d, {3, 8}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Problem{AlgorithmKind::kConv1d, {3}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Problem{AlgorithmKind::kMttkrp, {1, 0, 1, 1}}.validate()),
                  std::invalid_argument);
}

TEST_CASE("golden_execute small closed forms") {
  {
    Problem p{AlgorithmKind::kConv1d, {3, 1}};
    std::vector<std::vector<double>> in = {{1, 2, 3}, {2}};
    auto o = golden_execute(p, in);
    CHECK(o == std::vector<double>{2, 4, 6});
  }
  {
    Problem p{AlgorithmKind::kConv1d, {4, 2}};
    std::vector<std::vector<double>> in = {{1, 1, 1, 1}, {1, 1}};
    auto o = golden_execute(p, in);
    CHECK(o == std::vector<double>{2, 2, 2});
  }
  {
    // mttkrp against an independent triple-loop reference
    Problem p{AlgorithmKind::kMttkrp, {2, 2, 3, 2}};
    auto in = make_test_inputs(p, 7);
    auto o = golden_execute(p, in);
    const auto &a = in[0], &b = in[1], &c = in[2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double want = 0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 2; ++l)
            want += a[(i * 3 + k) * 2 + l] * b[k * 2 + j] * c[l * 2 + j];
        CHECK(o[i * 2 + j] == want);
      }
  }
  CHECK_THROWS(golden_execute({AlgorithmKind::kConv1d, {3, 1}}, {{{1, 2}, {2}}}));
}

TEST_CASE("flop count matches the instrumented MAC loop on all tiny problems") {
  ExecStats stats;
  // conv1d: every W,R <= 6
  for (int64_t w = 1; w <= 6; ++w)
    for (int64_t r = 1; r <= w; ++r) {
      Problem p{AlgorithmKind::kConv1d, {w, r}};
      golden_execute(p, make_test_inputs(p, 1), &stats);
      CHECK(stats.macs == static_cast<uint64_t>(required_flops(p)));
    }
  // mttkrp: every dim <= 6
  for (int64_t i = 1; i <= 6; ++i)
    for (int64_t j = 1; j <= 6; ++j)
      for (int64_t k = 1; k <= 6; ++k)
        for (int64_t l = 1; l <= 6; ++l) {
          Problem p{AlgorithmKind::kMttkrp, {i, j, k, l}};
          golden_execute(p, make_test_inputs(p, 1), &stats);
          CHECK(stats.macs == static_cast<uint64_t>(required_flops(p)));
        }
  // convlayer: every dim <= 6 (valid shapes)
  uint64_t checked = 0;
  for (int64_t n = 1; n <= 6; n += 2)
    for (int64_t k = 1; k <= 6; k += 2)
      for (int64_t c = 1; c <= 6; c += 2)
        for (int64_t h = 1; h <= 6; ++h)
          for (int64_t w = 1; w <= 6; ++w)
            for (int64_t r = 1; r <= w; ++r)
              for (int64_t s = 1; s <= h; ++s) {
                Problem p{AlgorithmKind::kConvLayer, {n, k, c, h, w, r, s}};
                golden_execute(p, make_test_inputs(p, 1), &stats);
                REQUIRE(stats.macs == static_cast<uint64_t>(required_flops(p)));
                ++checked;
              }
  CHECK(checked > 1000);
}

TEST_CASE("footprints equal distinct words touched by the golden executor") {
  auto check = [](const Problem& p) {
    ExecStats stats;
    golden_execute(p, make_test_inputs(p, 3), &stats);
    for (int t = 0; t < tensor_count(p.kind); ++t) {
      int64_t touched = 0;
      for (char x : stats.touched[t]) touched += x;
      CHECK(touched == tensor_footprint(p, t));
    }
  };
  check({AlgorithmKind::kConv1d, {8, 3}});
  check({AlgorithmKind::kConv1d, {5, 5}});
  check({AlgorithmKind::kConvLayer, {2, 3, 2, 5, 4, 2, 3}});
  check({AlgorithmKind::kMttkrp, {2, 3, 4, 5}});
}
