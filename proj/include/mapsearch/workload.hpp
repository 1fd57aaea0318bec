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

#ifndef MAPSEARCH_WORKLOAD_HPP
#define MAPSEARCH_WORKLOAD_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mapsearch {

// Target kernels. Conv1D is dims (W, R); ConvLayer is (N, K, C, H, W, R, S);
// Mttkrp is (I, J, K, L). Stride is fixed at 1 for the convolutions.
enum class AlgorithmKind { kConv1d, kConvLayer, kMttkrp };

const char* kind_name(AlgorithmKind kind);
AlgorithmKind kind_from_name(std::string_view name);

int dim_count(AlgorithmKind kind);
int tensor_count(AlgorithmKind kind);
std::span<const char* const> dim_names(AlgorithmKind kind);
std::span<const char* const> tensor_names(AlgorithmKind kind);

// Index of the output tensor in the kind's tensor list (I,O,F or A,B,C,O).
int output_tensor(AlgorithmKind kind);

struct Problem {
  AlgorithmKind kind;
  std::vector<int64_t> dims;  // the problem id p_id, in dim_names order

  void validate() const;  // throws std::invalid_argument
  std::string to_string() const;
};

// Per-dim loop extents of the iteration space. For the convolution sliding
// dims the extent is the output extent: Conv1D W -> W-R+1; ConvLayer
// W -> W-R+1 and H -> H-S+1. All other dims map to themselves.
std::vector<int64_t> iter_extents(const Problem& p);

// Tensors are described as a product of axes over iteration-space dims.
// A plain axis spans tile[dim] words; a sliding axis (out_dim, win_dim)
// spans tile[out_dim] + tile[win_dim] - 1 words (input halo).
struct TensorAxis {
  int dim_a;
  int dim_b;  // -1 for a plain axis
};

std::span<const TensorAxis> tensor_axes(AlgorithmKind kind, int tensor);
bool tensor_uses_dim(AlgorithmKind kind, int tensor, int dim);

// Word count of tensor `tensor` for the given per-dim extents.
int64_t tensor_tile_footprint(AlgorithmKind kind, int tensor, std::span<const int64_t> extents);

// MAC count of the kernel; equals the product of the iteration extents.
int64_t required_flops(const Problem& p);

// Full (untiled) word count of tensor `tensor`.
int64_t tensor_footprint(const Problem& p, int tensor);

struct ExecStats {
  uint64_t macs = 0;
  // Per tensor, one flag per word, set when the word is touched.
  std::vector<std::vector<char>> touched;
};

// Naive untiled reference executor. `inputs` are the non-output tensors in
// role order (Conv: I, F; Mttkrp: A, B, C), row-major in dim_names order.
// Returns the output tensor. Values are kept exact by using integer-valued
// doubles in tests.
std::vector<double> golden_execute(const Problem& p,
                                   std::span<const std::vector<double>> inputs,
                                   ExecStats* stats = nullptr);

// Deterministic small-integer test tensors for a problem (values in [-4, 4]).
std::vector<std::vector<double>> make_test_inputs(const Problem& p, uint64_t seed);

}  // namespace mapsearch

#endif  // MAPSEARCH_WORKLOAD_HPP
