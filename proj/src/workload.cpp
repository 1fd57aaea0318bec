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

#include "mapsearch/workload.hpp"

#include <array>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mapsearch {

namespace {

constexpr const char* kConv1dDims[] = {"W", "R"};
constexpr const char* kConvLayerDims[] = {"N", "K", "C", "H", "W", "R", "S"};
constexpr const char* kMttkrpDims[] = {"I", "J", "K", "L"};

constexpr const char* kConvTensors[] = {"I", "O", "F"};
constexpr const char* kMttkrpTensors[] = {"A", "B", "C", "O"};

// Axis tables; {d, -1} is a plain axis, {out, win} a sliding-window pair.
constexpr TensorAxis kConv1dI[] = {{0, 1}};
constexpr TensorAxis kConv1dO[] = {{0, -1}};
constexpr TensorAxis kConv1dF[] = {{1, -1}};

constexpr TensorAxis kConvLayerI[] = {{0, -1}, {2, -1}, {3, 6}, {4, 5}};
constexpr TensorAxis kConvLayerO[] = {{0, -1}, {1, -1}, {3, -1}, {4, -1}};
constexpr TensorAxis kConvLayerF[] = {{1, -1}, {2, -1}, {5, -1}, {6, -1}};

constexpr TensorAxis kMttkrpA[] = {{0, -1}, {2, -1}, {3, -1}};
constexpr TensorAxis kMttkrpB[] = {{2, -1}, {1, -1}};
constexpr TensorAxis kMttkrpC[] = {{3, -1}, {1, -1}};
constexpr TensorAxis kMttkrpO[] = {{0, -1}, {1, -1}};

std::span<const TensorAxis> axes_table(AlgorithmKind kind, int tensor) {
  switch (kind) {
    case AlgorithmKind::kConv1d:
      switch (tensor) {
        case 0: return kConv1dI;
        case 1: return kConv1dO;
        case 2: return kConv1dF;
      }
      break;
    case AlgorithmKind::kConvLayer:
      switch (tensor) {
        case 0: return kConvLayerI;
        case 1: return kConvLayerO;
        case 2: return kConvLayerF;
      }
      break;
    case AlgorithmKind::kMttkrp:
      switch (tensor) {
        case 0: return kMttkrpA;
        case 1: return kMttkrpB;
        case 2: return kMttkrpC;
        case 3: return kMttkrpO;
      }
      break;
  }
  throw std::invalid_argument("unknown tensor role for kind");
}

}  // namespace

const char* kind_name(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kConv1d: return "conv1d";
    case AlgorithmKind::kConvLayer: return "convlayer";
    case AlgorithmKind::kMttkrp: return "mttkrp";
  }
  return "?";
}

AlgorithmKind kind_from_name(std::string_view name) {
  if (name == "conv1d") return AlgorithmKind::kConv1d;
  if (name == "convlayer") return AlgorithmKind::kConvLayer;
  if (name == "mttkrp") return AlgorithmKind::kMttkrp;
  throw std::invalid_argument("unknown algorithm kind: " + std::string(name));
}

int dim_count(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kConv1d: return 2;
    case AlgorithmKind::kConvLayer: return 7;
    case AlgorithmKind::kMttkrp: return 4;
  }
  return 0;
}

int tensor_count(AlgorithmKind kind) {
  return kind == AlgorithmKind::kMttkrp ? 4 : 3;
}

std::span<const char* const> dim_names(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kConv1d: return kConv1dDims;
    case AlgorithmKind::kConvLayer: return kConvLayerDims;
    case AlgorithmKind::kMttkrp: return kMttkrpDims;
  }
  return {};
}

std::span<const char* const> tensor_names(AlgorithmKind kind) {
  return kind == AlgorithmKind::kMttkrp ? std::span<const char* const>(kMttkrpTensors)
                                        : std::span<const char* const>(kConvTensors);
}

int output_tensor(AlgorithmKind kind) {
  return kind == AlgorithmKind::kMttkrp ? 3 : 1;
}

void Problem::validate() const {
  if (static_cast<int>(dims.size()) != dim_count(kind))
    throw std::invalid_argument("problem dims tuple length does not match kind");
  for (int64_t d : dims)
    if (d < 1) throw std::invalid_argument("problem dims must be >= 1");
  if (kind == AlgorithmKind::kConv1d) {
    if (dims[1] > dims[0]) throw std::invalid_argument("conv1d requires R <= W");
  } else if (kind == AlgorithmKind::kConvLayer) {
    if (dims[5] > dims[4]) throw std::invalid_argument("convlayer requires R <= W");
    if (dims[6] > dims[3]) throw std::invalid_argument("convlayer requires S <= H");
  }
}

std::string Problem::to_string() const {
  std::ostringstream os;
  os << kind_name(kind) << "(";
  auto names = dim_names(kind);
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ",";
    os << names[i] << "=" << dims[i];
  }
  os << ")";
  return os.str();
}

std::vector<int64_t> iter_extents(const Problem& p) {
  std::vector<int64_t> e = p.dims;
  if (p.kind == AlgorithmKind::kConv1d) {
    e[0] = p.dims[0] - p.dims[1] + 1;  // X = W - R + 1
  } else if (p.kind == AlgorithmKind::kConvLayer) {
    e[3] = p.dims[3] - p.dims[6] + 1;  // Y = H - S + 1
    e[4] = p.dims[4] - p.dims[5] + 1;  // X = W - R + 1
  }
  return e;
}

std::span<const TensorAxis> tensor_axes(AlgorithmKind kind, int tensor) {
  return axes_table(kind, tensor);
}

bool tensor_uses_dim(AlgorithmKind kind, int tensor, int dim) {
  for (const auto& ax : axes_table(kind, tensor))
    if (ax.dim_a == dim || ax.dim_b == dim) return true;
  return false;
}

int64_t tensor_tile_footprint(AlgorithmKind kind, int tensor, std::span<const int64_t> extents) {
  int64_t fp = 1;
  for (const auto& ax : axes_table(kind, tensor)) {
    int64_t span = ax.dim_b < 0 ? extents[ax.dim_a] : extents[ax.dim_a] + extents[ax.dim_b] - 1;
    fp *= span;
  }
  return fp;
}

int64_t required_flops(const Problem& p) {
  int64_t n = 1;
  for (int64_t e : iter_extents(p)) n *= e;
  return n;
}

int64_t tensor_footprint(const Problem& p, int tensor) {
  auto e = iter_extents(p);
  return tensor_tile_footprint(p.kind, tensor, e);
}

namespace {

void check_input_shapes(const Problem& p, std::span<const std::vector<double>> inputs) {
  int t = tensor_count(p.kind);
  int out = output_tensor(p.kind);
  size_t want = static_cast<size_t>(t - 1);
  if (inputs.size() != want) throw std::invalid_argument("wrong number of input tensors");
  size_t pos = 0;
  for (int i = 0; i < t; ++i) {
    if (i == out) continue;
    if (static_cast<int64_t>(inputs[pos].size()) != tensor_footprint(p, i))
      throw std::invalid_argument("input tensor shape mismatch");
    ++pos;
  }
}

void touch(ExecStats* stats, int tensor, int64_t index) {
  if (stats) stats->touched[tensor][index] = 1;
}

}  // namespace

std::vector<double> golden_execute(const Problem& p,
                                   std::span<const std::vector<double>> inputs,
                                   ExecStats* stats) {
  p.validate();
  check_input_shapes(p, inputs);
  int out = output_tensor(p.kind);
  std::vector<double> o(tensor_footprint(p, out), 0.0);
  if (stats) {
    stats->macs = 0;
    stats->touched.assign(tensor_count(p.kind), {});
    for (int t = 0; t < tensor_count(p.kind); ++t)
      stats->touched[t].assign(tensor_footprint(p, t), 0);
  }

  if (p.kind == AlgorithmKind::kConv1d) {
    const auto& in = inputs[0];
    const auto& f = inputs[1];
    int64_t w = p.dims[0], r = p.dims[1], x_ext = w - r + 1;
    for (int64_t x = 0; x < x_ext; ++x)
      for (int64_t rr = 0; rr < r; ++rr) {
        o[x] += in[x + rr] * f[rr];
        if (stats) {
          ++stats->macs;
          touch(stats, 0, x + rr);
          touch(stats, 1, x);
          touch(stats, 2, rr);
        }
      }
  } else if (p.kind == AlgorithmKind::kConvLayer) {
    const auto& in = inputs[0];
    const auto& f = inputs[1];
    int64_t n = p.dims[0], k = p.dims[1], c = p.dims[2], h = p.dims[3], w = p.dims[4],
            r = p.dims[5], s = p.dims[6];
    int64_t x_ext = w - r + 1, y_ext = h - s + 1;
    for (int64_t ni = 0; ni < n; ++ni)
      for (int64_t ki = 0; ki < k; ++ki)
        for (int64_t ci = 0; ci < c; ++ci)
          for (int64_t x = 0; x < x_ext; ++x)
            for (int64_t y = 0; y < y_ext; ++y)
              for (int64_t ri = 0; ri < r; ++ri)
                for (int64_t si = 0; si < s; ++si) {
                  int64_t ii = ((ni * c + ci) * h + (y + si)) * w + (x + ri);
                  int64_t fi = ((ki * c + ci) * r + ri) * s + si;
                  int64_t oi = ((ni * k + ki) * x_ext + x) * y_ext + y;
                  o[oi] += f[fi] * in[ii];
                  if (stats) {
                    ++stats->macs;
                    touch(stats, 0, ii);
                    touch(stats, 1, oi);
                    touch(stats, 2, fi);
                  }
                }
  } else {
    const auto& a = inputs[0];
    const auto& b = inputs[1];
    const auto& c = inputs[2];
    int64_t di = p.dims[0], dj = p.dims[1], dk = p.dims[2], dl = p.dims[3];
    for (int64_t i = 0; i < di; ++i)
      for (int64_t j = 0; j < dj; ++j)
        for (int64_t k = 0; k < dk; ++k)
          for (int64_t l = 0; l < dl; ++l) {
            int64_t ai = (i * dk + k) * dl + l;
            int64_t bi = k * dj + j;
            int64_t ci = l * dj + j;
            int64_t oi = i * dj + j;
            o[oi] += a[ai] * b[bi] * c[ci];
            if (stats) {
              ++stats->macs;
              touch(stats, 0, ai);
              touch(stats, 1, bi);
              touch(stats, 2, ci);
              touch(stats, 3, oi);
            }
          }
  }
  return o;
}

std::vector<std::vector<double>> make_test_inputs(const Problem& p, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> val(-4, 4);
  std::vector<std::vector<double>> inputs;
  int out = output_tensor(p.kind);
  for (int t = 0; t < tensor_count(p.kind); ++t) {
    if (t == out) continue;
    std::vector<double> v(tensor_footprint(p, t));
    for (auto& x : v) x = static_cast<double>(val(rng));
    inputs.push_back(std::move(v));
  }
  return inputs;
}

}  // namespace mapsearch
