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

#ifndef MAPSEARCH_SURROGATE_HPP
#define MAPSEARCH_SURROGATE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapsearch/dataset.hpp"

namespace mapsearch {

enum class Activation { kRelu, kSoftplus };
const char* activation_name(Activation a);
Activation activation_from_name(std::string_view name);

// Fully-connected surrogate of the cost model: affine + activation on the
// hidden layers, linear output, operating entirely in normalized space.
struct MlpModel {
  AlgorithmKind kind;
  std::vector<int> widths;  // input, hidden..., output
  Activation act = Activation::kRelu;
  std::vector<std::vector<double>> w;  // per layer, row-major out x in
  std::vector<std::vector<double>> b;
  NormStats norm;
  uint64_t accel_fp = 0;
  uint64_t dataset_fp = 0;

  int layers() const { return static_cast<int>(w.size()); }
  std::vector<double> forward(std::span<const double> x) const;
};

// Uniform +-sqrt(6/(fan_in+fan_out)) initialization, seeded.
MlpModel make_model(AlgorithmKind kind, std::vector<int> widths, Activation act, uint64_t seed);

// Desk-scale hidden widths; the large preset is [64,256,1024,2048,2048,
// 1024,256,64].
std::vector<int> desk_hidden_widths();
std::vector<int> large_hidden_widths();

struct LossSpec {
  enum Kind { kHuber, kMse, kMae };
  Kind kind = kHuber;
  double delta = 1.0;

  static LossSpec huber(double d = 1.0) { return {kHuber, d}; }
  static LossSpec mse() { return {kMse, 0}; }
  static LossSpec mae() { return {kMae, 0}; }
};
LossSpec loss_from_name(std::string_view name, double delta);
const char* loss_name(const LossSpec& spec);

// Mean-per-element loss and its gradient with respect to pred.
double loss_value(std::span<const double> pred, std::span<const double> target,
                  const LossSpec& spec, std::vector<double>* grad = nullptr);

struct TrainConfig {
  int epochs = 100;
  int batch = 128;
  double lr = 1e-2;
  double lr_decay = 0.1;
  int lr_decay_every = 25;
  double momentum = 0.9;
  LossSpec loss;
  uint64_t seed = 1;

  void validate() const;
};

struct LossCurve {
  std::vector<double> train;  // per epoch, full training split
  std::vector<double> test;
};

// Mini-batch SGD with momentum; epoch order shuffled from the seed;
// deterministic. Throws on a non-finite loss (learning rate too high).
LossCurve train(MlpModel& model, const NormalizedData& data, const TrainConfig& cfg);

// Exact reverse-mode gradient of weights . forward(x) with respect to x.
// The p_id coordinates of the result are masked to zero: the search never
// moves the problem, only the mapping.
std::vector<double> input_gradient(const MlpModel& model, std::span<const double> x,
                                   std::span<const double> weights);

// Scalar objective for the gradient search: the bound-normalized EDP
// reconstructed from the standardized energy_total and cycles outputs,
// E * C; the gradient follows by the product rule on those coordinates.
double predict_norm_edp(const MlpModel& model, std::span<const double> x);
double predict_norm_edp_grad(const MlpModel& model, std::span<const double> x,
                             std::vector<double>& grad);

// Versioned text container with hexfloat parameters (bit-exact round trip).
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace mapsearch

#endif  // MAPSEARCH_SURROGATE_HPP
