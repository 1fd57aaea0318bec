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

#include "mapsearch/surrogate.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mapsearch/common.hpp"
#include "mapsearch/kernels.hpp"

namespace mapsearch {

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "softplus";
}

Activation activation_from_name(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "softplus") return Activation::kSoftplus;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

namespace {

double act_fwd(Activation a, double x) {
  if (a == Activation::kRelu) return x > 0 ? x : 0.0;
  return x > 30 ? x : std::log1p(std::exp(x));  // softplus, overflow-safe
}

double act_grad(Activation a, double x) {
  if (a == Activation::kRelu) return x > 0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != widths.front())
    throw std::invalid_argument("forward: input width mismatch");
  std::vector<double> a(x.begin(), x.end()), z;
  for (int l = 0; l < layers(); ++l) {
    size_t rows = widths[l + 1], cols = widths[l];
    z.resize(rows);
    kern::matvec(w[l].data(), rows, cols, a.data(), b[l].data(), z.data());
    if (l + 1 < layers())
      for (auto& v : z) v = act_fwd(act, v);
    a = z;
  }
  return a;
}

MlpModel make_model(AlgorithmKind kind, std::vector<int> widths, Activation act, uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("make_model: need at least two widths");
  for (int wd : widths)
    if (wd < 1) throw std::invalid_argument("make_model: widths must be positive");
  MlpModel m;
  m.kind = kind;
  m.widths = std::move(widths);
  m.act = act;
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < m.widths.size(); ++l) {
    size_t rows = m.widths[l + 1], cols = m.widths[l];
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> wl(rows * cols);
    for (auto& v : wl) v = u(rng);
    m.w.push_back(std::move(wl));
    m.b.emplace_back(rows, 0.0);
  }
  return m;
}

std::vector<int> desk_hidden_widths() { return {32, 64, 64, 32}; }

std::vector<int> large_hidden_widths() {
  return {64, 256, 1024, 2048, 2048, 1024, 256, 64};
}

LossSpec loss_from_name(std::string_view name, double delta) {
  if (name == "huber") return LossSpec::huber(delta);
  if (name == "mse") return LossSpec::mse();
  if (name == "mae") return LossSpec::mae();
  throw std::invalid_argument("unknown loss: " + std::string(name));
}

const char* loss_name(const LossSpec& spec) {
  switch (spec.kind) {
    case LossSpec::kHuber: return "huber";
    case LossSpec::kMse: return "mse";
    case LossSpec::kMae: return "mae";
  }
  return "?";
}

double loss_value(std::span<const double> pred, std::span<const double> target,
                  const LossSpec& spec, std::vector<double>* grad) {
  if (pred.size() != target.size()) throw std::invalid_argument("loss: width mismatch");
  if (grad) grad->assign(pred.size(), 0.0);
  double inv_n = 1.0 / static_cast<double>(pred.size());
  double total = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double r = pred[i] - target[i];
    double v, dv;
    switch (spec.kind) {
      case LossSpec::kMse:
        v = r * r;
        dv = 2 * r;
        break;
      case LossSpec::kMae:
        v = std::abs(r);
        dv = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
        break;
      case LossSpec::kHuber:
      default: {
        double d = spec.delta;
        if (std::abs(r) <= d) {
          v = 0.5 * r * r;
          dv = r;
        } else {
          v = d * (std::abs(r) - 0.5 * d);
          dv = r > 0 ? d : -d;
        }
        break;
      }
    }
    total += v;
    if (grad) (*grad)[i] = dv * inv_n;
  }
  return total * inv_n;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch < 1) throw std::invalid_argument("train: epochs/batch must be >= 1");
  if (lr_decay_every < 1) throw std::invalid_argument("train: lr_decay_every must be >= 1");
  if (lr <= 0) throw std::invalid_argument("train: lr must be > 0");
  if (momentum < 0 || momentum >= 1) throw std::invalid_argument("train: momentum in [0,1)");
  if (loss.kind == LossSpec::kHuber && loss.delta <= 0)
    throw std::invalid_argument("train: huber delta must be > 0");
}

namespace {

// Forward keeping layer inputs and pre-activations for backprop.
struct Tape {
  std::vector<std::vector<double>> a;  // a[0] = x, a[l+1] = layer l output
  std::vector<std::vector<double>> z;  // pre-activations
};

void forward_tape(const MlpModel& m, std::span<const double> x, Tape& tape) {
  int layers = m.layers();
  tape.a.resize(layers + 1);
  tape.z.resize(layers);
  tape.a[0].assign(x.begin(), x.end());
  for (int l = 0; l < layers; ++l) {
    size_t rows = m.widths[l + 1], cols = m.widths[l];
    tape.z[l].resize(rows);
    kern::matvec(m.w[l].data(), rows, cols, tape.a[l].data(), m.b[l].data(),
                 tape.z[l].data());
    tape.a[l + 1] = tape.z[l];
    if (l + 1 < layers)
      for (auto& v : tape.a[l + 1]) v = act_fwd(m.act, v);
  }
}

// Backpropagate an output-space gradient; optionally accumulate parameter
// gradients, and optionally produce the input gradient.
void backward(const MlpModel& m, const Tape& tape, std::vector<double> delta,
              std::vector<std::vector<double>>* gw, std::vector<std::vector<double>>* gb,
              std::vector<double>* gx) {
  int layers = m.layers();
  for (int l = layers - 1; l >= 0; --l) {
    size_t rows = m.widths[l + 1], cols = m.widths[l];
    if (gw) {
      // (*gw)[l] += delta (outer) a[l]
      for (size_t r = 0; r < rows; ++r)
        kern::axpy(delta[r], tape.a[l].data(), (*gw)[l].data() + r * cols, cols);
      for (size_t r = 0; r < rows; ++r) (*gb)[l][r] += delta[r];
    }
    if (l == 0 && !gx) break;
    std::vector<double> prev(cols, 0.0);
    kern::matvec_t_acc(m.w[l].data(), rows, cols, delta.data(), prev.data());
    if (l > 0)
      for (size_t i = 0; i < cols; ++i) prev[i] *= act_grad(m.act, tape.z[l - 1][i]);
    delta = std::move(prev);
  }
  if (gx) *gx = std::move(delta);
}

double dataset_loss(const MlpModel& m, const std::vector<std::vector<double>>& xs,
                    const std::vector<std::vector<double>>& ys, const LossSpec& spec) {
  double total = 0;
  for (size_t i = 0; i < xs.size(); ++i)
    total += loss_value(m.forward(xs[i]), ys[i], spec, nullptr);
  return total / static_cast<double>(xs.size());
}

}  // namespace

LossCurve train(MlpModel& model, const NormalizedData& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.x_train.empty()) throw std::invalid_argument("train: empty training split");
  if (static_cast<int>(data.x_train[0].size()) != model.widths.front() ||
      static_cast<int>(data.y_train[0].size()) != model.widths.back())
    throw std::invalid_argument("train: model widths do not match the dataset");

  std::mt19937_64 rng(cfg.seed);
  size_t n = data.x_train.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  int layers = model.layers();
  std::vector<std::vector<double>> gw(layers), gb(layers), vw(layers), vb(layers);
  for (int l = 0; l < layers; ++l) {
    gw[l].assign(model.w[l].size(), 0.0);
    gb[l].assign(model.b[l].size(), 0.0);
    vw[l].assign(model.w[l].size(), 0.0);
    vb[l].assign(model.b[l].size(), 0.0);
  }

  LossCurve curve;
  Tape tape;
  std::vector<double> dloss;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_every);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t start = 0; start < n; start += cfg.batch) {
      size_t count = std::min<size_t>(cfg.batch, n - start);
      for (int l = 0; l < layers; ++l) {
        std::fill(gw[l].begin(), gw[l].end(), 0.0);
        std::fill(gb[l].begin(), gb[l].end(), 0.0);
      }
      double batch_loss = 0;
      for (size_t j = 0; j < count; ++j) {
        size_t i = idx[start + j];
        forward_tape(model, data.x_train[i], tape);
        batch_loss += loss_value(tape.a[layers], data.y_train[i], cfg.loss, &dloss);
        backward(model, tape, dloss, &gw, &gb, nullptr);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: loss diverged (non-finite); lower the learning rate");
      double inv = 1.0 / static_cast<double>(count);
      for (int l = 0; l < layers; ++l) {
        for (size_t i = 0; i < gw[l].size(); ++i) {
          vw[l][i] = cfg.momentum * vw[l][i] + gw[l][i] * inv;
          model.w[l][i] -= lr * vw[l][i];
        }
        for (size_t i = 0; i < gb[l].size(); ++i) {
          vb[l][i] = cfg.momentum * vb[l][i] + gb[l][i] * inv;
          model.b[l][i] -= lr * vb[l][i];
        }
      }
    }
    curve.train.push_back(dataset_loss(model, data.x_train, data.y_train, cfg.loss));
    curve.test.push_back(data.x_test.empty()
                             ? curve.train.back()
                             : dataset_loss(model, data.x_test, data.y_test, cfg.loss));
    if (!std::isfinite(curve.train.back()))
      throw std::runtime_error("train: loss diverged (non-finite); lower the learning rate");
  }
  return curve;
}

std::vector<double> input_gradient(const MlpModel& model, std::span<const double> x,
                                   std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != model.widths.back())
    throw std::invalid_argument("input_gradient: objective width mismatch");
  Tape tape;
  forward_tape(model, x, tape);
  std::vector<double> gx;
  backward(model, tape, std::vector<double>(weights.begin(), weights.end()), nullptr,
           nullptr, &gx);
  for (size_t i = 0; i < model.norm.pid_len && i < gx.size(); ++i) gx[i] = 0.0;
  return gx;
}

namespace {

// Standardized-output indices of energy_total and cycles.
std::pair<int, int> edp_indices(AlgorithmKind kind) {
  int t = tensor_count(kind);
  return {kNumLevels * t, kNumLevels * t + 1};
}

}  // namespace

// The reconstructed quantities are bound-normalized energy and cycles, both
// >= 1 for any real mapping; predictions below that floor are extrapolation
// error and would otherwise dominate the argmin, so they clamp to the bound
// (with a zero gradient contribution while clamped).
double predict_norm_edp(const MlpModel& model, std::span<const double> x) {
  auto [ie, ic] = edp_indices(model.kind);
  auto y = model.forward(x);
  double e = y[ie] * model.norm.out_std[ie] + model.norm.out_mean[ie];
  double c = y[ic] * model.norm.out_std[ic] + model.norm.out_mean[ic];
  return std::max(e, 1.0) * std::max(c, 1.0);
}

double predict_norm_edp_grad(const MlpModel& model, std::span<const double> x,
                             std::vector<double>& grad) {
  auto [ie, ic] = edp_indices(model.kind);
  Tape tape;
  forward_tape(model, x, tape);
  const auto& y = tape.a[model.layers()];
  double e = y[ie] * model.norm.out_std[ie] + model.norm.out_mean[ie];
  double c = y[ic] * model.norm.out_std[ic] + model.norm.out_mean[ic];
  double ef = std::max(e, 1.0), cf = std::max(c, 1.0);
  std::vector<double> w(model.widths.back(), 0.0);
  w[ie] = e > 1.0 ? model.norm.out_std[ie] * cf : 0.0;
  w[ic] = c > 1.0 ? model.norm.out_std[ic] * ef : 0.0;
  backward(model, tape, std::move(w), nullptr, nullptr, &grad);
  for (size_t i = 0; i < model.norm.pid_len && i < grad.size(); ++i) grad[i] = 0.0;
  return ef * cf;
}

namespace {

void write_hexdoubles(std::FILE* f, const char* key, std::span<const double> v) {
  std::fprintf(f, "%s=", key);
  for (size_t i = 0; i < v.size(); ++i) std::fprintf(f, "%s%a", i ? "," : "", v[i]);
  std::fprintf(f, "\n");
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  const char* p = s.c_str();
  char* end = nullptr;
  while (*p) {
    if (*p == ',') ++p;
    double x = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("model file: malformed number list");
    v.push_back(x);
    p = end;
  }
  return v;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> v;
  for (double x : parse_doubles(s)) v.push_back(static_cast<int>(x));
  return v;
}

}  // namespace

void save_model(const MlpModel& model, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_model: cannot open " + path);
  std::fprintf(f, "# surrogate v1\n");
  std::fprintf(f, "kind=%s\n", kind_name(model.kind));
  std::fprintf(f, "activation=%s\n", activation_name(model.act));
  std::fprintf(f, "widths=");
  for (size_t i = 0; i < model.widths.size(); ++i)
    std::fprintf(f, "%s%d", i ? "," : "", model.widths[i]);
  std::fprintf(f, "\n");
  std::fprintf(f, "accel_fp=%" PRIu64 "\n", model.accel_fp);
  std::fprintf(f, "dataset_fp=%" PRIu64 "\n", model.dataset_fp);
  std::fprintf(f, "norm.pid_len=%zu\n", model.norm.pid_len);
  std::fprintf(f, "norm.dataset_fp=%" PRIu64 "\n", model.norm.dataset_fp);
  std::fprintf(f, "norm.train_fp=%" PRIu64 "\n", model.norm.train_fp);
  const auto& a = model.norm.accel;
  std::fprintf(f, "norm.accel=%" PRId64 ",%" PRId64 ",%a,%" PRId64 ",%" PRId64 ",%" PRId64
                  ",%" PRId64 ",%a,%a,%a,%a\n",
               a.num_pes, a.flops_per_pe, a.clock_hz, a.capacity_words[0], a.num_banks[0],
               a.capacity_words[1], a.num_banks[1], a.energy_per_word[0], a.energy_per_word[1],
               a.energy_per_word[2], a.mac_energy);
  write_hexdoubles(f, "norm.in_mean", model.norm.in_mean);
  write_hexdoubles(f, "norm.in_std", model.norm.in_std);
  write_hexdoubles(f, "norm.out_mean", model.norm.out_mean);
  write_hexdoubles(f, "norm.out_std", model.norm.out_std);
  for (int l = 0; l < model.layers(); ++l) {
    char key[32];
    std::snprintf(key, sizeof key, "layer.%d.w", l);
    write_hexdoubles(f, key, model.w[l]);
    std::snprintf(key, sizeof key, "layer.%d.b", l);
    write_hexdoubles(f, key, model.b[l]);
  }
  std::fprintf(f, "# end\n");
  std::fclose(f);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# surrogate v1")
    throw std::runtime_error("load_model: bad or corrupt header");
  MlpModel m;
  bool saw_end = false;
  std::vector<std::vector<double>> lw, lb;
  while (std::getline(in, line)) {
    if (line == "# end") {
      saw_end = true;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("load_model: malformed line");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "kind") m.kind = kind_from_name(val);
    else if (key == "activation") m.act = activation_from_name(val);
    else if (key == "widths") m.widths = parse_ints(val);
    else if (key == "accel_fp") m.accel_fp = std::stoull(val);
    else if (key == "dataset_fp") m.dataset_fp = std::stoull(val);
    else if (key == "norm.pid_len") m.norm.pid_len = std::stoull(val);
    else if (key == "norm.dataset_fp") m.norm.dataset_fp = std::stoull(val);
    else if (key == "norm.train_fp") m.norm.train_fp = std::stoull(val);
    else if (key == "norm.accel") {
      auto v = parse_doubles(val);
      if (v.size() != 11) throw std::runtime_error("load_model: bad accel block");
      auto& a = m.norm.accel;
      a.num_pes = static_cast<int64_t>(v[0]);
      a.flops_per_pe = static_cast<int64_t>(v[1]);
      a.clock_hz = v[2];
      a.capacity_words[0] = static_cast<int64_t>(v[3]);
      a.num_banks[0] = static_cast<int64_t>(v[4]);
      a.capacity_words[1] = static_cast<int64_t>(v[5]);
      a.num_banks[1] = static_cast<int64_t>(v[6]);
      a.energy_per_word[0] = v[7];
      a.energy_per_word[1] = v[8];
      a.energy_per_word[2] = v[9];
      a.mac_energy = v[10];
    } else if (key == "norm.in_mean") m.norm.in_mean = parse_doubles(val);
    else if (key == "norm.in_std") m.norm.in_std = parse_doubles(val);
    else if (key == "norm.out_mean") m.norm.out_mean = parse_doubles(val);
    else if (key == "norm.out_std") m.norm.out_std = parse_doubles(val);
    else if (key.rfind("layer.", 0) == 0) {
      size_t dot = key.rfind('.');
      int l = std::stoi(key.substr(6, dot - 6));
      bool is_w = key.substr(dot + 1) == "w";
      auto& dst = is_w ? lw : lb;
      if (static_cast<int>(dst.size()) != l)
        throw std::runtime_error("load_model: layers out of order");
      dst.push_back(parse_doubles(val));
    } else {
      throw std::runtime_error("load_model: unknown key " + key);
    }
  }
  if (!saw_end) throw std::runtime_error("load_model: truncated file");
  if (m.widths.size() < 2 || lw.size() != m.widths.size() - 1 || lb.size() != lw.size())
    throw std::runtime_error("load_model: inconsistent layer data");
  for (size_t l = 0; l + 1 < m.widths.size(); ++l) {
    size_t rows = m.widths[l + 1], cols = m.widths[l];
    if (lw[l].size() != rows * cols || lb[l].size() != rows)
      throw std::runtime_error("load_model: layer shape mismatch");
  }
  m.norm.kind = m.kind;
  m.w = std::move(lw);
  m.b = std::move(lb);
  return m;
}

}  // namespace mapsearch
