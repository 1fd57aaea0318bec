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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mapsearch/surrogate.hpp"

using namespace mapsearch;

namespace {

MlpModel tiny_model(std::vector<int> widths, Activation act, uint64_t seed) {
  MlpModel m = make_model(AlgorithmKind::kConv1d, std::move(widths), act, seed);
  m.norm.kind = m.kind;
  m.norm.pid_len = 2;
  m.norm.in_mean.assign(m.widths.front(), 0.0);
  m.norm.in_std.assign(m.widths.front(), 1.0);
  m.norm.out_mean.assign(m.widths.back(), 0.0);
  m.norm.out_std.assign(m.widths.back(), 1.0);
  return m;
}

std::vector<double> random_point(size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("forward closed forms") {
  // zero weights: output equals the output biases
  MlpModel m = tiny_model({4, 3, 2}, Activation::kRelu, 1);
  for (auto& l : m.w) std::fill(l.begin(), l.end(), 0.0);
  m.b[1] = {0.5, -1.5};
  auto y = m.forward(std::vector<double>{1, 2, 3, 4});
  CHECK(y == std::vector<double>{0.5, -1.5});

  // single linear layer: y = Wx + b by hand
  MlpModel lin = tiny_model({2, 2}, Activation::kRelu, 2);
  lin.w[0] = {1, 2, 3, 4};
  lin.b[0] = {0.25, -0.25};
  auto z = lin.forward(std::vector<double>{5, 7});
  CHECK(z[0] == doctest::Approx(1 * 5 + 2 * 7 + 0.25));
  CHECK(z[1] == doctest::Approx(3 * 5 + 4 * 7 - 0.25));

  CHECK_THROWS_AS(lin.forward(std::vector<double>{1.0}), std::invalid_argument);

  std::mt19937_64 rng(3);
  MlpModel big = tiny_model({8, 16, 5}, Activation::kSoftplus, 4);
  auto out = big.forward(random_point(8, rng));
  for (double v : out) CHECK(std::isfinite(v));
}

TEST_CASE("loss closed forms and finite-difference gradients") {
  std::vector<double> pred{0.5}, target{0.0}, grad;
  CHECK(loss_value(pred, target, LossSpec::huber(1.0), &grad) == doctest::Approx(0.125));
  pred[0] = 2.0;
  CHECK(loss_value(pred, target, LossSpec::huber(1.0), &grad) == doctest::Approx(1.5));
  CHECK(loss_value(target, target, LossSpec::mse(), &grad) == 0.0);
  CHECK(grad[0] == 0.0);
  CHECK(loss_value(target, target, LossSpec::mae(), &grad) == 0.0);

  std::mt19937_64 rng(5);
  for (auto spec : {LossSpec::huber(1.0), LossSpec::mse(), LossSpec::mae()}) {
    auto p = random_point(6, rng);
    auto t = random_point(6, rng);
    for (size_t i = 0; i < p.size(); ++i) {
      // keep residuals away from the huber knee and the mae kink
      if (std::abs(std::abs(p[i] - t[i]) - spec.delta) < 1e-3) p[i] += 0.01;
      if (std::abs(p[i] - t[i]) < 1e-3) p[i] += 0.01;
    }
    std::vector<double> g;
    loss_value(p, t, spec, &g);
    const double h = 1e-6;
    for (size_t i = 0; i < p.size(); ++i) {
      auto pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      double fd = (loss_value(pp, t, spec, nullptr) - loss_value(pm, t, spec, nullptr)) / (2 * h);
      CHECK(std::abs(g[i] - fd) < 1e-6);
    }
  }
}

TEST_CASE("input gradients match finite differences (softplus)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    MlpModel m = tiny_model({6, 9, 7, 4}, Activation::kSoftplus, 100 + trial);
    auto x = random_point(6, rng);
    auto w = random_point(4, rng);
    auto g = input_gradient(m, x, w);
    REQUIRE(g.size() == 6);
    CHECK(g[0] == 0.0);  // p_id mask
    CHECK(g[1] == 0.0);
    const double h = 1e-5;
    for (size_t i = 2; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      auto yp = m.forward(xp), ym = m.forward(xm);
      double fp = 0, fm = 0;
      for (size_t k = 0; k < w.size(); ++k) {
        fp += w[k] * yp[k];
        fm += w[k] * ym[k];
      }
      double fd = (fp - fm) / (2 * h);
      CHECK(std::abs(g[i] - fd) <= 1e-4 * std::max(std::abs(fd), 1e-2));
    }
  }
}

TEST_CASE("linear model gradient is the weight-row combination") {
  MlpModel lin = tiny_model({3, 2}, Activation::kRelu, 8);
  lin.norm.pid_len = 0;
  lin.w[0] = {1, 2, 3, 4, 5, 6};
  auto g = input_gradient(lin, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{2, -1});
  CHECK(g[0] == doctest::Approx(2 * 1 - 4));
  CHECK(g[1] == doctest::Approx(2 * 2 - 5));
  CHECK(g[2] == doctest::Approx(2 * 3 - 6));
}

TEST_CASE("gradient scalarization is linear in the weights") {
  std::mt19937_64 rng(9);
  MlpModel m = tiny_model({5, 8, 3}, Activation::kSoftplus, 11);
  auto x = random_point(5, rng);
  auto w1 = random_point(3, rng);
  auto w2 = random_point(3, rng);
  std::vector<double> w12(3);
  for (int i = 0; i < 3; ++i) w12[i] = w1[i] + w2[i];
  auto g1 = input_gradient(m, x, w1);
  auto g2 = input_gradient(m, x, w2);
  auto g12 = input_gradient(m, x, w12);
  for (size_t i = 0; i < g12.size(); ++i) CHECK(std::abs(g12[i] - g1[i] - g2[i]) < 1e-12);
}

TEST_CASE("training memorizes a single record") {
  NormalizedData data;
  data.x_train = {{0.3, -0.7, 1.1}};
  data.y_train = {{0.5, -0.2}};
  MlpModel m = tiny_model({3, 16, 2}, Activation::kRelu, 13);
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch = 1;
  cfg.lr = 0.05;
  cfg.lr_decay = 1.0;
  cfg.lr_decay_every = 1000000;
  cfg.momentum = 0.9;
  cfg.loss = LossSpec::mse();
  LossCurve curve = train(m, data, cfg);
  CHECK(curve.train.back() < 1e-6);
}

TEST_CASE("training is deterministic per seed and aborts on divergence") {
  std::mt19937_64 rng(17);
  NormalizedData data;
  for (int i = 0; i < 64; ++i) {
    data.x_train.push_back(random_point(4, rng));
    data.y_train.push_back({data.x_train.back()[0] + 0.5 * data.x_train.back()[2]});
  }
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 8;
  cfg.lr = 0.01;
  cfg.seed = 77;
  for (auto loss : {LossSpec::huber(1.0), LossSpec::mse(), LossSpec::mae()}) {
    cfg.loss = loss;
    MlpModel m1 = tiny_model({4, 8, 1}, Activation::kRelu, 19);
    MlpModel m2 = tiny_model({4, 8, 1}, Activation::kRelu, 19);
    train(m1, data, cfg);
    train(m2, data, cfg);
    CHECK(m1.w == m2.w);
    CHECK(m1.b == m2.b);
  }
  MlpModel diverge = tiny_model({4, 8, 1}, Activation::kRelu, 19);
  TrainConfig hot = cfg;
  hot.lr = 1e6;
  hot.loss = LossSpec::mse();
  hot.epochs = 50;
  CHECK_THROWS_WITH_AS(train(diverge, data, hot), doctest::Contains("learning rate"),
                       std::runtime_error);
}

TEST_CASE("model save/load round trips bit-exactly") {
  std::mt19937_64 rng(21);
  MlpModel m = tiny_model({5, 7, 12}, Activation::kSoftplus, 23);
  m.accel_fp = 12345;
  m.dataset_fp = 678;
  auto tmp = std::filesystem::temp_directory_path() / "surrogate_test_model.txt";
  save_model(m, tmp.string());
  MlpModel r = load_model(tmp.string());
  CHECK(r.w == m.w);
  CHECK(r.b == m.b);
  CHECK(r.widths == m.widths);
  CHECK(r.accel_fp == m.accel_fp);
  CHECK(r.norm.in_mean == m.norm.in_mean);
  auto x = random_point(5, rng);
  CHECK(m.forward(x) == r.forward(x));  // bit-exact

  // corrupt header refuses to load
  {
    std::ofstream bad(tmp);
    bad << "# not a model\n";
  }
  CHECK_THROWS(load_model(tmp.string()));

  // truncated file refuses to load
  save_model(m, tmp.string());
  {
    std::ifstream in(tmp);
    std::string body((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(tmp);
    out << body.substr(0, body.size() / 2);
  }
  CHECK_THROWS(load_model(tmp.string()));
  std::filesystem::remove(tmp);
}
