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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mapsearch/harness.hpp"
#include "testutil.hpp"

using namespace mapsearch;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("mapsearch_test_" + tag);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  Config cfg = Config::from_string("a.b = 3\n# comment\nsearch.seed=9\n");
  CHECK(cfg.get_int("a.b", 0) == 3);
  CHECK(cfg.get_int("search.seed", 0) == 9);
  CHECK(cfg.get_str("missing", "d") == "d");
  CHECK_THROWS_AS(cfg.get_str("missing"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("a=1\na=2\n"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("nonsense line\n"), ConfigError);
  CHECK_THROWS_AS(cfg.restrict_keys({"search.seed"}), ConfigError);
  cfg.restrict_keys({"search.seed", "a.*"});

  Config bools = Config::from_string("x = true\ny = 0\n");
  CHECK(bools.get_bool("x", false));
  CHECK_FALSE(bools.get_bool("y", true));

  CHECK(Config::from_string("b=2\na=1\n").hash() == Config::from_string("a=1\nb=2\n").hash());
}

TEST_CASE("accel and problem construction from config") {
  Config cfg = Config::from_string(
      "accel.preset = large\naccel.num_pes = 64\nproblem.preset = resnet_conv3\n");
  AcceleratorConfig a = accel_from_config(cfg);
  CHECK(a.num_pes == 64);                // override wins
  CHECK(a.capacity_words[0] == 131072);  // preset retained
  auto ps = problems_from_config(cfg);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].kind == AlgorithmKind::kConvLayer);
  CHECK(ps[0].dims == std::vector<int64_t>{16, 128, 128, 28, 28, 3, 3});

  CHECK_THROWS_AS(accel_from_config(Config::from_string("accel.preset = nope\n")), ConfigError);
  CHECK_THROWS_AS(problems_from_config(Config::from_string("problem.preset = nope\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      budget_from_config(Config::from_string(
          "search.budget_iterations = 5\nsearch.budget_seconds = 1\n")),
      ConfigError);
}

TEST_CASE("aggregate: exact means on hand-built traces") {
  MapSpace space = testutil::tiny_conv1d_space();
  auto make_trace = [&](std::vector<double> edps) {
    SearchTrace t;
    t.method = Method::kRandom;
    t.seed = 1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < edps.size(); ++i) {
      best = std::min(best, edps[i]);
      t.steps.push_back({i + 1, (i + 1) * 100, static_cast<uint32_t>(i), kNoObj, edps[i], 0});
    }
    t.final_true_edp = best;
    return t;
  };

  std::map<Method, std::vector<SearchTrace>> runs;
  runs[Method::kRandom] = {make_trace({8, 4, 6, 2}), make_trace({16, 2, 10, 1})};
  ComparisonReport rep = aggregate(space, runs, 2.0);

  REQUIRE(rep.iter_checkpoints == std::vector<uint64_t>{1, 2, 4});
  const auto& m = rep.iter_mean[Method::kRandom];
  CHECK(m[0] == doctest::Approx((8 + 16) / 2.0 / 2.0));
  CHECK(m[1] == doctest::Approx((4 + 2) / 2.0 / 2.0));
  CHECK(m[2] == doctest::Approx((2 + 1) / 2.0 / 2.0));

  // single trace aggregates to itself
  std::map<Method, std::vector<SearchTrace>> one;
  one[Method::kRandom] = {make_trace({5, 3})};
  ComparisonReport r1 = aggregate(space, one, 1.0);
  CHECK(r1.iter_mean[Method::kRandom].back() == 3.0);

  // identical traces aggregate identically
  std::map<Method, std::vector<SearchTrace>> twin;
  twin[Method::kRandom] = {make_trace({5, 3}), make_trace({5, 3})};
  CHECK(aggregate(space, twin, 1.0).iter_mean[Method::kRandom] ==
        r1.iter_mean[Method::kRandom]);

  std::map<Method, std::vector<SearchTrace>> ragged;
  ragged[Method::kRandom] = {make_trace({1, 2}), make_trace({1, 2, 3})};
  CHECK_THROWS_AS(aggregate(space, ragged, 1.0), std::invalid_argument);
}

TEST_CASE("lower-bound subcommand prints the cycle floor") {
  Config cfg = Config::from_string(
      "accel.preset = tiny1pe\nproblem.kind = conv1d\nproblem.dims = 8,3\n");
  std::ostringstream out;
  cmd_lower_bound(cfg, out);
  CHECK(out.str().find("min_cycles=18") != std::string::npos);
}

TEST_CASE("pipeline: gen-dataset, train, search, compare, surface") {
  auto dir = temp_dir("pipeline");
  std::string base =
      "accel.num_pes = 4\n"
      "accel.l2.capacity_words = 4096\naccel.l2.banks = 3\n"
      "accel.l1.capacity_words = 1024\naccel.l1.banks = 3\n"
      "problem.kind = conv1d\n";
  Config gen_cfg = Config::from_string(
      base +
      "dataset.count = 400\ndataset.seed = 3\n"
      "dataset.range.W = 8:24\ndataset.range.R = 2:6\n");
  std::string ds_path = (dir / "ds.txt").string();
  cmd_gen_dataset(gen_cfg, ds_path);

  Config train_cfg = Config::from_string(
      base +
      "surrogate.hidden = 8,8\ntrain.epochs = 2\ntrain.batch = 32\ntrain.lr = 1e-3\n");
  std::string model_path = (dir / "model.txt").string();
  std::string curve_path = (dir / "curve.csv").string();
  cmd_train(train_cfg, ds_path, model_path, curve_path);
  CHECK(slurp(curve_path).find("epoch,train_loss,test_loss") != std::string::npos);

  Config search_cfg = Config::from_string(
      base +
      "problem.dims = 12,3\nsearch.method = mm\nsearch.budget_iterations = 25\n"
      "search.seed = 4\n");
  std::string trace_path = (dir / "trace.csv").string();
  cmd_search(search_cfg, model_path, trace_path);
  std::string trace = slurp(trace_path);
  CHECK(trace.find("run_seed,method,iteration,elapsed_ns,predicted_obj,"
                   "true_obj_if_known,best_true_obj_final") != std::string::npos);
  CHECK(trace.find("# best_mapping: kind=conv1d dims=12,3") != std::string::npos);

  Config cmp_cfg = Config::from_string(
      base +
      "problem.dims = 12,3\nsearch.methods = mm,sa,ga,random\n"
      "search.budget_iterations = 40\nsearch.seed = 5\ncompare.runs = 2\n"
      "ga.population = 8\n");
  std::string cmp_dir = (dir / "cmp").string();
  std::ostringstream summary;
  cmd_compare(cmp_cfg, model_path, cmp_dir, summary);
  std::string report = slurp(cmp_dir + "/report.csv");
  for (const char* m : {"mm", "sa", "ga", "random"}) {
    CHECK(report.find(std::string(",iter,1,") + m + ",") != std::string::npos);
    CHECK(report.find(std::string(",iter,40,") + m + ",") != std::string::npos);
  }
  CHECK(summary.str().find("mm vs random") != std::string::npos);
  CHECK(std::filesystem::exists(cmp_dir + "/ratios.csv"));
  CHECK(std::filesystem::exists(cmp_dir + "/traces_0.csv"));

  Config surf_cfg = Config::from_string(
      base +
      "problem.dims = 13,2\nsurface.axis_x = l1:W\nsurface.axis_y = l1:R\n"
      "surface.seed = 2\n");
  std::string surf_path = (dir / "surface.csv").string();
  cmd_surface(surf_cfg, surf_path);
  std::string surf = slurp(surf_path);
  // X = 12 has 6 divisors, R = 2 has 2: 12 grid rows plus headers
  int rows = 0;
  for (char c : surf)
    if (c == '\n') ++rows;
  CHECK(rows == 12 + 5);

  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown config keys are rejected by subcommands") {
  Config cfg = Config::from_string("problem.kind = conv1d\nbogus.key = 1\n");
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_lower_bound(cfg, out), ConfigError);
}

TEST_CASE("multi-problem compare aggregates per problem") {
  auto dir = temp_dir("multi");
  Config cfg = Config::from_string(
      "accel.preset = large\n"
      "problem.preset = resnet_conv4,mttkrp_0\n"
      "search.methods = sa,random\n"
      "search.budget_iterations = 25\n"
      "search.seed = 9\n"
      "compare.runs = 2\n");
  std::ostringstream summary;
  cmd_compare(cfg, "", (dir / "out").string(), summary);
  std::string report = slurp(dir / "out" / "report.csv");
  CHECK(report.find("convlayer(N=16") != std::string::npos);
  CHECK(report.find("mttkrp(I=128") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "traces_1.csv"));
  // geometric vs arithmetic means across two problems are both emitted
  CHECK(slurp(dir / "out" / "ratios.csv").find("sa,random,") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("real clock mode produces nondecreasing measured timestamps") {
  Config cfg = Config::from_string("clock.mode = real\n");
  auto clock = clock_from_config(cfg, Method::kRandom);
  MapSpace space = testutil::tiny_conv1d_space();
  auto tr = random_search(space, SearchBudget::iters(50), 4, *clock);
  for (size_t i = 1; i < tr.steps.size(); ++i)
    CHECK(tr.steps[i].elapsed_ns >= tr.steps[i - 1].elapsed_ns);
  CHECK_THROWS_AS(clock_from_config(Config::from_string("clock.mode = nope\n"), Method::kSa),
                  ConfigError);
}

TEST_CASE("surface demo preset: 16x16 grid, spiky values") {
  auto dir = temp_dir("surface16");
  Config cfg = Config::from_string(
      "accel.preset = desk\n"
      "accel.l2.capacity_words = 8388608\naccel.l1.capacity_words = 2097152\n"
      "problem.kind = convlayer\nproblem.dims = 2,4,64,124,124,5,5\n"
      "surface.axis_x = l2:W\nsurface.axis_y = l2:H\nsurface.seed = 2\n");
  std::string path = (dir / "surface.csv").string();
  cmd_surface(cfg, path);

  std::istringstream rowsin(slurp(path));
  std::string line;
  int rows = 0;
  double mn = std::numeric_limits<double>::infinity(), mx = 0;
  while (std::getline(rowsin, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    ++rows;
    double edp = std::stod(line.substr(line.rfind(',') + 1));
    REQUIRE(std::isfinite(edp));
    mn = std::min(mn, edp);
    mx = std::max(mx, edp);
  }
  CHECK(rows == 256);  // both swept extents are 120, which has 16 divisors
  CHECK(mx / mn > 10.0);
  std::filesystem::remove_all(dir);
}
