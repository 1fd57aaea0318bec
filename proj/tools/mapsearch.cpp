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

#include <iostream>

#include <CLI11.hpp>

#include "mapsearch/harness.hpp"

using namespace mapsearch;

int main(int argc, char** argv) {
  CLI::App app{"mapping space search over an analytical accelerator cost model"};
  app.require_subcommand(1);

  std::string config_path, out_path, out_dir, dataset_path, model_path, curve_path;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file")->required();
  };

  auto* gen = app.add_subcommand("gen-dataset", "sample mappings and costs into a dataset file");
  add_config(gen);
  gen->add_option("--out", out_path, "dataset output path")->required();

  auto* train = app.add_subcommand("train", "train the surrogate on a dataset");
  add_config(train);
  train->add_option("--dataset", dataset_path, "dataset file")->required();
  train->add_option("--out", out_path, "model output path")->required();
  train->add_option("--curve", curve_path, "per-epoch loss curve CSV");

  auto* search = app.add_subcommand("search", "run one search method on one problem");
  add_config(search);
  search->add_option("--model", model_path, "trained surrogate (required for mm)");
  search->add_option("--out", out_path, "trace CSV output path")->required();

  auto* compare = app.add_subcommand("compare", "run and aggregate multiple methods");
  add_config(compare);
  compare->add_option("--model", model_path, "trained surrogate (required for mm)");
  compare->add_option("--out-dir", out_dir, "output directory")->required();

  auto* surface = app.add_subcommand("surface", "sweep EDP over two tile axes");
  add_config(surface);
  surface->add_option("--out", out_path, "surface CSV output path")->required();

  auto* lower = app.add_subcommand("lower-bound", "print the algorithmic minimum");
  add_config(lower);

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = Config::from_file(config_path);
    if (gen->parsed()) cmd_gen_dataset(cfg, out_path);
    else if (train->parsed()) cmd_train(cfg, dataset_path, out_path, curve_path);
    else if (search->parsed()) cmd_search(cfg, model_path, out_path);
    else if (compare->parsed()) cmd_compare(cfg, model_path, out_dir, std::cout);
    else if (surface->parsed()) cmd_surface(cfg, out_path);
    else if (lower->parsed()) cmd_lower_bound(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
