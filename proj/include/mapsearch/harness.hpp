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

#ifndef MAPSEARCH_HARNESS_HPP
#define MAPSEARCH_HARNESS_HPP

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mapsearch/search.hpp"

namespace mapsearch {

// Config problems exit the CLI with code 2; other runtime failures with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value config file: one `key = value` per line, full-line #
// comments, no sections. Parsing is strict: duplicate keys are rejected,
// and each subcommand rejects keys outside its registry.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;                       // required
  std::string get_str(const std::string& key, const std::string& d) const;
  int64_t get_int(const std::string& key, int64_t d) const;
  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key, double d) const;
  bool get_bool(const std::string& key, bool d) const;

  // Throws ConfigError if any present key is neither listed exactly nor
  // covered by a `prefix.*` entry.
  void restrict_keys(const std::vector<std::string>& allowed) const;

  uint64_t hash() const;  // canonical content hash

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string> map_;
};

AcceleratorConfig accel_from_config(const Config& cfg);
std::vector<Problem> problems_from_config(const Config& cfg);
Problem problem_preset(std::string_view name);
ProblemRange range_from_config(const Config& cfg, AlgorithmKind kind);
SearchBudget budget_from_config(const Config& cfg);
GradSearchConfig mm_from_config(const Config& cfg);
SaConfig sa_from_config(const Config& cfg);
GaConfig ga_from_config(const Config& cfg);
TrainConfig train_from_config(const Config& cfg);
std::unique_ptr<SearchClock> clock_from_config(const Config& cfg, Method m);

// Mean best-so-far true EDP per checkpoint, normalized by the
// algorithmic-minimum EDP. Candidates recorded by the gradient search are
// re-evaluated post hoc; the baselines already carry true costs.
struct ComparisonReport {
  double bound_edp = 0;
  std::vector<uint64_t> iter_checkpoints;
  std::vector<uint64_t> time_checkpoints_ns;
  std::vector<Method> methods;
  std::map<Method, std::vector<double>> iter_mean;
  std::map<Method, std::vector<double>> time_mean;

  double final_mean(Method m) const;
};

ComparisonReport aggregate(const MapSpace& space,
                           const std::map<Method, std::vector<SearchTrace>>& runs,
                           double bound_edp);

void write_trace_csv(std::ostream& os, const SearchTrace& trace);

// Subcommand bodies behind the CLI.
void cmd_gen_dataset(const Config& cfg, const std::string& out_path);
void cmd_train(const Config& cfg, const std::string& dataset_path,
               const std::string& model_out, const std::string& curve_out);
void cmd_search(const Config& cfg, const std::string& model_path, const std::string& out_path);
void cmd_compare(const Config& cfg, const std::string& model_path, const std::string& out_dir,
                 std::ostream& summary);
void cmd_surface(const Config& cfg, const std::string& out_path);
void cmd_lower_bound(const Config& cfg, std::ostream& out);

}  // namespace mapsearch

#endif  // MAPSEARCH_HARNESS_HPP
