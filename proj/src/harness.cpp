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

#include "mapsearch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "mapsearch/common.hpp"

namespace mapsearch {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.map_.count(key))
      throw ConfigError("config: duplicate key " + key);
    cfg.map_[key] = val;
    cfg.entries_.emplace_back(key, val);
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

bool Config::has(const std::string& key) const { return map_.count(key) != 0; }

std::string Config::get_str(const std::string& key) const {
  auto it = map_.find(key);
  if (it == map_.end()) throw ConfigError("config: missing required key " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& d) const {
  auto it = map_.find(key);
  return it == map_.end() ? d : it->second;
}

int64_t Config::get_int(const std::string& key) const {
  try {
    return std::stoll(get_str(key));
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError("config: key " + key + " is not an integer");
  }
}

int64_t Config::get_int(const std::string& key, int64_t d) const {
  return has(key) ? get_int(key) : d;
}

double Config::get_double(const std::string& key, double d) const {
  if (!has(key)) return d;
  try {
    return std::stod(get_str(key));
  } catch (...) {
    throw ConfigError("config: key " + key + " is not a number");
  }
}

bool Config::get_bool(const std::string& key, bool d) const {
  if (!has(key)) return d;
  std::string v = get_str(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config: key " + key + " is not a boolean");
}

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, val] : entries_) {
    bool ok = false;
    for (const auto& a : allowed) {
      if (a.size() > 2 && a.compare(a.size() - 2, 2, ".*") == 0) {
        if (key.compare(0, a.size() - 1, a.substr(0, a.size() - 1)) == 0) ok = true;
      } else if (key == a) {
        ok = true;
      }
      if (ok) break;
    }
    if (!ok) throw ConfigError("config: unknown key " + key);
  }
}

uint64_t Config::hash() const {
  std::vector<std::string> lines;
  for (const auto& [k, v] : entries_) lines.push_back(k + "=" + v);
  std::sort(lines.begin(), lines.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& l : lines) h = fnv1a_str(l + "\n", h);
  return h;
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "accel.preset", "accel.num_pes", "accel.flops_per_pe", "accel.clock_hz",
      "accel.l2.capacity_words", "accel.l2.banks", "accel.l1.capacity_words", "accel.l1.banks",
      "accel.energy.dram", "accel.energy.l2", "accel.energy.l1", "accel.energy.mac",
      "problem.preset", "problem.kind", "problem.dims",
      "dataset.count", "dataset.seed", "dataset.test_frac", "dataset.range.*",
      "surrogate.hidden", "surrogate.activation", "surrogate.preset",
      "train.epochs", "train.batch", "train.lr", "train.lr_decay", "train.lr_decay_every",
      "train.momentum", "train.loss", "train.huber_delta", "train.seed",
      "search.method", "search.methods", "search.budget_iterations", "search.budget_seconds",
      "search.seed", "compare.runs", "compare.threads",
      "mm.alpha", "mm.inject_every", "mm.t0", "mm.anneal_factor", "mm.anneal_every",
      "sa.t0", "sa.cooling", "sa.auto_tune",
      "ga.population", "ga.crossover", "ga.mutation", "ga.elites", "ga.tournament",
      "clock.mode", "clock.step_ns.mm", "clock.step_ns.sa", "clock.step_ns.ga",
      "clock.step_ns.random",
      "surface.seed", "surface.axis_x", "surface.axis_y", "surface.max_per_axis",
  };
  return keys;
}

void validate_keys(const Config& cfg) { cfg.restrict_keys(known_keys()); }

}  // namespace

AcceleratorConfig accel_from_config(const Config& cfg) {
  AcceleratorConfig a;
  try {
    a = AcceleratorConfig::preset(cfg.get_str("accel.preset", "desk"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  a.num_pes = cfg.get_int("accel.num_pes", a.num_pes);
  a.flops_per_pe = cfg.get_int("accel.flops_per_pe", a.flops_per_pe);
  a.clock_hz = cfg.get_double("accel.clock_hz", a.clock_hz);
  a.capacity_words[0] = cfg.get_int("accel.l2.capacity_words", a.capacity_words[0]);
  a.num_banks[0] = cfg.get_int("accel.l2.banks", a.num_banks[0]);
  a.capacity_words[1] = cfg.get_int("accel.l1.capacity_words", a.capacity_words[1]);
  a.num_banks[1] = cfg.get_int("accel.l1.banks", a.num_banks[1]);
  a.energy_per_word[kDram] = cfg.get_double("accel.energy.dram", a.energy_per_word[kDram]);
  a.energy_per_word[kL2] = cfg.get_double("accel.energy.l2", a.energy_per_word[kL2]);
  a.energy_per_word[kL1] = cfg.get_double("accel.energy.l1", a.energy_per_word[kL1]);
  a.mac_energy = cfg.get_double("accel.energy.mac", a.mac_energy);
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return a;
}

Problem problem_preset(std::string_view name) {
  using K = AlgorithmKind;
  struct Preset {
    const char* name;
    K kind;
    std::vector<int64_t> dims;
  };
  static const std::vector<Preset> presets = {
      {"resnet_conv3", K::kConvLayer, {16, 128, 128, 28, 28, 3, 3}},
      {"resnet_conv4", K::kConvLayer, {16, 256, 256, 14, 14, 3, 3}},
      {"inception_conv2", K::kConvLayer, {32, 192, 192, 56, 56, 3, 3}},
      {"vgg_conv2", K::kConvLayer, {16, 128, 64, 112, 112, 3, 3}},
      {"alexnet_conv2", K::kConvLayer, {8, 256, 96, 27, 27, 5, 5}},
      {"alexnet_conv4", K::kConvLayer, {8, 384, 384, 13, 13, 3, 3}},
      {"mttkrp_0", K::kMttkrp, {128, 1024, 4096, 2048}},
      {"mttkrp_1", K::kMttkrp, {2048, 4096, 1024, 128}},
  };
  for (const auto& p : presets)
    if (name == p.name) return Problem{p.kind, p.dims};
  throw ConfigError("unknown problem preset: " + std::string(name));
}

std::vector<Problem> problems_from_config(const Config& cfg) {
  std::vector<Problem> out;
  try {
    if (cfg.has("problem.preset")) {
      for (const auto& name : split_list(cfg.get_str("problem.preset"), ','))
        out.push_back(problem_preset(name));
    } else {
      Problem p{kind_from_name(cfg.get_str("problem.kind")), {}};
      for (const auto& d : split_list(cfg.get_str("problem.dims"), ','))
        p.dims.push_back(std::stoll(d));
      out.push_back(std::move(p));
    }
    for (auto& p : out) p.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return out;
}

ProblemRange range_from_config(const Config& cfg, AlgorithmKind kind) {
  ProblemRange range{kind, {}};
  auto names = dim_names(kind);
  for (int d = 0; d < dim_count(kind); ++d) {
    std::string key = std::string("dataset.range.") + names[d];
    auto parts = split_list(cfg.get_str(key), ':');
    if (parts.size() != 2) throw ConfigError("config: " + key + " must be lo:hi");
    range.lo_hi.emplace_back(std::stoll(parts[0]), std::stoll(parts[1]));
  }
  try {
    range.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return range;
}

SearchBudget budget_from_config(const Config& cfg) {
  bool it = cfg.has("search.budget_iterations");
  bool wall = cfg.has("search.budget_seconds");
  if (it == wall)
    throw ConfigError("config: exactly one of search.budget_iterations / search.budget_seconds");
  return it ? SearchBudget::iters(static_cast<uint64_t>(cfg.get_int("search.budget_iterations")))
            : SearchBudget::wall(cfg.get_double("search.budget_seconds", 0));
}

GradSearchConfig mm_from_config(const Config& cfg) {
  GradSearchConfig c;
  c.alpha = cfg.get_double("mm.alpha", c.alpha);
  c.inject_every = static_cast<int>(cfg.get_int("mm.inject_every", c.inject_every));
  c.t0 = cfg.get_double("mm.t0", c.t0);
  c.anneal_factor = cfg.get_double("mm.anneal_factor", c.anneal_factor);
  c.anneal_every = static_cast<int>(cfg.get_int("mm.anneal_every", c.anneal_every));
  return c;
}

SaConfig sa_from_config(const Config& cfg) {
  SaConfig c;
  c.t0 = cfg.get_double("sa.t0", c.t0);
  c.cooling = cfg.get_double("sa.cooling", c.cooling);
  c.auto_tune = cfg.get_bool("sa.auto_tune", c.auto_tune);
  return c;
}

GaConfig ga_from_config(const Config& cfg) {
  GaConfig c;
  c.population = static_cast<int>(cfg.get_int("ga.population", c.population));
  c.crossover = cfg.get_double("ga.crossover", c.crossover);
  c.mutation = cfg.get_double("ga.mutation", c.mutation);
  c.elites = static_cast<int>(cfg.get_int("ga.elites", c.elites));
  c.tournament = static_cast<int>(cfg.get_int("ga.tournament", c.tournament));
  return c;
}

TrainConfig train_from_config(const Config& cfg) {
  TrainConfig c;
  c.epochs = static_cast<int>(cfg.get_int("train.epochs", c.epochs));
  c.batch = static_cast<int>(cfg.get_int("train.batch", c.batch));
  c.lr = cfg.get_double("train.lr", c.lr);
  c.lr_decay = cfg.get_double("train.lr_decay", c.lr_decay);
  c.lr_decay_every = static_cast<int>(cfg.get_int("train.lr_decay_every", c.lr_decay_every));
  c.momentum = cfg.get_double("train.momentum", c.momentum);
  c.loss = loss_from_name(cfg.get_str("train.loss", "huber"),
                          cfg.get_double("train.huber_delta", 1.0));
  c.seed = static_cast<uint64_t>(cfg.get_int("train.seed", 1));
  return c;
}

std::unique_ptr<SearchClock> clock_from_config(const Config& cfg, Method m) {
  std::string mode = cfg.get_str("clock.mode", "fixed");
  if (mode == "real") return std::make_unique<RealClock>();
  if (mode != "fixed") throw ConfigError("config: clock.mode must be fixed or real");
  // Nominal per-iteration costs; they define the reproducible time axis and
  // can be recalibrated per machine through these keys. With the in-repo
  // analytical model a true-cost step is cheaper than a surrogate step.
  int64_t def = m == Method::kMm ? 8000 : 6000;
  int64_t ns = cfg.get_int(std::string("clock.step_ns.") + method_name(m), def);
  if (ns < 1) throw ConfigError("config: clock.step_ns must be >= 1");
  return std::make_unique<FixedRateClock>(static_cast<uint64_t>(ns));
}

double ComparisonReport::final_mean(Method m) const {
  return iter_mean.at(m).back();
}

ComparisonReport aggregate(const MapSpace& space,
                           const std::map<Method, std::vector<SearchTrace>>& runs,
                           double bound_edp) {
  if (runs.empty() || bound_edp <= 0) throw std::invalid_argument("aggregate: bad inputs");
  ComparisonReport rep;
  rep.bound_edp = bound_edp;

  uint64_t max_iters = 0;
  uint64_t min_first_ns = UINT64_MAX, max_last_ns = 0;
  for (const auto& [method, traces] : runs) {
    if (traces.empty()) throw std::invalid_argument("aggregate: method with no traces");
    size_t len = traces[0].steps.size();
    for (const auto& t : traces) {
      if (t.steps.size() != len) throw std::invalid_argument("aggregate: ragged trace lengths");
      if (!t.steps.empty()) {
        min_first_ns = std::min(min_first_ns, t.steps.front().elapsed_ns);
        max_last_ns = std::max(max_last_ns, t.steps.back().elapsed_ns);
      }
    }
    max_iters = std::max<uint64_t>(max_iters, len);
  }
  if (max_iters == 0) throw std::invalid_argument("aggregate: empty traces");

  for (uint64_t c = 1; c <= max_iters; c *= 2) rep.iter_checkpoints.push_back(c);
  if (rep.iter_checkpoints.back() != max_iters) rep.iter_checkpoints.push_back(max_iters);

  constexpr int kTimePoints = 12;
  double lo = std::log(static_cast<double>(std::max<uint64_t>(1, min_first_ns)));
  double hi = std::log(static_cast<double>(std::max<uint64_t>(2, max_last_ns)));
  for (int i = 0; i < kTimePoints; ++i) {
    double f = kTimePoints == 1 ? 1.0 : static_cast<double>(i) / (kTimePoints - 1);
    uint64_t t = static_cast<uint64_t>(std::llround(std::exp(lo + f * (hi - lo))));
    if (rep.time_checkpoints_ns.empty() || t > rep.time_checkpoints_ns.back())
      rep.time_checkpoints_ns.push_back(t);
  }

  for (const auto& [method, traces] : runs) {
    rep.methods.push_back(method);
    std::vector<std::vector<double>> best_per_step;   // per trace, prefix-min true EDP
    std::vector<std::vector<uint64_t>> elapsed;
    for (const auto& tr : traces) {
      std::vector<double> best;
      std::vector<uint64_t> ns;
      std::vector<double> memo(tr.candidates.size(),
                               std::numeric_limits<double>::quiet_NaN());
      double cur = std::numeric_limits<double>::infinity();
      for (const auto& st : tr.steps) {
        double edp;
        if (method == Method::kMm) {
          double& ref = memo[st.candidate_id];
          if (std::isnan(ref)) ref = evaluate(space, tr.candidates[st.candidate_id]).edp;
          edp = ref;
        } else {
          edp = st.true_obj;
        }
        cur = std::min(cur, edp);
        best.push_back(cur);
        ns.push_back(st.elapsed_ns);
      }
      best_per_step.push_back(std::move(best));
      elapsed.push_back(std::move(ns));
    }

    auto& im = rep.iter_mean[method];
    for (uint64_t cp : rep.iter_checkpoints) {
      double sum = 0;
      for (const auto& best : best_per_step) {
        size_t k = std::min<size_t>(best.size(), cp);
        sum += best[k - 1];
      }
      im.push_back(sum / static_cast<double>(best_per_step.size()) / bound_edp);
    }

    auto& tm = rep.time_mean[method];
    for (uint64_t tcp : rep.time_checkpoints_ns) {
      double sum = 0;
      bool any_missing = false;
      for (size_t i = 0; i < best_per_step.size(); ++i) {
        const auto& ns = elapsed[i];
        size_t k = static_cast<size_t>(
            std::upper_bound(ns.begin(), ns.end(), tcp) - ns.begin());
        if (k == 0) {
          any_missing = true;
          break;
        }
        sum += best_per_step[i][k - 1];
      }
      tm.push_back(any_missing ? std::numeric_limits<double>::quiet_NaN()
                               : sum / static_cast<double>(best_per_step.size()) / bound_edp);
    }
  }
  return rep;
}

namespace {

void print_obj(std::ostream& os, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const SearchTrace& trace) {
  os << "run_seed,method,iteration,elapsed_ns,predicted_obj,true_obj_if_known,"
        "best_true_obj_final\n";
  char final_buf[32];
  std::snprintf(final_buf, sizeof final_buf, "%.17g", trace.final_true_edp);
  for (const auto& st : trace.steps) {
    os << trace.seed << "," << method_name(trace.method) << "," << st.iteration << ","
       << st.elapsed_ns << ",";
    print_obj(os, st.predicted_obj);
    os << ",";
    print_obj(os, st.true_obj);
    os << "," << final_buf << "\n";
  }
}

namespace {

void write_file_header(std::ostream& os, const char* name, const Config& cfg, uint64_t seed) {
  os << "# " << name << " v1\n";
  os << "# tool=mapsearch " << kToolVersion << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, cfg.hash());
  os << "# config=" << buf << "\n";
  os << "# master_seed=" << seed << "\n";
}

SearchTrace run_one(const MapSpace& space, Method method, const Config& cfg,
                    const SearchBudget& budget, const MlpModel* model, uint64_t seed) {
  auto clock = clock_from_config(cfg, method);
  switch (method) {
    case Method::kMm:
      if (!model) throw ConfigError("search: method mm requires a trained model (--model)");
      return gradient_search(space, *model, mm_from_config(cfg), budget, seed, *clock);
    case Method::kSa:
      return simulated_annealing(space, sa_from_config(cfg), budget, seed, *clock);
    case Method::kGa:
      return genetic_search(space, ga_from_config(cfg), budget, seed, *clock);
    case Method::kRandom:
    default:
      return random_search(space, budget, seed, *clock);
  }
}

}  // namespace

void cmd_gen_dataset(const Config& cfg, const std::string& out_path) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  AlgorithmKind kind;
  try {
    kind = kind_from_name(cfg.get_str("problem.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ProblemRange range = range_from_config(cfg, kind);
  size_t n = static_cast<size_t>(cfg.get_int("dataset.count", 50000));
  uint64_t seed = static_cast<uint64_t>(cfg.get_int("dataset.seed", 1));
  double test_frac = cfg.get_double("dataset.test_frac", 0.1);
  Dataset ds = generate_dataset(accel, kind, range, n, seed, test_frac);
  write_dataset(ds, out_path);
}

void cmd_train(const Config& cfg, const std::string& dataset_path,
               const std::string& model_out, const std::string& curve_out) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  Dataset ds = read_dataset(dataset_path);
  NormStats stats = fit_norm(ds, accel);
  NormalizedData data = normalize_dataset(stats, ds);

  std::vector<int> hidden;
  if (cfg.get_str("surrogate.preset", "desk") == "large")
    hidden = large_hidden_widths();
  else
    hidden = desk_hidden_widths();
  if (cfg.has("surrogate.hidden")) {
    hidden.clear();
    for (const auto& h : split_list(cfg.get_str("surrogate.hidden"), ','))
      hidden.push_back(std::stoi(h));
  }
  std::vector<int> widths;
  widths.push_back(static_cast<int>(ds.flat_len));
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(static_cast<int>(ds.cost_len));

  TrainConfig tc = train_from_config(cfg);
  Activation act = activation_from_name(cfg.get_str("surrogate.activation", "relu"));
  MlpModel model = make_model(ds.kind, widths, act, mix_seed(tc.seed, 0x6d6f64656cull));
  model.norm = stats;
  model.accel_fp = accel.fingerprint();
  model.dataset_fp = ds.fingerprint();
  LossCurve curve = train(model, data, tc);
  save_model(model, model_out);

  if (!curve_out.empty()) {
    std::ofstream os(curve_out);
    if (!os) throw std::runtime_error("train: cannot open " + curve_out);
    write_file_header(os, "losscurve", cfg, tc.seed);
    os << "epoch,train_loss,test_loss\n";
    for (size_t e = 0; e < curve.train.size(); ++e) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, curve.train[e], curve.test[e]);
      os << buf;
    }
  }
}

void cmd_search(const Config& cfg, const std::string& model_path, const std::string& out_path) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  auto problems = problems_from_config(cfg);
  if (problems.size() != 1) throw ConfigError("search: exactly one problem expected");
  MapSpace space(problems[0], accel);
  Method method = method_from_name(cfg.get_str("search.method"));
  SearchBudget budget = budget_from_config(cfg);
  uint64_t seed = static_cast<uint64_t>(cfg.get_int("search.seed", 1));

  MlpModel model;
  const MlpModel* model_ptr = nullptr;
  if (method == Method::kMm) {
    if (model_path.empty()) throw ConfigError("search: method mm requires --model");
    model = load_model(model_path);
    model_ptr = &model;
  }
  SearchTrace trace = run_one(space, method, cfg, budget, model_ptr, seed);

  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("search: cannot open " + out_path);
  write_file_header(os, "trace", cfg, seed);
  write_trace_csv(os, trace);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", trace.final_true_edp);
  os << "# final_best_true_edp=" << buf << "\n";
  os << "# best_mapping: " << space.to_record(trace.candidates[trace.best_id]) << "\n";
}

void cmd_compare(const Config& cfg, const std::string& model_path, const std::string& out_dir,
                 std::ostream& summary) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  auto problems = problems_from_config(cfg);
  std::vector<Method> methods;
  for (const auto& name : split_list(cfg.get_str("search.methods", "mm,sa,ga,random"), ','))
    methods.push_back(method_from_name(name));
  if (methods.empty()) throw ConfigError("compare: need at least one method");
  SearchBudget budget = budget_from_config(cfg);
  int runs = static_cast<int>(cfg.get_int("compare.runs", 20));
  if (runs < 1) throw ConfigError("compare: runs must be >= 1");
  int threads = static_cast<int>(cfg.get_int("compare.threads", 1));
  uint64_t master = static_cast<uint64_t>(cfg.get_int("search.seed", 1));

  MlpModel model;
  const MlpModel* model_ptr = nullptr;
  if (std::find(methods.begin(), methods.end(), Method::kMm) != methods.end()) {
    if (model_path.empty()) throw ConfigError("compare: method mm requires --model");
    model = load_model(model_path);
    model_ptr = &model;
  }

  std::filesystem::create_directories(out_dir);
  std::vector<MapSpace> spaces;
  spaces.reserve(problems.size());
  for (const auto& p : problems) spaces.emplace_back(p, accel);

  struct Task {
    size_t problem;
    size_t method;
    int run;
    uint64_t seed;
  };
  std::vector<Task> tasks;
  for (size_t pi = 0; pi < problems.size(); ++pi)
    for (size_t mi = 0; mi < methods.size(); ++mi)
      for (int r = 0; r < runs; ++r)
        tasks.push_back(
            {pi, mi, r, mix_seed(mix_seed(mix_seed(master, pi + 1), mi + 1), r + 1)});

  std::vector<SearchTrace> results(tasks.size());
  auto worker_body = [&](size_t i) {
    const Task& t = tasks[i];
    results[i] = run_one(spaces[t.problem], methods[t.method], cfg, budget, model_ptr, t.seed);
  };
  if (threads <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) worker_body(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
          worker_body(i);
      });
    for (auto& th : pool) th.join();
  }

  std::ofstream report(out_dir + "/report.csv");
  if (!report) throw std::runtime_error("compare: cannot open report.csv");
  write_file_header(report, "compare", cfg, master);
  report << "problem,axis,checkpoint,method,mean_norm_edp\n";

  // Cross-problem final ratios (arithmetic and geometric means).
  std::map<std::pair<Method, Method>, std::vector<double>> ratio_samples;

  for (size_t pi = 0; pi < problems.size(); ++pi) {
    std::map<Method, std::vector<SearchTrace>> by_method;
    for (size_t ti = 0; ti < tasks.size(); ++ti)
      if (tasks[ti].problem == pi) by_method[methods[tasks[ti].method]].push_back(results[ti]);

    double bound_edp = algorithmic_minimum(accel, problems[pi]).edp;
    ComparisonReport rep = aggregate(spaces[pi], by_method, bound_edp);

    std::string pname = problems[pi].to_string();
    char buf[48];
    for (Method m : rep.methods) {
      for (size_t c = 0; c < rep.iter_checkpoints.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", rep.iter_mean[m][c]);
        report << pname << ",iter," << rep.iter_checkpoints[c] << "," << method_name(m) << ","
               << buf << "\n";
      }
      for (size_t c = 0; c < rep.time_checkpoints_ns.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", rep.time_mean[m][c]);
        report << pname << ",time_ns," << rep.time_checkpoints_ns[c] << "," << method_name(m)
               << "," << buf << "\n";
      }
    }
    for (Method a : rep.methods)
      for (Method b : rep.methods)
        if (a != b) ratio_samples[{a, b}].push_back(rep.final_mean(b) / rep.final_mean(a));

    std::ofstream traces(out_dir + "/traces_" + std::to_string(pi) + ".csv");
    write_file_header(traces, "trace", cfg, master);
    bool first = true;
    for (size_t ti = 0; ti < tasks.size(); ++ti) {
      if (tasks[ti].problem != pi) continue;
      if (first) {
        write_trace_csv(traces, results[ti]);
        first = false;
      } else {
        // append without repeating the column header
        std::ostringstream tmp;
        write_trace_csv(tmp, results[ti]);
        std::string s = tmp.str();
        traces << s.substr(s.find('\n') + 1);
      }
    }
  }

  std::ofstream ratios(out_dir + "/ratios.csv");
  write_file_header(ratios, "ratios", cfg, master);
  ratios << "method,baseline,arith_mean_improvement,geo_mean_improvement\n";
  summary << "final mean EDP improvement of <method> over <baseline> "
             "(>1 means <method> finds lower EDP)\n";
  for (const auto& [pair, samples] : ratio_samples) {
    double arith = 0, geo = 0;
    for (double s : samples) {
      arith += s;
      geo += std::log(s);
    }
    arith /= static_cast<double>(samples.size());
    geo = std::exp(geo / static_cast<double>(samples.size()));
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.6g,%.6g", arith, geo);
    ratios << method_name(pair.first) << "," << method_name(pair.second) << "," << buf << "\n";
    summary << "  " << method_name(pair.first) << " vs " << method_name(pair.second) << ": x"
            << buf << " (arith,geo)\n";
  }
}

void cmd_surface(const Config& cfg, const std::string& out_path) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  auto problems = problems_from_config(cfg);
  if (problems.size() != 1) throw ConfigError("surface: exactly one problem expected");
  MapSpace space(problems[0], accel);
  uint64_t seed = static_cast<uint64_t>(cfg.get_int("surface.seed", 1));
  size_t max_per_axis = static_cast<size_t>(cfg.get_int("surface.max_per_axis", 16));

  auto parse_axis = [&](const std::string& key) {
    auto parts = split_list(cfg.get_str(key), ':');
    if (parts.size() != 2) throw ConfigError("surface: axis must be level:dim, e.g. l1:W");
    MemLevel level;
    if (parts[0] == "l2") level = kL2;
    else if (parts[0] == "l1") level = kL1;
    else throw ConfigError("surface: axis level must be l2 or l1");
    auto names = dim_names(space.problem().kind);
    for (int d = 0; d < space.dims(); ++d)
      if (parts[1] == names[d]) return std::make_pair(level, d);
    throw ConfigError("surface: unknown dim " + parts[1]);
  };
  auto [level_x, dim_x] = parse_axis("surface.axis_x");
  auto [level_y, dim_y] = parse_axis("surface.axis_y");
  if (dim_x == dim_y) throw ConfigError("surface: the two axes must use distinct dims");

  Mapping base = space.get_mapping_seeded(seed);
  for (int d : {dim_x, dim_y}) {
    // Decouple the swept coordinate from the rest of its divisor chain.
    base.tile[kL2][d] = space.extent(d);
    base.tile[kL1][d] = 1;
    base.par[d] = 1;
  }

  auto grid = [&](int d) {
    auto divs = divisors(space.extent(d));
    if (divs.size() <= max_per_axis) return divs;
    std::vector<int64_t> out;
    for (size_t i = 0; i < max_per_axis; ++i) {
      size_t k = i * (divs.size() - 1) / (max_per_axis - 1);
      if (out.empty() || divs[k] != out.back()) out.push_back(divs[k]);
    }
    return out;
  };

  auto apply = [&](Mapping& m, MemLevel level, int d, int64_t v) {
    if (level == kL2) {
      m.tile[kL2][d] = v;  // L1 tile is 1, so the chain stays divisible
    } else {
      m.tile[kL1][d] = v;  // L2 tile is the full extent
    }
  };

  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("surface: cannot open " + out_path);
  write_file_header(os, "surface", cfg, seed);
  os << "x,y,edp\n";
  for (int64_t vx : grid(dim_x))
    for (int64_t vy : grid(dim_y)) {
      Mapping m = base;
      apply(m, level_x, dim_x, vx);
      apply(m, level_y, dim_y, vy);
      os << vx << "," << vy << ",";
      if (space.is_member(m)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", evaluate(space, m).edp);
        os << buf << "\n";
      } else {
        os << "inf\n";
      }
    }
}

void cmd_lower_bound(const Config& cfg, std::ostream& out) {
  validate_keys(cfg);
  AcceleratorConfig accel = accel_from_config(cfg);
  for (const auto& p : problems_from_config(cfg)) {
    CostVector bound = algorithmic_minimum(accel, p);
    out << "problem=" << p.to_string() << "\n";
    out << "columns=" << cost_csv_header(p.kind) << "\n";
    auto comps = bound.components();
    out << "bound=";
    for (size_t i = 0; i < comps.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", comps[i]);
      out << buf;
    }
    out << "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "min_energy_pj=%.17g\nmin_cycles=%.17g\nmin_edp=%.17g\n",
                  bound.energy_total, bound.cycles, bound.edp);
    out << buf;
  }
}

}  // namespace mapsearch
