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

#include "mapsearch/dataset.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mapsearch/common.hpp"

namespace mapsearch {

void ProblemRange::validate() const {
  if (static_cast<int>(lo_hi.size()) != dim_count(kind))
    throw std::invalid_argument("problem range arity does not match kind");
  for (auto [lo, hi] : lo_hi)
    if (lo < 1 || hi < lo) throw std::invalid_argument("problem range interval is empty");
  // The range must admit at least one valid problem (e.g. R <= W).
  Problem lo_corner{kind, {}};
  for (size_t d = 0; d < lo_hi.size(); ++d) {
    // smallest window dims against largest spatial dims
    lo_corner.dims.push_back(lo_hi[d].first);
  }
  if (kind == AlgorithmKind::kConv1d) {
    lo_corner.dims[0] = lo_hi[0].second;
  } else if (kind == AlgorithmKind::kConvLayer) {
    lo_corner.dims[3] = lo_hi[3].second;
    lo_corner.dims[4] = lo_hi[4].second;
  }
  lo_corner.validate();  // throws when even the friendliest corner is invalid
}

Problem sample_problem(const ProblemRange& range, std::mt19937_64& rng) {
  range.validate();
  constexpr int kAttempts = 10000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Problem p{range.kind, {}};
    p.dims.reserve(range.lo_hi.size());
    for (auto [lo, hi] : range.lo_hi) {
      int64_t v;
      if (hi >= 8 * lo) {
        std::uniform_real_distribution<double> u(std::log(static_cast<double>(lo)),
                                                 std::log(static_cast<double>(hi) + 1.0));
        v = std::clamp<int64_t>(static_cast<int64_t>(std::exp(u(rng))), lo, hi);
      } else {
        v = std::uniform_int_distribution<int64_t>(lo, hi)(rng);
      }
      p.dims.push_back(v);
    }
    try {
      p.validate();
      return p;
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw std::runtime_error("sample_problem: range admits no valid problem");
}

uint64_t Dataset::fingerprint() const {
  std::ostringstream os;
  os << kind_name(kind) << "," << accel_fp << "," << seed << "," << test_frac << ","
     << records.size() << "," << flat_len << "," << cost_len;
  return fnv1a_str(os.str());
}

Problem Dataset::problem_of(const SampleRecord& r) const {
  Problem p{kind, {}};
  int d = dim_count(kind);
  for (int i = 0; i < d; ++i) p.dims.push_back(static_cast<int64_t>(std::llround(r.input[i])));
  return p;
}

Dataset generate_dataset(const AcceleratorConfig& accel, AlgorithmKind kind,
                         const ProblemRange& range, size_t n, uint64_t seed,
                         double test_frac) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  if (range.kind != kind) throw std::invalid_argument("generate_dataset: range kind mismatch");
  Dataset ds;
  ds.kind = kind;
  ds.accel_fp = accel.fingerprint();
  ds.seed = seed;
  ds.test_frac = test_frac;
  ds.cost_len = CostVector::component_count(kind);
  ds.records.reserve(n);

  // One derived RNG stream per record index, so records are independent of
  // generation order and the loop can be parallelized without changing the
  // output stream.
  std::map<std::vector<int64_t>, MapSpace> spaces;
  for (size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Problem p = sample_problem(range, rng);
    auto it = spaces.find(p.dims);
    if (it == spaces.end()) it = spaces.emplace(p.dims, MapSpace(p, accel)).first;
    const MapSpace& space = it->second;
    Mapping m = space.get_mapping(rng);
    CostVector cv = evaluate(space, m);
    SampleRecord rec;
    rec.input = space.encode(m);
    rec.cost = cv.components();
    rec.split = u01(rng) < test_frac ? 1 : 0;
    ds.flat_len = rec.input.size();
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

namespace {

void write_doubles(std::FILE* f, std::span<const double> v) {
  for (double x : v) std::fprintf(f, ",%.17g", x);
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_dataset: cannot open " + path);
  std::fprintf(f, "# dataset v1\n");
  std::fprintf(f, "# kind=%s\n", kind_name(ds.kind));
  std::fprintf(f, "# accel=%" PRIu64 "\n", ds.accel_fp);
  std::fprintf(f, "# seed=%" PRIu64 "\n", ds.seed);
  std::fprintf(f, "# test_frac=%.17g\n", ds.test_frac);
  std::fprintf(f, "# count=%zu flat_len=%zu cost_len=%zu\n", ds.records.size(), ds.flat_len,
               ds.cost_len);
  std::fprintf(f, "# columns: split,m0..m%zu,%s\n", ds.flat_len - 1,
               cost_csv_header(ds.kind).c_str());
  for (const auto& r : ds.records) {
    std::fprintf(f, "%d", r.split);
    write_doubles(f, r.input);
    write_doubles(f, r.cost);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path);
  Dataset ds;
  std::string line;
  size_t count = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string tok;
      while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "kind") {
          ds.kind = kind_from_name(val);
          have_header = true;
        } else if (key == "accel") {
          ds.accel_fp = std::stoull(val);
        } else if (key == "seed") {
          ds.seed = std::stoull(val);
        } else if (key == "test_frac") {
          ds.test_frac = std::stod(val);
        } else if (key == "count") {
          count = std::stoull(val);
        } else if (key == "flat_len") {
          ds.flat_len = std::stoull(val);
        } else if (key == "cost_len") {
          ds.cost_len = std::stoull(val);
        }
      }
      continue;
    }
    if (!have_header) throw std::runtime_error("read_dataset: missing header block");
    SampleRecord rec;
    const char* s = line.c_str();
    char* end = nullptr;
    rec.split = static_cast<int>(std::strtol(s, &end, 10));
    s = end;
    size_t total = ds.flat_len + ds.cost_len;
    for (size_t i = 0; i < total; ++i) {
      if (*s != ',') throw std::runtime_error("read_dataset: malformed record");
      ++s;
      double v = std::strtod(s, &end);
      if (end == s) throw std::runtime_error("read_dataset: malformed record");
      s = end;
      if (i < ds.flat_len)
        rec.input.push_back(v);
      else
        rec.cost.push_back(v);
    }
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.size() != count)
    throw std::runtime_error("read_dataset: truncated file (record count mismatch)");
  return ds;
}

std::vector<double> lower_bound_divisors(const AcceleratorConfig& accel, const Problem& p) {
  CostVector bound = algorithmic_minimum(accel, p);
  int t = tensor_count(p.kind);
  std::vector<double> div(CostVector::component_count(p.kind), bound.energy_total);
  div[kNumLevels * t + 1] = bound.cycles;
  div[kNumLevels * t + 2] = 1.0;  // utilization is already dimensionless
  return div;
}

namespace {

void mean_std(const std::vector<const std::vector<double>*>& rows, std::vector<double>& mean,
              std::vector<double>& sd) {
  size_t n = rows.size(), w = rows[0]->size();
  mean.assign(w, 0.0);
  sd.assign(w, 0.0);
  std::vector<char> constant(w, 1);
  for (const auto* r : rows)
    for (size_t i = 0; i < w; ++i) {
      mean[i] += (*r)[i];
      if ((*r)[i] != (*rows[0])[i]) constant[i] = 0;
    }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto* r : rows)
    for (size_t i = 0; i < w; ++i) {
      double d = (*r)[i] - mean[i];
      sd[i] += d * d;
    }
  for (size_t i = 0; i < w; ++i) {
    // Constant coordinates keep their exact value as the mean so the
    // epsilon-floored standardization maps them to exactly zero.
    if (constant[i]) mean[i] = (*rows[0])[i];
    sd[i] = std::max(std::sqrt(sd[i] / static_cast<double>(n)), NormStats::kStdFloor);
  }
}

uint64_t hash_rows(const std::vector<const std::vector<double>*>& rows) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto* r : rows) h = fnv1a(r->data(), r->size() * sizeof(double), h);
  return h;
}

}  // namespace

NormStats fit_norm(const Dataset& ds, const AcceleratorConfig& accel) {
  if (ds.records.empty()) throw std::invalid_argument("fit_norm: empty dataset");
  if (accel.fingerprint() != ds.accel_fp)
    throw std::invalid_argument("fit_norm: accelerator does not match the dataset");
  NormStats st;
  st.kind = ds.kind;
  st.accel = accel;
  st.pid_len = static_cast<size_t>(dim_count(ds.kind));
  st.dataset_fp = ds.fingerprint();

  std::vector<const std::vector<double>*> xs;
  std::vector<std::vector<double>> scaled;
  std::map<std::vector<int64_t>, std::vector<double>> div_cache;
  scaled.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    if (r.split != 0) continue;
    xs.push_back(&r.input);
    Problem p = ds.problem_of(r);
    auto it = div_cache.find(p.dims);
    if (it == div_cache.end())
      it = div_cache.emplace(p.dims, lower_bound_divisors(accel, p)).first;
    std::vector<double> row(r.cost.size());
    for (size_t i = 0; i < row.size(); ++i) row[i] = r.cost[i] / it->second[i];
    scaled.push_back(std::move(row));
  }
  if (xs.empty()) throw std::invalid_argument("fit_norm: training split is empty");

  std::vector<const std::vector<double>*> ys;
  ys.reserve(scaled.size());
  for (const auto& s : scaled) ys.push_back(&s);

  mean_std(xs, st.in_mean, st.in_std);
  mean_std(ys, st.out_mean, st.out_std);
  uint64_t h = hash_rows(xs);
  st.train_fp = fnv1a(&h, sizeof h, hash_rows(ys));
  return st;
}

std::vector<double> normalize_input(const NormStats& stats, std::span<const double> flat) {
  if (flat.size() != stats.in_mean.size())
    throw std::invalid_argument("normalize_input: unseen vector length");
  std::vector<double> x(flat.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = (flat[i] - stats.in_mean[i]) / stats.in_std[i];
  return x;
}

std::vector<double> denormalize_input(const NormStats& stats, std::span<const double> x) {
  if (x.size() != stats.in_mean.size())
    throw std::invalid_argument("denormalize_input: unseen vector length");
  std::vector<double> flat(x.size());
  for (size_t i = 0; i < x.size(); ++i) flat[i] = x[i] * stats.in_std[i] + stats.in_mean[i];
  return flat;
}

std::pair<std::vector<double>, std::vector<double>> apply_norm(const NormStats& stats,
                                                               const Dataset& ds,
                                                               const SampleRecord& r) {
  if (stats.dataset_fp != ds.fingerprint())
    throw std::invalid_argument("apply_norm: stats were fitted on a different dataset");
  if (r.cost.size() != stats.out_mean.size())
    throw std::invalid_argument("apply_norm: unseen vector length");
  std::vector<double> x = normalize_input(stats, r.input);
  Problem p = ds.problem_of(r);
  std::vector<double> div = lower_bound_divisors(stats.accel, p);
  std::vector<double> y(r.cost.size());
  for (size_t i = 0; i < y.size(); ++i)
    y[i] = (r.cost[i] / div[i] - stats.out_mean[i]) / stats.out_std[i];
  return {std::move(x), std::move(y)};
}

CostVector invert_norm(const NormStats& stats, std::span<const double> norm_out,
                       const Problem& p) {
  if (norm_out.size() != stats.out_mean.size())
    throw std::invalid_argument("invert_norm: unseen vector length");
  auto div = lower_bound_divisors(stats.accel, p);
  int t = tensor_count(p.kind);
  CostVector cv;
  cv.kind = p.kind;
  cv.energy.resize(kNumLevels * t);
  std::vector<double> raw(norm_out.size());
  for (size_t i = 0; i < raw.size(); ++i)
    raw[i] = (norm_out[i] * stats.out_std[i] + stats.out_mean[i]) * div[i];
  for (int i = 0; i < kNumLevels * t; ++i) cv.energy[i] = raw[i];
  cv.energy_total = raw[kNumLevels * t];
  cv.cycles = raw[kNumLevels * t + 1];
  cv.utilization = raw[kNumLevels * t + 2];
  cv.edp = cv.energy_total * cv.cycles / stats.accel.clock_hz;
  return cv;
}

NormalizedData normalize_dataset(const NormStats& stats, const Dataset& ds) {
  NormalizedData out;
  for (const auto& r : ds.records) {
    auto [x, y] = apply_norm(stats, ds, r);
    if (r.split == 0) {
      out.x_train.push_back(std::move(x));
      out.y_train.push_back(std::move(y));
    } else {
      out.x_test.push_back(std::move(x));
      out.y_test.push_back(std::move(y));
    }
  }
  return out;
}

}  // namespace mapsearch
