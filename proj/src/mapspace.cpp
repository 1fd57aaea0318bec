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

#include "mapsearch/mapspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "mapsearch/common.hpp"

namespace mapsearch {

std::vector<int64_t> divisors(int64_t n) {
  std::vector<int64_t> lo, hi;
  for (int64_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      lo.push_back(d);
      if (d != n / d) hi.push_back(n / d);
    }
  }
  lo.insert(lo.end(), hi.rbegin(), hi.rend());
  return lo;
}

int64_t Mapping::par_product() const {
  int64_t p = 1;
  for (int64_t x : par) p *= x;
  return p;
}

MapSpace::MapSpace(Problem problem, AcceleratorConfig accel)
    : problem_(std::move(problem)), accel_(accel) {
  problem_.validate();
  accel_.validate();
  dims_ = dim_count(problem_.kind);
  tensors_ = tensor_count(problem_.kind);
  extents_ = iter_extents(problem_);
  chains_.resize(dims_);
  for (int d = 0; d < dims_; ++d) {
    for (int64_t a : divisors(extents_[d]))
      for (int64_t b : divisors(a))
        for (int64_t c : divisors(b)) chains_[d].push_back({a, b, c});
  }
}

size_t MapSpace::flat_len() const {
  return pid_len() + 3 * dims_ + dims_ + 3 * dims_ + kNumOnChip * tensors_;
}

Mapping MapSpace::propose(std::mt19937_64& rng) const {
  Mapping m;
  for (int l = 0; l < kNumLevels; ++l) m.tile[l].resize(dims_);
  m.par.resize(dims_);
  for (int d = 0; d < dims_; ++d) {
    m.tile[kDram][d] = extents_[d];
    const auto& cs = chains_[d];
    const auto& c = cs[std::uniform_int_distribution<size_t>(0, cs.size() - 1)(rng)];
    m.tile[kL2][d] = c[0];
    m.tile[kL1][d] = c[1];
    m.par[d] = c[2];
  }
  for (int l = 0; l < kNumLevels; ++l) {
    m.order[l].resize(dims_);
    std::iota(m.order[l].begin(), m.order[l].end(), 0);
    std::shuffle(m.order[l].begin(), m.order[l].end(), rng);
  }
  for (int l = 0; l < kNumOnChip; ++l) {
    int64_t banks = accel_.num_banks[l];
    std::uniform_int_distribution<int64_t> bank_dist(0, banks);
    m.alloc[l].resize(tensors_);
    int64_t sum;
    do {
      sum = 0;
      for (int t = 0; t < tensors_; ++t) {
        m.alloc[l][t] = static_cast<int>(bank_dist(rng));
        sum += m.alloc[l][t];
      }
    } while (sum > banks);
  }
  return m;
}

Mapping MapSpace::get_mapping(std::mt19937_64& rng) const {
  for (uint64_t i = 0; i < kRejectionBudget; ++i) {
    Mapping m = propose(rng);
    if (is_member(m)) return m;
  }
  throw EmptySpaceError("get_mapping: no valid mapping found for " + problem_.to_string() +
                        " within the rejection budget");
}

Mapping MapSpace::get_mapping_seeded(uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return get_mapping(rng);
}

int64_t MapSpace::tile_footprint(const Mapping& m, MemLevel level, int tensor) const {
  if (level == kL1) {
    // Per-PE shard of the L1 tile.
    std::vector<int64_t> shard(dims_);
    for (int d = 0; d < dims_; ++d) shard[d] = m.tile[kL1][d] / m.par[d];
    return tensor_tile_footprint(problem_.kind, tensor, shard);
  }
  return tensor_tile_footprint(problem_.kind, tensor, m.tile[level]);
}

bool MapSpace::is_member(const Mapping& m) const {
  for (int l = 0; l < kNumLevels; ++l)
    if (static_cast<int>(m.tile[l].size()) != dims_ ||
        static_cast<int>(m.order[l].size()) != dims_)
      return false;
  if (static_cast<int>(m.par.size()) != dims_) return false;
  for (int l = 0; l < kNumOnChip; ++l)
    if (static_cast<int>(m.alloc[l].size()) != tensors_) return false;

  for (int d = 0; d < dims_; ++d) {
    if (m.tile[kDram][d] != extents_[d]) return false;
    if (m.tile[kL2][d] < 1 || m.tile[kL1][d] < 1 || m.par[d] < 1) return false;
    if (m.tile[kDram][d] % m.tile[kL2][d] != 0) return false;
    if (m.tile[kL2][d] % m.tile[kL1][d] != 0) return false;
    if (m.tile[kL1][d] % m.par[d] != 0) return false;
  }
  if (m.par_product() > accel_.num_pes) return false;

  for (int l = 0; l < kNumLevels; ++l) {
    std::vector<char> seen(dims_, 0);
    for (int d : m.order[l]) {
      if (d < 0 || d >= dims_ || seen[d]) return false;
      seen[d] = 1;
    }
  }

  for (int l = 0; l < kNumOnChip; ++l) {
    int64_t sum = 0;
    for (int t = 0; t < tensors_; ++t) {
      if (m.alloc[l][t] < 0) return false;
      sum += m.alloc[l][t];
    }
    if (sum > accel_.num_banks[l]) return false;
  }

  // Every tensor's resident tile must fit its bank allocation.
  for (int l = 0; l < kNumOnChip; ++l) {
    MemLevel level = l == 0 ? kL2 : kL1;
    for (int t = 0; t < tensors_; ++t) {
      int64_t fp = tile_footprint(m, level, t);
      if (fp * accel_.num_banks[l] > static_cast<int64_t>(m.alloc[l][t]) * accel_.capacity_words[l])
        return false;
    }
  }
  return true;
}

std::vector<double> MapSpace::encode(const Mapping& m) const {
  std::vector<double> v;
  v.reserve(flat_len());
  for (int64_t d : problem_.dims) v.push_back(static_cast<double>(d));
  for (int d = 0; d < dims_; ++d)
    v.push_back(static_cast<double>(m.tile[kDram][d]) / static_cast<double>(m.tile[kL2][d]));
  for (int d = 0; d < dims_; ++d)
    v.push_back(static_cast<double>(m.tile[kL2][d]) / static_cast<double>(m.tile[kL1][d]));
  for (int d = 0; d < dims_; ++d) v.push_back(static_cast<double>(m.tile[kL1][d]));
  for (int d = 0; d < dims_; ++d) v.push_back(static_cast<double>(m.par[d]));
  for (int l = 0; l < kNumLevels; ++l) {
    std::vector<double> score(dims_);
    for (int pos = 0; pos < dims_; ++pos)
      score[m.order[l][pos]] = static_cast<double>(dims_ - 1 - pos) / static_cast<double>(dims_ - 1);
    for (int d = 0; d < dims_; ++d) v.push_back(score[d]);
  }
  for (int l = 0; l < kNumOnChip; ++l)
    for (int t = 0; t < tensors_; ++t)
      v.push_back(static_cast<double>(m.alloc[l][t]) / static_cast<double>(accel_.num_banks[l]));
  return v;
}

namespace {

// Descending argsort; ties broken by ascending dim index.
std::vector<int> order_from_scores(std::span<const double> scores) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

int64_t clamp_round(double x, int64_t lo) {
  if (!std::isfinite(x)) return lo;
  double r = std::llround(std::min(x, 9.0e17));
  return std::max<int64_t>(lo, static_cast<int64_t>(r));
}

// Positive, finite value for log-space targets.
double sanitize_pos(double x) {
  if (std::isnan(x)) return 1e-6;
  if (x > 1e18) return 1e18;
  if (x < 1e-6) return 1e-6;
  return x;
}

}  // namespace

Mapping MapSpace::decode(std::span<const double> v) const {
  if (v.size() != flat_len()) throw std::invalid_argument("decode: flat vector length mismatch");
  Mapping m;
  const int D = dims_;
  const double* f1 = v.data() + pid_len();
  const double* f2 = f1 + D;
  const double* f3 = f2 + D;
  const double* pp = f3 + D;
  const double* scores = pp + D;
  const double* alloc = scores + 3 * D;
  for (int l = 0; l < kNumLevels; ++l) m.tile[l].resize(D);
  m.par.resize(D);
  for (int d = 0; d < D; ++d) {
    m.tile[kL1][d] = clamp_round(f3[d], 1);
    m.tile[kL2][d] = clamp_round(f2[d] * f3[d], 1);
    m.tile[kDram][d] = clamp_round(f1[d] * f2[d] * f3[d], 1);
    m.par[d] = clamp_round(pp[d], 1);
  }
  for (int l = 0; l < kNumLevels; ++l)
    m.order[l] = order_from_scores(std::span(scores + l * D, static_cast<size_t>(D)));
  for (int l = 0; l < kNumOnChip; ++l) {
    m.alloc[l].resize(tensors_);
    for (int t = 0; t < tensors_; ++t) {
      double b = alloc[l * tensors_ + t] * static_cast<double>(accel_.num_banks[l]);
      double r = std::isfinite(b) ? std::llround(std::clamp(b, -1e9, 1e9)) : 0.0;
      m.alloc[l][t] = static_cast<int>(r);
    }
  }
  return m;
}

void MapSpace::capacity_repair(Mapping& m) const {
  for (int l = 0; l < kNumOnChip; ++l) {
    MemLevel level = l == 0 ? kL2 : kL1;
    int64_t banks = accel_.num_banks[l];
    int64_t cap = accel_.capacity_words[l];
    auto need = [&](int t) {
      int64_t fp = tile_footprint(m, level, t);
      return (fp * banks + cap - 1) / cap;
    };
    auto shrink = [&](int t) {
      int pick = -1;
      for (int d = 0; d < dims_; ++d) {
        if (!tensor_uses_dim(problem_.kind, t, d)) continue;
        if (m.tile[level][d] <= 1) continue;
        if (pick < 0 || m.tile[level][d] > m.tile[level][pick]) pick = d;
      }
      if (pick < 0) return false;
      int64_t parent = level == kL2 ? m.tile[kDram][pick] : m.tile[kL2][pick];
      auto divs = divisors(parent);
      auto it = std::lower_bound(divs.begin(), divs.end(), m.tile[level][pick]);
      m.tile[level][pick] = *(it - 1);
      if (level == kL2)
        m.tile[kL1][pick] = std::gcd(m.tile[kL1][pick], m.tile[kL2][pick]);
      m.par[pick] = std::gcd(m.par[pick], m.tile[kL1][pick]);
      return true;
    };

    // Cover each deficit from spare banks first, then from tensors holding
    // more than they need, and shrink the deficient tensor's largest tile
    // once no banks can move.
    while (true) {
      int worst = -1;
      int64_t worst_deficit = 0;
      int64_t allocated = 0;
      for (int t = 0; t < tensors_; ++t) {
        allocated += m.alloc[l][t];
        int64_t deficit = need(t) - m.alloc[l][t];
        if (deficit > worst_deficit) {
          worst_deficit = deficit;
          worst = t;
        }
      }
      if (worst < 0) break;
      if (allocated < banks) {
        ++m.alloc[l][worst];
        continue;
      }
      int donor = -1;
      int64_t surplus = 0;
      for (int t = 0; t < tensors_; ++t) {
        int64_t s = static_cast<int64_t>(m.alloc[l][t]) - need(t);
        if (s > surplus) {
          surplus = s;
          donor = t;
        }
      }
      if (donor >= 0) {
        --m.alloc[l][donor];
        ++m.alloc[l][worst];
        continue;
      }
      if (!shrink(worst))
        throw EmptySpaceError("get_projection: tensor cannot fit any allocation for " +
                              problem_.to_string());
    }
  }
}

Mapping MapSpace::get_projection(std::span<const double> v) const {
  if (v.size() != flat_len()) throw std::invalid_argument("get_projection: flat vector length mismatch");
  Mapping m;
  const int D = dims_;
  const double* f1 = v.data() + pid_len();
  const double* f2 = f1 + D;
  const double* f3 = f2 + D;
  const double* pp = f3 + D;
  const double* scores = pp + D;
  const double* alloc = scores + 3 * D;

  for (int l = 0; l < kNumLevels; ++l) m.tile[l].resize(D);
  m.par.resize(D);

  // Tiles: per dim, rescale the factor chain so its product matches the full
  // extent, then take the divisor chain nearest in log space.
  for (int d = 0; d < D; ++d) {
    double full = static_cast<double>(extents_[d]);
    double a = sanitize_pos(f1[d]), b = sanitize_pos(f2[d]), c = sanitize_pos(f3[d]);
    double scale = full / (a * b * c);
    double t2 = std::log(std::clamp(b * c * scale, 1.0, full));
    double t1 = std::log(std::clamp(c * scale, 1.0, full));
    double best = -1;
    int64_t best_l2 = 1, best_l1 = 1;
    int64_t prev_a = -1, prev_b = -1;
    for (const auto& ch : chains_[d]) {
      if (ch[0] == prev_a && ch[1] == prev_b) continue;  // same tile pair, differing par
      prev_a = ch[0];
      prev_b = ch[1];
      double dist = std::abs(std::log(static_cast<double>(ch[0])) - t2) +
                    std::abs(std::log(static_cast<double>(ch[1])) - t1);
      if (best < 0 || dist < best) {
        best = dist;
        best_l2 = ch[0];
        best_l1 = ch[1];
      }
    }
    m.tile[kDram][d] = extents_[d];
    m.tile[kL2][d] = best_l2;
    m.tile[kL1][d] = best_l1;
  }

  // Parallelism: nearest divisor in log space, then clamp largest-first.
  for (int d = 0; d < D; ++d) {
    double target = std::log(sanitize_pos(pp[d]));
    double best = -1;
    int64_t pick = 1;
    for (int64_t c : divisors(m.tile[kL1][d])) {
      double dist = std::abs(std::log(static_cast<double>(c)) - target);
      if (best < 0 || dist < best) {
        best = dist;
        pick = c;
      }
    }
    m.par[d] = pick;
  }
  while (m.par_product() > accel_.num_pes) {
    int pick = 0;
    for (int d = 1; d < D; ++d)
      if (m.par[d] > m.par[pick]) pick = d;
    auto divs = divisors(m.tile[kL1][pick]);
    auto it = std::lower_bound(divs.begin(), divs.end(), m.par[pick]);
    m.par[pick] = *(it - 1);
  }

  for (int l = 0; l < kNumLevels; ++l)
    m.order[l] = order_from_scores(std::span(scores + l * D, static_cast<size_t>(D)));

  // Allocations: clamp, renormalize an overflowing sum, round down to banks.
  for (int l = 0; l < kNumOnChip; ++l) {
    int64_t banks = accel_.num_banks[l];
    m.alloc[l].resize(tensors_);
    std::vector<double> fr(tensors_);
    double sum = 0;
    for (int t = 0; t < tensors_; ++t) {
      double x = alloc[l * tensors_ + t];
      fr[t] = std::isfinite(x) ? std::clamp(x, 0.0, 1.0) : 0.0;
      sum += fr[t];
    }
    if (sum > 1.0)
      for (auto& x : fr) x /= sum;
    for (int t = 0; t < tensors_; ++t)
      m.alloc[l][t] = static_cast<int>(std::floor(fr[t] * static_cast<double>(banks) + 1e-9));
  }

  capacity_repair(m);
  return m;
}

SpaceSize MapSpace::space_size(uint64_t cap) const {
  SpaceSize out;
  const int D = dims_;
  double log_perms = 0;
  for (int i = 2; i <= D; ++i) log_perms += std::log10(static_cast<double>(i));

  auto stars_bars = [](int64_t slack, int t) -> uint64_t {
    // Number of nonnegative integer t-vectors with sum <= slack.
    if (slack < 0) return 0;
    unsigned long long v = 1;
    for (int i = 1; i <= t; ++i) v = v * static_cast<unsigned long long>(slack + i) / i;
    return v;
  };

  out.log10_bound = kNumLevels * log_perms;
  for (int d = 0; d < D; ++d) out.log10_bound += std::log10(static_cast<double>(chains_[d].size()));
  for (int l = 0; l < kNumOnChip; ++l)
    out.log10_bound += std::log10(static_cast<double>(stars_bars(accel_.num_banks[l], tensors_)));

  if (out.log10_bound > std::log10(static_cast<double>(cap))) return out;

  // Exact enumeration over chain joints; allocations and orders counted in
  // closed form (orders never affect validity, allocations factor per level).
  std::vector<size_t> idx(D, 0);
  uint64_t total = 0;
  Mapping m;
  for (int l = 0; l < kNumLevels; ++l) m.tile[l].assign(D, 1);
  m.par.assign(D, 1);
  for (int d = 0; d < D; ++d) m.tile[kDram][d] = extents_[d];
  while (true) {
    int64_t par_prod = 1;
    for (int d = 0; d < D; ++d) {
      const auto& c = chains_[d][idx[d]];
      m.tile[kL2][d] = c[0];
      m.tile[kL1][d] = c[1];
      m.par[d] = c[2];
      par_prod *= c[2];
    }
    if (par_prod <= accel_.num_pes) {
      uint64_t combo = 1;
      for (int l = 0; l < kNumOnChip && combo; ++l) {
        MemLevel level = l == 0 ? kL2 : kL1;
        int64_t slack = accel_.num_banks[l];
        for (int t = 0; t < tensors_; ++t) {
          int64_t fp = tile_footprint(m, level, t);
          slack -= (fp * accel_.num_banks[l] + accel_.capacity_words[l] - 1) /
                   accel_.capacity_words[l];
        }
        combo *= stars_bars(slack, tensors_);
      }
      total += combo;
    }
    int d = 0;
    while (d < D && ++idx[d] == chains_[d].size()) idx[d++] = 0;
    if (d == D) break;
  }
  uint64_t perms = 1;
  for (int i = 2; i <= D; ++i) perms *= static_cast<uint64_t>(i);
  out.exact = true;
  out.count = total;
  for (int l = 0; l < kNumLevels; ++l) out.count *= perms;
  return out;
}

std::string MapSpace::to_record(const Mapping& m) const {
  std::ostringstream os;
  auto join = [&os](const auto& v) {
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  };
  os << "kind=" << kind_name(problem_.kind) << " dims=";
  join(problem_.dims);
  os << " tile_l2=";
  join(m.tile[kL2]);
  os << " tile_l1=";
  join(m.tile[kL1]);
  os << " par=";
  join(m.par);
  auto names = dim_names(problem_.kind);
  const char* level_tag[] = {"dram", "l2", "l1"};
  for (int l = 0; l < kNumLevels; ++l) {
    os << " order_" << level_tag[l] << "=";
    for (int pos = 0; pos < dims_; ++pos) os << (pos ? ">" : "") << names[m.order[l][pos]];
  }
  for (int l = 0; l < kNumOnChip; ++l) {
    os << " alloc_" << (l == 0 ? "l2" : "l1") << "=";
    join(m.alloc[l]);
  }
  return os.str();
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    parts.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

}  // namespace

Mapping MapSpace::parse_record(std::string_view line) const {
  Mapping m;
  for (int l = 0; l < kNumLevels; ++l) {
    m.tile[l].assign(dims_, 1);
    m.order[l].resize(dims_);
  }
  for (int d = 0; d < dims_; ++d) m.tile[kDram][d] = extents_[d];
  m.par.assign(dims_, 1);
  for (int l = 0; l < kNumOnChip; ++l) m.alloc[l].assign(tensors_, 0);

  auto names = dim_names(problem_.kind);
  auto dim_index = [&](std::string_view n) {
    for (int d = 0; d < dims_; ++d)
      if (n == names[d]) return d;
    throw std::invalid_argument("mapping record: unknown dim name " + std::string(n));
  };

  std::istringstream is{std::string(line)};
  std::string field;
  while (is >> field) {
    size_t eq = field.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("mapping record: bad field " + field);
    std::string key = field.substr(0, eq);
    std::string val = field.substr(eq + 1);
    if (key == "kind") {
      if (kind_from_name(val) != problem_.kind)
        throw std::invalid_argument("mapping record: kind mismatch");
    } else if (key == "dims") {
      auto parts = split(val, ',');
      if (parts.size() != problem_.dims.size())
        throw std::invalid_argument("mapping record: dims mismatch");
      for (size_t i = 0; i < parts.size(); ++i)
        if (std::stoll(parts[i]) != problem_.dims[i])
          throw std::invalid_argument("mapping record: dims mismatch");
    } else if (key == "tile_l2" || key == "tile_l1" || key == "par") {
      auto parts = split(val, ',');
      if (static_cast<int>(parts.size()) != dims_)
        throw std::invalid_argument("mapping record: bad " + key);
      for (int d = 0; d < dims_; ++d) {
        int64_t x = std::stoll(parts[d]);
        if (key == "tile_l2") m.tile[kL2][d] = x;
        else if (key == "tile_l1") m.tile[kL1][d] = x;
        else m.par[d] = x;
      }
    } else if (key.rfind("order_", 0) == 0) {
      int l = key == "order_dram" ? 0 : key == "order_l2" ? 1 : key == "order_l1" ? 2 : -1;
      if (l < 0) throw std::invalid_argument("mapping record: bad key " + key);
      auto parts = split(val, '>');
      if (static_cast<int>(parts.size()) != dims_)
        throw std::invalid_argument("mapping record: bad order");
      for (int pos = 0; pos < dims_; ++pos) m.order[l][pos] = dim_index(parts[pos]);
    } else if (key == "alloc_l2" || key == "alloc_l1") {
      int l = key == "alloc_l2" ? 0 : 1;
      auto parts = split(val, ',');
      if (static_cast<int>(parts.size()) != tensors_)
        throw std::invalid_argument("mapping record: bad alloc");
      for (int t = 0; t < tensors_; ++t) m.alloc[l][t] = std::stoi(parts[t]);
    } else {
      throw std::invalid_argument("mapping record: unknown key " + key);
    }
  }
  return m;
}

void MapSpace::resample_group(Mapping& m, int group, std::mt19937_64& rng) const {
  std::uniform_int_distribution<int> dim_pick(0, dims_ - 1);
  switch (group) {
    case 0: {
      int d = dim_pick(rng);
      const auto& cs = chains_[d];
      const auto& c = cs[std::uniform_int_distribution<size_t>(0, cs.size() - 1)(rng)];
      m.tile[kL2][d] = c[0];
      m.tile[kL1][d] = c[1];
      m.par[d] = c[2];
      break;
    }
    case 1: {
      int d = dim_pick(rng);
      auto divs = divisors(m.tile[kL1][d]);
      m.par[d] = divs[std::uniform_int_distribution<size_t>(0, divs.size() - 1)(rng)];
      break;
    }
    case 2: {
      int l = std::uniform_int_distribution<int>(0, kNumLevels - 1)(rng);
      int i = dim_pick(rng);
      int j = (i + 1 + std::uniform_int_distribution<int>(0, dims_ - 2)(rng)) % dims_;
      std::swap(m.order[l][i], m.order[l][j]);
      break;
    }
    case 3: {
      int l = std::uniform_int_distribution<int>(0, kNumOnChip - 1)(rng);
      int t = std::uniform_int_distribution<int>(0, tensors_ - 1)(rng);
      m.alloc[l][t] = static_cast<int>(
          std::uniform_int_distribution<int64_t>(0, accel_.num_banks[l])(rng));
      break;
    }
    default:
      throw std::invalid_argument("resample_group: bad group");
  }
}

}  // namespace mapsearch
