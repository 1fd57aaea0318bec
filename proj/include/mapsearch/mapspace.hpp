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

#ifndef MAPSEARCH_MAPSPACE_HPP
#define MAPSEARCH_MAPSPACE_HPP

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mapsearch/accel.hpp"
#include "mapsearch/workload.hpp"

namespace mapsearch {

// A complete assignment of the accelerator's programmable attributes.
//
// Tiles range over the iteration space: per level and per dim, the number of
// iteration points along that dim whose working set is resident at the level.
// For convolution sliding dims the iteration extent is the output extent
// (X = W-R+1), so an input tile along such a dim spans tile + window - 1
// words. tile[kDram] always equals the full iteration extents; each level's
// tile divides the level above, and par divides the L1 tile (the spatial
// split across PEs). Allocations are stored as integer bank counts; the
// fraction of the level granted to a tensor is banks / num_banks.
struct Mapping {
  std::array<std::vector<int64_t>, kNumLevels> tile;
  std::vector<int64_t> par;                            // per dim, >= 1
  std::array<std::vector<int>, kNumLevels> order;      // per level, dims outermost-first
  std::array<std::vector<int>, kNumOnChip> alloc;      // per on-chip level, banks per tensor

  int64_t par_product() const;
  bool operator==(const Mapping&) const = default;
};

struct SpaceSize {
  bool exact = false;
  uint64_t count = 0;         // valid only when exact
  double log10_bound = 0.0;   // product-form upper bound, always filled
};

// The map space of (problem, accelerator): sampling, membership, the flat
// real-vector encoding, and projection of arbitrary vectors onto the space.
//
// Flat vector schema (length = 2*D + ... fixed per kind; conv1d 22,
// convlayer 62, mttkrp 40):
//   [ p_id dims (D) |
//     tile factors, level-major (3*D): tile[dram]/tile[l2] per dim,
//       tile[l2]/tile[l1] per dim, tile[l1] per dim |
//     parallel degrees (D) |
//     loop-order scores, level-major (3*D): permutation = descending argsort,
//       ties broken by ascending dim index |
//     alloc fractions (2*T): L2 banks/num_banks per tensor, then L1 ]
class MapSpace {
 public:
  MapSpace(Problem problem, AcceleratorConfig accel);

  const Problem& problem() const { return problem_; }
  const AcceleratorConfig& accel() const { return accel_; }
  int dims() const { return dims_; }
  int tensors() const { return tensors_; }
  int64_t extent(int dim) const { return extents_[dim]; }
  std::span<const int64_t> extents() const { return extents_; }

  size_t pid_len() const { return problem_.dims.size(); }
  size_t flat_len() const;

  // Uniform over the valid space: uniform proposals over the structured
  // attribute domains, rejected on validity. Throws EmptySpaceError after
  // kRejectionBudget failed proposals.
  static constexpr uint64_t kRejectionBudget = 1000000;
  Mapping get_mapping(std::mt19937_64& rng) const;
  Mapping get_mapping_seeded(uint64_t seed) const;

  bool is_member(const Mapping& m) const;

  std::vector<double> encode(const Mapping& m) const;
  Mapping decode(std::span<const double> v) const;  // may yield an invalid Mapping

  // Per-attribute repair onto the valid space: tile chains round to the
  // nearest divisor chain in log space, parallel degrees clamp largest-first
  // until they fit the PE array, order scores argsort, allocations clamp,
  // renormalize and round down to bank granularity, and tensors that no
  // longer fit get spare banks and then shrink their largest tile.
  // Idempotent; a fixed point on valid encodings.
  Mapping get_projection(std::span<const double> v) const;

  SpaceSize space_size(uint64_t cap = 10000000) const;

  // Tile footprint of `tensor` at a level. For L1 this is the per-PE shard
  // (the L1 tile divided by the spatial split), which is what the private
  // buffer capacity check sees.
  int64_t tile_footprint(const Mapping& m, MemLevel level, int tensor) const;

  // Line-oriented text record (key=value per attribute); files of records
  // start with kRecordHeader.
  static constexpr const char* kRecordHeader = "# mapping v1";
  std::string to_record(const Mapping& m) const;
  Mapping parse_record(std::string_view line) const;

  // Attribute-group resampling used by the local-search baselines:
  // 0 = one dim's tile chain, 1 = one parallel degree, 2 = one order swap,
  // 3 = one alloc cell. The result is not repaired; run it through
  // encode/get_projection to restore validity.
  void resample_group(Mapping& m, int group, std::mt19937_64& rng) const;
  static constexpr int kNumAttrGroups = 4;

  // Enumerated (tile_l2, tile_l1, par) chains for one dim, ascending.
  std::span<const std::array<int64_t, 3>> chains(int dim) const { return chains_[dim]; }

 private:
  Mapping propose(std::mt19937_64& rng) const;
  void capacity_repair(Mapping& m) const;

  Problem problem_;
  AcceleratorConfig accel_;
  int dims_;
  int tensors_;
  std::vector<int64_t> extents_;
  std::vector<std::vector<std::array<int64_t, 3>>> chains_;  // per dim
};

std::vector<int64_t> divisors(int64_t n);  // ascending

}  // namespace mapsearch

#endif  // MAPSEARCH_MAPSPACE_HPP
