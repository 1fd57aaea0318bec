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

#ifndef MAPSEARCH_ACCEL_HPP
#define MAPSEARCH_ACCEL_HPP

#include <cstdint>
#include <string_view>

namespace mapsearch {

// Three-level inclusive hierarchy: DRAM -> shared L2 -> per-PE L1 -> PEs.
enum MemLevel { kDram = 0, kL2 = 1, kL1 = 2 };
inline constexpr int kNumLevels = 3;

// On-chip levels are indexed 0 = L2, 1 = L1 where only those two apply
// (capacities, banks, allocations).
inline constexpr int kNumOnChip = 2;
inline int onchip_index(MemLevel level) { return level == kL2 ? 0 : 1; }

struct AcceleratorConfig {
  int64_t num_pes = 16;
  int64_t flops_per_pe = 1;  // MACs per cycle per PE
  double clock_hz = 1e9;
  int64_t capacity_words[kNumOnChip] = {16384, 2048};  // L2, L1 (L1 per PE)
  int64_t num_banks[kNumOnChip] = {8, 8};
  double energy_per_word[kNumLevels] = {200.0, 6.0, 1.0};  // pJ, DRAM/L2/L1
  double mac_energy = 0.5;                                 // pJ per MAC

  void validate() const;      // throws std::invalid_argument
  uint64_t fingerprint() const;

  static AcceleratorConfig desk();
  static AcceleratorConfig large();
  static AcceleratorConfig tiny_1pe();
  static AcceleratorConfig preset(std::string_view name);
};

}  // namespace mapsearch

#endif  // MAPSEARCH_ACCEL_HPP
