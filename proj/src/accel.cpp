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

#include "mapsearch/accel.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

#include "mapsearch/common.hpp"

namespace mapsearch {

void AcceleratorConfig::validate() const {
  if (num_pes < 1 || flops_per_pe < 1) throw std::invalid_argument("accel: PE config must be positive");
  if (clock_hz <= 0) throw std::invalid_argument("accel: clock must be positive");
  for (int l = 0; l < kNumOnChip; ++l) {
    if (capacity_words[l] < 1 || num_banks[l] < 1)
      throw std::invalid_argument("accel: capacities and bank counts must be positive");
    if (capacity_words[l] < num_banks[l])
      throw std::invalid_argument("accel: capacity must be at least one word per bank");
  }
  for (double e : energy_per_word)
    if (e <= 0) throw std::invalid_argument("accel: energies must be positive");
  if (mac_energy <= 0) throw std::invalid_argument("accel: mac energy must be positive");
}

uint64_t AcceleratorConfig::fingerprint() const {
  std::ostringstream os;
  os << num_pes << "," << flops_per_pe << "," << clock_hz;
  for (int l = 0; l < kNumOnChip; ++l) os << "," << capacity_words[l] << "," << num_banks[l];
  for (double e : energy_per_word) os << "," << e;
  os << "," << mac_energy;
  return fnv1a_str(os.str());
}

AcceleratorConfig AcceleratorConfig::desk() {
  return AcceleratorConfig{};
}

AcceleratorConfig AcceleratorConfig::large() {
  AcceleratorConfig a;
  a.num_pes = 256;
  a.flops_per_pe = 1;
  a.clock_hz = 1e9;
  a.capacity_words[0] = 131072;  // 512 KB shared at 4 B/word
  a.capacity_words[1] = 16384;   // 64 KB private at 4 B/word
  a.num_banks[0] = 16;
  a.num_banks[1] = 8;
  return a;
}

AcceleratorConfig AcceleratorConfig::tiny_1pe() {
  AcceleratorConfig a;
  a.num_pes = 1;
  a.flops_per_pe = 1;
  a.capacity_words[0] = 1 << 20;
  a.capacity_words[1] = 1 << 20;
  a.num_banks[0] = 4;
  a.num_banks[1] = 4;
  return a;
}

AcceleratorConfig AcceleratorConfig::preset(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "large") return large();
  if (name == "tiny1pe") return tiny_1pe();
  throw std::invalid_argument("unknown accelerator preset: " + std::string(name));
}

}  // namespace mapsearch
