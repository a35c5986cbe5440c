// Copyright 2026 The CrashScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Keyboard-aware text input generation.
//
// Every keyboard type has an alphabet of "expected" characters and a
// disjoint set of allowable special characters. Expected text uses only the
// former; unexpected text always contains at least one of the latter.

#include <cstdint>
#include <string>
#include <string_view>

#include "crashscope/domain.hpp"

namespace crashscope {

// splitmix64 stream. Cheap, seedable from any 64-bit value, and simple
// enough to re-derive in other languages for golden checks.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi].
  int between(int lo, int hi);

 private:
  std::uint64_t state_;
};

struct KeyboardAlphabet {
  KeyboardType type;
  std::string_view expected_chars;
  std::string_view special_chars;
  int min_length;
  int max_length;
};

const KeyboardAlphabet& alphabetFor(KeyboardType type);

std::string expectedText(KeyboardType type, SplitMix64& rng);
std::string unexpectedText(KeyboardType type, SplitMix64& rng);

// Any character from the keyboard's special set.
bool containsSpecial(KeyboardType type, std::string_view text);
// Every character drawn from the keyboard's expected set.
bool matchesKeyboard(KeyboardType type, std::string_view text);

}  // namespace crashscope
