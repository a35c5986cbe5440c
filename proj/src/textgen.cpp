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

#include "crashscope/textgen.hpp"

#include <array>

namespace crashscope {
namespace {

constexpr std::string_view kLowerDigits = "abcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kLower = "abcdefghijklmnopqrstuvwxyz";

// Email shape: local@domain.tld
constexpr int kEmailPartMin = 3;
constexpr int kEmailPartMax = 8;
constexpr int kTldMin = 2;
constexpr int kTldMax = 3;

constexpr std::array<KeyboardAlphabet, 4> kAlphabets = {{
    {KeyboardType::Text,
     "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ",
     "!@#$%^&*()_+-=[]{};:'\",.<>/?\\|~`", 5, 12},
    {KeyboardType::Number, "0123456789", "+-.,#*", 1, 8},
    {KeyboardType::Phone, "0123456789", "+*#(),;-.", 7, 10},
    {KeyboardType::Email, "abcdefghijklmnopqrstuvwxyz0123456789@.",
     "!#$%&'*+/=?^_{}|~-", 2 * kEmailPartMin + kTldMin + 2,
     2 * kEmailPartMax + kTldMax + 2},
}};

void appendDrawn(std::string& out, std::string_view alphabet, int count,
                 SplitMix64& rng) {
  for (int i = 0; i < count; ++i) out += alphabet[rng.below(alphabet.size())];
}

}  // namespace

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  // Reject the low tail so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = next();
    if (x >= threshold) return x % n;
  }
}

int SplitMix64::between(int lo, int hi) {
  return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

const KeyboardAlphabet& alphabetFor(KeyboardType type) {
  return kAlphabets[static_cast<int>(type)];
}

std::string expectedText(KeyboardType type, SplitMix64& rng) {
  std::string out;
  if (type == KeyboardType::Email) {
    appendDrawn(out, kLowerDigits, rng.between(kEmailPartMin, kEmailPartMax),
                rng);
    out += '@';
    appendDrawn(out, kLowerDigits, rng.between(kEmailPartMin, kEmailPartMax),
                rng);
    out += '.';
    appendDrawn(out, kLower, rng.between(kTldMin, kTldMax), rng);
    return out;
  }
  const auto& a = alphabetFor(type);
  appendDrawn(out, a.expected_chars, rng.between(a.min_length, a.max_length),
              rng);
  return out;
}

std::string unexpectedText(KeyboardType type, SplitMix64& rng) {
  const auto& a = alphabetFor(type);
  const int length = rng.between(a.min_length, a.max_length);
  std::string pool(a.expected_chars);
  pool += a.special_chars;

  std::string out;
  appendDrawn(out, a.special_chars, 1, rng);
  appendDrawn(out, pool, length - 1, rng);
  return out;
}

bool containsSpecial(KeyboardType type, std::string_view text) {
  return text.find_first_of(alphabetFor(type).special_chars) !=
         std::string_view::npos;
}

bool matchesKeyboard(KeyboardType type, std::string_view text) {
  return text.find_first_not_of(alphabetFor(type).expected_chars) ==
         std::string_view::npos;
}

}  // namespace crashscope
