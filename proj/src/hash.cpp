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

#include "crashscope/hash.hpp"

#include <array>

namespace crashscope {
namespace {

constexpr unsigned __int128 kOffset128 =
    (static_cast<unsigned __int128>(0x6c62272e07bb0142ULL) << 64) |
    0x62b821756295c58dULL;
constexpr unsigned __int128 kPrime128 =
    (static_cast<unsigned __int128>(0x0000000001000000ULL) << 64) |
    0x000000000000013bULL;

}  // namespace

std::string Hash128::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = kDigits[(hi >> (4 * i)) & 0xf];
    out[31 - i] = kDigits[(lo >> (4 * i)) & 0xf];
  }
  return out;
}

Fnv1a128::Fnv1a128() : state_(kOffset128) {}

Fnv1a128& Fnv1a128::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= kPrime128;
  }
  return *this;
}

Fnv1a128& Fnv1a128::field(std::string_view bytes) {
  update(bytes);
  return update(std::string_view("\x1f", 1));
}

Hash128 Fnv1a128::digest() const {
  return Hash128{static_cast<std::uint64_t>(state_ >> 64),
                 static_cast<std::uint64_t>(state_)};
}

Hash128 fnv1a128(std::string_view bytes) {
  return Fnv1a128().update(bytes).digest();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace crashscope
