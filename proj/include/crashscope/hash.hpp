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

#include <cstdint>
#include <string>
#include <string_view>

namespace crashscope {

// Name of the signature hash, persisted in the store header. Changing the
// algorithm invalidates every stored signature.
inline constexpr std::string_view kSignatureHashName = "fnv1a-128";

struct Hash128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  std::string hex() const;
  friend bool operator==(const Hash128&, const Hash128&) = default;
};

// Incremental FNV-1a over 128 bits.
class Fnv1a128 {
 public:
  Fnv1a128();
  Fnv1a128& update(std::string_view bytes);
  // Feeds the bytes followed by a 0x1f unit separator so that adjacent
  // fields cannot alias ("ab","c" vs "a","bc").
  Fnv1a128& field(std::string_view bytes);
  Hash128 digest() const;

 private:
  unsigned __int128 state_;
};

Hash128 fnv1a128(std::string_view bytes);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace crashscope
