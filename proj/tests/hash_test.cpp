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

#include <gtest/gtest.h>

#include "crashscope/hash.hpp"

namespace crashscope {
namespace {

// Published FNV-1a 128-bit test vectors.
TEST(Fnv1a128, KnownVectors) {
  EXPECT_EQ(fnv1a128("").hex(), "6c62272e07bb014262b821756295c58d");
  EXPECT_EQ(fnv1a128("a").hex(), "d228cb696f1a8caf78912b704e4a8964");
}

TEST(Fnv1a128, IncrementalMatchesOneShot) {
  Fnv1a128 h;
  h.update("foo").update("bar");
  EXPECT_EQ(h.digest(), fnv1a128("foobar"));
}

TEST(Fnv1a128, FieldsDoNotAlias) {
  EXPECT_NE(Fnv1a128().field("ab").field("c").digest(),
            Fnv1a128().field("a").field("bc").digest());
}

TEST(Fnv1a64, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace crashscope
