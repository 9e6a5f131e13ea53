// Copyright 2026 The leakscope Authors
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

#ifndef LEAKSCOPE_SRC_FORMAT_UTIL_HPP_
#define LEAKSCOPE_SRC_FORMAT_UTIL_HPP_

#include <charconv>
#include <string>

namespace leakscope::internal {

// Shortest decimal form that round-trips.
inline void AppendDouble(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline std::string FormatDouble(double v) {
  std::string s;
  AppendDouble(s, v);
  return s;
}

}  // namespace leakscope::internal

#endif  // LEAKSCOPE_SRC_FORMAT_UTIL_HPP_
