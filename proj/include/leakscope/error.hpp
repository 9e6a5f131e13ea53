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

#ifndef LEAKSCOPE_ERROR_HPP_
#define LEAKSCOPE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace leakscope {

// Broad failure classes. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind {
  kValidation,  // malformed input or argument
  kProtocol,    // data is valid but violates a pairing/statistics precondition
  kIo,          // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}
inline Error ProtocolError(const std::string& what) {
  return Error(ErrorKind::kProtocol, what);
}
inline Error IoError(const std::string& what) {
  return Error(ErrorKind::kIo, what);
}

}  // namespace leakscope

#endif  // LEAKSCOPE_ERROR_HPP_
