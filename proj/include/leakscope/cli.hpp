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

#ifndef LEAKSCOPE_CLI_HPP_
#define LEAKSCOPE_CLI_HPP_

#include <ostream>

#include "leakscope/error.hpp"

namespace leakscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitProtocol = 3;
inline constexpr int kExitIo = 4;

int ExitCodeFor(ErrorKind kind);

// Entry point of the `leakscope` tool with subcommands ingest, rank, audit,
// topk and simulate. Every subcommand accepts `--config FILE` with
// `key = value` lines naming long flags; flags given on the command line
// override the file. Returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace leakscope::cli

#endif  // LEAKSCOPE_CLI_HPP_
