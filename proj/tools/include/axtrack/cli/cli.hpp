// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness: demo, bench, attn and eval subcommands.
// Exit codes: 0 success, 1 usage or validation error, 2 internal error.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace axtrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInternal = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace axtrack::cli
