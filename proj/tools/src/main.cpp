// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/cli/cli.hpp"

int main(int argc, char** argv) { return axtrack::cli::cli_main(argc, argv); }
