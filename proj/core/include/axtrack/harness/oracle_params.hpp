// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hand-set parameters that stand in for training on synthetic videos.

#pragma once

#include "axtrack/cross_clip.hpp"
#include "axtrack/harness/config.hpp"
#include "axtrack/harness/synthetic.hpp"

namespace axtrack {

// Gain on the query and key projections of the oracle attention passes.
inline constexpr double kOracleKeyGain = 2.0;
// Object query = kOracleQueryGain * one-hot colour.
inline constexpr double kOracleQueryGain = 10.0;

// Every block is a residual whose output branch leaves the colour channels
// unchanged, while the attention weights are live: query and key
// projections are kOracleKeyGain * I, so a pixel attends to pixels of its
// own colour. When D has a spare channel per object and K >= 4, the first
// deformable step writes each colour's 4-neighbourhood occupancy into that
// colour's spare channel. Object i gets query row i and its class gets the
// class-head entry (colour, class) = 1; unused query rows are zero.
// Throws ConfigError when D or N or C is too small for the spec.
ModelParams build_oracle_params(const SyntheticVideoSpec& spec, const ModelConfig& cfg);

// Seeded random parameters of the configured sizes (gaussian initial
// queries with sigma 0.02).
ModelParams random_model_params(const ModelConfig& cfg, Rng& rng);

}  // namespace axtrack
