// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tube dumps: root/tube_XXXX/ holds t%04d.pgm per frame (mask > 0.5 is
// white) and a `meta` file of `key = value` lines with class_id, track_id,
// span and, for predictions, class_probs.

#pragma once

#include <filesystem>
#include <vector>

#include "axtrack/clip_segmenter.hpp"
#include "axtrack/evaluation.hpp"

namespace axtrack::cli {

void write_tubes(const std::filesystem::path& root, const std::vector<Tube>& tubes);
void write_ground_truth(const std::filesystem::path& root, const GroundTruthSet& gt);

// Tube directories are read in name order. IoError on missing or malformed
// files, DimensionError when frame sizes disagree.
std::vector<Tube> read_tubes(const std::filesystem::path& root);
GroundTruthSet read_ground_truth(const std::filesystem::path& root);

}  // namespace axtrack::cli
