#pragma once

#include "faceprior/records.hpp"

#include <filesystem>
#include <vector>

namespace faceprior {

// JSON Lines corpora, one object per line, each carrying format_version.
//   shapes:    {format_version, id, expression_label, pose_deg, coords}
//   pairs:     {format_version, id, expression_label, pose_deg, frontal, posed}
//   sequences: {format_version, sequence_id, frame, expression_label, pose_deg,
//               measurement, ground_truth | null}

void write_shapes(const std::filesystem::path& path, const std::vector<ShapeRecord>& records);
std::vector<ShapeRecord> read_shapes(const std::filesystem::path& path);

void write_pairs(const std::filesystem::path& path, const std::vector<PairRecord>& records);
std::vector<PairRecord> read_pairs(const std::filesystem::path& path);

void write_sequences(const std::filesystem::path& path, const std::vector<ShapeSequence>& seqs);
/// Groups lines by sequence_id in order of first appearance; frames must be
/// numbered 0, 1, ... within each sequence.
std::vector<ShapeSequence> read_sequences(const std::filesystem::path& path);

}  // namespace faceprior
