#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neuronalg/agent.hpp"
#include "neuronalg/contour.hpp"
#include "neuronalg/error.hpp"
#include "neuronalg/imagecore.hpp"
#include "neuronalg/raster.hpp"
#include "neuronalg/splitmerge.hpp"

namespace nalg {

struct PipelineConfig {
  /// Used for colour inputs; grayscale inputs are always taken as they are.
  ChannelPolicy channel_policy = ChannelPolicy::Luminance;
  /// Smoothing cascade, each sigma expressed in units of sf.
  std::vector<double> smoothing_sigmas_sf{2.0, 4.0};
  SplitMergeConfig split_merge;
  AgentConfig agent;
  std::uint64_t seed = 0;
  /// Worker threads; 0 = one per logical core.
  int jobs = 0;
  bool keep_snapshots = false;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const std::string& text);
/// Complete document with every key, suitable for round-tripping.
std::string config_to_json(const PipelineConfig& cfg);

struct LabeledContour {
  std::int32_t label = 0;
  RadialContour contour;
};

struct StageSnapshots {
  GrayImage gray;      // 1: equalized, polarity-normalized
  GrayImage smoothed;  // 1: after the smoothing cascade
  BinaryMask foreground;
  LabelMap markers;    // 2
  LabelMap watershed;  // 2
  LabelMap split_merge;  // 3
  std::vector<LabeledContour> contours;  // 4
  std::vector<LabeledContour> refined;   // 5
  BinaryMask agent_masks;                // 5, union
  BinaryMask otsu_masks;                 // 6, union before the final split
};

struct ObjectReport {
  std::int32_t label = 0;  // stage-3 label
  int non_converged = 0;   // agents that hit the window cap
};

struct SegmentationResult {
  LabelMap labels;
  BinaryMask binary;
  bool empty_foreground = false;
  bool inverted = false;
  std::vector<ObjectReport> objects;
  std::optional<StageSnapshots> snapshots;

  int non_converged_objects() const;
};

SegmentationResult segment(const AnyImage& img, const PipelineConfig& cfg);

struct BatchItem {
  std::filesystem::path path;
  std::optional<SegmentationResult> result;
  ErrorCode error = ErrorCode::IoError;  // meaningful only without a result
  std::string message;

  bool ok() const { return result.has_value(); }
};

// Order-preserving; a failing item records its error and the rest proceed.
std::vector<BatchItem> segment_batch(const std::vector<std::filesystem::path>& paths,
                                     const PipelineConfig& cfg);

}  // namespace nalg
