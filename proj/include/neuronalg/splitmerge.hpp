#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuronalg/raster.hpp"
#include "neuronalg/watershed.hpp"

namespace nalg {

struct ClusterStats {
  /// areas[i] is the pixel count of label i + 1.
  std::vector<std::int64_t> areas;
  double a_avg = 0.0;
};

struct SplitPlan {
  std::int32_t label = 0;
  double r = 0.0;  // A_j / A_avg
  int k = 2;       // target number of subclusters
};

struct SplitMergeConfig {
  double split_factor = 1.5;
  double merge_factor = 0.2;
  int max_recursion_depth = 8;
  MarkerOptions markers;
};

/// Throws EmptyLabelMap when no label is present. Expects compact labels.
ClusterStats cluster_stats(const LabelMap& lm);

/// One plan per label with A_j > split_factor * a_avg; k = round-half-up(r), at least 2.
std::vector<SplitPlan> plan_splits(const ClusterStats& stats, double split_factor);

struct SplitOutcome {
  LabelMap labels;
  int pieces = 1;
  /// Non-empty when the region stopped early (e.g. "DegenerateHistogram").
  std::string note;
};

// Recursive Otsu bisection of one label's region. The largest fragment is
// split first; inside a fragment Otsu is re-applied to its bright class
// until the bright pixels fall apart into >= 2 components. Those components
// seed the new pieces and every other pixel of the fragment joins the
// geodesically nearest seed, so pieces stay connected and no pixel is lost.
// New pieces take ids above lm.max_label(); labels are not compacted.
SplitOutcome split_cluster_detailed(const GrayImage& img, const LabelMap& lm,
                                    const SplitPlan& plan, int max_depth = 8);
LabelMap split_cluster(const GrayImage& img, const LabelMap& lm, const SplitPlan& plan,
                       int max_depth = 8);

// Labels smaller than merge_factor * a_avg join the neighbour sharing the
// longest boundary. Small labels without neighbours go to background when
// drop_isolated is set and are kept otherwise. Result is normalized.
LabelMap merge_small(const LabelMap& lm, const ClusterStats& stats, double merge_factor,
                     bool drop_isolated = true);

// plan_splits -> split_cluster per plan -> stats refresh -> merge_small.
// Isolated small labels are kept, so the foreground pixel count is
// conserved exactly.
LabelMap split_merge_pass(const GrayImage& img, const LabelMap& lm, const SplitMergeConfig& cfg);

// Exact L2 distance transform, suppressed h-maxima as markers, flood of
// the negated distance restricted to the mask.
LabelMap distance_split(const BinaryMask& mask, const MarkerOptions& opt = {});

}  // namespace nalg
