#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "neuronalg/error.hpp"
#include "neuronalg/pipeline.hpp"
#include "neuronalg/raster.hpp"

namespace nalg::eval {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);

// Zero denominators: IoU/F1 are 1 when tp = fp = fn = 0, sensitivity is 1
// when tp = fn = 0, specificity is 1 when tn = fp = 0, accuracy is 1 on an
// empty raster.
double iou(const Confusion& c);
double f1(const Confusion& c);
double accuracy(const Confusion& c);
double sensitivity(const Confusion& c);
double specificity(const Confusion& c);

enum class Metric { IoU, F1, Accuracy, Sensitivity, Specificity };
inline constexpr std::array<Metric, 5> kMetrics{Metric::IoU, Metric::F1, Metric::Accuracy,
                                                Metric::Sensitivity, Metric::Specificity};
const char* metric_name(Metric m) noexcept;
double metric_value(const Confusion& c, Metric m);

enum class DatasetKind { Neuroblastoma, NucleusSeg, Isbi2009 };
DatasetKind parse_dataset_kind(const std::string& name);
const char* dataset_name(DatasetKind kind) noexcept;

struct DatasetEntry {
  std::string id;  // file stem
  std::filesystem::path image_path;
  std::filesystem::path truth_path;
  GrayImage image;
  LabelMap truth_labels;
  BinaryMask truth;
};

struct DatasetIssue {
  std::filesystem::path path;
  ErrorCode code = ErrorCode::DatasetFormatError;
  std::string message;
};

struct Dataset {
  DatasetKind kind = DatasetKind::Neuroblastoma;
  std::vector<DatasetEntry> entries;  // sorted by id
  std::vector<DatasetIssue> issues;   // skipped entries
  std::vector<std::string> warnings;
};

// Layout: <root>/images/<stem>.<ext> with ground truth in
// <root>/ground_truth/<stem>.<ext>. Neuroblastoma truth is a text label
// matrix (<stem>.txt), falling back to a mask image; the other kinds use
// mask or label images. Nucleusseg images are reduced to their blue channel.
Dataset load_dataset(const std::filesystem::path& root, DatasetKind kind);

// Ground truth from a text label file or a mask/label image.
LabelMap load_truth(const std::filesystem::path& path);
// Text label file. Either a whitespace/comma separated integer matrix with
// one image row per line, or "x y label" triplets listing non-zero pixels.
// Lines starting with '#' are ignored. Triplet files need the frame size.
LabelMap parse_label_text(const std::string& text, std::optional<std::pair<int, int>> frame = {});

struct ImageScore {
  std::string id;
  Confusion confusion;
  double achieved_psnr = 0.0;
  bool non_converged = false;
};

struct LevelResult {
  double level_db = 0.0;
  std::vector<ImageScore> per_image;  // dataset order
  double mean(Metric m) const;        // unweighted per-image mean
};

struct MetricsReport {
  std::string dataset;
  std::vector<LevelResult> levels;
};

inline const std::vector<double> kNeuroblastomaLevels{100.0, 40.1, 32.7, 26.9, 21.1, 15.7};

struct SweepOptions {
  std::vector<double> levels = kNeuroblastomaLevels;
  std::uint64_t seed = 0;
  /// When set, one overlay PNG per (entry, level) is written here.
  std::optional<std::filesystem::path> overlay_dir;
};

// Noise seeds are derived from (seed, entry index, level index), so each
// cell of the sweep is reproducible on its own.
MetricsReport noise_sweep(const std::vector<DatasetEntry>& entries, const SweepOptions& opt,
                          const PipelineConfig& cfg, const std::string& dataset);

std::uint64_t cell_seed(std::uint64_t seed, std::size_t entry, std::size_t level);

// One CSV per metric (<prefix><metric>.csv) plus <prefix>report.json.
// Returns the written paths.
std::vector<std::filesystem::path> write_report(const MetricsReport& r,
                                                const std::filesystem::path& dir,
                                                const std::string& prefix = "");
std::string report_csv(const MetricsReport& r, Metric m);
std::string report_json(const MetricsReport& r);

}  // namespace nalg::eval
