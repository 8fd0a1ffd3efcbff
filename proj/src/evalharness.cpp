#include "neuronalg/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "neuronalg/image_io.hpp"
#include "neuronalg/morphology.hpp"
#include "neuronalg/parallel.hpp"

namespace nalg::eval {

namespace fs = std::filesystem;

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<long long>> tokenize_rows(const std::string& text) {
  std::vector<std::vector<long long>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<long long> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) fail(ErrorCode::DatasetFormatError, "non-integer token '" + tok + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, fs::path> files_by_stem(const fs::path& dir, bool text_too,
                                              std::vector<std::string>& warnings) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    const bool text = p.extension() == ".txt";
    if (!(io::is_image_file(p) || (text_too && text))) continue;
    const std::string stem = p.stem().string();
    auto it = out.find(stem);
    if (it == out.end()) {
      out.emplace(stem, p);
    } else if (text) {
      // Text truth wins over an image with the same stem.
      it->second = p;
    } else if (it->second.extension() != ".txt") {
      warnings.push_back("duplicate stem " + stem + " in " + dir.string() + "; using " +
                         it->second.filename().string());
    }
  }
  return out;
}

GrayImage entry_image(const fs::path& path, DatasetKind kind) {
  const AnyImage img = io::load_image(path);
  if (const auto* g = std::get_if<GrayImage>(&img)) {
    if (kind == DatasetKind::NucleusSeg) {
      fail(ErrorCode::DatasetFormatError, "nucleusseg image is not RGB: " + path.string());
    }
    return *g;
  }
  const ChannelPolicy policy =
      kind == DatasetKind::NucleusSeg ? ChannelPolicy::Blue : ChannelPolicy::Luminance;
  return extract_intensity(img, policy);
}

std::string format_level(double db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", db);
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + p.string());
}

}  // namespace

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "confusion");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double iou(const Confusion& c) { return ratio(c.tp, c.tp + c.fp + c.fn); }
double f1(const Confusion& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
double accuracy(const Confusion& c) { return ratio(c.tp + c.tn, c.total()); }
double sensitivity(const Confusion& c) { return ratio(c.tp, c.tp + c.fn); }
double specificity(const Confusion& c) { return ratio(c.tn, c.tn + c.fp); }

const char* metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::IoU: return "iou";
    case Metric::F1: return "f1";
    case Metric::Accuracy: return "accuracy";
    case Metric::Sensitivity: return "sensitivity";
    case Metric::Specificity: return "specificity";
  }
  return "?";
}

double metric_value(const Confusion& c, Metric m) {
  switch (m) {
    case Metric::IoU: return iou(c);
    case Metric::F1: return f1(c);
    case Metric::Accuracy: return accuracy(c);
    case Metric::Sensitivity: return sensitivity(c);
    case Metric::Specificity: return specificity(c);
  }
  return 0.0;
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "neuroblastoma") return DatasetKind::Neuroblastoma;
  if (name == "nucleusseg") return DatasetKind::NucleusSeg;
  if (name == "isbi2009") return DatasetKind::Isbi2009;
  fail(ErrorCode::InvalidParameter, "unknown dataset kind '" + name + "'");
}

const char* dataset_name(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::Neuroblastoma: return "neuroblastoma";
    case DatasetKind::NucleusSeg: return "nucleusseg";
    case DatasetKind::Isbi2009: return "isbi2009";
  }
  return "?";
}

LabelMap parse_label_text(const std::string& text, std::optional<std::pair<int, int>> frame) {
  const auto rows = tokenize_rows(text);
  if (rows.empty()) fail(ErrorCode::DatasetFormatError, "label text has no rows");
  const std::size_t cols = rows.front().size();
  const bool rectangular =
      cols > 0 && std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r.size() == cols; });
  if (!rectangular) fail(ErrorCode::DatasetFormatError, "label text rows differ in length");

  auto check_label = [](long long v) {
    if (v < 0 || v > INT32_MAX) fail(ErrorCode::DatasetFormatError, "label out of range");
    return static_cast<std::int32_t>(v);
  };

  const bool matrix_fits = !frame || (static_cast<int>(cols) == frame->first &&
                                      static_cast<int>(rows.size()) == frame->second);
  if (matrix_fits) {
    LabelMap lm(static_cast<int>(cols), static_cast<int>(rows.size()));
    for (std::size_t y = 0; y < rows.size(); ++y) {
      for (std::size_t x = 0; x < cols; ++x) {
        lm(static_cast<int>(x), static_cast<int>(y)) = check_label(rows[y][x]);
      }
    }
    return lm;
  }
  if (cols != 3) {
    fail(ErrorCode::DatasetFormatError, "label matrix is " + std::to_string(cols) + "x" +
                                            std::to_string(rows.size()) + ", image is " +
                                            std::to_string(frame->first) + "x" +
                                            std::to_string(frame->second));
  }
  LabelMap lm(frame->first, frame->second);
  for (const auto& r : rows) {
    const long long x = r[0];
    const long long y = r[1];
    if (x < 0 || y < 0 || x >= frame->first || y >= frame->second) {
      fail(ErrorCode::DatasetFormatError, "pixel listing outside the image");
    }
    lm(static_cast<int>(x), static_cast<int>(y)) = check_label(r[2]);
  }
  return lm;
}

LabelMap load_truth(const fs::path& path) {
  if (path.extension() == ".txt") return parse_label_text(read_file(path));
  return io::load_label_image(path);
}

Dataset load_dataset(const fs::path& root, DatasetKind kind) {
  if (!fs::is_directory(root)) fail(ErrorCode::IoError, "dataset root not found: " + root.string());
  Dataset ds;
  ds.kind = kind;
  const fs::path image_dir = root / "images";
  const fs::path truth_dir = root / "ground_truth";
  if (!fs::is_directory(image_dir)) {
    ds.warnings.push_back("no images/ directory under " + root.string());
    return ds;
  }
  const auto images = files_by_stem(image_dir, false, ds.warnings);
  const auto truths = files_by_stem(truth_dir, kind == DatasetKind::Neuroblastoma, ds.warnings);
  if (images.empty()) ds.warnings.push_back("no images under " + image_dir.string());

  for (const auto& [stem, image_path] : images) {
    auto t = truths.find(stem);
    if (t == truths.end()) {
      ds.issues.push_back({image_path, ErrorCode::DatasetFormatError, "no ground truth for " + stem});
      continue;
    }
    try {
      DatasetEntry e;
      e.id = stem;
      e.image_path = image_path;
      e.truth_path = t->second;
      e.image = entry_image(image_path, kind);
      const std::pair<int, int> frame{e.image.width(), e.image.height()};
      e.truth_labels = t->second.extension() == ".txt"
                           ? parse_label_text(read_file(t->second), frame)
                           : io::load_label_image(t->second);
      if (!e.truth_labels.same_shape(e.image)) {
        fail(ErrorCode::DatasetFormatError, "ground truth shape differs from image for " + stem);
      }
      e.truth = foreground_of(e.truth_labels);
      ds.entries.push_back(std::move(e));
    } catch (const Error& err) {
      const ErrorCode code =
          err.code() == ErrorCode::IoError || err.code() == ErrorCode::DecodeError
              ? err.code()
              : ErrorCode::DatasetFormatError;
      ds.issues.push_back({image_path, code, err.what()});
    }
  }
  return ds;
}

double LevelResult::mean(Metric m) const {
  if (per_image.empty()) return 0.0;
  double sum = 0.0;
  for (const ImageScore& s : per_image) sum += metric_value(s.confusion, m);
  return sum / static_cast<double>(per_image.size());
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t entry, std::size_t level) {
  // splitmix64 over a combined key
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (entry + 1)) ^ (0xC2B2AE3D27D4EB4FULL * (level + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MetricsReport noise_sweep(const std::vector<DatasetEntry>& entries, const SweepOptions& opt,
                          const PipelineConfig& cfg, const std::string& dataset) {
  if (entries.empty()) fail(ErrorCode::EmptyDataset, "no dataset entries to evaluate");
  if (opt.levels.empty()) fail(ErrorCode::InvalidParameter, "no noise levels");
  for (double db : opt.levels) {
    if (!(db > 0.0 && db <= 100.0)) fail(ErrorCode::InvalidParameter, "noise level must lie in (0, 100]");
  }
  if (opt.overlay_dir) fs::create_directories(*opt.overlay_dir);

  MetricsReport report;
  report.dataset = dataset;
  report.levels.resize(opt.levels.size());
  for (std::size_t l = 0; l < opt.levels.size(); ++l) {
    report.levels[l].level_db = opt.levels[l];
    report.levels[l].per_image.resize(entries.size());
  }

  PipelineConfig inner = cfg;
  const std::size_t cells = entries.size() * opt.levels.size();
  if (cells > 1) inner.jobs = 1;
  parallel_for(cells, cfg.jobs, [&](std::size_t k) {
    const std::size_t e = k / opt.levels.size();
    const std::size_t l = k % opt.levels.size();
    const DatasetEntry& entry = entries[e];
    const GrayImage noisy =
        add_noise_to_psnr(entry.image, opt.levels[l], cell_seed(opt.seed, e, l));
    const SegmentationResult r = segment(noisy, inner);
    ImageScore& s = report.levels[l].per_image[e];
    s.id = entry.id;
    s.confusion = confusion(r.binary, entry.truth);
    s.achieved_psnr = psnr(entry.image, noisy);
    s.non_converged = r.non_converged_objects() > 0;
    if (opt.overlay_dir) {
      io::write_overlay_png(*opt.overlay_dir / (entry.id + "_" + format_level(opt.levels[l]) + ".png"),
                            noisy, r.labels);
    }
  });
  return report;
}

std::string report_csv(const MetricsReport& r, Metric m) {
  std::ostringstream out;
  out << "# aggregation: unweighted per-image mean\n";
  out << "# dataset: " << r.dataset << ", metric: " << metric_name(m) << "\n";
  out << "method";
  for (const LevelResult& l : r.levels) out << ',' << format_level(l.level_db);
  out << "\nNeuronal Alg.";
  for (const LevelResult& l : r.levels) out << ',' << format_value(l.mean(m));
  out << '\n';
  return out.str();
}

std::string report_json(const MetricsReport& r) {
  nlohmann::json doc = nlohmann::json::array();
  for (const LevelResult& l : r.levels) {
    for (Metric m : kMetrics) {
      nlohmann::json per_image = nlohmann::json::array();
      for (const ImageScore& s : l.per_image) {
        per_image.push_back({{"image", s.id},
                             {"value", metric_value(s.confusion, m)},
                             {"achieved_psnr", s.achieved_psnr},
                             {"non_converged", s.non_converged}});
      }
      doc.push_back({{"dataset", r.dataset},
                     {"level_db", l.level_db},
                     {"metric", metric_name(m)},
                     {"mean", l.mean(m)},
                     {"per_image", std::move(per_image)}});
    }
  }
  return doc.dump(2) + "\n";
}

std::vector<fs::path> write_report(const MetricsReport& r, const fs::path& dir,
                                   const std::string& prefix) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (Metric m : kMetrics) {
    const fs::path p = dir / (prefix + metric_name(m) + ".csv");
    write_text(p, report_csv(r, m));
    written.push_back(p);
  }
  const fs::path j = dir / (prefix + "report.json");
  write_text(j, report_json(r));
  written.push_back(j);
  return written;
}

}  // namespace nalg::eval
