#include "neuronalg/neuronalg.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "neuronalg/evalharness.hpp"
#include "neuronalg/image_io.hpp"
#include "neuronalg/morphology.hpp"
#include "neuronalg/pipeline.hpp"

namespace fs = std::filesystem;

struct nalg_config {
  nalg::PipelineConfig cfg;
};

struct nalg_image {
  nalg::AnyImage img;
};

struct nalg_result {
  nalg::SegmentationResult r;
  // Intensity the overlay is drawn on; batch results load it on first use.
  mutable std::optional<nalg::GrayImage> shown;
  fs::path source;
  nalg::ChannelPolicy policy = nalg::ChannelPolicy::Luminance;
};

struct nalg_batch {
  struct Item {
    nalg_status status = NALG_OK;
    std::string message;
    std::unique_ptr<nalg_result> result;
  };
  std::vector<Item> items;
};

struct nalg_dataset {
  nalg::eval::Dataset ds;
  std::vector<std::string> issue_paths;
};

struct nalg_report {
  nalg::eval::MetricsReport report;
};

namespace {

thread_local std::string g_last_error;

nalg_status status_of(nalg::ErrorCode code) { return static_cast<nalg_status>(static_cast<int>(code)); }

nalg_status set_error(nalg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, translating exceptions into a status and the thread-local message.
template <class Fn>
nalg_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NALG_OK;
  } catch (const nalg::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(NALG_E_INTERNAL, "out of memory");
  } catch (const fs::filesystem_error& e) {
    return set_error(NALG_E_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(NALG_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(NALG_E_INTERNAL, "unknown failure");
  }
}

#define NALG_REQUIRE(p)                                                  \
  do {                                                                   \
    if ((p) == nullptr) return set_error(NALG_E_NULL_ARGUMENT, #p " is NULL"); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string join_paths(const std::vector<fs::path>& paths) {
  std::string out;
  for (const fs::path& p : paths) {
    out += p.string();
    out += '\n';
  }
  return out;
}

nalg::GrayImage shown_intensity(const nalg::AnyImage& img, const nalg::PipelineConfig& cfg) {
  if (const auto* g = std::get_if<nalg::GrayImage>(&img)) return *g;
  return nalg::extract_intensity(img, cfg.channel_policy);
}

const nalg::GrayImage& shown_of(const nalg_result& res) {
  if (!res.shown) {
    nalg::PipelineConfig c;
    c.channel_policy = res.policy;
    res.shown = shown_intensity(nalg::io::load_image(res.source), c);
  }
  return *res.shown;
}

template <class R>
R or_blank(const R& r, int w, int h) {
  return r.width() == 0 ? R(w, h) : r;
}

void write_contours(const fs::path& p, const std::vector<nalg::LabeledContour>& cs) {
  std::ofstream out(p);
  if (!out) nalg::fail(nalg::ErrorCode::IoError, "cannot write " + p.string());
  out << "label,bin,angle,radius\n";
  for (const auto& c : cs) nalg::write_contour_csv(out, c.label, c.contour);
  if (!out) nalg::fail(nalg::ErrorCode::IoError, "write failed for " + p.string());
}

std::vector<fs::path> write_stage(const nalg_result& res, int stage, const fs::path& dir) {
  namespace io = nalg::io;
  if (!res.r.snapshots) {
    nalg::fail(nalg::ErrorCode::InvalidParameter, "result was computed without snapshots");
  }
  const nalg::StageSnapshots& s = *res.r.snapshots;
  const int w = res.r.labels.width();
  const int h = res.r.labels.height();
  fs::create_directories(dir);
  std::vector<fs::path> out;
  auto add = [&](const std::string& name) {
    out.push_back(dir / name);
    return out.back();
  };
  switch (stage) {
    case 1:
      io::write_gray_png(add("stage1_gray.png"), s.gray);
      io::write_gray_png(add("stage1_smoothed.png"), s.smoothed);
      break;
    case 2:
      io::write_mask_png(add("stage2_foreground.png"), or_blank(s.foreground, w, h));
      io::write_label_png(add("stage2_markers.png"), or_blank(s.markers, w, h));
      io::write_label_png(add("stage2_basins.png"), or_blank(s.watershed, w, h));
      io::write_overlay_png(add("stage2_overlay.png"), shown_of(res), or_blank(s.watershed, w, h));
      break;
    case 3:
      io::write_label_png(add("stage3_labels.png"), or_blank(s.split_merge, w, h));
      io::write_overlay_png(add("stage3_overlay.png"), shown_of(res), or_blank(s.split_merge, w, h));
      break;
    case 4:
      write_contours(add("stage4_contours.csv"), s.contours);
      break;
    case 5:
      write_contours(add("stage5_contours.csv"), s.refined);
      io::write_mask_png(add("stage5_masks.png"), or_blank(s.agent_masks, w, h));
      break;
    case 6:
      io::write_mask_png(add("stage6_otsu_masks.png"), or_blank(s.otsu_masks, w, h));
      io::write_label_png(add("stage6_labels.png"), res.r.labels);
      io::write_mask_png(add("stage6_binary.png"), res.r.binary);
      break;
    default:
      nalg::fail(nalg::ErrorCode::InvalidParameter, "stage must lie in 1..6");
  }
  return out;
}

}  // namespace

extern "C" {

const char* nalg_version(void) { return "1.0.0"; }

const char* nalg_last_error(void) { return g_last_error.c_str(); }

const char* nalg_status_name(nalg_status status) {
  switch (status) {
    case NALG_OK: return "ok";
    case NALG_E_NULL_ARGUMENT: return "NullArgument";
    case NALG_E_OUT_OF_RANGE: return "OutOfRange";
    case NALG_E_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= NALG_E_INVALID_PARAMETER && status <= NALG_E_CONFIG) {
    return nalg::to_string(static_cast<nalg::ErrorCode>(status));
  }
  return "Unknown";
}

void nalg_string_free(char* s) { std::free(s); }

nalg_status nalg_config_create(nalg_config** out) {
  NALG_REQUIRE(out);
  return guarded([&] { *out = new nalg_config{}; });
}

nalg_status nalg_config_load(const char* path, nalg_config** out) {
  NALG_REQUIRE(path);
  NALG_REQUIRE(out);
  return guarded([&] { *out = new nalg_config{nalg::load_config(path)}; });
}

nalg_status nalg_config_from_json(const char* text, nalg_config** out) {
  NALG_REQUIRE(text);
  NALG_REQUIRE(out);
  return guarded([&] { *out = new nalg_config{nalg::config_from_json(text)}; });
}

nalg_status nalg_config_to_json(const nalg_config* cfg, char** out_json) {
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(out_json);
  return guarded([&] { *out_json = dup_string(nalg::config_to_json(cfg->cfg)); });
}

nalg_status nalg_config_set_seed(nalg_config* cfg, uint64_t seed) {
  NALG_REQUIRE(cfg);
  cfg->cfg.seed = seed;
  return NALG_OK;
}

nalg_status nalg_config_get_seed(const nalg_config* cfg, uint64_t* out) {
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(out);
  *out = cfg->cfg.seed;
  return NALG_OK;
}

nalg_status nalg_config_set_jobs(nalg_config* cfg, int jobs) {
  NALG_REQUIRE(cfg);
  if (jobs < 0) return set_error(NALG_E_CONFIG, "jobs must be >= 0");
  cfg->cfg.jobs = jobs;
  return NALG_OK;
}

nalg_status nalg_config_set_snapshots(nalg_config* cfg, int keep) {
  NALG_REQUIRE(cfg);
  cfg->cfg.keep_snapshots = keep != 0;
  return NALG_OK;
}

void nalg_config_free(nalg_config* cfg) { delete cfg; }

nalg_status nalg_image_load(const char* path, nalg_image** out) {
  NALG_REQUIRE(path);
  NALG_REQUIRE(out);
  return guarded([&] { *out = new nalg_image{nalg::io::load_image(path)}; });
}

nalg_status nalg_image_from_gray(const double* data, int width, int height, nalg_image** out) {
  NALG_REQUIRE(data);
  NALG_REQUIRE(out);
  if (width <= 0 || height <= 0) return set_error(NALG_E_INVALID_PARAMETER, "image size must be positive");
  return guarded([&] {
    nalg::GrayImage g(width, height);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = data[i];
    *out = new nalg_image{std::move(g)};
  });
}

nalg_status nalg_image_size(const nalg_image* img, int* width, int* height) {
  NALG_REQUIRE(img);
  std::visit(
      [&](const auto& im) {
        if (width) *width = im.width();
        if (height) *height = im.height();
      },
      img->img);
  return NALG_OK;
}

void nalg_image_free(nalg_image* img) { delete img; }

nalg_status nalg_segment(const nalg_image* img, const nalg_config* cfg, nalg_result** out) {
  NALG_REQUIRE(img);
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(out);
  return guarded([&] {
    auto res = std::make_unique<nalg_result>();
    res->r = nalg::segment(img->img, cfg->cfg);
    res->shown = shown_intensity(img->img, cfg->cfg);
    *out = res.release();
  });
}

nalg_status nalg_result_get_info(const nalg_result* r, nalg_result_info* out) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(out);
  out->width = r->r.labels.width();
  out->height = r->r.labels.height();
  out->label_count = r->r.labels.max_label();
  out->foreground_pixels = r->r.binary.count();
  out->empty_foreground = r->r.empty_foreground ? 1 : 0;
  out->inverted = r->r.inverted ? 1 : 0;
  out->non_converged_objects = r->r.non_converged_objects();
  return NALG_OK;
}

nalg_status nalg_result_copy_labels(const nalg_result* r, int32_t* buf, size_t len) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(buf);
  if (len < r->r.labels.size()) return set_error(NALG_E_OUT_OF_RANGE, "label buffer too small");
  std::memcpy(buf, r->r.labels.storage().data(), r->r.labels.size() * sizeof(int32_t));
  return NALG_OK;
}

nalg_status nalg_result_write_labels(const nalg_result* r, const char* path) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(path);
  return guarded([&] { nalg::io::write_label_png(path, r->r.labels); });
}

nalg_status nalg_result_write_binary(const nalg_result* r, const char* path) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(path);
  return guarded([&] { nalg::io::write_mask_png(path, r->r.binary); });
}

nalg_status nalg_result_write_overlay(const nalg_result* r, const char* path) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(path);
  return guarded([&] { nalg::io::write_overlay_png(path, shown_of(*r), r->r.labels); });
}

nalg_status nalg_result_write_snapshots(const nalg_result* r, const char* dir, char** out_paths) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(dir);
  return guarded([&] {
    std::vector<fs::path> all;
    for (int stage = 1; stage <= 6; ++stage) {
      auto written = write_stage(*r, stage, dir);
      all.insert(all.end(), written.begin(), written.end());
    }
    if (out_paths) *out_paths = dup_string(join_paths(all));
  });
}

void nalg_result_free(nalg_result* r) { delete r; }

nalg_status nalg_inspect_stage(const nalg_image* img, const nalg_config* cfg, int stage,
                               const char* dir, char** out_paths) {
  NALG_REQUIRE(img);
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(dir);
  if (stage < 1 || stage > 6) return set_error(NALG_E_OUT_OF_RANGE, "stage must lie in 1..6");
  return guarded([&] {
    nalg::PipelineConfig c = cfg->cfg;
    c.keep_snapshots = true;
    nalg_result res;
    res.r = nalg::segment(img->img, c);
    res.shown = shown_intensity(img->img, c);
    const auto written = write_stage(res, stage, dir);
    if (out_paths) *out_paths = dup_string(join_paths(written));
  });
}

nalg_status nalg_segment_batch(const char* const* paths, size_t count, const nalg_config* cfg,
                               nalg_batch** out) {
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(out);
  if (count > 0 && paths == nullptr) return set_error(NALG_E_NULL_ARGUMENT, "paths is NULL");
  return guarded([&] {
    std::vector<fs::path> ps;
    for (size_t i = 0; i < count; ++i) {
      if (paths[i] == nullptr) nalg::fail(nalg::ErrorCode::InvalidParameter, "NULL path in batch");
      ps.emplace_back(paths[i]);
    }
    auto batch = std::make_unique<nalg_batch>();
    auto items = nalg::segment_batch(ps, cfg->cfg);
    batch->items.resize(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
      auto& dst = batch->items[i];
      if (items[i].ok()) {
        dst.result = std::make_unique<nalg_result>();
        dst.result->r = std::move(*items[i].result);
        dst.result->source = ps[i];
        dst.result->policy = cfg->cfg.channel_policy;
      } else {
        dst.status = status_of(items[i].error);
        dst.message = items[i].message;
      }
    }
    *out = batch.release();
  });
}

size_t nalg_batch_size(const nalg_batch* b) { return b ? b->items.size() : 0; }

nalg_status nalg_batch_item(const nalg_batch* b, size_t index, nalg_status* item_status,
                            const char** message, const nalg_result** result) {
  NALG_REQUIRE(b);
  if (index >= b->items.size()) return set_error(NALG_E_OUT_OF_RANGE, "batch index out of range");
  const auto& it = b->items[index];
  if (item_status) *item_status = it.status;
  if (message) *message = it.message.c_str();
  if (result) *result = it.result.get();
  return NALG_OK;
}

void nalg_batch_free(nalg_batch* b) { delete b; }

nalg_status nalg_dataset_load(const char* root, const char* kind, nalg_dataset** out) {
  NALG_REQUIRE(root);
  NALG_REQUIRE(kind);
  NALG_REQUIRE(out);
  return guarded([&] {
    auto ds = std::make_unique<nalg_dataset>();
    ds->ds = nalg::eval::load_dataset(root, nalg::eval::parse_dataset_kind(kind));
    for (const auto& issue : ds->ds.issues) ds->issue_paths.push_back(issue.path.string());
    *out = ds.release();
  });
}

size_t nalg_dataset_size(const nalg_dataset* ds) { return ds ? ds->ds.entries.size() : 0; }

size_t nalg_dataset_issue_count(const nalg_dataset* ds) { return ds ? ds->ds.issues.size() : 0; }

nalg_status nalg_dataset_issue(const nalg_dataset* ds, size_t index, const char** path,
                               nalg_status* code, const char** message) {
  NALG_REQUIRE(ds);
  if (index >= ds->ds.issues.size()) return set_error(NALG_E_OUT_OF_RANGE, "issue index out of range");
  const auto& issue = ds->ds.issues[index];
  if (path) *path = ds->issue_paths[index].c_str();
  if (code) *code = status_of(issue.code);
  if (message) *message = issue.message.c_str();
  return NALG_OK;
}

size_t nalg_dataset_warning_count(const nalg_dataset* ds) { return ds ? ds->ds.warnings.size() : 0; }

const char* nalg_dataset_warning(const nalg_dataset* ds, size_t index) {
  if (!ds || index >= ds->ds.warnings.size()) return nullptr;
  return ds->ds.warnings[index].c_str();
}

void nalg_dataset_free(nalg_dataset* ds) { delete ds; }

nalg_status nalg_sweep_run(const nalg_dataset* ds, const double* levels, size_t n_levels,
                           const nalg_config* cfg, uint64_t seed, const char* overlay_dir,
                           nalg_report** out) {
  NALG_REQUIRE(ds);
  NALG_REQUIRE(cfg);
  NALG_REQUIRE(out);
  if (n_levels > 0 && levels == nullptr) return set_error(NALG_E_NULL_ARGUMENT, "levels is NULL");
  return guarded([&] {
    nalg::eval::SweepOptions opt;
    opt.levels.assign(levels, levels + n_levels);
    opt.seed = seed;
    if (overlay_dir) opt.overlay_dir = fs::path(overlay_dir);
    auto rep = std::make_unique<nalg_report>();
    rep->report = nalg::eval::noise_sweep(ds->ds.entries, opt, cfg->cfg,
                                          nalg::eval::dataset_name(ds->ds.kind));
    *out = rep.release();
  });
}

size_t nalg_report_level_count(const nalg_report* r) { return r ? r->report.levels.size() : 0; }

nalg_status nalg_report_mean(const nalg_report* r, size_t level_index, nalg_metric metric,
                             double* out) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(out);
  if (level_index >= r->report.levels.size()) return set_error(NALG_E_OUT_OF_RANGE, "level index out of range");
  if (metric < NALG_METRIC_IOU || metric > NALG_METRIC_SPECIFICITY) {
    return set_error(NALG_E_OUT_OF_RANGE, "unknown metric");
  }
  *out = r->report.levels[level_index].mean(static_cast<nalg::eval::Metric>(metric));
  return NALG_OK;
}

nalg_status nalg_report_write(const nalg_report* r, const char* dir, char** out_paths) {
  NALG_REQUIRE(r);
  NALG_REQUIRE(dir);
  return guarded([&] {
    const auto written = nalg::eval::write_report(r->report, dir);
    if (out_paths) *out_paths = dup_string(join_paths(written));
  });
}

void nalg_report_free(nalg_report* r) { delete r; }

nalg_status nalg_evaluate_masks(const char* pred_path, const char* truth_path, nalg_metrics* out) {
  NALG_REQUIRE(pred_path);
  NALG_REQUIRE(truth_path);
  NALG_REQUIRE(out);
  return guarded([&] {
    namespace ev = nalg::eval;
    const nalg::LabelMap pred = ev::load_truth(pred_path);
    const nalg::LabelMap truth = ev::load_truth(truth_path);
    if (!pred.same_shape(truth)) {
      nalg::fail(nalg::ErrorCode::ShapeError, "prediction and ground truth differ in size");
    }
    const ev::Confusion c = ev::confusion(nalg::foreground_of(pred), nalg::foreground_of(truth));
    *out = nalg_metrics{c.tp,        c.tn,        c.fp,           c.fn,
                        ev::iou(c),  ev::f1(c),   ev::accuracy(c), ev::sensitivity(c),
                        ev::specificity(c)};
  });
}

}  // extern "C"
