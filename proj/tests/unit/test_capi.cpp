#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "neuronalg/neuronalg.h"

namespace fs = std::filesystem;

namespace {

std::vector<double> disk_pixels(int w, int h, double cx, double cy, double r) {
  std::vector<double> px(static_cast<std::size_t>(w) * h, 0.05);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (std::hypot(x - cx, y - cy) <= r) px[static_cast<std::size_t>(y) * w + x] = 0.9;
    }
  }
  return px;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  nalg_string_free(s);
  return out;
}

struct Dir {
  fs::path path;
  explicit Dir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Dir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("status names and null handling") {
  CHECK(std::string(nalg_version()) == "1.0.0");
  CHECK(std::string(nalg_status_name(NALG_OK)) == "ok");
  CHECK(nalg_config_create(nullptr) == NALG_E_NULL_ARGUMENT);
  CHECK(std::string(nalg_last_error()).size() > 0);
  CHECK(nalg_segment(nullptr, nullptr, nullptr) == NALG_E_NULL_ARGUMENT);
  nalg_config_free(nullptr);
  nalg_image_free(nullptr);
  nalg_result_free(nullptr);
  nalg_batch_free(nullptr);
  nalg_string_free(nullptr);
}

TEST_CASE("config through the C interface") {
  nalg_config* cfg = nullptr;
  REQUIRE(nalg_config_create(&cfg) == NALG_OK);
  CHECK(nalg_config_set_seed(cfg, 31) == NALG_OK);
  uint64_t seed = 0;
  CHECK(nalg_config_get_seed(cfg, &seed) == NALG_OK);
  CHECK(seed == 31);
  CHECK(nalg_config_set_jobs(cfg, -2) == NALG_E_CONFIG);
  char* json = nullptr;
  REQUIRE(nalg_config_to_json(cfg, &json) == NALG_OK);
  const std::string text = take(json);
  CHECK(text.find("\"seed\"") != std::string::npos);

  nalg_config* back = nullptr;
  REQUIRE(nalg_config_from_json(text.c_str(), &back) == NALG_OK);
  CHECK(nalg_config_get_seed(back, &seed) == NALG_OK);
  CHECK(seed == 31);
  nalg_config_free(back);

  nalg_config* bad = nullptr;
  CHECK(nalg_config_from_json("{\"bogus\":1}", &bad) == NALG_E_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(nalg_last_error()).find("bogus") != std::string::npos);
  CHECK(nalg_config_load("/nonexistent.json", &bad) == NALG_E_IO);
  nalg_config_free(cfg);
}

TEST_CASE("segment an in-memory image and write outputs") {
  Dir dir("nalg_capi_seg");
  const int w = 160, h = 120;
  const auto px = disk_pixels(w, h, 80, 60, 25);
  nalg_image* img = nullptr;
  REQUIRE(nalg_image_from_gray(px.data(), w, h, &img) == NALG_OK);
  int iw = 0, ih = 0;
  CHECK(nalg_image_size(img, &iw, &ih) == NALG_OK);
  CHECK(iw == w);
  CHECK(ih == h);
  CHECK(nalg_image_from_gray(px.data(), 0, h, &img) != NALG_OK);

  nalg_config* cfg = nullptr;
  REQUIRE(nalg_config_create(&cfg) == NALG_OK);
  nalg_config_set_jobs(cfg, 1);
  nalg_config_set_snapshots(cfg, 1);
  nalg_result* r = nullptr;
  REQUIRE(nalg_segment(img, cfg, &r) == NALG_OK);
  nalg_result_info info{};
  REQUIRE(nalg_result_get_info(r, &info) == NALG_OK);
  CHECK(info.width == w);
  CHECK(info.label_count == 1);
  CHECK(info.empty_foreground == 0);
  CHECK(info.foreground_pixels > 1500);

  std::vector<int32_t> labels(static_cast<std::size_t>(w) * h);
  CHECK(nalg_result_copy_labels(r, labels.data(), labels.size()) == NALG_OK);
  CHECK(labels[static_cast<std::size_t>(60) * w + 80] == 1);
  CHECK(nalg_result_copy_labels(r, labels.data(), 10) == NALG_E_OUT_OF_RANGE);

  const std::string lp = (dir.path / "labels.png").string();
  const std::string bp = (dir.path / "binary.png").string();
  const std::string op = (dir.path / "overlay.png").string();
  CHECK(nalg_result_write_labels(r, lp.c_str()) == NALG_OK);
  CHECK(nalg_result_write_binary(r, bp.c_str()) == NALG_OK);
  CHECK(nalg_result_write_overlay(r, op.c_str()) == NALG_OK);
  CHECK(fs::file_size(lp) > 0);
  CHECK(fs::file_size(op) > 0);

  char* paths = nullptr;
  REQUIRE(nalg_result_write_snapshots(r, (dir.path / "stages").string().c_str(), &paths) == NALG_OK);
  const std::string listed = take(paths);
  CHECK(listed.find("stage2_markers.png") != std::string::npos);
  CHECK(listed.find("stage4_contours.csv") != std::string::npos);

  // Self-evaluation is perfect.
  nalg_metrics m{};
  REQUIRE(nalg_evaluate_masks(bp.c_str(), lp.c_str(), &m) == NALG_OK);
  CHECK(m.iou == 1.0);
  CHECK(m.fp == 0);
  CHECK(m.tp + m.tn == static_cast<uint64_t>(w) * h);

  nalg_image* loaded = nullptr;
  REQUIRE(nalg_image_load(bp.c_str(), &loaded) == NALG_OK);
  nalg_image_free(loaded);
  CHECK(nalg_image_load((dir.path / "none.png").string().c_str(), &loaded) == NALG_E_IO);

  nalg_result_free(r);
  nalg_config_free(cfg);
  nalg_image_free(img);
}

TEST_CASE("inspect stages") {
  Dir dir("nalg_capi_inspect");
  const auto px = disk_pixels(100, 100, 50, 50, 20);
  nalg_image* img = nullptr;
  REQUIRE(nalg_image_from_gray(px.data(), 100, 100, &img) == NALG_OK);
  nalg_config* cfg = nullptr;
  nalg_config_create(&cfg);
  char* paths = nullptr;
  CHECK(nalg_inspect_stage(img, cfg, 7, dir.path.string().c_str(), &paths) == NALG_E_OUT_OF_RANGE);
  CHECK(nalg_inspect_stage(img, cfg, 0, dir.path.string().c_str(), &paths) == NALG_E_OUT_OF_RANGE);
  for (int stage = 1; stage <= 6; ++stage) {
    REQUIRE(nalg_inspect_stage(img, cfg, stage, dir.path.string().c_str(), &paths) == NALG_OK);
    const std::string listed = take(paths);
    CHECK(listed.find("stage" + std::to_string(stage)) != std::string::npos);
  }
  CHECK(fs::exists(dir.path / "stage2_basins.png"));
  CHECK(fs::exists(dir.path / "stage4_contours.csv"));
  nalg_config_free(cfg);
  nalg_image_free(img);
}

TEST_CASE("batch through the C interface") {
  Dir dir("nalg_capi_batch");
  const auto px = disk_pixels(80, 80, 40, 40, 15);
  nalg_image* img = nullptr;
  nalg_image_from_gray(px.data(), 80, 80, &img);
  nalg_config* cfg = nullptr;
  nalg_config_create(&cfg);
  nalg_result* r = nullptr;
  REQUIRE(nalg_segment(img, cfg, &r) == NALG_OK);
  const std::string good = (dir.path / "good.png").string();
  nalg_result_write_binary(r, good.c_str());
  nalg_result_free(r);
  const std::string bad = (dir.path / "bad.png").string();
  std::ofstream(bad) << "xx";

  const char* paths[] = {good.c_str(), bad.c_str()};
  nalg_batch* b = nullptr;
  REQUIRE(nalg_segment_batch(paths, 2, cfg, &b) == NALG_OK);
  REQUIRE(nalg_batch_size(b) == 2);
  nalg_status st = NALG_OK;
  const char* msg = nullptr;
  const nalg_result* item = nullptr;
  CHECK(nalg_batch_item(b, 0, &st, &msg, &item) == NALG_OK);
  CHECK(st == NALG_OK);
  CHECK(item != nullptr);
  CHECK(nalg_result_write_overlay(item, (dir.path / "ov.png").string().c_str()) == NALG_OK);
  CHECK(nalg_batch_item(b, 1, &st, &msg, &item) == NALG_OK);
  CHECK(st == NALG_E_DECODE);
  CHECK(item == nullptr);
  CHECK(nalg_batch_item(b, 2, &st, &msg, &item) == NALG_E_OUT_OF_RANGE);
  nalg_batch_free(b);
  nalg_config_free(cfg);
  nalg_image_free(img);
}

TEST_CASE("dataset and sweep through the C interface") {
  Dir dir("nalg_capi_ds");
  fs::create_directories(dir.path / "images");
  fs::create_directories(dir.path / "ground_truth");
  const auto px = disk_pixels(96, 96, 48, 48, 18);
  nalg_image* img = nullptr;
  nalg_image_from_gray(px.data(), 96, 96, &img);
  nalg_config* cfg = nullptr;
  nalg_config_create(&cfg);
  nalg_config_set_jobs(cfg, 1);
  nalg_result* r = nullptr;
  REQUIRE(nalg_segment(img, cfg, &r) == NALG_OK);
  // The segmentation's own mask serves as both image and truth.
  nalg_result_write_binary(r, (dir.path / "images" / "x.png").string().c_str());
  nalg_result_write_binary(r, (dir.path / "ground_truth" / "x.png").string().c_str());
  nalg_result_free(r);

  nalg_dataset* ds = nullptr;
  CHECK(nalg_dataset_load(dir.path.string().c_str(), "imagenet", &ds) == NALG_E_INVALID_PARAMETER);
  REQUIRE(nalg_dataset_load(dir.path.string().c_str(), "isbi2009", &ds) == NALG_OK);
  CHECK(nalg_dataset_size(ds) == 1);
  CHECK(nalg_dataset_issue_count(ds) == 0);

  const double levels[] = {100.0, 30.0};
  nalg_report* rep = nullptr;
  REQUIRE(nalg_sweep_run(ds, levels, 2, cfg, 3, nullptr, &rep) == NALG_OK);
  CHECK(nalg_report_level_count(rep) == 2);
  double iou = 0;
  CHECK(nalg_report_mean(rep, 0, NALG_METRIC_IOU, &iou) == NALG_OK);
  CHECK(iou > 0.8);
  CHECK(nalg_report_mean(rep, 5, NALG_METRIC_IOU, &iou) == NALG_E_OUT_OF_RANGE);
  char* written = nullptr;
  REQUIRE(nalg_report_write(rep, (dir.path / "out").string().c_str(), &written) == NALG_OK);
  const std::string listed = take(written);
  CHECK(listed.find("iou.csv") != std::string::npos);
  CHECK(listed.find("report.json") != std::string::npos);
  CHECK(nalg_sweep_run(ds, levels, 0, cfg, 3, nullptr, &rep) == NALG_E_INVALID_PARAMETER);

  nalg_report_free(rep);
  nalg_dataset_free(ds);
  nalg_config_free(cfg);
  nalg_image_free(img);
}
