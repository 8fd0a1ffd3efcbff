#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "neuronalg/image_io.hpp"
#include "neuronalg/morphology.hpp"
#include "neuronalg/pipeline.hpp"
#include "support/oracles.hpp"

using namespace nalg;

namespace {

struct DiskScene {
  GrayImage image;
  std::vector<BinaryMask> disks;
};

DiskScene disk_scene(int size, const std::vector<std::array<double, 3>>& disks) {
  DiskScene s{GrayImage(size, size, 0.05), {}};
  for (const auto& d : disks) s.disks.push_back(testing::disk_mask(size, size, d[0], d[1], d[2]));
  for (std::size_t i = 0; i < s.image.size(); ++i) {
    for (const BinaryMask& m : s.disks) {
      if (m[i]) s.image[i] = 0.85;
    }
  }
  s.image = gaussian_smooth(s.image, 1.0);
  return s;
}

DiskScene five_disks() {
  return disk_scene(400, {{{80, 80, 30}}, {{300, 90, 28}}, {{200, 200, 32}}, {{90, 310, 27}}, {{310, 310, 30}}});
}

PipelineConfig quiet() {
  PipelineConfig cfg;
  cfg.jobs = 1;
  return cfg;
}

}  // namespace

TEST_CASE("all-black and degenerate images give flagged empty results") {
  const SegmentationResult black = segment(GrayImage(64, 48, 0.0), quiet());
  CHECK(black.empty_foreground);
  CHECK(black.labels.foreground_count() == 0);
  CHECK(black.binary.count() == 0);

  CHECK(segment(GrayImage(1, 1, 0.7), quiet()).empty_foreground);
  CHECK(segment(GrayImage(30, 30, 0.4), quiet()).empty_foreground);
}

TEST_CASE("five separated disks give five connected labels") {
  const DiskScene s = five_disks();
  const SegmentationResult r = segment(s.image, quiet());
  CHECK_FALSE(r.empty_foreground);
  CHECK(r.labels.max_label() == 5);
  for (const BinaryMask& d : s.disks) {
    const Point c = centroid(d);
    const std::int32_t l = r.labels(static_cast<int>(c.x), static_cast<int>(c.y));
    REQUIRE(l > 0);
    CHECK(region_mask(r.labels, l).count() <= d.count());
  }
  for (std::size_t i = 0; i < r.binary.size(); ++i) REQUIRE((r.binary[i] != 0) == (r.labels[i] != 0));
  CHECK(testing::all_labels_connected(r.labels));
}

TEST_CASE("five separated disks each reach IoU 0.85") {
  const DiskScene s = five_disks();
  const SegmentationResult r = segment(s.image, quiet());
  for (const BinaryMask& d : s.disks) {
    const Point c = centroid(d);
    const std::int32_t l = r.labels(static_cast<int>(c.x), static_cast<int>(c.y));
    REQUIRE(l > 0);
    CHECK(testing::mask_iou(region_mask(r.labels, l), d) >= 0.85);
  }
}

TEST_CASE("two overlapping disks become two labels") {
  const DiskScene s = disk_scene(300, {{{120, 150, 35}}, {{172, 150, 35}}});
  const SegmentationResult r = segment(s.image, quiet());
  CHECK(r.labels.max_label() == 2);
  CHECK(r.labels(105, 150) != r.labels(187, 150));
}

TEST_CASE("dark objects on a bright background are inverted") {
  const DiskScene s = disk_scene(200, {{{100, 100, 30}}});
  const SegmentationResult plain = segment(s.image, quiet());
  const SegmentationResult r = segment(invert(s.image), quiet());
  CHECK_FALSE(plain.inverted);
  CHECK(r.inverted);
  CHECK(r.labels.max_label() == 1);
  // Equalization is not symmetric under inversion, so masks differ slightly.
  CHECK(testing::mask_iou(r.binary, s.disks[0]) >= testing::mask_iou(plain.binary, s.disks[0]) - 0.05);
}

TEST_CASE("colour input uses the channel policy") {
  const DiskScene s = disk_scene(200, {{{100, 100, 30}}});
  RgbImage rgb(200, 200);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = {0.2, 0.2, s.image[i]};
  PipelineConfig cfg = quiet();
  cfg.channel_policy = ChannelPolicy::Blue;
  const SegmentationResult r = segment(rgb, cfg);
  CHECK(r.labels.max_label() == 1);
  cfg.channel_policy = ChannelPolicy::Red;
  CHECK(segment(rgb, cfg).empty_foreground);
}

TEST_CASE("stage checkpoints") {
  const auto syn = testing::make_ellipse_image(4242);
  PipelineConfig cfg = quiet();
  cfg.keep_snapshots = true;
  const SegmentationResult r = segment(syn.image, cfg);
  REQUIRE(r.snapshots.has_value());
  const StageSnapshots& s = *r.snapshots;
  CHECK(s.split_merge.foreground_count() == s.foreground.count());
  CHECK(foreground_of(s.watershed) == s.foreground);
  CHECK(s.contours.size() == static_cast<std::size_t>(s.split_merge.max_label()));
  const BinaryMask grown = dilate(s.agent_masks, 1);
  for (std::size_t i = 0; i < r.binary.size(); ++i) {
    if (r.binary[i]) REQUIRE(grown[i]);
  }
  CHECK(testing::all_labels_connected(r.labels));
  CHECK(r.labels.max_label() >= 1);
}

TEST_CASE("segment is deterministic across job counts") {
  const auto syn = testing::make_ellipse_image(77);
  PipelineConfig one = quiet();
  PipelineConfig many = quiet();
  many.jobs = 4;
  const SegmentationResult a = segment(syn.image, one);
  const SegmentationResult b = segment(syn.image, many);
  const SegmentationResult c = segment(syn.image, many);
  CHECK(a.labels == b.labels);
  CHECK(b.labels == c.labels);
}

TEST_CASE("segment_batch isolates failures") {
  CHECK(segment_batch({}, quiet()).empty());

  const auto dir = std::filesystem::temp_directory_path() / "nalg_batch_test";
  std::filesystem::create_directories(dir);
  const DiskScene s = disk_scene(120, {{{60, 60, 20}}});
  io::write_gray_png(dir / "a.png", s.image);
  io::write_gray_png(dir / "c.png", s.image);
  std::ofstream(dir / "b.png") << "garbage";

  PipelineConfig cfg = quiet();
  cfg.jobs = 2;
  const std::vector<std::filesystem::path> paths{dir / "a.png", dir / "b.png", dir / "missing.png",
                                                 dir / "c.png"};
  const auto items = segment_batch(paths, cfg);
  REQUIRE(items.size() == 4);
  CHECK(items[0].ok());
  CHECK_FALSE(items[1].ok());
  CHECK(items[1].error == ErrorCode::DecodeError);
  CHECK_FALSE(items[2].ok());
  CHECK(items[2].error == ErrorCode::IoError);
  CHECK(items[3].ok());
  CHECK(items[0].path == paths[0]);

  const auto again = segment_batch(paths, cfg);
  CHECK(again[0].result->labels == items[0].result->labels);
  CHECK(again[3].result->labels == items[3].result->labels);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config round trip and validation") {
  PipelineConfig cfg;
  cfg.seed = 99;
  cfg.smoothing_sigmas_sf = {1.0};
  cfg.agent.synapse.w_exc = 123.0;
  cfg.channel_policy = ChannelPolicy::Blue;
  const PipelineConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.seed == 99);
  CHECK(back.smoothing_sigmas_sf == std::vector<double>{1.0});
  CHECK(back.agent.synapse.w_exc == 123.0);
  CHECK(back.channel_policy == ChannelPolicy::Blue);
  CHECK(config_to_json(back) == config_to_json(cfg));

  const PipelineConfig partial = config_from_json(R"({"split_merge": {"split_factor": 2.0}})");
  CHECK(partial.split_merge.split_factor == 2.0);
  CHECK(partial.split_merge.merge_factor == PipelineConfig{}.split_merge.merge_factor);

  for (const char* bad : {R"({"nope": 1})", R"({"split_merge": {"split_factor": 0.5}})",
                          R"({"channel_policy": "purple"})", "{not json", R"({"seed": "x"})"}) {
    try {
      config_from_json(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  }
  try {
    load_config("/nonexistent/cfg.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
