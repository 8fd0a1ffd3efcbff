#include "neuronalg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "neuronalg/image_io.hpp"
#include "neuronalg/morphology.hpp"
#include "neuronalg/parallel.hpp"
#include "neuronalg/threshold.hpp"
#include "neuronalg/watershed.hpp"

namespace nalg {

namespace {

struct Box {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool empty() const { return x1 < x0; }
};

Box clip(Box b, int w, int h) {
  b.x0 = std::max(b.x0, 0);
  b.y0 = std::max(b.y0, 0);
  b.x1 = std::min(b.x1, w - 1);
  b.y1 = std::min(b.y1, h - 1);
  return b;
}

template <class R>
R crop(const R& src, const Box& b) {
  R out(b.width(), b.height());
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) out(x, y) = src(b.x0 + x, b.y0 + y);
  }
  return out;
}

BinaryMask crop_label(const LabelMap& lm, std::int32_t label, const Box& b) {
  BinaryMask out(b.width(), b.height());
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) out(x, y) = lm(b.x0 + x, b.y0 + y) == label ? 1 : 0;
  }
  return out;
}

// Mean of the 1-px frame against the mean of everything inside it.
bool border_brighter(const GrayImage& g) {
  const int w = g.width();
  const int h = g.height();
  if (w < 3 || h < 3) return false;
  double border = 0.0;
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      total += g(x, y);
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) border += g(x, y);
    }
  }
  const double n_border = 2.0 * (w + h) - 4.0;
  const double n_inner = static_cast<double>(w) * h - n_border;
  return border / n_border > (total - border) / n_inner;
}

struct ObjectWork {
  std::int32_t label = 0;
  Box box;  // tight bounding box of the stage-3 label
  RadialContour contour;
  RadialContour refined;
  int non_converged = 0;
  Box roi;  // region covered by the agent and Otsu masks
  BinaryMask agent_mask;
  BinaryMask kept;
};

SegmentationResult empty_result(int w, int h, bool inverted) {
  SegmentationResult r;
  r.labels = LabelMap(w, h);
  r.binary = BinaryMask(w, h);
  r.empty_foreground = true;
  r.inverted = inverted;
  return r;
}

void paste(BinaryMask& dst, const BinaryMask& src, const Box& at) {
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (src(x, y)) dst(at.x0 + x, at.y0 + y) = 1;
    }
  }
}

void stage_contour(ObjectWork& o, const LabelMap& lm) {
  const Box b = clip({o.box.x0 - 1, o.box.y0 - 1, o.box.x1 + 1, o.box.y1 + 1}, lm.width(),
                     lm.height());
  const BinaryMask m = crop_label(lm, o.label, b);
  Point c = centroid(m);
  RadialContour rc = radial_contour(m, c);
  rc.center = {c.x + b.x0, c.y + b.y0};
  o.contour = rc;
}

void stage_agents(ObjectWork& o, const LabelMap& lm,
                  const std::shared_ptr<const SummedArea>& gray_sum, double gray_avg,
                  const ScaleFactor& scale, const AgentConfig& acfg) {
  const int w = lm.width();
  const int h = lm.height();
  const double r_max = *std::max_element(o.contour.radii.begin(), o.contour.radii.end());
  const double mask_sigma = acfg.mask_sigma_sd * scale.sd;
  const int reach = static_cast<int>(std::ceil(std::max(acfg.lambda_max, 1.0) * r_max)) +
                    scale.sd + static_cast<int>(std::ceil(3.0 * mask_sigma)) + 2;
  const int cx = static_cast<int>(std::lround(o.contour.center.x));
  const int cy = static_cast<int>(std::lround(o.contour.center.y));
  Box roi = clip({std::min(cx - reach, o.box.x0), std::min(cy - reach, o.box.y0),
                  std::max(cx + reach, o.box.x1), std::max(cy + reach, o.box.y1)},
                 w, h);
  o.roi = roi;

  const BinaryMask m = crop_label(lm, o.label, roi);
  GrayImage mf(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) mf[i] = m[i] ? 1.0 : 0.0;
  const StimulationFields f = StimulationFields::build(
      gray_sum, gray_avg, gaussian_smooth(mf, mask_sigma), roi.x0, roi.y0, w, h, scale.sd,
      FieldConstants{acfg.intensity, acfg.s_factor});
  const RefineResult rr = refine_contour(o.contour, f, acfg);
  o.refined = rr.contour;
  o.non_converged = static_cast<int>(
      std::count_if(rr.agents.begin(), rr.agents.end(),
                    [](const AgentResult& a) { return a.status == AgentStatus::NonConverged; }));

  RadialContour local = rr.contour;
  local.center = {local.center.x - roi.x0, local.center.y - roi.y0};
  o.agent_mask = contour_to_mask(local, roi.width(), roi.height());
}

void stage_otsu(ObjectWork& o, const GrayImage& gray) {
  const GrayImage g = crop(gray, o.roi);
  const Histogram256 hist = histogram(g, o.agent_mask);
  BinaryMask kept = o.agent_mask;
  if (hist.occupied_bins() >= 2) {
    const int level = otsu_level(hist);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      kept[i] = (o.agent_mask[i] && quantize(g[i]) > level) ? 1 : 0;
    }
  }
  o.kept = fill_holes(kept);
}

}  // namespace

int SegmentationResult::non_converged_objects() const {
  return static_cast<int>(std::count_if(objects.begin(), objects.end(),
                                        [](const ObjectReport& o) { return o.non_converged > 0; }));
}

SegmentationResult segment(const AnyImage& img, const PipelineConfig& cfg) {
  cfg.validate();
  const ChannelPolicy policy =
      std::holds_alternative<GrayImage>(img) ? ChannelPolicy::AlreadyGray : cfg.channel_policy;

  // Stage 1: intensity, equalization, polarity, smoothing cascade. The
  // equalized image feeds the agents and the per-mask Otsu; the global
  // threshold and the flood work on the smoothed plain intensity, since
  // equalizing a shaded background turns it into a ramp Otsu cuts through.
  GrayImage intensity = extract_intensity(img, policy);
  GrayImage gray = equalize(intensity);
  const int w = gray.width();
  const int h = gray.height();
  const bool inverted = border_brighter(gray);
  if (inverted) {
    gray = invert(gray);
    intensity = invert(intensity);
  }
  const ScaleFactor scale = ScaleFactor::for_size(w, h);
  GrayImage smoothed = std::move(intensity);
  for (double s : cfg.smoothing_sigmas_sf) smoothed = gaussian_smooth(smoothed, s * scale.sf);

  std::optional<StageSnapshots> snap;
  if (cfg.keep_snapshots) {
    snap.emplace();
    snap->gray = gray;
    snap->smoothed = smoothed;
  }

  // Stage 2: Otsu foreground, distance markers, gradient flood.
  const Histogram256 hist = histogram(smoothed);
  if (hist.occupied_bins() < 2) {
    auto r = empty_result(w, h, inverted);
    r.snapshots = std::move(snap);
    return r;
  }
  const BinaryMask fg = binarize(smoothed, otsu_level(hist));
  if (fg.count() == 0) {
    auto r = empty_result(w, h, inverted);
    r.snapshots = std::move(snap);
    return r;
  }
  const LabelMap markers = extract_markers(smoothed, fg, cfg.split_merge.markers);
  LabelMap labels = normalize_labels(meyer_flood(gradient_magnitude(smoothed), markers, fg));
  if (snap) {
    snap->foreground = fg;
    snap->markers = markers;
    snap->watershed = labels;
  }

  // Stage 3: split-merge, twice.
  for (int pass = 0; pass < 2; ++pass) labels = split_merge_pass(smoothed, labels, cfg.split_merge);
  if (snap) snap->split_merge = labels;

  // Stages 4-6 run per object.
  std::vector<ObjectWork> objects(static_cast<std::size_t>(labels.max_label()));
  for (std::size_t i = 0; i < objects.size(); ++i) {
    objects[i].label = static_cast<std::int32_t>(i + 1);
    objects[i].box = {w, h, -1, -1};
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t l = labels(x, y);
      if (l == 0) continue;
      Box& b = objects[static_cast<std::size_t>(l - 1)].box;
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
    }
  }
  std::erase_if(objects, [](const ObjectWork& o) { return o.box.empty(); });

  const auto gray_sum = StimulationFields::gray_table(gray);
  double gray_total = 0.0;
  for (double v : gray.storage()) gray_total += v;
  const double gray_avg = gray_total / static_cast<double>(gray.size());

  parallel_for(objects.size(), cfg.jobs, [&](std::size_t i) {
    ObjectWork& o = objects[i];
    stage_contour(o, labels);
    stage_agents(o, labels, gray_sum, gray_avg, scale, cfg.agent);
    stage_otsu(o, gray);
  });

  BinaryMask agent_union(w, h);
  BinaryMask kept_union(w, h);
  SegmentationResult r;
  r.inverted = inverted;
  for (const ObjectWork& o : objects) {
    paste(agent_union, o.agent_mask, o.roi);
    paste(kept_union, o.kept, o.roi);
    r.objects.push_back({o.label, o.non_converged});
  }
  if (snap) {
    for (const ObjectWork& o : objects) {
      snap->contours.push_back({o.label, o.contour});
      snap->refined.push_back({o.label, o.refined});
    }
    snap->agent_masks = agent_union;
    snap->otsu_masks = kept_union;
  }

  // Final distance-transform split and merge.
  if (kept_union.count() == 0) {
    r.labels = LabelMap(w, h);
    r.binary = BinaryMask(w, h);
  } else {
    const LabelMap split = distance_split(kept_union, cfg.split_merge.markers);
    r.labels = merge_small(split, cluster_stats(split), cfg.split_merge.merge_factor, true);
    r.binary = foreground_of(r.labels);
  }
  r.snapshots = std::move(snap);
  return r;
}

std::vector<BatchItem> segment_batch(const std::vector<std::filesystem::path>& paths,
                                     const PipelineConfig& cfg) {
  std::vector<BatchItem> out(paths.size());
  PipelineConfig inner = cfg;
  if (paths.size() > 1) inner.jobs = 1;
  parallel_for(paths.size(), cfg.jobs, [&](std::size_t i) {
    BatchItem& item = out[i];
    item.path = paths[i];
    try {
      item.result = segment(io::load_image(paths[i]), inner);
    } catch (const Error& e) {
      item.error = e.code();
      item.message = e.what();
    } catch (const std::exception& e) {
      item.error = ErrorCode::IoError;
      item.message = e.what();
    }
  });
  return out;
}

}  // namespace nalg
