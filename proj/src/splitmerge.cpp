#include "neuronalg/splitmerge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>

#include "neuronalg/imagecore.hpp"
#include "neuronalg/morphology.hpp"
#include "neuronalg/threshold.hpp"

namespace nalg {

namespace {

constexpr std::array<std::array<int, 2>, 8> kN8{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

using PixelList = std::vector<std::size_t>;

// 8-connected components of a pixel subset, largest first (ties: earliest
// first pixel).
std::vector<PixelList> components_of(const PixelList& pixels, int w, int h) {
  if (pixels.empty()) return {};
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (std::size_t i : pixels) {
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  BinaryMask local(x1 - x0 + 1, y1 - y0 + 1);
  for (std::size_t i : pixels) {
    local(static_cast<int>(i % w) - x0, static_cast<int>(i / w) - y0) = 1;
  }
  const LabelMap comp = label_components(local, Connectivity::Eight);
  std::vector<PixelList> out(static_cast<std::size_t>(comp.max_label()));
  for (int y = 0; y < comp.height(); ++y) {
    for (int x = 0; x < comp.width(); ++x) {
      const std::int32_t c = comp(x, y);
      if (c > 0) out[c - 1].push_back(static_cast<std::size_t>(y + y0) * w + (x + x0));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PixelList& a, const PixelList& b) { return a.size() > b.size(); });
  return out;
}

struct Attempt {
  std::vector<PixelList> seeds;
  std::string note;
};

Attempt find_seeds(const GrayImage& img, const PixelList& fragment, int need, int max_depth) {
  const int w = img.width();
  const int h = img.height();
  PixelList subset = fragment;
  for (int depth = 0; depth < std::max(1, max_depth); ++depth) {
    Histogram256 hist;
    for (std::size_t i : subset) hist.add(quantize(img[i]));
    if (hist.occupied_bins() < 2) return {{}, "DegenerateHistogram"};
    const int level = otsu_level(hist);
    PixelList bright;
    for (std::size_t i : subset) {
      if (quantize(img[i]) > level) bright.push_back(i);
    }
    std::vector<PixelList> comps = components_of(bright, w, h);
    if (comps.size() >= 2) {
      comps.resize(std::min<std::size_t>(comps.size(), static_cast<std::size_t>(need)));
      return {std::move(comps), {}};
    }
    subset = std::move(bright);
  }
  return {{}, "RecursionLimit"};
}

// Multi-source BFS inside `fragment`; returns, per fragment pixel (in the
// order given), the index of the seed that claimed it.
std::vector<int> geodesic_assign(const PixelList& fragment, const std::vector<PixelList>& seeds,
                                 int w, int h) {
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t k = 0; k < fragment.size(); ++k) pos.emplace(fragment[k], k);
  std::vector<int> owner(fragment.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t i : seeds[s]) {
      const std::size_t k = pos.at(i);
      owner[k] = static_cast<int>(s);
      queue.push_back(k);
    }
  }
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    const int cx = static_cast<int>(fragment[k] % w);
    const int cy = static_cast<int>(fragment[k] / w);
    for (const auto& d : kN8) {
      const int nx = cx + d[0];
      const int ny = cy + d[1];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      auto it = pos.find(static_cast<std::size_t>(ny) * w + nx);
      if (it == pos.end() || owner[it->second] >= 0) continue;
      owner[it->second] = owner[k];
      queue.push_back(it->second);
    }
  }
  return owner;
}

}  // namespace

ClusterStats cluster_stats(const LabelMap& lm) {
  const std::vector<std::int64_t> all = label_areas(lm);
  ClusterStats s;
  s.areas.assign(all.begin() + 1, all.end());
  std::int64_t total = 0;
  std::int64_t n = 0;
  for (auto a : s.areas) {
    if (a > 0) {
      total += a;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyLabelMap, "label map has no labels");
  s.a_avg = static_cast<double>(total) / static_cast<double>(n);
  return s;
}

std::vector<SplitPlan> plan_splits(const ClusterStats& stats, double split_factor) {
  if (!(split_factor > 1.0)) fail(ErrorCode::InvalidParameter, "split_factor must exceed 1");
  std::vector<SplitPlan> plans;
  if (!(stats.a_avg > 0.0)) return plans;
  for (std::size_t i = 0; i < stats.areas.size(); ++i) {
    const auto a = static_cast<double>(stats.areas[i]);
    if (stats.areas[i] > 0 && a > split_factor * stats.a_avg) {
      SplitPlan p;
      p.label = static_cast<std::int32_t>(i + 1);
      p.r = a / stats.a_avg;
      p.k = std::max(2, static_cast<int>(std::floor(p.r + 0.5)));
      plans.push_back(p);
    }
  }
  return plans;
}

SplitOutcome split_cluster_detailed(const GrayImage& img, const LabelMap& lm,
                                    const SplitPlan& plan, int max_depth) {
  require_same_shape(img, lm, "split_cluster");
  const int w = lm.width();
  const int h = lm.height();
  PixelList region;
  for (std::size_t i = 0; i < lm.size(); ++i) {
    if (lm[i] == plan.label) region.push_back(i);
  }
  if (plan.label <= 0 || region.empty()) {
    fail(ErrorCode::UnknownLabel, "label " + std::to_string(plan.label) + " not present");
  }

  struct Fragment {
    PixelList pixels;
    std::int32_t id;
    bool frozen = false;
  };
  std::vector<Fragment> fragments{{std::move(region), plan.label, false}};
  std::int32_t next_id = lm.max_label();
  SplitOutcome out{lm, 1, {}};

  while (out.pieces < plan.k) {
    int pick = -1;
    for (std::size_t f = 0; f < fragments.size(); ++f) {
      if (fragments[f].frozen) continue;
      if (pick < 0 || fragments[f].pixels.size() > fragments[static_cast<std::size_t>(pick)].pixels.size()) {
        pick = static_cast<int>(f);
      }
    }
    if (pick < 0) break;
    Fragment& frag = fragments[static_cast<std::size_t>(pick)];
    Attempt a = find_seeds(img, frag.pixels, plan.k - out.pieces + 1, max_depth);
    if (a.seeds.size() < 2) {
      frag.frozen = true;
      if (out.note.empty()) out.note = a.note;
      continue;
    }
    const std::vector<int> owner = geodesic_assign(frag.pixels, a.seeds, w, h);
    std::vector<Fragment> pieces(a.seeds.size());
    pieces[0].id = frag.id;
    for (std::size_t s = 1; s < pieces.size(); ++s) pieces[s].id = ++next_id;
    for (std::size_t k = 0; k < frag.pixels.size(); ++k) {
      pieces[static_cast<std::size_t>(owner[k])].pixels.push_back(frag.pixels[k]);
    }
    out.pieces += static_cast<int>(pieces.size()) - 1;
    fragments.erase(fragments.begin() + pick);
    for (auto& p : pieces) fragments.push_back(std::move(p));
  }

  for (const Fragment& f : fragments) {
    for (std::size_t i : f.pixels) out.labels[i] = f.id;
  }
  return out;
}

LabelMap split_cluster(const GrayImage& img, const LabelMap& lm, const SplitPlan& plan,
                       int max_depth) {
  return split_cluster_detailed(img, lm, plan, max_depth).labels;
}

LabelMap merge_small(const LabelMap& lm, const ClusterStats& stats, double merge_factor,
                     bool drop_isolated) {
  if (!(merge_factor > 0.0 && merge_factor < 1.0)) {
    fail(ErrorCode::InvalidParameter, "merge_factor must lie in (0, 1)");
  }
  const int w = lm.width();
  const int h = lm.height();
  LabelMap cur = lm;
  const std::size_t n_labels = static_cast<std::size_t>(cur.max_label()) + 1;
  std::vector<PixelList> pixels(n_labels);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (cur[i] > 0) pixels[static_cast<std::size_t>(cur[i])].push_back(i);
  }
  const double cutoff = merge_factor * stats.a_avg;

  std::vector<std::int32_t> order;
  for (std::size_t l = 1; l < n_labels; ++l) {
    if (!pixels[l].empty() && static_cast<double>(pixels[l].size()) < cutoff) {
      order.push_back(static_cast<std::int32_t>(l));
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return pixels[static_cast<std::size_t>(a)].size() < pixels[static_cast<std::size_t>(b)].size();
  });

  for (std::int32_t s : order) {
    PixelList& own = pixels[static_cast<std::size_t>(s)];
    if (own.empty() || static_cast<double>(own.size()) >= cutoff) continue;
    std::map<std::int32_t, std::int64_t> shared;
    for (std::size_t i : own) {
      const int cx = static_cast<int>(i % w);
      const int cy = static_cast<int>(i / w);
      for (const auto& d : kN8) {
        const int nx = cx + d[0];
        const int ny = cy + d[1];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::int32_t l = cur(nx, ny);
        if (l > 0 && l != s) ++shared[l];
      }
    }
    std::int32_t target = 0;
    std::int64_t best_len = 0;
    for (const auto& [l, len] : shared) {
      const std::size_t la = pixels[static_cast<std::size_t>(l)].size();
      if (len > best_len ||
          (len == best_len && la > pixels[static_cast<std::size_t>(target)].size())) {
        target = l;
        best_len = len;
      }
    }
    if (target == 0) {
      if (!drop_isolated) continue;
      for (std::size_t i : own) cur[i] = 0;
      own.clear();
      continue;
    }
    PixelList& dst = pixels[static_cast<std::size_t>(target)];
    for (std::size_t i : own) {
      cur[i] = target;
      dst.push_back(i);
    }
    own.clear();
  }
  return normalize_labels(cur);
}

LabelMap split_merge_pass(const GrayImage& img, const LabelMap& lm, const SplitMergeConfig& cfg) {
  require_same_shape(img, lm, "split_merge_pass");
  LabelMap cur = normalize_labels(lm);
  const ClusterStats stats = cluster_stats(cur);
  for (const SplitPlan& plan : plan_splits(stats, cfg.split_factor)) {
    cur = split_cluster(img, cur, plan, cfg.max_recursion_depth);
  }
  cur = normalize_labels(cur);
  const ClusterStats refreshed = cluster_stats(cur);
  return merge_small(cur, refreshed, cfg.merge_factor, /*drop_isolated=*/false);
}

LabelMap distance_split(const BinaryMask& mask, const MarkerOptions& opt) {
  if (mask.count() == 0) fail(ErrorCode::EmptyForeground, "mask is empty");
  const Raster<double> dist = distance_transform(mask);
  const LabelMap markers = markers_from_elevation(dist, mask, opt);
  double peak = 0.0;
  for (double d : dist.storage()) peak = std::max(peak, d);
  GradientImage elevation(mask.width(), mask.height());
  for (std::size_t i = 0; i < dist.size(); ++i) elevation[i] = mask[i] ? peak - dist[i] : peak;
  return normalize_labels(meyer_flood(elevation, markers, mask));
}

}  // namespace nalg
