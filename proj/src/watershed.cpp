#include "neuronalg/watershed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "neuronalg/morphology.hpp"

namespace nalg {

namespace {

constexpr std::array<std::array<int, 2>, 4> kN4{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};
constexpr std::array<std::array<int, 2>, 8> kN8{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

constexpr std::int32_t kRidge = -1;

// Grayscale reconstruction by dilation of `seed` under `limit`, restricted
// to `domain` (8-connected).
Raster<double> reconstruct(const Raster<double>& seed, const Raster<double>& limit,
                           const BinaryMask& domain) {
  const int w = seed.width();
  Raster<double> rec = seed;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item> heap;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (domain[i]) heap.emplace(rec[i], i);
  }
  while (!heap.empty()) {
    const auto [value, i] = heap.top();
    heap.pop();
    if (value < rec[i]) continue;
    const int cx = static_cast<int>(i % w);
    const int cy = static_cast<int>(i / w);
    for (const auto& d : kN8) {
      const int nx = cx + d[0];
      const int ny = cy + d[1];
      if (!rec.contains(nx, ny)) continue;
      const std::size_t j = rec.index(nx, ny);
      if (!domain[j]) continue;
      const double cand = std::min(value, limit[j]);
      if (cand > rec[j]) {
        rec[j] = cand;
        heap.emplace(cand, j);
      }
    }
  }
  return rec;
}

}  // namespace

GradientImage gradient_magnitude(const GrayImage& img) {
  GradientImage g(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      auto v = [&](int dx, int dy) { return img.clamped(x + dx, y + dy); };
      const double gx = (v(1, -1) + 2.0 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2.0 * v(-1, 0) + v(-1, 1));
      const double gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
      g(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

LabelMap markers_from_elevation(const Raster<double>& elevation, const BinaryMask& domain,
                                const MarkerOptions& opt) {
  require_same_shape(elevation, domain, "markers_from_elevation");
  const int w = elevation.width();
  const int h = elevation.height();

  double global_max = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < elevation.size(); ++i) {
    if (domain[i]) {
      global_max = any ? std::max(global_max, elevation[i]) : elevation[i];
      any = true;
    }
  }
  if (!any) fail(ErrorCode::EmptyForeground, "no foreground pixels for marker extraction");

  Raster<double> seed(w, h, 0.0);
  for (std::size_t i = 0; i < seed.size(); ++i) {
    seed[i] = domain[i] ? elevation[i] - opt.h : 0.0;
  }
  const Raster<double> rec = reconstruct(seed, elevation, domain);

  // Plateaus of the reconstruction: connected pixels of identical value.
  LabelMap plateau(w, h);
  {
    std::int32_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < rec.size(); ++s) {
      if (!domain[s] || plateau[s] != 0) continue;
      plateau[s] = ++next;
      stack.assign(1, s);
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(i % w);
        const int cy = static_cast<int>(i / w);
        for (const auto& d : kN8) {
          const int nx = cx + d[0];
          const int ny = cy + d[1];
          if (!rec.contains(nx, ny)) continue;
          const std::size_t j = rec.index(nx, ny);
          if (domain[j] && plateau[j] == 0 && rec[j] == rec[s]) {
            plateau[j] = next;
            stack.push_back(j);
          }
        }
      }
    }
  }

  const std::size_t n_plateaus = static_cast<std::size_t>(plateau.max_label()) + 1;
  std::vector<char> is_max(n_plateaus, 1);
  std::vector<double> peak(n_plateaus, 0.0);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (!domain[i]) continue;
    const auto p = static_cast<std::size_t>(plateau[i]);
    peak[p] = std::max(peak[p], elevation[i]);
    const int cx = static_cast<int>(i % w);
    const int cy = static_cast<int>(i / w);
    for (const auto& d : kN8) {
      const int nx = cx + d[0];
      const int ny = cy + d[1];
      if (!rec.contains(nx, ny)) continue;
      const std::size_t j = rec.index(nx, ny);
      if (domain[j] && rec[j] > rec[i]) is_max[p] = 0;
    }
  }

  BinaryMask marker_px(w, h);
  const double cutoff = opt.suppression_ratio * global_max;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (!domain[i]) continue;
    const auto p = static_cast<std::size_t>(plateau[i]);
    if (is_max[p] && peak[p] >= cutoff) marker_px[i] = 1;
  }

  // Every 4-connected domain component keeps at least one marker, so a
  // 4-connected flood restricted to the domain reaches every domain pixel.
  const LabelMap comps = label_components(domain, Connectivity::Four);
  const std::size_t n_comps = static_cast<std::size_t>(comps.max_label()) + 1;
  std::vector<char> has_marker(n_comps, 0);
  std::vector<std::size_t> top(n_comps, 0);
  std::vector<char> top_set(n_comps, 0);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto c = static_cast<std::size_t>(comps[i]);
    if (c == 0) continue;
    if (marker_px[i]) has_marker[c] = 1;
    if (!top_set[c] || elevation[i] > elevation[top[c]]) {
      top[c] = i;
      top_set[c] = 1;
    }
  }
  for (std::size_t c = 1; c < n_comps; ++c) {
    if (!has_marker[c] && top_set[c]) marker_px[top[c]] = 1;
  }

  return label_components(marker_px, Connectivity::Eight);
}

LabelMap extract_markers(const GrayImage& smoothed, const BinaryMask& foreground,
                         const MarkerOptions& opt) {
  require_same_shape(smoothed, foreground, "extract_markers");
  if (foreground.count() == 0) fail(ErrorCode::EmptyForeground, "foreground mask is empty");
  return markers_from_elevation(distance_transform(foreground), foreground, opt);
}

LabelMap meyer_flood(const GradientImage& grad, const LabelMap& markers,
                     const std::optional<BinaryMask>& domain) {
  require_same_shape(grad, markers, "meyer_flood");
  if (domain) require_same_shape(grad, *domain, "meyer_flood");
  if (markers.foreground_count() == 0) fail(ErrorCode::EmptyMarkers, "no marker labels");

  const int w = grad.width();
  LabelMap labels = markers;
  std::vector<char> queued(labels.size(), 0);
  auto allowed = [&](std::size_t j) { return !domain || (*domain)[j] != 0; };

  struct Item {
    double priority;
    std::uint64_t seq;
    std::size_t index;
    bool operator>(const Item& o) const {
      return priority != o.priority ? priority > o.priority : seq > o.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::uint64_t seq = 0;

  auto push_neighbours = [&](std::size_t i) {
    const int cx = static_cast<int>(i % w);
    const int cy = static_cast<int>(i / w);
    for (const auto& d : kN4) {
      const int nx = cx + d[0];
      const int ny = cy + d[1];
      if (!labels.contains(nx, ny)) continue;
      const std::size_t j = labels.index(nx, ny);
      if (labels[j] != 0 || queued[j] || !allowed(j)) continue;
      queued[j] = 1;
      queue.push(Item{grad[j], seq++, j});
    }
  };

  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0) push_neighbours(i);
  }

  std::vector<std::size_t> ridges;
  while (!queue.empty()) {
    const std::size_t i = queue.top().index;
    queue.pop();
    const int cx = static_cast<int>(i % w);
    const int cy = static_cast<int>(i / w);
    std::int32_t agreed = 0;
    bool conflict = false;
    for (const auto& d : kN4) {
      const int nx = cx + d[0];
      const int ny = cy + d[1];
      if (!labels.contains(nx, ny)) continue;
      const std::int32_t l = labels(nx, ny);
      if (l <= 0) continue;
      if (agreed == 0) {
        agreed = l;
      } else if (l != agreed) {
        conflict = true;
      }
    }
    if (agreed != 0 && !conflict) {
      labels[i] = agreed;
    } else {
      labels[i] = kRidge;
      ridges.push_back(i);
    }
    push_neighbours(i);
  }

  // Ridge pixels join the adjacent basin across the lowest-gradient edge.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i : ridges) {
      if (labels[i] != kRidge) continue;
      const int cx = static_cast<int>(i % w);
      const int cy = static_cast<int>(i / w);
      std::int32_t best = 0;
      double best_g = 0.0;
      for (const auto& d : kN4) {
        const int nx = cx + d[0];
        const int ny = cy + d[1];
        if (!labels.contains(nx, ny)) continue;
        const std::int32_t l = labels(nx, ny);
        if (l <= 0) continue;
        const double g = grad(nx, ny);
        if (best == 0 || g < best_g) {
          best = l;
          best_g = g;
        }
      }
      if (best != 0) {
        labels[i] = best;
        changed = true;
      }
    }
  }
  for (auto& l : labels.storage()) {
    if (l == kRidge) l = 0;
  }
  return labels;
}

}  // namespace nalg
