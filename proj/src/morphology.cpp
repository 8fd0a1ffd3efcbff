#include "neuronalg/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace nalg {

namespace {

constexpr std::array<std::array<int, 2>, 8> kN8{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
constexpr std::array<std::array<int, 2>, 4> kN4{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

// Flood-fills components of pixels sharing the same key; key 0 is skipped.
template <typename Key>
LabelMap components_by_key(int w, int h, Key key, Connectivity conn) {
  LabelMap out(w, h);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto k = key(x, y);
      if (k == 0 || out(x, y) != 0) continue;
      ++next;
      out(x, y) = next;
      stack.assign(1, out.index(x, y));
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(i % w);
        const int cy = static_cast<int>(i / w);
        auto visit = [&](int dx, int dy) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
          if (out(nx, ny) != 0 || key(nx, ny) != k) return;
          out(nx, ny) = next;
          stack.push_back(out.index(nx, ny));
        };
        if (conn == Connectivity::Eight) {
          for (const auto& d : kN8) visit(d[0], d[1]);
        } else {
          for (const auto& d : kN4) visit(d[0], d[1]);
        }
      }
    }
  }
  return out;
}

// 1D squared distance transform (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

LabelMap label_components(const BinaryMask& mask, Connectivity conn) {
  return components_by_key(
      mask.width(), mask.height(), [&](int x, int y) { return mask(x, y) != 0 ? 1 : 0; }, conn);
}

LabelMap normalize_labels(const LabelMap& labels) {
  return components_by_key(
      labels.width(), labels.height(), [&](int x, int y) { return labels(x, y); },
      Connectivity::Eight);
}

std::vector<std::int64_t> label_areas(const LabelMap& labels) {
  std::vector<std::int64_t> areas(static_cast<std::size_t>(labels.max_label()) + 1, 0);
  for (auto v : labels.storage()) {
    if (v >= 0) ++areas[static_cast<std::size_t>(v)];
  }
  return areas;
}

BinaryMask region_mask(const LabelMap& labels, std::int32_t label) {
  BinaryMask m(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == label ? 1 : 0;
  return m;
}

BinaryMask foreground_of(const LabelMap& labels) {
  BinaryMask m(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] != 0 ? 1 : 0;
  return m;
}

Raster<double> distance_transform(const BinaryMask& mask) {
  // Pad by one background pixel on every side so the border acts as
  // background, then run the separable exact transform.
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  constexpr double kBig = 1e20;
  Raster<double> sq(w, h, 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) sq(x + 1, y + 1) = mask(x, y) ? kBig : 0.0;
  }

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = sq(x, y);
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) sq(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (int x = 0; x < w; ++x) f[x] = sq(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) sq(x, y) = d[x];
  }

  Raster<double> out(mask.width(), mask.height(), 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      out(x, y) = mask(x, y) ? std::sqrt(sq(x + 1, y + 1)) : 0.0;
    }
  }
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask outside(w, h);
  std::deque<std::size_t> queue;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      queue.push_back(mask.index(x, y));
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const int cx = static_cast<int>(i % w);
    const int cy = static_cast<int>(i / w);
    for (const auto& dd : kN4) {
      const int nx = cx + dd[0];
      const int ny = cy + dd[1];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  BinaryMask out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = outside[i] ? 0 : 1;
  return out;
}

namespace {

BinaryMask morph(const BinaryMask& mask, int radius, bool grow) {
  if (radius <= 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask out(w, h);
  const int r2 = radius * radius;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = !grow;
      for (int dy = -radius; dy <= radius && hit != grow; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dx * dx + dy * dy > r2) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          const bool v = mask.contains(nx, ny) ? mask(nx, ny) != 0 : false;
          if (grow && v) {
            hit = true;
            break;
          }
          if (!grow && !v) {
            hit = false;
            break;
          }
        }
      }
      out(x, y) = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int radius) { return morph(mask, radius, true); }
BinaryMask erode(const BinaryMask& mask, int radius) { return morph(mask, radius, false); }

}  // namespace nalg
