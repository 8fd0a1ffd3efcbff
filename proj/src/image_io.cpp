#include "neuronalg/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace nalg::io {

namespace {

cv::Mat read_raw(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::IoError, "cannot read " + path.string());
  }
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    fail(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
  if (raw.empty()) fail(ErrorCode::DecodeError, "cannot decode " + path.string());
  return raw;
}

double depth_scale(int depth, const std::filesystem::path& path) {
  switch (depth) {
    case CV_8U: return 1.0 / 255.0;
    case CV_16U: return 1.0 / 65535.0;
    default:
      fail(ErrorCode::DecodeError, "unsupported bit depth in " + path.string());
  }
}

void write_mat(const std::filesystem::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    ok = cv::imwrite(path.string(), m);
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, path.string() + ": " + e.what());
  }
  if (!ok) fail(ErrorCode::IoError, "cannot write " + path.string());
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

AnyImage load_image(const std::filesystem::path& path) {
  const cv::Mat raw = read_raw(path);
  const double scale = depth_scale(raw.depth(), path);
  const int w = raw.cols;
  const int h = raw.rows;
  cv::Mat m;
  raw.convertTo(m, CV_64F, scale);

  if (m.channels() == 1) {
    GrayImage g(w, h);
    for (int y = 0; y < h; ++y) {
      const double* row = m.ptr<double>(y);
      for (int x = 0; x < w; ++x) g(x, y) = std::clamp(row[x], 0.0, 1.0);
    }
    return g;
  }
  if (m.channels() == 3 || m.channels() == 4) {
    const int c = m.channels();
    RgbImage rgb(w, h);
    for (int y = 0; y < h; ++y) {
      const double* row = m.ptr<double>(y);
      for (int x = 0; x < w; ++x) {
        // OpenCV orders channels BGR(A).
        rgb(x, y) = Rgb{std::clamp(row[x * c + 2], 0.0, 1.0), std::clamp(row[x * c + 1], 0.0, 1.0),
                        std::clamp(row[x * c + 0], 0.0, 1.0)};
      }
    }
    return rgb;
  }
  fail(ErrorCode::DecodeError, "unsupported channel count in " + path.string());
}

LabelMap load_label_image(const std::filesystem::path& path) {
  const cv::Mat raw = read_raw(path);
  if (raw.depth() != CV_8U && raw.depth() != CV_16U && raw.depth() != CV_32S) {
    fail(ErrorCode::DecodeError, "unsupported label depth in " + path.string());
  }
  cv::Mat single = raw;
  if (raw.channels() > 1) {
    std::vector<cv::Mat> planes;
    cv::split(raw, planes);
    single = planes[0];
  }
  cv::Mat m;
  single.convertTo(m, CV_32S);
  LabelMap lm(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const std::int32_t* row = m.ptr<std::int32_t>(y);
    for (int x = 0; x < m.cols; ++x) lm(x, y) = row[x];
  }
  return lm;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  cv::Mat m(img.height(), img.width(), CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) m.at<std::uint8_t>(y, x) = to_u8(img(x, y));
  }
  write_mat(path, m);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) m.at<std::uint8_t>(y, x) = mask(x, y) ? 255 : 0;
  }
  write_mat(path, m);
}

void write_label_png(const std::filesystem::path& path, const LabelMap& labels) {
  cv::Mat m(labels.height(), labels.width(), CV_16UC1);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      m.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(std::clamp(labels(x, y), 0, 65535));
    }
  }
  write_mat(path, m);
}

void write_overlay_png(const std::filesystem::path& path, const GrayImage& img,
                       const LabelMap& labels) {
  require_same_shape(img, labels, "overlay");
  cv::Mat m(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::int32_t l = labels(x, y);
      bool edge = false;
      if (l != 0) {
        constexpr std::array<std::array<int, 2>, 4> kN{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};
        for (const auto& d : kN) {
          const int nx = x + d[0];
          const int ny = y + d[1];
          if (!labels.contains(nx, ny) || labels(nx, ny) != l) edge = true;
        }
      }
      const std::uint8_t g = to_u8(img(x, y));
      m.at<cv::Vec3b>(y, x) = edge ? cv::Vec3b(0, 0, 255) : cv::Vec3b(g, g, g);
    }
  }
  write_mat(path, m);
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" || ext == ".tiff" ||
         ext == ".bmp";
}

}  // namespace nalg::io
