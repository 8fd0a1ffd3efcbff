#pragma once

#include <filesystem>

#include "neuronalg/imagecore.hpp"

namespace nalg::io {

// PNG/JPEG/TIFF, 8 or 16 bit. Single-channel files load as GrayImage,
// colour files as RgbImage. 16-bit data is scaled by 1/65535.
AnyImage load_image(const std::filesystem::path& path);

// Integer label raster from an image file (8/16-bit single channel).
LabelMap load_label_image(const std::filesystem::path& path);

void write_gray_png(const std::filesystem::path& path, const GrayImage& img);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
// 16-bit grayscale, pixel value = label id (saturates at 65535).
void write_label_png(const std::filesystem::path& path, const LabelMap& labels);
// Input in gray with the prediction boundary drawn in red.
void write_overlay_png(const std::filesystem::path& path, const GrayImage& img,
                       const LabelMap& labels);

bool is_image_file(const std::filesystem::path& path);

}  // namespace nalg::io
