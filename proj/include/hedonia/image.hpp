#pragma once

#include <string>

#include "hedonia/tensor.hpp"

namespace hedonia {

// Images travel as [H, W, 3] tensors with values in [0, 1]. On disk they
// are 8-bit binary PPM (P6); values are promoted to doubles on load.

Tensor read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Tensor& image);

// Bilinear resample to side x side (align-corners-false convention:
// sample centers at (i + 0.5) * scale - 0.5, edge-clamped).
Tensor resize_bilinear(const Tensor& image, std::size_t side);

double channel_mean(const Tensor& image, std::size_t channel);

}  // namespace hedonia
