#pragma once

#include <string>

#include "gscout/imgcore.hpp"

namespace gscout {

/// Reads 8/16-bit gray, gray+alpha, RGB or RGBA PNGs. Color is reduced to
/// luma; alpha is dropped. Throws Error(kIo) on failure.
GrayImage read_png(const std::string& path);

/// Writes an 8-bit grayscale PNG.
void write_png(const std::string& path, const GrayImage& img);

}  // namespace gscout
