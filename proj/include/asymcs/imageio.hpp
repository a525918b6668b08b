#pragma once

#include <string>
#include <vector>

#include "asymcs/core.hpp"

namespace asymcs {

// Grayscale images are RMat with values in [0, 1], rows x cols.

// Format is chosen from the extension: .pgm (binary P5, 8 or 16 bit) or .png
// (8 or 16 bit grayscale; color inputs are converted to luma).
RMat LoadImage(const std::string& path);
// Values are clamped to [0, 1] and quantized to 16 bits.
void SaveImage(const std::string& path, const RMat& image);

void SavePgm(const std::string& path, const RMat& image, int bits = 16);
RMat LoadPgm(const std::string& path);
void SavePng(const std::string& path, const RMat& image, int bits = 16);
RMat LoadPng(const std::string& path);

enum class FitMode { kCrop, kPad };

// Square power-of-two image: kCrop takes the centered largest power-of-two
// square that fits, kPad centers the image on the smallest power-of-two square
// that contains it (zero fill). Odd margins put the extra row/column at the
// bottom/right.
RMat FitToPowerOfTwo(const RMat& image, FitMode mode);

// Row-major linearization of a square image and back (real part).
Vec ImageToVec(const RMat& image);
RMat VecToImage(const Vec& v, Index n);

// Plain bitmaps (binary P4) for sampling masks; true = black = sampled.
void SavePbm(const std::string& path, Index rows, Index cols,
             const std::vector<bool>& bits);
std::vector<bool> LoadPbm(const std::string& path, Index* rows, Index* cols);

}  // namespace asymcs
