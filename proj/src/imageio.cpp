#include "asymcs/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace asymcs {
namespace {

std::string Extension(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Reads the next whitespace-separated header token, skipping # comments.
std::string NextToken(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

Index ParseDim(const std::string& tok, const std::string& path) {
  try {
    const long v = std::stol(tok);
    if (v <= 0) throw std::invalid_argument("nonpositive");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, path, "malformed header field '" + tok + "'");
  }
}

unsigned Quantize(double v, unsigned maxval) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::lround(c * maxval));
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

RMat LoadImage(const std::string& path) {
  const std::string ext = Extension(path);
  if (ext == "pgm") return LoadPgm(path);
  if (ext == "png") return LoadPng(path);
  throw Error(ErrorCode::kIo, path, "unsupported image extension '" + ext + "'");
}

void SaveImage(const std::string& path, const RMat& image) {
  const std::string ext = Extension(path);
  if (ext == "pgm") return SavePgm(path, image, 16);
  if (ext == "png") return SavePng(path, image, 16);
  throw Error(ErrorCode::kIo, path, "unsupported image extension '" + ext + "'");
}

void SavePgm(const std::string& path, const RMat& image, int bits) {
  if (bits != 8 && bits != 16) {
    throw Error(ErrorCode::kInvalidArgument, "bits", "PGM depth must be 8 or 16");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  const unsigned maxval = bits == 8 ? 255 : 65535;
  out << "P5\n" << image.cols() << " " << image.rows() << "\n" << maxval << "\n";
  std::vector<unsigned char> buf;
  buf.reserve(static_cast<size_t>(image.size()) * (bits / 8));
  for (Index r = 0; r < image.rows(); ++r)
    for (Index c = 0; c < image.cols(); ++c) {
      const unsigned q = Quantize(image(r, c), maxval);
      if (bits == 16) buf.push_back(static_cast<unsigned char>(q >> 8));
      buf.push_back(static_cast<unsigned char>(q & 0xff));
    }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::kIo, path, "write failed");
}

RMat LoadPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path, "cannot open for reading");
  if (NextToken(in) != "P5") {
    throw Error(ErrorCode::kIo, path, "not a binary PGM (P5) file");
  }
  const Index cols = ParseDim(NextToken(in), path);
  const Index rows = ParseDim(NextToken(in), path);
  const Index maxval = ParseDim(NextToken(in), path);
  if (maxval > 65535) throw Error(ErrorCode::kIo, path, "maxval above 65535");
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<size_t>(rows * cols * bytes));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw Error(ErrorCode::kIo, path, "truncated pixel data");
  }
  RMat image(rows, cols);
  for (Index i = 0; i < rows * cols; ++i) {
    const unsigned v = bytes == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
    image(i / cols, i % cols) = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return image;
}

void SavePng(const std::string& path, const RMat& image, int bits) {
  if (bits != 8 && bits != 16) {
    throw Error(ErrorCode::kInvalidArgument, "bits", "PNG depth must be 8 or 16");
  }
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, path, "libpng initialization failed");
  }
  const Index w = image.cols(), h = image.rows();
  const int bpp = bits / 8;
  const unsigned maxval = bits == 8 ? 255 : 65535;
  std::vector<unsigned char> row(static_cast<size_t>(w * bpp));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, path, "libpng write error");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), bits, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const unsigned q = Quantize(image(r, c), maxval);
      if (bpp == 2) {
        row[2 * c] = static_cast<unsigned char>(q >> 8);
        row[2 * c + 1] = static_cast<unsigned char>(q & 0xff);
      } else {
        row[c] = static_cast<unsigned char>(q);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RMat LoadPng(const std::string& path) {
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::kIo, path, "cannot open for reading");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::kIo, path, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, path, "libpng initialization failed");
  }
  RMat image;
  std::vector<unsigned char> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, path, "malformed PNG data");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  const Index w = png_get_image_width(png, info);
  const Index h = png_get_image_height(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const double maxval = out_depth == 16 ? 65535.0 : 255.0;
  row.resize(png_get_rowbytes(png, info));
  image.resize(h, w);
  for (Index r = 0; r < h; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (Index c = 0; c < w; ++c) {
      const unsigned v = out_depth == 16 ? (row[2 * c] << 8) | row[2 * c + 1] : row[c];
      image(r, c) = v / maxval;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

RMat FitToPowerOfTwo(const RMat& image, FitMode mode) {
  const Index h = image.rows(), w = image.cols();
  if (h == 0 || w == 0) throw Error(ErrorCode::kInvalidShape, "image", "empty image");
  Index side = 1;
  if (mode == FitMode::kCrop) {
    while (2 * side <= std::min(h, w)) side *= 2;
    if (side < 2) throw Error(ErrorCode::kInvalidShape, "image", "too small to crop");
    const Index r0 = (h - side) / 2, c0 = (w - side) / 2;
    return image.block(r0, c0, side, side);
  }
  while (side < std::max(h, w)) side *= 2;
  side = std::max<Index>(side, 2);
  RMat out = RMat::Zero(side, side);
  out.block((side - h) / 2, (side - w) / 2, h, w) = image;
  return out;
}

Vec ImageToVec(const RMat& image) {
  if (image.rows() != image.cols()) {
    throw Error(ErrorCode::kInvalidShape, "image", "image must be square");
  }
  const Index n = image.rows();
  Vec v(n * n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) v[r * n + c] = image(r, c);
  return v;
}

RMat VecToImage(const Vec& v, Index n) {
  if (v.size() != n * n) {
    throw Error(ErrorCode::kInvalidShape, "v", "length is not n*n");
  }
  RMat image(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) image(r, c) = v[r * n + c].real();
  return image;
}

void SavePbm(const std::string& path, Index rows, Index cols,
             const std::vector<bool>& bits) {
  if (static_cast<Index>(bits.size()) != rows * cols) {
    throw Error(ErrorCode::kInvalidShape, "bits", "size is not rows*cols");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out << "P4\n" << cols << " " << rows << "\n";
  const Index stride = (cols + 7) / 8;
  std::vector<unsigned char> row(static_cast<size_t>(stride));
  for (Index r = 0; r < rows; ++r) {
    std::fill(row.begin(), row.end(), 0);
    for (Index c = 0; c < cols; ++c)
      if (bits[r * cols + c]) row[c / 8] |= static_cast<unsigned char>(0x80 >> (c % 8));
    out.write(reinterpret_cast<const char*>(row.data()), stride);
  }
  if (!out) throw Error(ErrorCode::kIo, path, "write failed");
}

std::vector<bool> LoadPbm(const std::string& path, Index* rows, Index* cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path, "cannot open for reading");
  if (NextToken(in) != "P4") throw Error(ErrorCode::kIo, path, "not a binary PBM (P4) file");
  *cols = ParseDim(NextToken(in), path);
  *rows = ParseDim(NextToken(in), path);
  const Index stride = (*cols + 7) / 8;
  std::vector<unsigned char> row(static_cast<size_t>(stride));
  std::vector<bool> bits(static_cast<size_t>(*rows * *cols));
  for (Index r = 0; r < *rows; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), stride);
    if (in.gcount() != stride) throw Error(ErrorCode::kIo, path, "truncated bitmap");
    for (Index c = 0; c < *cols; ++c)
      bits[r * *cols + c] = (row[c / 8] >> (7 - c % 8)) & 1;
  }
  return bits;
}

}  // namespace asymcs
