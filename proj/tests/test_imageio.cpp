#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "asymcs/imageio.hpp"

using namespace asymcs;

namespace {

std::filesystem::path TempDir() {
  const auto d = std::filesystem::temp_directory_path() / "asymcs_imageio_test";
  std::filesystem::create_directories(d);
  return d;
}

RMat RandomImage(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  RMat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("16-bit round trips stay within one quantization step") {
  const RMat img = RandomImage(17, 23, 1);
  for (const char* name : {"a.pgm", "a.png"}) {
    const std::string path = (TempDir() / name).string();
    SaveImage(path, img);
    const RMat back = LoadImage(path);
    REQUIRE(back.rows() == 17);
    REQUIRE(back.cols() == 23);
    CHECK((back - img).cwiseAbs().maxCoeff() <= 1.0 / 65535);
  }
}

TEST_CASE("8-bit files map 255 to 1") {
  RMat img(2, 2);
  img << 0, 1, 128.0 / 255, 1;
  for (const char* name : {"b.pgm", "b.png"}) {
    const std::string path = (TempDir() / name).string();
    if (std::string(name).ends_with(".pgm")) {
      SavePgm(path, img, 8);
    } else {
      SavePng(path, img, 8);
    }
    const RMat back = LoadImage(path);
    CHECK(back(0, 1) == 1.0);
    CHECK(back(0, 0) == 0.0);
    CHECK(back(1, 0) == doctest::Approx(128.0 / 255));
  }
}

TEST_CASE("hand-written 8-bit PGM") {
  const std::string path = (TempDir() / "c.pgm").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# comment\n3 1\n255\n";
    const unsigned char px[3] = {0, 51, 255};
    out.write(reinterpret_cast<const char*>(px), 3);
  }
  const RMat m = LoadPgm(path);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == doctest::Approx(0.2));
  CHECK(m(0, 2) == 1.0);
}

TEST_CASE("values are clamped on save") {
  RMat img(1, 2);
  img << -0.5, 2.0;
  const std::string path = (TempDir() / "d.pgm").string();
  SaveImage(path, img);
  const RMat back = LoadImage(path);
  CHECK(back(0, 0) == 0.0);
  CHECK(back(0, 1) == 1.0);
}

TEST_CASE("malformed and unsupported files") {
  const std::string bad = (TempDir() / "bad.pgm").string();
  {
    std::ofstream out(bad, std::ios::binary);
    out << "P5\n4 4\n255\n";  // missing pixels
  }
  CHECK_THROWS_AS(LoadPgm(bad), Error);
  const std::string notpng = (TempDir() / "bad.png").string();
  {
    std::ofstream out(notpng, std::ios::binary);
    out << "not a png";
  }
  CHECK_THROWS_AS(LoadPng(notpng), Error);
  CHECK_THROWS_AS(LoadImage((TempDir() / "x.bmp").string()), Error);
  CHECK_THROWS_AS(LoadImage((TempDir() / "missing.pgm").string()), Error);
}

TEST_CASE("fit to power of two: golden crop and pad") {
  RMat img(3, 6);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 6; ++j) img(i, j) = static_cast<double>(10 * i + j) / 100;
  // Crop: largest power-of-two square is 2 x 2; margins 1 row (extra at the
  // bottom: 0 above) and 4 columns (2 left, 2 right).
  RMat crop(2, 2);
  crop << 0.02, 0.03, 0.12, 0.13;
  CHECK(FitToPowerOfTwo(img, FitMode::kCrop) == crop);
  // Pad: smallest containing square is 8 x 8; 5 spare rows (2 above, 3 below)
  // and 2 spare columns (1 left, 1 right).
  const RMat pad = FitToPowerOfTwo(img, FitMode::kPad);
  REQUIRE(pad.rows() == 8);
  REQUIRE(pad.cols() == 8);
  CHECK(pad.block(2, 1, 3, 6) == img);
  CHECK(pad.sum() == doctest::Approx(img.sum()));
  CHECK(FitToPowerOfTwo(crop, FitMode::kPad) == crop);
}

TEST_CASE("vector conversion and bitmaps") {
  const RMat img = RandomImage(4, 4, 2);
  CHECK(VecToImage(ImageToVec(img), 4) == img);
  CHECK(ImageToVec(img)[1] == img(0, 1));
  const std::string path = (TempDir() / "m.pbm").string();
  std::vector<bool> bits(3 * 11);
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = (i * 7) % 3 == 0;
  SavePbm(path, 3, 11, bits);
  Index rows = 0, cols = 0;
  CHECK(LoadPbm(path, &rows, &cols) == bits);
  CHECK(rows == 3);
  CHECK(cols == 11);
  std::filesystem::remove_all(TempDir());
}
