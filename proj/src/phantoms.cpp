#include "asymcs/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace asymcs {
namespace {

using Scene = std::function<double(double, double)>;

RMat Render(Index n, const Scene& scene) {
  ValidateShape(Shape::D2(n));
  RMat img(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double y = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
      const double x = (static_cast<double>(c) + 0.5) / static_cast<double>(n);
      img(r, c) = std::clamp(scene(x, y), 0.0, 1.0);
    }
  return img;
}

bool InEllipse(double x, double y, double cx, double cy, double a, double b, double theta) {
  const double dx = x - cx, dy = y - cy;
  const double u = dx * std::cos(theta) + dy * std::sin(theta);
  const double v = -dx * std::sin(theta) + dy * std::cos(theta);
  return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

}  // namespace

RMat GeometricPhantom(Index n) {
  return Render(n, [](double x, double y) {
    double v = 0.0;
    if (InEllipse(x, y, 0.5, 0.5, 0.42, 0.46, 0.0)) v = 0.35 + 0.25 * y;
    if (InEllipse(x, y, 0.5, 0.52, 0.37, 0.41, 0.0)) v = 0.15 + 0.1 * x;
    if (InEllipse(x, y, 0.36, 0.45, 0.08, 0.18, 0.35)) v = 0.75;
    if (InEllipse(x, y, 0.64, 0.45, 0.10, 0.16, -0.35)) v = 0.55 + 0.2 * std::sin(12.0 * y);
    const double bump = std::hypot(x - 0.5, y - 0.75);
    if (bump < 0.1) v = 0.6 + 0.35 * std::exp(-bump * bump / 0.002);
    if (x > 0.42 && x < 0.58 && y > 0.22 && y < 0.32) {
      v = (static_cast<int>((x - 0.42) / 0.02) % 2 == 0) ? 0.9 : 0.3;
    }
    for (int k = 0; k < 5; ++k) {
      const double cx = 0.3 + 0.025 * k, cy = 0.66 + 0.012 * k;
      if (std::hypot(x - cx, y - cy) < 0.008 + 0.002 * k) v = 1.0;
    }
    return v;
  });
}

RMat SmoothBlob(Index n) {
  return Render(n, [](double x, double y) {
    const double r2 = (x - 0.47) * (x - 0.47) + (y - 0.53) * (y - 0.53);
    return 0.9 * std::exp(-r2 / (2.0 * 0.12 * 0.12));
  });
}

RMat TvPhantom(Index n) {
  return Render(n, [](double x, double y) {
    double v = 0.1;
    if (x > 0.15 && x < 0.85 && y > 0.2 && y < 0.8) v = 0.4;
    if (std::hypot(x - 0.35, y - 0.4) < 0.12) v = 0.9;
    if (std::hypot(x - 0.65, y - 0.6) < 0.1) v = 0.7;
    if (x > 0.55 && x < 0.75 && y > 0.28 && y < 0.4) v = 0.0;
    if (x > 0.25 && x < 0.45 && y > 0.62 && y < 0.7) v = 1.0;
    return v;
  });
}

RMat PhantomById(const std::string& id, Index n) {
  if (id == "geometric") return GeometricPhantom(n);
  if (id == "blob") return SmoothBlob(n);
  if (id == "tv") return TvPhantom(n);
  throw Error(ErrorCode::kInvalidArgument, "target",
              "unknown synthetic target '" + id + "' (expected geometric, blob or tv)");
}

}  // namespace asymcs
