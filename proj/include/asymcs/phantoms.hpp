#pragma once

#include <string>

#include "asymcs/core.hpp"

namespace asymcs {

// Synthetic test images with values in [0, 1], defined on the continuous
// square [0, 1)^2 and sampled at pixel centers, so the same scene can be
// rendered at any resolution.

// Piecewise-smooth scene: nested ellipses with intensity ramps, a bar
// pattern, a disc with a smooth bump and a cluster of small dots.
RMat GeometricPhantom(Index n);
// Smooth Gaussian blob centered slightly off the middle.
RMat SmoothBlob(Index n);
// Piecewise-constant scene (rectangles and discs at a few levels).
RMat TvPhantom(Index n);

// Look up a phantom by id: "geometric", "blob" or "tv".
RMat PhantomById(const std::string& id, Index n);

}  // namespace asymcs
