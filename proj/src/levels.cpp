#include "asymcs/levels.hpp"

#include <algorithm>

namespace asymcs {

LevelStructure::LevelStructure(std::vector<Index> boundaries)
    : bounds_(std::move(boundaries)) {
  if (bounds_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "levels", "no boundaries given");
  }
  Index prev = 0;
  for (Index b : bounds_) {
    if (b <= prev) {
      throw Error(ErrorCode::kInvalidArgument, "levels",
                  "boundaries must be strictly increasing and positive");
    }
    prev = b;
  }
}

LevelStructure LevelStructure::Single(Index total) {
  return LevelStructure({total});
}

LevelStructure LevelStructure::Dyadic(Index total, int r) {
  std::vector<Index> b;
  for (int k = r - 1; k >= 0; --k) b.push_back(total >> k);
  return LevelStructure(std::move(b));
}

int LevelStructure::band_of(Index i) const {
  if (i < 0 || i >= total()) {
    throw Error(ErrorCode::kOutOfRange, "index", "outside level structure");
  }
  auto it = std::upper_bound(bounds_.begin(), bounds_.end(), i);
  return static_cast<int>(it - bounds_.begin());
}

}  // namespace asymcs
