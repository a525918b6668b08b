#include "asymcs/sparsity.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace asymcs {
namespace {

void CheckLength(const Vec& coeffs, const LevelStructure& levels) {
  if (coeffs.size() != levels.total()) {
    throw Error(ErrorCode::kInvalidShape, "coeffs",
                "length " + std::to_string(coeffs.size()) + " does not match levels total " +
                    std::to_string(levels.total()));
  }
}

void CheckEpsilon(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon", "must lie in (0, 1]");
  }
}

// Squared magnitudes of one band, sorted descending; ties keep index order.
std::vector<double> SortedEnergies(const Vec& coeffs, Index begin, Index width) {
  std::vector<double> e(static_cast<size_t>(width));
  for (Index i = 0; i < width; ++i) e[i] = std::norm(coeffs[begin + i]);
  std::stable_sort(e.begin(), e.end(), std::greater<>());
  return e;
}

Index SmallestL(const std::vector<double>& sorted, double eps) {
  std::vector<double> cum(sorted.size() + 1, 0.0);
  for (size_t i = 0; i < sorted.size(); ++i) cum[i + 1] = cum[i] + sorted[i];
  const double total = cum.back();
  if (total == 0.0) return 0;
  // The relative slack absorbs rounding in eps^2 (e.g. 0.8^2 > 0.64).
  const double target = eps * eps * total * (1.0 - 1e-12);
  for (size_t l = 0; l <= sorted.size(); ++l)
    if (cum[l] >= target) return static_cast<Index>(l);
  return static_cast<Index>(sorted.size());
}

}  // namespace

std::vector<Index> LocalSparsity(const Vec& coeffs, const LevelStructure& levels,
                                 double epsilon) {
  CheckEpsilon(epsilon);
  CheckLength(coeffs, levels);
  std::vector<Index> s;
  for (int k = 0; k < levels.count(); ++k)
    s.push_back(SmallestL(SortedEnergies(coeffs, levels.begin(k), levels.width(k)), epsilon));
  return s;
}

SparsityProfile SparsityCurveFromCoefficients(const Vec& coeffs,
                                              const LevelStructure& levels,
                                              const std::vector<double>& epsilons) {
  CheckLength(coeffs, levels);
  for (double e : epsilons) CheckEpsilon(e);
  SparsityProfile p;
  p.levels = levels;
  p.epsilons = epsilons;
  const Index ne = static_cast<Index>(epsilons.size());
  p.s.resize(ne, levels.count());
  p.relative.resize(ne, levels.count());
  for (int k = 0; k < levels.count(); ++k) {
    const std::vector<double> sorted = SortedEnergies(coeffs, levels.begin(k), levels.width(k));
    for (Index e = 0; e < ne; ++e) {
      p.s(e, k) = SmallestL(sorted, epsilons[e]);
      p.relative(e, k) = static_cast<double>(p.s(e, k)) / static_cast<double>(levels.width(k));
    }
  }
  return p;
}

SparsityProfile SparsityCurve(const Vec& image, const Shape& shape,
                              const WaveletSpec& wavelet,
                              const std::vector<double>& epsilons) {
  const Vec coeffs = Dwt(image, shape, wavelet, Direction::kForward);
  return SparsityCurveFromCoefficients(coeffs, WaveletLevels(shape, wavelet.levels), epsilons);
}

void WriteSparsityCsv(const std::string& path, const SparsityProfile& profile) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out.precision(17);
  out << "k,epsilon,s_k,relative\n";
  for (int k = 0; k < profile.levels.count(); ++k)
    for (size_t e = 0; e < profile.epsilons.size(); ++e)
      out << k << "," << profile.epsilons[e] << "," << profile.s(e, k) << ","
          << profile.relative(e, k) << "\n";
}

LevelSparsityCheck IsSparseInLevels(const Vec& coeffs, const LevelStructure& levels,
                                    const std::vector<Index>& budgets, double threshold) {
  CheckLength(coeffs, levels);
  if (static_cast<int>(budgets.size()) != levels.count()) {
    throw Error(ErrorCode::kInvalidArgument, "budgets", "one budget per level required");
  }
  if (threshold < 0) throw Error(ErrorCode::kInvalidArgument, "threshold", "must be >= 0");
  LevelSparsityCheck r;
  for (int k = 0; k < levels.count(); ++k) {
    if (budgets[k] < 0 || budgets[k] > levels.width(k)) {
      throw Error(ErrorCode::kInvalidArgument, "budgets",
                  "budget " + std::to_string(k) + " outside [0, level width]");
    }
    Index count = 0;
    for (Index i = levels.begin(k); i < levels.end(k); ++i)
      if (std::abs(coeffs[i]) > threshold) ++count;
    r.counts.push_back(count);
    r.overflow.push_back(std::max<Index>(0, count - budgets[k]));
    if (count > budgets[k]) r.sparse = false;
  }
  return r;
}

}  // namespace asymcs
