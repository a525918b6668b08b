#pragma once

#include <memory>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// Minimum-phase Daubechies low-pass filter with p vanishing moments
// (length 2p, sum sqrt(2)), from spectral factorization of the binomial
// half-band polynomial. Orthonormality of the even shifts is checked.
RVec DaubechiesLowpass(int p);

// Quadrature mirror high-pass: g_i = (-1)^i h_{2p-1-i}.
RVec HighpassFromLowpass(const RVec& h);

// One analysis stage on a length-n signal: n/2 low-pass rows followed by n/2
// high-pass rows, together an orthogonal n x n matrix.
//
// Periodic stages wrap the filters around. Boundary-corrected stages keep the
// shifted filters whose support fits inside the signal (minus a fixed margin
// at each edge) and fill the remaining dimensions with edge rows: low-pass
// edge rows span the projection of the discrete polynomials of degree < p onto
// the orthogonal complement of the interior rows, high-pass edge rows span the
// rest of that complement. High-pass rows therefore annihilate the
// polynomials exactly at the edges too.
class WaveletStage {
 public:
  struct EdgeRow {
    Index offset = 0;
    RVec values;
  };

  static WaveletStage Periodic(Index n, const RVec& h);
  // `polys` are the p polynomial vectors expressed in this stage's input
  // coordinates (the previous stage's low-pass output).
  static WaveletStage BoundaryCorrected(Index n, const RVec& h,
                                        const std::vector<RVec>& polys);

  Index size() const { return n_; }

  // Analysis of in[0..n) into out[0..n) = [low | high].
  template <typename Scalar>
  void Analyze(const Scalar* in, Scalar* out) const;
  template <typename Scalar>
  void Synthesize(const Scalar* in, Scalar* out) const;

 private:
  Index n_ = 0;
  bool periodic_ = true;
  RVec h_, g_;
  Index first_ = 0;     // first interior shift k (row support starts at 2k)
  Index interior_ = 0;  // number of interior shifts
  std::vector<EdgeRow> low_left_, low_right_, high_left_, high_right_;
};

// Precomputed multi-level analysis for a 1D length (the 2D transform applies
// the same stages along rows and columns). Immutable once built.
class WaveletPlan {
 public:
  WaveletPlan(Index n, const WaveletSpec& spec);

  Index size() const { return n_; }
  const WaveletSpec& spec() const { return spec_; }
  const WaveletStage& stage(int level) const { return stages_[level]; }

  template <typename Scalar>
  void Forward1D(Scalar* data) const;
  template <typename Scalar>
  void Inverse1D(Scalar* data) const;

  Vec Forward(const Vec& x, int rank) const;
  Vec Inverse(const Vec& c, int rank) const;

 private:
  Index n_;
  WaveletSpec spec_;
  std::vector<WaveletStage> stages_;  // stage l acts on length n >> l
};

// Plans are cached per (n, spec); construction of boundary-corrected plans
// involves dense factorizations near the edges.
std::shared_ptr<const WaveletPlan> GetWaveletPlan(Index n,
                                                  const WaveletSpec& spec);

}  // namespace asymcs
