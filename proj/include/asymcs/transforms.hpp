#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/levels.hpp"

namespace asymcs {

enum class Direction { kForward, kInverse };
enum class HadamardOrdering { kNatural, kSequency };
enum class BoundaryMode { kPeriodic, kBoundaryCorrected };

struct WaveletSpec {
  int order = 4;   // Daubechies p: db1 (Haar) .. db8, filter length 2p
  int levels = 1;  // decomposition depth r
  BoundaryMode boundary = BoundaryMode::kPeriodic;

  std::string str() const;
};

// Throws kInvalidArgument for an unsupported order and kInvalidShape when the
// depth does not fit a signal of side n.
void ValidateWaveletSpec(const WaveletSpec& spec, Index n);

// A linear map given by forward and adjoint application rules. Operators are
// immutable after construction and may be applied concurrently.
//
// Vectors for 2D shapes are row-major linearized n x n grids.
class Operator {
 public:
  using Rule = std::function<Vec(const Vec&)>;

  Operator(std::string kind, Shape in, Shape out, Rule forward, Rule adjoint,
           bool isometry);

  const std::string& kind() const { return kind_; }
  const Shape& input_shape() const { return in_; }
  const Shape& output_shape() const { return out_; }
  Index rows() const { return out_.size(); }
  Index cols() const { return in_.size(); }
  bool is_isometry() const { return isometry_; }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;

  // Operator whose forward rule is this operator's adjoint.
  Operator adjoint() const;

 private:
  std::string kind_;
  Shape in_;
  Shape out_;
  Rule forward_;
  Rule adjoint_;
  bool isometry_;
};

// Unitary DFT, 1/sqrt(n) per axis, natural frequency order.
Vec Dft(const Vec& x, const Shape& shape, Direction direction);
Operator DftOperator(const Shape& shape);

// Orthonormal Walsh-Hadamard transform. Sequency ordering sorts rows by their
// number of sign changes; row s of the sequency matrix is natural row
// SequencyToNatural(s).
Vec Fwht(const Vec& x, const Shape& shape, Direction direction,
         HadamardOrdering ordering);
Operator FwhtOperator(const Shape& shape, HadamardOrdering ordering);
Index SequencyToNatural(Index s, Index n);

// Orthonormal wavelet analysis. Coefficients are coarse-to-fine contiguous
// blocks: scaling block, then detail levels from coarsest to finest. In 2D the
// decomposition is isotropic and the three orientations of one scale form one
// contiguous block (see WaveletLevelOrder2D).
Vec Dwt(const Vec& x, const Shape& shape, const WaveletSpec& spec,
        Direction direction);
// Forward rule = analysis (signal -> coefficients); adjoint = synthesis.
Operator DwtOperator(const Shape& shape, const WaveletSpec& spec);

// Sparsity levels induced by the coefficient ordering: M_1 = scaling block,
// M_{k+1} adds the k-th detail scale (coarse to fine).
LevelStructure WaveletLevels(const Shape& shape, int levels);

// Grid position (row * n + col) of each linearized 2D coefficient.
std::vector<Index> WaveletLevelOrder2D(Index n, int levels);

Operator Identity(const Shape& shape);

// out[i] = in[source[i]]; source must be a permutation.
Operator Permutation(const Shape& shape, std::vector<Index> source,
                     std::string kind = "perm");

// Reorders natural DFT output so that DC sits at index n/2 on every axis.
Operator CenterFrequencies(const Shape& shape);

// 1D reordering of natural DFT output by increasing |frequency|:
// 0, +1, -1, +2, -2, ..., -(n/2 - 1), n/2. Leading rows are the low
// frequencies, which is the order in which tail coherence decays.
Operator FrequencyMagnitudeOrder(Index n);

// Chain in matrix-product order: Compose({A, B}) = A B (B applied first).
Operator Compose(const std::vector<Operator>& ops);

// Applies a 1D operator along rows, then along columns.
Operator Tensor2d(const Operator& op1d);

// Dense Haar-distributed orthogonal matrix (QR of a seeded Gaussian matrix).
Operator RandomOrthogonal(Index n, std::uint64_t seed);

// Fast flat-coherence isometry: natural Hadamard applied after a seeded sign
// flip and permutation. Used where a dense random orthogonal matrix would not
// fit in memory.
Operator ScrambledHadamard(const Shape& shape, std::uint64_t seed);

// Dense rows x cols matrix of the operator (column j = apply(e_j)).
CMat Materialize(const Operator& op);

}  // namespace asymcs
