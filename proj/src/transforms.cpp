#include "asymcs/transforms.hpp"

#include <fftw3.h>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <tuple>

#include "asymcs/wavelets.hpp"

namespace asymcs {

namespace {

void CheckSize(const Vec& x, Index expected, const char* what) {
  if (x.size() != expected) {
    throw Error(ErrorCode::kInvalidShape, what,
                "expected length " + std::to_string(expected) + ", got " +
                    std::to_string(x.size()));
  }
}

// FFTW plans are created once per (rank, n, sign) and executed with the
// new-array interface, which is thread safe. Planning itself is serialized.
fftw_plan GetFftPlan(int rank, Index n, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, Index, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(rank, n, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  const Index total = rank == 1 ? n : n * n;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(total));
  fftw_plan plan = rank == 1
      ? fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                         FFTW_ESTIMATE | FFTW_UNALIGNED)
      : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf,
                         sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  plans.emplace(key, plan);
  return plan;
}

void FwhtNaturalInPlace(Complex* a, Index n, Index stride) {
  for (Index len = 1; len < n; len <<= 1) {
    for (Index i = 0; i < n; i += 2 * len) {
      for (Index j = i; j < i + len; ++j) {
        const Complex u = a[j * stride];
        const Complex v = a[(j + len) * stride];
        a[j * stride] = u + v;
        a[(j + len) * stride] = u - v;
      }
    }
  }
}

Index BitReverse(Index v, int bits) {
  Index r = 0;
  for (int b = 0; b < bits; ++b) {
    r = (r << 1) | (v & 1);
    v >>= 1;
  }
  return r;
}

}  // namespace

std::string WaveletSpec::str() const {
  return "db" + std::to_string(order) + "(r=" + std::to_string(levels) + "," +
         (boundary == BoundaryMode::kPeriodic ? "periodic" : "boundary") + ")";
}

void ValidateWaveletSpec(const WaveletSpec& spec, Index n) {
  if (spec.order < 1 || spec.order > 8) {
    throw Error(ErrorCode::kInvalidArgument, "wavelet.order",
                "Daubechies order must be in 1..8");
  }
  if (spec.levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "wavelet.levels", "depth must be >= 1");
  }
  const Index scale = Index{1} << spec.levels;
  if (spec.boundary == BoundaryMode::kBoundaryCorrected && spec.order > 1) {
    if (scale * (2 * spec.order - 1) > n) {
      throw Error(ErrorCode::kInvalidShape, "wavelet.levels",
                  "depth " + std::to_string(spec.levels) + " too large for n=" +
                      std::to_string(n) + " with boundary-corrected db" +
                      std::to_string(spec.order) + " (need 2^r <= n/(2p-1))");
    }
  } else if (scale > n) {
    throw Error(ErrorCode::kInvalidShape, "wavelet.levels",
                "depth " + std::to_string(spec.levels) + " too large for n=" +
                    std::to_string(n));
  }
}

Operator::Operator(std::string kind, Shape in, Shape out, Rule forward,
                   Rule adjoint, bool isometry)
    : kind_(std::move(kind)),
      in_(in),
      out_(out),
      forward_(std::move(forward)),
      adjoint_(std::move(adjoint)),
      isometry_(isometry) {}

Vec Operator::apply(const Vec& x) const {
  CheckSize(x, cols(), "operator input");
  return forward_(x);
}

Vec Operator::apply_adjoint(const Vec& y) const {
  CheckSize(y, rows(), "operator adjoint input");
  return adjoint_(y);
}

Operator Operator::adjoint() const {
  return Operator(kind_ + "^*", out_, in_, adjoint_, forward_, isometry_ && rows() == cols());
}

Vec Dft(const Vec& x, const Shape& shape, Direction direction) {
  ValidateShape(shape);
  CheckSize(x, shape.size(), "x");
  const int sign = direction == Direction::kForward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = GetFftPlan(shape.rank, shape.n, sign);
  Vec in = x;
  Vec out(x.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= std::sqrt(static_cast<double>(shape.size()));
  return out;
}

Operator DftOperator(const Shape& shape) {
  ValidateShape(shape);
  return Operator(
      "dft", shape, shape,
      [shape](const Vec& x) { return Dft(x, shape, Direction::kForward); },
      [shape](const Vec& y) { return Dft(y, shape, Direction::kInverse); }, true);
}

Index SequencyToNatural(Index s, Index n) {
  return BitReverse(s ^ (s >> 1), Log2(n));
}

Vec Fwht(const Vec& x, const Shape& shape, Direction direction,
         HadamardOrdering ordering) {
  ValidateShape(shape);
  CheckSize(x, shape.size(), "x");
  const Index n = shape.n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.size()));
  const bool seq = ordering == HadamardOrdering::kSequency;
  std::vector<Index> perm;
  if (seq) {
    perm.resize(n);
    for (Index s = 0; s < n; ++s) perm[s] = SequencyToNatural(s, n);
  }
  // Sequency matrix W = P H with (P v)[s] = v[perm[s]]; W^{-1} = H P^T.
  auto scatter = [&](const Vec& v) {  // P^T along every axis
    Vec out(v.size());
    if (shape.rank == 1) {
      for (Index s = 0; s < n; ++s) out[perm[s]] = v[s];
    } else {
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) out[perm[r] * n + perm[c]] = v[r * n + c];
    }
    return out;
  };
  auto gather = [&](const Vec& v) {  // P along every axis
    Vec out(v.size());
    if (shape.rank == 1) {
      for (Index s = 0; s < n; ++s) out[s] = v[perm[s]];
    } else {
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) out[r * n + c] = v[perm[r] * n + perm[c]];
    }
    return out;
  };
  Vec a = (seq && direction == Direction::kInverse) ? scatter(x) : x;
  if (shape.rank == 1) {
    FwhtNaturalInPlace(a.data(), n, 1);
  } else {
    for (Index r = 0; r < n; ++r) FwhtNaturalInPlace(a.data() + r * n, n, 1);
    for (Index c = 0; c < n; ++c) FwhtNaturalInPlace(a.data() + c, n, n);
  }
  a *= scale;
  if (seq && direction == Direction::kForward) return gather(a);
  return a;
}

Operator FwhtOperator(const Shape& shape, HadamardOrdering ordering) {
  ValidateShape(shape);
  const std::string kind =
      ordering == HadamardOrdering::kSequency ? "hadamard_seq" : "hadamard";
  return Operator(
      kind, shape, shape,
      [=](const Vec& x) { return Fwht(x, shape, Direction::kForward, ordering); },
      [=](const Vec& y) { return Fwht(y, shape, Direction::kInverse, ordering); },
      true);
}

Vec Dwt(const Vec& x, const Shape& shape, const WaveletSpec& spec,
        Direction direction) {
  ValidateShape(shape);
  CheckSize(x, shape.size(), "x");
  auto plan = GetWaveletPlan(shape.n, spec);
  return direction == Direction::kForward ? plan->Forward(x, shape.rank)
                                          : plan->Inverse(x, shape.rank);
}

Operator DwtOperator(const Shape& shape, const WaveletSpec& spec) {
  ValidateShape(shape);
  auto plan = GetWaveletPlan(shape.n, spec);
  const int rank = shape.rank;
  return Operator(
      "dwt:" + spec.str(), shape, shape,
      [plan, rank](const Vec& x) { return plan->Forward(x, rank); },
      [plan, rank](const Vec& c) { return plan->Inverse(c, rank); }, true);
}

LevelStructure WaveletLevels(const Shape& shape, int levels) {
  std::vector<Index> b;
  for (int k = levels; k >= 0; --k) {
    const Index side = shape.n >> k;
    b.push_back(shape.rank == 1 ? side : side * side);
  }
  return LevelStructure(std::move(b));
}

std::vector<Index> WaveletLevelOrder2D(Index n, int levels) {
  std::vector<Index> order;
  order.reserve(static_cast<size_t>(n * n));
  const Index s0 = n >> levels;
  auto block = [&](Index r0, Index c0, Index s) {
    for (Index r = r0; r < r0 + s; ++r)
      for (Index c = c0; c < c0 + s; ++c) order.push_back(r * n + c);
  };
  block(0, 0, s0);
  for (Index s = s0; s < n; s *= 2) {
    block(0, s, s);
    block(s, 0, s);
    block(s, s, s);
  }
  return order;
}

Operator Identity(const Shape& shape) {
  return Operator(
      "identity", shape, shape, [](const Vec& x) { return x; },
      [](const Vec& y) { return y; }, true);
}

Operator Permutation(const Shape& shape, std::vector<Index> source,
                     std::string kind) {
  const Index total = shape.size();
  if (static_cast<Index>(source.size()) != total) {
    throw Error(ErrorCode::kInvalidShape, "permutation", "length mismatch");
  }
  std::vector<char> seen(static_cast<size_t>(total), 0);
  for (Index s : source) {
    if (s < 0 || s >= total || seen[s]) {
      throw Error(ErrorCode::kInvalidArgument, "permutation", "not a permutation");
    }
    seen[s] = 1;
  }
  auto src = std::make_shared<const std::vector<Index>>(std::move(source));
  return Operator(
      std::move(kind), shape, shape,
      [src](const Vec& x) {
        Vec out(x.size());
        for (Index i = 0; i < out.size(); ++i) out[i] = x[(*src)[i]];
        return out;
      },
      [src](const Vec& y) {
        Vec out(y.size());
        for (Index i = 0; i < y.size(); ++i) out[(*src)[i]] = y[i];
        return out;
      },
      true);
}

Operator CenterFrequencies(const Shape& shape) {
  const Index n = shape.n;
  std::vector<Index> src(static_cast<size_t>(shape.size()));
  if (shape.rank == 1) {
    for (Index c = 0; c < n; ++c) src[c] = (c + n / 2) % n;
  } else {
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c)
        src[r * n + c] = ((r + n / 2) % n) * n + (c + n / 2) % n;
  }
  return Permutation(shape, std::move(src), "center");
}

Operator FrequencyMagnitudeOrder(Index n) {
  ValidateShape(Shape::D1(n));
  std::vector<Index> src(static_cast<size_t>(n));
  src[0] = 0;
  for (Index i = 1; i < n; ++i) {
    const Index f = (i + 1) / 2;  // 1, 1, 2, 2, ...
    src[i] = (i % 2 == 1) ? f : (n - f) % n;
  }
  return Permutation(Shape::D1(n), std::move(src), "freqorder");
}

Operator Compose(const std::vector<Operator>& ops) {
  if (ops.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ops", "empty composition");
  }
  if (ops.size() == 1) return ops.front();
  std::string kind;
  bool iso = true;
  for (size_t i = 0; i < ops.size(); ++i) {
    if (i + 1 < ops.size() && ops[i].cols() != ops[i + 1].rows()) {
      throw Error(ErrorCode::kInvalidShape, "ops",
                  "cannot compose " + ops[i].kind() + " with " + ops[i + 1].kind());
    }
    kind += (i ? "*" : "") + ops[i].kind();
    iso = iso && ops[i].is_isometry();
  }
  auto chain = std::make_shared<const std::vector<Operator>>(ops);
  return Operator(
      kind, ops.back().input_shape(), ops.front().output_shape(),
      [chain](const Vec& x) {
        Vec v = x;
        for (auto it = chain->rbegin(); it != chain->rend(); ++it) v = it->apply(v);
        return v;
      },
      [chain](const Vec& y) {
        Vec v = y;
        for (const Operator& op : *chain) v = op.apply_adjoint(v);
        return v;
      },
      iso);
}

Operator Tensor2d(const Operator& op1d) {
  if (op1d.input_shape().rank != 1 || op1d.rows() != op1d.cols()) {
    throw Error(ErrorCode::kInvalidShape, "op1d", "tensor2d needs a square 1D operator");
  }
  const Index n = op1d.cols();
  const Shape shape{2, n};
  auto base = std::make_shared<const Operator>(op1d);
  auto separable = [base, n](const Vec& x, bool adjoint) {
    Vec grid = x;
    Vec line(n);
    for (Index r = 0; r < n; ++r) {
      line = grid.segment(r * n, n);
      grid.segment(r * n, n) = adjoint ? base->apply_adjoint(line) : base->apply(line);
    }
    for (Index c = 0; c < n; ++c) {
      for (Index r = 0; r < n; ++r) line[r] = grid[r * n + c];
      Vec t = adjoint ? base->apply_adjoint(line) : base->apply(line);
      for (Index r = 0; r < n; ++r) grid[r * n + c] = t[r];
    }
    return grid;
  };
  return Operator(
      "tensor2d(" + op1d.kind() + ")", shape, shape,
      [separable](const Vec& x) { return separable(x, false); },
      [separable](const Vec& y) { return separable(y, true); }, op1d.is_isometry());
}

Operator RandomOrthogonal(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  RMat g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<RMat> qr(g);
  RMat q = qr.householderQ();
  const RMat r = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  auto m = std::make_shared<const CMat>(q.cast<Complex>());
  return Operator(
      "randorth(" + std::to_string(seed) + ")", Shape::D1(n), Shape::D1(n),
      [m](const Vec& x) -> Vec { return *m * x; },
      [m](const Vec& y) -> Vec { return m->adjoint() * y; }, true);
}

Operator ScrambledHadamard(const Shape& shape, std::uint64_t seed) {
  ValidateShape(shape);
  const Index total = shape.size();
  std::mt19937_64 rng(seed);
  auto perm = std::make_shared<std::vector<Index>>(static_cast<size_t>(total));
  std::iota(perm->begin(), perm->end(), Index{0});
  std::shuffle(perm->begin(), perm->end(), rng);
  auto signs = std::make_shared<RVec>(total);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < total; ++i) (*signs)[i] = coin(rng) ? 1.0 : -1.0;
  const Shape flat = Shape::D1(total);
  std::shared_ptr<const std::vector<Index>> pc = perm;
  std::shared_ptr<const RVec> sc = signs;
  return Operator(
      "scrambled_hadamard(" + std::to_string(seed) + ")", shape, shape,
      [pc, sc, flat](const Vec& x) {
        Vec v(x.size());
        for (Index i = 0; i < v.size(); ++i) v[i] = (*sc)[i] * x[(*pc)[i]];
        return Fwht(v, flat, Direction::kForward, HadamardOrdering::kNatural);
      },
      [pc, sc, flat](const Vec& y) {
        Vec v = Fwht(y, flat, Direction::kInverse, HadamardOrdering::kNatural);
        Vec out(v.size());
        for (Index i = 0; i < v.size(); ++i) out[(*pc)[i]] = (*sc)[i] * v[i];
        return out;
      },
      true);
}

CMat Materialize(const Operator& op) {
  CMat m(op.rows(), op.cols());
  Vec e = Vec::Zero(op.cols());
  for (Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

}  // namespace asymcs
