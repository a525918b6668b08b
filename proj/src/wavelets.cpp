#include "asymcs/wavelets.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

namespace asymcs {

namespace {

double Binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<Complex> PolyMul(const std::vector<Complex>& a,
                             const std::vector<Complex>& b) {
  std::vector<Complex> c(a.size() + b.size() - 1, Complex{0.0, 0.0});
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// Orthonormal basis of the null space of `a` (rows are constraints).
RMat NullSpace(const RMat& a, Index cols) {
  if (a.rows() == 0) return RMat::Identity(cols, cols);
  Eigen::ColPivHouseholderQR<RMat> qr(a.transpose());
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  RMat q = qr.householderQ();
  return q.rightCols(cols - rank);
}

// Orthonormal complement of the columns of `basis` (orthonormal, d x k) in R^d.
RMat Complement(const RMat& basis) {
  const Index d = basis.rows();
  if (basis.cols() == 0) return RMat::Identity(d, d);
  Eigen::HouseholderQR<RMat> qr(basis);
  RMat q = qr.householderQ();
  return q.rightCols(d - basis.cols());
}

double CenterOfMass(const WaveletStage::EdgeRow& row) {
  double w = 0, m = 0;
  for (Index i = 0; i < row.values.size(); ++i) {
    const double e = row.values[i] * row.values[i];
    w += e;
    m += e * static_cast<double>(row.offset + i);
  }
  return m / w;
}

template <typename Scalar>
Scalar Dot(const WaveletStage::EdgeRow& row, const Scalar* x) {
  Scalar s{};
  for (Index i = 0; i < row.values.size(); ++i) s += row.values[i] * x[row.offset + i];
  return s;
}

template <typename Scalar>
void Axpy(const WaveletStage::EdgeRow& row, Scalar c, Scalar* x) {
  for (Index i = 0; i < row.values.size(); ++i) x[row.offset + i] += row.values[i] * c;
}

}  // namespace

RVec DaubechiesLowpass(int p) {
  if (p < 1 || p > 8) {
    throw Error(ErrorCode::kInvalidArgument, "order",
                "Daubechies order must be in 1..8");
  }
  // Half-band polynomial P(y) = sum_k C(p-1+k, k) y^k, y = sin^2(w/2).
  std::vector<Complex> h = {Complex{1.0, 0.0}};
  for (int i = 0; i < p; ++i) h = PolyMul(h, {Complex{1.0, 0.0}, Complex{1.0, 0.0}});
  if (p > 1) {
    const int d = p - 1;
    RMat companion = RMat::Zero(d, d);
    const double lead = Binomial(p - 1 + d, d);
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) companion(i, d - 1) = -Binomial(p - 1 + i, i) / lead;
    Eigen::EigenSolver<RMat> es(companion);
    for (int i = 0; i < d; ++i) {
      const Complex y = es.eigenvalues()[i];
      // z + 1/z = 2 - 4y; keep the root inside the unit circle.
      const Complex b = 2.0 - 4.0 * y;
      const Complex disc = std::sqrt(b * b - 4.0);
      Complex z = (b + disc) / 2.0;
      if (std::abs(z) > 1.0) z = (b - disc) / 2.0;
      h = PolyMul(h, {-z, Complex{1.0, 0.0}});
    }
  }
  RVec out(2 * p);
  double sum = 0;
  for (int i = 0; i < 2 * p; ++i) {
    // Reverse so that the largest taps come first (db2 starts with (1+sqrt3)/4sqrt2).
    out[i] = h[2 * p - 1 - i].real();
    sum += out[i];
  }
  out *= std::sqrt(2.0) / sum;
  for (int m = 0; m < p; ++m) {
    double s = 0;
    for (int i = 0; i + 2 * m < 2 * p; ++i) s += out[i] * out[i + 2 * m];
    const double expect = m == 0 ? 1.0 : 0.0;
    if (std::abs(s - expect) > 1e-12) {
      throw Error(ErrorCode::kConstruction, "order",
                  "Daubechies filter failed orthonormality self-check");
    }
  }
  return out;
}

RVec HighpassFromLowpass(const RVec& h) {
  const Index len = h.size();
  RVec g(len);
  for (Index i = 0; i < len; ++i) g[i] = (i % 2 == 0 ? 1.0 : -1.0) * h[len - 1 - i];
  return g;
}

WaveletStage WaveletStage::Periodic(Index n, const RVec& h) {
  WaveletStage s;
  s.n_ = n;
  s.periodic_ = true;
  s.h_ = h;
  s.g_ = HighpassFromLowpass(h);
  s.first_ = 0;
  s.interior_ = n / 2;
  return s;
}

WaveletStage WaveletStage::BoundaryCorrected(Index n, const RVec& h,
                                             const std::vector<RVec>& polys) {
  const Index len = h.size();
  const Index p = len / 2;
  if (p == 1) return Periodic(n, h);  // Haar rows never wrap

  WaveletStage s;
  s.n_ = n;
  s.periodic_ = false;
  s.h_ = h;
  s.g_ = HighpassFromLowpass(h);
  // Dropping a shifts on the left and b on the right (a + b = p + 1) leaves a
  // complement of dimension 2a + p - 1 (left) and 2b + p - 1 (right), which
  // splits into exactly p low-pass edge rows per side. It also keeps every
  // interior row clear of the previous stage's edge outputs, so polynomial
  // vectors stay polynomial where interior high-pass rows see them.
  const Index a = (p + 1) / 2;
  const Index b = p + 1 - a;
  const Index interior = n / 2 - 2 * p;
  s.first_ = a;

  const Index wl = 2 * a + 6 * p + 2;
  const Index wr = 2 * b + 6 * p + 2;
  const bool localized = interior >= 1 && wl + wr <= n;

  if (localized) {
    s.interior_ = interior;
    const Index last = a + interior - 1;  // last interior shift
    // Complement of the interior rows inside a window at one edge. The far end
    // of the window is pinned to zero so truncated rows cannot leak spurious
    // null vectors.
    auto edge = [&](bool left) {
      const Index w = left ? wl : wr;
      const Index start = left ? 0 : n - w;
      std::vector<RVec> cons;
      for (Index k = a; k <= last; ++k) {
        const Index lo = 2 * k, hi = 2 * k + len;  // [lo, hi)
        if (hi <= start || lo >= start + w) continue;
        for (int f = 0; f < 2; ++f) {
          RVec c = RVec::Zero(w);
          const RVec& filt = f == 0 ? s.h_ : s.g_;
          for (Index i = 0; i < len; ++i) {
            const Index pos = lo + i - start;
            if (pos >= 0 && pos < w) c[pos] = filt[i];
          }
          cons.push_back(c);
        }
      }
      const Index pin = 2 * len;
      for (Index i = 0; i < pin; ++i) {
        RVec c = RVec::Zero(w);
        c[left ? w - pin + i : i] = 1.0;
        cons.push_back(c);
      }
      RMat a_mat(static_cast<Index>(cons.size()), w);
      for (Index i = 0; i < a_mat.rows(); ++i) a_mat.row(i) = cons[i].transpose();
      RMat basis = NullSpace(a_mat, w);
      const Index expected = left ? 2 * a + p - 1 : 2 * b + p - 1;
      if (basis.cols() != expected) {
        throw Error(ErrorCode::kConstruction, "boundary",
                    "edge complement has dimension " + std::to_string(basis.cols()) +
                        ", expected " + std::to_string(expected));
      }
      // Orthonormalize the polynomial segments first (same span, far better
      // conditioned), then work in complement coordinates so the low rows stay
      // exactly inside the complement.
      RMat segs(w, p);
      for (Index j = 0; j < p; ++j) segs.col(j) = polys[j].segment(start, w);
      RMat seg_q = RMat(Eigen::HouseholderQR<RMat>(segs).householderQ()).leftCols(p);
      RMat coords_raw = basis.transpose() * seg_q;
      Eigen::JacobiSVD<RMat> svd(coords_raw, Eigen::ComputeThinU);
      const auto& sv = svd.singularValues();
      if (sv[p - 1] < 1e-13 * sv[0]) {
        throw Error(ErrorCode::kConstruction, "boundary",
                    "polynomial projection lost rank at the edge");
      }
      RMat coords = svd.matrixU();
      RMat lows = basis * coords;
      RMat highs = basis * Complement(coords);
      std::vector<EdgeRow> lo_rows, hi_rows;
      for (Index j = 0; j < lows.cols(); ++j) lo_rows.push_back({start, lows.col(j)});
      for (Index j = 0; j < highs.cols(); ++j) hi_rows.push_back({start, highs.col(j)});
      return std::make_pair(lo_rows, hi_rows);
    };
    std::tie(s.low_left_, s.high_left_) = edge(true);
    std::tie(s.low_right_, s.high_right_) = edge(false);
  } else {
    // Short signals: work with the full complement directly.
    const Index inner = std::max<Index>(interior, 0);
    s.interior_ = inner;
    RMat r_mat(2 * inner, n);
    r_mat.setZero();
    for (Index t = 0; t < inner; ++t) {
      const Index k = a + t;
      r_mat.row(2 * t).segment(2 * k, len) = s.h_.transpose();
      r_mat.row(2 * t + 1).segment(2 * k, len) = s.g_.transpose();
    }
    RMat basis = NullSpace(r_mat, n);
    const Index d = basis.cols();
    const Index nb = n / 2 - inner;
    std::vector<RVec> gens;
    if (nb >= 2 * p) {
      for (Index j = 0; j < p; ++j) {
        RVec v = polys[j];
        v.tail(n - n / 2).setZero();
        gens.push_back(v);
      }
      for (Index j = 0; j < p; ++j) {
        RVec v = polys[j];
        v.head(n / 2).setZero();
        gens.push_back(v);
      }
    } else {
      for (Index j = 0; j < p; ++j) gens.push_back(polys[j]);
    }
    for (Index i = 0; i < n; ++i) {
      RVec e = RVec::Zero(n);
      e[i] = 1.0;
      gens.push_back(e);
    }
    std::vector<RVec> accepted;  // coordinates in `basis`
    for (const RVec& v : gens) {
      if (static_cast<Index>(accepted.size()) == nb) break;
      RVec u = basis.transpose() * v;
      const double before = u.norm();
      if (before < 1e-12) continue;
      for (int pass = 0; pass < 2; ++pass)
        for (const RVec& q : accepted) u -= q * q.dot(u);
      if (u.norm() > 1e-8 * before) accepted.push_back(u / u.norm());
    }
    if (static_cast<Index>(accepted.size()) != nb) {
      throw Error(ErrorCode::kConstruction, "boundary",
                  "could not complete low-pass edge rows");
    }
    RMat low_coords(d, nb);
    for (Index j = 0; j < nb; ++j) low_coords.col(j) = accepted[j];
    RMat lows = basis * low_coords;
    RMat highs = basis * Complement(low_coords);
    for (Index j = 0; j < lows.cols(); ++j) {
      EdgeRow r{0, lows.col(j)};
      (CenterOfMass(r) < n / 2.0 ? s.low_left_ : s.low_right_).push_back(r);
    }
    for (Index j = 0; j < highs.cols(); ++j) {
      EdgeRow r{0, highs.col(j)};
      (CenterOfMass(r) < n / 2.0 ? s.high_left_ : s.high_right_).push_back(r);
    }
  }
  // Self-check: exact round trip and vanishing moments on the polynomials.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  RVec x(n), c(n), back(n);
  for (Index i = 0; i < n; ++i) x[i] = gauss(rng);
  s.Analyze(x.data(), c.data());
  s.Synthesize(c.data(), back.data());
  if ((back - x).norm() > 1e-10 * x.norm()) {
    throw Error(ErrorCode::kConstruction, "boundary",
                "edge-corrected stage failed orthogonality self-check (" + std::to_string((back - x).norm() / x.norm()) + ")");
  }
  for (const RVec& poly : polys) {
    s.Analyze(poly.data(), c.data());
    if (c.tail(n / 2).norm() > 1e-10 * poly.norm()) {
      throw Error(ErrorCode::kConstruction, "boundary",
                  "edge-corrected stage failed vanishing-moment self-check");
    }
  }
  return s;
}

template <typename Scalar>
void WaveletStage::Analyze(const Scalar* in, Scalar* out) const {
  const Index half = n_ / 2;
  const Index len = h_.size();
  Scalar* lo = out;
  Scalar* hi = out + half;
  Index li = 0, hj = 0;
  for (const EdgeRow& r : low_left_) lo[li++] = Dot(r, in);
  for (const EdgeRow& r : high_left_) hi[hj++] = Dot(r, in);
  for (Index t = 0; t < interior_; ++t) {
    const Index start = 2 * (first_ + t);
    Scalar sl{}, sh{};
    if (periodic_) {
      for (Index i = 0; i < len; ++i) {
        const Scalar v = in[(start + i) % n_];
        sl += h_[i] * v;
        sh += g_[i] * v;
      }
    } else {
      for (Index i = 0; i < len; ++i) {
        const Scalar v = in[start + i];
        sl += h_[i] * v;
        sh += g_[i] * v;
      }
    }
    lo[li++] = sl;
    hi[hj++] = sh;
  }
  for (const EdgeRow& r : low_right_) lo[li++] = Dot(r, in);
  for (const EdgeRow& r : high_right_) hi[hj++] = Dot(r, in);
}

template <typename Scalar>
void WaveletStage::Synthesize(const Scalar* in, Scalar* out) const {
  const Index half = n_ / 2;
  const Index len = h_.size();
  const Scalar* lo = in;
  const Scalar* hi = in + half;
  for (Index i = 0; i < n_; ++i) out[i] = Scalar{};
  Index li = 0, hj = 0;
  for (const EdgeRow& r : low_left_) Axpy(r, lo[li++], out);
  for (const EdgeRow& r : high_left_) Axpy(r, hi[hj++], out);
  for (Index t = 0; t < interior_; ++t) {
    const Index start = 2 * (first_ + t);
    const Scalar cl = lo[li++];
    const Scalar ch = hi[hj++];
    if (periodic_) {
      for (Index i = 0; i < len; ++i) out[(start + i) % n_] += h_[i] * cl + g_[i] * ch;
    } else {
      for (Index i = 0; i < len; ++i) out[start + i] += h_[i] * cl + g_[i] * ch;
    }
  }
  for (const EdgeRow& r : low_right_) Axpy(r, lo[li++], out);
  for (const EdgeRow& r : high_right_) Axpy(r, hi[hj++], out);
}

template void WaveletStage::Analyze<double>(const double*, double*) const;
template void WaveletStage::Analyze<Complex>(const Complex*, Complex*) const;
template void WaveletStage::Synthesize<double>(const double*, double*) const;
template void WaveletStage::Synthesize<Complex>(const Complex*, Complex*) const;

WaveletPlan::WaveletPlan(Index n, const WaveletSpec& spec) : n_(n), spec_(spec) {
  ValidateShape(Shape::D1(n));
  ValidateWaveletSpec(spec, n);
  const RVec h = DaubechiesLowpass(spec.order);
  if (spec.boundary == BoundaryMode::kPeriodic) {
    for (int l = 0; l < spec.levels; ++l) stages_.push_back(WaveletStage::Periodic(n >> l, h));
    return;
  }
  const int p = spec.order;
  // Orthonormal basis of discrete polynomials of degree < p on the fine grid.
  RMat mono(n, p);
  for (Index i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - 0.5 * (n - 1)) / static_cast<double>(n);
    double v = 1.0;
    for (int j = 0; j < p; ++j) {
      mono(i, j) = v;
      v *= t;
    }
  }
  Eigen::HouseholderQR<RMat> qr(mono);
  RMat q = RMat(qr.householderQ()).leftCols(p);
  std::vector<RVec> polys;
  for (int j = 0; j < p; ++j) polys.push_back(q.col(j));
  for (int l = 0; l < spec.levels; ++l) {
    const Index len = n >> l;
    stages_.push_back(WaveletStage::BoundaryCorrected(len, h, polys));
    if (l + 1 < spec.levels) {
      RVec c(len);
      for (RVec& poly : polys) {
        stages_.back().Analyze(poly.data(), c.data());
        poly = c.head(len / 2);
      }
    }
  }
}

template <typename Scalar>
void WaveletPlan::Forward1D(Scalar* data) const {
  std::vector<Scalar> tmp(n_);
  for (int l = 0; l < spec_.levels; ++l) {
    const Index len = n_ >> l;
    stages_[l].Analyze(data, tmp.data());
    std::copy(tmp.begin(), tmp.begin() + len, data);
  }
}

template <typename Scalar>
void WaveletPlan::Inverse1D(Scalar* data) const {
  std::vector<Scalar> tmp(n_);
  for (int l = spec_.levels - 1; l >= 0; --l) {
    const Index len = n_ >> l;
    stages_[l].Synthesize(data, tmp.data());
    std::copy(tmp.begin(), tmp.begin() + len, data);
  }
}

template void WaveletPlan::Forward1D<double>(double*) const;
template void WaveletPlan::Forward1D<Complex>(Complex*) const;
template void WaveletPlan::Inverse1D<double>(double*) const;
template void WaveletPlan::Inverse1D<Complex>(Complex*) const;

namespace {

// Applies one stage to rows then columns of the leading len x len block.
template <bool kForward>
void Stage2D(const WaveletStage& st, Complex* grid, Index n) {
  const Index len = st.size();
  std::vector<Complex> a(len), b(len);
  for (Index r = 0; r < len; ++r) {
    Complex* row = grid + r * n;
    std::copy(row, row + len, a.begin());
    if constexpr (kForward) st.Analyze(a.data(), b.data());
    else st.Synthesize(a.data(), b.data());
    std::copy(b.begin(), b.end(), row);
  }
  for (Index c = 0; c < len; ++c) {
    for (Index r = 0; r < len; ++r) a[r] = grid[r * n + c];
    if constexpr (kForward) st.Analyze(a.data(), b.data());
    else st.Synthesize(a.data(), b.data());
    for (Index r = 0; r < len; ++r) grid[r * n + c] = b[r];
  }
}

}  // namespace

Vec WaveletPlan::Forward(const Vec& x, int rank) const {
  if (rank == 1) {
    Vec out = x;
    Forward1D(out.data());
    return out;
  }
  Vec grid = x;
  for (int l = 0; l < spec_.levels; ++l) Stage2D<true>(stages_[l], grid.data(), n_);
  const std::vector<Index> order = WaveletLevelOrder2D(n_, spec_.levels);
  Vec out(grid.size());
  for (Index t = 0; t < out.size(); ++t) out[t] = grid[order[t]];
  return out;
}

Vec WaveletPlan::Inverse(const Vec& c, int rank) const {
  if (rank == 1) {
    Vec out = c;
    Inverse1D(out.data());
    return out;
  }
  const std::vector<Index> order = WaveletLevelOrder2D(n_, spec_.levels);
  Vec grid(c.size());
  for (Index t = 0; t < c.size(); ++t) grid[order[t]] = c[t];
  for (int l = spec_.levels - 1; l >= 0; --l) Stage2D<false>(stages_[l], grid.data(), n_);
  return grid;
}

std::shared_ptr<const WaveletPlan> GetWaveletPlan(Index n, const WaveletSpec& spec) {
  static std::mutex mu;
  static std::map<std::tuple<Index, int, int, int>, std::shared_ptr<const WaveletPlan>> cache;
  const auto key = std::make_tuple(n, spec.order, spec.levels, static_cast<int>(spec.boundary));
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto plan = std::make_shared<const WaveletPlan>(n, spec);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, plan).first->second;
}

}  // namespace asymcs
