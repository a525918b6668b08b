#include "asymcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

namespace asymcs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec Gather(const Vec& full, const std::vector<Index>& omega) {
  Vec out(static_cast<Index>(omega.size()));
  for (size_t i = 0; i < omega.size(); ++i) out[i] = full[omega[i]];
  return out;
}

Vec Scatter(const Vec& part, const std::vector<Index>& omega, Index size) {
  Vec out = Vec::Zero(size);
  for (size_t i = 0; i < omega.size(); ++i) out[omega[i]] = part[i];
  return out;
}

void CheckOmega(const std::vector<Index>& omega, Index rows, Index y_size) {
  if (static_cast<Index>(omega.size()) != y_size) {
    throw Error(ErrorCode::kInvalidShape, "y",
                "measurement count " + std::to_string(y_size) + " differs from |Omega| = " +
                    std::to_string(omega.size()));
  }
  for (size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < 0 || omega[i] >= rows) {
      throw Error(ErrorCode::kOutOfRange, "omega", "index outside the measurement grid");
    }
    if (i > 0 && omega[i] <= omega[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "omega", "indices must be strictly increasing");
    }
  }
}

void CheckControls(const SolverControls& c, double eta) {
  if (c.max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations", "must be >= 1");
  if (!(c.tolerance > 0)) throw Error(ErrorCode::kInvalidArgument, "tolerance", "must be > 0");
  if (c.power_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "power_iterations", "must be >= 1");
  if (c.step < 0) throw Error(ErrorCode::kInvalidArgument, "step", "must be >= 0");
  if (!(eta >= 0)) throw Error(ErrorCode::kInvalidArgument, "eta", "must be >= 0");
}

// Euclidean projection onto the ball of radius eta around y.
Vec ProjectBall(const Vec& u, const Vec& y, double eta) {
  const Vec d = u - y;
  const double r = d.norm();
  if (r <= eta) return u;
  return y + d * (eta / r);
}

// Weighted soft thresholding; the weight pointer is null for unit weights.
// With w_i = 1 the arithmetic is identical to the unweighted branch.
Vec SoftThreshold(const Vec& v, double t, const RVec* w, bool real) {
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double thr = w ? t * (*w)[i] : t;
    const Complex c = real ? Complex(v[i].real(), 0.0) : v[i];
    const double mag = std::abs(c);
    out[i] = mag <= thr ? Complex(0.0, 0.0) : c * ((mag - thr) / mag);
  }
  return out;
}

double WeightedL1(const Vec& z, const RVec* w) {
  double s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s += (w ? (*w)[i] : 1.0) * std::abs(z[i]);
  return s;
}

// Tracks the best iterate: the lowest objective among iterates that satisfy
// the constraint to within the feasibility slack, else the lowest residual.
struct BestTracker {
  double eta, slack;
  Vec best;
  double best_obj = kInf, best_res = kInf;
  bool feasible = false;

  void offer(const Vec& z, double obj, double res) {
    const bool ok = res <= eta + slack;
    if (ok && (!feasible || obj < best_obj)) {
      feasible = true;
      best = z;
      best_obj = obj;
      best_res = res;
    } else if (!ok && !feasible && res < best_res) {
      best = z;
      best_obj = obj;
      best_res = res;
    }
  }
};

void Record(RecoveryResult& r, const SolverControls& c, int it, double obj, double res,
            double best) {
  if (c.log_every > 0 && (it % c.log_every == 0 || it == 1)) {
    r.log.push_back({it, obj, res, best});
  }
}

double PowerNorm(const std::function<Vec(const Vec&)>& a,
                 const std::function<Vec(const Vec&)>& at, Index cols, int iters) {
  std::mt19937_64 rng(0x243f6a8885a308d3ull);
  std::normal_distribution<double> g;
  Vec v(cols);
  for (Index i = 0; i < cols; ++i) v[i] = Complex(g(rng), g(rng));
  v /= v.norm();
  double s = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = at(a(v));
    s = std::sqrt(w.norm());
    if (w.norm() == 0.0) return 0.0;
    v = w / w.norm();
  }
  return s;
}

// Generic adaptive primal-dual iteration for min G(x) + F(Kx) with balanced
// step sizes (tau * sigma * ‖K‖² < 1 is kept fixed while the ratio adapts
// to the primal and dual residuals).
struct PrimalDual {
  std::function<Vec(const Vec&)> k, kt;
  std::function<Vec(const Vec&, double)> prox_g;        // prox of tau G
  std::function<Vec(const Vec&, double)> prox_fstar;    // prox of sigma F*
  // (x, Kx) -> (objective, residual)
  std::function<std::pair<double, double>(const Vec&, const Vec&)> score;
};

RecoveryResult RunPrimalDual(const PrimalDual& pd, Vec x, Index dual_size, double knorm,
                             const SolverControls& c, BestTracker& best) {
  RecoveryResult r;
  const double l = std::max(knorm, 1e-300) * 1.01;
  double tau = 1.0 / l, sigma = 1.0 / l;
  if (c.step > 0) {
    tau = c.step / l;
    sigma = 1.0 / (c.step * l);
  }
  double alpha = 0.5;
  Vec kx = pd.k(x);
  Vec zeta = Vec::Zero(dual_size);
  Vec ktz = Vec::Zero(x.size());
  for (int it = 1; it <= c.max_iterations; ++it) {
    const Vec x_new = pd.prox_g(x - tau * ktz, tau);
    const Vec kx_new = pd.k(x_new);
    const Vec kbar = 2.0 * kx_new - kx;
    const Vec zeta_new = pd.prox_fstar(zeta + sigma * kbar, sigma);
    const Vec ktz_new = pd.kt(zeta_new);

    const auto [obj, res] = pd.score(x_new, kx_new);
    best.offer(x_new, obj, res);
    Record(r, c, it, obj, res, best.best_obj);
    r.iterations = it;

    const double p_res = ((x - x_new) / tau - (ktz - ktz_new)).norm();
    const double d_res = ((zeta - zeta_new) / sigma - (kx - kx_new)).norm();
    const double dx = (x_new - x).norm(), dz = (zeta_new - zeta).norm();
    const double xs = std::max(x_new.norm(), 1e-300), zs = std::max(zeta_new.norm(), 1e-300);
    x = x_new;
    kx = kx_new;
    zeta = zeta_new;
    ktz = ktz_new;
    if (it > 10 && dx <= c.tolerance * xs && dz <= c.tolerance * zs &&
        res <= best.eta + best.slack) {
      r.converged = true;
      break;
    }
    if (p_res > 1.5 * d_res) {
      tau /= (1 - alpha);
      sigma *= (1 - alpha);
      alpha *= 0.95;
    } else if (p_res < d_res / 1.5) {
      tau *= (1 - alpha);
      sigma /= (1 - alpha);
      alpha *= 0.95;
    }
  }
  return r;
}

RecoveryResult Finish(RecoveryResult r, const RecoveryProblem& p, const BestTracker& best) {
  r.estimate = best.best;
  r.objective = best.best_obj;
  r.residual = best.best_res;
  r.converged = r.converged && best.feasible;
  r.reconstruction = p.synthesis ? p.synthesis->apply(r.estimate) : r.estimate;
  const double total = r.reconstruction.squaredNorm();
  r.imaginary_energy = total > 0 ? r.reconstruction.imag().squaredNorm() / total : 0.0;
  if (p.truth) {
    const Vec shown = p.controls.real_coefficients ? Vec(r.reconstruction.real().cast<Complex>())
                                                   : r.reconstruction;
    r.relative_error = RelativeErrorPercent(shown, *p.truth);
  }
  r.threads = ThreadCount();
  return r;
}

RecoveryResult SolveImpl(const RecoveryProblem& p, const RVec* w) {
  CheckControls(p.controls, p.eta);
  CheckOmega(p.omega, p.op.rows(), p.y.size());
  const SolverControls& c = p.controls;
  const Index n = p.op.cols();
  const bool real = c.real_coefficients;
  const double slack = 1e-6 * std::max(p.y.norm(), 1e-300);
  BestTracker best{p.eta, slack, Vec::Zero(n)};
  const auto a = [&](const Vec& z) { return Gather(p.op.apply(z), p.omega); };
  const auto at = [&](const Vec& u) { return p.op.apply_adjoint(Scatter(u, p.omega, p.op.rows())); };

  if (p.op.is_isometry() && p.op.rows() == p.op.cols()) {
    // Rows of P_Omega U are orthonormal, so the constraint set has an exact
    // projection: z + A*(proj_B(Az) - Az). The iteration is the primal-dual
    // method with K = I, i.e. Douglas-Rachford splitting between the
    // regularizer and the constraint.
    const auto project = [&](const Vec& z, Vec* az) {
      const Vec u = a(z);
      const Vec pb = ProjectBall(u, p.y, p.eta);
      *az = pb;
      return Vec(z + at(pb - u));
    };
    double gamma = c.step;
    if (gamma == 0.0) {
      const Vec back = at(p.y);
      gamma = 0.1 * back.cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(std::max<Index>(1, p.y.size())));
      if (gamma == 0.0) gamma = 1.0;
    }
    RecoveryResult r;
    Vec wv = Vec::Zero(n);
    for (int it = 1; it <= c.max_iterations; ++it) {
      const Vec z = SoftThreshold(wv, gamma, w, real);
      Vec av;
      const Vec v = project(2.0 * z - wv, &av);
      const Vec step = v - z;
      wv += step;
      r.iterations = it;
      double obj, res;
      if (!real) {
        obj = WeightedL1(v, w);
        res = (av - p.y).norm();
        best.offer(v, obj, res);
      } else if (it % 10 == 0 || it == c.max_iterations) {
        const Vec vr = v.real().cast<Complex>();
        obj = WeightedL1(vr, w);
        res = (a(vr) - p.y).norm();
        best.offer(vr, obj, res);
      } else {
        obj = WeightedL1(z, w);
        res = kInf;
      }
      Record(r, c, it, obj, res, best.best_obj);
      const double scale = std::max({v.norm(), z.norm(), 1e-300});
      if (it > 10 && step.norm() <= c.tolerance * scale) {
        if (real) {
          const Vec vr = v.real().cast<Complex>();
          best.offer(vr, WeightedL1(vr, w), (a(vr) - p.y).norm());
        }
        r.converged = true;
        break;
      }
    }
    return Finish(std::move(r), p, best);
  }

  const double knorm = PowerNorm(a, at, n, c.power_iterations);
  PrimalDual pd;
  pd.k = a;
  pd.kt = at;
  pd.prox_g = [&](const Vec& v, double tau) { return SoftThreshold(v, tau, w, real); };
  pd.prox_fstar = [&](const Vec& v, double sigma) {
    return Vec(v - sigma * ProjectBall(v / sigma, p.y, p.eta));
  };
  pd.score = [&](const Vec& z, const Vec& az) {
    return std::make_pair(WeightedL1(z, w), (az - p.y).norm());
  };
  RecoveryResult r = RunPrimalDual(pd, Vec::Zero(n), p.y.size(), knorm, c, best);
  return Finish(std::move(r), p, best);
}

// Forward differences with replicated edges on an n x n row-major grid;
// output is [D1 x ; D2 x] with D1 along rows (i + 1) and D2 along columns.
Vec Gradient(const Vec& x, Index n) {
  Vec g = Vec::Zero(2 * n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index k = i * n + j;
      if (i + 1 < n) g[k] = x[k + n] - x[k];
      if (j + 1 < n) g[n * n + k] = x[k + 1] - x[k];
    }
  return g;
}

// Adjoint of Gradient (minus the divergence).
Vec GradientAdjoint(const Vec& g, Index n) {
  Vec x = Vec::Zero(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index k = i * n + j;
      if (i + 1 < n) {
        x[k + n] += g[k];
        x[k] -= g[k];
      }
      if (j + 1 < n) {
        x[k + 1] += g[n * n + k];
        x[k] -= g[n * n + k];
      }
    }
  return x;
}

double IsotropicNorm(const Vec& g, Index nn) {
  double s = 0.0;
  for (Index k = 0; k < nn; ++k) s += std::sqrt(std::norm(g[k]) + std::norm(g[nn + k]));
  return s;
}

}  // namespace

RecoveryResult SolveL1(const RecoveryProblem& problem) {
  if (problem.regularizer != Regularizer::kL1) {
    throw Error(ErrorCode::kInvalidArgument, "regularizer", "SolveL1 expects the plain l1 regularizer");
  }
  return SolveImpl(problem, nullptr);
}

RecoveryResult SolveWeightedL1(const RecoveryProblem& problem) {
  if (problem.weights.size() != problem.op.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "weights", "one weight per coefficient required");
  }
  if (problem.weights.size() > 0 && !(problem.weights.minCoeff() > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "weights", "weights must be positive");
  }
  return SolveImpl(problem, &problem.weights);
}

RVec LevelWeights(const LevelStructure& levels, double base) {
  if (!(base > 0)) throw Error(ErrorCode::kInvalidArgument, "base", "must be > 0");
  RVec w(levels.total());
  for (int k = 0; k < levels.count(); ++k)
    w.segment(levels.begin(k), levels.width(k)).setConstant(std::pow(base, k));
  return w;
}

double TotalVariation(const RMat& image) { return GradientMagnitudes(image).sum(); }

RVec GradientMagnitudes(const RMat& image) {
  const Index rows = image.rows(), cols = image.cols();
  RVec g(rows * cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double d1 = i + 1 < rows ? image(i + 1, j) - image(i, j) : 0.0;
      const double d2 = j + 1 < cols ? image(i, j + 1) - image(i, j) : 0.0;
      g[i * cols + j] = std::hypot(d1, d2);
    }
  return g;
}

RecoveryResult SolveTv(const TvProblem& problem) {
  const Index n = problem.n;
  const Shape shape = Shape::D2(n);
  ValidateShape(shape);
  CheckControls(problem.controls, problem.eta);
  CheckOmega(problem.omega, shape.size(), problem.y.size());
  const SolverControls& c = problem.controls;
  const Operator f = Compose({CenterFrequencies(shape), DftOperator(shape)});

  std::vector<Index> omega = problem.omega;
  Vec y = problem.y;
  if (problem.real_image) {
    // Realness makes F x conjugate symmetric: the sample at -w is the
    // conjugate of the sample at w. Adding those mirrors keeps the
    // constraint set closed under conjugation, so projecting a real image
    // onto it gives a real image.
    std::vector<std::pair<Index, Complex>> all;
    std::vector<char> seen(static_cast<size_t>(shape.size()), 0);
    for (size_t i = 0; i < omega.size(); ++i) seen[omega[i]] = 1;
    for (size_t i = 0; i < omega.size(); ++i) {
      all.emplace_back(omega[i], y[i]);
      const Index r = omega[i] / n, col = omega[i] % n;
      const Index mirror = ((n - r) % n) * n + (n - col) % n;
      if (!seen[mirror]) {
        seen[mirror] = 1;
        all.emplace_back(mirror, std::conj(y[i]));
      }
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    omega.clear();
    y.resize(static_cast<Index>(all.size()));
    for (size_t i = 0; i < all.size(); ++i) {
      omega.push_back(all[i].first);
      y[i] = all[i].second;
    }
  }
  // Mirrored entries carry the same information twice, so the ball radius
  // scales with the square root of the duplication.
  const double eta = problem.eta *
                     std::sqrt(static_cast<double>(omega.size()) /
                               static_cast<double>(std::max<size_t>(1, problem.omega.size())));

  const auto project = [&](const Vec& x) {
    const Vec full = f.apply(x);
    const Vec u = Gather(full, omega);
    const Vec pb = ProjectBall(u, y, eta);
    Vec out = x + f.apply_adjoint(Scatter(pb - u, omega, shape.size()));
    if (problem.real_image) out = out.real().cast<Complex>();
    return out;
  };
  const Index nn = n * n;
  BestTracker best{eta, 1e-6 * std::max(y.norm(), 1e-300), Vec::Zero(nn)};
  PrimalDual pd;
  pd.k = [&](const Vec& x) { return Gradient(x, n); };
  pd.kt = [&](const Vec& g) { return GradientAdjoint(g, n); };
  pd.prox_g = [&](const Vec& v, double) { return project(v); };
  pd.prox_fstar = [&](const Vec& v, double) {
    Vec out = v;
    for (Index k = 0; k < nn; ++k) {
      const double m = std::sqrt(std::norm(v[k]) + std::norm(v[nn + k]));
      if (m > 1.0) {
        out[k] /= m;
        out[nn + k] /= m;
      }
    }
    return out;
  };
  pd.score = [&](const Vec& x, const Vec& kx) {
    return std::make_pair(IsotropicNorm(kx, nn), (Gather(f.apply(x), omega) - y).norm());
  };
  // ‖∇‖² <= 8 for forward differences in 2D.
  SolverControls cc = c;
  RecoveryResult r = RunPrimalDual(pd, project(Vec::Zero(nn)), 2 * nn, std::sqrt(8.0), cc, best);
  r.estimate = best.best;
  r.objective = best.best_obj;
  r.residual = best.best_res;
  r.converged = r.converged && best.feasible;
  r.reconstruction = r.estimate;
  const double total = r.reconstruction.squaredNorm();
  r.imaginary_energy = total > 0 ? r.reconstruction.imag().squaredNorm() / total : 0.0;
  if (problem.truth) r.relative_error = RelativeErrorPercent(r.reconstruction, *problem.truth);
  r.threads = ThreadCount();
  return r;
}

Vec Measure(const Operator& op, const std::vector<Index>& omega, const Vec& x) {
  return Gather(op.apply(x), omega);
}

void WriteIterationLog(const std::string& path, const RecoveryResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out.precision(17);
  out << "iteration,objective,residual,best_objective\n";
  for (const IterationRecord& rec : result.log)
    out << rec.iteration << "," << rec.objective << "," << rec.residual << ","
        << rec.best_objective << "\n";
}

}  // namespace asymcs
