#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace asymcs {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

enum class ErrorCode {
  kInvalidShape,
  kInvalidArgument,
  kOutOfRange,
  kInfeasible,
  kIo,
  kConstruction,
};

const char* ToString(ErrorCode code);

// All library failures are reported through this exception. `field` names the
// offending parameter when there is one, so callers (the CLI in particular) can
// produce field-precise validation messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& field, const std::string& message);

  ErrorCode code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

inline bool IsPowerOfTwo(Index n) { return n >= 1 && (n & (n - 1)) == 0; }

int Log2(Index n);

// Row-major linearization: entry (row, col) of an n x n grid lives at
// row * n + col.
struct Shape {
  int rank = 1;  // 1 or 2
  Index n = 0;   // side length

  static Shape D1(Index n) { return {1, n}; }
  static Shape D2(Index n) { return {2, n}; }

  Index size() const { return rank == 1 ? n : n * n; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Throws kInvalidShape unless n is a power of two >= 2 and rank is 1 or 2.
void ValidateShape(const Shape& shape);

// Worker count used by ParallelFor (default: hardware concurrency). Results of
// every parallel loop in the library are independent of this setting.
void SetThreadCount(int threads);
int ThreadCount();

// Runs fn(i) for i in [0, n) on ThreadCount() workers. fn must only write to
// state owned by index i.
void ParallelFor(Index n, const std::function<void(Index)>& fn);

// ‖xhat - xref‖₂ / ‖xref‖₂ × 100.
double RelativeErrorPercent(const Vec& xhat, const Vec& xref);

}  // namespace asymcs
