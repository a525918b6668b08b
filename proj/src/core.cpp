#include "asymcs/core.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace asymcs {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidShape: return "invalid_shape";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConstruction: return "construction";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& field,
             const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message),
      code_(code),
      field_(field) {}

int Log2(Index n) {
  int k = 0;
  while ((Index{1} << k) < n) ++k;
  return k;
}

std::string Shape::str() const {
  return rank == 1 ? std::to_string(n) : std::to_string(n) + "x" + std::to_string(n);
}

void ValidateShape(const Shape& shape) {
  if (shape.rank != 1 && shape.rank != 2) {
    throw Error(ErrorCode::kInvalidShape, "shape", "rank must be 1 or 2");
  }
  if (shape.n < 2 || !IsPowerOfTwo(shape.n)) {
    throw Error(ErrorCode::kInvalidShape, "shape",
                "side length " + std::to_string(shape.n) +
                    " is not a power of two >= 2");
  }
}

namespace {
std::atomic<int> g_threads{0};
}

void SetThreadCount(int threads) {
  if (threads < 0) {
    throw Error(ErrorCode::kInvalidArgument, "threads", "must be >= 0");
  }
  g_threads = threads;
}

int ThreadCount() {
  const int t = g_threads.load();
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(Index n, const std::function<void(Index)>& fn) {
  const int workers = static_cast<int>(std::min<Index>(ThreadCount(), n));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double RelativeErrorPercent(const Vec& xhat, const Vec& xref) {
  if (xhat.size() != xref.size()) {
    throw Error(ErrorCode::kInvalidShape, "xhat", "size differs from reference");
  }
  const double ref = xref.norm();
  if (ref == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "xref", "reference has zero norm");
  }
  return (xhat - xref).norm() / ref * 100.0;
}

}  // namespace asymcs
