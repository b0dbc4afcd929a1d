#include "csifb/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace csifb {

HermitianEig hermitian_eig(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: decomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RVec hermitian_eigenvalues(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: decomposition failed");
  return solver.eigenvalues();
}

CMat psd_sqrt(const CMat& a) {
  const HermitianEig eig = hermitian_eig(a);
  RVec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

int numerical_rank(const CMat& hermitian, double rel_tol) {
  const RVec ev = hermitian_eigenvalues(hermitian);
  if (ev.size() == 0) return 0;
  const double top = ev.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<int>((ev.array() > rel_tol * top).count());
}

CMat unitary_dft(int n) {
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      // reduce the exponent modulo n before forming the angle
      const long long k = (static_cast<long long>(row) * col) % n;
      const double angle = -2.0 * kPi * static_cast<double>(k) / n;
      f(row, col) = std::polar(scale, angle);
    }
  }
  return f;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace csifb
