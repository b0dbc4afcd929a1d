#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace csifb {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
struct HermitianEig {
  RVec values;
  CMat vectors;
};

HermitianEig hermitian_eig(const CMat& a);

/// Eigenvalues of a Hermitian matrix, ascending.
RVec hermitian_eigenvalues(const CMat& a);

/// Principal square root of a Hermitian PSD matrix. Eigenvalues below zero
/// (roundoff) are clamped.
CMat psd_sqrt(const CMat& a);

/// Number of eigenvalues exceeding rel_tol * max eigenvalue.
int numerical_rank(const CMat& hermitian, double rel_tol = 1e-9);

/// Unitary N-point DFT, [F]_{n,l} = exp(-j 2 pi l n / N) / sqrt(N).
CMat unitary_dft(int n);

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// processed exactly once; callers write results into per-index slots so the
/// outcome does not depend on the thread count.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace csifb
