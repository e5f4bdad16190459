#pragma once

// Linearized fluctuation equations d dx = -A dx dt + B dW around the
// below-threshold fixed point, and the combined (sum/difference) mode model
// that applies when the detunings equal the couplings.

#include <array>
#include <span>

#include <Eigen/Dense>

#include "copo/model.hpp"

namespace copo {

using Matrix8 = Eigen::Matrix<Complex, 8, 8>;
using Matrix4 = Eigen::Matrix<Complex, 4, 4>;
using Vector8 = Eigen::Matrix<Complex, 8, 1>;
using Vector4 = Eigen::Matrix<Complex, 4, 1>;

/// Fluctuation vector ordering follows copo::slot.
struct LinearModel {
  Matrix8 drift;  ///< A
  Matrix8 noise;  ///< B, nonzero only on the first four diagonal entries

  /// B B^T
  Matrix8 diffusion() const { return noise * noise.transpose(); }
};

/// Ordering [A_p, A_p+, A_m, A_m+] with A_p = alpha1 + alpha2 and
/// A_m = alpha1 - alpha2. Noise columns are the four alpha noises.
struct CombinedModel {
  Matrix4 drift;
  Matrix4 noise;

  Matrix4 diffusion() const { return noise * noise.transpose(); }
};

LinearModel build_linear_model(const SystemParams& p, const SteadyState& ss);

/// Throws DetuningMismatch unless Delta_a = J_a, Delta_b = J_b and the pumps
/// are equal and real.
CombinedModel build_combined_model(const SystemParams& p, const SteadyState& ss);

/// Maps [alpha1, alpha1+, alpha2, alpha2+] onto [A_p, A_p+, A_m, A_m+].
Matrix4 combined_basis();

/// Eigenvalues of A from a dense complex eigensolver, sorted with
/// sort_eigenvalues(). Throws ConvergenceFailure if the solver fails.
std::array<Complex, 8> numeric_eigenvalues(const LinearModel& m);
std::array<Complex, 4> numeric_eigenvalues(const CombinedModel& m);

/// Sort by real part, then imaginary part. Real parts closer than `tol` are
/// treated as equal so that round-off does not reorder degenerate pairs.
void sort_eigenvalues(std::span<Complex> values, double tol = 1e-9);

/// Stationary intracavity covariance C solving A C + C A^T = B B^T, i.e. the
/// integral of S(omega) over omega / 2 pi.
Matrix8 stationary_covariance(const LinearModel& m);

}  // namespace copo
