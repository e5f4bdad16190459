#include "copo/linearized.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "copo/errors.hpp"

namespace copo {

namespace {

constexpr double kDetuningTol = 1e-12;

bool close(double a, double b) { return std::abs(a - b) <= kDetuningTol * std::max(1.0, std::abs(b)); }

template <int N>
std::array<Complex, N> eigenvalues_of(const Eigen::Matrix<Complex, N, N>& a) {
  Eigen::ComplexEigenSolver<Eigen::Matrix<Complex, N, N>> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("complex eigensolver did not converge on the drift matrix");
  }
  std::array<Complex, N> out;
  for (int k = 0; k < N; ++k) out[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
  sort_eigenvalues(out);
  return out;
}

}  // namespace

LinearModel build_linear_model(const SystemParams& p, const SteadyState& ss) {
  using namespace slot;
  const Complex i(0.0, 1.0);
  const double k = p.kappa;
  const Complex da(p.gamma_a, p.Delta_a);
  const Complex db(p.gamma_b, p.Delta_b);

  LinearModel m;
  Matrix8& A = m.drift;
  A.setZero();

  // Low-frequency rows.
  A(alpha1, alpha1) = da;
  A(alpha1, alpha1_plus) = -k * ss.beta1;
  A(alpha1, alpha2) = -i * p.J_a;
  A(alpha1, beta1) = -k * std::conj(ss.alpha1);

  A(alpha1_plus, alpha1_plus) = std::conj(da);
  A(alpha1_plus, alpha1) = -k * std::conj(ss.beta1);
  A(alpha1_plus, alpha2_plus) = i * p.J_a;
  A(alpha1_plus, beta1_plus) = -k * ss.alpha1;

  A(alpha2, alpha2) = da;
  A(alpha2, alpha2_plus) = -k * ss.beta2;
  A(alpha2, alpha1) = -i * p.J_a;
  A(alpha2, beta2) = -k * std::conj(ss.alpha2);

  A(alpha2_plus, alpha2_plus) = std::conj(da);
  A(alpha2_plus, alpha2) = -k * std::conj(ss.beta2);
  A(alpha2_plus, alpha1_plus) = i * p.J_a;
  A(alpha2_plus, beta2_plus) = -k * ss.alpha2;

  // High-frequency rows.
  A(beta1, beta1) = db;
  A(beta1, beta2) = -i * p.J_b;
  A(beta1, alpha1) = k * ss.alpha1;

  A(beta1_plus, beta1_plus) = std::conj(db);
  A(beta1_plus, beta2_plus) = i * p.J_b;
  A(beta1_plus, alpha1_plus) = k * std::conj(ss.alpha1);

  A(beta2, beta2) = db;
  A(beta2, beta1) = -i * p.J_b;
  A(beta2, alpha2) = k * ss.alpha2;

  A(beta2_plus, beta2_plus) = std::conj(db);
  A(beta2_plus, beta1_plus) = i * p.J_b;
  A(beta2_plus, alpha2_plus) = k * std::conj(ss.alpha2);

  m.noise.setZero();
  m.noise(alpha1, alpha1) = std::sqrt(k * ss.beta1);
  m.noise(alpha1_plus, alpha1_plus) = std::sqrt(k * std::conj(ss.beta1));
  m.noise(alpha2, alpha2) = std::sqrt(k * ss.beta2);
  m.noise(alpha2_plus, alpha2_plus) = std::sqrt(k * std::conj(ss.beta2));
  return m;
}

Matrix4 combined_basis() {
  Matrix4 t;
  t << 1, 0, 1, 0,
       0, 1, 0, 1,
       1, 0, -1, 0,
       0, 1, 0, -1;
  return t;
}

CombinedModel build_combined_model(const SystemParams& p, const SteadyState& ss) {
  if (!close(p.Delta_a, p.J_a) || !close(p.Delta_b, p.J_b)) {
    throw DetuningMismatch("combined-mode model needs Delta_a = J_a and Delta_b = J_b");
  }
  const double scale = std::max(1.0, std::abs(p.eps1));
  if (std::abs(p.eps1 - p.eps2) > kDetuningTol * scale ||
      std::abs(p.eps1.imag()) > kDetuningTol * scale) {
    throw DetuningMismatch("combined-mode model needs equal real pumps");
  }

  const Complex i(0.0, 1.0);
  const Complex g = p.kappa * ss.beta1;
  const Complex s = std::sqrt(g);

  CombinedModel m;
  m.drift << p.gamma_a, -g, 0, 0,
             -g, p.gamma_a, 0, 0,
             0, 0, p.gamma_a + 2.0 * i * p.J_a, -g,
             0, 0, -g, p.gamma_a - 2.0 * i * p.J_a;
  m.noise << s, 0, s, 0,
             0, s, 0, s,
             s, 0, -s, 0,
             0, s, 0, -s;
  return m;
}

std::array<Complex, 8> numeric_eigenvalues(const LinearModel& m) { return eigenvalues_of<8>(m.drift); }

std::array<Complex, 4> numeric_eigenvalues(const CombinedModel& m) { return eigenvalues_of<4>(m.drift); }

void sort_eigenvalues(std::span<Complex> values, double tol) {
  std::sort(values.begin(), values.end(),
            [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
  // Within runs of (numerically) equal real parts, order by imaginary part.
  auto first = values.begin();
  while (first != values.end()) {
    auto last = first + 1;
    while (last != values.end() && last->real() - first->real() <= tol) ++last;
    std::sort(first, last, [](const Complex& a, const Complex& b) { return a.imag() < b.imag(); });
    first = last;
  }
}

Matrix8 stationary_covariance(const LinearModel& m) {
  // vec(A C + C A^T) = (I (x) A + A (x) I) vec(C), column-major vec.
  constexpr int n = 8;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n * n, n * n);
  const Matrix8& A = m.drift;
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      const int row = c * n + r;
      for (int k = 0; k < n; ++k) {
        L(row, c * n + k) += A(r, k);  // (A C)(r, c)
        L(row, k * n + r) += A(c, k);  // (C A^T)(r, c)
      }
    }
  }
  const Matrix8 D = m.diffusion();
  const Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(D.data(), n * n);
  Eigen::VectorXcd sol = L.partialPivLu().solve(rhs);
  return Eigen::Map<Matrix8>(sol.data());
}

}  // namespace copo
