#include "loclab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace loclab {

EigenSystem eigendecompose(const OperatorMatrix& H) {
  const int n = H.dim();
  if (n < 1) throw std::invalid_argument("eigendecompose: empty matrix");
  const double scale = H.m.cwiseAbs().maxCoeff();
  const double resid = (H.m - H.m.adjoint()).cwiseAbs().maxCoeff();
  if (!H.hermitian || (scale > 0.0 && resid > 1e-12 * scale))
    throw std::invalid_argument("eigendecompose: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(H.m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: solver failed to converge");

  EigenSystem es;
  es.dim = n;
  es.energies = solver.eigenvalues();  // ascending
  es.modes = solver.eigenvectors();

  // self-checks are two extra gemms; skip at sizes where they would dominate
  if (n <= 2048) {
    const double ortho = (es.modes.adjoint() * es.modes - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10) throw std::runtime_error("eigendecompose: eigenbasis not orthonormal");
    const Matrix rec = es.modes * es.energies.cast<Complex>().asDiagonal() * es.modes.adjoint();
    const double rel = scale > 0.0 ? (rec - H.m).cwiseAbs().maxCoeff() / scale : 0.0;
    if (rel > 1e-9) throw std::runtime_error("eigendecompose: reconstruction residual too large");
  }
  return es;
}

LowEnergyProjector low_energy_projector(const EigenSystem& es, double epsilon) {
  if (!std::isfinite(epsilon)) throw std::invalid_argument("low_energy_projector: epsilon must be finite");
  // degenerate levels at the threshold enter or leave together
  const double cut = epsilon * (1.0 + 1e-12);
  int r = 0;
  while (r < es.dim && es.energies[r] <= cut) ++r;

  LowEnergyProjector P;
  P.epsilon = epsilon;
  P.rank = r;
  P.basis = es.modes.leftCols(r);
  if (r > 0) {
    const double ortho = (P.basis.adjoint() * P.basis - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10) throw std::runtime_error("low_energy_projector: basis not isometric");
  }
  return P;
}

Vector evolve(const EigenSystem& es, const Vector& state, double t) {
  if (state.size() != es.dim) throw std::invalid_argument("evolve: state dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8) throw std::invalid_argument("evolve: state must be normalized");

  Vector c = es.modes.adjoint() * state;
  for (int j = 0; j < es.dim; ++j) c[j] *= std::exp(Complex(0.0, -es.energies[j] * t));
  Vector out = es.modes * c;
  if (std::abs(out.norm() - 1.0) > 1e-10) throw std::runtime_error("evolve: norm drift beyond 1e-10");
  return out;
}

OperatorMatrix thermal_matrix(const EigenSystem& es, double beta) {
  if (beta < 0.0) throw std::invalid_argument("thermal_matrix: beta >= 0 required");
  RealVector w(es.dim);
  for (int j = 0; j < es.dim; ++j) w[j] = std::exp(-beta * es.energies[j]);
  Matrix T = es.modes * w.cast<Complex>().asDiagonal() * es.modes.adjoint();
  T = 0.5 * (T + T.adjoint()).eval();
  return OperatorMatrix{std::move(T), true};
}

RealVector thermal_row_magnitudes(const EigenSystem& es, double beta, int row) {
  if (beta < 0.0) throw std::invalid_argument("thermal_row_magnitudes: beta >= 0 required");
  if (row < 0 || row >= es.dim) throw std::invalid_argument("thermal_row_magnitudes: row out of range");
  RealVector w(es.dim);
  for (int j = 0; j < es.dim; ++j) w[j] = std::exp(-beta * es.energies[j]);
  // <row| e^{-beta H} = (U_row .* w) U^dag, O(dim^2)
  Eigen::RowVectorXcd weighted = es.modes.row(row).cwiseProduct(w.cast<Complex>().transpose());
  Eigen::RowVectorXcd amps = weighted * es.modes.adjoint();
  return amps.cwiseAbs().transpose();
}

}  // namespace loclab
