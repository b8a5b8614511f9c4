#pragma once

#include "loclab/types.hpp"

namespace loclab {

// full Hermitian eigendecomposition, energies ascending
struct EigenSystem {
  int dim = 0;
  RealVector energies;
  Matrix modes;  // orthonormal columns
};

EigenSystem eigendecompose(const OperatorMatrix& H);

// orthogonal projector onto modes with E <= epsilon*(1 + 1e-12); rank 0 is valid
struct LowEnergyProjector {
  double epsilon = 0.0;
  int rank = 0;
  Matrix basis;  // dim x rank, orthonormal columns (ascending energy)

  Matrix matrix() const { return basis * basis.adjoint(); }
};

LowEnergyProjector low_energy_projector(const EigenSystem& es, double epsilon);

// e^{-iHt} |state>
Vector evolve(const EigenSystem& es, const Vector& state, double t);

// e^{-beta H}
OperatorMatrix thermal_matrix(const EigenSystem& es, double beta);

// |<row| e^{-beta H} |m>| for all m, O(dim^2)
RealVector thermal_row_magnitudes(const EigenSystem& es, double beta, int row);

}  // namespace loclab
