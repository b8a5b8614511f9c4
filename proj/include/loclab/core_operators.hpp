#pragma once

#include "loclab/types.hpp"

namespace loclab {

// discrete derivative: +i on the diagonal, -i on the superdiagonal,
// wrap entry (L-1, 0) for the periodic ring. Normal iff periodic.
OperatorMatrix build_nabla(const LatticeSpec& spec);

// x = diag(0, 1, ..., L-1); offset convention fixed at 0
OperatorMatrix build_position(int L);

// H = (nabla^alpha)^dag f (nabla^alpha) + V, symmetrized after assembly
OperatorMatrix build_hamiltonian(const LatticeSpec& spec, const SiteField& f, const PotentialSpec& V);

// analytic velocity alpha * (nabla^dag)^(alpha-1) (nabla^dag f + f nabla) nabla^(alpha-1),
// always assembled from the periodic derivative. Equals -i[x, H] in the bulk.
OperatorMatrix velocity_operator(const LatticeSpec& spec, const SiteField& f);

// in-place (M + M^dag)/2 after verifying the pre-symmetrization residual
void symmetrize_hermitian(Matrix& M, double rel_tol = 1e-12);

Matrix matrix_power_int(const Matrix& A, int p);

}  // namespace loclab
