#pragma once

#include <cstdint>

#include "loclab/spectral.hpp"
#include "loclab/types.hpp"

namespace loclab {

enum class Statistics { distinguishable, boson, fermion };
enum class InteractionKind { none, onsite_hubbard, pair_matrix };
enum class Convention { printed, derived };

struct InteractionSpec {
  InteractionKind kind = InteractionKind::none;
  double U = 0.0;
  Matrix c;  // L x L pair couplings, used when kind == pair_matrix
  bool experimental_printed = false;
};

// c_{nm} = U * nabla_{nm}. Kept as an experimental form: its interaction
// diagonal is imaginary for U != 0 and is rejected at validation.
InteractionSpec printed_hubbard_coupling(double U, int L);

struct ManyBodySpec {
  int N = 1;
  LatticeSpec lattice;
  std::vector<SiteField> fields;  // one per particle, or a single shared field
  Statistics statistics = Statistics::distinguishable;

  long long dim() const;
  const SiteField& field(int i) const { return fields.size() == 1 ? fields[0] : fields.at(i); }
  void validate() const;
};

// diagonal of the pair interaction on the L^N product basis
RealVector interaction_diagonal(const ManyBodySpec& spec, const InteractionSpec& inter);

// A acting on tensor slot `slot`, identity elsewhere (slot 0 is the slowest index)
Matrix lift_single(const Matrix& A, int slot, int N, int L);

// H = sum_i (nabla_i^dag)^alpha F_i nabla_i^alpha + V on the L^N product space
OperatorMatrix build_many_body_hamiltonian(const ManyBodySpec& spec, const InteractionSpec& inter);

// orthogonal projector onto the fully (anti)symmetric subspace
OperatorMatrix sector_projector(const ManyBodySpec& spec);

// printed: b a^{1/alpha - 3/2} (E/N)^{1 - 1/(2 alpha)}; derived: twice that
// (the factor 2 lost in the equal-partition maximization step, restored)
double many_body_bound(int alpha, double a, double b, const EnergyBudget& budget, Convention conv);

struct TypicalVelocityReport {
  RealVector per_particle_speeds;  // |<v_i>|
  RealVector epsilon_i;            // a <(nabla_i^dag nabla_i)^alpha>
  double v_typ = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  double energy_expectation = 0.0;
};

// per-particle speeds and kinetic energies of a state inside the total-energy
// projector range; asserts sum_i eps_i <= <H> <= E
TypicalVelocityReport typical_velocity(const EigenSystem& es, const ManyBodySpec& spec,
                                       const InteractionSpec& inter, double energy_total,
                                       const Vector& state, double t = 0.0,
                                       Convention conv = Convention::derived);

// concavity of x^{1 - 1/(2 alpha)}: random simplex partitions of `total` never
// beat the equal partition in the averaged per-particle bound
BoundReport equal_partition_check(int alpha, double a, double b, double total, int N,
                                  int trials, std::uint64_t seed);

}  // namespace loclab
