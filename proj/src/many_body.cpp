#include "loclab/many_body.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loclab/core_operators.hpp"
#include "loclab/rng.hpp"

namespace loclab {

namespace {

// digits of basis index m, slot 0 slowest
inline int digit_of(long long m, int slot, int N, int L) {
  long long stride = 1;
  for (int k = slot + 1; k < N; ++k) stride *= L;
  return static_cast<int>((m / stride) % L);
}

long long int_pow(int base, int exp) {
  long long out = 1;
  for (int k = 0; k < exp; ++k) {
    out *= base;
    if (out > 1'000'000'000LL) return out;  // saturate well past any valid budget
  }
  return out;
}

// y = (A acting on tensor slot `slot`) x, without materializing the lift
Vector apply_lifted(const Matrix& A, int slot, int N, int L, const Vector& x) {
  const long long dim = x.size();
  long long stride = 1;
  for (int k = slot + 1; k < N; ++k) stride *= L;
  const long long block = stride * L;

  Vector y = Vector::Zero(dim);
  for (long long outer = 0; outer < dim; outer += block) {
    for (long long inner = 0; inner < stride; ++inner) {
      const long long base = outer + inner;
      for (int n = 0; n < L; ++n) {
        Complex acc(0.0, 0.0);
        for (int q = 0; q < L; ++q) acc += A(n, q) * x[base + q * stride];
        y[base + n * stride] = acc;
      }
    }
  }
  return y;
}

int permutation_parity(const std::vector<int>& p) {
  int inv = 0;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return inv % 2;
}

}  // namespace

long long ManyBodySpec::dim() const { return int_pow(lattice.length, N); }

void ManyBodySpec::validate() const {
  if (N < 1) throw std::invalid_argument("ManyBodySpec: N >= 1 required");
  lattice.validate();
  if (fields.empty()) throw std::invalid_argument("ManyBodySpec: no site fields");
  if (fields.size() != 1 && static_cast<int>(fields.size()) != N)
    throw std::invalid_argument("ManyBodySpec: need 1 shared field or N fields");
  for (const auto& f : fields) f.validate(lattice.length);
  if (dim() > 20'000)
    throw std::invalid_argument("ManyBodySpec: L^N exceeds the dense budget of 2e4");
  if (statistics != Statistics::distinguishable && fields.size() != 1) {
    for (size_t i = 1; i < fields.size(); ++i)
      if (fields[i].values != fields[0].values)
        throw std::invalid_argument("ManyBodySpec: indistinguishable particles need identical fields");
  }
}

InteractionSpec printed_hubbard_coupling(double U, int L) {
  LatticeSpec ring{L, Boundary::periodic, 1};
  InteractionSpec inter;
  inter.kind = InteractionKind::pair_matrix;
  inter.U = U;
  inter.c = U * build_nabla(ring).m;
  inter.experimental_printed = true;
  return inter;
}

RealVector interaction_diagonal(const ManyBodySpec& spec, const InteractionSpec& inter) {
  const int L = spec.lattice.length;
  const int N = spec.N;
  const long long dim = spec.dim();

  if (inter.kind == InteractionKind::pair_matrix) {
    if (inter.c.rows() != L || inter.c.cols() != L)
      throw std::invalid_argument("interaction_diagonal: pair matrix must be L x L");
    if (spec.statistics != Statistics::distinguishable &&
        (inter.c - inter.c.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("interaction_diagonal: indistinguishable particles need symmetric couplings");
  }

  RealVector diag = RealVector::Zero(dim);
  std::vector<int> d(N);
  for (long long m = 0; m < dim; ++m) {
    for (int i = 0; i < N; ++i) d[i] = digit_of(m, i, N, L);
    Complex val(0.0, 0.0);
    switch (inter.kind) {
      case InteractionKind::none:
        break;
      case InteractionKind::onsite_hubbard:
        for (int i = 0; i < N; ++i)
          for (int j = i + 1; j < N; ++j)
            if (d[i] == d[j]) val += inter.U;
        break;
      case InteractionKind::pair_matrix:
        for (int i = 0; i < N; ++i)
          for (int j = i + 1; j < N; ++j) val += inter.c(d[i], d[j]);
        break;
    }
    if (std::abs(val.imag()) > 1e-12 * (1.0 + std::abs(val.real())))
      throw std::invalid_argument(
          "interaction_diagonal: couplings produce a non-real diagonal; "
          "the position-diagonal repulsive form requires real entries");
    if (val.real() < -1e-12)
      throw std::invalid_argument("interaction_diagonal: attractive (negative) diagonal entry rejected");
    diag[m] = std::max(0.0, val.real());
  }
  return diag;
}

Matrix lift_single(const Matrix& A, int slot, int N, int L) {
  if (A.rows() != L || A.cols() != L) throw std::invalid_argument("lift_single: A must be L x L");
  if (slot < 0 || slot >= N) throw std::invalid_argument("lift_single: slot out of range");
  long long dim = int_pow(L, N);
  long long stride = 1;
  for (int k = slot + 1; k < N; ++k) stride *= L;
  const long long block = stride * L;

  Matrix M = Matrix::Zero(dim, dim);
  for (long long outer = 0; outer < dim; outer += block)
    for (long long inner = 0; inner < stride; ++inner)
      for (int r = 0; r < L; ++r)
        for (int c = 0; c < L; ++c)
          M(outer + inner + r * stride, outer + inner + c * stride) = A(r, c);
  return M;
}

OperatorMatrix build_many_body_hamiltonian(const ManyBodySpec& spec, const InteractionSpec& inter) {
  spec.validate();
  const int L = spec.lattice.length;
  const int N = spec.N;
  const long long dim = spec.dim();

  const Matrix D = build_nabla(spec.lattice).m;
  const Matrix Da = matrix_power_int(D, spec.lattice.alpha);

  Matrix H = Matrix::Zero(dim, dim);
  for (int i = 0; i < N; ++i) {
    Matrix T = Da.adjoint() * spec.field(i).values.cast<Complex>().asDiagonal() * Da;
    symmetrize_hermitian(T);
    H += lift_single(T, i, N, L);
  }
  H += interaction_diagonal(spec, inter).cast<Complex>().asDiagonal();
  symmetrize_hermitian(H);
  return OperatorMatrix{std::move(H), true};
}

OperatorMatrix sector_projector(const ManyBodySpec& spec) {
  spec.validate();
  if (spec.statistics == Statistics::distinguishable)
    throw std::invalid_argument("sector_projector: distinguishable particles have no sector restriction");
  const int L = spec.lattice.length;
  const int N = spec.N;
  if (N > 6) throw std::invalid_argument("sector_projector: N! permutation sum capped at N = 6");
  const long long dim = spec.dim();
  const bool fermion = spec.statistics == Statistics::fermion;

  Matrix P = Matrix::Zero(dim, dim);
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  double nfact = 1.0;
  for (int k = 2; k <= N; ++k) nfact *= k;

  std::vector<int> d(N);
  do {
    const double sign = fermion && permutation_parity(perm) ? -1.0 : 1.0;
    for (long long m = 0; m < dim; ++m) {
      for (int i = 0; i < N; ++i) d[i] = digit_of(m, i, N, L);
      long long tgt = 0;
      for (int i = 0; i < N; ++i) tgt = tgt * L + d[perm[i]];
      P(tgt, m) += sign / nfact;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  symmetrize_hermitian(P, 1e-10);
  return OperatorMatrix{std::move(P), true};
}

double many_body_bound(int alpha, double a, double b, const EnergyBudget& budget, Convention conv) {
  if (alpha < 1) throw std::invalid_argument("many_body_bound: alpha >= 1 required");
  if (!(a > 0.0)) throw std::invalid_argument("many_body_bound: a > 0 required");
  if (b < a) throw std::invalid_argument("many_body_bound: b >= a required");
  const double al = alpha;
  const double base = b * std::pow(a, 1.0 / al - 1.5) * std::pow(budget.per_particle, 1.0 - 1.0 / (2.0 * al));
  return conv == Convention::printed ? base : 2.0 * base;
}

TypicalVelocityReport typical_velocity(const EigenSystem& es, const ManyBodySpec& spec,
                                       const InteractionSpec& inter, double energy_total,
                                       const Vector& state, double t, Convention conv) {
  spec.validate();
  const int L = spec.lattice.length;
  const int N = spec.N;
  if (state.size() != es.dim || es.dim != spec.dim())
    throw std::invalid_argument("typical_velocity: dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("typical_velocity: state must be normalized");

  LowEnergyProjector P = low_energy_projector(es, energy_total);
  {
    Vector proj = P.rank > 0 ? Vector(P.basis * (P.basis.adjoint() * state)) : Vector(Vector::Zero(es.dim));
    if ((state - proj).norm() > 1e-8)
      throw std::invalid_argument("typical_velocity: state has weight above the energy threshold");
  }

  const Vector s = (t != 0.0) ? evolve(es, state, t) : state;

  double a_env = spec.field(0).lower, b_env = spec.field(0).upper;
  for (int i = 1; i < N; ++i) {
    a_env = std::min(a_env, spec.field(i).lower);
    b_env = std::max(b_env, spec.field(i).upper);
  }

  const Matrix D = build_nabla(spec.lattice).m;
  const Matrix K = D.adjoint() * D;
  const Matrix Da = matrix_power_int(D, spec.lattice.alpha);

  TypicalVelocityReport rep;
  rep.per_particle_speeds.resize(N);
  rep.epsilon_i.resize(N);

  double kinetic_total = 0.0;
  for (int i = 0; i < N; ++i) {
    const Matrix v1 = velocity_operator(spec.lattice, spec.field(i)).m;
    rep.per_particle_speeds[i] = std::abs((s.adjoint() * apply_lifted(v1, i, N, L, s)).real()(0, 0));

    Vector w = s;
    for (int k = 0; k < spec.lattice.alpha; ++k) w = apply_lifted(K, i, N, L, w);
    rep.epsilon_i[i] = a_env * (s.adjoint() * w).real()(0, 0);

    Vector ds = apply_lifted(Da, i, N, L, s);  // <(nabla_i^alpha s)| F_i |(nabla_i^alpha s)>
    double kin = 0.0;
    for (long long m = 0; m < es.dim; ++m)
      kin += spec.field(i).values[digit_of(m, i, N, L)] * std::norm(ds[m]);
    kinetic_total += kin;
  }

  const RealVector vdiag = interaction_diagonal(spec, inter);
  double pot = 0.0;
  for (long long m = 0; m < es.dim; ++m) pot += vdiag[m] * std::norm(s[m]);
  rep.energy_expectation = kinetic_total + pot;

  const double eps_sum = rep.epsilon_i.sum();
  if (eps_sum > rep.energy_expectation + 1e-9)
    throw std::logic_error("typical_velocity: kinetic moments exceed <H>");
  if (rep.energy_expectation > energy_total * (1.0 + 1e-12) + 1e-9)
    throw std::logic_error("typical_velocity: <H> exceeds the energy budget");

  rep.v_typ = rep.per_particle_speeds.mean();
  rep.bound = many_body_bound(spec.lattice.alpha, a_env, b_env, EnergyBudget::of(energy_total, N), conv);
  rep.margin = rep.bound - rep.v_typ;
  return rep;
}

BoundReport equal_partition_check(int alpha, double a, double b, double total, int N,
                                  int trials, std::uint64_t seed) {
  if (!(total > 0.0)) throw std::invalid_argument("equal_partition_check: total > 0 required");
  if (N < 1 || trials < 1) throw std::invalid_argument("equal_partition_check: N, trials >= 1 required");
  BoundParameters p{alpha, a, b, total};
  p.validate();

  const double al = alpha;
  const double expo = 1.0 - 1.0 / (2.0 * al);
  const auto per_particle = [&](double eps) {
    return 2.0 * b * std::pow(a, (1.0 - al) / (2.0 * al)) * std::pow(eps / a, expo);
  };

  Rng rng(seed);
  double worst = 0.0;
  std::vector<double> e(N);
  for (int tr = 0; tr < trials; ++tr) {
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
      e[i] = -std::log(1.0 - rng.uniform());  // Dirichlet(1,...,1) via exponentials
      sum += e[i];
    }
    double mean_bound = 0.0;
    for (int i = 0; i < N; ++i) mean_bound += per_particle(total * e[i] / sum);
    worst = std::max(worst, mean_bound / N);
  }

  BoundReport rep;
  rep.params = p;
  rep.instance_seed = static_cast<long long>(seed);
  rep.measured = worst;
  rep.bound = per_particle(total / N);  // the equal-partition value
  rep.margin = rep.bound - rep.measured;
  return rep;
}

}  // namespace loclab
