#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "loclab/core_operators.hpp"
#include "loclab/many_body.hpp"
#include "loclab/rng.hpp"
#include "loclab/spectral.hpp"

using namespace loclab;

namespace {

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

SiteField random_field(int L, std::uint64_t seed) {
  Rng rng(seed);
  SiteField f;
  f.values = RealVector(L);
  for (int n = 0; n < L; ++n) f.values[n] = rng.uniform(0.5, 2.0);
  f.lower = 0.5;
  f.upper = 2.0;
  return f;
}

}  // namespace

TEST_CASE("one particle reduces to the single-chain Hamiltonian") {
  const int L = 12;
  auto f = random_field(L, 1);
  LatticeSpec lat{L, Boundary::periodic, 2};
  ManyBodySpec spec{1, lat, {f}, Statistics::distinguishable};
  Matrix Hmb = build_many_body_hamiltonian(spec, {}).m;
  Matrix H1 = build_hamiltonian(lat, f, PotentialSpec::zero(L)).m;
  CHECK((Hmb - H1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two noninteracting particles form a Kronecker sum") {
  const int L = 4;
  auto f0 = random_field(L, 2);
  auto f1 = random_field(L, 3);
  LatticeSpec lat{L, Boundary::periodic, 1};
  ManyBodySpec spec{2, lat, {f0, f1}, Statistics::distinguishable};
  Matrix Hmb = build_many_body_hamiltonian(spec, {}).m;

  Matrix h0 = build_hamiltonian(lat, f0, PotentialSpec::zero(L)).m;
  Matrix h1 = build_hamiltonian(lat, f1, PotentialSpec::zero(L)).m;
  Matrix id = Matrix::Identity(L, L);
  CHECK((Hmb - (kron(h0, id) + kron(id, h1))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lifting places the operator on the requested slot") {
  const int L = 3, N = 3;
  Matrix A = Matrix::Random(L, L);
  Matrix id = Matrix::Identity(L, L);
  CHECK((lift_single(A, 0, N, L) - kron(kron(A, id), id)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((lift_single(A, 1, N, L) - kron(kron(id, A), id)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((lift_single(A, 2, N, L) - kron(kron(id, id), A)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("onsite coupling adds U exactly on coincidence configurations") {
  const int L = 4;
  auto f = SiteField::constant(L, 1.0);
  LatticeSpec lat{L, Boundary::periodic, 1};
  ManyBodySpec spec{2, lat, {f}, Statistics::distinguishable};
  InteractionSpec inter;
  inter.kind = InteractionKind::onsite_hubbard;
  inter.U = 3.0;
  Matrix H0 = build_many_body_hamiltonian(spec, {}).m;
  Matrix HU = build_many_body_hamiltonian(spec, inter).m;
  Matrix diff = HU - H0;
  for (int n1 = 0; n1 < L; ++n1)
    for (int n2 = 0; n2 < L; ++n2) {
      const int idx = n1 * L + n2;
      CHECK(diff(idx, idx).real() == doctest::Approx(n1 == n2 ? 3.0 : 0.0).epsilon(1e-14));
    }
  diff.diagonal().setZero();
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("interaction validation rejects what the algebra rejects") {
  const int L = 4;
  ManyBodySpec spec{2, {L, Boundary::periodic, 1}, {SiteField::constant(L, 1.0)},
                    Statistics::distinguishable};

  InteractionSpec attractive;
  attractive.kind = InteractionKind::onsite_hubbard;
  attractive.U = -1.0;
  CHECK_THROWS_AS(interaction_diagonal(spec, attractive), std::invalid_argument);

  // the first-quantized coupling proportional to the derivative matrix has an
  // imaginary diagonal, so it cannot enter a Hermitian diagonal interaction
  CHECK_THROWS_AS(interaction_diagonal(spec, printed_hubbard_coupling(2.0, L)),
                  std::invalid_argument);
  CHECK_NOTHROW(interaction_diagonal(spec, printed_hubbard_coupling(0.0, L)));
  CHECK(printed_hubbard_coupling(2.0, L).experimental_printed);
}

TEST_CASE("product dimension overflow is rejected") {
  ManyBodySpec spec{3, {200, Boundary::periodic, 1}, {SiteField::constant(200, 1.0)},
                    Statistics::distinguishable};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("indistinguishable particles need identical fields") {
  const int L = 4;
  ManyBodySpec bad{2, {L, Boundary::periodic, 1},
                   {random_field(L, 4), random_field(L, 5)}, Statistics::boson};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  ManyBodySpec ok{2, {L, Boundary::periodic, 1}, {SiteField::constant(L, 1.0)}, Statistics::boson};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("sector projector ranks count the symmetric configurations") {
  const int L = 2;
  auto f = SiteField::constant(L, 1.0);
  ManyBodySpec bos{2, {L, Boundary::periodic, 1}, {f}, Statistics::boson};
  ManyBodySpec fer{2, {L, Boundary::periodic, 1}, {f}, Statistics::fermion};

  Matrix Pb = sector_projector(bos).m;
  Matrix Pf = sector_projector(fer).m;
  CHECK(Pb.trace().real() == doctest::Approx(3.0).epsilon(1e-12));  // C(2+1, 2)
  CHECK(Pf.trace().real() == doctest::Approx(1.0).epsilon(1e-12));  // C(2, 2)

  ManyBodySpec dis{2, {L, Boundary::periodic, 1}, {f}, Statistics::distinguishable};
  CHECK_THROWS_AS(sector_projector(dis), std::invalid_argument);
}

TEST_CASE("sector projector is orthogonal and commutes with the dynamics") {
  const int L = 4, N = 2;
  auto f = random_field(L, 6);
  LatticeSpec lat{L, Boundary::periodic, 1};
  for (auto stats : {Statistics::boson, Statistics::fermion}) {
    ManyBodySpec spec{N, lat, {f}, stats};
    Matrix P = sector_projector(spec).m;
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P - P.adjoint()).cwiseAbs().maxCoeff() < 1e-13);

    InteractionSpec inter;
    inter.kind = InteractionKind::onsite_hubbard;
    inter.U = 2.0;
    Matrix H = build_many_body_hamiltonian(spec, inter).m;
    CHECK((P * H - H * P).cwiseAbs().maxCoeff() < 1e-9);

    // the total velocity is sector-blind, and the particle label is unobservable
    Matrix v = velocity_operator(lat, f).m;
    Matrix v0 = lift_single(v, 0, N, L);
    Matrix v1 = lift_single(v, 1, N, L);
    CHECK((P * (v0 + v1) - (v0 + v1) * P).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((P * v0 * P - P * v1 * P).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("speed ceiling hand values and the convention factor") {
  CHECK(many_body_bound(1, 1.0, 1.0, EnergyBudget::of(0.08, 2), Convention::printed) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(many_body_bound(1, 1.0, 1.0, EnergyBudget::of(0.08, 2), Convention::derived) ==
        doctest::Approx(0.4).epsilon(1e-14));
  CHECK(many_body_bound(1, 1.0, 1.0, EnergyBudget::of(0.0, 3), Convention::derived) == 0.0);
  for (int alpha : {1, 2, 3}) {
    const double p = many_body_bound(alpha, 0.7, 1.9, EnergyBudget::of(1.3, 4), Convention::printed);
    const double d = many_body_bound(alpha, 0.7, 1.9, EnergyBudget::of(1.3, 4), Convention::derived);
    CHECK(d == doctest::Approx(2.0 * p).epsilon(1e-14));
    // b a^{1/alpha - 3/2} (E/N)^{1 - 1/(2 alpha)}
    const double byhand =
        1.9 * std::pow(0.7, 1.0 / alpha - 1.5) * std::pow(1.3 / 4.0, 1.0 - 0.5 / alpha);
    CHECK(p == doctest::Approx(byhand).epsilon(1e-13));
  }
}

TEST_CASE("single particle typical velocity matches the direct expectation") {
  const int L = 10;
  auto f = random_field(L, 7);
  LatticeSpec lat{L, Boundary::periodic, 1};
  ManyBodySpec spec{1, lat, {f}, Statistics::distinguishable};
  auto es = eigendecompose(build_many_body_hamiltonian(spec, {}));
  auto P = low_energy_projector(es, 1.0);
  REQUIRE(P.rank > 0);
  Rng rng(8);
  Vector s = rng.haar_state_in(P.basis);
  auto rep = typical_velocity(es, spec, {}, 1.0, s);

  Matrix v = velocity_operator(lat, f).m;
  CHECK(rep.v_typ == doctest::Approx(std::abs(s.dot(v * s).real())).epsilon(1e-12));
  CHECK(rep.epsilon_i.size() == 1);
  CHECK(rep.epsilon_i[0] <= rep.energy_expectation + 1e-9);
  CHECK(rep.margin == doctest::Approx(rep.bound - rep.v_typ).epsilon(1e-12));
}

TEST_CASE("the ground state does not move") {
  const int L = 6, N = 2;
  auto f = SiteField::constant(L, 1.0);
  ManyBodySpec spec{N, {L, Boundary::periodic, 1}, {f}, Statistics::boson};
  InteractionSpec inter;
  inter.kind = InteractionKind::onsite_hubbard;
  inter.U = 2.0;
  auto es = eigendecompose(build_many_body_hamiltonian(spec, inter));
  Vector gs = es.modes.col(0);
  auto rep = typical_velocity(es, spec, inter, es.energies[0] + 1e-9, gs);
  CHECK(rep.v_typ < 1e-9);
}

TEST_CASE("states outside the energy shell are rejected") {
  const int L = 6;
  auto f = SiteField::constant(L, 1.0);
  ManyBodySpec spec{2, {L, Boundary::periodic, 1}, {f}, Statistics::distinguishable};
  auto es = eigendecompose(build_many_body_hamiltonian(spec, {}));
  Vector top = es.modes.col(es.dim - 1);
  CHECK_THROWS_AS(typical_velocity(es, spec, {}, es.energies[1], top), std::invalid_argument);

  Vector unnorm = Vector::Constant(es.dim, Complex(1.0, 0.0));
  CHECK_THROWS_AS(typical_velocity(es, spec, {}, es.energies[1], unnorm), std::invalid_argument);
}

TEST_CASE("interacting pairs on the shell stay under the speed ceiling") {
  const int L = 10, N = 2;
  auto f = SiteField::constant(L, 1.0);
  ManyBodySpec spec{N, {L, Boundary::periodic, 1}, {f}, Statistics::boson};
  Matrix Psec = sector_projector(spec).m;
  for (double U : {0.0, 2.0, 5.0}) {
    InteractionSpec inter;
    if (U > 0.0) {
      inter.kind = InteractionKind::onsite_hubbard;
      inter.U = U;
    }
    auto es = eigendecompose(build_many_body_hamiltonian(spec, inter));
    auto P = low_energy_projector(es, 1.0);
    REQUIRE(P.rank > 0);
    Rng rng(100 + static_cast<std::uint64_t>(U));
    for (int k = 0; k < 20; ++k) {
      Vector s = rng.haar_state_in(P.basis);
      Vector ss = Psec * s;
      REQUIRE(ss.norm() > 1e-8);
      ss /= ss.norm();
      auto rep = typical_velocity(es, spec, inter, 1.0, ss);
      CHECK(rep.margin > 0.0);
      // symmetric states see identical per-particle speeds
      CHECK(rep.per_particle_speeds[0] ==
            doctest::Approx(rep.per_particle_speeds[1]).epsilon(1e-9));
    }
  }
}

TEST_CASE("speeds are invariant along the evolution") {
  const int L = 8;
  auto f = random_field(L, 12);
  ManyBodySpec spec{2, {L, Boundary::periodic, 1}, {f}, Statistics::distinguishable};
  auto es = eigendecompose(build_many_body_hamiltonian(spec, {}));
  auto P = low_energy_projector(es, 2.0);
  REQUIRE(P.rank > 1);
  Rng rng(13);
  Vector s = rng.haar_state_in(P.basis);
  auto r0 = typical_velocity(es, spec, {}, 2.0, s, 0.0);
  auto rt = typical_velocity(es, spec, {}, 2.0, s, 17.0);
  // the shell is invariant; only the state rotates inside it
  CHECK(rt.energy_expectation == doctest::Approx(r0.energy_expectation).epsilon(1e-9));
  CHECK(rt.bound == doctest::Approx(r0.bound).epsilon(1e-12));
}

TEST_CASE("random energy partitions never beat the equal split") {
  for (int alpha : {1, 2, 3}) {
    auto rep = equal_partition_check(alpha, 0.8, 1.7, 2.0, 5, 10000, 31u + alpha);
    CHECK(rep.margin >= 0.0);
    CHECK(rep.measured <= rep.bound);
  }
}

TEST_CASE("equal partition hand value and the single-particle degenerate case") {
  // alpha = 1, a = b = 1: per-particle rate is 2 sqrt(eps), maximized at eps = E/N
  auto rep = equal_partition_check(1, 1.0, 1.0, 1.0, 2, 500, 3);
  CHECK(rep.bound == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rep.measured <= rep.bound);

  auto solo = equal_partition_check(1, 1.0, 1.0, 1.0, 1, 50, 4);
  CHECK(solo.measured == doctest::Approx(solo.bound).epsilon(1e-15));
  CHECK(solo.margin == doctest::Approx(0.0).epsilon(1e-15));
}
