#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "loclab/bound_checker.hpp"
#include "loclab/core_operators.hpp"
#include "loclab/rng.hpp"
#include "loclab/spectral.hpp"

using namespace loclab;

namespace {

struct FreeSystem {
  EigenSystem es;
  OperatorMatrix v;
  OperatorMatrix nabla;
};

FreeSystem free_system(int L, int alpha) {
  LatticeSpec lat{L, Boundary::periodic, alpha};
  auto f = SiteField::constant(L, 1.0);
  FreeSystem s;
  s.es = eigendecompose(build_hamiltonian(lat, f, PotentialSpec::zero(L)));
  s.v = velocity_operator(lat, f);
  s.nabla = build_nabla(lat);
  return s;
}

}  // namespace

TEST_CASE("analytic bound evaluates to hand values") {
  CHECK(lattice_velocity_bound({1, 1.0, 1.0, 0.04}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(lattice_velocity_bound({1, 1.0, 4.0, 1.0}) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(lattice_velocity_bound({1, 1.0, 1.0, 0.0}) == 0.0);
  // alpha = 2: 2*2*sqrt(b) a^{-1/4} eps^{3/4}
  CHECK(lattice_velocity_bound({2, 1.0, 1.0, 1.0}) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(lattice_velocity_bound({2, 16.0, 16.0, 1.0}) ==
        doctest::Approx(4.0 * 4.0 * std::pow(16.0, -0.25)).epsilon(1e-14));
}

TEST_CASE("bound is monotone in epsilon and rejects bad parameters") {
  double prev = 0.0;
  for (double eps : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    double cur = lattice_velocity_bound({2, 0.5, 2.0, eps});
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK_THROWS_AS(lattice_velocity_bound({1, 0.0, 1.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_velocity_bound({1, 2.0, 1.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_velocity_bound({0, 1.0, 1.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_velocity_bound({1, 1.0, 1.0, -0.1}), std::invalid_argument);
}

TEST_CASE("projected norm on the free 4-ring at eps = 2 is exactly 2") {
  auto s = free_system(4, 1);
  auto pn = projected_velocity_norm(s.es, s.v, 2.0);
  CHECK(pn.rank == 3);
  CHECK(pn.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("projected norm flags the empty subspace") {
  auto s = free_system(8, 1);
  SiteField f = SiteField::constant(8, 1.0);
  PotentialSpec V;
  V.diagonal = RealVector::Constant(8, 0.5);  // lifts the ground energy to 0.5
  auto es = eigendecompose(build_hamiltonian({8, Boundary::periodic, 1}, f, V));
  auto pn = projected_velocity_norm(es, s.v, 0.1);
  CHECK(pn.rank == 0);
  CHECK(pn.value == 0.0);
}

TEST_CASE("free chain at L = 512, eps = 0.1 reproduces the pinned norm") {
  auto s = free_system(512, 1);
  auto pn = projected_velocity_norm(s.es, s.v, 0.1);
  CHECK(std::abs(pn.value - 0.604011898638457) < 1e-10);

  const double bound = lattice_velocity_bound({1, 1.0, 1.0, 0.1});
  CHECK(std::abs(bound - 0.632455532033676) < 1e-12);
  // the filling ratio sits within one mode spacing of sqrt(1 - eps/4)
  const double ratio = pn.value / bound;
  const double target = std::sqrt(1.0 - 0.1 / 4.0);
  CHECK(std::abs(ratio - target) < 0.0369);
  CHECK(pn.value < bound);
}

TEST_CASE("projected norm is invariant under Heisenberg evolution of v") {
  auto s = free_system(48, 1);
  Rng rng(3);
  SiteField f;
  f.values = RealVector(48);
  for (int n = 0; n < 48; ++n) f.values[n] = rng.uniform(0.5, 2.0);
  f.lower = 0.5;
  f.upper = 2.0;
  LatticeSpec lat{48, Boundary::periodic, 1};
  auto es = eigendecompose(build_hamiltonian(lat, f, PotentialSpec::zero(48)));
  auto v = velocity_operator(lat, f);

  auto pn0 = projected_velocity_norm(es, v, 0.5);
  const double t = 0.7;
  Matrix U = es.modes *
             (es.energies.array() * Complex(0, 1) * t).exp().matrix().asDiagonal() *
             es.modes.adjoint();
  OperatorMatrix vt{U * v.m * U.adjoint(), true};
  auto pnt = projected_velocity_norm(es, vt, 0.5);
  CHECK(pnt.value == doctest::Approx(pn0.value).epsilon(1e-10));
}

TEST_CASE("projected norm scales exactly under a constant field rescale") {
  const int L = 64;
  const double c = 3.0;
  LatticeSpec lat{L, Boundary::periodic, 1};
  auto f1 = SiteField::constant(L, 1.0);
  auto fc = SiteField::constant(L, c);
  auto es1 = eigendecompose(build_hamiltonian(lat, f1, PotentialSpec::zero(L)));
  auto esc = eigendecompose(build_hamiltonian(lat, fc, PotentialSpec::zero(L)));
  auto v1 = velocity_operator(lat, f1);
  auto vc = velocity_operator(lat, fc);
  const double eps = 0.3;
  auto a = projected_velocity_norm(esc, vc, eps);
  auto b = projected_velocity_norm(es1, v1, eps / c);
  CHECK(a.value == doctest::Approx(c * b.value).epsilon(1e-10));
}

TEST_CASE("restricted moments respect the interpolation exponents") {
  auto s = free_system(64, 2);
  const double eps = 0.5;
  BoundParameters p{2, 1.0, 1.0, eps};
  for (int n = 0; n <= 2; ++n) {
    double sampled = 0.0;
    auto rep = jensen_moment_check(s.es, s.nabla, p, n, 12, 99, &sampled);
    CHECK(rep.bound == doctest::Approx(std::pow(eps, 1.0 - n / 2.0)).epsilon(1e-12));
    CHECK(rep.margin >= -1e-9 * rep.bound);
    CHECK(sampled <= rep.measured * (1.0 + 1e-12));
  }
}

TEST_CASE("moment order n = alpha saturates exactly") {
  // <(nabla^dag nabla)^0> = 1 on any nonempty range, and the bound is 1
  auto s = free_system(32, 1);
  auto rep = jensen_moment_check(s.es, s.nabla, {1, 1.0, 1.0, 0.7}, 1, 4, 5);
  CHECK(rep.bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(rep.measured - 1.0) < 1e-12);
}

TEST_CASE("alpha = 2 moment saturates at a kinetic threshold") {
  // eps placed exactly at K_{j0}^2 makes the n = 1 supremum equal sqrt(eps)
  const int L = 64;
  auto s = free_system(L, 2);
  const double K = 2.0 - 2.0 * std::cos(2.0 * M_PI * 5 / L);
  const double eps = K * K;
  auto rep = jensen_moment_check(s.es, s.nabla, {2, 1.0, 1.0, eps}, 1, 8, 17);
  CHECK(rep.measured == doctest::Approx(std::sqrt(eps)).epsilon(1e-12));
  CHECK(rep.measured <= rep.bound * (1.0 + 1e-12));
}

TEST_CASE("empty subspace reports pass with the full margin") {
  const int L = 16;
  SiteField f = SiteField::constant(L, 1.0);
  PotentialSpec V;
  V.diagonal = RealVector::Constant(L, 1.0);
  auto es = eigendecompose(build_hamiltonian({L, Boundary::periodic, 1}, f, V));
  auto nab = build_nabla({L, Boundary::periodic, 1});
  auto rep = jensen_moment_check(es, nab, {1, 1.0, 1.0, 0.5}, 0, 4, 3);
  CHECK(rep.empty_subspace);
  CHECK(rep.measured == 0.0);
  CHECK(rep.margin == doctest::Approx(rep.bound));
}

TEST_CASE("random instances are reproducible and certified") {
  auto a = random_instance(64, 0.5, 2.0, 1.0, 42);
  auto b = random_instance(64, 0.5, 2.0, 1.0, 42);
  auto c = random_instance(64, 0.5, 2.0, 1.0, 43);
  CHECK((a.f.values - b.f.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.V.diagonal - b.V.diagonal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.f.values - c.f.values).cwiseAbs().maxCoeff() > 1e-3);

  CHECK(a.f.lower == doctest::Approx(a.f.values.minCoeff()));
  CHECK(a.f.upper == doctest::Approx(a.f.values.maxCoeff()));
  CHECK(a.f.lower >= 0.5);
  CHECK(a.f.upper <= 2.0);
  CHECK(a.V.diagonal.minCoeff() >= 0.0);
  CHECK(a.V.diagonal.maxCoeff() <= 1.0);
  a.f.validate(64);
  a.V.validate(64);
}

TEST_CASE("end-to-end velocity check on random instances never violates") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto inst = random_instance(96, 0.5, 2.0, 1.0, seed);
    for (int alpha : {1, 2}) {
      LatticeSpec lat{96, Boundary::periodic, alpha};
      for (double eps : {0.2, 0.6, 1.0}) {
        auto rep = check_velocity_bound(lat, inst.f, inst.V, eps, seed);
        CHECK(rep.violation_free());
        CHECK(rep.bound == lattice_velocity_bound({alpha, inst.f.lower, inst.f.upper, eps}));
      }
    }
  }
}

TEST_CASE("log-log fit recovers a synthetic power law exactly") {
  std::vector<BoundReport> reports;
  for (double eps : {0.01, 0.03, 0.1, 0.3, 1.0}) {
    BoundReport r;
    r.params.epsilon = eps;
    r.measured = 3.0 * std::pow(eps, 0.7);
    r.bound = r.measured * 2.0;
    reports.push_back(r);
  }
  auto fit = scaling_fit(reports);
  CHECK(fit.fitted_exponent == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.fitted_prefactor == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flat measurements fit to slope zero") {
  std::vector<BoundReport> reports;
  for (double eps : {0.01, 0.05, 0.2, 1.0}) {
    BoundReport r;
    r.params.epsilon = eps;
    r.measured = 2.0;
    reports.push_back(r);
  }
  auto fit = scaling_fit(reports);
  CHECK(fit.fitted_exponent == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit preconditions") {
  auto make = [](std::vector<double> eps) {
    std::vector<BoundReport> rs;
    for (double e : eps) {
      BoundReport r;
      r.params.epsilon = e;
      r.measured = e;
      rs.push_back(r);
    }
    return rs;
  };
  CHECK_THROWS_AS(scaling_fit(make({0.1, 0.2, 0.4})), std::invalid_argument);        // too few
  CHECK_THROWS_AS(scaling_fit(make({0.1, 0.2, 0.2, 0.4})), std::invalid_argument);   // not increasing
  CHECK_THROWS_AS(scaling_fit(make({0.1, 0.2, 0.4, 0.8})), std::invalid_argument);   // < decade
  CHECK_NOTHROW(scaling_fit(make({0.1, 0.2, 0.4, 1.0})));

  auto rs = make({0.1, 0.2, 0.4, 1.0});
  rs[1].empty_subspace = true;
  CHECK_THROWS_AS(scaling_fit(rs), std::invalid_argument);  // rank-0 points carry no signal
}
