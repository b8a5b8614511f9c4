#include "loclab/bound_checker.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "loclab/core_operators.hpp"
#include "loclab/rng.hpp"

namespace loclab {

double lattice_velocity_bound(const BoundParameters& p) {
  p.validate();
  const double al = p.alpha;
  return 2.0 * al * std::sqrt(p.b) * std::pow(p.a, (1.0 - al) / (2.0 * al)) *
         std::pow(p.epsilon, 1.0 - 1.0 / (2.0 * al));
}

ProjectedNorm projected_velocity_norm(const EigenSystem& es, const OperatorMatrix& v, double epsilon) {
  if (!v.hermitian) throw std::invalid_argument("projected_velocity_norm: v must be Hermitian");
  LowEnergyProjector P = low_energy_projector(es, epsilon);
  if (P.rank == 0) return ProjectedNorm{0.0, 0};
  const Matrix A = P.basis.adjoint() * v.m * P.basis;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
  const RealVector ev = solver.eigenvalues();
  const double norm = std::max(std::abs(ev[0]), std::abs(ev[P.rank - 1]));
  return ProjectedNorm{norm, P.rank};
}

BoundReport jensen_moment_check(const EigenSystem& es, const OperatorMatrix& nabla,
                                const BoundParameters& p, int n, int trials,
                                std::uint64_t seed, double* sampled_max) {
  p.validate();
  if (n < 0 || n > p.alpha) throw std::invalid_argument("jensen_moment_check: need 0 <= n <= alpha");

  BoundReport rep;
  rep.params = p;
  rep.instance_seed = static_cast<long long>(seed);
  rep.bound = std::pow(p.epsilon / p.a, 1.0 - static_cast<double>(n) / p.alpha);

  LowEnergyProjector P = low_energy_projector(es, p.epsilon);
  if (P.rank == 0) {
    rep.empty_subspace = true;
    rep.measured = 0.0;
    rep.margin = rep.bound;
    if (sampled_max) *sampled_max = 0.0;
    return rep;
  }

  const Matrix K = nabla.m.adjoint() * nabla.m;
  const Matrix Kp = matrix_power_int(K, p.alpha - n);
  const Matrix A = P.basis.adjoint() * Kp * P.basis;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
  rep.measured = solver.eigenvalues()[P.rank - 1];  // K^p is PSD, top eigenvalue is the supremum
  rep.margin = rep.bound - rep.measured;

  if (sampled_max) {
    Rng rng(seed);
    double best = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
      Vector phi = rng.haar_state_in(P.basis);
      best = std::max(best, (phi.adjoint() * Kp * phi).real()(0, 0));
    }
    *sampled_max = best;
  }
  return rep;
}

Instance random_instance(int L, double a_lo, double b_hi, double v_max, std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("random_instance: need L >= 2");
  if (!(a_lo > 0.0) || b_hi < a_lo || v_max < 0.0)
    throw std::invalid_argument("random_instance: need 0 < a_lo <= b_hi and v_max >= 0");

  Rng rng(seed);
  Instance inst;
  inst.f.values.resize(L);
  for (int n = 0; n < L; ++n) inst.f.values[n] = rng.uniform(a_lo, b_hi);
  inst.f.lower = inst.f.values.minCoeff();  // certified = realized envelope
  inst.f.upper = inst.f.values.maxCoeff();
  inst.V.diagonal.resize(L);
  for (int n = 0; n < L; ++n) inst.V.diagonal[n] = v_max > 0.0 ? rng.uniform(0.0, v_max) : 0.0;
  return inst;
}

BoundReport check_velocity_bound(const LatticeSpec& spec, const SiteField& f,
                                 const PotentialSpec& V, double epsilon, std::uint64_t seed) {
  OperatorMatrix H = build_hamiltonian(spec, f, V);
  EigenSystem es = eigendecompose(H);
  OperatorMatrix v = velocity_operator(spec, f);

  BoundReport rep;
  rep.params = BoundParameters{spec.alpha, f.lower, f.upper, epsilon};
  rep.instance_seed = static_cast<long long>(seed);
  ProjectedNorm pn = projected_velocity_norm(es, v, epsilon);
  rep.measured = pn.value;
  rep.empty_subspace = (pn.rank == 0);
  rep.bound = lattice_velocity_bound(rep.params);
  rep.margin = rep.bound - rep.measured;
  return rep;
}

ScalingFit fit_log_log(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_log_log: need >= 2 matched points");
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("fit_log_log: points must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14) throw std::invalid_argument("fit_log_log: degenerate abscissa");
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = slope * lx[i] + intercept;
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - mean_y) * (ly[i] - mean_y);
  }
  ScalingFit fit;
  fit.epsilons = xs;
  fit.measured = ys;
  fit.fitted_exponent = slope;
  fit.fitted_prefactor = std::exp(intercept);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

ScalingFit scaling_fit(const std::vector<BoundReport>& reports) {
  std::vector<double> eps, meas;
  for (const auto& r : reports) {
    if (r.empty_subspace) throw std::invalid_argument("scaling_fit: rank-0 report in grid");
    eps.push_back(r.params.epsilon);
    meas.push_back(r.measured);
  }
  if (eps.size() < 4) throw std::invalid_argument("scaling_fit: need >= 4 grid points");
  for (size_t i = 1; i < eps.size(); ++i)
    if (eps[i] <= eps[i - 1]) throw std::invalid_argument("scaling_fit: epsilons must be strictly increasing");
  if (eps.back() < 10.0 * eps.front())
    throw std::invalid_argument("scaling_fit: grid must span at least one decade");

  // constant data short-circuits: log-log slope of a flat line is 0
  bool flat = true;
  for (double m : meas)
    if (std::abs(m - meas.front()) > 1e-15 * std::abs(meas.front())) { flat = false; break; }
  if (flat) {
    ScalingFit fit;
    fit.epsilons = eps;
    fit.measured = meas;
    fit.fitted_exponent = 0.0;
    fit.fitted_prefactor = meas.front();
    fit.r_squared = 1.0;
    return fit;
  }
  return fit_log_log(eps, meas);
}

}  // namespace loclab
