#include "loclab/thermal_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "loclab/bound_checker.hpp"

namespace loclab {

namespace {
constexpr double kFloor = 1e-13;  // below this, roundoff masquerades as signal
constexpr double kCap = 1e-1;     // above this, the non-asymptotic core
}  // namespace

std::vector<int> profile_fit_indices(const KernelProfile& profile) {
  std::vector<int> idx;
  for (size_t k = 0; k < profile.distances.size(); ++k) {
    const int d = profile.distances[k];
    if (d < profile.fit_window.first || d > profile.fit_window.second) continue;
    const double mag = profile.magnitudes[k];
    if (mag >= kFloor && mag <= kCap) idx.push_back(static_cast<int>(k));
  }
  return idx;
}

KernelProfile kernel_profile(const EigenSystem& es, double beta, int alpha) {
  if (!(beta > 0.0)) throw std::invalid_argument("kernel_profile: beta > 0 required");
  if (alpha < 1) throw std::invalid_argument("kernel_profile: alpha >= 1 required");
  const int L = es.dim;
  const int center = L / 2;

  KernelProfile profile;
  profile.beta = beta;
  profile.center_row = center;

  const RealVector mags = thermal_row_magnitudes(es, beta, center);
  const int hi_site = static_cast<int>(std::floor(0.9 * (L - 1)));  // 10% edge exclusion
  for (int m = center; m < L; ++m) {
    profile.distances.push_back(m - center);
    profile.magnitudes.push_back(mags[m]);
  }

  std::vector<double> ds, logs;
  int d_first = -1, d_last = -1;
  for (int m = center; m <= hi_site; ++m) {
    const double mag = mags[m];
    if (mag < kFloor || mag > kCap) continue;
    const int d = m - center;
    if (d_first < 0) d_first = d;
    d_last = d;
    ds.push_back(d);
    logs.push_back(std::log(mag));
  }
  if (static_cast<int>(ds.size()) < 5)
    throw InsufficientDecay("kernel_profile: fewer than 5 fit points in the decay window; "
                            "increase L or reduce beta");

  // unweighted least squares of log|mag| on distance
  const int n = static_cast<int>(ds.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += ds[i]; sy += logs[i]; sxx += ds[i] * ds[i]; sxy += ds[i] * logs[i];
  }
  const double det = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  if (!(slope < 0.0))
    throw InsufficientDecay("kernel_profile: magnitudes do not decay over the fit window");
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = slope * ds[i] + intercept;
    ss_res += (logs[i] - pred) * (logs[i] - pred);
    ss_tot += (logs[i] - mean_y) * (logs[i] - mean_y);
  }

  profile.xi = -1.0 / slope;
  profile.fit_window = {d_first, d_last};
  profile.fit_points = n;
  profile.fit_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return profile;
}

double walk_bound_rhs(double mu, int alpha, double beta, int distance) {
  if (!(mu > 0.0)) throw std::invalid_argument("walk_bound_rhs: mu > 0 required");
  const double rate = std::pow(4.0, alpha) * std::pow(std::sinh(0.5 * mu), 2.0 * alpha);
  return std::exp(0.5 * (rate * beta - mu * distance));
}

std::vector<double> mu_grid(double xi_est) {
  if (!(xi_est > 0.0)) throw std::invalid_argument("mu_grid: xi_est > 0 required");
  const double lo = 1.0 / (4.0 * xi_est), hi = 4.0 / xi_est;
  std::vector<double> grid(32);
  for (int k = 0; k < 32; ++k) grid[k] = lo * std::pow(hi / lo, k / 31.0);
  return grid;
}

BoundReport domination_check(const KernelProfile& profile, int alpha, double beta) {
  const auto grid = mu_grid(profile.xi);
  double worst_ratio = 0.0;
  for (int k : profile_fit_indices(profile)) {
    const int d = profile.distances[k];
    double best = walk_bound_rhs(grid[0], alpha, beta, d);
    for (double mu : grid) best = std::min(best, walk_bound_rhs(mu, alpha, beta, d));
    worst_ratio = std::max(worst_ratio, profile.magnitudes[k] / best);
  }
  BoundReport rep;
  rep.params = BoundParameters{alpha, 1.0, 1.0, beta};
  rep.measured = worst_ratio;  // max over window of |kernel| / min_mu rhs
  rep.bound = 1.0;
  rep.margin = rep.bound - rep.measured;
  return rep;
}

FWeightReport f_weight_inequality_check(const EigenSystem& es, double mu,
                                        const std::vector<double>& beta_grid,
                                        const Vector& state, int alpha) {
  WeightOperatorSpec{mu}.validate(es.dim);
  if (alpha < 1) throw std::invalid_argument("f_weight_inequality_check: alpha >= 1 required");
  if (state.size() != es.dim) throw std::invalid_argument("f_weight_inequality_check: state dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("f_weight_inequality_check: state must be normalized");
  const int npts = static_cast<int>(beta_grid.size());
  if (npts < 5) throw std::invalid_argument("f_weight_inequality_check: need >= 5 grid points");
  const double h = beta_grid[1] - beta_grid[0];
  if (!(h > 0.0)) throw std::invalid_argument("f_weight_inequality_check: grid must ascend");
  for (int i = 1; i < npts; ++i)
    if (std::abs(beta_grid[i] - beta_grid[i - 1] - h) > 1e-9 * h)
      throw std::invalid_argument("f_weight_inequality_check: grid must be uniform");
  if (beta_grid.front() - 2.0 * h < -1e-12)
    throw std::invalid_argument("f_weight_inequality_check: grid too close to beta = 0 for centered stencils");

  const int L = es.dim;
  RealVector weights(L);
  for (int n = 0; n < L; ++n) weights[n] = std::exp(mu * n);
  const Vector c = es.modes.adjoint() * state;

  const auto g_of = [&](double beta) {
    Vector amp(L);
    for (int j = 0; j < L; ++j) amp[j] = std::exp(-beta * es.energies[j]) * c[j];
    const Vector psi = es.modes * amp;
    double g = 0.0;
    for (int n = 0; n < L; ++n) g += weights[n] * std::norm(psi[n]);
    return g;
  };

  // extended grid: two spare points each side for the five-point third difference
  std::vector<double> g(npts + 4);
  for (int i = -2; i < npts + 2; ++i) g[i + 2] = g_of(std::max(0.0, beta_grid.front() + i * h));

  double g3max = 0.0;
  for (int i = 0; i < npts; ++i) {
    const int k = i + 2;
    const double g3 = (g[k + 2] - 2.0 * g[k + 1] + 2.0 * g[k - 1] - g[k - 2]) / (2.0 * h * h * h);
    g3max = std::max(g3max, std::abs(g3));
  }

  const double rate = std::pow(4.0, alpha) * std::pow(std::sinh(0.5 * mu), 2.0 * alpha);
  double worst = -std::numeric_limits<double>::infinity();
  double rich_delta = 0.0;
  for (int i = 0; i < npts; ++i) {
    const int k = i + 2;
    const double gi = g[k];
    const double gp = (g[k + 1] - g[k - 1]) / (2.0 * h);
    const double slack = 1e-6 * gi + h * h * g3max;
    worst = std::max(worst, (gp - rate * gi - slack) / gi);

    const double gph = (g_of(beta_grid[i] + 0.5 * h) - g_of(beta_grid[i] - 0.5 * h)) / h;
    rich_delta = std::max(rich_delta, std::abs((4.0 * gph - gp) / 3.0 - gp) / gi);
  }

  FWeightReport out;
  out.rate = rate;
  out.max_richardson_delta = rich_delta;
  out.report.params = BoundParameters{alpha, 1.0, 1.0, mu};
  out.report.measured = worst;  // normalized excess of g' over rate*g + slack
  out.report.bound = 0.0;
  out.report.margin = -worst;
  out.report.time_grid = beta_grid;
  return out;
}

XiScaling generic_local_xi_check(const OperatorMatrix& H, int range_d,
                                 const std::vector<double>& beta_grid) {
  if (range_d < 0) throw std::invalid_argument("generic_local_xi_check: range_d >= 0 required");
  if (beta_grid.empty()) throw std::invalid_argument("generic_local_xi_check: empty beta grid");
  const int L = H.dim();
  const double scale = H.m.cwiseAbs().maxCoeff();
  for (int n = 0; n < L; ++n)
    for (int m = 0; m < L; ++m)
      if (std::abs(n - m) > range_d && std::abs(H.m(n, m)) > 1e-14 * scale)
        throw std::invalid_argument("generic_local_xi_check: matrix element outside the stated range");

  EigenSystem es = eigendecompose(H);
  if (es.energies[0] < -1e-10)
    throw std::invalid_argument("generic_local_xi_check: Hamiltonian is not positive semidefinite");

  XiScaling out;
  std::vector<double> betas, xis;
  for (double beta : beta_grid) {
    try {
      KernelProfile p = kernel_profile(es, beta, std::max(1, range_d));
      betas.push_back(beta);
      xis.push_back(p.xi);
      out.profiles.push_back(std::move(p));
    } catch (const InsufficientDecay&) {
      // compact kernel at this beta; skip the point
    }
  }

  if (betas.size() < 3) {
    out.degenerate_no_decay = true;  // nothing decays slowly enough to need a bound
    return out;
  }

  out.fit = fit_log_log(betas, xis);
  for (size_t i = 0; i < betas.size(); ++i)
    out.c_emp = std::max(out.c_emp, xis[i] / std::sqrt(betas[i]));
  if (out.fit.fitted_exponent > 0.6)
    throw std::logic_error("generic_local_xi_check: xi grows faster than sqrt(beta) allows");
  return out;
}

}  // namespace loclab
