#pragma once

#include "loclab/spectral.hpp"
#include "loclab/types.hpp"

namespace loclab {

// center-row decay of e^{-beta H} with a least-squares xi fit over the window
// magnitude in [1e-13, 1e-1], excluding the 10% of sites nearest each edge.
// Throws InsufficientDecay when fewer than 5 points qualify.
KernelProfile kernel_profile(const EigenSystem& es, double beta, int alpha);

// indices into profile.distances/magnitudes that entered the xi fit
std::vector<int> profile_fit_indices(const KernelProfile& profile);

// exp((4^alpha sinh^{2 alpha}(mu/2) beta - mu d) / 2); minimize over mu externally
double walk_bound_rhs(double mu, int alpha, double beta, int distance);

// 32 geometric mu values on [1/(4 xi_est), 4/xi_est]
std::vector<double> mu_grid(double xi_est);

// every fit-window magnitude against min_mu walk_bound_rhs; margin is the worst case
BoundReport domination_check(const KernelProfile& profile, int alpha, double beta);

struct FWeightReport {
  BoundReport report;           // measured = worst normalized excess of g' over rate*g + slack
  double rate = 0.0;            // 4^alpha sinh^{2 alpha}(mu/2)
  double max_richardson_delta = 0.0;  // half-step derivative cross-check, units of g
};

// g(beta) = <phi| e^{-beta H} F e^{-beta H} |phi> with F = diag(e^{mu n});
// centered differences on a uniform beta grid, slack = 1e-6 g + h^2 max|g'''|
FWeightReport f_weight_inequality_check(const EigenSystem& es, double mu,
                                        const std::vector<double>& beta_grid,
                                        const Vector& state, int alpha);

struct XiScaling {
  ScalingFit fit;                     // log xi vs log beta
  double c_emp = 0.0;                 // max over grid of xi / sqrt(beta)
  bool degenerate_no_decay = false;   // kernel too compact everywhere to fit
  std::vector<KernelProfile> profiles;
};

// generic d-local PSD Hamiltonian: extract xi(beta) over the grid and fit the
// growth exponent; asserts exponent <= 0.5 + 0.1, reports the empirical c
XiScaling generic_local_xi_check(const OperatorMatrix& H, int range_d,
                                 const std::vector<double>& beta_grid);

}  // namespace loclab
