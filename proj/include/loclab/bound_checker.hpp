#pragma once

#include <cstdint>

#include "loclab/spectral.hpp"
#include "loclab/types.hpp"

namespace loclab {

// 2 alpha sqrt(b) a^{(1-alpha)/(2 alpha)} eps^{1 - 1/(2 alpha)}
double lattice_velocity_bound(const BoundParameters& p);

struct ProjectedNorm {
  double value = 0.0;
  int rank = 0;  // rank 0 means empty low-energy subspace
};

// ||P_eps v P_eps|| as the exact supremum over the projector range
ProjectedNorm projected_velocity_norm(const EigenSystem& es, const OperatorMatrix& v, double epsilon);

// restricted-subspace moments of (nabla^dag nabla)^{alpha-n} vs (eps/a)^{1-n/alpha}.
// measured = exact supremum on the range; sampled max from `trials` Haar states
// is returned through sampled_max.
BoundReport jensen_moment_check(const EigenSystem& es, const OperatorMatrix& nabla,
                                const BoundParameters& p, int n, int trials,
                                std::uint64_t seed, double* sampled_max = nullptr);

struct Instance {
  SiteField f;
  PotentialSpec V;
};

// f_n uniform on [a_lo, b_hi], v_n uniform on [0, v_max]; certificates are the
// realized min/max of f (the tightest valid envelope)
Instance random_instance(int L, double a_lo, double b_hi, double v_max, std::uint64_t seed);

// build H and v for the instance, measure ||P v P|| against the analytic bound
BoundReport check_velocity_bound(const LatticeSpec& spec, const SiteField& f,
                                 const PotentialSpec& V, double epsilon,
                                 std::uint64_t seed = 0);

// least squares in log-log coordinates; needs >= 4 epsilons spanning a decade
ScalingFit scaling_fit(const std::vector<BoundReport>& reports);
ScalingFit fit_log_log(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace loclab
