#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loclab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class Boundary { periodic, open_chain };

// chain geometry plus the kinetic exponent alpha; z = 2*alpha is report-only
struct LatticeSpec {
  int length = 2;
  Boundary boundary = Boundary::periodic;
  int alpha = 1;

  int z() const { return 2 * alpha; }
  void validate() const {
    if (length < 2) throw std::invalid_argument("LatticeSpec: need length >= 2");
    if (alpha < 1) throw std::invalid_argument("LatticeSpec: need alpha >= 1");
  }
};

// site-diagonal field f with certified envelope 0 < lower <= f_n <= upper
struct SiteField {
  RealVector values;
  double lower = 1.0;
  double upper = 1.0;

  static SiteField constant(int L, double c) {
    SiteField f;
    f.values = RealVector::Constant(L, c);
    f.lower = c;
    f.upper = c;
    return f;
  }
  void validate(int L) const {
    if (values.size() != L) throw std::invalid_argument("SiteField: length mismatch");
    if (!(lower > 0.0)) throw std::invalid_argument("SiteField: lower certificate must be > 0");
    if (upper < lower) throw std::invalid_argument("SiteField: upper < lower");
    for (int n = 0; n < L; ++n)
      if (values[n] < lower || values[n] > upper)
        throw std::invalid_argument("SiteField: value outside [lower, upper] at site " + std::to_string(n));
  }
};

// diagonal potential, positive semidefinite
struct PotentialSpec {
  RealVector diagonal;

  static PotentialSpec zero(int L) {
    PotentialSpec v;
    v.diagonal = RealVector::Zero(L);
    return v;
  }
  void validate(int L) const {
    if (diagonal.size() != L) throw std::invalid_argument("PotentialSpec: length mismatch");
    for (int n = 0; n < L; ++n)
      if (diagonal[n] < 0.0)
        throw std::invalid_argument("PotentialSpec: negative entry at site " + std::to_string(n));
  }
};

struct OperatorMatrix {
  Matrix m;
  bool hermitian = false;

  int dim() const { return static_cast<int>(m.rows()); }
};

struct BoundParameters {
  int alpha = 1;
  double a = 1.0;
  double b = 1.0;
  double epsilon = 0.0;

  void validate() const {
    if (alpha < 1) throw std::invalid_argument("BoundParameters: alpha >= 1 required");
    if (!(a > 0.0)) throw std::invalid_argument("BoundParameters: a > 0 required");
    if (b < a) throw std::invalid_argument("BoundParameters: b >= a required");
    if (epsilon < 0.0) throw std::invalid_argument("BoundParameters: epsilon >= 0 required");
  }
};

// one measured-vs-analytic comparison; margin = bound - measured
struct BoundReport {
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  BoundParameters params;
  long long instance_seed = 0;
  std::vector<double> time_grid;  // empty when the check is time-independent
  bool empty_subspace = false;

  bool violation_free() const { return margin >= -1e-9 * bound; }
};

struct ScalingFit {
  std::vector<double> epsilons;
  std::vector<double> measured;
  double fitted_exponent = 0.0;
  double fitted_prefactor = 0.0;
  double r_squared = 0.0;
};

struct EnergyBudget {
  double total = 0.0;
  double per_particle = 0.0;

  static EnergyBudget of(double total, int N) {
    if (N < 1) throw std::invalid_argument("EnergyBudget: N >= 1 required");
    if (total < 0.0) throw std::invalid_argument("EnergyBudget: total >= 0 required");
    return EnergyBudget{total, total / N};
  }
};

// right-half center-row decay data of e^{-beta H} plus the fitted xi
struct KernelProfile {
  double beta = 0.0;
  int center_row = 0;
  std::vector<int> distances;     // 0 .. L-1-center
  std::vector<double> magnitudes; // |<center| e^{-beta H} |center+d>|
  double xi = 0.0;
  std::pair<int, int> fit_window{0, 0};  // first/last distance used in the fit
  int fit_points = 0;
  double fit_r_squared = 0.0;
};

struct WeightOperatorSpec {
  double mu = 1.0;

  void validate(int L) const {
    if (!(mu > 0.0)) throw std::invalid_argument("WeightOperatorSpec: mu > 0 required");
    if (mu * L > 600.0)
      throw std::invalid_argument("WeightOperatorSpec: mu*L > 600 would overflow the e^{mu n} weights");
  }
};

// kernel too compact for a decay fit (short window / tiny beta)
struct InsufficientDecay : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace loclab
