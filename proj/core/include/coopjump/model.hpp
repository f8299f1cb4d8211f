#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace coopjump {

using Complex = std::complex<double>;

// Driving/decay layout of the three-level atom.  Level labels are fixed:
// |1> ground, |2> metastable shelf, |3> excited.  Transition index j:
//   j=1: 1<->2,  j=2: 2<->3,  j=3: 1<->3.
// V: strong laser + decay on 1<->3, weak laser on 1<->2, shelf is stable.
// D: strong laser + decay on 1<->3, weak decays 3->2 (A2) and 2->1 (A1).
enum class LevelScheme { V, D };

std::string to_string(LevelScheme s);
LevelScheme scheme_from_string(const std::string& name);

// Full parameter set of the n-atom system, all rates in s^-1.
// C_j is the common dipole-dipole coupling on transition j (equal for every
// atom pair; the equilateral-triangle idealization).
struct SystemParams {
  LevelScheme scheme = LevelScheme::V;
  int n_atoms = 3;
  double a1 = 0.0;      // Einstein coefficient, 2->1
  double a2 = 0.0;      // Einstein coefficient, 3->2
  double a3 = 0.0;      // Einstein coefficient, 3->1
  double omega2 = 0.0;  // weak-laser Rabi frequency (V scheme, 1<->2)
  double omega3 = 0.0;  // strong-laser Rabi frequency (1<->3)
  Complex c1{0.0, 0.0};
  Complex c2{0.0, 0.0};
  Complex c3{0.0, 0.0};

  // Scale-separation floor: strong rates must exceed weak ones by this factor
  // before validation passes without complaint; between warn_ratio and
  // min_ratio a warning is recorded, below warn_ratio validation throws.
  double min_scale_ratio = 100.0;
  double warn_scale_ratio = 10.0;
};

// Equilateral-triangle geometry.  r is the pair distance in units of
// lambda3; the weak transitions only acquire a coupling constant when their
// wavelength ratio (lambda_j / lambda3) is supplied as a positive number.
// theta[k] is the angle between the (common) dipole direction and the axis
// of pair k in the order (1,2), (2,3), (3,1).  With equal_coupling set the
// three angles must agree, giving identical C_j for every pair - the
// idealization under which the permutation-symmetric solver applies.
struct Geometry {
  double r_over_lambda3 = 1.0;
  std::array<double, 3> theta{{1.5707963267948966, 1.5707963267948966,
                               1.5707963267948966}};
  double lambda1_over_lambda3 = 0.0;  // 0 disables C1
  double lambda2_over_lambda3 = 0.0;  // 0 disables C2
  bool equal_coupling = true;
};

struct ValidationReport {
  std::vector<std::string> warnings;
};

// Dipole-dipole coupling constant for one transition:
//   C(A, a, theta) = (3A/2) e^{ia} [ (1-cos^2 t)/(ia) + (1/a^2 - 1/(ia^3))(1-3cos^2 t) ]
// with a = 2 pi r / lambda.  Re C renormalizes the collective decay rates,
// Im C shifts levels.  a = 0 is the divergent near-field limit
// (UnphysicalConfigError); a < 0 or A < 0 are ParameterErrors.
Complex coupling_constant(double einstein_a, double a, double theta);

// Fill the C_j of `base` from triangle geometry; C3 always, C1/C2 only when
// the corresponding wavelength ratio is positive.  Scheme invariants are
// enforced afterwards (validate_params is called on the result).
SystemParams params_from_geometry(SystemParams base, const Geometry& geom,
                                  ValidationReport* report = nullptr);

// Enforce scheme invariants and physicality:
//  - V: a1 = a2 = 0, c1 = c2 = 0; D: omega2 = 0
//  - every rate nonnegative, n_atoms in {1,2,3}
//  - collective channel rates nonnegative for each active transition
//    (n=3: A+2ReC >= 0 and A-ReC >= 0; n=2: A+-ReC >= 0)
//  - scale separation between strong (a3, omega3) and weak (omega2 / a1,a2)
//    parameters: ratio below warn_scale_ratio throws, below min_scale_ratio
//    records a warning.
// Returns a report carrying any warnings.
ValidationReport validate_params(const SystemParams& p);

}  // namespace coopjump
