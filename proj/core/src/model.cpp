#include "coopjump/model.hpp"

#include <cmath>
#include <sstream>

#include "coopjump/errors.hpp"

namespace coopjump {

std::string to_string(LevelScheme s) { return s == LevelScheme::V ? "V" : "D"; }

LevelScheme scheme_from_string(const std::string& name) {
  if (name == "V" || name == "v") return LevelScheme::V;
  if (name == "D" || name == "d") return LevelScheme::D;
  throw ParameterError("unknown level scheme '" + name + "' (expected V or D)");
}

Complex coupling_constant(double einstein_a, double a, double theta) {
  if (a < 0.0 || !std::isfinite(a))
    throw ParameterError("coupling_constant: a must be finite and nonnegative");
  if (a == 0.0)
    throw UnphysicalConfigError(
        "coupling_constant: a = 0 (zero separation) is the divergent near-field limit");
  if (einstein_a < 0.0) throw ParameterError("coupling_constant: Einstein coefficient must be nonnegative");
  const double c2 = std::cos(theta) * std::cos(theta);
  const Complex i(0.0, 1.0);
  const Complex bracket = (1.0 - c2) / (i * a) + (1.0 / (a * a) - 1.0 / (i * a * a * a)) * (1.0 - 3.0 * c2);
  return 1.5 * einstein_a * std::exp(i * a) * bracket;
}

namespace {

void check_collective_rates(const SystemParams& p, int j, double a, Complex c) {
  if (a == 0.0 && c == Complex(0.0, 0.0)) return;
  const double re = c.real();
  auto fail = [&](double rate, const char* which) {
    std::ostringstream os;
    os << "transition " << j << ": collective rate " << which << " = " << rate
       << " s^-1 is negative (A=" << a << ", Re C=" << re << ")";
    throw UnphysicalConfigError(os.str());
  };
  if (p.n_atoms == 3) {
    if (a + 2.0 * re < 0.0) fail(a + 2.0 * re, "A+2ReC");
    if (a - re < 0.0) fail(a - re, "A-ReC");
  } else if (p.n_atoms == 2) {
    if (a + re < 0.0) fail(a + re, "A+ReC");
    if (a - re < 0.0) fail(a - re, "A-ReC");
  } else if (a < 0.0) {
    fail(a, "A");
  }
}

// Scale separation between the strong transition and the weak processes that
// drive the intensity-period statistics.
void check_scale_separation(const SystemParams& p, ValidationReport& report) {
  double weak = 0.0;
  const char* weak_name = "";
  if (p.scheme == LevelScheme::V) {
    weak = p.omega2;
    weak_name = "Omega2";
  } else {
    weak = std::max(p.a1, p.a2);
    weak_name = "max(A1,A2)";
  }
  if (weak <= 0.0) return;  // nothing weak is driven; no hierarchy to check
  const double strong = std::min(p.a3 > 0.0 ? p.a3 : p.omega3, p.omega3 > 0.0 ? p.omega3 : p.a3);
  if (strong <= 0.0) return;
  const double ratio = strong / weak;
  if (ratio < p.warn_scale_ratio) {
    std::ostringstream os;
    os << "scale separation violated: min(A3,Omega3)/" << weak_name << " = " << ratio
       << " is below the hard floor " << p.warn_scale_ratio;
    throw UnphysicalConfigError(os.str());
  }
  if (ratio < p.min_scale_ratio) {
    std::ostringstream os;
    os << "weak scale separation: min(A3,Omega3)/" << weak_name << " = " << ratio
       << " (below " << p.min_scale_ratio << "); perturbative rate formulas degrade";
    report.warnings.push_back(os.str());
  }
}

}  // namespace

ValidationReport validate_params(const SystemParams& p) {
  ValidationReport report;
  if (p.n_atoms < 1 || p.n_atoms > 3)
    throw ParameterError("n_atoms must be 1, 2 or 3");
  for (double rate : {p.a1, p.a2, p.a3, p.omega2, p.omega3})
    if (rate < 0.0 || !std::isfinite(rate))
      throw ParameterError("rates and Rabi frequencies must be finite and nonnegative");
  if (p.scheme == LevelScheme::V) {
    if (p.a1 != 0.0 || p.a2 != 0.0)
      throw ParameterError("V scheme requires A1 = A2 = 0 (stable shelf)");
    if (p.c1 != Complex(0, 0) || p.c2 != Complex(0, 0))
      throw ParameterError("V scheme requires C1 = C2 = 0");
  } else {
    if (p.omega2 != 0.0)
      throw ParameterError("D scheme has no weak laser: Omega2 must be 0");
  }
  check_collective_rates(p, 1, p.a1, p.c1);
  check_collective_rates(p, 2, p.a2, p.c2);
  check_collective_rates(p, 3, p.a3, p.c3);
  check_scale_separation(p, report);
  return report;
}

SystemParams params_from_geometry(SystemParams base, const Geometry& geom, ValidationReport* report) {
  if (!(geom.r_over_lambda3 > 0.0))
    throw ParameterError("geometry: r_over_lambda3 must be positive");
  if (!geom.equal_coupling)
    throw ParameterError(
        "geometry: only the equal-coupling idealization is implemented; "
        "unequal pair couplings break the permutation symmetry the solver relies on");
  if (geom.theta[0] != geom.theta[1] || geom.theta[1] != geom.theta[2])
    throw ParameterError(
        "geometry: equal_coupling requires one common dipole angle for all pairs");
  const double theta = geom.theta[0];
  const double a3 = 2.0 * M_PI * geom.r_over_lambda3;
  base.c3 = coupling_constant(base.a3, a3, theta);
  base.c1 = Complex(0, 0);
  base.c2 = Complex(0, 0);
  if (geom.lambda1_over_lambda3 > 0.0 && base.a1 > 0.0)
    base.c1 = coupling_constant(base.a1, a3 / geom.lambda1_over_lambda3, theta);
  if (geom.lambda2_over_lambda3 > 0.0 && base.a2 > 0.0)
    base.c2 = coupling_constant(base.a2, a3 / geom.lambda2_over_lambda3, theta);
  ValidationReport r = validate_params(base);
  if (report) *report = std::move(r);
  return base;
}

}  // namespace coopjump
