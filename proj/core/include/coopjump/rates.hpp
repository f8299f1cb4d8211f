#pragma once

#include <memory>
#include <vector>

#include "coopjump/model.hpp"
#include "coopjump/operators.hpp"
#include "coopjump/symmetry.hpp"

namespace coopjump {

// Null state of the strong-transition Liouvillian supported on one
// intensity level: the state the system relaxes to within a period.
struct QuasisteadyState {
  int level = 0;
  Matrix rho;       // 27x27 Hermitian, trace 1, supported on R_ii
  double residual = 0.0;  // |L0 vec(rho)|_2 / (|L0|_F |vec(rho)|_2)
};

// Left null matrix of the strong Liouvillian, biorthonormal to the
// quasisteady states: Tr(dual_j^dagger rho_ss_i) = delta_ij.
struct DualState {
  int level = 0;
  Matrix rho;
};

// Transition rates between intensity levels plus derived period and
// multi-jump statistics.
struct RateSet {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();  // p(i,j): rate of I_i -> I_j
  Eigen::Vector4d n = Eigen::Vector4d::Zero();  // periods of I_i per unit time
  Eigen::Vector4d T = Eigen::Vector4d::Zero();  // mean period durations
  int n_levels = 4;  // chain length (n_atoms + 1); unused entries stay 0
  double n_dj = 0.0;
  double n_tj = 0.0;
  double t_m = 0.0;
  // norm of the fast-relaxing correction dropped by the D-scheme rate
  // formula; identically 0 for the V scheme path.
  double resolvent_norm = 0.0;
};

enum class SolvePath { reduced, full };

// The solver entry points below (quasisteady_state, dual_states,
// transition_rates, RatePipeline) validate their parameter set first and
// propagate ParameterError / UnphysicalConfigError from validate_params.

// Quasisteady state of intensity level i.  The reduced path solves in the
// symmetric isotypic sector of R_ii; the full path finds the null space of
// the product-basis block and symmetrizes it (levels 1 and 2 conserve the
// shelf pattern, so their unsymmetrized null spaces are three-dimensional).
QuasisteadyState quasisteady_state(const SystemParams& p, int level,
                                   SolvePath path = SolvePath::reduced);

// All four dual states.  In this model each intensity level evolves
// trace-preservingly under the strong dynamics, so the duals coincide with
// the level projectors; they are computed from the left null spaces and
// biorthonormalized via the 4x4 Gram system rather than assumed.
std::vector<DualState> dual_states(const SystemParams& p, SolvePath path = SolvePath::reduced);

// Transition-rate matrix.  V scheme: second-order perturbation theory in
// the weak laser; solves the quasistationary coherence correction
//   L0 rho1 = -L1 rho_ss_i
// on the adjacent coherence blocks (the integral of exp(L0 t) L1 rho_ss over
// t >= 0) and evaluates p_ij = d/dt Tr(P_j rho) at rho = rho_ss_i + rho1.
// D scheme: first order in the weak decays, p_ij = Tr(dual_j^dag L1 rho_ss_i).
RateSet transition_rates(const SystemParams& p, SolvePath path = SolvePath::reduced);

// Closed-form V rates: p01 and p10 exact in C3, the others to first order
// in Re C3.
RateSet closed_form_V(const SystemParams& p);

// Closed-form D rates, exact in C3.
RateSet closed_form_D(const SystemParams& p);

RateSet closed_form(const SystemParams& p);

// Fills n and T from the rate matrix: T_i = 1 / (total exit rate of I_i),
// n_i from the chain balance relations plus normalization sum_i n_i T_i = 1.
void period_statistics(RateSet& rs);

// Double jumps: two successive same-direction level changes closer than
// the resolution window t_m.  Leading order in t_m (corrected elimination
// of n_1 from the window-expanded component sum):
//   n_DJ = 2 p01 p12 p21 p32 (p10 + p23) t_m / D,
//   D = p21 p32 (p01 + p10) + p01 p12 (p23 + p32).
double double_jump_rate(const RateSet& rs, double t_m);

// The four un-expanded components (exact exponential window factors).
struct DoubleJumpComponents {
  double dj02 = 0.0, dj20 = 0.0, dj13 = 0.0, dj31 = 0.0;
  double total() const { return dj02 + dj20 + dj13 + dj31; }
};
DoubleJumpComponents double_jump_components(const RateSet& rs, double t_m);

// Triple jumps (each of the two intermediate periods shorter than t_m):
//   n_TJ = 2 p01 p10 p12 p21 p23 p32 t_m^2 / D.
double triple_jump_rate(const RateSet& rs, double t_m);
double triple_jump_exact(const RateSet& rs, double t_m);

// Literal three-atom chain expressions (for cross-checking the generic
// component sums above, which reduce to them algebraically).
double double_jump_rate_closed(const Eigen::Matrix4d& p, double t_m);
double triple_jump_rate_closed(const Eigen::Matrix4d& p, double t_m);

// period_statistics + double/triple jump rates in one call.
void finalize_rates(RateSet& rs, double t_m);

// Population-flow oracle: d/dt Tr(P_j rho) written as an explicit
// combination of weak-coupling coherence matrix elements in the adapted
// basis, -2 sum <x|H_weak|y> Im<x|rho|y> (V scheme).  Independent of the
// superoperator route used by transition_rates.
double population_flow_rate(const SystemParams& p, const DickeBasis& db,
                            const Matrix& rho, int level);

// Precomputed symmetry-reduced solver for distance sweeps: the Liouvillian
// is affine in c3, so each sweep point only reassembles small sector
// matrices.  rates_at is const and safe to call concurrently.
class RatePipeline {
 public:
  explicit RatePipeline(const SystemParams& base);
  ~RatePipeline();
  RatePipeline(const RatePipeline&) = delete;
  RatePipeline& operator=(const RatePipeline&) = delete;

  // Rates with the strong-transition coupling overridden to c3.
  RateSet rates_at(Complex c3) const;
  const SystemParams& base() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coopjump
