#ifndef CCBE_KERNEL_MODEL_HPP_
#define CCBE_KERNEL_MODEL_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace ccbe {

enum class KernelFamily { SingularBound, Constant, Sum, Product };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/**
 * Collision kernel phi(v, v').
 *
 *  SingularBound : k (1 + v + v') / (v + v')^alpha   (the growth envelope itself)
 *  Constant      : k
 *  Sum           : k (v + v')
 *  Product       : k v v'
 *
 * alpha is the singularity exponent of the envelope and must lie in (0, 1/2)
 * for every family, since the a-priori bounds are expressed through it.
 */
struct KernelSpec {
  KernelFamily family = KernelFamily::SingularBound;
  double k = 1.0;
  double alpha = 0.25;

  bool operator==(const KernelSpec &) const = default;
};

/// Coalescence efficiency E(v, v'); breakage efficiency is 1 - E.
struct EfficiencySpec {
  enum class Kind { Constant, StepLocal };

  Kind kind = Kind::Constant;
  double inner = 1.0; ///< E everywhere (Constant) or on (0,1)^2 (StepLocal)
  double outer = 1.0; ///< E outside (0,1)^2; StepLocal only

  static EfficiencySpec constant(double e) { return {Kind::Constant, e, e}; }
  static EfficiencySpec step_local(double inner, double outer) {
    return {Kind::StepLocal, inner, outer};
  }

  double coalescence(double v, double vp) const {
    if (kind == Kind::StepLocal && !(v < 1.0 && vp < 1.0))
      return outer;
    return inner;
  }
  double breakage(double v, double vp) const { return 1.0 - coalescence(v, vp); }

  bool operator==(const EfficiencySpec &) const = default;
};

/// "constant:<E>" or "step-local:<E inside (0,1)^2>,<E elsewhere>".
std::string to_string(const EfficiencySpec &eff);
EfficiencySpec parse_efficiency(std::string_view text);

/// Power-law daughter distribution P(v | v'; v'') = (theta+2) v^theta / s^(1+theta), s = v'+v''.
struct DaughterSpec {
  double theta = 0.0;

  bool operator==(const DaughterSpec &) const = default;
};

double eval_phi(const KernelSpec &spec, double v, double vp);

/// k (1 + v + v') / (v + v')^alpha.
double kernel_envelope(double k, double alpha, double v, double vp);

/// Smallest k for which the kernel sits under the envelope. Closed form for
/// SingularBound and Constant; the spec's k for Sum and Product (the lattice
/// check in check_admissibility decides whether that is enough).
double envelope_constant(const KernelSpec &spec);

double eval_P(const DaughterSpec &spec, double v, double s);

/// Integral over (0, s) of v^p P(v|.) dv = (theta+2)/(theta+p+1) s^p.
double p_moment(const DaughterSpec &spec, double p, double s);

/// Integral over (a, b) of v^p P(v|.) dv, 0 <= a <= b <= s.
double p_interval_moment(const DaughterSpec &spec, double p, double a, double b, double s);

/// Daughter mass born in (a, b): (b^(theta+2) - a^(theta+2)) / s^(1+theta).
double p_cell_mass(const DaughterSpec &spec, double a, double b, double s);

/// Total daughter count T_N = (theta+2)/(theta+1).
double total_daughters(const DaughterSpec &spec);

/// eta(2 alpha) = (theta+2)/(theta+1-2 alpha). Throws InadmissibleError unless > 2.
double compute_eta(const DaughterSpec &spec, double alpha);

/// (eta - 2)/(eta - 1): lower bound on E over (0,1)^2.
double efficiency_threshold(double eta);

struct AdmissibilityReport {
  double eta_2alpha = 0.0;
  double t_n = 0.0;
  double e_threshold = 0.0;
  double k_envelope = 0.0;

  bool passes_A1 = false;
  bool passes_A2 = false;
  bool passes_A3 = false;
  bool passes_A4 = true; ///< initial data; see check_initial_data
  bool a4_evaluated = false;

  double a1_worst_ratio = 0.0;  ///< max phi / envelope over the lattice
  double a2_worst_margin = 0.0; ///< min (E - threshold) over the lattice

  std::vector<std::string> failures;

  bool admissible() const { return passes_A1 && passes_A2 && passes_A3 && passes_A4; }
};

/// Geometric lattice used by the pointwise (A1)/(A2) checks.
std::vector<double> geometric_lattice(double lo, double hi, int points, bool include_hi);

AdmissibilityReport check_admissibility(const KernelSpec &kernel, const EfficiencySpec &eff,
                                        const DaughterSpec &daughter);

/// Fills the initial-data part of the report: mass and the v^{-2 alpha} moment
/// must be finite.
void check_initial_data(AdmissibilityReport &report, double mass, double neg_moment);

} // namespace ccbe

#endif // CCBE_KERNEL_MODEL_HPP_
