#include "ccbe/kernel_model.hpp"

#include "ccbe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace ccbe {

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigurationError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  return value;
}

std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

} // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
  case KernelFamily::SingularBound:
    return "singular-bound";
  case KernelFamily::Constant:
    return "constant";
  case KernelFamily::Sum:
    return "sum";
  case KernelFamily::Product:
    return "product";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  for (auto f : {KernelFamily::SingularBound, KernelFamily::Constant, KernelFamily::Sum,
                 KernelFamily::Product})
    if (name == to_string(f))
      return f;
  throw ConfigurationError("unknown kernel family '" + std::string(name) +
                           "' (expected singular-bound, constant, sum or product)");
}

std::string to_string(const EfficiencySpec &eff) {
  if (eff.kind == EfficiencySpec::Kind::Constant)
    return "constant:" + fmt17(eff.inner);
  return "step-local:" + fmt17(eff.inner) + "," + fmt17(eff.outer);
}

EfficiencySpec parse_efficiency(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigurationError("efficiency must be 'constant:<E>' or 'step-local:<E1>,<E2>'");
  const auto kind = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  if (kind == "constant")
    return EfficiencySpec::constant(parse_double(args, "efficiency"));
  if (kind == "step-local") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos)
      throw ConfigurationError("step-local efficiency needs two values");
    return EfficiencySpec::step_local(parse_double(args.substr(0, comma), "efficiency"),
                                      parse_double(args.substr(comma + 1), "efficiency"));
  }
  throw ConfigurationError("unknown efficiency model '" + std::string(kind) + "'");
}

double kernel_envelope(double k, double alpha, double v, double vp) {
  // v + vp first: exact symmetry in (v, vp)
  const double s = v + vp;
  return k * (1.0 + s) / std::pow(s, alpha);
}

double eval_phi(const KernelSpec &spec, double v, double vp) {
  if (!(v > 0.0) || !(vp > 0.0))
    throw DomainError("collision kernel needs positive volumes");
  switch (spec.family) {
  case KernelFamily::SingularBound:
    return kernel_envelope(spec.k, spec.alpha, v, vp);
  case KernelFamily::Constant:
    return spec.k;
  case KernelFamily::Sum:
    return spec.k * (v + vp);
  case KernelFamily::Product:
    return spec.k * (v * vp);
  }
  return 0.0;
}

double envelope_constant(const KernelSpec &spec) {
  if (spec.family == KernelFamily::Constant) {
    // min over s > 0 of (1+s)/s^alpha is attained at s = alpha/(1-alpha)
    const double s = spec.alpha / (1.0 - spec.alpha);
    return spec.k / ((1.0 + s) / std::pow(s, spec.alpha));
  }
  return spec.k;
}

double eval_P(const DaughterSpec &spec, double v, double s) {
  if (!(s > 0.0))
    throw DomainError("daughter distribution needs a positive parent volume");
  if (!(v > 0.0))
    throw DomainError("daughter distribution needs a positive fragment volume");
  if (v >= s)
    return 0.0;
  const double th = spec.theta;
  return (th + 2.0) * std::pow(v, th) / std::pow(s, 1.0 + th);
}

double p_moment(const DaughterSpec &spec, double p, double s) {
  if (!(s > 0.0))
    throw DomainError("p_moment needs s > 0");
  const double th = spec.theta;
  if (!(th + p + 1.0 > 0.0))
    throw DomainError("daughter moment of order " + fmt17(p) + " diverges for theta = " + fmt17(th));
  return (th + 2.0) / (th + p + 1.0) * std::pow(s, p);
}

double p_interval_moment(const DaughterSpec &spec, double p, double a, double b, double s) {
  if (!(s > 0.0) || a < 0.0 || a > b || b > s)
    throw DomainError("p_interval_moment needs 0 <= a <= b <= s, s > 0");
  const double th = spec.theta;
  const double q = th + p + 1.0;
  if (!(q > 0.0))
    throw DomainError("daughter moment of order " + fmt17(p) + " diverges for theta = " + fmt17(th));
  return (th + 2.0) / q * (std::pow(b, q) - std::pow(a, q)) / std::pow(s, 1.0 + th);
}

double p_cell_mass(const DaughterSpec &spec, double a, double b, double s) {
  if (!(0.0 <= a && a < b && b <= s))
    throw DomainError("p_cell_mass needs 0 <= a < b <= s");
  const double e = spec.theta + 2.0;
  return (std::pow(b, e) - std::pow(a, e)) / std::pow(s, spec.theta + 1.0);
}

double total_daughters(const DaughterSpec &spec) { return (spec.theta + 2.0) / (spec.theta + 1.0); }

double compute_eta(const DaughterSpec &spec, double alpha) {
  const double th = spec.theta;
  if (!(2.0 * alpha - th < 1.0))
    throw InadmissibleError("2 alpha - theta < 1 is violated (alpha = " + fmt17(alpha) +
                            ", theta = " + fmt17(th) + ")");
  const double eta = (th + 2.0) / (th + 1.0 - 2.0 * alpha);
  if (!(eta > 2.0))
    throw InadmissibleError("eta(2 alpha) = " + fmt17(eta) + " is not > 2");
  return eta;
}

double efficiency_threshold(double eta) { return (eta - 2.0) / (eta - 1.0); }

std::vector<double> geometric_lattice(double lo, double hi, int points, bool include_hi) {
  std::vector<double> out(static_cast<std::size_t>(points));
  const double denom = include_hi ? points - 1 : points;
  const double log_ratio = std::log(hi / lo);
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] = lo * std::exp(log_ratio * i / denom);
  return out;
}

AdmissibilityReport check_admissibility(const KernelSpec &kernel, const EfficiencySpec &eff,
                                        const DaughterSpec &daughter) {
  AdmissibilityReport rep;
  const double alpha = kernel.alpha;
  const double theta = daughter.theta;

  // (A1)
  rep.passes_A1 = true;
  if (!(alpha > 0.0 && alpha < 0.5)) {
    rep.passes_A1 = false;
    rep.failures.push_back("A1: alpha = " + fmt17(alpha) + " must lie in (0, 1/2)");
  }
  if (!(kernel.k > 0.0)) {
    rep.passes_A1 = false;
    rep.failures.push_back("A1: k = " + fmt17(kernel.k) + " must be positive");
  }
  if (rep.passes_A1) {
    rep.k_envelope = envelope_constant(kernel);
    if (kernel.family == KernelFamily::SingularBound) {
      rep.a1_worst_ratio = 1.0;
    } else {
      const auto lattice = geometric_lattice(1e-6, 1e3, 64, true);
      double worst = 0.0;
      for (double v : lattice)
        for (double vp : lattice)
          worst = std::max(worst, eval_phi(kernel, v, vp) /
                                      kernel_envelope(rep.k_envelope, alpha, v, vp));
      rep.a1_worst_ratio = worst;
      if (worst > 1.0 + 1e-12) {
        rep.passes_A1 = false;
        rep.failures.push_back("A1: kernel exceeds k(1+v+v')/(v+v')^alpha by a factor " +
                               fmt17(worst) + " on the lattice (1e-6, 1e3)^2");
      }
    }
  }

  // (A3)
  rep.passes_A3 = true;
  if (!(theta > -1.0 && theta <= 0.0)) {
    rep.passes_A3 = false;
    rep.failures.push_back("A3: theta = " + fmt17(theta) + " must lie in (-1, 0]");
  } else {
    rep.t_n = total_daughters(daughter);
    if (!(2.0 * alpha - theta < 1.0)) {
      rep.passes_A3 = false;
      rep.failures.push_back("A3: 2 alpha - theta = " + fmt17(2.0 * alpha - theta) + " must be < 1");
    } else {
      rep.eta_2alpha = (theta + 2.0) / (theta + 1.0 - 2.0 * alpha);
      if (!(rep.eta_2alpha > 2.0)) {
        rep.passes_A3 = false;
        rep.failures.push_back("A3: eta(2 alpha) = " + fmt17(rep.eta_2alpha) + " must be > 2");
      }
    }
  }

  // (A2)
  rep.passes_A2 = true;
  for (double e : {eff.inner, eff.outer}) {
    if (!(e >= 0.0 && e <= 1.0)) {
      rep.passes_A2 = false;
      rep.failures.push_back("A2: efficiency value " + fmt17(e) + " outside [0, 1]");
    }
  }
  if (rep.passes_A3) {
    rep.e_threshold = efficiency_threshold(rep.eta_2alpha);
    const auto lattice = geometric_lattice(1e-6, 1.0, 64, false);
    double margin = std::numeric_limits<double>::infinity();
    for (double v : lattice)
      for (double vp : lattice)
        margin = std::min(margin, eff.coalescence(v, vp) - rep.e_threshold);
    rep.a2_worst_margin = margin;
    if (margin < 0.0) {
      rep.passes_A2 = false;
      rep.failures.push_back("A2: E falls below (eta-2)/(eta-1) = " + fmt17(rep.e_threshold) +
                             " on (0,1)^2 (worst margin " + fmt17(margin) + ")");
    }
  } else {
    rep.passes_A2 = false;
    rep.failures.push_back("A2: threshold undefined because A3 fails");
  }
  return rep;
}

void check_initial_data(AdmissibilityReport &report, double mass, double neg_moment) {
  report.a4_evaluated = true;
  report.passes_A4 = std::isfinite(mass) && std::isfinite(neg_moment) && mass >= 0.0 &&
                     neg_moment >= 0.0;
  if (!report.passes_A4)
    report.failures.push_back("A4: initial data must have finite mass and finite v^{-2 alpha} moment");
}

} // namespace ccbe
