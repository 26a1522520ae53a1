#include "rsma/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rsma::fbl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("q_inverse: probability must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -q_inverse(1.0 - p);

  // Bracket on [0, hi] with Q(hi) < p, then Newton steps kept inside the bracket.
  double lo = 0.0;
  double hi = 1.0;
  while (q_function(hi) > p) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = q_function(x) - p;  // decreasing in x
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x + f / normal_pdf(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double dispersion(double gamma) {
  const double inv = 1.0 / (1.0 + gamma);
  return 1.0 - inv * inv;
}

double rate_penalty(double error_target, double blocklength) {
  return q_inverse(error_target) / (std::sqrt(blocklength) * kLn2);
}

double fbl_rate(const FblPoint& point) {
  const double v = dispersion(point.sinr);
  return std::log2(1.0 + point.sinr) -
         q_inverse(point.error_target) / kLn2 * std::sqrt(v / point.blocklength);
}

double error_exponent(double gamma, double rate, double blocklength) {
  const double v = dispersion(gamma);
  return kLn2 * std::sqrt(blocklength / v) * (std::log2(1.0 + gamma) - rate);
}

double decode_error(double gamma, double rate, double blocklength) {
  if (gamma <= 0.0) return rate > 0.0 ? 1.0 : 0.0;
  return q_function(error_exponent(gamma, rate, blocklength));
}

double zero_rate_sinr(double error_target, double blocklength) {
  const double theta = rate_penalty(error_target, blocklength);
  if (theta <= 0.0) return 0.0;
  // h(g) = log2(1+g) - theta sqrt(V(g)) is negative just above 0 and crosses once.
  auto h = [&](double g) { return std::log2(1.0 + g) - theta * std::sqrt(dispersion(g)); };
  double lo = 0.0;
  double hi = 1.0;
  while (h(hi) < 0.0) hi *= 2.0;
  lo = hi * 1e-12;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

EffectiveThroughput effective_throughput(double common_rate, double private_rate,
                                         double eps_common, double eps_private,
                                         double error_target) {
  EffectiveThroughput et;
  et.common_part = common_rate * (1.0 - eps_common);
  const double success = 1.0 - eps_common - eps_private;
  if (success < 0.0) {
    et.private_part = 0.0;
    et.private_clamped = true;
  } else {
    et.private_part = private_rate * success;
  }
  et.lower_bound_common = common_rate * (1.0 - error_target);
  et.lower_bound_private = private_rate * (1.0 - 2.0 * error_target);
  return et;
}

namespace {

void check_point(double gamma, double eps, double n, const Lemma1Grid& grid,
                 const std::vector<double>& stronger_gammas, Lemma1Report& report) {
  auto fail = [&](const std::string& what) {
    report.violations.push_back({gamma, eps, n, what});
  };

  const double r_max = fbl_rate({gamma, n, eps});
  if (r_max <= 0.0) {
    ++report.points_vacuous;
    return;
  }
  ++report.points_checked;

  // Common form T(R) = R (1 - eps(R)) and private form R (1 - eps_th - eps(R)).
  auto t_common = [&](double r) { return r * (1.0 - decode_error(gamma, r, n)); };
  auto t_private = [&](double r) { return r * (1.0 - eps - decode_error(gamma, r, n)); };

  const int samples = std::max(2, grid.rate_samples);
  for (int i = 0; i < samples; ++i) {
    const double r = r_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double lo = std::max(0.0, std::min(r, r_max - grid.fd_step));
    const double hi = lo + grid.fd_step;
    if (!(t_common(hi) - t_common(lo) > 0.0)) {
      std::ostringstream os;
      os << "common throughput not increasing at R=" << lo;
      fail(os.str());
      return;
    }
    if (!(t_private(hi) - t_private(lo) > 0.0)) {
      std::ostringstream os;
      os << "private throughput not increasing at R=" << lo;
      fail(os.str());
      return;
    }
  }

  const double exact_c = t_common(r_max);
  const double bound_c = r_max * (1.0 - eps);
  const double exact_p = t_private(r_max);
  const double bound_p = r_max * (1.0 - 2.0 * eps);
  const double slack = 1e-12 * std::max(1.0, r_max);
  if (bound_c > exact_c + slack) fail("common bound exceeds exact throughput");
  if (bound_p > exact_p + slack) fail("private bound exceeds exact throughput");

  const double gap = std::max(exact_c - bound_c, exact_p - bound_p);
  report.max_tightness_gap = std::max(report.max_tightness_gap, gap);
  report.max_relative_gap = std::max(report.max_relative_gap, gap / (r_max * eps));
  if (gap > r_max * eps * 1e-6 + 1e-12) fail("bound not tight at the optimal rate");

  // Users with a stronger common-stream SINR decoding at the binding rate:
  // their error stays below eps_th and the gap is at most R eps_th.
  for (double g2 : stronger_gammas) {
    const double e2 = decode_error(g2, r_max, n);
    if (e2 > eps * (1.0 + 1e-10)) fail("stronger user exceeds error target at binding rate");
    const double gap2 = r_max * (eps - e2);
    if (gap2 > r_max * eps + 1e-15) fail("non-binding user gap exceeds R*eps_th");
  }
}

}  // namespace

Lemma1Report validate_lemma1(const Lemma1Grid& grid) {
  for (double eps : grid.error_targets) {
    if (!(eps > 0.0 && eps <= 1e-4)) {
      throw std::invalid_argument("validate_lemma1: error target must lie in (0, 1e-4]");
    }
  }
  for (double n : grid.blocklengths) {
    if (!(n > 0.0 && n <= 1e4)) {
      throw std::invalid_argument("validate_lemma1: blocklength must lie in (0, 1e4]");
    }
  }
  for (double g : grid.gammas) {
    if (!(g > 0.0 && g <= grid.max_gamma)) {
      throw std::invalid_argument("validate_lemma1: gamma outside (0, max_gamma]");
    }
  }

  Lemma1Report report;
  for (double eps : grid.error_targets) {
    for (double n : grid.blocklengths) {
      for (double g : grid.gammas) {
        std::vector<double> stronger;
        for (double g2 : grid.gammas) {
          if (g2 > g) stronger.push_back(g2);
        }
        check_point(g, eps, n, grid, stronger, report);
      }
    }
  }
  return report;
}

}  // namespace rsma::fbl
