#pragma once

// Finite-blocklength scalar math: Gaussian tail, channel dispersion, normal-
// approximation rate, decoding error and effective throughput.

#include <string>
#include <vector>

namespace rsma::fbl {

/// Upper-tail probability of the standard normal distribution.
double q_function(double x);

/// Inverse of q_function on (0, 1). Throws std::invalid_argument outside.
double q_inverse(double p);

/// Channel dispersion V = 1 - (1 + gamma)^-2.
double dispersion(double gamma);

struct FblPoint {
  double sinr = 0.0;
  double blocklength = 1.0;
  double error_target = 1e-5;
};

/// Normal-approximation achievable rate in bits/s/Hz. Negative at low SINR.
double fbl_rate(const FblPoint& point);

/// Q^{-1}(eps) / (sqrt(N) ln 2), the dispersion penalty multiplier.
double rate_penalty(double error_target, double blocklength);

/// Argument of Q in the decoding error: ln2 * sqrt(N/V) * (log2(1+gamma) - rate).
double error_exponent(double gamma, double rate, double blocklength);

/// Decoding error probability Q(f(gamma, rate)).
/// gamma == 0 saturates: rate > 0 fails with probability 1, rate == 0 never fails.
double decode_error(double gamma, double rate, double blocklength);

/// Smallest SINR with nonnegative fbl_rate (the root of log2(1+g) = theta*sqrt(V)).
double zero_rate_sinr(double error_target, double blocklength);

struct EffectiveThroughput {
  double common_part = 0.0;
  double private_part = 0.0;
  double lower_bound_common = 0.0;
  double lower_bound_private = 0.0;
  // Set when 1 - eps_c - eps_p < 0 forced the private part to zero.
  bool private_clamped = false;

  double total() const { return common_part + private_part; }
  double lower_bound_total() const { return lower_bound_common + lower_bound_private; }
};

/// T_c = R_c (1 - eps_c), T_p ~= R_p (1 - eps_c - eps_p) and the fixed-threshold
/// lower bounds R_c (1 - eps_th), R_p (1 - 2 eps_th).
EffectiveThroughput effective_throughput(double common_rate, double private_rate,
                                         double eps_common, double eps_private,
                                         double error_target);

struct Lemma1Grid {
  std::vector<double> gammas;
  std::vector<double> error_targets;
  std::vector<double> blocklengths;
  double max_gamma = 1e6;  // 60 dB
  int rate_samples = 200;
  double fd_step = 1e-6;
};

struct Lemma1Violation {
  double gamma = 0.0;
  double error_target = 0.0;
  double blocklength = 0.0;
  std::string what;
};

struct Lemma1Report {
  int points_checked = 0;
  int points_vacuous = 0;  // fbl_rate <= 0, no admissible rate range
  double max_tightness_gap = 0.0;
  double max_relative_gap = 0.0;  // gap / (R * eps_th)
  std::vector<Lemma1Violation> violations;

  bool passed() const { return violations.empty(); }
};

/// Numerically confirms, on every grid point, that throughput is increasing in
/// the rate on [0, fbl_rate], that the fixed-threshold bound never exceeds the
/// exact throughput, and that the bound is tight at the optimal rate.
/// Both the common form R(1 - eps) and the private form R(1 - eps_th - eps) are
/// checked. Throws std::invalid_argument if eps_th > 1e-4, N > 1e4 or a gamma
/// exceeds max_gamma.
Lemma1Report validate_lemma1(const Lemma1Grid& grid);

}  // namespace rsma::fbl
