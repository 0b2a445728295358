#ifndef KINKSCAN_SPECIAL_HPP
#define KINKSCAN_SPECIAL_HPP

namespace kinkscan {

double norm_pdf(double x);
double norm_cdf(double x);

// Inverse standard normal CDF for p in (0,1). Rational approximation refined
// by one Halley step; accurate to ~1e-15 on the interior.
double norm_quantile(double p);

// Regularized incomplete beta I_x(a,b) for x in [0,1], a,b > 0.
double reg_inc_beta(double a, double b, double x);

// Inverse of reg_inc_beta in x for p in (0,1).
double inv_inc_beta(double a, double b, double p);

double log_beta(double a, double b);

} // namespace kinkscan

#endif
