#pragma once

namespace smc {

double normalCdf(double x);
/// Standard normal quantile. p must lie in (0,1).
double normalQuantile(double p);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incompleteBetaRegularized(double a, double b, double x);

/// Student-t density, distribution and quantile. Degrees of freedom may be
/// fractional (Welch-Satterthwaite); df must be positive.
double studentTPdf(double x, double df);
double studentTCdf(double x, double df);
/// Inverse of studentTCdf to 1e-9 absolute; p outside (0,1) throws DomainError.
double tQuantile(double df, double p);

/// P(T <= x) for the non-central t with df degrees of freedom and
/// non-centrality theta. Poisson-mixture series summed outward from the
/// modal term, so large |theta| does not underflow the leading weight.
double nonCentralTCdf(double x, double df, double theta);

}  // namespace smc
