#include "smc/stats/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "smc/error.hpp"

namespace smc {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for the incomplete beta, modified Lentz.
double betaContinuedFraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 20000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

double logBetaFront(double a, double b, double x) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
           b * std::log1p(-x);
}

}  // namespace

double normalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normalQuantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normalQuantile: p must lie in (0,1)");
    // Acklam's rational approximation followed by one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double lowTail = 0.02425;
    double x;
    if (p < lowTail) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - lowTail) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normalCdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double incompleteBetaRegularized(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incompleteBeta: a, b must be positive");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw DomainError("incompleteBeta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(logBetaFront(a, b, x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betaContinuedFraction(a, b, x) / a;
    return 1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b;
}

double studentTPdf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("studentTPdf: df must be positive");
    const double logNorm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                           0.5 * std::log(df * std::numbers::pi);
    return std::exp(logNorm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double studentTCdf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("studentTCdf: df must be positive");
    if (std::isnan(x)) throw DomainError("studentTCdf: NaN argument");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (x == 0.0) return 0.5;
    // P(|T| > |x|) = I_{df/(df+x^2)}(df/2, 1/2); pick the better-conditioned form.
    const double x2 = x * x;
    double upper;
    if (x2 < df) {
        upper = 0.5 * (1.0 - incompleteBetaRegularized(0.5, 0.5 * df, x2 / (df + x2)));
    } else {
        upper = 0.5 * incompleteBetaRegularized(0.5 * df, 0.5, df / (df + x2));
    }
    return x > 0.0 ? 1.0 - upper : upper;
}

namespace {

double tQuantileUpper(double df, double p) {
    // p in (0.5, 1). Cornish-Fisher start, then Newton safeguarded by a bracket.
    const double z = normalQuantile(p);
    const double z2 = z * z;
    double guess = z + (z2 * z + z) / (4.0 * df) +
                   (5.0 * z2 * z2 * z + 16.0 * z2 * z + 3.0 * z) / (96.0 * df * df);
    if (df < 1.0 + 1e-12 && std::fabs(df - 1.0) < 1e-12) guess = std::tan(std::numbers::pi * (p - 0.5));
    if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;

    double lo = 0.0;
    double hi = guess;
    while (studentTCdf(hi, df) < p) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalError("tQuantile: bracket overflow");
    }
    double x = guess;
    for (int iter = 0; iter < 300; ++iter) {
        const double f = studentTCdf(x, df) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double pdf = studentTPdf(x, df);
        double next = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-14 * std::max(1.0, std::fabs(x)) || hi - lo <= 1e-14 * std::max(1.0, hi)) return next;
        x = next;
    }
    return x;
}

}  // namespace

double tQuantile(double df, double p) {
    if (!(df > 0.0)) throw DomainError("tQuantile: df must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tQuantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;

    // The estimators ask for the same (df, p) many times per block.
    struct Key {
        double df, p;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<double>{}(k.df) * 31u ^ std::hash<double>{}(k.p);
        }
    };
    thread_local std::unordered_map<Key, double, KeyHash> cache;
    const Key key{df, p};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const double q = p > 0.5 ? tQuantileUpper(df, p) : -tQuantileUpper(df, 1.0 - p);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(key, q);
    return q;
}

namespace {

// F(t; df, delta) for t >= 0 via the Poisson mixture
//   Phi(-delta) + 1/2 sum_j [P_j I_x(j+1/2, df/2) + Q_j I_x(j+1, df/2)],
//   P_j = e^{-l} l^j / j!,  Q_j = e^{-l} l^j / Gamma(j+3/2) * delta / sqrt(2),
//   l = delta^2 / 2,  x = t^2 / (t^2 + df),
// summed outward from j = floor(l) using the recurrence
//   I_x(a+1, b) = I_x(a, b) - Gamma(a+b) / (Gamma(a+1) Gamma(b)) x^a (1-x)^b.
double nonCentralTCdfNonNegative(double t, double df, double delta) {
    const double base = normalCdf(-delta);
    if (t == 0.0) return base;
    const double x = t * t / (t * t + df);
    const double b = 0.5 * df;
    const double lambda = 0.5 * delta * delta;
    if (lambda == 0.0) {
        return base + 0.5 * incompleteBetaRegularized(0.5, b, x);
    }
    const double k = std::floor(lambda);
    const double logLambda = std::log(lambda);
    const double sqrtHalfDelta = delta / std::numbers::sqrt2;

    const double pk = std::exp(-lambda + k * logLambda - std::lgamma(k + 1.0));
    const double qk = std::exp(-lambda + k * logLambda - std::lgamma(k + 1.5)) * sqrtHalfDelta;

    const double aP = k + 0.5;
    const double aQ = k + 1.0;
    const double logX = std::log(x);
    const double log1mX = std::log1p(-x);
    auto decrement = [&](double a) {
        return std::exp(std::lgamma(a + b) - std::lgamma(a + 1.0) - std::lgamma(b) + a * logX +
                        b * log1mX);
    };
    const double iPk = incompleteBetaRegularized(aP, b, x);
    const double iQk = incompleteBetaRegularized(aQ, b, x);
    const double gPk = decrement(aP);
    const double gQk = decrement(aQ);

    double total = pk * iPk + qk * iQk;
    double massUsed = pk;

    // Forward: j = k+1, k+2, ...
    {
        double p = pk, q = qk, iP = iPk, iQ = iQk, gP = gPk, gQ = gQk, a1 = aP, a2 = aQ;
        double mass = massUsed;
        for (int step = 1; step < 100000; ++step) {
            const double j = k + step;
            iP -= gP;
            iQ -= gQ;
            gP *= x * (a1 + b) / (a1 + 1.0);
            gQ *= x * (a2 + b) / (a2 + 1.0);
            a1 += 1.0;
            a2 += 1.0;
            p *= lambda / j;
            q *= lambda / (j + 0.5);
            total += p * std::max(iP, 0.0) + q * std::max(iQ, 0.0);
            mass += p;
            const double remaining = std::max(0.0, 1.0 - mass);
            if (remaining * std::max(iP, 0.0) < 1e-15 && j > lambda) break;
        }
        massUsed = mass;
    }
    // Backward: j = k-1, ..., 0.
    {
        double p = pk, q = qk, iP = iPk, iQ = iQk, gP = gPk, gQ = gQk, a1 = aP, a2 = aQ;
        for (double j = k - 1.0; j >= 0.0; j -= 1.0) {
            // g(a-1) = g(a) * a / (x (a + b - 1))
            gP *= a1 / (x * (a1 + b - 1.0));
            gQ *= a2 / (x * (a2 + b - 1.0));
            a1 -= 1.0;
            a2 -= 1.0;
            iP += gP;
            iQ += gQ;
            p *= (j + 1.0) / lambda;
            q *= (j + 1.5) / lambda;
            total += p * std::min(iP, 1.0) + q * std::min(iQ, 1.0);
            if (p < 1e-18 && std::fabs(q) < 1e-18) break;
        }
    }
    const double value = base + 0.5 * total;
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace

double nonCentralTCdf(double x, double df, double theta) {
    if (!(df > 0.0)) throw DomainError("nonCentralTCdf: df must be positive");
    if (std::isnan(x) || std::isnan(theta)) throw DomainError("nonCentralTCdf: NaN argument");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (x >= 0.0) return nonCentralTCdfNonNegative(x, df, theta);
    return std::clamp(1.0 - nonCentralTCdfNonNegative(-x, df, -theta), 0.0, 1.0);
}

}  // namespace smc
