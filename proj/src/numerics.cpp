#include "scoring/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace scoring {

double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  // erfc keeps full relative accuracy in the lower tail, unlike 1 - Phi(-x).
  return 0.5 * std::erfc(-x / kSqrt2);
}

// Wichura's algorithm AS 241 (PPND16). Absolute error below 1e-15 on (0,1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  static const double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                              1.9715909503065514427e3, 1.3731693765509461125e4,
                              4.5921953931549871457e4, 6.7265770927008700853e4,
                              3.3430575583588128105e4, 2.5090809287301226727e3};
  static const double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                              5.3941960214247511077e3, 2.1213794301586595867e4,
                              3.9307895800092710610e4, 2.8729085735721942674e4,
                              5.2264952788528545610e3};
  static const double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                              5.76949722146069140550e0, 3.64784832476320460504e0,
                              1.27045825245236838258e0, 2.41780725177450611770e-1,
                              2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                              6.89767334985100004550e-1, 1.48103976427480074590e-1,
                              1.51986665636164571966e-2, 5.47593808499534494600e-4,
                              1.05075007164441684324e-9};
  static const double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                              1.78482653991729133580e0, 2.96560571828504891230e-1,
                              2.65321895265761230930e-2, 1.24266094738807843860e-3,
                              2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                              1.48753612908506148525e-2, 7.86869131145613259100e-4,
                              1.84631831751005468180e-5, 1.42151175831644588870e-7,
                              2.04426310338993978564e-15};
  auto poly = [](const double* k, double r) {
    return ((((((k[7] * r + k[6]) * r + k[5]) * r + k[4]) * r + k[3]) * r + k[2]) * r + k[1]) * r +
           k[0];
  };
  double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    z = poly(e, r) / poly(f, r);
  }
  return (q < 0.0) ? -z : z;
}

namespace detail {

namespace {

// Taylor coefficients of 1/Gamma(1+z) (Abramowitz & Stegun 6.1.34 shifted by
// one index).
const double kInvGammaCoef[26] = {
    1.0000000000000000000,  0.5772156649015328606,  -0.6558780715202538811,
    -0.0420026350340952355, 0.1665386113822914895,  -0.0421977345555443367,
    -0.0096219715278769736, 0.0072189432466630995,  -0.0011651675918590651,
    -0.0002152416741149509, 0.0001280502823881162,  -0.0000201348547807882,
    -0.0000012504934821426, 0.0000011330272319817,  -0.0000002056338416977,
    0.0000000061160951044,  0.0000000050020076444,  -0.0000000011812745705,
    0.0000000001043426711,  0.0000000000077822634,  -0.0000000000036968056,
    0.0000000000005100370,  -0.0000000000000205832, -0.0000000000000053481,
    0.0000000000000001226,  0.0000000000000000125};

// gamma1(mu) = [1/Gamma(1-mu) - 1/Gamma(1+mu)]/(2 mu) and
// gamma2(mu) = [1/Gamma(1-mu) + 1/Gamma(1+mu)]/2, evaluated through the
// series so mu -> 0 stays exact (only odd/even powers survive).
void temme_gammas(double mu, double& gamma1, double& gamma2) {
  double mu2 = mu * mu;
  double g1 = 0.0, g2 = 0.0, pw = 1.0;
  for (int j = 0; 2 * j + 1 < 26; ++j) {
    g1 -= kInvGammaCoef[2 * j + 1] * pw;   // odd-index coefficients
    g2 += kInvGammaCoef[2 * j] * pw;       // even-index coefficients
    pw *= mu2;
  }
  gamma1 = g1;
  gamma2 = g2;
}

constexpr int kMaxIter = 30000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Temme's series for K_mu(x), K_{mu+1}(x), x <= 2, |mu| <= 1/2.
void bessel_k_temme(double x, double mu, double& kmu, double& kmu1) {
  double x2 = 0.5 * x;
  double pimu = kPi * mu;
  double fact = (std::abs(pimu) < 1e-15) ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  double fact2 = (std::abs(e) < 1e-15) ? 1.0 : std::sinh(e) / e;
  double gam1, gam2;
  temme_gammas(mu, gam1, gam2);
  double gampl = gam2 - mu * gam1;  // 1/Gamma(1+mu)
  double gammi = gam2 + mu * gam1;  // 1/Gamma(1-mu)
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  double ee = std::exp(e);
  double p = 0.5 * ee / gampl;
  double q = 0.5 / (ee * gammi);
  double cc = 1.0;
  double dd = x2 * x2;
  double sum1 = p;
  double mu2 = mu * mu;
  int i = 1;
  for (; i <= kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    cc *= dd / i;
    p /= (i - mu);
    q /= (i + mu);
    double del = cc * ff;
    sum += del;
    double del1 = cc * (p - i * ff);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  kmu = sum;
  kmu1 = sum1 * 2.0 / x;
}

// Steed/Thompson-Barnett continued fraction (CF2) for x > 2, |mu| <= 1/2.
void bessel_k_cf2(double x, double mu, double& kmu, double& kmu1) {
  double mu2 = mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  double a1 = 0.25 - mu2;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  kmu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

}  // namespace

double bessel_k_general(double nu, double x) {
  int nl = static_cast<int>(nu + 0.5);
  double mu = nu - nl;  // in [-1/2, 1/2]
  double kmu, kmu1;
  if (x <= 2.0) {
    bessel_k_temme(x, mu, kmu, kmu1);
  } else {
    bessel_k_cf2(x, mu, kmu, kmu1);
  }
  double xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    double knext = (mu + i) * xi2 * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = knext;
  }
  return kmu;
}

double bessel_k_half_integer(double nu, double x) {
  // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}; higher orders by upward recurrence.
  double k0 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
  int steps = static_cast<int>(nu - 0.5 + 0.5);
  if (steps == 0) return k0;
  double km = k0, k = k0 * (1.0 + 1.0 / x);  // K_{3/2}
  for (int i = 1; i < steps; ++i) {
    double knext = km + (2.0 * (i + 0.5) / x) * k;
    km = k;
    k = knext;
  }
  return k;
}

}  // namespace detail

double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  if (nu < 0.0) nu = -nu;  // K_{-nu} = K_nu
  double half = nu - std::floor(nu);
  if (half == 0.5) return detail::bessel_k_half_integer(nu, x);
  return detail::bessel_k_general(nu, x);
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
  return t;
}

LowerTriangular cholesky(const SymMatrix& a) {
  std::size_t n = a.size();
  LowerTriangular l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) + " is not positive", j);
    }
    double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

LowerTriangular cholesky_jittered(const SymMatrix& a) {
  try {
    return cholesky(a);
  } catch (const NotPositiveDefinite&) {
    SymMatrix b = a;
    std::size_t n = a.size();
    double jitter = 1e-10 * a.trace() / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, i, a(i, i) + jitter);
    return cholesky(b);
  }
}

std::vector<double> chol_solve(const LowerTriangular& l, const std::vector<double>& b) {
  std::size_t n = l.size();
  if (b.size() != n) throw DimensionMismatch("chol_solve: rhs length does not match matrix size");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

SymMatrix chol_inverse(const LowerTriangular& l) {
  std::size_t n = l.size();
  // Invert L in place, then A^{-1} = L^{-T} L^{-1}.
  LowerTriangular inv(n);
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l(i, k) * inv(k, j);
      inv(i, j) = s / l(i, i);
    }
  }
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < n; ++k) s += inv(k, i) * inv(k, j);
      out.set(i, j, s);
    }
  }
  return out;
}

std::vector<double> matvec(const SymMatrix& a, const std::vector<double>& x) {
  std::size_t n = a.size();
  if (x.size() != n) throw DimensionMismatch("matvec: vector length does not match matrix size");
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace scoring
