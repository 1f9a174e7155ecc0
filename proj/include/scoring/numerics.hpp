#pragma once

#include <cstddef>
#include <vector>

#include "scoring/errors.hpp"

namespace scoring {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kSqrt2 = 1.4142135623730950488;

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// Inverse of std_normal_cdf on (0,1); Wichura's PPND16 rational approximation.
double normal_quantile(double p);

// Modified Bessel function of the second kind, nu >= 0, x > 0.
// Half-integer orders take the closed-form path; everything else goes through
// the small-x series / large-x continued fraction with upward recurrence.
double bessel_k(double nu, double x);

namespace detail {
// General-order path regardless of nu (exposed so tests can pit it against
// the half-integer closed forms).
double bessel_k_general(double nu, double x);
double bessel_k_half_integer(double nu, double x);
}  // namespace detail

// Dense symmetric matrix, row-major full storage. operator() keeps the two
// mirrored entries in sync.
class SymMatrix {
public:
  explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }
  double trace() const;

  const std::vector<double>& data() const { return a_; }

private:
  std::size_t n_;
  std::vector<double> a_;
};

class LowerTriangular {
public:
  explicit LowerTriangular(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

private:
  std::size_t n_;
  std::vector<double> a_;
};

// Throws NotPositiveDefinite (with the failing pivot index) when a pivot is
// not strictly positive.
LowerTriangular cholesky(const SymMatrix& a);

// Retry policy used by the simulation studies: on failure add
// 1e-10 * trace/n to the diagonal and factor once more.
LowerTriangular cholesky_jittered(const SymMatrix& a);

// Solves A x = b given A = L L^T.
std::vector<double> chol_solve(const LowerTriangular& l, const std::vector<double>& b);

// Full inverse of A from its Cholesky factor (SPD solve paths only).
SymMatrix chol_inverse(const LowerTriangular& l);

std::vector<double> matvec(const SymMatrix& a, const std::vector<double>& x);

}  // namespace scoring
