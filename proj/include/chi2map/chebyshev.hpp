#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chi2map/histio.hpp"

// =============================================================================
// Chebyshev-style series for k0(x, y) = 2xy/(x+y) = sqrt(xy) sech((log y - log x)/2).
//
// With z = 2 arctan(exp(pi w)) and u_x(z) = log tan(z/2) log(x) / pi, the functions
// cos(u_x) and sin(u_x) have cosine-series coefficients a_q(x) (even q) and b_q(x)
// (odd q). The embedding merges both families into one sequence
//
//   d_0(x) = 2x/(x+1)                  = sqrt(x) a_0(x) / 2
//   d_q(x) = sqrt(x/2) a_q(x), q even  (q >= 2)
//   d_q(x) = sqrt(x/2) b_q(x), q odd
//
// so that k0(x, y) = sum_q d_q(x) d_q(y). Integration by parts yields the
// three-term recurrence
//
//   d_1 = -(sqrt(2) log x / pi) d_0
//   d_q = ((-1)^q (2 log x / pi) d_{q-1} + (q - 2) d_{q-2}) / q,   q >= 2.
// =============================================================================

namespace chi2map {

// Entries below this are mapped to the zero coefficient vector.
inline constexpr double cheb_zero_floor = 1e-12;

// Writes d_0(x)..d_N(x) into out (size N + 1).
void cheb_coeffs(double x, std::size_t n_terms, std::span<double> out);

// Per-dimension blocks of N + 1 coefficients: out[j*(N+1) + q].
Eigen::VectorXd cheb_embed(std::span<const double> x, std::size_t n_terms);

RowMatrix cheb_embed_matrix(const RowMatrix& X, std::size_t n_terms);
RowMatrix cheb_embed_matrix_serial(const RowMatrix& X, std::size_t n_terms);

// Cosine-series coefficients of cos(u_x) (a, even indices) and sin(u_x) (b, odd
// indices), unnormalized: a_q = (2/pi) int_0^pi cos(u_x(z)) cos(qz) dz.
struct FourierCoeffs {
    double x = 0.0;
    std::vector<double> a;  // a[q], zero for odd q
    std::vector<double> b;  // b[q], zero for even q
};

// Evaluates the a/b recurrences directly, q = 0..N. Requires x > 0, x != 1, N >= 1.
FourierCoeffs fourier_coeffs_recurrence(double x, std::size_t n_terms);

// sqrt(xy) * sech((log y - log x) / 2); equals 2xy/(x+y).
double sech_identity_check(double x, double y);

struct ConvergenceRow {
    std::size_t terms = 0;
    double max_residual = 0.0;
};

// For N = 0..n_max: max over grid pairs of |2xy/(x+y) - sum_{q<=N} d_q(x) d_q(y)|.
std::vector<ConvergenceRow> cheb_convergence_profile(std::span<const double> grid,
                                                     std::size_t n_max);

}  // namespace chi2map
