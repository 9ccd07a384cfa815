#include "chi2map/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chi2map {

void cheb_coeffs(double x, std::size_t n_terms, std::span<double> out) {
    if (x < cheb_zero_floor) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_terms + 1), 0.0);
        return;
    }
    const double two_log_over_pi = 2.0 * std::log(x) / std::numbers::pi;
    out[0] = 2.0 * x / (x + 1.0);
    if (n_terms == 0) return;
    out[1] = -std::numbers::sqrt2 * std::log(x) / std::numbers::pi * out[0];
    for (std::size_t q = 2; q <= n_terms; ++q) {
        const double sign = (q % 2 == 0) ? 1.0 : -1.0;
        out[q] = (sign * two_log_over_pi * out[q - 1] + static_cast<double>(q - 2) * out[q - 2]) /
                 static_cast<double>(q);
    }
}

Eigen::VectorXd cheb_embed(std::span<const double> x, std::size_t n_terms) {
    const auto width = n_terms + 1;
    Eigen::VectorXd out(static_cast<Eigen::Index>(x.size() * width));
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0.0) throw InvalidValue("negative entry", ParseError::npos, j);
        cheb_coeffs(x[j], n_terms, {out.data() + j * width, width});
    }
    return out;
}

RowMatrix cheb_embed_matrix(const RowMatrix& X, std::size_t n_terms) {
    validate_values(X, MatrixKind::histogram);
    const auto width = n_terms + 1;
    const auto d = static_cast<std::size_t>(X.cols());
    RowMatrix out(X.rows(), static_cast<Eigen::Index>(d * width));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double* xi = X.row(i).data();
        double* oi = out.row(i).data();
        for (std::size_t j = 0; j < d; ++j) cheb_coeffs(xi[j], n_terms, {oi + j * width, width});
    }
    return out;
}

RowMatrix cheb_embed_matrix_serial(const RowMatrix& X, std::size_t n_terms) {
    RowMatrix out(X.rows(), X.cols() * static_cast<Eigen::Index>(n_terms + 1));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd row = X.row(i).transpose();
        out.row(i) =
            cheb_embed({row.data(), static_cast<std::size_t>(row.size())}, n_terms).transpose();
    }
    return out;
}

FourierCoeffs fourier_coeffs_recurrence(double x, std::size_t n_terms) {
    if (!(x > 0.0)) throw ParameterError("fourier coefficients need x > 0");
    if (x == 1.0) throw LogSingularity();
    if (n_terms < 1) throw ParameterError("fourier coefficients need N >= 1");

    const double log_over_pi = std::log(x) / std::numbers::pi;
    FourierCoeffs c;
    c.x = x;
    c.a.assign(n_terms + 1, 0.0);
    c.b.assign(n_terms + 1, 0.0);
    c.a[0] = 4.0 * std::sqrt(x) / (x + 1.0);
    // a_0 = -(pi / log x) b_1
    c.b[1] = -log_over_pi * c.a[0];
    for (std::size_t q = 2; q <= n_terms; ++q) {
        const double qd = static_cast<double>(q);
        if (q % 2 == 0) {
            // b_{q-1} = (pi / log x) (q/2 a_q - (q-2)/2 a_{q-2})
            c.a[q] = (2.0 / qd) * (log_over_pi * c.b[q - 1] + 0.5 * (qd - 2.0) * c.a[q - 2]);
        } else {
            // a_{q-1} = -(pi / log x) (q/2 b_q - (q-2)/2 b_{q-2})
            c.b[q] = (2.0 / qd) * (-log_over_pi * c.a[q - 1] + 0.5 * (qd - 2.0) * c.b[q - 2]);
        }
    }
    return c;
}

double sech_identity_check(double x, double y) {
    if (!(x > 0.0 && y > 0.0)) throw ParameterError("sech identity needs x, y > 0");
    const double half_delta = 0.5 * std::abs(std::log(y) - std::log(x));
    return std::sqrt(x * y) / std::cosh(half_delta);
}

std::vector<ConvergenceRow> cheb_convergence_profile(std::span<const double> grid,
                                                     std::size_t n_max) {
    for (double g : grid) {
        if (!(g > 0.0 && g <= 1.0)) throw ParameterError("convergence grid must lie in (0, 1]");
    }
    const auto m = grid.size();
    const auto width = n_max + 1;
    std::vector<double> coeffs(m * width);
    for (std::size_t i = 0; i < m; ++i) cheb_coeffs(grid[i], n_max, {coeffs.data() + i * width, width});

    // Running partial sums per pair, so each N costs O(m^2).
    std::vector<double> partial(m * m, 0.0);
    std::vector<ConvergenceRow> rows;
    rows.reserve(width);
    for (std::size_t q = 0; q <= n_max; ++q) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                auto& p = partial[i * m + j];
                p += coeffs[i * width + q] * coeffs[j * width + q];
                const double exact = 2.0 * grid[i] * grid[j] / (grid[i] + grid[j]);
                worst = std::max(worst, std::abs(exact - p));
            }
        }
        rows.push_back({q, worst});
    }
    return rows;
}

}  // namespace chi2map
