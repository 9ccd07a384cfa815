#include "chi2map/chi2direct.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace chi2map {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("histogram lengths differ: " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    }
}

double chi2_distance_unchecked(const double* x, const double* y, std::size_t d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double s = x[i] + y[i];
        if (s > 0.0) {
            const double diff = x[i] - y[i];
            acc += diff * diff / s;
        }
    }
    return 0.5 * acc;
}

}  // namespace

ParamVector::ParamVector(std::vector<double> k) : k_(std::move(k)) {
    for (std::size_t i = 0; i < k_.size(); ++i) {
        if (!(k_[i] > 0.0 && k_[i] <= 1.0)) {
            throw ParameterError("series parameter k[" + std::to_string(i) + "] = " +
                                 std::to_string(k_[i]) + " outside (0, 1]");
        }
    }
}

ParamVector ParamVector::prefix(std::size_t q) const {
    if (q > k_.size()) throw ParameterError("prefix longer than the parameter vector");
    return ParamVector(std::vector<double>(k_.begin(), k_.begin() + static_cast<std::ptrdiff_t>(q)));
}

ParamVector read_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<double> k;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size()) {
            throw ParseError("malformed parameter '" + line + "'", row, 0);
        }
        k.push_back(v);
        ++row;
    }
    return ParamVector(std::move(k));
}

void write_params(const std::string& path, const ParamVector& k) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    char buf[32];
    for (double v : k.values()) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
        out.put('\n');
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

double chi2_distance(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    return chi2_distance_unchecked(x.data(), y.data(), x.size());
}

double chi2_similarity(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] + y[i];
        if (s > 0.0) acc += 2.0 * x[i] * y[i] / s;
    }
    return acc;
}

double exp_chi2_kernel(std::span<const double> x, std::span<const double> y, KernelParams params) {
    if (!(params.beta > 0.0)) throw ParameterError("beta must be positive");
    return std::exp(-params.beta * chi2_distance(x, y));
}

Eigen::MatrixXd exp_chi2_gram(const RowMatrix& A, const RowMatrix& B, double beta) {
    if (A.cols() != B.cols()) throw DimensionError("gram operands have different widths");
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    const auto na = A.rows();
    const auto nb = B.rows();
    const auto d = static_cast<std::size_t>(A.cols());
    Eigen::MatrixXd G(na, nb);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < nb; ++j) {
        const double* bj = B.row(j).data();
        for (Eigen::Index i = 0; i < na; ++i) {
            G(i, j) = std::exp(-beta * chi2_distance_unchecked(A.row(i).data(), bj, d));
        }
    }
    return G;
}

Eigen::MatrixXd exp_chi2_gram_serial(const RowMatrix& A, const RowMatrix& B, double beta) {
    if (A.cols() != B.cols()) throw DimensionError("gram operands have different widths");
    Eigen::MatrixXd G(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            double acc = 0.0;
            for (Eigen::Index t = 0; t < A.cols(); ++t) {
                const double s = A(i, t) + B(j, t);
                if (s > 0.0) acc += (A(i, t) - B(j, t)) * (A(i, t) - B(j, t)) / s;
            }
            G(i, j) = std::exp(-beta * 0.5 * acc);
        }
    }
    return G;
}

// -----------------------------------------------------------------------------

GreedyFit fit_params_greedy(const ValueHistogram& hist, std::size_t n_terms) {
    const auto bins = hist.centroids.size();
    if (n_terms > bins) {
        throw ParameterError("cannot select " + std::to_string(n_terms) + " parameters from " +
                             std::to_string(bins) + " bin centroids");
    }
    const auto& x = hist.centroids;
    std::vector<double> b(bins);
    for (std::size_t j = 0; j < bins; ++j) b[j] = x[j] / (x[j] + 1.0) * hist.density[j];

    auto peak_of = [&](std::size_t& where) {
        where = 0;
        double best = std::abs(b[0]);
        for (std::size_t j = 1; j < bins; ++j) {
            if (std::abs(b[j]) > best) {
                best = std::abs(b[j]);
                where = j;
            }
        }
        return best;
    };

    GreedyFit fit;
    std::vector<double> k;
    for (std::size_t i = 0; i < n_terms; ++i) {
        std::size_t j = 0;
        fit.peak.push_back(peak_of(j));
        const double ki = x[j];
        k.push_back(ki);
        fit.chosen_bins.push_back(j);
        for (std::size_t t = 0; t < bins; ++t) b[t] *= (x[t] - ki) / (x[t] + ki);
    }
    std::size_t unused = 0;
    fit.peak.push_back(peak_of(unused));
    fit.params = ParamVector(std::move(k));
    fit.residual = std::move(b);
    return fit;
}

ParamVector fit_params(const HistogramMatrix& X, std::size_t n_terms, std::size_t bins) {
    if (n_terms > bins) {
        throw ParameterError("n_terms (" + std::to_string(n_terms) + ") exceeds bins (" +
                             std::to_string(bins) + ")");
    }
    return fit_params_greedy(value_histogram(X, bins), n_terms).params;
}

ParamVector fit_params(const ChunkSpec& spec, std::size_t n_terms, std::size_t bins) {
    if (n_terms > bins) {
        throw ParameterError("n_terms (" + std::to_string(n_terms) + ") exceeds bins (" +
                             std::to_string(bins) + ")");
    }
    return fit_params_greedy(value_histogram(spec, bins), n_terms).params;
}

// -----------------------------------------------------------------------------

void direct_coeffs(double x, const ParamVector& k, std::span<double> out) {
    const auto n = k.size();
    if (x == 0.0) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
        return;
    }
    double lead = 1.0;
    for (std::size_t q = 0; q < n; ++q) {
        const double kq = k[q];
        const double inv = 1.0 / (x + kq);
        out[q] = lead * 2.0 * std::sqrt(kq) * x * inv;
        lead *= (x - kq) * inv;
    }
}

Eigen::VectorXd direct_embed(std::span<const double> x, const ParamVector& k) {
    const auto n = k.size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(x.size() * n));
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0.0) throw InvalidValue("negative entry", ParseError::npos, j);
        direct_coeffs(x[j], k, {out.data() + j * n, n});
    }
    return out;
}

double nterm_error_exact(double x, double y, const ParamVector& k) {
    if (x == 0.0 && y == 0.0) return 0.0;
    double prod = 2.0 * x * y / (x + y);
    for (double kq : k.values()) prod *= (x - kq) * (y - kq) / ((x + kq) * (y + kq));
    return prod;
}

double error_bound(double x, const ParamVector& k) {
    double prod = 2.0 * x / (x + 1.0);
    for (double kq : k.values()) prod *= (x - kq) / (x + kq);
    return prod;
}

RowMatrix embed_matrix(const RowMatrix& X, const ParamVector& k) {
    validate_values(X, MatrixKind::histogram);
    const auto n = X.rows();
    const auto d = static_cast<std::size_t>(X.cols());
    const auto terms = k.size();
    RowMatrix out(n, static_cast<Eigen::Index>(d * terms));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = X.row(i).data();
        double* oi = out.row(i).data();
        for (std::size_t j = 0; j < d; ++j) direct_coeffs(xi[j], k, {oi + j * terms, terms});
    }
    return out;
}

RowMatrix embed_matrix_serial(const RowMatrix& X, const ParamVector& k) {
    RowMatrix out(X.rows(), X.cols() * static_cast<Eigen::Index>(k.size()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd row = X.row(i).transpose();
        out.row(i) = direct_embed({row.data(), static_cast<std::size_t>(row.size())}, k).transpose();
    }
    return out;
}

}  // namespace chi2map
