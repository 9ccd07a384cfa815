#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chi2map/histio.hpp"

// =============================================================================
// Exact chi-squared kernels and the direct (telescoping) series embedding.
//
// The one-dimensional similarity 2xy/(x+y) splits for any k > 0 as
//
//   2xy/(x+y) = r_k(x) r_k(y) 2xy/(x+y) + s_k(x) s_k(y),
//   r_k(x) = (x-k)/(x+k),   s_k(x) = 2 sqrt(k) x/(x+k).
//
// Re-expanding the first term with k_2, k_3, ... gives coefficients
//
//   c_q(x) = r_{k_1}(x) ... r_{k_{q-1}}(x) s_{k_q}(x),
//
// whose N-term residual is exactly prod_q r_{k_q}(x) r_{k_q}(y) * 2xy/(x+y).
// =============================================================================

namespace chi2map {

// Ordered series parameters k_1..k_N, each in (0, 1].
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::vector<double> k);

    std::size_t size() const noexcept { return k_.size(); }
    bool empty() const noexcept { return k_.empty(); }
    double operator[](std::size_t i) const noexcept { return k_[i]; }
    const std::vector<double>& values() const noexcept { return k_; }

    // Leading q parameters.
    ParamVector prefix(std::size_t q) const;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> k_;
};

// One value per line.
ParamVector read_params(const std::string& path);
void write_params(const std::string& path, const ParamVector& k);

struct KernelParams {
    double beta = 1.5;
};

// 0.5 * sum (x_i - y_i)^2 / (x_i + y_i); bins with x_i + y_i == 0 contribute 0.
double chi2_distance(std::span<const double> x, std::span<const double> y);

// sum 2 x_i y_i / (x_i + y_i); equals 1 - chi2_distance for L1-normalized inputs.
double chi2_similarity(std::span<const double> x, std::span<const double> y);

// exp(-beta * chi2_distance(x, y)).
double exp_chi2_kernel(std::span<const double> x, std::span<const double> y, KernelParams params);

// Exact kernel blocks, G(i, j) = exp(-beta * chi2_distance(A_i, B_j)).
Eigen::MatrixXd exp_chi2_gram(const RowMatrix& A, const RowMatrix& B, double beta);
Eigen::MatrixXd exp_chi2_gram_serial(const RowMatrix& A, const RowMatrix& B, double beta);

// -----------------------------------------------------------------------------
// Greedy parameter fitting
// -----------------------------------------------------------------------------

struct GreedyFit {
    ParamVector params;
    std::vector<std::size_t> chosen_bins;
    // peak[i] = max_j |b_j| before iteration i; peak.back() is the final residual peak.
    std::vector<double> peak;
    std::vector<double> residual;  // final weighted residual b over the bin centroids
};

// Greedily places each k at the centroid of the current largest weighted residual
// b = x/(x+1) * h * prod (x - k)/(x + k). Ties resolve to the smallest centroid.
GreedyFit fit_params_greedy(const ValueHistogram& hist, std::size_t n_terms);

ParamVector fit_params(const HistogramMatrix& X, std::size_t n_terms,
                       std::size_t bins = default_bins);
ParamVector fit_params(const ChunkSpec& spec, std::size_t n_terms, std::size_t bins = default_bins);

// -----------------------------------------------------------------------------
// Embedding and error formulas
// -----------------------------------------------------------------------------

// Writes c_1(x)..c_N(x) into out (size N).
void direct_coeffs(double x, const ParamVector& k, std::span<double> out);

// Per-dimension coefficient blocks, length N*d, dimension-major: out[j*N + q].
Eigen::VectorXd direct_embed(std::span<const double> x, const ParamVector& k);

// prod_q (x-k_q)(y-k_q)/((x+k_q)(y+k_q)) * 2xy/(x+y); 0 at x = y = 0.
double nterm_error_exact(double x, double y, const ParamVector& k);

// 2 * prod_q (x-k_q)/(x+k_q) * x/(x+1), signed.
double error_bound(double x, const ParamVector& k);

// Row-wise direct_embed, n x (N*d). OpenMP over rows.
RowMatrix embed_matrix(const RowMatrix& X, const ParamVector& k);
RowMatrix embed_matrix_serial(const RowMatrix& X, const ParamVector& k);

inline RowMatrix embed_matrix(const HistogramMatrix& X, const ParamVector& k) {
    return embed_matrix(X.values(), k);
}

}  // namespace chi2map
