#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "chi2map/histio.hpp"
#include "chi2map/pipeline.hpp"

// =============================================================================
// Out-of-core PCA on random features and quadratic-loss learning after PCA.
//
// Only the moments H = sum Z^T Z, m = sum Z^T 1 and v = sum Z^T y are kept while
// the data streams through in chunks; memory is O(chunk_rows * D + D^2)
// regardless of the number of rows. Chunks are reduced in index order.
// =============================================================================

namespace chi2map {

// Moments of a feature stream. Unlabeled rows (semi-supervised PCA) enter H, m
// and n but never v; their share of H and m is tracked separately so the
// labeled-only Hessian can be recovered for regression.
struct MomentAccumulator {
    Eigen::MatrixXd H;        // D x D, lower triangle authoritative until hessian()
    Eigen::VectorXd m;        // D
    Eigen::MatrixXd v;        // D x c, labeled rows only
    Eigen::VectorXd y_sum;    // c, labeled rows only
    std::size_t n = 0;        // all rows
    std::size_t n_labeled = 0;

    Eigen::MatrixXd H_unlabeled;  // empty until add_unlabeled()
    Eigen::VectorXd m_unlabeled;
    std::size_t n_unlabeled = 0;

    std::vector<std::uint64_t> fingerprints;  // pipelines that produced the features

    MomentAccumulator() = default;
    MomentAccumulator(std::size_t dim, std::size_t classes);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m.size()); }
    std::size_t classes() const noexcept { return static_cast<std::size_t>(y_sum.size()); }

    void add(const RowMatrix& Z, const RowMatrix& Y);
    void add_unlabeled(const RowMatrix& Z);

    // Full symmetric sum Z^T Z over all rows.
    Eigen::MatrixXd hessian() const;
    // H - m m^T / n.
    Eigen::MatrixXd centered_hessian() const;
};

// Aligned chunk sources: one histogram matrix per pipeline plus optional labels.
struct DataStream {
    std::vector<ChunkSpec> inputs;
    std::optional<ChunkSpec> labels;
};

// Single pass: transform each chunk with the pipelines, fold into the moments.
MomentAccumulator accumulate(const DataStream& data, const std::vector<FeaturePipeline>& pipelines);
// Adds rows to H, m, n only.
void accumulate_unlabeled(MomentAccumulator& acc, const DataStream& data,
                          const std::vector<FeaturePipeline>& pipelines);

// Moments of an already computed feature stream.
MomentAccumulator accumulate_features(const ChunkSpec& features, const ChunkSpec* labels);
// Reference: plain loops, no BLAS, no threads.
MomentAccumulator accumulate_features_serial(const ChunkSpec& features, const ChunkSpec* labels);

struct PCAModel {
    Eigen::MatrixXd U;        // D x K, orthonormal columns
    Eigen::VectorXd eigvals;  // K, descending, >= 0
    Eigen::VectorXd mean;     // m / n
    std::size_t n = 0;
    std::vector<std::uint64_t> fingerprints;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(U.rows()); }
    std::size_t kept() const noexcept { return static_cast<std::size_t>(U.cols()); }
};

// Eigen-decomposition of H - m m^T / n; keeps the K leading eigenpairs.
// Eigenvectors are signed so their first component above 1e-10 in magnitude is positive;
// negative round-off eigenvalues are clamped to 0.
PCAModel eig_centered(const MomentAccumulator& acc, std::size_t keep);

struct RidgeModel {
    Eigen::MatrixXd w;           // K x c, in the projected space
    Eigen::VectorXd bias;        // c
    double lambda = 0.0;
    Eigen::MatrixXd w_orig;      // D x c, U * w
    Eigen::VectorXd label_mean;  // c
    Eigen::VectorXd offset;      // K, projected-space centering correction (0 for the plain case)
};

// Ridge regression on the projected features, using only the moments.
// Without unlabeled rows the projected Hessian is diag(eigvals) and w_j = v'_j / (eig_j + lambda).
RidgeModel ridge_after_pca(const MomentAccumulator& acc, const PCAModel& pca, double lambda);

// Second pass over the data: project each chunk with the fitted PCA, accumulate
// the projected Hessian and right-hand side, solve. `pca` must come from the same pipelines.
RidgeModel two_stage_multikernel(const DataStream& data, const std::vector<FeaturePipeline>& pipelines,
                                 const PCAModel& pca, double lambda);

// Z * w_orig + bias; no projection needed.
Eigen::MatrixXd predict(const RidgeModel& model, const PCAModel& pca, const RowMatrix& Z);
// ((Z - mean) U - offset) w + label_mean; the explicit-projection path.
Eigen::MatrixXd predict_projected(const RidgeModel& model, const PCAModel& pca, const RowMatrix& Z);

// Shifts each column so its rank-th highest score (1-based) becomes 0.
Eigen::MatrixXd calibrate_scores(const Eigen::MatrixXd& scores, std::size_t rank);

}  // namespace chi2map
