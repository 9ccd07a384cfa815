#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chi2map/oocpca.hpp"
#include "chi2map/pipeline.hpp"

// Model container (CHI2MDL1), little-endian:
//   magic, u64 version (1), u64 pipeline count, pipelines (method, terms,
//   input_dim, k values, CHI2RFB1 basis), u64 flags (1 = moments, 2 = ridge),
//   PCA (U, eigvals, mean, n, fingerprints), [moments], [ridge].
// Matrices are stored as u64 rows, u64 cols, then column-major values.

namespace chi2map {

struct ModelFile {
    std::vector<FeaturePipeline> pipelines;
    PCAModel pca;
    std::optional<MomentAccumulator> moments;
    std::optional<RidgeModel> ridge;
};

void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

}  // namespace chi2map
