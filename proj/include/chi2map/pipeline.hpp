#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chi2map/chi2direct.hpp"
#include "chi2map/histio.hpp"
#include "chi2map/rfmap.hpp"

namespace chi2map {

enum class EmbedMethod { direct, chebyshev };

EmbedMethod parse_method(const std::string& name);
std::string to_string(EmbedMethod method);

// Histogram -> chi2 embedding -> random Fourier features, for one descriptor type.
struct FeaturePipeline {
    EmbedMethod method = EmbedMethod::direct;
    std::size_t terms = 5;
    ParamVector params;  // direct only
    std::size_t input_dim = 0;
    RFBasis basis;

    std::size_t embed_dim() const noexcept;
    std::size_t output_dim() const noexcept { return basis.dims; }

    RowMatrix embed(const RowMatrix& X) const;
    RowMatrix transform(const RowMatrix& X) const;

    // Stable hash of everything that determines the transform.
    std::uint64_t fingerprint() const;
};

std::size_t embedding_width(EmbedMethod method, std::size_t terms, std::size_t input_dim);

FeaturePipeline make_pipeline(EmbedMethod method, std::size_t terms, ParamVector params,
                              std::size_t input_dim, std::size_t rf_dims, double gamma,
                              std::uint64_t seed);

// Concatenates each pipeline's features, [Z^(1) Z^(2) ...].
RowMatrix transform_all(const std::vector<FeaturePipeline>& pipelines,
                        const std::vector<RowMatrix>& inputs);

std::size_t total_output_dim(const std::vector<FeaturePipeline>& pipelines);

void write_pipeline(std::ostream& out, const FeaturePipeline& p);
FeaturePipeline read_pipeline(std::istream& in, const std::string& what);

}  // namespace chi2map
