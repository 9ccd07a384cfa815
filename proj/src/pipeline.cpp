#include "chi2map/pipeline.hpp"

#include <bit>
#include <istream>
#include <ostream>

#include "chi2map/binio.hpp"
#include "chi2map/chebyshev.hpp"

namespace chi2map {

namespace {

// FNV-1a over 64-bit words.
struct Fnv {
    std::uint64_t h = 0xcbf29ce484222325ull;
    void add(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

EmbedMethod parse_method(const std::string& name) {
    if (name == "direct") return EmbedMethod::direct;
    if (name == "chebyshev" || name == "cheb") return EmbedMethod::chebyshev;
    throw ParameterError("unknown embedding method '" + name + "' (expected direct or chebyshev)");
}

std::string to_string(EmbedMethod method) {
    return method == EmbedMethod::direct ? "direct" : "chebyshev";
}

std::size_t embedding_width(EmbedMethod method, std::size_t terms, std::size_t input_dim) {
    return input_dim * (method == EmbedMethod::direct ? terms : terms + 1);
}

std::size_t FeaturePipeline::embed_dim() const noexcept {
    return embedding_width(method, terms, input_dim);
}

RowMatrix FeaturePipeline::embed(const RowMatrix& X) const {
    if (static_cast<std::size_t>(X.cols()) != input_dim) {
        throw DimensionError("pipeline expects " + std::to_string(input_dim) +
                             " input columns, got " + std::to_string(X.cols()));
    }
    return method == EmbedMethod::direct ? embed_matrix(X, params) : cheb_embed_matrix(X, terms);
}

RowMatrix FeaturePipeline::transform(const RowMatrix& X) const { return rf_transform(embed(X), basis); }

std::uint64_t FeaturePipeline::fingerprint() const {
    Fnv f;
    f.add(static_cast<std::uint64_t>(method));
    f.add(static_cast<std::uint64_t>(terms));
    f.add(static_cast<std::uint64_t>(input_dim));
    for (double k : params.values()) f.add(k);
    f.add(static_cast<std::uint64_t>(basis.embed_dim));
    f.add(static_cast<std::uint64_t>(basis.dims));
    f.add(basis.gamma);
    f.add(basis.seed);
    return f.h;
}

FeaturePipeline make_pipeline(EmbedMethod method, std::size_t terms, ParamVector params,
                              std::size_t input_dim, std::size_t rf_dims, double gamma,
                              std::uint64_t seed) {
    if (input_dim < 1) throw ParameterError("pipeline input dimension must be >= 1");
    if (method == EmbedMethod::direct) {
        if (terms < 1) throw ParameterError("direct embedding needs at least one term");
        if (params.size() != terms) {
            throw ParameterError("direct embedding with " + std::to_string(terms) + " terms got " +
                                 std::to_string(params.size()) + " parameters");
        }
    } else {
        params = ParamVector();
    }
    FeaturePipeline p;
    p.method = method;
    p.terms = terms;
    p.params = std::move(params);
    p.input_dim = input_dim;
    p.basis = sample_basis(p.embed_dim(), rf_dims, gamma, seed);
    return p;
}

std::size_t total_output_dim(const std::vector<FeaturePipeline>& pipelines) {
    std::size_t total = 0;
    for (const auto& p : pipelines) total += p.output_dim();
    return total;
}

RowMatrix transform_all(const std::vector<FeaturePipeline>& pipelines,
                        const std::vector<RowMatrix>& inputs) {
    if (pipelines.size() != inputs.size() || pipelines.empty()) {
        throw AlignmentError("need one input matrix per pipeline");
    }
    if (pipelines.size() == 1) return pipelines.front().transform(inputs.front());
    const auto rows = inputs.front().rows();
    RowMatrix Z(rows, static_cast<Eigen::Index>(total_output_dim(pipelines)));
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < pipelines.size(); ++i) {
        if (inputs[i].rows() != rows) throw AlignmentError("kernel inputs have different row counts");
        const auto width = static_cast<Eigen::Index>(pipelines[i].output_dim());
        Z.middleCols(offset, width) = pipelines[i].transform(inputs[i]);
        offset += width;
    }
    return Z;
}

void write_pipeline(std::ostream& out, const FeaturePipeline& p) {
    binio::put_u64(out, static_cast<std::uint64_t>(p.method));
    binio::put_u64(out, p.terms);
    binio::put_u64(out, p.input_dim);
    binio::put_u64(out, p.params.size());
    for (double k : p.params.values()) binio::put_f64(out, k);
    write_basis(out, p.basis);
}

FeaturePipeline read_pipeline(std::istream& in, const std::string& what) {
    FeaturePipeline p;
    const auto method = binio::get_u64(in, what);
    if (method > 1) throw ParseError(what + ": unknown embedding method tag");
    p.method = static_cast<EmbedMethod>(method);
    p.terms = binio::get_u64(in, what);
    p.input_dim = binio::get_u64(in, what);
    const auto nk = binio::get_u64(in, what);
    if (nk > 1u << 20) throw ParseError(what + ": implausible parameter count");
    std::vector<double> k(nk);
    for (auto& v : k) v = binio::get_f64(in, what);
    p.params = ParamVector(std::move(k));
    p.basis = read_basis(in, what);
    if (p.basis.embed_dim != p.embed_dim()) {
        throw ConsistencyError(what + ": basis width does not match the embedding");
    }
    return p;
}

}  // namespace chi2map
