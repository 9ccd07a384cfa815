#include "chi2map/model_io.hpp"

#include <fstream>

#include "chi2map/binio.hpp"

namespace chi2map {

namespace {

constexpr char kModelMagic[9] = "CHI2MDL1";
constexpr std::uint64_t kVersion = 1;
constexpr std::uint64_t kHasMoments = 1;
constexpr std::uint64_t kHasRidge = 2;

using binio::get_matrix;
using binio::get_u64;
using binio::put_matrix;
using binio::put_u64;

Eigen::VectorXd get_vector(std::istream& in, const std::string& what) {
    Eigen::MatrixXd m = get_matrix<Eigen::MatrixXd>(in, what);
    if (m.cols() != 1 && m.size() != 0) throw ParseError(what + ": expected a column vector");
    return Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
}

void put_fingerprints(std::ostream& out, const std::vector<std::uint64_t>& f) {
    put_u64(out, f.size());
    for (auto v : f) put_u64(out, v);
}

std::vector<std::uint64_t> get_fingerprints(std::istream& in, const std::string& what) {
    const auto count = get_u64(in, what);
    if (count > 4096) throw ParseError(what + ": implausible fingerprint count");
    std::vector<std::uint64_t> f(count);
    for (auto& v : f) v = get_u64(in, what);
    return f;
}

}  // namespace

void write_model(const std::string& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    binio::put_magic(out, kModelMagic);
    put_u64(out, kVersion);
    put_u64(out, model.pipelines.size());
    for (const auto& p : model.pipelines) write_pipeline(out, p);
    put_u64(out, (model.moments ? kHasMoments : 0) | (model.ridge ? kHasRidge : 0));

    put_matrix(out, model.pca.U);
    put_matrix(out, model.pca.eigvals);
    put_matrix(out, model.pca.mean);
    put_u64(out, model.pca.n);
    put_fingerprints(out, model.pca.fingerprints);

    if (const auto& acc = model.moments) {
        put_matrix(out, acc->H);
        put_matrix(out, acc->m);
        put_matrix(out, acc->v);
        put_matrix(out, acc->y_sum);
        put_u64(out, acc->n);
        put_u64(out, acc->n_labeled);
        put_matrix(out, acc->H_unlabeled);
        put_matrix(out, acc->m_unlabeled);
        put_u64(out, acc->n_unlabeled);
        put_fingerprints(out, acc->fingerprints);
    }
    if (const auto& r = model.ridge) {
        put_matrix(out, r->w);
        put_matrix(out, r->bias);
        binio::put_f64(out, r->lambda);
        put_matrix(out, r->w_orig);
        put_matrix(out, r->label_mean);
        put_matrix(out, r->offset);
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

ModelFile read_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    const std::string what = "model '" + path + "'";
    binio::expect_magic(in, kModelMagic, what);
    if (get_u64(in, what) != kVersion) throw ParseError(what + ": unsupported version");

    ModelFile model;
    const auto count = get_u64(in, what);
    if (count > 4096) throw ParseError(what + ": implausible pipeline count");
    for (std::uint64_t i = 0; i < count; ++i) model.pipelines.push_back(read_pipeline(in, what));
    const auto flags = get_u64(in, what);

    model.pca.U = get_matrix<Eigen::MatrixXd>(in, what);
    model.pca.eigvals = get_vector(in, what);
    model.pca.mean = get_vector(in, what);
    model.pca.n = get_u64(in, what);
    model.pca.fingerprints = get_fingerprints(in, what);

    if (flags & kHasMoments) {
        MomentAccumulator acc;
        acc.H = get_matrix<Eigen::MatrixXd>(in, what);
        acc.m = get_vector(in, what);
        acc.v = get_matrix<Eigen::MatrixXd>(in, what);
        acc.y_sum = get_vector(in, what);
        acc.n = get_u64(in, what);
        acc.n_labeled = get_u64(in, what);
        acc.H_unlabeled = get_matrix<Eigen::MatrixXd>(in, what);
        acc.m_unlabeled = get_vector(in, what);
        acc.n_unlabeled = get_u64(in, what);
        acc.fingerprints = get_fingerprints(in, what);
        model.moments = std::move(acc);
    }
    if (flags & kHasRidge) {
        RidgeModel r;
        r.w = get_matrix<Eigen::MatrixXd>(in, what);
        r.bias = get_vector(in, what);
        r.lambda = binio::get_f64(in, what);
        r.w_orig = get_matrix<Eigen::MatrixXd>(in, what);
        r.label_mean = get_vector(in, what);
        r.offset = get_vector(in, what);
        model.ridge = std::move(r);
    }
    if (model.pca.U.rows() != static_cast<Eigen::Index>(total_output_dim(model.pipelines))) {
        throw ConsistencyError(what + ": PCA width does not match its pipelines");
    }
    return model;
}

}  // namespace chi2map
