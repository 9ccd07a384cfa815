#include "chi2map/oocpca.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace chi2map {

namespace {

Eigen::MatrixXd full_from_lower(const Eigen::MatrixXd& lower) {
    Eigen::MatrixXd full = lower;
    full.triangularView<Eigen::StrictlyUpper>() = full.transpose();
    return full;
}

// Opens one reader per input (plus labels) and checks they walk the same rows.
struct LockstepReaders {
    std::vector<ChunkReader> inputs;
    std::optional<ChunkReader> labels;

    explicit LockstepReaders(const DataStream& data) {
        if (data.inputs.empty()) throw AlignmentError("data stream has no inputs");
        const auto& first = data.inputs.front();
        auto check = [&](const ChunkSpec& s, const char* what) {
            if (s.total_rows != first.total_rows || s.chunk_rows != first.chunk_rows) {
                throw AlignmentError(std::string(what) + " chunking (" + std::to_string(s.total_rows) +
                                     " rows / " + std::to_string(s.chunk_rows) +
                                     " per chunk) does not match the first input (" +
                                     std::to_string(first.total_rows) + " / " +
                                     std::to_string(first.chunk_rows) + ")");
            }
        };
        for (const auto& s : data.inputs) {
            check(s, "input");
            inputs.emplace_back(s);
        }
        if (data.labels) {
            check(*data.labels, "label");
            auto spec = *data.labels;
            spec.kind = MatrixKind::labels;
            labels.emplace(spec);
        }
    }

    std::size_t classes() const { return labels ? labels->cols() : 0; }

    // False once exhausted.
    bool next(std::vector<RowMatrix>& x, RowMatrix& y) {
        x.clear();
        for (auto& r : inputs) {
            auto chunk = r.next();
            if (!chunk) return false;
            x.push_back(std::move(*chunk));
        }
        if (labels) {
            auto chunk = labels->next();
            if (!chunk) throw AlignmentError("label stream ended early");
            y = std::move(*chunk);
        } else {
            y.resize(x.front().rows(), 0);
        }
        return true;
    }
};

void check_pipelines(const DataStream& data, const std::vector<FeaturePipeline>& pipelines) {
    if (pipelines.size() != data.inputs.size()) {
        throw AlignmentError("need one input matrix per pipeline (" + std::to_string(pipelines.size()) +
                             " pipelines, " + std::to_string(data.inputs.size()) + " inputs)");
    }
}

std::vector<std::uint64_t> fingerprints_of(const std::vector<FeaturePipeline>& pipelines) {
    std::vector<std::uint64_t> out;
    for (const auto& p : pipelines) out.push_back(p.fingerprint());
    return out;
}

// Solves (A) w = b for symmetric A, reporting the first vanishing pivot.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& b) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const auto& d = ldlt.vectorD();
    const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
    const double tol = scale * 1e-13 * static_cast<double>(A.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d[i] > tol)) {
            const auto perm = ldlt.transpositionsP().indices();
            throw SingularError("ridge system is singular", static_cast<std::size_t>(perm[i]));
        }
    }
    return ldlt.solve(b);
}

}  // namespace

// -----------------------------------------------------------------------------

MomentAccumulator::MomentAccumulator(std::size_t dim, std::size_t classes)
    : H(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      v(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(classes))),
      y_sum(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes))) {}

void MomentAccumulator::add(const RowMatrix& Z, const RowMatrix& Y) {
    if (static_cast<std::size_t>(Z.cols()) != dim()) {
        throw DimensionError("feature chunk has " + std::to_string(Z.cols()) + " columns, expected " +
                             std::to_string(dim()));
    }
    if (Y.rows() != Z.rows()) {
        throw AlignmentError("label chunk has " + std::to_string(Y.rows()) + " rows, features have " +
                             std::to_string(Z.rows()));
    }
    if (static_cast<std::size_t>(Y.cols()) != classes()) {
        throw DimensionError("label chunk has " + std::to_string(Y.cols()) + " classes, expected " +
                             std::to_string(classes()));
    }
    H.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
    m.noalias() += Z.colwise().sum().transpose();
    if (Y.cols() > 0) {
        v.noalias() += Z.transpose() * Y;
        y_sum.noalias() += Y.colwise().sum().transpose();
    }
    n += static_cast<std::size_t>(Z.rows());
    n_labeled += static_cast<std::size_t>(Z.rows());
}

void MomentAccumulator::add_unlabeled(const RowMatrix& Z) {
    if (static_cast<std::size_t>(Z.cols()) != dim()) {
        throw DimensionError("feature chunk has " + std::to_string(Z.cols()) + " columns, expected " +
                             std::to_string(dim()));
    }
    if (H_unlabeled.size() == 0) {
        H_unlabeled = Eigen::MatrixXd::Zero(H.rows(), H.cols());
        m_unlabeled = Eigen::VectorXd::Zero(m.size());
    }
    H.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
    H_unlabeled.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
    const Eigen::VectorXd colsum = Z.colwise().sum().transpose();
    m += colsum;
    m_unlabeled += colsum;
    n += static_cast<std::size_t>(Z.rows());
    n_unlabeled += static_cast<std::size_t>(Z.rows());
}

Eigen::MatrixXd MomentAccumulator::hessian() const { return full_from_lower(H); }

Eigen::MatrixXd MomentAccumulator::centered_hessian() const {
    if (n == 0) throw DegenerateError("no rows accumulated");
    Eigen::MatrixXd Hc = hessian();
    Hc.noalias() -= (m * m.transpose()) / static_cast<double>(n);
    return Hc;
}

MomentAccumulator accumulate(const DataStream& data, const std::vector<FeaturePipeline>& pipelines) {
    check_pipelines(data, pipelines);
    LockstepReaders readers(data);
    MomentAccumulator acc(total_output_dim(pipelines), readers.classes());
    acc.fingerprints = fingerprints_of(pipelines);
    std::vector<RowMatrix> x;
    RowMatrix y;
    while (readers.next(x, y)) acc.add(transform_all(pipelines, x), y);
    return acc;
}

void accumulate_unlabeled(MomentAccumulator& acc, const DataStream& data,
                          const std::vector<FeaturePipeline>& pipelines) {
    check_pipelines(data, pipelines);
    if (fingerprints_of(pipelines) != acc.fingerprints) {
        throw ConsistencyError("unlabeled rows must use the same pipelines as the labeled pass");
    }
    DataStream unlabeled{data.inputs, std::nullopt};
    LockstepReaders readers(unlabeled);
    std::vector<RowMatrix> x;
    RowMatrix y;
    while (readers.next(x, y)) acc.add_unlabeled(transform_all(pipelines, x));
}

MomentAccumulator accumulate_features(const ChunkSpec& features, const ChunkSpec* labels) {
    DataStream data{{features}, labels ? std::optional<ChunkSpec>(*labels) : std::nullopt};
    data.inputs.front().kind = MatrixKind::labels;  // features may be negative
    LockstepReaders readers(data);
    MomentAccumulator acc(readers.inputs.front().cols(), readers.classes());
    std::vector<RowMatrix> x;
    RowMatrix y;
    while (readers.next(x, y)) acc.add(x.front(), y);
    return acc;
}

MomentAccumulator accumulate_features_serial(const ChunkSpec& features, const ChunkSpec* labels) {
    DataStream data{{features}, labels ? std::optional<ChunkSpec>(*labels) : std::nullopt};
    data.inputs.front().kind = MatrixKind::labels;
    LockstepReaders readers(data);
    const auto D = static_cast<Eigen::Index>(readers.inputs.front().cols());
    const auto c = static_cast<Eigen::Index>(readers.classes());
    MomentAccumulator acc(static_cast<std::size_t>(D), static_cast<std::size_t>(c));
    std::vector<RowMatrix> x;
    RowMatrix y;
    while (readers.next(x, y)) {
        const auto& Z = x.front();
        for (Eigen::Index r = 0; r < Z.rows(); ++r) {
            for (Eigen::Index a = 0; a < D; ++a) {
                const double za = Z(r, a);
                for (Eigen::Index b = 0; b <= a; ++b) acc.H(a, b) += za * Z(r, b);
                acc.m[a] += za;
                for (Eigen::Index j = 0; j < c; ++j) acc.v(a, j) += za * y(r, j);
            }
            for (Eigen::Index j = 0; j < c; ++j) acc.y_sum[j] += y(r, j);
        }
        acc.n += static_cast<std::size_t>(Z.rows());
        acc.n_labeled += static_cast<std::size_t>(Z.rows());
    }
    return acc;
}

// -----------------------------------------------------------------------------

PCAModel eig_centered(const MomentAccumulator& acc, std::size_t keep) {
    if (acc.n < 2) throw DegenerateError("PCA needs at least two rows, got " + std::to_string(acc.n));
    const auto D = acc.dim();
    if (keep < 1 || keep > D) {
        throw ParameterError("cannot keep " + std::to_string(keep) + " of " + std::to_string(D) +
                             " dimensions");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc.centered_hessian());
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition did not converge");

    const auto K = static_cast<Eigen::Index>(keep);
    const auto Di = static_cast<Eigen::Index>(D);
    PCAModel model;
    model.U.resize(Di, K);
    model.eigvals.resize(K);
    for (Eigen::Index i = 0; i < K; ++i) {
        const auto src = Di - 1 - i;  // ascending -> descending
        model.eigvals[i] = std::max(0.0, es.eigenvalues()[src]);
        Eigen::VectorXd u = es.eigenvectors().col(src);
        for (Eigen::Index r = 0; r < Di; ++r) {
            if (std::abs(u[r]) > 1e-10) {
                if (u[r] < 0.0) u = -u;
                break;
            }
        }
        model.U.col(i) = u;
    }
    model.mean = acc.m / static_cast<double>(acc.n);
    model.n = acc.n;
    model.fingerprints = acc.fingerprints;
    return model;
}

RidgeModel ridge_after_pca(const MomentAccumulator& acc, const PCAModel& pca, double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
    if (pca.dim() != acc.dim()) throw DimensionError("PCA model and moments have different widths");
    if (!acc.fingerprints.empty() && !pca.fingerprints.empty() && acc.fingerprints != pca.fingerprints) {
        throw ConsistencyError("PCA model was fitted with different pipelines");
    }
    if (acc.classes() == 0) throw ParameterError("moments carry no labels");
    const std::size_t n_lab = acc.n - acc.n_unlabeled;
    if (n_lab == 0) throw DegenerateError("no labeled rows");

    const auto& U = pca.U;
    const auto K = U.cols();
    const double inv_n = 1.0 / static_cast<double>(n_lab);
    RidgeModel model;
    model.lambda = lambda;
    model.label_mean = acc.y_sum * inv_n;

    Eigen::VectorXd mean_labeled;
    if (acc.n_unlabeled == 0) {
        // Projected Hessian is diag(eigvals): an O(K c) solve.
        mean_labeled = acc.m * inv_n;
        Eigen::MatrixXd vp = U.transpose() * acc.v;
        vp.noalias() -= (U.transpose() * acc.m) * (acc.y_sum.transpose() * inv_n);
        const double top = pca.eigvals.size() ? pca.eigvals.maxCoeff() : 0.0;
        const double tol = 1e-12 * std::max(top, std::numeric_limits<double>::min());
        model.w.resize(K, vp.cols());
        for (Eigen::Index i = 0; i < K; ++i) {
            const double denom = pca.eigvals[i] + lambda;
            if (!(denom > tol)) {
                throw SingularError("zero eigenvalue with lambda = 0", static_cast<std::size_t>(i));
            }
            model.w.row(i) = vp.row(i) / denom;
        }
    } else {
        // PCA saw unlabeled rows: regress on the labeled moments in the projected space.
        const Eigen::VectorXd m_lab = acc.m - acc.m_unlabeled;
        mean_labeled = m_lab * inv_n;
        Eigen::MatrixXd Hc = acc.hessian() - full_from_lower(acc.H_unlabeled);
        Hc.noalias() -= (m_lab * m_lab.transpose()) * inv_n;
        Eigen::MatrixXd Hp = U.transpose() * Hc * U;
        Hp.diagonal().array() += lambda;
        Eigen::MatrixXd rhs = acc.v;
        rhs.noalias() -= m_lab * (acc.y_sum.transpose() * inv_n);
        model.w = solve_spd(Hp, U.transpose() * rhs);
    }
    model.offset = U.transpose() * (mean_labeled - pca.mean);
    model.w_orig = U * model.w;
    model.bias = model.label_mean - model.w_orig.transpose() * mean_labeled;
    return model;
}

RidgeModel two_stage_multikernel(const DataStream& data, const std::vector<FeaturePipeline>& pipelines,
                                 const PCAModel& pca, double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
    check_pipelines(data, pipelines);
    if (fingerprints_of(pipelines) != pca.fingerprints) {
        throw ConsistencyError("second pass must reuse the pipelines (seeds, bases) of the PCA pass");
    }
    if (!data.labels) throw ParameterError("two-stage learning needs labels");
    LockstepReaders readers(data);
    const auto K = static_cast<Eigen::Index>(pca.kept());
    const auto c = static_cast<Eigen::Index>(readers.classes());
    Eigen::MatrixXd Hp = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd vp = Eigen::MatrixXd::Zero(K, c);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd y_sum = Eigen::VectorXd::Zero(c);
    std::size_t rows = 0;

    std::vector<RowMatrix> x;
    RowMatrix y;
    while (readers.next(x, y)) {
        RowMatrix Z = transform_all(pipelines, x);
        if (static_cast<std::size_t>(Z.cols()) != pca.dim()) {
            throw DimensionError("pipelines produce a different width than the PCA model");
        }
        Z.rowwise() -= pca.mean.transpose();
        const RowMatrix Zt = Z * pca.U;
        Hp.selfadjointView<Eigen::Lower>().rankUpdate(Zt.transpose());
        vp.noalias() += Zt.transpose() * y;
        s.noalias() += Zt.colwise().sum().transpose();
        y_sum.noalias() += y.colwise().sum().transpose();
        rows += static_cast<std::size_t>(Zt.rows());
    }
    const double inv_n = 1.0 / static_cast<double>(rows);
    Eigen::MatrixXd A = full_from_lower(Hp);
    A.noalias() -= (s * s.transpose()) * inv_n;
    A.diagonal().array() += lambda;
    Eigen::MatrixXd rhs = vp;
    rhs.noalias() -= s * (y_sum.transpose() * inv_n);

    RidgeModel model;
    model.lambda = lambda;
    model.w = solve_spd(A, rhs);
    model.label_mean = y_sum * inv_n;
    model.offset = s * inv_n;
    model.w_orig = pca.U * model.w;
    model.bias = model.label_mean - model.w_orig.transpose() * pca.mean -
                 model.w.transpose() * model.offset;
    return model;
}

Eigen::MatrixXd predict(const RidgeModel& model, const PCAModel& pca, const RowMatrix& Z) {
    if (static_cast<std::size_t>(Z.cols()) != pca.dim() || model.w_orig.rows() != Z.cols()) {
        throw DimensionError("features have " + std::to_string(Z.cols()) + " columns, model expects " +
                             std::to_string(model.w_orig.rows()));
    }
    Eigen::MatrixXd scores = Z * model.w_orig;
    scores.rowwise() += model.bias.transpose();
    return scores;
}

Eigen::MatrixXd predict_projected(const RidgeModel& model, const PCAModel& pca, const RowMatrix& Z) {
    if (static_cast<std::size_t>(Z.cols()) != pca.dim()) {
        throw DimensionError("features do not match the PCA model width");
    }
    RowMatrix centered = Z;
    centered.rowwise() -= pca.mean.transpose();
    Eigen::MatrixXd projected = centered * pca.U;
    projected.rowwise() -= model.offset.transpose();
    Eigen::MatrixXd scores = projected * model.w;
    scores.rowwise() += model.label_mean.transpose();
    return scores;
}

Eigen::MatrixXd calibrate_scores(const Eigen::MatrixXd& scores, std::size_t rank) {
    const auto rows = static_cast<std::size_t>(scores.rows());
    if (rank < 1 || rank > rows) {
        throw ParameterError("calibration rank " + std::to_string(rank) + " outside [1, " +
                             std::to_string(rows) + "]");
    }
    Eigen::MatrixXd out = scores;
    std::vector<double> column(rows);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        for (std::size_t i = 0; i < rows; ++i) column[i] = scores(static_cast<Eigen::Index>(i), j);
        const auto nth = column.begin() + static_cast<std::ptrdiff_t>(rank - 1);
        std::nth_element(column.begin(), nth, column.end(), std::greater<>());
        out.col(j).array() -= *nth;
    }
    return out;
}

}  // namespace chi2map
