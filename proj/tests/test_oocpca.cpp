#include <cmath>
#include <random>

#include "doctest.h"
#include "chi2map/oocpca.hpp"
#include "chi2map/pipeline.hpp"
#include "oracles.hpp"
#include "tmpdir.hpp"

using namespace chi2map;
using doctest::Approx;

namespace {

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

RowMatrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RowMatrix Z(n, d);
    for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = g(rng);
    return Z;
}

// Features with a decaying spectrum so eigenvalues are well separated.
RowMatrix anisotropic(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    RowMatrix Z = gaussian(n, d, seed);
    for (Eigen::Index j = 0; j < d; ++j) Z.col(j) *= std::pow(0.8, static_cast<double>(j));
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(d, d, seed + 1)).householderQ();
    RowMatrix out = Z * Q;
    out.rowwise() += Eigen::RowVectorXd::LinSpaced(d, 0.5, -0.5);
    return out;
}

MomentAccumulator moments(const RowMatrix& Z, const RowMatrix& Y, std::size_t chunk) {
    const auto fs = ChunkSpec::from_memory(Z, chunk);
    const auto ls = ChunkSpec::from_memory(Y, chunk, MatrixKind::labels);
    return accumulate_features(fs, &ls);
}

FeaturePipeline small_pipeline(EmbedMethod method, std::size_t dims, std::uint64_t seed,
                               std::size_t d = 6) {
    const ParamVector k = method == EmbedMethod::direct ? ParamVector({0.1, 0.02, 0.4}) : ParamVector();
    return make_pipeline(method, 3, k, d, dims, 0.75, seed);
}

}  // namespace

TEST_SUITE("oocpca") {

TEST_CASE("moments: single chunk equals the dense products") {
    const RowMatrix Z = gaussian(50, 7, 1);
    const RowMatrix Y = oracle::random_labels(50, 3, 2);
    const auto acc = moments(Z, Y, 50);
    const Eigen::MatrixXd Zd = Z;
    CHECK(rel(acc.hessian(), Zd.transpose() * Zd) < 1e-14);
    CHECK(rel(acc.m, Zd.colwise().sum().transpose()) < 1e-14);
    CHECK(rel(acc.v, Zd.transpose() * Eigen::MatrixXd(Y)) < 1e-14);
    CHECK(acc.n == 50);
    CHECK(acc.hessian() == acc.hessian().transpose());
}

TEST_CASE("moments: chunking, additivity and the serial reference") {
    const RowMatrix Z = gaussian(301, 9, 3);
    const RowMatrix Y = oracle::random_labels(301, 2, 4);
    const auto one = moments(Z, Y, 301);
    const auto seven = moments(Z, Y, 43);
    CHECK(rel(seven.hessian(), one.hessian()) < 1e-9);
    CHECK(rel(seven.m, one.m) < 1e-9);
    CHECK(rel(seven.v, one.v) < 1e-9);

    // Fixed reduction order: identical chunking is bitwise reproducible.
    CHECK(moments(Z, Y, 43).H == seven.H);

    MomentAccumulator split(9, 2);
    split.add(Z.topRows(100), Y.topRows(100));
    split.add(Z.bottomRows(201), Y.bottomRows(201));
    CHECK(rel(split.hessian(), one.hessian()) < 1e-12);

    const auto fs = ChunkSpec::from_memory(Z, 43);
    const auto ls = ChunkSpec::from_memory(Y, 43, MatrixKind::labels);
    const auto ser = accumulate_features_serial(fs, &ls);
    CHECK(rel(ser.hessian(), one.hessian()) < 1e-12);
    CHECK(rel(ser.v, one.v) < 1e-12);
    CHECK(ser.y_sum == one.y_sum);
}

TEST_CASE("moments: zero rows, PSD centered Hessian, alignment errors") {
    const auto z = moments(RowMatrix::Zero(5, 4), oracle::random_labels(5, 2, 1), 2);
    CHECK(z.hessian().isZero(0.0));
    CHECK(z.m.isZero(0.0));
    CHECK(z.v.isZero(0.0));
    CHECK(z.n == 5);

    const RowMatrix Z = gaussian(80, 6, 5);
    const auto acc = moments(Z, oracle::random_labels(80, 2, 6), 16);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc.centered_hessian());
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);

    const RowMatrix Ybad = oracle::random_labels(79, 2, 6);
    const auto fs = ChunkSpec::from_memory(Z, 16);
    const auto ls = ChunkSpec::from_memory(Ybad, 16, MatrixKind::labels);
    CHECK_THROWS_AS(accumulate_features(fs, &ls), AlignmentError);
}

TEST_CASE("eig_centered: agreement with dense SVD, orthonormality, reconstruction") {
    const RowMatrix Z = anisotropic(400, 12, 7);
    const RowMatrix Y = oracle::random_labels(400, 2, 8);
    const auto acc = moments(Z, Y, 64);
    const auto pca = eig_centered(acc, 12);
    const auto dense = oracle::dense_pipeline(Z, Y, 12, 1.0);
    CHECK(rel(pca.eigvals, dense.eigvals) < 1e-8);
    CHECK(rel(pca.U, dense.U) < 1e-8);
    CHECK((pca.U.transpose() * pca.U - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index i = 1; i < 12; ++i) CHECK(pca.eigvals[i] <= pca.eigvals[i - 1]);
    const Eigen::MatrixXd Hc = acc.centered_hessian();
    const Eigen::MatrixXd rec = pca.U * pca.eigvals.asDiagonal() * pca.U.transpose();
    CHECK((Hc - rec).norm() / Hc.norm() <= 1e-8);
    for (Eigen::Index j = 0; j < 12; ++j) {
        Eigen::Index first = 0;
        while (std::abs(pca.U(first, j)) <= 1e-10) ++first;
        CHECK(pca.U(first, j) > 0.0);
    }
}

TEST_CASE("eig_centered: degenerate inputs") {
    RowMatrix same(10, 4);
    same.rowwise() = Eigen::RowVector4d(0.1, -0.2, 0.3, 0.4);
    const auto pca = eig_centered(moments(same, oracle::random_labels(10, 1, 1), 3), 4);
    CHECK(pca.eigvals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pca.eigvals.minCoeff() >= 0.0);

    const auto one = moments(gaussian(1, 3, 1), oracle::random_labels(1, 1, 1), 1);
    CHECK_THROWS_AS(eig_centered(one, 2), DegenerateError);
    const auto acc = moments(gaussian(10, 3, 1), oracle::random_labels(10, 1, 1), 5);
    CHECK_THROWS_AS(eig_centered(acc, 4), ParameterError);
    CHECK_THROWS_AS(eig_centered(acc, 0), ParameterError);
}

TEST_CASE("eig_centered: isotropic data gives nearly equal eigenvalues") {
    const RowMatrix Z = gaussian(10000, 8, 11);
    const auto pca = eig_centered(moments(Z, oracle::random_labels(10000, 1, 2), 1000), 8);
    CHECK((pca.eigvals.maxCoeff() - pca.eigvals.minCoeff()) / pca.eigvals.maxCoeff() < 0.1);
}

TEST_CASE("projection with all components preserves the centered Gram") {
    const RowMatrix Z = anisotropic(60, 10, 13);
    const auto pca = eig_centered(moments(Z, oracle::random_labels(60, 1, 1), 7), 10);
    const Eigen::MatrixXd Zc = Z.rowwise() - pca.mean.transpose();
    const Eigen::MatrixXd P = Zc * pca.U;
    const Eigen::MatrixXd G = Zc * Zc.transpose();
    CHECK((P * P.transpose() - G).norm() / G.norm() <= 1e-8);
}

TEST_CASE("ridge: diagonal solve, dense oracle, both prediction paths") {
    const RowMatrix Z = anisotropic(500, 15, 17);
    const RowMatrix Y = oracle::random_labels(500, 3, 18);
    const auto acc = moments(Z, Y, 77);
    const auto pca = eig_centered(acc, 9);

    const auto r0 = ridge_after_pca(acc, pca, 0.0);
    const Eigen::MatrixXd vprime =
        pca.U.transpose() * acc.v - (pca.U.transpose() * acc.m) * acc.y_sum.transpose() / 500.0;
    for (Eigen::Index i = 0; i < 9; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) CHECK(r0.w(i, j) == Approx(vprime(i, j) / pca.eigvals[i]).epsilon(1e-14));

    const RowMatrix Znew = anisotropic(40, 15, 19);
    for (double lambda : {0.0, 0.5, 30.0}) {
        CAPTURE(lambda);
        const auto r = ridge_after_pca(acc, pca, lambda);
        const auto dense = oracle::dense_pipeline(Z, Y, 9, lambda);
        CHECK(rel(predict(r, pca, Znew), dense.predict(Znew)) < 1e-6);
        CHECK(rel(predict(r, pca, Znew), predict_projected(r, pca, Znew)) < 1e-10);
    }
    CHECK_THROWS_AS(predict(r0, pca, RowMatrix::Zero(2, 14)), DimensionError);
    CHECK_THROWS_AS(ridge_after_pca(acc, pca, -1.0), ParameterError);
}

TEST_CASE("ridge: mean row scores the label mean; huge lambda leaves only the bias") {
    const RowMatrix Z = anisotropic(200, 8, 21);
    RowMatrix Y = oracle::random_labels(200, 2, 22);
    const auto acc = moments(Z, Y, 50);
    const auto pca = eig_centered(acc, 8);
    const auto r = ridge_after_pca(acc, pca, 1.0);
    const RowMatrix mean_row = pca.mean.transpose();
    CHECK(rel(predict(r, pca, mean_row).transpose(), r.label_mean) < 1e-10);

    // Centered labels: the mean row scores 0.
    Y.rowwise() -= Y.colwise().mean();
    const auto accc = moments(Z, Y, 50);
    const auto rc = ridge_after_pca(accc, pca, 1.0);
    CHECK(predict(rc, pca, mean_row).cwiseAbs().maxCoeff() < 1e-12);

    const auto big = ridge_after_pca(acc, pca, 1e15);
    CHECK(big.w.cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd s = predict(big, pca, Z.topRows(5));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(rel(s.row(i).transpose(), big.bias) < 1e-8);
}

TEST_CASE("ridge: a zero eigenvalue with lambda = 0 is singular and names the index") {
    RowMatrix Z = gaussian(30, 5, 23);
    Z.col(4) = Z.col(0);  // rank deficient
    const auto acc = moments(Z, oracle::random_labels(30, 1, 1), 10);
    const auto pca = eig_centered(acc, 5);
    try {
        ridge_after_pca(acc, pca, 0.0);
        FAIL("singular system solved");
    } catch (const SingularError& e) {
        CHECK(e.index() == 4);
    }
    CHECK_NOTHROW(ridge_after_pca(acc, pca, 1e-3));
}

TEST_CASE("ridge: joint classes equal independent solves") {
    const RowMatrix Z = anisotropic(150, 10, 25);
    const RowMatrix Y = oracle::random_labels(150, 3, 26);
    const auto pca = eig_centered(moments(Z, Y, 150), 6);
    const auto joint = ridge_after_pca(moments(Z, Y, 30), pca, 2.0);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const RowMatrix yj = Y.col(j);
        const auto single = ridge_after_pca(moments(Z, yj, 30), pca, 2.0);
        CHECK(rel(single.w, joint.w.col(j)) < 1e-12);
        CHECK(single.bias[0] == Approx(joint.bias[j]).epsilon(1e-12));
    }
}

TEST_CASE("pipeline accumulation: files, memory and chunkings agree") {
    TempDir dir;
    const RowMatrix X = oracle::random_histograms(120, 6, 27, 0.2);
    const RowMatrix Y = oracle::random_labels(120, 2, 28);
    write_matrix(dir.file("x.bin"), X, Format::binary);
    write_matrix(dir.file("y.csv"), Y, Format::csv);
    const std::vector<FeaturePipeline> pipes{small_pipeline(EmbedMethod::direct, 40, 1)};

    DataStream mem{{ChunkSpec::from_memory(X, 120)}, ChunkSpec::from_memory(Y, 120, MatrixKind::labels)};
    DataStream file{{ChunkSpec::from_file(dir.file("x.bin"), Format::binary, 17)},
                    ChunkSpec::from_file(dir.file("y.csv"), Format::csv, 17, MatrixKind::labels)};
    const auto a = accumulate(mem, pipes);
    const auto b = accumulate(file, pipes);
    CHECK(rel(a.hessian(), b.hessian()) < 1e-9);
    CHECK(rel(a.v, b.v) < 1e-9);
    CHECK(a.fingerprints == b.fingerprints);

    const RowMatrix Z = pipes[0].transform(X);
    const Eigen::MatrixXd Zd = Z;
    CHECK(rel(a.hessian(), Zd.transpose() * Zd) < 1e-12);

    const RowMatrix Yshort = Y.topRows(100);
    DataStream bad{{ChunkSpec::from_memory(X, 30)}, ChunkSpec::from_memory(Yshort, 30, MatrixKind::labels)};
    CHECK_THROWS_AS(accumulate(bad, pipes), AlignmentError);
}

TEST_CASE("semi-supervised moments never read test labels") {
    const RowMatrix Xtr = oracle::random_histograms(150, 6, 29);
    const RowMatrix Xte = oracle::random_histograms(90, 6, 30);
    const RowMatrix Y = oracle::random_labels(150, 2, 31);
    const std::vector<FeaturePipeline> pipes{small_pipeline(EmbedMethod::chebyshev, 30, 2)};
    DataStream train{{ChunkSpec::from_memory(Xtr, 40)}, ChunkSpec::from_memory(Y, 40, MatrixKind::labels)};
    DataStream test{{ChunkSpec::from_memory(Xte, 40)}, std::nullopt};

    const auto labeled = accumulate(train, pipes);
    auto pooled = labeled;
    accumulate_unlabeled(pooled, test, pipes);
    CHECK(pooled.n == 240);
    CHECK(pooled.n_unlabeled == 90);
    CHECK(pooled.v == labeled.v);
    CHECK(pooled.y_sum == labeled.y_sum);

    const auto pca_l = eig_centered(labeled, 12);
    const auto pca_p = eig_centered(pooled, 12);
    CHECK(rel(pca_l.U, pca_p.U) > 1e-6);

    // Ridge on the pooled PCA equals dense ridge on labeled rows projected with that PCA.
    const double lambda = 0.3;
    const auto r = ridge_after_pca(pooled, pca_p, lambda);
    const Eigen::MatrixXd Ztr = pipes[0].transform(Xtr);
    const Eigen::RowVectorXd mu = Ztr.colwise().mean();
    const Eigen::MatrixXd P = (Ztr.rowwise() - mu) * pca_p.U;
    const Eigen::RowVectorXd ybar = Eigen::MatrixXd(Y).colwise().mean();
    const Eigen::MatrixXd w = (P.transpose() * P + lambda * Eigen::MatrixXd::Identity(12, 12))
                                  .ldlt()
                                  .solve(P.transpose() * (Eigen::MatrixXd(Y).rowwise() - ybar));
    CHECK(rel(r.w, w) < 1e-8);
    const RowMatrix Zte = pipes[0].transform(Xte);
    Eigen::MatrixXd want = ((Eigen::MatrixXd(Zte).rowwise() - mu) * pca_p.U) * w;
    want.rowwise() += ybar;
    CHECK(rel(predict(r, pca_p, Zte), want) < 1e-8);
    CHECK(rel(predict(r, pca_p, Zte), predict_projected(r, pca_p, Zte)) < 1e-10);

    const std::vector<FeaturePipeline> other{small_pipeline(EmbedMethod::chebyshev, 30, 3)};
    auto copy = labeled;
    CHECK_THROWS_AS(accumulate_unlabeled(copy, test, other), ConsistencyError);
}

TEST_CASE("two-stage with one kernel reproduces the moment-only solve") {
    const RowMatrix X = oracle::random_histograms(200, 6, 33, 0.1);
    const RowMatrix Y = oracle::random_labels(200, 3, 34);
    const std::vector<FeaturePipeline> pipes{small_pipeline(EmbedMethod::direct, 24, 4)};
    DataStream data{{ChunkSpec::from_memory(X, 45)}, ChunkSpec::from_memory(Y, 45, MatrixKind::labels)};
    const auto acc = accumulate(data, pipes);
    const auto pca = eig_centered(acc, 24);
    const auto a4 = ridge_after_pca(acc, pca, 0.7);
    const auto a5 = two_stage_multikernel(data, pipes, pca, 0.7);
    CHECK(rel(a5.w, a4.w) < 1e-8);
    const RowMatrix Znew = pipes[0].transform(oracle::random_histograms(20, 6, 35));
    CHECK(rel(predict(a5, pca, Znew), predict(a4, pca, Znew)) < 1e-8);
    CHECK(rel(predict_projected(a5, pca, Znew), predict(a5, pca, Znew)) < 1e-10);
}

TEST_CASE("two-stage with two kernels matches the dense pipeline") {
    const RowMatrix X1 = oracle::random_histograms(180, 6, 36, 0.2);
    const RowMatrix X2 = oracle::random_histograms(180, 4, 37);
    const RowMatrix Y = oracle::random_labels(180, 2, 38);
    const std::vector<FeaturePipeline> pipes{small_pipeline(EmbedMethod::direct, 30, 5),
                                             small_pipeline(EmbedMethod::chebyshev, 20, 6, 4)};
    DataStream data{{ChunkSpec::from_memory(X1, 50), ChunkSpec::from_memory(X2, 50)},
                    ChunkSpec::from_memory(Y, 50, MatrixKind::labels)};
    const auto acc = accumulate(data, pipes);
    CHECK(acc.dim() == 50);
    const auto pca = eig_centered(acc, 18);
    const auto model = two_stage_multikernel(data, pipes, pca, 0.4);

    const Eigen::MatrixXd Z = transform_all(pipes, {X1, X2});
    const auto dense = oracle::dense_pipeline(Z, Y, 18, 0.4);
    CHECK(rel(pca.eigvals, dense.eigvals) < 1e-8);
    const RowMatrix Znew = transform_all(pipes, {oracle::random_histograms(25, 6, 39), oracle::random_histograms(25, 4, 40)});
    CHECK(rel(predict(model, pca, Znew), dense.predict(Znew)) < 1e-6);

    DataStream zero{{ChunkSpec::from_memory(X1, 50), ChunkSpec::from_memory(X2, 50)}, std::nullopt};
    const RowMatrix Y0 = RowMatrix::Zero(180, 2);
    zero.labels = ChunkSpec::from_memory(Y0, 50, MatrixKind::labels);
    CHECK(two_stage_multikernel(zero, pipes, pca, 0.4).w.cwiseAbs().maxCoeff() < 1e-13);

    const std::vector<FeaturePipeline> reseeded{small_pipeline(EmbedMethod::direct, 30, 99),
                                                small_pipeline(EmbedMethod::chebyshev, 20, 6, 4)};
    CHECK_THROWS_AS(two_stage_multikernel(data, reseeded, pca, 0.4), ConsistencyError);
}

TEST_CASE("calibration: order statistic, idempotence, shift invariance") {
    Eigen::MatrixXd S = gaussian(50, 4, 41);
    const auto C = calibrate_scores(S, 5);
    for (Eigen::Index j = 0; j < 4; ++j) {
        std::vector<double> col(C.col(j).data(), C.col(j).data() + 50);
        std::sort(col.begin(), col.end(), std::greater<>());
        CHECK(col[4] == 0.0);
    }
    CHECK(calibrate_scores(C, 5) == C);
    Eigen::MatrixXd shifted = S;
    shifted.col(2).array() += 10.0;
    CHECK((calibrate_scores(shifted, 5) - C).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(calibrate_scores(S, 0), ParameterError);
    CHECK_THROWS_AS(calibrate_scores(S, 51), ParameterError);
}

}  // TEST_SUITE
