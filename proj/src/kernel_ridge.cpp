#include "chi2map/kernel_ridge.hpp"

namespace chi2map {

Eigen::MatrixXd centered_kernel_ridge_predict(const Eigen::MatrixXd& K_train,
                                              const Eigen::MatrixXd& K_test_train,
                                              const RowMatrix& Y, double lambda) {
    const auto n = K_train.rows();
    if (K_train.cols() != n || K_test_train.cols() != n || Y.rows() != n) {
        throw DimensionError("kernel ridge operands are misaligned");
    }
    if (!(lambda > 0.0)) throw ParameterError("dual ridge needs lambda > 0");

    const Eigen::VectorXd col_mean = K_train.colwise().mean().transpose();
    const double grand_mean = col_mean.mean();
    Eigen::MatrixXd Kc = K_train;
    Kc.rowwise() -= col_mean.transpose();
    Kc.colwise() -= col_mean;
    Kc.array() += grand_mean;
    Kc.diagonal().array() += lambda;

    const Eigen::RowVectorXd y_mean = Y.colwise().mean();
    Eigen::MatrixXd Yc = Y;
    Yc.rowwise() -= y_mean;
    const Eigen::MatrixXd alpha = Kc.llt().solve(Yc);

    Eigen::MatrixXd Kt = K_test_train;
    const Eigen::VectorXd test_row_mean = Kt.rowwise().mean();
    Kt.rowwise() -= col_mean.transpose();
    Kt.colwise() -= test_row_mean;
    Kt.array() += grand_mean;

    Eigen::MatrixXd scores = Kt * alpha;
    scores.rowwise() += y_mean;
    return scores;
}

double argmax_accuracy(const Eigen::MatrixXd& scores, const std::vector<int>& truth) {
    if (static_cast<std::size_t>(scores.rows()) != truth.size() || truth.empty()) {
        throw DimensionError("scores and labels are misaligned");
    }
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        scores.row(i).maxCoeff(&best);
        if (best == truth[static_cast<std::size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace chi2map
