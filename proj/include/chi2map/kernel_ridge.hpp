#pragma once

#include <Eigen/Dense>

#include "chi2map/histio.hpp"

namespace chi2map {

// Ridge regression with an unpenalized intercept, solved in the dual:
//   alpha = (Kc + lambda I)^-1 (Y - mean(Y)),  Kc = (I - 11^T/n) K (I - 11^T/n)
// and predictions on test rows use the same centering. With K = Z Z^T this is
// exactly the primal ridge fit on centered features Z.
Eigen::MatrixXd centered_kernel_ridge_predict(const Eigen::MatrixXd& K_train,
                                              const Eigen::MatrixXd& K_test_train,
                                              const RowMatrix& Y, double lambda);

// Fraction of rows whose argmax matches the class index.
double argmax_accuracy(const Eigen::MatrixXd& scores, const std::vector<int>& truth);

}  // namespace chi2map
