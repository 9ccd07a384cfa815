#include "chi2map/synthetic.hpp"

#include <random>

namespace chi2map {

namespace {

template <typename Rng>
void dirichlet(Rng& rng, const std::vector<double>& alpha, double* out) {
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        std::gamma_distribution<double> g(alpha[j], 1.0);
        out[j] = g(rng);
        total += out[j];
    }
    if (total <= 0.0) {
        // Every gamma draw underflowed; fall back to the mean.
        double asum = 0.0;
        for (double a : alpha) asum += a;
        for (std::size_t j = 0; j < alpha.size(); ++j) out[j] = alpha[j] / asum;
        return;
    }
    for (std::size_t j = 0; j < alpha.size(); ++j) out[j] /= total;
}

}  // namespace

SyntheticTask make_dirichlet_task(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.rows == 0 || spec.dims == 0 || spec.classes < 1) {
        throw ParameterError("synthetic task needs rows, dims and classes >= 1");
    }
    std::mt19937_64 rng(seed);
    const auto d = spec.dims;
    const std::vector<double> base(d, spec.base_concentration);

    std::vector<double> shared(d);
    dirichlet(rng, base, shared.data());
    std::vector<std::vector<double>> alpha(static_cast<std::size_t>(spec.classes), std::vector<double>(d));
    std::vector<double> own(d);
    for (auto& a : alpha) {
        dirichlet(rng, base, own.data());
        for (std::size_t j = 0; j < d; ++j) {
            a[j] = spec.scale * ((1.0 - spec.separation) * shared[j] + spec.separation * own[j]) +
                   spec.floor;
        }
    }

    SyntheticTask task;
    task.y.resize(spec.rows);
    for (std::size_t i = 0; i < spec.rows; ++i) task.y[i] = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
    std::shuffle(task.y.begin(), task.y.end(), rng);

    RowMatrix X(static_cast<Eigen::Index>(spec.rows), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < spec.rows; ++i) {
        dirichlet(rng, alpha[static_cast<std::size_t>(task.y[i])], X.row(static_cast<Eigen::Index>(i)).data());
    }
    task.X = HistogramMatrix(std::move(X));
    return task;
}

HistogramMatrix dirichlet_rows(std::size_t n, std::size_t d, double alpha, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<double> a(d, alpha);
    RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) dirichlet(rng, a, X.row(static_cast<Eigen::Index>(i)).data());
    return HistogramMatrix(std::move(X));
}

}  // namespace chi2map
