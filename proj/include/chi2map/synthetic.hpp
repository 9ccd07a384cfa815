#pragma once

#include <cstdint>
#include <vector>

#include "chi2map/histio.hpp"

namespace chi2map {

// Mixture of Dirichlet-distributed histograms. Each class c has prototype
//   p_c = (1 - separation) * shared + separation * own_c,
// with shared, own_c ~ Dirichlet(base_concentration); rows of class c are drawn
// from Dirichlet(scale * p_c + floor).
struct SyntheticSpec {
    std::size_t rows = 2000;
    std::size_t dims = 64;
    int classes = 5;
    double base_concentration = 0.5;
    double separation = 0.4;
    double scale = 8.0;
    double floor = 0.01;
};

struct SyntheticTask {
    HistogramMatrix X;
    std::vector<int> y;
};

SyntheticTask make_dirichlet_task(const SyntheticSpec& spec, std::uint64_t seed);

// n rows drawn from a symmetric Dirichlet(alpha) over d bins.
HistogramMatrix dirichlet_rows(std::size_t n, std::size_t d, double alpha, std::uint64_t seed);

}  // namespace chi2map
