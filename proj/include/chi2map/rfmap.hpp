#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "chi2map/chi2direct.hpp"
#include "chi2map/histio.hpp"

// =============================================================================
// Random Fourier lifting of an embedding to a Gaussian-kernel feature map.
//
// Random stream: SplitMix64 evaluated at a counter,
//
//   word(seed, t) = mix(seed + (t + 1) * 0x9E3779B97F4A7C15)
//
// (identical to the t-th output of a SplitMix64 generator seeded with `seed`),
// so any position can be computed independently. Layout:
//
//   omega(r, c), e = c * embed_dim + r  (column-major):
//       u1 = ((word(2e) >> 11) + 1) * 2^-53        in (0, 1]
//       u2 =  (word(2e + 1) >> 11) * 2^-53         in [0, 1)
//       omega = sqrt(2 gamma) * sqrt(-2 ln u1) * cos(2 pi u2)
//   phase(c), t = 2 * embed_dim * D + c:
//       phase = 2 pi * (word(t) >> 11) * 2^-53     in [0, 2 pi)
//
// Basis file (CHI2RFB1): magic, u64 embed_dim, u64 D, f64 gamma, u64 seed,
// then omega in the column-major order above, then phase; all little-endian.
// =============================================================================

namespace chi2map {

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t position) noexcept;

struct RFBasis {
    std::size_t embed_dim = 0;
    std::size_t dims = 0;
    double gamma = 0.75;
    std::uint64_t seed = 0;
    Eigen::MatrixXd omega;  // embed_dim x dims
    Eigen::VectorXd phase;  // dims

    friend bool operator==(const RFBasis& a, const RFBasis& b) {
        return a.embed_dim == b.embed_dim && a.dims == b.dims && a.gamma == b.gamma &&
               a.seed == b.seed && a.omega == b.omega && a.phase == b.phase;
    }
};

// Omega entries ~ Normal(0, variance 2*gamma); phases uniform in [0, 2 pi).
RFBasis sample_basis(std::size_t embed_dim, std::size_t dims, double gamma, std::uint64_t seed);
RFBasis sample_basis_serial(std::size_t embed_dim, std::size_t dims, double gamma,
                            std::uint64_t seed);

// Z = sqrt(2/D) * cos(C * omega + phase), row-wise.
RowMatrix rf_transform(const RowMatrix& C, const RFBasis& basis);
RowMatrix rf_transform_serial(const RowMatrix& C, const RFBasis& basis);

// Z * Z^T, exactly symmetric.
Eigen::MatrixXd feature_gram(const RowMatrix& Z);

// Gram of RF features over the direct embedding; approximates exp(-2 gamma chi2_distance).
Eigen::MatrixXd approx_exp_chi2_gram(const HistogramMatrix& X, const ParamVector& k,
                                     const RFBasis& basis);

void write_basis(const std::string& path, const RFBasis& basis);
RFBasis read_basis(const std::string& path);

// Stream helpers shared with the model container.
void write_basis(std::ostream& out, const RFBasis& basis);
RFBasis read_basis(std::istream& in, const std::string& what);

}  // namespace chi2map
