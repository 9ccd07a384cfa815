#include "chi2map/rfmap.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "chi2map/binio.hpp"

namespace chi2map {

namespace {

constexpr char kBasisMagic[9] = "CHI2RFB1";
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

double open_unit(std::uint64_t w) { return static_cast<double>((w >> 11) + 1) * kInv53; }
double half_open_unit(std::uint64_t w) { return static_cast<double>(w >> 11) * kInv53; }

double normal_at(std::uint64_t seed, std::uint64_t entry) {
    const double u1 = open_unit(splitmix64_at(seed, 2 * entry));
    const double u2 = half_open_unit(splitmix64_at(seed, 2 * entry + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double phase_at(std::uint64_t seed, std::uint64_t position) {
    const double p = kTwoPi * half_open_unit(splitmix64_at(seed, position));
    return p < kTwoPi ? p : std::nextafter(kTwoPi, 0.0);
}

void check_basis_args(std::size_t embed_dim, std::size_t dims, double gamma) {
    if (dims < 1) throw ParameterError("RF dimension D must be >= 1");
    if (embed_dim < 1) throw ParameterError("embedding dimension must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
}

RFBasis empty_basis(std::size_t embed_dim, std::size_t dims, double gamma, std::uint64_t seed) {
    RFBasis b;
    b.embed_dim = embed_dim;
    b.dims = dims;
    b.gamma = gamma;
    b.seed = seed;
    b.omega.resize(static_cast<Eigen::Index>(embed_dim), static_cast<Eigen::Index>(dims));
    b.phase.resize(static_cast<Eigen::Index>(dims));
    return b;
}

void check_transform_args(const RowMatrix& C, const RFBasis& basis) {
    if (static_cast<std::size_t>(C.cols()) != basis.embed_dim) {
        throw DimensionError("embedding has " + std::to_string(C.cols()) +
                             " columns but the RF basis expects " +
                             std::to_string(basis.embed_dim));
    }
}

}  // namespace

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t position) noexcept {
    std::uint64_t z = seed + (position + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RFBasis sample_basis(std::size_t embed_dim, std::size_t dims, double gamma, std::uint64_t seed) {
    check_basis_args(embed_dim, dims, gamma);
    RFBasis b = empty_basis(embed_dim, dims, gamma, seed);
    const double scale = std::sqrt(2.0 * gamma);
    const auto total = static_cast<std::int64_t>(embed_dim * dims);
    double* omega = b.omega.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t e = 0; e < total; ++e) {
        omega[e] = scale * normal_at(seed, static_cast<std::uint64_t>(e));
    }
    const auto base = 2 * static_cast<std::uint64_t>(total);
    for (std::size_t c = 0; c < dims; ++c) {
        b.phase[static_cast<Eigen::Index>(c)] = phase_at(seed, base + c);
    }
    return b;
}

RFBasis sample_basis_serial(std::size_t embed_dim, std::size_t dims, double gamma,
                            std::uint64_t seed) {
    check_basis_args(embed_dim, dims, gamma);
    RFBasis b = empty_basis(embed_dim, dims, gamma, seed);
    const double scale = std::sqrt(2.0 * gamma);
    std::uint64_t e = 0;
    for (std::size_t c = 0; c < dims; ++c) {
        for (std::size_t r = 0; r < embed_dim; ++r, ++e) {
            b.omega(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                scale * normal_at(seed, e);
        }
    }
    for (std::size_t c = 0; c < dims; ++c) {
        b.phase[static_cast<Eigen::Index>(c)] = phase_at(seed, 2 * e + c);
    }
    return b;
}

RowMatrix rf_transform(const RowMatrix& C, const RFBasis& basis) {
    check_transform_args(C, basis);
    RowMatrix Z(C.rows(), static_cast<Eigen::Index>(basis.dims));
    Z.noalias() = C * basis.omega;
    const double scale = std::sqrt(2.0 / static_cast<double>(basis.dims));
    const auto cols = Z.cols();
    const double* phase = basis.phase.data();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        double* zi = Z.row(i).data();
        for (Eigen::Index c = 0; c < cols; ++c) zi[c] = scale * std::cos(zi[c] + phase[c]);
    }
    return Z;
}

RowMatrix rf_transform_serial(const RowMatrix& C, const RFBasis& basis) {
    check_transform_args(C, basis);
    RowMatrix Z(C.rows(), static_cast<Eigen::Index>(basis.dims));
    const double scale = std::sqrt(2.0 / static_cast<double>(basis.dims));
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        for (Eigen::Index c = 0; c < Z.cols(); ++c) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < C.cols(); ++r) acc += C(i, r) * basis.omega(r, c);
            Z(i, c) = scale * std::cos(acc + basis.phase[c]);
        }
    }
    return Z;
}

Eigen::MatrixXd feature_gram(const RowMatrix& Z) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Z.rows(), Z.rows());
    G.selfadjointView<Eigen::Lower>().rankUpdate(Z);
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    return G;
}

Eigen::MatrixXd approx_exp_chi2_gram(const HistogramMatrix& X, const ParamVector& k,
                                     const RFBasis& basis) {
    return feature_gram(rf_transform(embed_matrix(X, k), basis));
}

void write_basis(std::ostream& out, const RFBasis& basis) {
    binio::put_magic(out, kBasisMagic);
    binio::put_u64(out, basis.embed_dim);
    binio::put_u64(out, basis.dims);
    binio::put_f64(out, basis.gamma);
    binio::put_u64(out, basis.seed);
    binio::put_block(out, basis.omega);
    binio::put_block(out, basis.phase);
}

RFBasis read_basis(std::istream& in, const std::string& what) {
    binio::expect_magic(in, kBasisMagic, what);
    const auto embed_dim = binio::get_u64(in, what);
    const auto dims = binio::get_u64(in, what);
    const double gamma = binio::get_f64(in, what);
    const auto seed = binio::get_u64(in, what);
    if (embed_dim == 0 || dims == 0 || embed_dim * dims > (1ull << 34)) {
        throw ParseError(what + ": implausible basis shape");
    }
    RFBasis b = empty_basis(embed_dim, dims, gamma, seed);
    binio::get_block(in, b.omega, what);
    binio::get_block(in, b.phase, what);
    return b;
}

void write_basis(const std::string& path, const RFBasis& basis) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_basis(out, basis);
    if (!out) throw IoError("write failed for '" + path + "'");
}

RFBasis read_basis(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_basis(in, "'" + path + "'");
}

}  // namespace chi2map
