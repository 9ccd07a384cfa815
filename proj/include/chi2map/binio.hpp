#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "chi2map/errors.hpp"

// Little-endian primitives for the binary container formats.

namespace chi2map::binio {

inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return __builtin_bswap64(v);
    }
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    v = to_le(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

inline std::uint64_t get_u64(std::istream& in, const std::string& what) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated " + what);
    return to_le(v);
}

inline double get_f64(std::istream& in, const std::string& what) {
    return std::bit_cast<double>(get_u64(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[9], const std::string& what) {
    char buf[8];
    in.read(buf, 8);
    if (!in || std::string(buf, 8) != std::string(magic, 8)) {
        throw ParseError(what + ": bad magic (expected " + std::string(magic, 8) + ")");
    }
}

// Raw values in storage order of the Eigen object.
template <typename Derived>
void put_block(std::ostream& out, const Eigen::DenseBase<Derived>& m) {
    const auto& e = m.derived();
    for (Eigen::Index i = 0; i < e.size(); ++i) put_f64(out, e.data()[i]);
}

template <typename Derived>
void get_block(std::istream& in, Eigen::DenseBase<Derived>& m, const std::string& what) {
    auto& e = m.derived();
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = get_f64(in, what);
}

// Shape-prefixed matrix: u64 rows, u64 cols, values.
template <typename Derived>
void put_matrix(std::ostream& out, const Eigen::DenseBase<Derived>& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    put_block(out, m);
}

template <typename MatrixType>
MatrixType get_matrix(std::istream& in, const std::string& what) {
    const auto rows = get_u64(in, what);
    const auto cols = get_u64(in, what);
    if (rows > (1ull << 32) || cols > (1ull << 32)) throw ParseError(what + ": implausible shape");
    MatrixType m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    get_block(in, m, what);
    return m;
}

}  // namespace chi2map::binio
