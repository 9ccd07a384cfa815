#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chi2map {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    validation = 2,
    io = 3,
    numerical = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

// Malformed input; row/col are 0-based, npos when not applicable.
class ParseError : public ValidationError {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    ParseError(const std::string& what, std::size_t row = npos, std::size_t col = npos)
        : ValidationError(format(what, row, col)), row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t col) {
        std::string out = what;
        if (row != npos) out += " (row " + std::to_string(row);
        if (col != npos) out += (row != npos ? ", col " : " (col ") + std::to_string(col);
        if (row != npos || col != npos) out += ")";
        return out;
    }

    std::size_t row_;
    std::size_t col_;
};

// Parsed fine but violates the matrix contract (negative, NaN, Inf).
class InvalidValue : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyMatrix : public ValidationError {
public:
    explicit EmptyMatrix(const std::string& what = "matrix has no rows or no columns")
        : ValidationError(what) {}
};

class NoNonzeroValues : public ValidationError {
public:
    explicit NoNonzeroValues(const std::string& what = "input contains no nonzero values")
        : ValidationError(what) {}
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AlignmentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConsistencyError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
public:
    SingularError(const std::string& what, std::size_t index)
        : NumericalError(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class LogSingularity : public NumericalError {
public:
    explicit LogSingularity(const std::string& what = "log(x) vanishes at x = 1")
        : NumericalError(what) {}
};

// I/O failure while streaming; carries the index of the chunk being read.
class ChunkIoError : public IoError {
public:
    ChunkIoError(const std::string& what, std::size_t chunk)
        : IoError(what + " (chunk " + std::to_string(chunk) + ")"), chunk_(chunk) {}
    std::size_t chunk() const noexcept { return chunk_; }

private:
    std::size_t chunk_;
};

}  // namespace chi2map
