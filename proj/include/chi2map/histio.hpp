#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "chi2map/errors.hpp"

// =============================================================================
// Matrix ingestion, validation and chunked streaming.
//
// Binary layout (CHI2MAT1):
//   8 bytes   magic "CHI2MAT1"
//   u64 LE    rows
//   u64 LE    cols
//   f64 LE    rows*cols values, row-major
// =============================================================================

namespace chi2map {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Format { csv, binary };

Format parse_format(const std::string& name);
// "bin"/"binary" by extension, otherwise csv.
Format format_from_path(const std::string& path);

// What a matrix is allowed to contain.
enum class MatrixKind {
    histogram,  // finite and >= 0
    labels,     // finite
};

void validate_values(const RowMatrix& values, MatrixKind kind, std::size_t row_offset = 0);

// n x d nonnegative, finite, row-major.
class HistogramMatrix {
public:
    HistogramMatrix() = default;
    explicit HistogramMatrix(RowMatrix values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const RowMatrix& values() const noexcept { return values_; }

    // Row i as a contiguous view.
    Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const {
        return {values_.data() + i * cols(), static_cast<Eigen::Index>(cols())};
    }

private:
    RowMatrix values_;
};

// n x c finite targets, either +-1 one-vs-all or real-valued regression targets.
class LabelMatrix {
public:
    LabelMatrix() = default;
    explicit LabelMatrix(RowMatrix values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t classes() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const RowMatrix& values() const noexcept { return values_; }

    // +1 on the true class, -1 elsewhere.
    static LabelMatrix one_vs_all(const std::vector<int>& classes, int num_classes);

private:
    RowMatrix values_;
};

// Indices of rows whose sum differs from 1 by more than tol.
std::vector<std::size_t> rows_failing_l1(const RowMatrix& values, double tol = 1e-6);

RowMatrix read_raw(const std::string& path, Format format, MatrixKind kind);
HistogramMatrix read_matrix(const std::string& path, Format format);
LabelMatrix read_labels(const std::string& path, Format format);
void write_matrix(const std::string& path, const RowMatrix& values, Format format);

// Writes a matrix chunk by chunk; the binary header needs the final shape up front.
class MatrixWriter {
public:
    MatrixWriter(std::string path, Format format, std::size_t rows, std::size_t cols);
    ~MatrixWriter();
    MatrixWriter(const MatrixWriter&) = delete;
    MatrixWriter& operator=(const MatrixWriter&) = delete;

    void append(const RowMatrix& chunk);
    // Throws unless exactly `rows` rows were appended.
    void finish();

private:
    std::string path_;
    Format format_;
    std::size_t rows_;
    std::size_t cols_;
    std::size_t written_ = 0;
    std::unique_ptr<std::ofstream> out_;
};

struct MatrixShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

// Reads only the header (binary) or scans line structure (CSV).
MatrixShape probe_shape(const std::string& path, Format format);

// -----------------------------------------------------------------------------
// Chunked streaming
// -----------------------------------------------------------------------------

struct FileSource {
    std::string path;
    Format format = Format::binary;
};

// Non-owning; the referenced matrix must outlive the reader.
struct MemorySource {
    const RowMatrix* matrix = nullptr;
};

struct ChunkSpec {
    std::size_t chunk_rows = 1;
    std::size_t total_rows = 0;
    std::variant<FileSource, MemorySource> source;
    MatrixKind kind = MatrixKind::histogram;

    static ChunkSpec from_file(const std::string& path, Format format, std::size_t chunk_rows,
                               MatrixKind kind = MatrixKind::histogram);
    static ChunkSpec from_memory(const RowMatrix& matrix, std::size_t chunk_rows,
                                 MatrixKind kind = MatrixKind::histogram);

    std::size_t num_chunks() const noexcept {
        return total_rows == 0 ? 0 : (total_rows + chunk_rows - 1) / chunk_rows;
    }
    void validate() const;
};

// Sequential single-consumer reader. Yields chunks in index order; the last may be short.
class ChunkReader {
public:
    explicit ChunkReader(ChunkSpec spec);
    ~ChunkReader();
    ChunkReader(ChunkReader&&) noexcept;
    ChunkReader& operator=(ChunkReader&&) noexcept;

    std::optional<RowMatrix> next();
    void rewind();

    const ChunkSpec& spec() const noexcept { return spec_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t chunk_index() const noexcept { return chunk_index_; }

private:
    ChunkSpec spec_;
    std::size_t cols_ = 0;
    std::size_t rows_read_ = 0;
    std::size_t chunk_index_ = 0;
    std::size_t line_no_ = 0;
    std::unique_ptr<std::ifstream> in_;

    void open();
    RowMatrix read_binary_rows(std::size_t count);
    RowMatrix read_csv_rows(std::size_t count);
};

// Calls fn(chunk_index, chunk) for every chunk in order.
void stream_chunks(const ChunkSpec& spec,
                   const std::function<void(std::size_t, const HistogramMatrix&)>& fn);

// -----------------------------------------------------------------------------
// Log-spaced density estimate of nonzero values
// -----------------------------------------------------------------------------

struct ValueHistogram {
    std::vector<double> edges;      // bins + 1, log-spaced
    std::vector<double> centroids;  // geometric midpoints of the edges
    std::vector<double> density;    // sums to 1
};

inline constexpr std::size_t default_bins = 1000;

// Two-pass builder so the estimate can be formed from a chunk stream:
// scan() every chunk, then add() every chunk, then finish().
class ValueHistogramBuilder {
public:
    explicit ValueHistogramBuilder(std::size_t bins);

    void scan(const RowMatrix& chunk);
    void add(const RowMatrix& chunk);
    ValueHistogram finish() const;

private:
    std::size_t bins_;
    double lo_;
    double hi_;
    bool range_fixed_ = false;
    double log_lo_ = 0.0;
    double log_step_ = 0.0;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;

    void fix_range();
};

ValueHistogram value_histogram(const HistogramMatrix& X, std::size_t bins = default_bins);
ValueHistogram value_histogram(const ChunkSpec& spec, std::size_t bins = default_bins);

}  // namespace chi2map
