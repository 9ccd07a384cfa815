#include "chi2map/histio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace chi2map {

namespace {

constexpr char kMatrixMagic[8] = {'C', 'H', 'I', '2', 'M', 'A', 'T', '1'};
constexpr std::size_t kHeaderBytes = 8 + 8 + 8;

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return __builtin_bswap64(v);
    }
}

void put_u64(std::ostream& out, std::uint64_t v) {
    v = to_le(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    v = to_le(v);
    return static_cast<bool>(in);
}

void put_f64_block(std::ostream& out, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(data[i]));
            out.write(reinterpret_cast<const char*>(&bits), 8);
        }
    }
}

bool get_f64_block(std::istream& in, double* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i) {
            data[i] = std::bit_cast<double>(to_le(std::bit_cast<std::uint64_t>(data[i])));
        }
    }
    return static_cast<bool>(in);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_blank_or_comment(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::vector<double> parse_csv_line(std::string_view line, std::size_t row) {
    std::vector<double> out;
    std::size_t col = 0;
    while (true) {
        const auto comma = line.find(',');
        auto field = trim(line.substr(0, comma));
        if (!field.empty() && field.front() == '+') field.remove_prefix(1);
        double value = 0.0;
        const auto* first = field.data();
        const auto* last = field.data() + field.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (field.empty() || ec == std::errc::invalid_argument || ptr != last) {
            throw ParseError("malformed CSV value '" + std::string(field) + "'", row, col);
        }
        if (ec == std::errc::result_out_of_range) {
            throw InvalidValue("CSV value out of double range", row, col);
        }
        out.push_back(value);
        ++col;
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

MatrixShape read_binary_header(std::istream& in, const std::string& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0) {
        throw ParseError("'" + path + "' is not a CHI2MAT1 file (bad magic)");
    }
    std::uint64_t rows = 0, cols = 0;
    if (!get_u64(in, rows) || !get_u64(in, cols)) {
        throw ParseError("'" + path + "' has a truncated header");
    }
    if (rows == 0 || cols == 0) {
        throw EmptyMatrix("'" + path + "' declares an empty matrix");
    }
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

}  // namespace

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "bin" || name == "binary") return Format::binary;
    throw ParameterError("unknown matrix format '" + name + "' (expected csv or bin)");
}

Format format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        const auto ext = path.substr(dot + 1);
        if (ext == "bin" || ext == "binary") return Format::binary;
    }
    return Format::csv;
}

void validate_values(const RowMatrix& values, MatrixKind kind, std::size_t row_offset) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            const auto row = row_offset + static_cast<std::size_t>(i);
            const auto col = static_cast<std::size_t>(j);
            if (std::isnan(v)) throw InvalidValue("NaN entry", row, col);
            if (std::isinf(v)) throw InvalidValue("infinite entry", row, col);
            if (kind == MatrixKind::histogram && v < 0.0) {
                throw InvalidValue("negative histogram entry", row, col);
            }
        }
    }
}

HistogramMatrix::HistogramMatrix(RowMatrix values) : values_(std::move(values)) {
    validate_values(values_, MatrixKind::histogram);
}

LabelMatrix::LabelMatrix(RowMatrix values) : values_(std::move(values)) {
    validate_values(values_, MatrixKind::labels);
}

LabelMatrix LabelMatrix::one_vs_all(const std::vector<int>& classes, int num_classes) {
    if (num_classes < 1) throw ParameterError("one_vs_all needs at least one class");
    RowMatrix y = RowMatrix::Constant(static_cast<Eigen::Index>(classes.size()), num_classes, -1.0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] < 0 || classes[i] >= num_classes) {
            throw ParameterError("class index " + std::to_string(classes[i]) + " out of range");
        }
        y(static_cast<Eigen::Index>(i), classes[i]) = 1.0;
    }
    return LabelMatrix(std::move(y));
}

std::vector<std::size_t> rows_failing_l1(const RowMatrix& values, double tol) {
    std::vector<std::size_t> bad;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (std::abs(values.row(i).sum() - 1.0) > tol) bad.push_back(static_cast<std::size_t>(i));
    }
    return bad;
}

MatrixShape probe_shape(const std::string& path, Format format) {
    if (format == Format::binary) {
        auto in = open_binary(path);
        return read_binary_header(in, path);
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    MatrixShape shape;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank_or_comment(line)) continue;
        if (shape.rows == 0) {
            shape.cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
        }
        ++shape.rows;
    }
    if (shape.rows == 0) throw EmptyMatrix("'" + path + "' contains no data rows");
    return shape;
}

RowMatrix read_raw(const std::string& path, Format format, MatrixKind kind) {
    const auto shape = probe_shape(path, format);
    ChunkReader reader(ChunkSpec::from_file(path, format, shape.rows, kind));
    auto chunk = reader.next();
    if (!chunk) throw EmptyMatrix("'" + path + "' contains no data rows");
    return std::move(*chunk);
}

HistogramMatrix read_matrix(const std::string& path, Format format) {
    return HistogramMatrix(read_raw(path, format, MatrixKind::histogram));
}

LabelMatrix read_labels(const std::string& path, Format format) {
    return LabelMatrix(read_raw(path, format, MatrixKind::labels));
}

MatrixWriter::MatrixWriter(std::string path, Format format, std::size_t rows, std::size_t cols)
    : path_(std::move(path)), format_(format), rows_(rows), cols_(cols) {
    const auto mode = format_ == Format::binary ? std::ios::binary | std::ios::trunc : std::ios::trunc;
    out_ = std::make_unique<std::ofstream>(path_, mode);
    if (!*out_) throw IoError("cannot write '" + path_ + "'");
    if (format_ == Format::binary) {
        out_->write(kMatrixMagic, 8);
        put_u64(*out_, rows_);
        put_u64(*out_, cols_);
    }
}

MatrixWriter::~MatrixWriter() = default;

void MatrixWriter::append(const RowMatrix& chunk) {
    if (static_cast<std::size_t>(chunk.cols()) != cols_) {
        throw DimensionError("chunk has " + std::to_string(chunk.cols()) + " columns, expected " +
                             std::to_string(cols_));
    }
    if (written_ + static_cast<std::size_t>(chunk.rows()) > rows_) {
        throw DimensionError("more rows appended than declared for '" + path_ + "'");
    }
    auto& out = *out_;
    if (format_ == Format::binary) {
        put_f64_block(out, chunk.data(), static_cast<std::size_t>(chunk.size()));
    } else {
        char buf[32];
        for (Eigen::Index i = 0; i < chunk.rows(); ++i) {
            for (Eigen::Index j = 0; j < chunk.cols(); ++j) {
                // Shortest representation that round-trips exactly.
                const auto res = std::to_chars(buf, buf + sizeof buf, chunk(i, j));
                if (j) out.put(',');
                out.write(buf, res.ptr - buf);
            }
            out.put('\n');
        }
    }
    if (!out) throw IoError("write failed for '" + path_ + "'");
    written_ += static_cast<std::size_t>(chunk.rows());
}

void MatrixWriter::finish() {
    if (written_ != rows_) {
        throw ConsistencyError("'" + path_ + "' received " + std::to_string(written_) + " of " +
                               std::to_string(rows_) + " rows");
    }
    out_->flush();
    if (!*out_) throw IoError("write failed for '" + path_ + "'");
    out_->close();
}

void write_matrix(const std::string& path, const RowMatrix& values, Format format) {
    MatrixWriter w(path, format, static_cast<std::size_t>(values.rows()),
                   static_cast<std::size_t>(values.cols()));
    w.append(values);
    w.finish();
}

// -----------------------------------------------------------------------------

ChunkSpec ChunkSpec::from_file(const std::string& path, Format format, std::size_t chunk_rows,
                               MatrixKind kind) {
    const auto shape = probe_shape(path, format);
    ChunkSpec spec;
    spec.chunk_rows = chunk_rows;
    spec.total_rows = shape.rows;
    spec.source = FileSource{path, format};
    spec.kind = kind;
    spec.validate();
    return spec;
}

ChunkSpec ChunkSpec::from_memory(const RowMatrix& matrix, std::size_t chunk_rows, MatrixKind kind) {
    ChunkSpec spec;
    spec.chunk_rows = chunk_rows;
    spec.total_rows = static_cast<std::size_t>(matrix.rows());
    spec.source = MemorySource{&matrix};
    spec.kind = kind;
    spec.validate();
    return spec;
}

void ChunkSpec::validate() const {
    if (total_rows == 0) throw EmptyMatrix("chunk source has no rows");
    if (chunk_rows < 1 || chunk_rows > total_rows) {
        throw ParameterError("chunk_rows must lie in [1, " + std::to_string(total_rows) + "], got " +
                             std::to_string(chunk_rows));
    }
    if (const auto* mem = std::get_if<MemorySource>(&source); mem && mem->matrix == nullptr) {
        throw ParameterError("memory chunk source is null");
    }
}

ChunkReader::ChunkReader(ChunkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    open();
}

ChunkReader::~ChunkReader() = default;
ChunkReader::ChunkReader(ChunkReader&&) noexcept = default;
ChunkReader& ChunkReader::operator=(ChunkReader&&) noexcept = default;

void ChunkReader::open() {
    rows_read_ = 0;
    chunk_index_ = 0;
    line_no_ = 0;
    if (const auto* mem = std::get_if<MemorySource>(&spec_.source)) {
        cols_ = static_cast<std::size_t>(mem->matrix->cols());
        in_.reset();
        return;
    }
    const auto& file = std::get<FileSource>(spec_.source);
    if (file.format == Format::binary) {
        in_ = std::make_unique<std::ifstream>(open_binary(file.path));
        const auto shape = read_binary_header(*in_, file.path);
        if (shape.rows != spec_.total_rows) {
            throw ParseError("'" + file.path + "' row count changed since probing");
        }
        cols_ = shape.cols;
    } else {
        in_ = std::make_unique<std::ifstream>(file.path);
        if (!*in_) throw IoError("cannot open '" + file.path + "'");
        cols_ = probe_shape(file.path, Format::csv).cols;
    }
}

void ChunkReader::rewind() { open(); }

RowMatrix ChunkReader::read_binary_rows(std::size_t count) {
    RowMatrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(cols_));
    if (!get_f64_block(*in_, out.data(), count * cols_)) {
        throw ChunkIoError("short read from '" + std::get<FileSource>(spec_.source).path + "'",
                           chunk_index_);
    }
    return out;
}

RowMatrix ChunkReader::read_csv_rows(std::size_t count) {
    RowMatrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(cols_));
    std::string line;
    std::size_t filled = 0;
    while (filled < count) {
        if (!std::getline(*in_, line)) {
            throw ChunkIoError("unexpected end of '" + std::get<FileSource>(spec_.source).path + "'",
                               chunk_index_);
        }
        ++line_no_;
        if (is_blank_or_comment(line)) continue;
        const auto row = rows_read_ + filled;
        const auto values = parse_csv_line(line, row);
        if (values.size() != cols_) {
            throw ParseError("ragged CSV row: expected " + std::to_string(cols_) + " values, found " +
                                 std::to_string(values.size()),
                             row);
        }
        std::copy(values.begin(), values.end(), out.row(static_cast<Eigen::Index>(filled)).data());
        ++filled;
    }
    return out;
}

std::optional<RowMatrix> ChunkReader::next() {
    if (rows_read_ >= spec_.total_rows) return std::nullopt;
    const auto count = std::min(spec_.chunk_rows, spec_.total_rows - rows_read_);
    RowMatrix chunk;
    if (const auto* mem = std::get_if<MemorySource>(&spec_.source)) {
        chunk = mem->matrix->middleRows(static_cast<Eigen::Index>(rows_read_),
                                        static_cast<Eigen::Index>(count));
    } else if (std::get<FileSource>(spec_.source).format == Format::binary) {
        chunk = read_binary_rows(count);
    } else {
        chunk = read_csv_rows(count);
    }
    validate_values(chunk, spec_.kind, rows_read_);
    rows_read_ += count;
    ++chunk_index_;
    return chunk;
}

void stream_chunks(const ChunkSpec& spec,
                   const std::function<void(std::size_t, const HistogramMatrix&)>& fn) {
    ChunkReader reader(spec);
    std::size_t index = 0;
    while (auto chunk = reader.next()) {
        fn(index++, HistogramMatrix(std::move(*chunk)));
    }
}

// -----------------------------------------------------------------------------

ValueHistogramBuilder::ValueHistogramBuilder(std::size_t bins)
    : bins_(bins),
      lo_(std::numeric_limits<double>::infinity()),
      hi_(-std::numeric_limits<double>::infinity()) {
    if (bins_ < 1) throw ParameterError("value histogram needs at least one bin");
}

void ValueHistogramBuilder::scan(const RowMatrix& chunk) {
    if (range_fixed_) throw ParameterError("scan() called after add()");
    const double* p = chunk.data();
    for (Eigen::Index i = 0; i < chunk.size(); ++i) {
        if (p[i] > 0.0) {
            lo_ = std::min(lo_, p[i]);
            hi_ = std::max(hi_, p[i]);
        }
    }
}

void ValueHistogramBuilder::fix_range() {
    if (!(lo_ <= hi_)) throw NoNonzeroValues();
    log_lo_ = std::log(lo_);
    log_step_ = (std::log(hi_) - log_lo_) / static_cast<double>(bins_);
    counts_.assign(bins_, 0);
    range_fixed_ = true;
}

void ValueHistogramBuilder::add(const RowMatrix& chunk) {
    if (!range_fixed_) fix_range();
    const double* p = chunk.data();
    for (Eigen::Index i = 0; i < chunk.size(); ++i) {
        const double v = p[i];
        if (!(v > 0.0)) continue;
        if (v < lo_ || v > hi_) throw ParameterError("value outside the scanned range");
        std::size_t bin = 0;
        if (log_step_ > 0.0) {
            const double pos = (std::log(v) - log_lo_) / log_step_;
            bin = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
            bin = std::min(bin, bins_ - 1);
        }
        ++counts_[bin];
        ++total_;
    }
}

ValueHistogram ValueHistogramBuilder::finish() const {
    if (!range_fixed_ || total_ == 0) throw NoNonzeroValues();
    ValueHistogram h;
    h.edges.resize(bins_ + 1);
    for (std::size_t i = 0; i <= bins_; ++i) {
        h.edges[i] = std::exp(log_lo_ + log_step_ * static_cast<double>(i));
    }
    h.edges.front() = lo_;
    h.edges.back() = hi_;
    h.centroids.resize(bins_);
    h.density.resize(bins_);
    for (std::size_t i = 0; i < bins_; ++i) {
        h.centroids[i] = std::exp(log_lo_ + log_step_ * (static_cast<double>(i) + 0.5));
        h.density[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    }
    return h;
}

ValueHistogram value_histogram(const HistogramMatrix& X, std::size_t bins) {
    ValueHistogramBuilder builder(bins);
    builder.scan(X.values());
    builder.add(X.values());
    return builder.finish();
}

ValueHistogram value_histogram(const ChunkSpec& spec, std::size_t bins) {
    ValueHistogramBuilder builder(bins);
    ChunkReader reader(spec);
    while (auto chunk = reader.next()) builder.scan(*chunk);
    reader.rewind();
    while (auto chunk = reader.next()) builder.add(*chunk);
    return builder.finish();
}

}  // namespace chi2map
