#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chi2map/histio.hpp"
#include "chi2map/pipeline.hpp"

namespace chi2map {

// Settings shared by the pipeline and benchmark subcommands. The textual form is
// one `key=value` per line (`path=` may repeat); doubles use 17 significant
// digits so to_text/from_text round-trips exactly.
struct PipelineConfig {
    EmbedMethod method = EmbedMethod::direct;
    std::size_t terms = 5;
    std::size_t rf_dims = 1000;
    double gamma = 0.75;
    std::uint64_t seed = 0;
    std::size_t pca_keep = 500;
    double lambda = 1.0;
    std::size_t chunk_rows = 4096;
    std::vector<std::string> paths;

    void validate() const;
    std::string to_text() const;
    static PipelineConfig from_text(const std::string& text);

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

PipelineConfig read_config(const std::string& path);

struct BenchRow {
    std::string method;
    std::size_t terms = 0;
    std::size_t dims = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

// Append-only result table. CSV: a `# chi2map-bench v1` line, then the header
// `method,terms,dims,seed,metric,value`, one row per measurement.
class BenchReport {
public:
    void add(BenchRow row) { rows_.push_back(std::move(row)); }
    const std::vector<BenchRow>& rows() const noexcept { return rows_; }

    // First row matching all given keys; throws std::out_of_range if missing.
    double value(const std::string& method, std::size_t terms, std::size_t dims,
                 std::uint64_t seed, const std::string& metric) const;

    void write_csv(std::ostream& out) const;
    std::string to_csv() const;
    void write_csv(const std::string& path) const;

private:
    std::vector<BenchRow> rows_;
};

inline constexpr const char* bench_csv_version = "# chi2map-bench v1";

// Sweep ranges for the benchmark subcommands.
struct SweepOptions {
    std::vector<EmbedMethod> methods{EmbedMethod::direct, EmbedMethod::chebyshev};
    std::vector<std::size_t> terms_list{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::size_t> dims_list{1000, 3000, 7000};
    std::size_t seeds = 5;
    std::size_t pairs = 20000;
    std::size_t bins = default_bins;
    std::size_t oversample = 3;
};

// Scalar chi2 error of each embedding, per method and N, over `pairs` value pairs
// reservoir-sampled from the nonzero entries of `data` (seeded by config.seed).
// Direct parameters are fitted once on the data's value distribution.
// Metrics: max_abs_error, mean_abs_error.
BenchReport cmd_bench_chi2_error(const ChunkSpec& data, const PipelineConfig& config,
                                 const SweepOptions& sweep);

// RF Gram error against the exact exp-chi2 Gram (beta = 2 gamma) for every method,
// D in dims_list and seeds config.seed .. config.seed + seeds - 1, at N = config.terms.
// Per-seed metrics max_abs_error and mean_abs_error; summary rows (seed 0) with
// _mean, _std and _median suffixes.
BenchReport cmd_bench_kernel_error(const HistogramMatrix& X, const PipelineConfig& config,
                                   const SweepOptions& sweep);

struct LabeledData {
    HistogramMatrix X;
    std::vector<int> y;  // class indices 0..classes-1
    int classes = 0;
};

// One-vs-all ridge accuracy on a half/half split (first half trains):
//   exact  - kernel ridge on the exact exp-chi2 Gram
//   rf     - ridge on RF features, for every D in dims_list and for D = pca_keep
//   pca-rf - out-of-core PCA (oversample * pca_keep RF dims, keep pca_keep) + ridge
// Rows carry metric "accuracy" per seed, plus "accuracy_median" (seed 0).
BenchReport cmd_end2end(const LabeledData& data, const PipelineConfig& config,
                        const SweepOptions& sweep);

}  // namespace chi2map
