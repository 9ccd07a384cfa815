#include "chi2map/bench.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "chi2map/chebyshev.hpp"
#include "chi2map/kernel_ridge.hpp"
#include "chi2map/oocpca.hpp"
#include "chi2map/stats.hpp"

namespace chi2map {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParameterError("config key '" + key + "': cannot parse '" + text + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

// -----------------------------------------------------------------------------
// PipelineConfig
// -----------------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (terms < 1 || rf_dims < 1 || pca_keep < 1 || chunk_rows < 1) {
        throw ParameterError("terms, rf_dims, pca_keep and chunk_rows must all be >= 1");
    }
    if (!(gamma >= 0.0) || !(lambda >= 0.0)) throw ParameterError("gamma and lambda must be >= 0");
}

std::string PipelineConfig::to_text() const {
    std::ostringstream out;
    out << "method=" << to_string(method) << '\n'
        << "terms=" << terms << '\n'
        << "rf_dims=" << rf_dims << '\n'
        << "gamma=" << fmt_double(gamma) << '\n'
        << "seed=" << seed << '\n'
        << "pca_keep=" << pca_keep << '\n'
        << "lambda=" << fmt_double(lambda) << '\n'
        << "chunk_rows=" << chunk_rows << '\n';
    for (const auto& p : paths) out << "path=" << p << '\n';
    return out.str();
}

PipelineConfig PipelineConfig::from_text(const std::string& text) {
    PipelineConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line without '='", line_no - 1);
        }
        const auto key = trim(line.substr(0, eq));
        // Paths keep their exact bytes after '='.
        const auto raw = line.substr(eq + 1);
        const auto value = trim(raw);
        if (key == "method") c.method = parse_method(value);
        else if (key == "terms") c.terms = parse_number<std::size_t>(key, value);
        else if (key == "rf_dims") c.rf_dims = parse_number<std::size_t>(key, value);
        else if (key == "gamma") c.gamma = parse_number<double>(key, value);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "pca_keep") c.pca_keep = parse_number<std::size_t>(key, value);
        else if (key == "lambda") c.lambda = parse_number<double>(key, value);
        else if (key == "chunk_rows") c.chunk_rows = parse_number<std::size_t>(key, value);
        else if (key == "path") c.paths.push_back(raw);
        else throw ParseError("unknown config key '" + key + "'", line_no - 1);
    }
    c.validate();
    return c;
}

PipelineConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return PipelineConfig::from_text(ss.str());
}

// -----------------------------------------------------------------------------
// BenchReport
// -----------------------------------------------------------------------------

double BenchReport::value(const std::string& method, std::size_t terms, std::size_t dims,
                          std::uint64_t seed, const std::string& metric) const {
    for (const auto& r : rows_) {
        if (r.method == method && r.terms == terms && r.dims == dims && r.seed == seed &&
            r.metric == metric) {
            return r.value;
        }
    }
    throw std::out_of_range("no bench row " + method + "/" + metric);
}

void BenchReport::write_csv(std::ostream& out) const {
    out << bench_csv_version << '\n' << "method,terms,dims,seed,metric,value\n";
    for (const auto& r : rows_) {
        out << r.method << ',' << r.terms << ',' << r.dims << ',' << r.seed << ',' << r.metric
            << ',' << fmt_double(r.value) << '\n';
    }
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

void BenchReport::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_csv(out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

// -----------------------------------------------------------------------------
// Scalar chi2 error
// -----------------------------------------------------------------------------

namespace {

// Reservoir sample of the nonzero entries, in stream order of acceptance.
std::vector<double> sample_nonzero(const ChunkSpec& data, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> pool;
    pool.reserve(count);
    std::uint64_t seen = 0;
    stream_chunks(data, [&](std::size_t, const HistogramMatrix& chunk) {
        const auto& v = chunk.values();
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                const double x = v(i, j);
                if (x <= 0.0) continue;
                ++seen;
                if (pool.size() < count) {
                    pool.push_back(x);
                } else {
                    const auto r = std::uniform_int_distribution<std::uint64_t>(0, seen - 1)(rng);
                    if (r < count) pool[r] = x;
                }
            }
        }
    });
    if (pool.size() < 2) throw NoNonzeroValues("need at least two nonzero values to sample pairs");
    return pool;
}

}  // namespace

BenchReport cmd_bench_chi2_error(const ChunkSpec& data, const PipelineConfig& config,
                                 const SweepOptions& sweep) {
    config.validate();
    if (sweep.terms_list.empty() || sweep.methods.empty() || sweep.pairs < 1) {
        throw ParameterError("bench-chi2-error needs methods, terms and pairs");
    }
    const auto values = sample_nonzero(data, 2 * sweep.pairs, config.seed);
    const std::size_t n_pairs = values.size() / 2;
    std::size_t n_max = 0;
    for (auto n : sweep.terms_list) {
        if (n < 1) throw ParameterError("terms must be >= 1");
        n_max = std::max(n_max, n);
    }

    BenchReport report;
    for (const auto method : sweep.methods) {
        // The greedy fit is sequential, so the N-term fit is a prefix of the n_max fit.
        const ParamVector fitted =
            method == EmbedMethod::direct ? fit_params(data, n_max, sweep.bins) : ParamVector();
        for (const auto n : sweep.terms_list) {
            const std::size_t width = method == EmbedMethod::direct ? n : n + 1;
            const ParamVector k = method == EmbedMethod::direct ? fitted.prefix(n) : ParamVector();
            std::vector<double> cx(width), cy(width);
            double max_err = 0.0, sum_err = 0.0;
            for (std::size_t p = 0; p < n_pairs; ++p) {
                const double x = values[2 * p], y = values[2 * p + 1];
                if (method == EmbedMethod::direct) {
                    direct_coeffs(x, k, cx);
                    direct_coeffs(y, k, cy);
                } else {
                    cheb_coeffs(x, n, cx);
                    cheb_coeffs(y, n, cy);
                }
                double dot = 0.0;
                for (std::size_t q = 0; q < width; ++q) dot += cx[q] * cy[q];
                const double err = std::abs(2.0 * x * y / (x + y) - dot);
                max_err = std::max(max_err, err);
                sum_err += err;
            }
            const auto name = to_string(method);
            report.add({name, n, 0, config.seed, "max_abs_error", max_err});
            report.add({name, n, 0, config.seed, "mean_abs_error", sum_err / static_cast<double>(n_pairs)});
        }
    }
    return report;
}

// -----------------------------------------------------------------------------
// RF Gram error
// -----------------------------------------------------------------------------

BenchReport cmd_bench_kernel_error(const HistogramMatrix& X, const PipelineConfig& config,
                                   const SweepOptions& sweep) {
    config.validate();
    if (sweep.seeds < 1 || sweep.dims_list.empty() || sweep.methods.empty()) {
        throw ParameterError("bench-kernel-error needs methods, dims and seeds");
    }
    const auto& V = X.values();
    const Eigen::MatrixXd exact = exp_chi2_gram(V, V, 2.0 * config.gamma);
    const auto d = static_cast<std::size_t>(V.cols());

    BenchReport report;
    for (const auto method : sweep.methods) {
        const auto name = to_string(method);
        ParamVector k;
        if (method == EmbedMethod::direct) k = fit_params(X, config.terms, sweep.bins);
        for (const auto D : sweep.dims_list) {
            std::vector<double> maxes, means;
            for (std::size_t s = 0; s < sweep.seeds; ++s) {
                const std::uint64_t seed = config.seed + s;
                const auto p = make_pipeline(method, config.terms, k, d, D, config.gamma, seed);
                const Eigen::MatrixXd err = (feature_gram(p.transform(V)) - exact).cwiseAbs();
                maxes.push_back(err.maxCoeff());
                means.push_back(err.mean());
                report.add({name, config.terms, D, seed, "max_abs_error", maxes.back()});
                report.add({name, config.terms, D, seed, "mean_abs_error", means.back()});
            }
            for (const auto& [metric, sample] :
                 {std::pair{std::string("max_abs_error"), &maxes}, std::pair{std::string("mean_abs_error"), &means}}) {
                report.add({name, config.terms, D, 0, metric + "_mean", stats::mean(*sample)});
                report.add({name, config.terms, D, 0, metric + "_std", stats::stddev(*sample)});
                report.add({name, config.terms, D, 0, metric + "_median", stats::median(*sample)});
            }
        }
    }
    return report;
}

// -----------------------------------------------------------------------------
// End-to-end classification
// -----------------------------------------------------------------------------

BenchReport cmd_end2end(const LabeledData& data, const PipelineConfig& config,
                        const SweepOptions& sweep) {
    config.validate();
    if (!(config.lambda > 0.0)) throw ParameterError("end2end needs lambda > 0");
    const auto& V = data.X.values();
    const auto n = static_cast<std::size_t>(V.rows());
    if (data.y.size() != n) throw AlignmentError("labels and histograms have different row counts");
    if (n < 4 || data.classes < 2) throw ParameterError("end2end needs >= 4 rows and >= 2 classes");
    if (sweep.seeds < 1 || sweep.oversample < 1) throw ParameterError("seeds and oversample must be >= 1");

    const auto n_train = static_cast<Eigen::Index>(n / 2);
    const auto n_test = static_cast<Eigen::Index>(n) - n_train;
    const RowMatrix X_train = V.topRows(n_train);
    const RowMatrix X_test = V.bottomRows(n_test);
    const std::vector<int> y_train(data.y.begin(), data.y.begin() + n_train);
    const std::vector<int> y_test(data.y.begin() + n_train, data.y.end());
    const RowMatrix Y_train = LabelMatrix::one_vs_all(y_train, data.classes).values();
    const auto d = static_cast<std::size_t>(V.cols());
    const double beta = 2.0 * config.gamma;

    BenchReport report;
    const auto method = to_string(config.method);

    const Eigen::MatrixXd K_tr = exp_chi2_gram(X_train, X_train, beta);
    const Eigen::MatrixXd K_te = exp_chi2_gram(X_test, X_train, beta);
    const double exact_acc =
        argmax_accuracy(centered_kernel_ridge_predict(K_tr, K_te, Y_train, config.lambda), y_test);
    report.add({"exact", config.terms, 0, 0, "accuracy", exact_acc});

    ParamVector k;
    if (config.method == EmbedMethod::direct) k = fit_params(HistogramMatrix(X_train), config.terms, sweep.bins);

    std::vector<std::size_t> rf_dims = sweep.dims_list;
    if (std::find(rf_dims.begin(), rf_dims.end(), config.pca_keep) == rf_dims.end()) {
        rf_dims.push_back(config.pca_keep);
    }

    for (const auto D : rf_dims) {
        std::vector<double> accs;
        for (std::size_t s = 0; s < sweep.seeds; ++s) {
            const std::uint64_t seed = config.seed + s;
            const auto p = make_pipeline(config.method, config.terms, k, d, D, config.gamma, seed);
            const RowMatrix Z_tr = p.transform(X_train);
            const RowMatrix Z_te = p.transform(X_test);
            // Dual form: n_train x n_train solve instead of D x D.
            const Eigen::MatrixXd G_tr = feature_gram(Z_tr);
            const Eigen::MatrixXd G_te = Z_te * Z_tr.transpose();
            accs.push_back(argmax_accuracy(
                centered_kernel_ridge_predict(G_tr, G_te, Y_train, config.lambda), y_test));
            report.add({"rf-" + method, config.terms, D, seed, "accuracy", accs.back()});
        }
        report.add({"rf-" + method, config.terms, D, 0, "accuracy_median", stats::median(accs)});
    }

    std::vector<double> accs;
    const std::size_t sample_dims = sweep.oversample * config.pca_keep;
    for (std::size_t s = 0; s < sweep.seeds; ++s) {
        const std::uint64_t seed = config.seed + s;
        const std::vector<FeaturePipeline> pipes{
            make_pipeline(config.method, config.terms, k, d, sample_dims, config.gamma, seed)};
        DataStream stream;
        stream.inputs.push_back(ChunkSpec::from_memory(X_train, std::min<std::size_t>(config.chunk_rows, static_cast<std::size_t>(n_train))));
        stream.labels = ChunkSpec::from_memory(Y_train, std::min<std::size_t>(config.chunk_rows, static_cast<std::size_t>(n_train)),
                                               MatrixKind::labels);
        const auto acc = accumulate(stream, pipes);
        const auto pca = eig_centered(acc, config.pca_keep);
        const auto ridge = ridge_after_pca(acc, pca, config.lambda);
        const Eigen::MatrixXd scores = predict(ridge, pca, pipes.front().transform(X_test));
        accs.push_back(argmax_accuracy(scores, y_test));
        report.add({"pca-rf-" + method, config.terms, config.pca_keep, seed, "accuracy", accs.back()});
    }
    report.add({"pca-rf-" + method, config.terms, config.pca_keep, 0, "accuracy_median", stats::median(accs)});
    return report;
}

}  // namespace chi2map
