// chi2map: command-line front end.
//
//   fit-params  -> embed -> rf                      (feature maps, one stage at a time)
//   pca-fit     -> train -> predict -> calibrate    (out-of-core learning)
//   bench-chi2-error, bench-kernel-error, end2end   (CSV reports)
//   synth                                           (synthetic Dirichlet task)
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "chi2map/bench.hpp"
#include "chi2map/chebyshev.hpp"
#include "chi2map/chi2direct.hpp"
#include "chi2map/histio.hpp"
#include "chi2map/model_io.hpp"
#include "chi2map/oocpca.hpp"
#include "chi2map/pipeline.hpp"
#include "chi2map/rfmap.hpp"
#include "chi2map/synthetic.hpp"

using namespace chi2map;

namespace {

struct Common {
    std::string format;  // empty: infer from the file extension
    std::size_t chunk_rows = 4096;
    std::size_t bins = default_bins;
    bool strict_l1 = false;
    int threads = 0;
};

Format format_for(const Common& c, const std::string& path) {
    return c.format.empty() ? format_from_path(path) : parse_format(c.format);
}

// Chunk spec for a file, with the chunk size clamped to the row count.
ChunkSpec open_spec(const Common& c, const std::string& path, MatrixKind kind = MatrixKind::histogram) {
    const auto fmt = format_for(c, path);
    const auto shape = probe_shape(path, fmt);
    if (shape.rows == 0) throw EmptyMatrix("'" + path + "' has no rows");
    return ChunkSpec::from_file(path, fmt, std::min(c.chunk_rows, shape.rows), kind);
}

// Rows whose L1 norm is not 1 are legal input; warn, or reject under --strict-l1.
void check_l1(const Common& c, const ChunkSpec& spec, const std::string& path) {
    std::size_t bad = 0, first = 0;
    stream_chunks(spec, [&](std::size_t idx, const HistogramMatrix& chunk) {
        for (auto r : rows_failing_l1(chunk.values())) {
            if (bad++ == 0) first = idx * spec.chunk_rows + r;
        }
    });
    if (bad == 0) return;
    const auto msg = "'" + path + "': " + std::to_string(bad) + " row(s) do not sum to 1 (first: row " +
                     std::to_string(first) + ")";
    if (c.strict_l1) throw InvalidValue(msg, first);
    std::cerr << "warning: " << msg << '\n';
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        try {
            if (dots != std::string::npos) {
                const auto lo = std::stoull(item.substr(0, dots));
                const auto hi = std::stoull(item.substr(dots + 2));
                if (lo > hi) throw ParameterError("empty range '" + item + "'");
                for (auto v = lo; v <= hi; ++v) out.push_back(v);
            } else {
                out.push_back(std::stoull(item));
            }
        } catch (const std::logic_error&) {
            throw ParameterError("cannot parse count list '" + text + "'");
        }
    }
    if (out.empty()) throw ParameterError("empty count list");
    return out;
}

std::vector<EmbedMethod> parse_methods(const std::string& text) {
    std::vector<EmbedMethod> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
    if (out.empty()) throw ParameterError("empty method list");
    return out;
}

// -----------------------------------------------------------------------------
// Multi-kernel configuration: one `path method terms D gamma seed` record per line.
// -----------------------------------------------------------------------------

struct KernelRecord {
    std::string path;
    EmbedMethod method = EmbedMethod::direct;
    std::size_t terms = 5;
    std::size_t dims = 1000;
    double gamma = 0.75;
    std::uint64_t seed = 0;
};

std::vector<KernelRecord> read_kernel_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<KernelRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::string method;
        KernelRecord r;
        if (!(fields >> r.path)) continue;
        if (!(fields >> method >> r.terms >> r.dims >> r.gamma >> r.seed)) {
            throw ParseError(path + ": expected 'path method terms D gamma seed'", line_no - 1);
        }
        r.method = parse_method(method);
        out.push_back(r);
    }
    if (out.empty()) throw ParameterError(path + ": no kernel records");
    return out;
}

FeaturePipeline build_pipeline(const Common& c, const KernelRecord& r, const ChunkSpec& spec,
                               const std::string& params_path) {
    ParamVector k;
    if (r.method == EmbedMethod::direct) {
        k = params_path.empty() ? fit_params(spec, r.terms, c.bins) : read_params(params_path);
    }
    ChunkReader probe(spec);
    return make_pipeline(r.method, r.terms, k, probe.cols(), r.dims, r.gamma, r.seed);
}

void print_report(const BenchReport& report, const std::string& out) {
    if (out.empty() || out == "-") {
        report.write_csv(std::cout);
    } else {
        report.write_csv(out);
    }
}

// -----------------------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"Explicit feature maps for chi2 kernels, with out-of-core PCA and ridge learning"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--format", c.format, "Matrix file format (default: from extension)")
        ->check(CLI::IsMember({"csv", "bin", "binary"}));
    app.add_option("--chunk-rows", c.chunk_rows, "Rows per streamed chunk")->check(CLI::PositiveNumber);
    app.add_option("--bins", c.bins, "Bins of the value histogram used for fitting")
        ->check(CLI::PositiveNumber);
    app.add_flag("--strict-l1", c.strict_l1, "Reject rows that do not sum to 1");
    app.add_option("--threads", c.threads, "Cap on worker threads (0: runtime default)");

    // fit-params ---------------------------------------------------------------
    auto* fit = app.add_subcommand("fit-params", "Fit direct-series parameters to the data");
    std::string fit_in, fit_out = "-";
    std::size_t fit_n = 5;
    fit->add_option("-i,--input", fit_in, "Histogram matrix")->required();
    fit->add_option("-n,--n", fit_n, "Number of terms")->check(CLI::PositiveNumber);
    fit->add_option("-o,--out", fit_out, "Parameter file (one value per line; - for stdout)");

    // embed --------------------------------------------------------------------
    auto* emb = app.add_subcommand("embed", "Map histograms to the chi2 embedding");
    std::string emb_in, emb_out, emb_method = "direct", emb_params;
    std::size_t emb_terms = 5;
    emb->add_option("-i,--input", emb_in, "Histogram matrix")->required();
    emb->add_option("-o,--out", emb_out, "Embedding matrix")->required();
    emb->add_option("--method", emb_method, "direct or chebyshev");
    emb->add_option("--params", emb_params, "Direct-series parameter file");
    emb->add_option("--terms", emb_terms, "Chebyshev terms N (N+1 coefficients per dimension)");

    // rf -----------------------------------------------------------------------
    auto* rf = app.add_subcommand("rf", "Sample a random Fourier basis and optionally apply it");
    std::string rf_in, rf_out, rf_basis_out, rf_basis_in;
    std::size_t rf_dims = 1000, rf_embed_dim = 0;
    double rf_gamma = 0.75;
    std::uint64_t rf_seed = 0;
    rf->add_option("-i,--input", rf_in, "Embedding matrix to transform");
    rf->add_option("-o,--out", rf_out, "RF feature matrix");
    rf->add_option("--dims", rf_dims, "Number of random features D")->check(CLI::PositiveNumber);
    rf->add_option("--gamma", rf_gamma, "Gaussian kernel parameter (kernel exp(-2 gamma d))");
    rf->add_option("--seed", rf_seed, "Random seed");
    rf->add_option("--embed-dim", rf_embed_dim, "Embedding width (default: input columns)");
    rf->add_option("--basis-out", rf_basis_out, "Write the sampled basis here");
    rf->add_option("--basis", rf_basis_in, "Use this basis instead of sampling");

    // pca-fit ------------------------------------------------------------------
    auto* pf = app.add_subcommand("pca-fit", "Stream the data once and fit PCA on RF features");
    std::string pf_in, pf_labels, pf_model, pf_method = "direct", pf_params, pf_multi;
    std::vector<std::string> pf_unlabeled;
    std::size_t pf_keep = 500, pf_oversample = 3, pf_terms = 5;
    double pf_gamma = 0.75;
    std::uint64_t pf_seed = 0;
    pf->add_option("-i,--input", pf_in, "Histogram matrix (single kernel)");
    pf->add_option("--multi-kernel", pf_multi, "Kernel config: 'path method terms D gamma seed' per line");
    pf->add_option("-y,--labels", pf_labels, "Label matrix (+1/-1 per class)");
    pf->add_option("--include-unlabeled", pf_unlabeled, "Extra rows that enter the PCA moments only");
    pf->add_option("--dims-keep", pf_keep, "Principal components kept")->check(CLI::PositiveNumber);
    pf->add_option("--oversample", pf_oversample, "RF dimension = oversample * dims-keep")
        ->check(CLI::PositiveNumber);
    pf->add_option("--method", pf_method, "direct or chebyshev");
    pf->add_option("--terms", pf_terms, "Series terms N")->check(CLI::PositiveNumber);
    pf->add_option("--params", pf_params, "Direct-series parameters (default: fit on the input)");
    pf->add_option("--gamma", pf_gamma, "Gaussian kernel parameter");
    pf->add_option("--seed", pf_seed, "Random seed");
    pf->add_option("-m,--model-out", pf_model, "Model file")->required();

    // train --------------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "Ridge regression on the PCA-projected features");
    std::string tr_model, tr_out, tr_multi, tr_labels;
    double tr_lambda = 1.0;
    tr->add_option("-m,--model", tr_model, "Model file from pca-fit")->required();
    tr->add_option("-o,--model-out", tr_out, "Output model (default: overwrite --model)");
    tr->add_option("--lambda", tr_lambda, "Ridge penalty")->check(CLI::NonNegativeNumber);
    tr->add_option("--multi-kernel", tr_multi, "Second data pass over these kernels (two-stage)");
    tr->add_option("-y,--labels", tr_labels, "Labels for the second pass");

    // predict ------------------------------------------------------------------
    auto* pr = app.add_subcommand("predict", "Score new histograms with a trained model");
    std::string pr_model, pr_out;
    std::vector<std::string> pr_in;
    pr->add_option("-m,--model", pr_model, "Trained model")->required();
    pr->add_option("-i,--input", pr_in, "Histogram matrix per kernel, in model order")->required();
    pr->add_option("-o,--out", pr_out, "Score matrix")->required();

    // calibrate ----------------------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "Shift each class so its rank-th highest score is 0");
    std::string cal_in, cal_out;
    std::size_t cal_rank = 500;
    cal->add_option("-i,--input", cal_in, "Score matrix")->required();
    cal->add_option("-o,--out", cal_out, "Calibrated scores")->required();
    cal->add_option("--rank", cal_rank, "Order statistic to align (1 = highest)");

    // benchmarks ---------------------------------------------------------------
    PipelineConfig cfg;
    SweepOptions sweep;
    std::string cfg_path, methods_text = "direct,chebyshev", terms_text = "1..10",
                dims_text = "1000,3000,7000", bench_out = "-";

    auto* bce = app.add_subcommand("bench-chi2-error", "Scalar chi2 approximation error per N");
    std::string bce_in;
    bce->add_option("-i,--input", bce_in, "Histogram matrix")->required();
    bce->add_option("--methods", methods_text, "Comma-separated methods");
    bce->add_option("--terms-list", terms_text, "N values, e.g. 1..10 or 1,3,5");
    bce->add_option("--pairs", sweep.pairs, "Sampled value pairs")->check(CLI::PositiveNumber);
    bce->add_option("--seed", cfg.seed, "Sampling seed");
    bce->add_option("-o,--out", bench_out, "CSV output (- for stdout)");

    auto* bke = app.add_subcommand("bench-kernel-error", "RF Gram error against the exact exp-chi2 Gram");
    std::string bke_in;
    bke->add_option("-i,--input", bke_in, "Histogram matrix")->required();
    bke->add_option("--config", cfg_path, "PipelineConfig file (flags override)");
    bke->add_option("--methods", methods_text, "Comma-separated methods");
    bke->add_option("--terms", cfg.terms, "Series terms N")->check(CLI::PositiveNumber);
    bke->add_option("--dims-list", dims_text, "RF dimensions");
    bke->add_option("--seeds", sweep.seeds, "Seeds per configuration")->check(CLI::PositiveNumber);
    bke->add_option("--seed", cfg.seed, "First seed");
    bke->add_option("--gamma", cfg.gamma, "Gaussian kernel parameter");
    bke->add_option("-o,--out", bench_out, "CSV output (- for stdout)");

    auto* e2e = app.add_subcommand("end2end", "Exact vs approximate ridge accuracy on labeled data");
    std::string e2e_in, e2e_labels;
    std::uint64_t e2e_data_seed = 0;
    SyntheticSpec synth_spec;
    e2e->add_option("-i,--input", e2e_in, "Histogram matrix (default: synthetic Dirichlet task)");
    e2e->add_option("-y,--labels", e2e_labels, "Label matrix (+1/-1 per class)");
    e2e->add_option("--config", cfg_path, "PipelineConfig file (flags override)");
    e2e->add_option("--method", methods_text, "direct or chebyshev");
    e2e->add_option("--terms", cfg.terms, "Series terms N")->check(CLI::PositiveNumber);
    e2e->add_option("--dims-list", dims_text, "RF dimensions for the plain variant");
    e2e->add_option("--pca-keep", cfg.pca_keep, "Components kept by the PCA variant");
    e2e->add_option("--oversample", sweep.oversample, "PCA sampling factor");
    e2e->add_option("--lambda", cfg.lambda, "Ridge penalty");
    e2e->add_option("--gamma", cfg.gamma, "Gaussian kernel parameter");
    e2e->add_option("--seeds", sweep.seeds, "RF seeds")->check(CLI::PositiveNumber);
    e2e->add_option("--seed", cfg.seed, "First RF seed");
    e2e->add_option("--data-seed", e2e_data_seed, "Synthetic data seed");
    e2e->add_option("--rows", synth_spec.rows, "Synthetic rows");
    e2e->add_option("-o,--out", bench_out, "CSV output (- for stdout)");

    auto* syn = app.add_subcommand("synth", "Write the synthetic Dirichlet task");
    std::string syn_x, syn_y;
    std::uint64_t syn_seed = 0;
    syn->add_option("--rows", synth_spec.rows, "Rows")->check(CLI::PositiveNumber);
    syn->add_option("--dims", synth_spec.dims, "Histogram bins")->check(CLI::PositiveNumber);
    syn->add_option("--classes", synth_spec.classes, "Classes")->check(CLI::PositiveNumber);
    syn->add_option("--seed", syn_seed, "Seed");
    syn->add_option("--out-x", syn_x, "Histogram output")->required();
    syn->add_option("--out-y", syn_y, "Label output (+1/-1 per class)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::validation);
    }
    if (c.threads > 0) omp_set_num_threads(c.threads);

    if (*fit) {
        const auto spec = open_spec(c, fit_in);
        check_l1(c, spec, fit_in);
        const auto k = fit_params(spec, fit_n, c.bins);
        if (fit_out == "-") {
            for (double v : k.values()) std::printf("%.17g\n", v);
        } else {
            write_params(fit_out, k);
        }
    } else if (*emb) {
        const auto method = parse_method(emb_method);
        const auto spec = open_spec(c, emb_in);
        check_l1(c, spec, emb_in);
        ParamVector k;
        std::size_t terms = emb_terms;
        if (method == EmbedMethod::direct) {
            if (emb_params.empty()) throw ParameterError("direct embedding needs --params");
            k = read_params(emb_params);
            terms = k.size();
        }
        ChunkReader probe(spec);
        const auto width = embedding_width(method, terms, probe.cols());
        MatrixWriter out(emb_out, format_for(c, emb_out), spec.total_rows, width);
        stream_chunks(spec, [&](std::size_t, const HistogramMatrix& chunk) {
            out.append(method == EmbedMethod::direct ? embed_matrix(chunk, k)
                                                     : cheb_embed_matrix(chunk.values(), terms));
        });
        out.finish();
    } else if (*rf) {
        std::optional<ChunkSpec> spec;
        std::size_t embed_dim = rf_embed_dim;
        if (!rf_in.empty()) {
            // Embeddings may be negative; read them as unconstrained values.
            spec = open_spec(c, rf_in, MatrixKind::labels);
            ChunkReader probe(*spec);
            if (embed_dim == 0) embed_dim = probe.cols();
        }
        RFBasis basis;
        if (!rf_basis_in.empty()) {
            basis = read_basis(rf_basis_in);
        } else {
            if (embed_dim == 0) throw ParameterError("rf needs --input or --embed-dim to size the basis");
            basis = sample_basis(embed_dim, rf_dims, rf_gamma, rf_seed);
        }
        if (!rf_basis_out.empty()) write_basis(rf_basis_out, basis);
        if (spec) {
            if (rf_out.empty()) throw ParameterError("rf --input needs --out");
            MatrixWriter out(rf_out, format_for(c, rf_out), spec->total_rows, basis.dims);
            ChunkReader reader(*spec);
            while (auto chunk = reader.next()) out.append(rf_transform(*chunk, basis));
            out.finish();
        }
    } else if (*pf) {
        std::vector<KernelRecord> records;
        if (!pf_multi.empty()) {
            if (!pf_in.empty()) throw ParameterError("use either --input or --multi-kernel");
            records = read_kernel_config(pf_multi);
        } else {
            if (pf_in.empty()) throw ParameterError("pca-fit needs --input or --multi-kernel");
            records.push_back({pf_in, parse_method(pf_method), pf_terms, pf_oversample * pf_keep, pf_gamma, pf_seed});
        }
        DataStream data;
        std::vector<FeaturePipeline> pipes;
        for (const auto& r : records) {
            data.inputs.push_back(open_spec(c, r.path));
            check_l1(c, data.inputs.back(), r.path);
            pipes.push_back(build_pipeline(c, r, data.inputs.back(), pf_multi.empty() ? pf_params : ""));
        }
        if (!pf_labels.empty()) data.labels = open_spec(c, pf_labels, MatrixKind::labels);
        auto acc = accumulate(data, pipes);
        if (!pf_unlabeled.empty()) {
            if (pf_unlabeled.size() != pipes.size()) {
                throw AlignmentError("--include-unlabeled needs one matrix per kernel");
            }
            DataStream extra;
            for (const auto& p : pf_unlabeled) extra.inputs.push_back(open_spec(c, p));
            accumulate_unlabeled(acc, extra, pipes);
        }
        ModelFile model;
        model.pca = eig_centered(acc, std::min(pf_keep, acc.dim()));
        model.pipelines = std::move(pipes);
        model.moments = std::move(acc);
        write_model(pf_model, model);
    } else if (*tr) {
        auto model = read_model(tr_model);
        if (!tr_multi.empty()) {
            const auto records = read_kernel_config(tr_multi);
            if (records.size() != model.pipelines.size()) {
                throw ConsistencyError("kernel config lists " + std::to_string(records.size()) +
                                       " kernels, the model has " + std::to_string(model.pipelines.size()));
            }
            DataStream data;
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& r = records[i];
                const auto& p = model.pipelines[i];
                if (r.method != p.method || r.terms != p.terms || r.dims != p.basis.dims ||
                    r.gamma != p.basis.gamma || r.seed != p.basis.seed) {
                    throw ConsistencyError("kernel " + std::to_string(i) +
                                           " does not match the bases used for PCA");
                }
                data.inputs.push_back(open_spec(c, r.path));
            }
            if (tr_labels.empty()) throw ParameterError("two-stage training needs --labels");
            data.labels = open_spec(c, tr_labels, MatrixKind::labels);
            model.ridge = two_stage_multikernel(data, model.pipelines, model.pca, tr_lambda);
        } else {
            if (!model.moments) throw ParameterError("model has no stored moments; pass --multi-kernel");
            model.ridge = ridge_after_pca(*model.moments, model.pca, tr_lambda);
        }
        write_model(tr_out.empty() ? tr_model : tr_out, model);
    } else if (*pr) {
        const auto model = read_model(pr_model);
        if (!model.ridge) throw ParameterError("model is not trained; run train first");
        if (pr_in.size() != model.pipelines.size()) {
            throw AlignmentError("model has " + std::to_string(model.pipelines.size()) +
                                 " kernels but " + std::to_string(pr_in.size()) + " inputs were given");
        }
        std::vector<ChunkReader> readers;
        std::size_t rows = 0;
        for (const auto& path : pr_in) {
            const auto spec = open_spec(c, path);
            if (!readers.empty() && spec.total_rows != rows) throw AlignmentError("inputs differ in row count");
            rows = spec.total_rows;
            readers.emplace_back(spec);
        }
        MatrixWriter out(pr_out, format_for(c, pr_out), rows, model.ridge->w_orig.cols());
        for (;;) {
            std::vector<RowMatrix> chunks;
            for (auto& r : readers) {
                auto chunk = r.next();
                if (!chunk) break;
                chunks.push_back(std::move(*chunk));
            }
            if (chunks.empty()) break;
            out.append(predict(*model.ridge, model.pca, transform_all(model.pipelines, chunks)));
        }
        out.finish();
    } else if (*cal) {
        const auto scores = read_raw(cal_in, format_for(c, cal_in), MatrixKind::labels);
        const RowMatrix shifted = calibrate_scores(scores, cal_rank);
        write_matrix(cal_out, shifted, format_for(c, cal_out));
    } else if (*bce) {
        const auto spec = open_spec(c, bce_in);
        check_l1(c, spec, bce_in);
        sweep.methods = parse_methods(methods_text);
        sweep.terms_list = parse_count_list(terms_text);
        sweep.bins = c.bins;
        print_report(cmd_bench_chi2_error(spec, cfg, sweep), bench_out);
    } else if (*bke || *e2e) {
        auto* sub = *bke ? bke : e2e;
        if (*e2e && !sub->count("--method")) methods_text = "direct";
        if (!cfg_path.empty()) {
            // Config file values apply unless the flag was given explicitly.
            const auto file = read_config(cfg_path);
            if (!sub->count("--terms")) cfg.terms = file.terms;
            if (!sub->count("--seed")) cfg.seed = file.seed;
            if (!sub->count("--gamma")) cfg.gamma = file.gamma;
            if (!sub->count("--method") && !sub->count("--methods")) methods_text = to_string(file.method);
            if (*e2e && !sub->count("--pca-keep")) cfg.pca_keep = file.pca_keep;
            if (*e2e && !sub->count("--lambda")) cfg.lambda = file.lambda;
            if (!sub->count("--dims-list")) dims_text = std::to_string(file.rf_dims);
            cfg.chunk_rows = file.chunk_rows;
            cfg.paths = file.paths;
        } else {
            cfg.chunk_rows = c.chunk_rows;
        }
        sweep.methods = parse_methods(methods_text);
        sweep.dims_list = parse_count_list(dims_text);
        sweep.bins = c.bins;
        if (*bke) {
            const auto X = read_matrix(bke_in, format_for(c, bke_in));
            print_report(cmd_bench_kernel_error(X, cfg, sweep), bench_out);
        } else {
            if (sweep.methods.size() != 1) throw ParameterError("end2end takes a single --method");
            cfg.method = sweep.methods.front();
            LabeledData data;
            if (e2e_in.empty() && !cfg.paths.empty()) e2e_in = cfg.paths.front();
            if (e2e_labels.empty() && cfg.paths.size() > 1) e2e_labels = cfg.paths[1];
            if (e2e_in.empty()) {
                auto task = make_dirichlet_task(synth_spec, e2e_data_seed);
                data.X = std::move(task.X);
                data.y = std::move(task.y);
                data.classes = synth_spec.classes;
            } else {
                if (e2e_labels.empty()) throw ParameterError("end2end --input needs --labels");
                data.X = read_matrix(e2e_in, format_for(c, e2e_in));
                const auto Y = read_labels(e2e_labels, format_for(c, e2e_labels));
                data.classes = static_cast<int>(Y.classes());
                for (Eigen::Index i = 0; i < Y.values().rows(); ++i) {
                    Eigen::Index best = 0;
                    Y.values().row(i).maxCoeff(&best);
                    data.y.push_back(static_cast<int>(best));
                }
            }
            print_report(cmd_end2end(data, cfg, sweep), bench_out);
        }
    } else if (*syn) {
        const auto task = make_dirichlet_task(synth_spec, syn_seed);
        write_matrix(syn_x, task.X.values(), format_for(c, syn_x));
        write_matrix(syn_y, LabelMatrix::one_vs_all(task.y, synth_spec.classes).values(),
                     format_for(c, syn_y));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return static_cast<int>(ExitCode::numerical);
    }
}
