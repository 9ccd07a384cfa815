// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to vary the thread count.

#include <map>

#include <benchmark/benchmark.h>

#include "chi2map/chebyshev.hpp"
#include "chi2map/chi2direct.hpp"
#include "chi2map/oocpca.hpp"
#include "chi2map/rfmap.hpp"
#include "chi2map/synthetic.hpp"

using namespace chi2map;

namespace {

const HistogramMatrix& histograms(std::size_t rows) {
    static std::map<std::size_t, HistogramMatrix> cache;
    auto it = cache.find(rows);
    if (it == cache.end()) it = cache.emplace(rows, dirichlet_rows(rows, 64, 0.5, 1)).first;
    return it->second;
}

const ParamVector& params() {
    static const ParamVector k = fit_params(histograms(1024), 5);
    return k;
}

template <RowMatrix (*Embed)(const RowMatrix&, const ParamVector&)>
void BM_DirectEmbed(benchmark::State& state) {
    const auto& X = histograms(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Embed(X.values(), params()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <RowMatrix (*Embed)(const RowMatrix&, std::size_t)>
void BM_ChebEmbed(benchmark::State& state) {
    const auto& X = histograms(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Embed(X.values(), 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <RFBasis (*Sample)(std::size_t, std::size_t, double, std::uint64_t)>
void BM_SampleBasis(benchmark::State& state) {
    const auto D = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Sample(320, D, 0.75, 7));
}

template <RowMatrix (*Transform)(const RowMatrix&, const RFBasis&)>
void BM_RfTransform(benchmark::State& state) {
    const auto D = static_cast<std::size_t>(state.range(0));
    const RowMatrix C = embed_matrix(histograms(512), params());
    const auto basis = sample_basis(static_cast<std::size_t>(C.cols()), D, 0.75, 7);
    for (auto _ : state) benchmark::DoNotOptimize(Transform(C, basis));
    state.SetItemsProcessed(state.iterations() * C.rows());
}

template <Eigen::MatrixXd (*Gram)(const RowMatrix&, const RowMatrix&, double)>
void BM_ExactGram(benchmark::State& state) {
    const auto& X = histograms(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Gram(X.values(), X.values(), 1.5));
}

template <MomentAccumulator (*Accumulate)(const ChunkSpec&, const ChunkSpec*)>
void BM_Accumulate(benchmark::State& state) {
    const auto D = state.range(0);
    const RowMatrix Z = RowMatrix::Random(2048, D);
    const RowMatrix Y = RowMatrix::Random(2048, 10);
    const auto features = ChunkSpec::from_memory(Z, 512);
    const auto labels = ChunkSpec::from_memory(Y, 512, MatrixKind::labels);
    for (auto _ : state) benchmark::DoNotOptimize(Accumulate(features, &labels));
    state.SetItemsProcessed(state.iterations() * Z.rows());
}

}  // namespace

BENCHMARK(BM_DirectEmbed<embed_matrix_serial>)->Name("embed_direct/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_DirectEmbed<embed_matrix>)->Name("embed_direct/omp")->Arg(256)->Arg(4096);
BENCHMARK(BM_ChebEmbed<cheb_embed_matrix_serial>)->Name("embed_chebyshev/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_ChebEmbed<cheb_embed_matrix>)->Name("embed_chebyshev/omp")->Arg(256)->Arg(4096);
BENCHMARK(BM_SampleBasis<sample_basis_serial>)->Name("sample_basis/serial")->Arg(512)->Arg(2048);
BENCHMARK(BM_SampleBasis<sample_basis>)->Name("sample_basis/omp")->Arg(512)->Arg(2048);
BENCHMARK(BM_RfTransform<rf_transform_serial>)->Name("rf_transform/serial")->Arg(256)->Arg(1024)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RfTransform<rf_transform>)->Name("rf_transform/omp")->Arg(256)->Arg(1024)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactGram<exp_chi2_gram_serial>)->Name("exp_chi2_gram/serial")->Arg(256)->Arg(1024)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactGram<exp_chi2_gram>)->Name("exp_chi2_gram/omp")->Arg(256)->Arg(1024)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Accumulate<accumulate_features_serial>)->Name("accumulate/serial")->Arg(128)->Arg(512)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Accumulate<accumulate_features>)->Name("accumulate/omp")->Arg(128)->Arg(512)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
