#include <gtest/gtest.h>

#include <bit>
#include <random>
#include <vector>

#include "smc/kernels/reduce.hpp"

namespace {

using smc::kernels::ReductionKernels;

std::vector<const ReductionKernels*> vectorVariants() {
    std::vector<const ReductionKernels*> out;
    if (auto* k = smc::kernels::avx2Kernels()) out.push_back(k);
    if (auto* k = smc::kernels::neonKernels()) out.push_back(k);
    return out;
}

std::vector<double> sample(std::size_t n, std::uint32_t seed) {
    std::mt19937_64 gen(seed);
    std::lognormal_distribution<double> mag(0.0, 3.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> x(n);
    for (auto& v : x) v = (sign(gen) ? -1.0 : 1.0) * mag(gen);
    return x;
}

TEST(Kernels, ScalarSumFollowsLaneOrder) {
    const std::vector<double> x{1e16, 1.0, -1e16, 1.0, 3.0, 0.5};
    const double lanes = (1e16 + 1.0) + (-1e16 + 1.0);
    EXPECT_EQ(smc::kernels::scalarKernels().sum(x.data(), 4), lanes);
    EXPECT_EQ(smc::kernels::scalarKernels().sum(x.data(), x.size()), lanes + 3.0 + 0.5);
}

TEST(Kernels, VectorVariantsAreBitIdenticalToScalar) {
    const auto& ref = smc::kernels::scalarKernels();
    for (const auto* k : vectorVariants()) {
        for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 64u, 65u, 1000u, 4099u}) {
            const auto x = sample(n, static_cast<std::uint32_t>(n + 11));
            const double c = n ? x[0] * 0.25 : 0.0;
            EXPECT_EQ(std::bit_cast<std::uint64_t>(k->sum(x.data(), n)),
                      std::bit_cast<std::uint64_t>(ref.sum(x.data(), n)))
                << k->name << " n=" << n;
            EXPECT_EQ(std::bit_cast<std::uint64_t>(k->sumSquaredDeviations(x.data(), n, c)),
                      std::bit_cast<std::uint64_t>(ref.sumSquaredDeviations(x.data(), n, c)))
                << k->name << " n=" << n;
            EXPECT_EQ(std::bit_cast<std::uint64_t>(k->lag1CrossProducts(x.data(), n, c)),
                      std::bit_cast<std::uint64_t>(ref.lag1CrossProducts(x.data(), n, c)))
                << k->name << " n=" << n;
        }
    }
}

TEST(Kernels, ReductionsMatchDirectFormulas) {
    const auto x = sample(257, 3);
    const auto& k = smc::kernels::active();
    long double s = 0, ss = 0, lag = 0;
    const double c = 0.7;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i];
        ss += (x[i] - c) * (x[i] - c);
        if (i + 1 < x.size()) lag += (x[i] - c) * (x[i + 1] - c);
    }
    EXPECT_NEAR(k.sum(x.data(), x.size()), static_cast<double>(s), 1e-9 * std::abs(static_cast<double>(ss)));
    EXPECT_NEAR(k.sumSquaredDeviations(x.data(), x.size(), c), static_cast<double>(ss), 1e-12 * static_cast<double>(ss));
    EXPECT_NEAR(k.lag1CrossProducts(x.data(), x.size(), c), static_cast<double>(lag), 1e-9 * static_cast<double>(ss));
}

TEST(Kernels, ChunkedSumEqualsChunkwiseReduction) {
    const auto x = sample(3 * smc::kernels::ChunkedSum::kChunk + 17, 5);
    smc::kernels::ChunkedSum acc;
    for (double v : x) acc.add(v);
    double expected = 0.0;
    for (std::size_t i = 0; i < x.size(); i += smc::kernels::ChunkedSum::kChunk) {
        const std::size_t len = std::min(smc::kernels::ChunkedSum::kChunk, x.size() - i);
        expected += smc::kernels::scalarKernels().sum(x.data() + i, len);
    }
    EXPECT_EQ(acc.total(), expected);
    EXPECT_EQ(acc.count(), x.size());
    acc.clear();
    EXPECT_EQ(acc.total(), 0.0);
    EXPECT_EQ(acc.count(), 0u);
}

}  // namespace
