#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "nplsa/rng.hpp"

using namespace nplsa;

TEST_CASE("philox4x32-10 known answers") {
    using W = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and separated") {
    CounterRng a(42, StreamPurpose::synth_doc, 3), b(42, StreamPurpose::synth_doc, 3);
    CounterRng c(42, StreamPurpose::synth_doc, 4), d(42, StreamPurpose::topic_init, 3), e(43, StreamPurpose::synth_doc, 3);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        if (i == 0) firsts = {x, c.next_u64(), d.next_u64(), e.next_u64()};
    }
    CHECK(firsts.size() == 4);
}

TEST_CASE("uniform lies in (0,1) with the right moments") {
    CounterRng r(1, StreamPurpose::synth_doc);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("below is unbiased over a small range") {
    CounterRng r(5, StreamPurpose::doc_order);
    std::array<int, 7> hist{};
    const int n = 70000;
    for (int i = 0; i < n; ++i) hist[r.below(7)]++;
    for (int h : hist) CHECK(std::abs(h - n / 7) < 4 * std::sqrt(n / 7.0));
}

TEST_CASE("gamma draws match shape moments") {
    for (double shape : {0.01, 0.1, 1.0, 5.0}) {
        CounterRng r(9, StreamPurpose::synth_topics, static_cast<std::uint32_t>(shape * 100));
        const int n = 100000;
        double s = 0;
        for (int i = 0; i < n; ++i) s += std::exp(r.log_gamma_draw(shape));
        // mean of Gamma(shape, 1) is shape, sd of the sample mean sqrt(shape / n)
        CHECK(std::abs(s / n - shape) < 5 * std::sqrt(shape / n));
    }
}

TEST_CASE("dirichlet draws are simplex vectors, even for tiny concentration") {
    CounterRng r(3, StreamPurpose::synth_topics);
    for (double alpha : {0.001, 0.01, 1.0, 1000.0}) {
        const auto p = r.dirichlet(alpha, 500);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::all_of(p.begin(), p.end(), [](double x) { return x >= 0.0 && std::isfinite(x); }));
    }
}

TEST_CASE("categorical_cdf follows the cdf") {
    CounterRng r(11, StreamPurpose::synth_doc);
    const std::vector<double> cdf{0.2, 0.5, 1.0};
    std::array<int, 3> hist{};
    const int n = 60000;
    for (int i = 0; i < n; ++i) hist[r.categorical_cdf(cdf)]++;
    CHECK(std::abs(hist[0] - 0.2 * n) < 5 * std::sqrt(n * 0.16));
    CHECK(std::abs(hist[1] - 0.3 * n) < 5 * std::sqrt(n * 0.21));
}

TEST_CASE("shuffled_order is a seeded permutation") {
    const auto a = shuffled_order(50, 7), b = shuffled_order(50, 7), c = shuffled_order(50, 8);
    CHECK(a == b);
    CHECK(a != c);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}
