#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nplsa/corpus.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/synthgen.hpp"

namespace testing {

using Counts = std::vector<std::pair<std::string, long long>>;

// Builds a corpus from per-document term counts; vocabulary in first-appearance order.
inline nplsa::Corpus make_corpus(const std::vector<Counts>& docs) {
    std::vector<nplsa::SparseTriple> triples;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& [term, count] : docs[d]) triples.push_back({std::to_string(d), term, count, 0});
    }
    return nplsa::ingest_sparse(triples);
}

inline std::vector<double> one_hot(std::size_t V, std::size_t w) {
    std::vector<double> p(V, 0.0);
    p[w] = 1.0;
    return p;
}

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline double row_sum(std::span<const double> row) {
    double s = 0.0;
    for (double x : row) s += x;
    return s;
}

inline nplsa::SyntheticCorpus desk_corpus(std::uint64_t seed) {
    auto cfg = nplsa::SynthConfig::desk();
    cfg.seed = seed;
    return nplsa::generate_corpus(cfg);
}

}  // namespace testing
