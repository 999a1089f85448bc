#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nplsa/corpus.hpp"

namespace nplsa {

struct SynthConfig {
    std::size_t n_docs = 1000;
    std::size_t doc_len = 200;
    std::size_t n_topics = 20;
    std::size_t vocab_size = 1000;
    double alpha = 0.1;   // Dirichlet concentration of document mixes
    double beta = 0.01;   // Dirichlet concentration of topic rows
    double min_topic_dist = 0.5;
    std::uint64_t seed = 0;

    /// 1000 docs x 200 tokens, 20 topics over 1000 words.
    static SynthConfig paper();
    /// 200 docs x 100 tokens, 10 topics over 500 words.
    static SynthConfig desk();

    void validate() const;
};

struct SyntheticTruth {
    std::vector<std::vector<double>> topics;
    std::vector<std::vector<double>> doc_mixes;
};

/// One (topic, word) pair per generated token.
struct TokenAssignment {
    std::uint32_t topic;
    std::uint32_t word;
};

struct SyntheticCorpus {
    /// Vocabulary holds all vocab_size terms "w0", "w1", ... in id order, so
    /// truth topic rows index it directly, even for words never drawn.
    Corpus corpus;
    SyntheticTruth truth;
    std::vector<std::vector<TokenAssignment>> assignments;
};

/// Draw Dirichlet(beta) rows and keep one only when its L2 distance to every
/// accepted row exceeds min_topic_dist. Throws AlgorithmError after
/// 10000 * n_topics rejections.
std::vector<std::vector<double>> sample_distinct_topics(const SynthConfig& config);

/// LDA generative process over the distinct topics. Document d uses its own
/// (seed, d) stream, so the output does not depend on generation order.
SyntheticCorpus generate_corpus(const SynthConfig& config);

std::string synth_term(std::size_t word);

}  // namespace nplsa
