#include "nplsa/synthgen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nplsa/autostop.hpp"
#include "nplsa/errors.hpp"
#include "nplsa/rng.hpp"

namespace nplsa {

SynthConfig SynthConfig::paper() { return SynthConfig{}; }

SynthConfig SynthConfig::desk() {
    SynthConfig c;
    c.n_docs = 200;
    c.doc_len = 100;
    c.n_topics = 10;
    c.vocab_size = 500;
    return c;
}

void SynthConfig::validate() const {
    if (n_docs == 0 || doc_len == 0 || n_topics == 0 || vocab_size == 0) {
        throw std::invalid_argument("synthetic corpus sizes must be positive");
    }
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("Dirichlet parameters must be positive");
    if (!(min_topic_dist >= 0.0 && min_topic_dist < std::sqrt(2.0))) {
        throw std::invalid_argument("min_topic_dist must lie in [0, sqrt(2))");
    }
}

std::string synth_term(std::size_t word) { return "w" + std::to_string(word); }

std::vector<std::vector<double>> sample_distinct_topics(const SynthConfig& config) {
    config.validate();
    CounterRng rng(config.seed, StreamPurpose::synth_topics);
    std::vector<std::vector<double>> accepted;
    const std::size_t max_rejections = 10000 * config.n_topics;
    std::size_t rejections = 0;
    while (accepted.size() < config.n_topics) {
        auto candidate = rng.dirichlet(config.beta, config.vocab_size);
        bool distinct = true;
        for (const auto& t : accepted) {
            if (l2_distance(candidate, t) <= config.min_topic_dist) {
                distinct = false;
                break;
            }
        }
        if (distinct) {
            accepted.push_back(std::move(candidate));
        } else if (++rejections > max_rejections) {
            throw AlgorithmError("distinctness threshold unsatisfiable: " + std::to_string(rejections) +
                                 " rejections after accepting " + std::to_string(accepted.size()) + " of " +
                                 std::to_string(config.n_topics) + " topics");
        }
    }
    return accepted;
}

SyntheticCorpus generate_corpus(const SynthConfig& config) {
    auto topics = sample_distinct_topics(config);
    const std::size_t K = config.n_topics;
    const std::size_t V = config.vocab_size;

    std::vector<std::vector<double>> word_cdf(K, std::vector<double>(V));
    for (std::size_t k = 0; k < K; ++k) std::partial_sum(topics[k].begin(), topics[k].end(), word_cdf[k].begin());

    std::vector<std::string> terms(V);
    for (std::size_t w = 0; w < V; ++w) terms[w] = synth_term(w);

    SyntheticTruth truth;
    truth.topics = std::move(topics);
    std::vector<Document> docs(config.n_docs);
    std::vector<std::string> ids(config.n_docs);
    std::vector<std::vector<TokenAssignment>> assignments(config.n_docs);
    std::vector<double> mix_cdf(K);
    std::vector<std::uint32_t> counts(V);
    for (std::size_t d = 0; d < config.n_docs; ++d) {
        CounterRng rng(config.seed, StreamPurpose::synth_doc, static_cast<std::uint32_t>(d));
        auto mix = rng.dirichlet(config.alpha, K);
        std::partial_sum(mix.begin(), mix.end(), mix_cdf.begin());
        std::fill(counts.begin(), counts.end(), 0u);
        auto& tokens = assignments[d];
        tokens.reserve(config.doc_len);
        for (std::size_t n = 0; n < config.doc_len; ++n) {
            const auto z = rng.categorical_cdf(mix_cdf);
            const auto w = rng.categorical_cdf(word_cdf[z]);
            ++counts[w];
            tokens.push_back({static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(w)});
        }
        for (std::size_t w = 0; w < V; ++w) {
            if (counts[w] > 0) docs[d].entries.push_back({static_cast<TermId>(w), counts[w]});
        }
        ids[d] = std::to_string(d);
        truth.doc_mixes.push_back(std::move(mix));
    }
    return {Corpus(Vocabulary(std::move(terms)), std::move(docs), std::move(ids)), std::move(truth),
            std::move(assignments)};
}

}  // namespace nplsa
