#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nplsa/corpus.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/synthgen.hpp"

namespace nplsa {

/// Mean over learned topics of the L2 distance to the nearest truth topic.
double topic_quality_error(const TopicSet& learned, std::span<const std::vector<double>> truth);
double topic_quality_error(const TopicSet& learned, const SyntheticTruth& truth);

/// Mean over truth topics of the L2 distance to the nearest learned topic.
double topic_coverage_error(const TopicSet& learned, std::span<const std::vector<double>> truth);
double topic_coverage_error(const TopicSet& learned, const SyntheticTruth& truth);

/// Document and co-document frequencies from a reference corpus.
class CooccurrenceStats {
  public:
    static constexpr int kFormatVersion = 1;

    CooccurrenceStats() = default;
    CooccurrenceStats(Vocabulary vocab, std::size_t n_docs, std::vector<std::uint32_t> df,
                      std::unordered_map<std::uint64_t, std::uint32_t> co_df);

    static CooccurrenceStats from_corpus(const Corpus& reference);

    const Vocabulary& vocab() const { return vocab_; }
    std::size_t n_docs() const { return n_docs_; }
    std::uint32_t df(TermId w) const { return w < df_.size() ? df_[w] : 0; }
    std::uint32_t co_df(TermId a, TermId b) const;

    void save(std::ostream& out) const;
    static CooccurrenceStats load(std::istream& in);

  private:
    static std::uint64_t key(TermId a, TermId b);

    Vocabulary vocab_;
    std::size_t n_docs_ = 0;
    std::vector<std::uint32_t> df_;
    std::unordered_map<std::uint64_t, std::uint32_t> co_df_;
};

struct PmiConfig {
    std::size_t top_n = 20;
};

/// Zero counts are replaced by 0.5 before forming probabilities.
double pair_pmi(const CooccurrenceStats& stats, std::optional<TermId> a, std::optional<TermId> b);

/// Mean over topics of the average pairwise PMI among the topic's top-N
/// words. Topic words are matched to the reference vocabulary by term
/// string; words the reference never saw count as df = 0.5.
double pmi_coherence(const TopicSet& topics, const Vocabulary& topic_vocab, const CooccurrenceStats& stats,
                     const PmiConfig& config = {});

struct PerplexityResult {
    double perplexity = 0.0;
    double predicted_loglik = 0.0;
    std::uint64_t predicted_tokens = 0;
    std::size_t docs_used = 0;
    std::size_t docs_skipped = 0;
};

struct HeldoutSplit {
    Document observed;               // fitted by fold-in
    std::vector<TermId> predicted;   // scored tokens
};

/// Shuffles the document's tokens on the (seed, d) heldout_split stream and
/// keeps the first floor(fraction * N), clamped to [1, N - 1], as observed.
/// Returns nullopt for documents with fewer than two tokens.
std::optional<HeldoutSplit> split_document(const Document& doc, double fraction, std::uint64_t seed, std::size_t d);

/// exp(-sum log p(second part | fold-in on first part) / |second parts|).
/// Documents with fewer than two tokens are skipped with a warning.
PerplexityResult perplexity(const Corpus& held_out, const TopicSet& topics, double split_fraction,
                            const EmConfig& config);

}  // namespace nplsa
