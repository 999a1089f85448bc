#include "nplsa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "nplsa/autostop.hpp"
#include "nplsa/errors.hpp"
#include "nplsa/rng.hpp"

namespace nplsa {

namespace {

void check_vocab(const TopicSet& learned, std::span<const std::vector<double>> truth) {
    if (learned.num_topics() == 0 || truth.empty()) throw std::invalid_argument("empty topic set");
    for (const auto& t : truth) {
        if (t.size() != learned.vocab_size()) throw DataError("vocabulary mismatch between learned and truth topics");
    }
}

}  // namespace

double topic_quality_error(const TopicSet& learned, std::span<const std::vector<double>> truth) {
    check_vocab(learned, truth);
    double total = 0.0;
    for (std::size_t j = 0; j < learned.num_topics(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : truth) best = std::min(best, l2_distance(learned.topic(j), t));
        total += best;
    }
    return total / static_cast<double>(learned.num_topics());
}

double topic_quality_error(const TopicSet& learned, const SyntheticTruth& truth) {
    return topic_quality_error(learned, truth.topics);
}

double topic_coverage_error(const TopicSet& learned, std::span<const std::vector<double>> truth) {
    check_vocab(learned, truth);
    double total = 0.0;
    for (const auto& t : truth) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < learned.num_topics(); ++j) best = std::min(best, l2_distance(learned.topic(j), t));
        total += best;
    }
    return total / static_cast<double>(truth.size());
}

double topic_coverage_error(const TopicSet& learned, const SyntheticTruth& truth) {
    return topic_coverage_error(learned, truth.topics);
}

CooccurrenceStats::CooccurrenceStats(Vocabulary vocab, std::size_t n_docs, std::vector<std::uint32_t> df,
                                     std::unordered_map<std::uint64_t, std::uint32_t> co_df)
    : vocab_(std::move(vocab)), n_docs_(n_docs), df_(std::move(df)), co_df_(std::move(co_df)) {
    if (df_.size() != vocab_.size()) throw DataError("co-occurrence stats: df length does not match vocabulary");
}

std::uint64_t CooccurrenceStats::key(TermId a, TermId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::uint32_t CooccurrenceStats::co_df(TermId a, TermId b) const {
    if (a == b) return df(a);
    const auto it = co_df_.find(key(a, b));
    return it == co_df_.end() ? 0 : it->second;
}

CooccurrenceStats CooccurrenceStats::from_corpus(const Corpus& reference) {
    std::vector<std::uint32_t> df(reference.vocab_size(), 0);
    std::unordered_map<std::uint64_t, std::uint32_t> co;
    for (const auto& doc : reference.docs()) {
        const auto& row = doc.entries;
        for (std::size_t i = 0; i < row.size(); ++i) {
            ++df[row[i].term];
            for (std::size_t j = i + 1; j < row.size(); ++j) ++co[key(row[i].term, row[j].term)];
        }
    }
    return CooccurrenceStats(reference.vocab(), reference.num_docs(), std::move(df), std::move(co));
}

void CooccurrenceStats::save(std::ostream& out) const {
    // Pairs sorted by key so the file is reproducible.
    std::map<std::uint64_t, std::uint32_t> ordered(co_df_.begin(), co_df_.end());
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [k, c] : ordered) pairs.push_back({k >> 32, k & 0xffffffffu, c});
    nlohmann::json j{{"format", "nplsa-cooccurrence"},
                     {"version", kFormatVersion},
                     {"n_docs", n_docs_},
                     {"vocab", vocab_.terms()},
                     {"df", df_},
                     {"pairs", pairs}};
    out << j.dump() << '\n';
}

CooccurrenceStats CooccurrenceStats::load(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("co-occurrence stats: ") + e.what());
    }
    if (j.value("format", "") != "nplsa-cooccurrence") throw DataError("co-occurrence stats: unknown format");
    if (j.value("version", 0) != kFormatVersion) throw DataError("co-occurrence stats: unsupported version");
    std::unordered_map<std::uint64_t, std::uint32_t> co;
    for (const auto& p : j.at("pairs")) co[key(p.at(0).get<TermId>(), p.at(1).get<TermId>())] = p.at(2).get<std::uint32_t>();
    return CooccurrenceStats(Vocabulary(j.at("vocab").get<std::vector<std::string>>()), j.at("n_docs").get<std::size_t>(),
                             j.at("df").get<std::vector<std::uint32_t>>(), std::move(co));
}

double pair_pmi(const CooccurrenceStats& stats, std::optional<TermId> a, std::optional<TermId> b) {
    const double n = static_cast<double>(stats.n_docs());
    auto df = [&](std::optional<TermId> w) {
        const double f = w ? stats.df(*w) : 0.0;
        return f > 0.0 ? f : 0.5;
    };
    double co = (a && b) ? stats.co_df(*a, *b) : 0.0;
    if (co == 0.0) co = 0.5;
    return std::log((co / n) / ((df(a) / n) * (df(b) / n)));
}

double pmi_coherence(const TopicSet& topics, const Vocabulary& topic_vocab, const CooccurrenceStats& stats,
                     const PmiConfig& config) {
    if (config.top_n < 2) throw std::invalid_argument("top_n must be >= 2");
    if (topics.vocab_size() != topic_vocab.size()) throw DataError("topic vocabulary size mismatch");
    if (topics.num_topics() == 0) throw std::invalid_argument("pmi_coherence needs at least one topic");
    double total = 0.0;
    for (std::size_t k = 0; k < topics.num_topics(); ++k) {
        std::vector<std::optional<TermId>> ids;
        for (const auto w : top_words(topics.topic(k), config.top_n)) {
            ids.push_back(stats.vocab().find(topic_vocab.term(static_cast<TermId>(w))));
        }
        const std::size_t n = ids.size();
        if (n < 2) throw std::invalid_argument("vocabulary too small for PMI");
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) sum += pair_pmi(stats, ids[i], ids[j]);
        }
        total += 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
    }
    return total / static_cast<double>(topics.num_topics());
}

std::optional<HeldoutSplit> split_document(const Document& doc, double fraction, std::uint64_t seed, std::size_t d) {
    std::vector<TermId> tokens;
    for (const auto& e : doc.entries) tokens.insert(tokens.end(), e.count, e.term);
    const std::size_t n = tokens.size();
    if (n < 2) return std::nullopt;

    CounterRng rng(seed, StreamPurpose::heldout_split, static_cast<std::uint32_t>(d));
    for (std::size_t i = n; i > 1; --i) std::swap(tokens[i - 1], tokens[rng.below(i)]);

    const auto observed_len =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))), 1, n - 1);
    std::map<TermId, std::uint32_t> counts;
    for (std::size_t i = 0; i < observed_len; ++i) ++counts[tokens[i]];
    HeldoutSplit split;
    for (const auto& [term, count] : counts) split.observed.entries.push_back({term, count});
    split.predicted.assign(tokens.begin() + static_cast<std::ptrdiff_t>(observed_len), tokens.end());
    return split;
}

PerplexityResult perplexity(const Corpus& held_out, const TopicSet& topics, double split_fraction,
                            const EmConfig& config) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw std::invalid_argument("split_fraction must lie in (0, 1)");
    if (held_out.vocab_size() != topics.vocab_size()) throw DataError("held-out vocabulary does not match topics");
    PerplexityResult result;
    for (std::size_t d = 0; d < held_out.num_docs(); ++d) {
        const auto split = split_document(held_out.doc(d), split_fraction, config.seed, d);
        if (!split) {
            warn("held-out document " + held_out.doc_ids()[d] + " has fewer than 2 tokens; skipped");
            ++result.docs_skipped;
            continue;
        }
        const auto fit = fold_in(split->observed, topics, config);
        for (const auto w : split->predicted) {
            double p = 0.0;
            for (std::size_t k = 0; k < topics.num_topics(); ++k) p += fit.mix[k] * topics.prob(k, w);
            result.predicted_loglik += std::log(p);
        }
        result.predicted_tokens += split->predicted.size();
        ++result.docs_used;
    }
    if (result.predicted_tokens == 0) throw DataError("no held-out document has two or more tokens");
    result.perplexity = std::exp(-result.predicted_loglik / static_cast<double>(result.predicted_tokens));
    return result;
}

}  // namespace nplsa
