#include "nplsa/plsa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nplsa/errors.hpp"
#include "nplsa/parallel.hpp"
#include "nplsa/rng.hpp"

namespace nplsa {

void EmConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
    if (!(smoothing_floor >= 0.0 && smoothing_floor <= 1e-3)) {
        throw std::invalid_argument("smoothing_floor must lie in [0, 1e-3]");
    }
    if (fold_in_max_iters < 1) throw std::invalid_argument("fold_in_max_iters must be >= 1");
    if (!(fold_in_rel_tol > 0.0)) throw std::invalid_argument("fold_in_rel_tol must be > 0");
}

TopicSet::TopicSet(std::size_t vocab_size, const std::vector<std::vector<double>>& rows) : vocab_size_(vocab_size) {
    for (const auto& r : rows) add_topic(r);
}

void TopicSet::add_topic(std::span<const double> probs) {
    if (probs.size() != vocab_size_) throw std::invalid_argument("topic length does not match vocabulary size");
    data_.insert(data_.end(), probs.begin(), probs.end());
}

void TopicSet::remove_topic(std::size_t k) {
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(k * vocab_size_);
    data_.erase(first, first + static_cast<std::ptrdiff_t>(vocab_size_));
}

std::vector<std::vector<double>> TopicSet::rows() const {
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < num_topics(); ++k) out.emplace_back(topic(k).begin(), topic(k).end());
    return out;
}

void apply_floor(std::span<double> row, double floor) {
    if (floor <= 0.0) return;
    const double keep = 1.0 - static_cast<double>(row.size()) * floor;
    if (keep <= 0.0) throw std::invalid_argument("smoothing floor too large for vocabulary size");
    for (auto& p : row) p = keep * p + floor;
}

TopicSet random_topics(std::size_t K, std::size_t vocab_size, std::uint64_t seed, double floor) {
    TopicSet topics(vocab_size);
    CounterRng rng(seed, StreamPurpose::topic_init);
    for (std::size_t k = 0; k < K; ++k) {
        auto row = rng.dirichlet(1.0, vocab_size);
        apply_floor(row, floor);
        topics.add_topic(row);
    }
    return topics;
}

double e_step_document(const Document& doc, const TopicSet& topics, std::span<const double> mix, Posterior& out) {
    const std::size_t K = topics.num_topics();
    const std::size_t active = std::min(K, mix.size());
    out.K = K;
    out.resp.assign(doc.entries.size() * K, 0.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < doc.entries.size(); ++i) {
        const auto& e = doc.entries[i];
        auto r = out.word(i);
        double denom = 0.0;
        for (std::size_t k = 0; k < active; ++k) {
            r[k] = mix[k] * topics.prob(k, e.term);
            denom += r[k];
        }
        if (!(denom > 0.0)) throw AlgorithmError("unmodelable word (term id " + std::to_string(e.term) + ")");
        for (std::size_t k = 0; k < active; ++k) r[k] /= denom;
        ll += e.count * std::log(denom);
    }
    return ll;
}

Posterior e_step_doc(const Corpus& corpus, std::size_t d, const TopicSet& topics, std::span<const double> mix) {
    Posterior post;
    e_step_document(corpus.doc(d), topics, mix, post);
    return post;
}

MStepResult m_step(const Corpus& corpus, std::span<const Posterior> posteriors, std::size_t K, double floor,
                   ZeroMassPolicy policy) {
    if (posteriors.size() != corpus.num_docs()) throw std::invalid_argument("one posterior per document required");
    const std::size_t V = corpus.vocab_size();
    std::vector<double> word_mass(K * V, 0.0);
    MStepResult result{TopicSet(V), DocTopicMix(corpus.num_docs(), std::vector<double>(K, 0.0)), {}};

    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        const auto& doc = corpus.doc(d);
        const auto& post = posteriors[d];
        if (post.K > K || post.resp.size() != doc.entries.size() * post.K) {
            throw std::invalid_argument("posterior shape does not match document " + std::to_string(d));
        }
        auto& mix = result.mixes[d];
        for (std::size_t i = 0; i < doc.entries.size(); ++i) {
            const auto& e = doc.entries[i];
            const auto r = post.word(i);
            for (std::size_t k = 0; k < post.K; ++k) {
                const double m = e.count * r[k];
                mix[k] += m;
                word_mass[k * V + e.term] += m;
            }
        }
        const double total = std::accumulate(mix.begin(), mix.end(), 0.0);
        for (auto& m : mix) m /= total;
    }

    std::vector<double> row(V);
    for (std::size_t k = 0; k < K; ++k) {
        const auto first = word_mass.begin() + static_cast<std::ptrdiff_t>(k * V);
        std::copy(first, first + static_cast<std::ptrdiff_t>(V), row.begin());
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        if (total > 0.0) {
            for (auto& p : row) p /= total;
        } else {
            if (policy == ZeroMassPolicy::warn) {
                warn("topic " + std::to_string(k) + " received zero mass; reset to uniform");
            }
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(V));
            result.zero_mass_topics.push_back(k);
        }
        apply_floor(row, floor);
        result.topics.add_topic(row);
    }
    return result;
}

double doc_log_likelihood(const Document& doc, const TopicSet& topics, std::span<const double> mix) {
    const std::size_t active = std::min(topics.num_topics(), mix.size());
    double ll = 0.0;
    for (const auto& e : doc.entries) {
        double p = 0.0;
        for (std::size_t k = 0; k < active; ++k) p += mix[k] * topics.prob(k, e.term);
        if (!(p > 0.0)) throw AlgorithmError("unmodelable word (term id " + std::to_string(e.term) + ")");
        ll += e.count * std::log(p);
    }
    return ll;
}

double log_likelihood(const Corpus& corpus, const TopicSet& topics, const DocTopicMix& mixes) {
    if (mixes.size() != corpus.num_docs()) throw std::invalid_argument("one mix per document required");
    if (topics.vocab_size() != corpus.vocab_size()) throw std::invalid_argument("vocabulary size mismatch");
    double ll = 0.0;
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) ll += doc_log_likelihood(corpus.doc(d), topics, mixes[d]);
    return ll;
}

FoldInResult fold_in(const Document& doc, const TopicSet& topics, const EmConfig& config,
                     std::span<const double> start) {
    const std::size_t K = topics.num_topics();
    const std::size_t n = doc.entries.size();
    if (K == 0) throw std::invalid_argument("fold_in needs at least one topic");

    // Gather p(w|z) for this document's words: n x K, contiguous.
    std::vector<double> local(n * K);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < K; ++k) local[i * K + k] = topics.prob(k, doc.entries[i].term);
    }

    FoldInResult out;
    out.mix.assign(K, start.empty() ? 1.0 / static_cast<double>(K) : 0.0);
    if (!start.empty()) std::copy_n(start.begin(), std::min(K, start.size()), out.mix.begin());

    const double length = static_cast<double>(doc.length());
    std::vector<double> denom(n);
    std::vector<double> next(K);
    double prev = 0.0;
    for (std::size_t it = 0;; ++it) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = &local[i * K];
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k) s += out.mix[k] * p[k];
            if (!(s > 0.0)) {
                throw AlgorithmError("unmodelable word (term id " + std::to_string(doc.entries[i].term) + ")");
            }
            denom[i] = s;
            ll += doc.entries[i].count * std::log(s);
        }
        out.history.push_back(ll);
        out.loglik = ll;
        if (it > 0 && std::abs(ll - prev) <= config.fold_in_rel_tol * std::abs(prev)) break;
        if (it == config.fold_in_max_iters) break;

        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = &local[i * K];
            const double w = doc.entries[i].count / denom[i];
            for (std::size_t k = 0; k < K; ++k) next[k] += w * p[k];
        }
        for (std::size_t k = 0; k < K; ++k) out.mix[k] *= next[k] / length;
        ++out.iterations;
        prev = ll;
    }
    return out;
}

PlsaResult run_em(const Corpus& corpus, TopicSet topics, DocTopicMix mixes, const EmConfig& config,
                  const char* phase, std::size_t first_iter) {
    config.validate();
    const std::size_t K = topics.num_topics();
    const std::size_t D = corpus.num_docs();
    std::vector<Posterior> posteriors(D);
    std::vector<double> doc_ll(D);

    PlsaResult result;
    std::optional<double> prev;
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        parallel_for(D, config.threads, [&](std::size_t d) {
            doc_ll[d] = e_step_document(corpus.doc(d), topics, mixes[d], posteriors[d]);
        });
        const double ll = std::accumulate(doc_ll.begin(), doc_ll.end(), 0.0);
        auto m = m_step(corpus, posteriors, K, config.smoothing_floor);
        topics = std::move(m.topics);
        mixes = std::move(m.mixes);
        ++result.iterations;

        TraceRow row;
        row.iter = first_iter + it;
        row.K = K;
        row.loglik = ll;
        row.phase = phase;
        row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        result.trace.rows.push_back(std::move(row));

        if (prev && std::abs(ll - *prev) <= config.rel_tol * std::abs(*prev)) break;
        prev = ll;
    }
    result.loglik = log_likelihood(corpus, topics, mixes);
    result.topics = std::move(topics);
    result.mixes = std::move(mixes);
    return result;
}

PlsaResult train_plsa(const Corpus& corpus, std::size_t K, const EmConfig& config) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    config.validate();
    auto topics = random_topics(K, corpus.vocab_size(), config.seed, config.smoothing_floor);
    DocTopicMix mixes(corpus.num_docs(), std::vector<double>(K, 1.0 / static_cast<double>(K)));
    return run_em(corpus, std::move(topics), std::move(mixes), config);
}

std::vector<std::size_t> top_words(std::span<const double> topic, std::size_t n) {
    std::vector<std::size_t> ids(topic.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    n = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                      [&](std::size_t a, std::size_t b) { return topic[a] > topic[b] || (topic[a] == topic[b] && a < b); });
    ids.resize(n);
    return ids;
}

}  // namespace nplsa
