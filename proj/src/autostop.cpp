#include "nplsa/autostop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nplsa/errors.hpp"
#include "nplsa/nplsa.hpp"
#include "nplsa/parallel.hpp"

namespace nplsa {

double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l2_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

DiversityScore diversity(const TopicSet& topics) {
    const std::size_t K = topics.num_topics();
    if (K < 2) throw std::invalid_argument("diversity undefined for fewer than two topics");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) sum += l2_distance(topics.topic(i), topics.topic(j));
    }
    return {2.0 * sum / (static_cast<double>(K - 1) * static_cast<double>(K)), K};
}

QueryModel estimate_query_model(const Corpus& corpus, std::span<const std::string> terms,
                                const QueryModelConfig& config) {
    if (!(config.lambda > 0.0 && config.lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0, 1]");
    std::set<TermId> wanted;
    for (const auto& t : terms) {
        if (auto id = corpus.vocab().find(t)) wanted.insert(*id);
    }

    const std::size_t V = corpus.vocab_size();
    std::vector<double> pooled(V, 0.0);
    QueryModel model;
    model.terms.assign(terms.begin(), terms.end());
    for (const auto& doc : corpus.docs()) {
        const bool hit = std::any_of(doc.entries.begin(), doc.entries.end(),
                                     [&](const TermCount& e) { return wanted.contains(e.term); });
        if (!hit) continue;
        ++model.feedback_size;
        for (const auto& e : doc.entries) pooled[e.term] += e.count;
    }
    if (model.feedback_size == 0) throw DataError("query not in corpus");

    const auto background = background_model(corpus).probs;
    const double lambda = config.lambda;
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    std::vector<double> theta(V);
    for (std::size_t w = 0; w < V; ++w) theta[w] = pooled[w] / total;

    auto objective = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t w = 0; w < V; ++w) {
            if (pooled[w] > 0.0) s += pooled[w] * std::log(lambda * q[w] + (1.0 - lambda) * background[w]);
        }
        return s;
    };

    double current = objective(theta);
    std::vector<double> proposal(V);
    for (std::size_t it = 0; it < config.em_iters; ++it) {
        double norm = 0.0;
        for (std::size_t w = 0; w < V; ++w) {
            if (pooled[w] == 0.0) {
                proposal[w] = 0.0;
                continue;
            }
            const double own = lambda * theta[w];
            proposal[w] = pooled[w] * own / (own + (1.0 - lambda) * background[w]);
            norm += proposal[w];
        }
        for (auto& p : proposal) p /= norm;
        const double next = objective(proposal);
        if (next - current <= config.rel_tol * std::abs(current)) break;
        theta.swap(proposal);
        current = next;
        ++model.iterations;
    }
    model.theta_q.probs = std::move(theta);
    return model;
}

QueryDistance query_distance(const LanguageModel& theta_q, const TopicSet& topics) {
    if (topics.num_topics() == 0) throw std::invalid_argument("query_distance needs at least one topic");
    QueryDistance best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t k = 0; k < topics.num_topics(); ++k) {
        const double dist = l2_distance(theta_q.probs, topics.topic(k));
        if (dist < best.distance) best = {dist, k};
    }
    return best;
}

StopDetector::StopDetector(StopMode mode, std::size_t patience) : mode_(mode), patience_(patience) {
    if (patience == 0) throw std::invalid_argument("patience must be >= 1");
}

bool StopDetector::observe(std::size_t K, double score) {
    history_.emplace_back(K, score);
    const bool better = history_.size() == 1 ||
                        (mode_ == StopMode::maximize ? score > best_score_ : score < best_score_);
    if (better) {
        best_k_ = K;
        best_score_ = score;
        since_best_ = 0;
    } else {
        ++since_best_;
    }
    return better;
}

namespace {

struct Score {
    double value = 0.0;
    std::optional<double> diversity;
    std::optional<double> distance;
    std::optional<std::size_t> closest;
    std::string note;
};

using ScoreFn = std::function<Score(const TopicSet&)>;

std::string describe_topic(const Corpus& corpus, std::span<const double> topic) {
    std::string out;
    for (const auto w : top_words(topic, 5)) {
        if (!out.empty()) out += ' ';
        out += corpus.vocab().term(static_cast<TermId>(w));
    }
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

TraceRow score_row(std::size_t iter, std::size_t K, double loglik, const Score& score, const char* phase) {
    TraceRow row;
    row.iter = iter;
    row.K = K;
    row.loglik = loglik;
    row.diversity = score.diversity;
    row.query_distance = score.distance;
    row.closest_topic = score.closest;
    row.note = score.note;
    row.phase = phase;
    return row;
}

GrowthResult grow(const Corpus& corpus, const EmConfig& config, const GrowthSettings& settings, StopMode mode,
                  const ScoreFn& score_fn) {
    config.validate();
    const std::size_t D = corpus.num_docs();
    GrowthResult result;

    auto start = std::chrono::steady_clock::now();
    TopicSet topics = random_topics(1, corpus.vocab_size(), config.seed, config.smoothing_floor);
    DocTopicMix mixes(D, std::vector<double>{1.0});

    StopDetector detector(mode, settings.patience);
    {
        const auto s = score_fn(topics);
        auto row = score_row(0, 1, log_likelihood(corpus, topics, mixes), s, "grow");
        row.elapsed_ms = elapsed_ms(start);
        result.trace.rows.push_back(std::move(row));
        detector.observe(1, s.value);
        result.snapshot = topics;
        result.snapshot_mixes = mixes;
        if (settings.keep_path) result.path.push_back({topics, mixes});
    }

    std::vector<DocumentFit> fits(D);
    std::vector<Posterior> posteriors(D);
    for (std::size_t iter = 1; !detector.fired(); ++iter) {
        start = std::chrono::steady_clock::now();
        const std::size_t K = topics.num_topics();
        if (K + 1 > settings.topic_cap) {
            throw AlgorithmError("topic explosion: stopping score did not peak within " +
                                 std::to_string(settings.topic_cap) + " topics");
        }

        // Warm-started fold-in: EM from the current mix never scores below it.
        parallel_for(D, config.threads, [&](std::size_t d) {
            const auto& doc = corpus.doc(d);
            auto folded = fold_in(doc, topics, config, mixes[d]);
            fits[d].delta = self_log_likelihood(doc) - folded.loglik;
            fits[d].loglik = folded.loglik;
            fits[d].mix = std::move(folded.mix);
        });
        std::size_t farthest = 0;
        double delta_sum = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            delta_sum += fits[d].delta;
            if (fits[d].delta > fits[farthest].delta) farthest = d;
        }
        const double max_delta = fits[farthest].delta;

        topics.add_topic(doc_language_model(corpus, farthest).probs);
        parallel_for(D, config.threads, [&](std::size_t d) {
            const auto& doc = corpus.doc(d);
            if (d == farthest) {
                auto& post = posteriors[d];
                post.K = K + 1;
                post.resp.assign(doc.entries.size() * post.K, 0.0);
                for (std::size_t i = 0; i < doc.entries.size(); ++i) post.word(i)[K] = 1.0;
                return;
            }
            // Start from the previous fit with a fair share for the new topic.
            std::vector<double> start(K + 1, 1.0 / static_cast<double>(K + 1));
            for (std::size_t k = 0; k < K; ++k) start[k] = fits[d].mix[k] * K / static_cast<double>(K + 1);
            const auto folded = fold_in(doc, topics, config, start);
            e_step_document(doc, topics, folded.mix, posteriors[d]);
        });
        auto m = m_step(corpus, posteriors, K + 1, config.smoothing_floor);
        topics = std::move(m.topics);
        mixes = std::move(m.mixes);
        result.spawned_docs.push_back(farthest);

        const auto s = score_fn(topics);
        auto row = score_row(iter, K + 1, log_likelihood(corpus, topics, mixes), s, "grow");
        row.epsilon = max_delta;
        row.mean_delta = delta_sum / static_cast<double>(D);
        row.elapsed_ms = elapsed_ms(start);
        result.trace.rows.push_back(std::move(row));
        if (settings.keep_path) result.path.push_back({topics, mixes});

        if (detector.observe(K + 1, s.value)) {
            result.snapshot = topics;
            result.snapshot_mixes = mixes;
        }
    }

    result.best_k = detector.best_k();
    result.best_score = detector.best_score();
    const std::size_t next_iter = result.trace.rows.back().iter + 1;
    {
        const auto s = score_fn(result.snapshot);
        auto row = score_row(next_iter, result.best_k,
                             log_likelihood(corpus, result.snapshot, result.snapshot_mixes), s, "rollback");
        result.trace.rows.push_back(std::move(row));
    }

    if (settings.refine) {
        auto refined = run_em(corpus, result.snapshot, result.snapshot_mixes, config, "refine", next_iter + 1);
        for (auto& row : refined.trace.rows) result.trace.rows.push_back(std::move(row));
        result.topics = std::move(refined.topics);
        result.mixes = std::move(refined.mixes);
    } else {
        result.topics = result.snapshot;
        result.mixes = result.snapshot_mixes;
    }
    return result;
}

}  // namespace

GrowthResult train_parameter_free(const Corpus& corpus, const EmConfig& config, const GrowthSettings& settings) {
    return grow(corpus, config, settings, StopMode::maximize, [](const TopicSet& topics) {
        Score s;
        s.value = topics.num_topics() >= 2 ? diversity(topics).value : 0.0;
        s.diversity = s.value;
        return s;
    });
}

GrowthResult train_weakly_supervised(const Corpus& corpus, const QueryModel& query, const EmConfig& config,
                                     const GrowthSettings& settings) {
    if (query.theta_q.probs.size() != corpus.vocab_size()) {
        throw DataError("query model vocabulary does not match corpus");
    }
    return grow(corpus, config, settings, StopMode::minimize, [&](const TopicSet& topics) {
        const auto qd = query_distance(query.theta_q, topics);
        Score s;
        s.value = qd.distance;
        s.distance = qd.distance;
        s.closest = qd.closest;
        s.diversity = topics.num_topics() >= 2 ? diversity(topics).value : 0.0;
        s.note = describe_topic(corpus, topics.topic(qd.closest));
        return s;
    });
}

GrowthResult train_weakly_supervised(const Corpus& corpus, std::span<const std::string> query_terms,
                                     const EmConfig& config, const GrowthSettings& settings,
                                     const QueryModelConfig& query_config) {
    const auto query = estimate_query_model(corpus, query_terms, query_config);
    return train_weakly_supervised(corpus, query, config, settings);
}

}  // namespace nplsa
