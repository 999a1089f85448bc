#include "nplsa/nplsa.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nplsa/autostop.hpp"
#include "nplsa/errors.hpp"
#include "nplsa/parallel.hpp"
#include "nplsa/rng.hpp"

namespace nplsa {

double self_log_likelihood(const Document& doc) {
    const auto n = static_cast<double>(doc.length());
    double ll = 0.0;
    for (const auto& e : doc.entries) ll += e.count * std::log(e.count / n);
    return ll;
}

DocumentFit fit_document(const Document& doc, const TopicSet& topics, const EmConfig& config,
                         std::span<const double> current_mix) {
    auto folded = fold_in(doc, topics, config);
    DocumentFit fit{std::move(folded.mix), folded.loglik, 0.0, true};
    if (!current_mix.empty()) {
        double current = -std::numeric_limits<double>::infinity();
        try {
            current = doc_log_likelihood(doc, topics, current_mix);
        } catch (const AlgorithmError&) {
        }
        if (current > fit.loglik) {
            fit.mix.assign(topics.num_topics(), 0.0);
            std::copy_n(current_mix.begin(), std::min(current_mix.size(), fit.mix.size()), fit.mix.begin());
            fit.loglik = current;
            fit.from_fold_in = false;
        }
    }
    fit.delta = self_log_likelihood(doc) - fit.loglik;
    return fit;
}

double delta(const Document& doc, const TopicSet& topics, const EmConfig& config) {
    return self_log_likelihood(doc) - fold_in(doc, topics, config).loglik;
}

PenalizedObjective penalized_objective(const NplsaState& state, const Corpus& corpus, const EmConfig& config) {
    const std::size_t K = state.topics.num_topics();
    const std::size_t D = corpus.num_docs();
    std::vector<double> doc_ll(D);
    parallel_for(D, config.threads, [&](std::size_t d) {
        if (state.fitted_counts[d] < K) {
            doc_ll[d] = fit_document(corpus.doc(d), state.topics, config, state.mixes[d]).loglik;
        } else {
            doc_ll[d] = doc_log_likelihood(corpus.doc(d), state.topics, state.mixes[d]);
        }
    });
    PenalizedObjective obj;
    obj.loglik = std::accumulate(doc_ll.begin(), doc_ll.end(), 0.0);
    obj.K = K;
    obj.epsilon = state.epsilon;
    obj.value = obj.loglik - state.epsilon * static_cast<double>(K);
    return obj;
}

namespace {

void drop_topic(NplsaState& state, std::size_t k) {
    state.topics.remove_topic(k);
    for (auto& mix : state.mixes) {
        if (k < mix.size()) mix.erase(mix.begin() + static_cast<std::ptrdiff_t>(k));
    }
    for (auto& t : state.fitted_counts) {
        if (t > k) --t;
    }
}

}  // namespace

NplsaResult train_nplsa(const Corpus& corpus, const NplsaConfig& nconfig, const EmConfig& config) {
    config.validate();
    if (!(nconfig.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    const std::size_t D = corpus.num_docs();

    NplsaResult result;
    auto& state = result.state;
    state.epsilon = nconfig.epsilon;
    state.topics = random_topics(1, corpus.vocab_size(), config.seed, config.smoothing_floor);
    state.mixes.assign(D, std::vector<double>{1.0});
    state.fitted_counts.assign(D, 1);

    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (nconfig.order_seed) order = shuffled_order(D, *nconfig.order_seed);

    std::vector<Posterior> posteriors(D);
    std::optional<double> prev_ll;
    for (std::size_t sweep = 1; sweep <= config.max_iters; ++sweep) {
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t spawned = 0;
        double delta_sum = 0.0;

        // Strictly sequential: a spawn changes K for every later document.
        for (const std::size_t d : order) {
            const auto& doc = corpus.doc(d);
            const std::size_t K = state.topics.num_topics();
            auto fit = fit_document(doc, state.topics, config, state.mixes[d]);
            delta_sum += fit.delta;
            if (fit.delta > nconfig.epsilon) {
                if (K + 1 > nconfig.topic_cap) {
                    throw AlgorithmError("topic explosion: more than " + std::to_string(nconfig.topic_cap) +
                                         " topics; try a larger epsilon");
                }
                state.topics.add_topic(doc_language_model(corpus, d).probs);
                auto& post = posteriors[d];
                post.K = K + 1;
                post.resp.assign(doc.entries.size() * post.K, 0.0);
                for (std::size_t i = 0; i < doc.entries.size(); ++i) post.word(i)[K] = 1.0;
                state.mixes[d].assign(K + 1, 0.0);
                state.mixes[d][K] = 1.0;
                ++spawned;
            } else if (state.fitted_counts[d] == K) {
                e_step_document(doc, state.topics, state.mixes[d], posteriors[d]);
            } else {
                state.mixes[d] = std::move(fit.mix);
                e_step_document(doc, state.topics, state.mixes[d], posteriors[d]);
            }
            state.fitted_counts[d] = state.topics.num_topics();
        }

        auto m = m_step(corpus, posteriors, state.topics.num_topics(), config.smoothing_floor,
                        ZeroMassPolicy::silent);
        state.topics = std::move(m.topics);
        state.mixes = std::move(m.mixes);
        // A topic nobody uses adds nothing to L(D) but costs epsilon.
        for (auto it = m.zero_mass_topics.rbegin(); it != m.zero_mass_topics.rend(); ++it) drop_topic(state, *it);

        const auto objective = penalized_objective(state, corpus, config);
        TraceRow row;
        row.iter = sweep;
        row.K = objective.K;
        row.loglik = objective.loglik;
        row.objective = objective.value;
        row.diversity = objective.K >= 2 ? diversity(state.topics).value : 0.0;
        row.epsilon = nconfig.epsilon;
        row.mean_delta = delta_sum / static_cast<double>(D);
        row.phase = "sweep";
        row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        result.trace.rows.push_back(std::move(row));
        result.sweeps = sweep;

        const bool plateau =
            prev_ll && std::abs(objective.loglik - *prev_ll) <= config.rel_tol * std::abs(*prev_ll);
        prev_ll = objective.loglik;
        if (spawned == 0 && plateau) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace nplsa
