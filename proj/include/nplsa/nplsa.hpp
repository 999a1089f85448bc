#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nplsa/corpus.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/trace.hpp"

namespace nplsa {

struct NplsaState {
    TopicSet topics;
    DocTopicMix mixes;
    std::vector<std::size_t> fitted_counts;  // T_d: K when d was last visited
    double epsilon = 0.0;
};

struct PenalizedObjective {
    double loglik = 0.0;
    std::size_t K = 0;
    double epsilon = 0.0;
    double value = 0.0;  // loglik - epsilon * K
};

struct NplsaConfig {
    double epsilon = 0.0;
    std::size_t topic_cap = 1000;
    /// Visit documents in a seeded random (but fixed) order instead of corpus
    /// order.
    std::optional<std::uint64_t> order_seed;
};

/// log p(w_d | theta_d) under the document's own unsmoothed MLE.
double self_log_likelihood(const Document& doc);

/// Best fit of a document against frozen topics: the fold-in result, or the
/// supplied current mix when that scores higher.
struct DocumentFit {
    std::vector<double> mix;
    double loglik = 0.0;
    double delta = 0.0;
    bool from_fold_in = true;
};

DocumentFit fit_document(const Document& doc, const TopicSet& topics, const EmConfig& config,
                         std::span<const double> current_mix = {});

/// Likelihood-ratio deficit log p(w_d|theta_d) - log p(w_d|topics), the
/// second term from fold_in.
double delta(const Document& doc, const TopicSet& topics, const EmConfig& config);

/// L(D) - epsilon K. Documents fitted against fewer than K topics are
/// refreshed by fit_document first (the state itself is not modified).
PenalizedObjective penalized_objective(const NplsaState& state, const Corpus& corpus, const EmConfig& config);

struct NplsaResult {
    NplsaState state;
    RunTrace trace;
    std::size_t sweeps = 0;
    bool converged = false;
};

/// EM with per-document topic spawning. Each sweep visits every document:
/// if its deficit exceeds epsilon the document's own model becomes a new
/// topic that takes all of its words; otherwise it is re-inferred (plain
/// E-step when fitted against the current K, fold-in otherwise). An M-step
/// follows every sweep, and topics left with no mass are dropped. Stops when
/// a sweep spawns nothing and |dL/L| < rel_tol, or after max_iters sweeps.
/// Throws AlgorithmError when K would exceed topic_cap.
NplsaResult train_nplsa(const Corpus& corpus, const NplsaConfig& nconfig, const EmConfig& config);

}  // namespace nplsa
