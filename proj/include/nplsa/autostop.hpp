#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nplsa/corpus.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/trace.hpp"

namespace nplsa {

double l2_distance(std::span<const double> a, std::span<const double> b);

struct DiversityScore {
    double value = 0.0;  // mean pairwise L2 distance, in [0, sqrt(2)]
    std::size_t K = 0;
};

/// 2 / ((K-1)K) * sum_{i<j} L2(topic_i, topic_j). Throws std::invalid_argument
/// ("diversity undefined") for K < 2.
DiversityScore diversity(const TopicSet& topics);

struct QueryModel {
    std::vector<std::string> terms;
    LanguageModel theta_q;
    std::size_t feedback_size = 0;  // documents containing a query term
    std::size_t iterations = 0;     // accepted EM updates
};

struct QueryModelConfig {
    double lambda = 0.5;  // weight of the query model against the background
    std::size_t em_iters = 50;
    double rel_tol = 1e-10;
};

/// Model-based pseudo feedback. The feedback set is every document holding a
/// query term; each is treated as lambda * theta_q + (1 - lambda) * theta_C
/// and theta_q is fit by EM starting from the pooled feedback model. An EM
/// update is only accepted while it raises the objective by more than
/// rel_tol relative. Throws DataError("query not in corpus") when nothing
/// matches.
QueryModel estimate_query_model(const Corpus& corpus, std::span<const std::string> terms,
                                const QueryModelConfig& config = {});

struct QueryDistance {
    double distance = 0.0;
    std::size_t closest = 0;  // lowest index on ties
};

QueryDistance query_distance(const LanguageModel& theta_q, const TopicSet& topics);

enum class StopMode { maximize, minimize };

/// Tracks a score per K and fires once `patience` consecutive observations
/// fail to beat the best one.
class StopDetector {
  public:
    StopDetector(StopMode mode, std::size_t patience);

    /// Returns true when the score is a new best.
    bool observe(std::size_t K, double score);
    bool fired() const { return since_best_ >= patience_; }

    StopMode mode() const { return mode_; }
    std::size_t best_k() const { return best_k_; }
    double best_score() const { return best_score_; }
    const std::vector<std::pair<std::size_t, double>>& history() const { return history_; }

  private:
    StopMode mode_;
    std::size_t patience_;
    std::vector<std::pair<std::size_t, double>> history_;
    std::size_t best_k_ = 0;
    double best_score_ = 0.0;
    std::size_t since_best_ = 0;
};

struct GrowthSettings {
    std::size_t patience = 3;
    std::size_t topic_cap = 1000;
    /// Run plain EM to convergence from the best snapshot.
    bool refine = true;
    /// Keep the topic set and mixes reached at every K in GrowthResult::path.
    bool keep_path = false;
};

struct GrowthStep {
    TopicSet topics;
    DocTopicMix mixes;
};

struct GrowthResult {
    TopicSet topics;  // final (refined unless refine == false)
    DocTopicMix mixes;
    RunTrace trace;
    std::size_t best_k = 0;
    double best_score = 0.0;
    TopicSet snapshot;  // topics at best_k before refinement
    DocTopicMix snapshot_mixes;
    std::vector<std::size_t> spawned_docs;  // one per growth iteration
    std::vector<GrowthStep> path;           // path[i] has K = i + 1; empty unless keep_path
};

/// Farthest-first growth with diversity as the stopping score. Each growth
/// iteration spawns the document with the largest deficit as a new topic,
/// folds every other document in against the enlarged set and runs one
/// M-step. When diversity has not improved for `patience` spawns the best
/// snapshot is restored and refined by plain EM.
///
/// Growth rows carry the implicit epsilon (max deficit) and the mean deficit,
/// both measured against the K-1 topics that existed before the spawn.
GrowthResult train_parameter_free(const Corpus& corpus, const EmConfig& config, const GrowthSettings& settings = {});

/// Same loop, stopping on the minimum distance between the query model and
/// its closest topic.
GrowthResult train_weakly_supervised(const Corpus& corpus, const QueryModel& query, const EmConfig& config,
                                     const GrowthSettings& settings = {});

GrowthResult train_weakly_supervised(const Corpus& corpus, std::span<const std::string> query_terms,
                                     const EmConfig& config, const GrowthSettings& settings = {},
                                     const QueryModelConfig& query_config = {});

}  // namespace nplsa
