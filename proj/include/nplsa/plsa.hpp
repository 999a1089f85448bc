#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nplsa/corpus.hpp"
#include "nplsa/trace.hpp"

namespace nplsa {

struct EmConfig {
    std::size_t max_iters = 200;
    double rel_tol = 1e-5;  // on |dL / L|
    std::uint64_t seed = 0;
    double smoothing_floor = 1e-9;
    std::size_t fold_in_max_iters = 50;
    double fold_in_rel_tol = 1e-6;
    std::size_t threads = 1;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// K word distributions p(w|z) stored row-major.
class TopicSet {
  public:
    TopicSet() = default;
    explicit TopicSet(std::size_t vocab_size) : vocab_size_(vocab_size) {}
    TopicSet(std::size_t vocab_size, const std::vector<std::vector<double>>& rows);

    std::size_t num_topics() const { return vocab_size_ == 0 ? 0 : data_.size() / vocab_size_; }
    std::size_t vocab_size() const { return vocab_size_; }

    std::span<const double> topic(std::size_t k) const {
        return {data_.data() + k * vocab_size_, vocab_size_};
    }
    std::span<double> topic(std::size_t k) { return {data_.data() + k * vocab_size_, vocab_size_}; }
    double prob(std::size_t k, std::size_t w) const { return data_[k * vocab_size_ + w]; }

    void add_topic(std::span<const double> probs);
    void remove_topic(std::size_t k);
    std::vector<std::vector<double>> rows() const;

    bool operator==(const TopicSet&) const = default;

  private:
    std::size_t vocab_size_ = 0;
    std::vector<double> data_;
};

/// Per-document topic proportions p(z|d). Rows may be shorter than the
/// current K; missing entries are zero.
using DocTopicMix = std::vector<std::vector<double>>;

/// p(z|d,w) for each distinct word of one document, in row order.
struct Posterior {
    std::size_t K = 0;
    std::vector<double> resp;  // entries.size() x K

    std::span<const double> word(std::size_t i) const { return {resp.data() + i * K, K}; }
    std::span<double> word(std::size_t i) { return {resp.data() + i * K, K}; }
};

/// Mix a distribution with the uniform one so every entry is >= floor and
/// the row still sums to 1: p <- (1 - V floor) p + floor.
void apply_floor(std::span<double> row, double floor);

/// K rows drawn from a symmetric Dirichlet(1) on the topic_init stream, then
/// floored.
TopicSet random_topics(std::size_t K, std::size_t vocab_size, std::uint64_t seed, double floor);

/// Posterior p(z|d,w) = p(z|d) p(w|z) / sum_z' p(z'|d) p(w|z'). Throws
/// AlgorithmError("unmodelable word") when a denominator is zero.
Posterior e_step_doc(const Corpus& corpus, std::size_t d, const TopicSet& topics, std::span<const double> mix);

/// Same as e_step_doc on a bare row; writes into `out` and returns the
/// document log-likelihood at `mix`, which the denominators give for free.
double e_step_document(const Document& doc, const TopicSet& topics, std::span<const double> mix, Posterior& out);

struct MStepResult {
    TopicSet topics;
    DocTopicMix mixes;
    std::vector<std::size_t> zero_mass_topics;  // reset to uniform
};

/// What m_step reports when a topic receives no mass. Either way the row
/// becomes uniform; `silent` is for callers that prune such topics.
enum class ZeroMassPolicy { warn, silent };

/// p(z|d) and p(w|z) re-estimated from posteriors (which may cover fewer
/// than K topics; the rest count as zero). Topic rows are floored.
MStepResult m_step(const Corpus& corpus, std::span<const Posterior> posteriors, std::size_t K, double floor,
                   ZeroMassPolicy policy = ZeroMassPolicy::warn);

/// log p(w_d | mix, topics) for one document.
double doc_log_likelihood(const Document& doc, const TopicSet& topics, std::span<const double> mix);

/// L(D) = sum_d sum_w n(d,w) log sum_z p(z|d) p(w|z), in nats.
double log_likelihood(const Corpus& corpus, const TopicSet& topics, const DocTopicMix& mixes);

struct FoldInResult {
    std::vector<double> mix;
    double loglik = 0.0;             // at `mix`
    std::size_t iterations = 0;      // EM updates applied
    std::vector<double> history;     // loglik before each update, then final
};

/// Fit p(z|d) of one document against frozen topics. Starts from `start`
/// (zero-padded to K) or the uniform mix.
FoldInResult fold_in(const Document& doc, const TopicSet& topics, const EmConfig& config,
                     std::span<const double> start = {});

struct PlsaResult {
    TopicSet topics;
    DocTopicMix mixes;
    RunTrace trace;
    double loglik = 0.0;  // of the returned parameters
    std::size_t iterations = 0;
};

/// Plain EM from the given parameters until |dL/L| < rel_tol or max_iters.
/// Each trace row records L(D) of the parameters the iteration started from.
PlsaResult run_em(const Corpus& corpus, TopicSet topics, DocTopicMix mixes, const EmConfig& config,
                  const char* phase = "em", std::size_t first_iter = 1);

/// PLSA at fixed K from Dirichlet(1) topics and uniform mixes.
PlsaResult train_plsa(const Corpus& corpus, std::size_t K, const EmConfig& config);

/// Top-n word ids of a topic by probability, lowest id first on ties.
std::vector<std::size_t> top_words(std::span<const double> topic, std::size_t n);

}  // namespace nplsa
