#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "nplsa/corpus.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/synthgen.hpp"

namespace nplsa {

/// model.json: {vocab, topics, mixes?, meta: {K, seed, iters, ...}}.
struct ModelFile {
    Vocabulary vocab;
    TopicSet topics;
    std::optional<DocTopicMix> mixes;
    nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json model_to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& j);
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

/// truth.json: {vocab, topics, mixes, config}. The vocab array names the
/// columns of the topic rows.
struct TruthFile {
    Vocabulary vocab;
    SyntheticTruth truth;
    nlohmann::json config = nlohmann::json::object();
};

void write_truth(const std::string& path, const TruthFile& truth);
TruthFile read_truth(const std::string& path);

/// Re-express topics over another vocabulary by term string. Terms missing
/// from `target` throw DataError; target terms the source lacks get zero.
TopicSet align_topics(const TopicSet& topics, const Vocabulary& source, const Vocabulary& target);

/// Rebuild a corpus over `target` ids. Tokens whose term is absent from the
/// target are dropped (counted in *dropped_tokens); documents left empty are
/// dropped.
Corpus align_corpus(const Corpus& corpus, const Vocabulary& target, std::uint64_t* dropped_tokens = nullptr);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace nplsa
