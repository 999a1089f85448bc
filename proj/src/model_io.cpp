#include "nplsa/model_io.hpp"

#include <algorithm>
#include <fstream>

#include "nplsa/errors.hpp"

namespace nplsa {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

nlohmann::json model_to_json(const ModelFile& model) {
    nlohmann::json j;
    j["vocab"] = model.vocab.terms();
    j["topics"] = model.topics.rows();
    if (model.mixes) j["mixes"] = *model.mixes;
    j["meta"] = model.meta;
    j["meta"]["K"] = model.topics.num_topics();
    return j;
}

ModelFile model_from_json(const nlohmann::json& j) {
    try {
        ModelFile model;
        model.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
        const auto rows = j.at("topics").get<std::vector<std::vector<double>>>();
        model.topics = TopicSet(model.vocab.size(), rows);
        if (j.contains("mixes") && !j["mixes"].is_null()) model.mixes = j["mixes"].get<DocTopicMix>();
        if (j.contains("meta")) model.meta = j["meta"];
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void write_model(const std::string& path, const ModelFile& model) { write_json_file(path, model_to_json(model)); }

ModelFile read_model(const std::string& path) { return model_from_json(read_json_file(path)); }

void write_truth(const std::string& path, const TruthFile& truth) {
    nlohmann::json j;
    j["vocab"] = truth.vocab.terms();
    j["topics"] = truth.truth.topics;
    j["mixes"] = truth.truth.doc_mixes;
    j["config"] = truth.config;
    write_json_file(path, j);
}

TruthFile read_truth(const std::string& path) {
    const auto j = read_json_file(path);
    try {
        TruthFile t;
        t.truth.topics = j.at("topics").get<std::vector<std::vector<double>>>();
        t.truth.doc_mixes = j.value("mixes", std::vector<std::vector<double>>{});
        if (j.contains("vocab")) {
            t.vocab = Vocabulary(j["vocab"].get<std::vector<std::string>>());
        } else if (!t.truth.topics.empty()) {
            for (std::size_t w = 0; w < t.truth.topics.front().size(); ++w) t.vocab.add(synth_term(w));
        }
        if (j.contains("config")) t.config = j["config"];
        for (const auto& row : t.truth.topics) {
            if (row.size() != t.vocab.size()) throw DataError("truth file: topic length does not match vocab");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

TopicSet align_topics(const TopicSet& topics, const Vocabulary& source, const Vocabulary& target) {
    if (topics.vocab_size() != source.size()) throw DataError("topic rows do not match their vocabulary");
    std::vector<TermId> map(source.size());
    for (std::size_t w = 0; w < source.size(); ++w) {
        const auto id = target.find(source.term(static_cast<TermId>(w)));
        if (!id) throw DataError("vocabulary mismatch: term '" + source.term(static_cast<TermId>(w)) + "' missing");
        map[w] = *id;
    }
    TopicSet out(target.size());
    std::vector<double> row(target.size());
    for (std::size_t k = 0; k < topics.num_topics(); ++k) {
        std::fill(row.begin(), row.end(), 0.0);
        const auto src = topics.topic(k);
        for (std::size_t w = 0; w < src.size(); ++w) row[map[w]] += src[w];
        out.add_topic(row);
    }
    return out;
}

Corpus align_corpus(const Corpus& corpus, const Vocabulary& target, std::uint64_t* dropped_tokens) {
    std::uint64_t dropped = 0;
    std::vector<Document> docs;
    std::vector<std::string> ids;
    std::vector<std::string> empty_ids;
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        Document doc;
        for (const auto& e : corpus.doc(d).entries) {
            if (const auto id = target.find(corpus.vocab().term(e.term))) {
                doc.entries.push_back({*id, e.count});
            } else {
                dropped += e.count;
            }
        }
        if (doc.entries.empty()) {
            empty_ids.push_back(corpus.doc_ids()[d]);
            continue;
        }
        std::sort(doc.entries.begin(), doc.entries.end(),
                  [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
        docs.push_back(std::move(doc));
        ids.push_back(corpus.doc_ids()[d]);
    }
    if (dropped_tokens) *dropped_tokens = dropped;
    if (docs.empty()) throw DataError("no document shares vocabulary with the model");
    return Corpus(target, std::move(docs), std::move(ids), std::move(empty_ids));
}

}  // namespace nplsa
