#include "nplsa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "nplsa/errors.hpp"

namespace nplsa {

Vocabulary::Vocabulary(std::vector<std::string> terms) {
    for (auto& t : terms) {
        if (index_.contains(t)) throw DataError("duplicate vocabulary term '" + t + "'");
        add(t);
    }
}

TermId Vocabulary::add(std::string_view term) {
    std::string key(term);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const auto id = static_cast<TermId>(terms_.size());
    terms_.push_back(key);
    index_.emplace(std::move(key), id);
    return id;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
    if (auto it = index_.find(std::string(term)); it != index_.end()) return it->second;
    return std::nullopt;
}

std::uint64_t Document::length() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.count;
    return n;
}

Corpus::Corpus(Vocabulary vocab, std::vector<Document> docs, std::vector<std::string> doc_ids,
               std::vector<std::string> dropped_ids)
    : vocab_(std::move(vocab)),
      docs_(std::move(docs)),
      doc_ids_(std::move(doc_ids)),
      dropped_ids_(std::move(dropped_ids)) {
    if (doc_ids_.size() != docs_.size()) throw DataError("document id count does not match document count");
    const auto v = vocab_.size();
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        const auto& row = docs_[d].entries;
        if (row.empty()) throw DataError("document " + doc_ids_[d] + " is empty");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].term >= v) throw DataError("term id out of range in document " + doc_ids_[d]);
            if (row[i].count == 0) throw DataError("zero count in document " + doc_ids_[d]);
            if (i > 0 && row[i - 1].term >= row[i].term) {
                throw DataError("document " + doc_ids_[d] + " row is not sorted by unique term id");
            }
            total_tokens_ += row[i].count;
        }
    }
}

std::size_t Corpus::nnz() const {
    std::size_t n = 0;
    for (const auto& doc : docs_) n += doc.entries.size();
    return n;
}

bool Corpus::operator==(const Corpus& other) const {
    return vocab_ == other.vocab_ && docs_ == other.docs_ && doc_ids_ == other.doc_ids_ &&
           dropped_ids_ == other.dropped_ids_;
}

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : line) {
        const auto byte = static_cast<unsigned char>(ch);
        if (byte >= 0x80 || std::isalnum(byte)) {
            current.push_back(static_cast<char>(std::tolower(byte)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Corpus ingest_text(std::span<const std::string> lines, const TextOptions& options) {
    if (lines.empty()) throw DataError("empty corpus: no input documents");
    if (options.min_df < 1) throw DataError("min_df must be at least 1");

    std::vector<std::map<std::string, std::uint32_t>> bags(lines.size());
    std::map<std::string, std::size_t> df;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (auto& tok : tokenize(lines[i])) {
            if (options.stopwords.contains(tok)) continue;
            ++bags[i][std::move(tok)];
        }
        for (const auto& [term, count] : bags[i]) ++df[term];
    }

    // std::map iteration gives the lexicographic vocabulary order.
    Vocabulary vocab;
    for (const auto& [term, freq] : df) {
        if (freq >= options.min_df) vocab.add(term);
    }

    std::vector<Document> docs;
    std::vector<std::string> ids;
    std::vector<std::string> dropped;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        Document doc;
        for (const auto& [term, count] : bags[i]) {
            if (auto id = vocab.find(term)) doc.entries.push_back({*id, count});
        }
        if (doc.entries.empty()) {
            dropped.push_back(std::to_string(i));
            continue;
        }
        docs.push_back(std::move(doc));
        ids.push_back(std::to_string(i));
    }
    if (docs.empty()) throw DataError("empty corpus: every document is empty after filtering");
    return Corpus(std::move(vocab), std::move(docs), std::move(ids), std::move(dropped));
}

Corpus ingest_sparse(std::span<const SparseTriple> triples) {
    Vocabulary vocab;
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> doc_index;
    std::vector<std::map<TermId, std::uint64_t>> rows;
    for (const auto& t : triples) {
        if (t.count <= 0) {
            throw DataError("invalid count " + std::to_string(t.count) +
                            (t.line ? " at line " + std::to_string(t.line) : std::string{}));
        }
        auto [it, inserted] = doc_index.try_emplace(t.doc, rows.size());
        if (inserted) {
            rows.emplace_back();
            ids.push_back(t.doc);
        }
        rows[it->second][vocab.add(t.term)] += static_cast<std::uint64_t>(t.count);
    }
    if (rows.empty()) throw DataError("empty corpus: no triples");

    std::vector<Document> docs(rows.size());
    for (std::size_t d = 0; d < rows.size(); ++d) {
        for (const auto& [term, count] : rows[d]) {
            if (count > UINT32_MAX) throw DataError("count overflow in document " + ids[d]);
            docs[d].entries.push_back({term, static_cast<std::uint32_t>(count)});
        }
    }
    return Corpus(std::move(vocab), std::move(docs), std::move(ids));
}

namespace {

struct SparseHeader {
    std::size_t docs = 0, terms = 0, nnz = 0;
};

std::optional<SparseHeader> parse_header(const std::string& line) {
    std::istringstream in(line);
    SparseHeader h;
    std::string field;
    int seen = 0;
    while (in >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) return std::nullopt;
        const auto key = field.substr(0, eq);
        std::size_t value = 0;
        try {
            std::size_t used = 0;
            value = std::stoull(field.substr(eq + 1), &used);
            if (used != field.size() - eq - 1) return std::nullopt;
        } catch (const std::exception&) {
            return std::nullopt;
        }
        if (key == "docs") h.docs = value, seen |= 1;
        else if (key == "terms") h.terms = value, seen |= 2;
        else if (key == "nnz") h.nnz = value, seen |= 4;
        else return std::nullopt;
    }
    if (seen != 7) return std::nullopt;
    return h;
}

}  // namespace

Corpus read_sparse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("sparse corpus: missing header");
    const auto header = parse_header(line);
    if (!header) throw DataError("sparse corpus: malformed header '" + line + "'");

    std::vector<SparseTriple> triples;
    triples.reserve(header->nnz);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream row(line);
        SparseTriple t;
        if (!(row >> t.doc)) continue;  // blank line
        std::string count_text, extra;
        if (!(row >> t.term >> count_text) || (row >> extra)) {
            throw DataError("sparse corpus: expected 'doc term count' at line " + std::to_string(lineno));
        }
        try {
            std::size_t used = 0;
            t.count = std::stoll(count_text, &used);
            if (used != count_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("invalid count '" + count_text + "' at line " + std::to_string(lineno));
        }
        t.line = lineno;
        triples.push_back(std::move(t));
    }
    if (triples.size() != header->nnz) {
        throw DataError("sparse corpus: header nnz=" + std::to_string(header->nnz) + " but found " +
                        std::to_string(triples.size()) + " triples");
    }
    auto corpus = ingest_sparse(triples);
    if (corpus.num_docs() != header->docs || corpus.vocab_size() != header->terms) {
        throw DataError("sparse corpus: header docs/terms do not match body (" + std::to_string(corpus.num_docs()) +
                        " docs, " + std::to_string(corpus.vocab_size()) + " terms)");
    }
    return corpus;
}

Corpus read_sparse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_sparse(in);
}

void write_sparse(std::ostream& out, const Corpus& corpus) {
    // Only terms that occur are written, so the header counts used terms.
    std::vector<bool> used(corpus.vocab_size(), false);
    for (const auto& doc : corpus.docs()) {
        for (const auto& e : doc.entries) used[e.term] = true;
    }
    const auto terms = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
    out << "docs=" << corpus.num_docs() << " terms=" << terms << " nnz=" << corpus.nnz() << '\n';
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        for (const auto& e : corpus.doc(d).entries) {
            out << corpus.doc_ids()[d] << ' ' << corpus.vocab().term(e.term) << ' ' << e.count << '\n';
        }
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::unordered_set<std::string> read_stopwords(const std::string& path) {
    std::unordered_set<std::string> words;
    for (const auto& line : read_lines(path)) {
        for (auto& tok : tokenize(line)) words.insert(std::move(tok));
    }
    return words;
}

Corpus read_corpus_file(const std::string& path, const TextOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string first;
    std::getline(in, first);
    if (parse_header(first)) {
        in.clear();
        in.seekg(0);
        return read_sparse(in);
    }
    const auto lines = read_lines(path);
    return ingest_text(lines, options);
}

LanguageModel doc_language_model(const Corpus& corpus, std::size_t d) {
    const auto& doc = corpus.doc(d);
    LanguageModel lm{std::vector<double>(corpus.vocab_size(), 0.0)};
    const auto n = static_cast<double>(doc.length());
    for (const auto& e : doc.entries) lm.probs[e.term] = e.count / n;
    return lm;
}

LanguageModel background_model(const Corpus& corpus) {
    std::vector<std::uint64_t> counts(corpus.vocab_size(), 0);
    for (const auto& doc : corpus.docs()) {
        for (const auto& e : doc.entries) counts[e.term] += e.count;
    }
    LanguageModel lm{std::vector<double>(corpus.vocab_size())};
    const auto total = static_cast<double>(corpus.total_tokens());
    for (std::size_t w = 0; w < counts.size(); ++w) lm.probs[w] = counts[w] / total;
    return lm;
}

}  // namespace nplsa
