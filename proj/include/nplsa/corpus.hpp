#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace nplsa {

using TermId = std::uint32_t;

/// Dense term <-> id mapping. Ids are 0..size()-1 in insertion order.
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    /// Returns the id of term, inserting it if absent.
    TermId add(std::string_view term);
    std::optional<TermId> find(std::string_view term) const;

    const std::string& term(TermId id) const { return terms_.at(id); }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

  private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> index_;
};

struct TermCount {
    TermId term;
    std::uint32_t count;

    bool operator==(const TermCount&) const = default;
};

/// One bag-of-words row, sorted by term id with no duplicates.
struct Document {
    std::vector<TermCount> entries;

    std::uint64_t length() const;
    bool operator==(const Document&) const = default;
};

/// Immutable sparse document-word count matrix n(d, w) plus its vocabulary.
class Corpus {
  public:
    /// Validates the row invariants (sorted unique term ids < V, counts >= 1,
    /// no empty rows) and throws DataError on violation.
    Corpus(Vocabulary vocab, std::vector<Document> docs, std::vector<std::string> doc_ids,
           std::vector<std::string> dropped_ids = {});

    const Vocabulary& vocab() const { return vocab_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    std::size_t num_docs() const { return docs_.size(); }
    const Document& doc(std::size_t d) const { return docs_.at(d); }
    const std::vector<Document>& docs() const { return docs_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    /// External ids of documents removed because filtering left them empty.
    const std::vector<std::string>& dropped_ids() const { return dropped_ids_; }
    std::uint64_t total_tokens() const { return total_tokens_; }
    std::size_t nnz() const;

    bool operator==(const Corpus& other) const;

  private:
    Vocabulary vocab_;
    std::vector<Document> docs_;
    std::vector<std::string> doc_ids_;
    std::vector<std::string> dropped_ids_;
    std::uint64_t total_tokens_ = 0;
};

/// Length-V probability vector.
struct LanguageModel {
    std::vector<double> probs;
};

struct TextOptions {
    std::size_t min_df = 1;
    std::unordered_set<std::string> stopwords;
};

/// Lowercase ASCII letters and split on runs of non-alphanumeric bytes.
/// Bytes >= 0x80 are kept as token characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view line);

/// One document per entry. The vocabulary is sorted lexicographically; terms
/// with document frequency below min_df or in the stopword set are removed;
/// documents left empty are dropped and their (0-based line) ids recorded.
Corpus ingest_text(std::span<const std::string> lines, const TextOptions& options = {});

struct SparseTriple {
    std::string doc;
    std::string term;
    long long count = 0;
    std::size_t line = 0;  // source line for error messages; 0 if unknown
};

/// Documents and terms are numbered in order of first appearance; repeated
/// (doc, term) pairs are summed.
Corpus ingest_sparse(std::span<const SparseTriple> triples);

/// Parses the "docs=<D> terms=<V> nnz=<N>" header plus triples and checks the
/// header against the body.
Corpus read_sparse(std::istream& in);
Corpus read_sparse_file(const std::string& path);
void write_sparse(std::ostream& out, const Corpus& corpus);

std::vector<std::string> read_lines(const std::string& path);
std::unordered_set<std::string> read_stopwords(const std::string& path);

/// Reads a sparse corpus when the first line is a sparse header, otherwise a
/// one-document-per-line text corpus.
Corpus read_corpus_file(const std::string& path, const TextOptions& options = {});

/// Unsmoothed maximum-likelihood model of one document.
LanguageModel doc_language_model(const Corpus& corpus, std::size_t d);

/// Pooled collection model: total count of each term over all tokens.
LanguageModel background_model(const Corpus& corpus);

}  // namespace nplsa
