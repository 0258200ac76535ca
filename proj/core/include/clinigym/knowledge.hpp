#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clinigym {

struct Passage {
    std::string doc_id;
    std::string source;
    std::string title;
    std::string content;
    std::string category;
    std::string dataset_name;
};

struct IndexStats {
    std::size_t passage_count = 0;
    std::size_t distinct_terms = 0;
    double average_doc_length = 0.0;  // stemmed tokens per passage
};

struct SearchHit {
    std::string doc_id;
    double score = 0.0;
    std::string snippet;
};

/// Full-text passage index with BM25 ranking (k1 = 1.2, b = 0.75).
///
/// Scoring, for each query term t against document D:
///   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
///   score += idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |D| / avgdl))
/// Document order is canonicalized by doc_id so results are byte-identical
/// regardless of ingestion order. Ties break by ascending doc_id.
///
/// Query strings support implicit AND between terms plus the uppercase
/// operators AND, OR, NOT and parentheses. NOT is the set difference of its
/// operands; only positive terms contribute to BM25 scores.
///
/// The index is immutable after ingest(): concurrent readers are safe,
/// ingestion is exclusive.
class KnowledgeIndex {
public:
    KnowledgeIndex() = default;

    /// Build the index from a passage set. Throws IngestError on duplicate
    /// doc_id or empty content. May be called once per instance.
    IndexStats ingest(std::vector<Passage> passages);

    IndexStats stats() const { return stats_; }

    std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

    /// <= 240-char window anchored at the first matched term, matches
    /// wrapped in brackets. Falls back to the leading prefix when nothing
    /// matches. Throws NotFoundError for unknown doc ids.
    std::string snippet(std::string_view doc_id, std::string_view query) const;

    bool contains(std::string_view doc_id) const;
    const Passage* find(std::string_view doc_id) const;
    const std::vector<Passage>& passages() const { return passages_; }

    /// Single-file on-disk form: magic header + length-prefixed passage
    /// records, little-endian sizes. The posting lists are rebuilt on load.
    void save(const std::string& path) const;
    static KnowledgeIndex load(const std::string& path);

private:
    struct Posting {
        std::uint32_t doc = 0;
        std::uint32_t freq = 0;
    };

    std::vector<Passage> passages_;  // sorted by doc_id
    std::vector<std::size_t> doc_length_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    IndexStats stats_;

    double bm25_term_score(const std::string& term, std::uint32_t doc) const;
    std::vector<std::uint32_t> docs_with_term(const std::string& term) const;
};

/// Parse one Passage per JSONL line. Lines that are blank are skipped;
/// malformed lines raise IngestError with the line number.
std::vector<Passage> read_passages_jsonl(std::istream& in);

}  // namespace clinigym
