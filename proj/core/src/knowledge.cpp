#include "clinigym/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "clinigym/errors.hpp"
#include "clinigym/text.hpp"

namespace clinigym {

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;
constexpr std::size_t kSnippetWindow = 240;

// --- boolean query language ----------------------------------------------

struct QueryNode {
    enum class Kind { Term, And, Or, Not } kind = Kind::Term;
    std::string term;  // stemmed
    std::vector<QueryNode> children;
};

struct QueryToken {
    enum class Kind { Term, And, Or, Not, LParen, RParen } kind;
    std::string text;
};

std::vector<QueryToken> lex_query(std::string_view query) {
    std::vector<QueryToken> out;
    std::size_t i = 0;
    while (i < query.size()) {
        char c = query[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            out.push_back({QueryToken::Kind::LParen, "("});
            ++i;
        } else if (c == ')') {
            out.push_back({QueryToken::Kind::RParen, ")"});
            ++i;
        } else {
            std::size_t j = i;
            while (j < query.size() && query[j] != '(' && query[j] != ')' &&
                   !std::isspace(static_cast<unsigned char>(query[j]))) {
                ++j;
            }
            std::string word(query.substr(i, j - i));
            if (word == "AND") {
                out.push_back({QueryToken::Kind::And, word});
            } else if (word == "OR") {
                out.push_back({QueryToken::Kind::Or, word});
            } else if (word == "NOT") {
                out.push_back({QueryToken::Kind::Not, word});
            } else {
                // A raw word may tokenize into several terms ("ACE-inhibitor").
                for (auto& t : text::stem_tokens(word)) {
                    out.push_back({QueryToken::Kind::Term, std::move(t)});
                }
            }
            i = j;
        }
    }
    return out;
}

class QueryParser {
public:
    explicit QueryParser(std::vector<QueryToken> tokens) : tokens_(std::move(tokens)) {}

    QueryNode parse() {
        if (tokens_.empty()) throw QuerySyntaxError("empty query");
        QueryNode root = parse_or();
        if (pos_ != tokens_.size()) {
            throw QuerySyntaxError("unexpected token '" + tokens_[pos_].text + "' in query");
        }
        return root;
    }

private:
    std::vector<QueryToken> tokens_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= tokens_.size(); }
    const QueryToken& peek() const { return tokens_[pos_]; }

    QueryNode parse_or() {
        QueryNode left = parse_and();
        while (!at_end() && peek().kind == QueryToken::Kind::Or) {
            ++pos_;
            QueryNode right = parse_and();
            QueryNode node;
            node.kind = QueryNode::Kind::Or;
            node.children.push_back(std::move(left));
            node.children.push_back(std::move(right));
            left = std::move(node);
        }
        return left;
    }

    // Adjacency is implicit AND; "a NOT b" is set difference, as in FTS5.
    QueryNode parse_and() {
        QueryNode left = parse_primary();
        while (!at_end()) {
            if (peek().kind == QueryToken::Kind::And) {
                ++pos_;
                QueryNode right = parse_primary();
                QueryNode node;
                node.kind = QueryNode::Kind::And;
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
                left = std::move(node);
            } else if (peek().kind == QueryToken::Kind::Not) {
                ++pos_;
                QueryNode right = parse_primary();
                QueryNode node;
                node.kind = QueryNode::Kind::Not;
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
                left = std::move(node);
            } else if (peek().kind == QueryToken::Kind::Term ||
                       peek().kind == QueryToken::Kind::LParen) {
                QueryNode right = parse_primary();
                QueryNode node;
                node.kind = QueryNode::Kind::And;
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
                left = std::move(node);
            } else {
                break;
            }
        }
        return left;
    }

    QueryNode parse_primary() {
        if (at_end()) throw QuerySyntaxError("dangling operator at end of query");
        const QueryToken& tok = peek();
        switch (tok.kind) {
            case QueryToken::Kind::Term: {
                QueryNode node;
                node.kind = QueryNode::Kind::Term;
                node.term = tok.text;
                ++pos_;
                return node;
            }
            case QueryToken::Kind::LParen: {
                ++pos_;
                QueryNode inner = parse_or();
                if (at_end() || peek().kind != QueryToken::Kind::RParen) {
                    throw QuerySyntaxError("unbalanced parenthesis in query");
                }
                ++pos_;
                return inner;
            }
            default:
                throw QuerySyntaxError("operator '" + tok.text + "' needs a left operand");
        }
    }
};

// Positive terms in first-appearance order; terms under the right side of
// NOT are excluded from scoring.
void collect_positive_terms(const QueryNode& node, std::vector<std::string>& out) {
    switch (node.kind) {
        case QueryNode::Kind::Term:
            if (std::find(out.begin(), out.end(), node.term) == out.end()) {
                out.push_back(node.term);
            }
            break;
        case QueryNode::Kind::Not:
            collect_positive_terms(node.children[0], out);
            break;
        default:
            for (const auto& c : node.children) collect_positive_terms(c, out);
    }
}

std::vector<std::uint32_t> intersect(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<std::uint32_t> unite(const std::vector<std::uint32_t>& a,
                                 const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<std::uint32_t> subtract(const std::vector<std::uint32_t>& a,
                                    const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Byte-offset token scan mirroring text::word_tokens boundaries, used for
// snippet highlighting.
struct TokenSpan {
    std::size_t begin;
    std::size_t end;
    std::string stem;
};

std::vector<TokenSpan> scan_spans(std::string_view content) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < content.size()) {
        unsigned char c = content[i];
        bool word_char = (c >= 0x80) || std::isalnum(c);
        if (!word_char) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < content.size()) {
            unsigned char cj = content[j];
            if ((cj >= 0x80) || std::isalnum(cj)) {
                ++j;
            } else {
                break;
            }
        }
        auto toks = text::stem_tokens(content.substr(i, j - i));
        // A multi-codepoint fold can split one raw run into several terms;
        // index the whole run under each so highlighting stays byte-exact.
        for (auto& t : toks) spans.push_back({i, j, std::move(t)});
        i = j;
    }
    return spans;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IngestError("truncated index file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IngestError("truncated index file");
    return s;
}

constexpr char kIndexMagic[8] = {'C', 'G', 'Y', 'M', 'I', 'D', 'X', '1'};

}  // namespace

IndexStats KnowledgeIndex::ingest(std::vector<Passage> passages) {
    if (!passages_.empty()) throw IngestError("index already built; ingestion is write-once");

    std::sort(passages.begin(), passages.end(),
              [](const Passage& a, const Passage& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (passages[i].content.empty()) {
            throw IngestError("passage '" + passages[i].doc_id + "' has empty content");
        }
        if (i > 0 && passages[i].doc_id == passages[i - 1].doc_id) {
            throw IngestError("duplicate doc_id '" + passages[i].doc_id + "'");
        }
    }
    passages_ = std::move(passages);

    doc_length_.resize(passages_.size());
    std::size_t total_len = 0;
    for (std::uint32_t d = 0; d < passages_.size(); ++d) {
        const Passage& p = passages_[d];
        std::unordered_map<std::string, std::uint32_t> freq;
        std::size_t len = 0;
        for (auto& term : text::stem_tokens(p.content)) {
            ++freq[term];
            ++len;
        }
        doc_length_[d] = len;
        total_len += len;
        for (auto& [term, f] : freq) postings_[term].push_back({d, f});
    }
    for (auto& [term, list] : postings_) {
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }

    stats_.passage_count = passages_.size();
    stats_.distinct_terms = postings_.size();
    stats_.average_doc_length =
        passages_.empty() ? 0.0 : static_cast<double>(total_len) / passages_.size();
    return stats_;
}

double KnowledgeIndex::bm25_term_score(const std::string& term, std::uint32_t doc) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0.0;
    const auto& list = it->second;
    auto pit = std::lower_bound(list.begin(), list.end(), doc,
                                [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (pit == list.end() || pit->doc != doc) return 0.0;
    const double n = static_cast<double>(stats_.passage_count);
    const double df = static_cast<double>(list.size());
    const double tf = static_cast<double>(pit->freq);
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double norm = static_cast<double>(doc_length_[doc]) / stats_.average_doc_length;
    return idf * tf * (kBm25K1 + 1.0) / (tf + kBm25K1 * (1.0 - kBm25B + kBm25B * norm));
}

std::vector<std::uint32_t> KnowledgeIndex::docs_with_term(const std::string& term) const {
    std::vector<std::uint32_t> out;
    auto it = postings_.find(term);
    if (it == postings_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& p : it->second) out.push_back(p.doc);
    return out;
}

std::vector<SearchHit> KnowledgeIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0) throw ContractError("search: k must be >= 1");
    QueryNode root = QueryParser(lex_query(query)).parse();
    if (passages_.empty()) return {};

    // Evaluate the boolean tree to the matching doc set.
    auto eval = [this](const QueryNode& node, auto&& self) -> std::vector<std::uint32_t> {
        switch (node.kind) {
            case QueryNode::Kind::Term:
                return docs_with_term(node.term);
            case QueryNode::Kind::And:
                return intersect(self(node.children[0], self), self(node.children[1], self));
            case QueryNode::Kind::Or:
                return unite(self(node.children[0], self), self(node.children[1], self));
            case QueryNode::Kind::Not:
                return subtract(self(node.children[0], self), self(node.children[1], self));
        }
        return {};
    };
    std::vector<std::uint32_t> matched = eval(root, eval);
    if (matched.empty()) return {};

    std::vector<std::string> terms;
    collect_positive_terms(root, terms);

    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(matched.size());
    for (std::uint32_t doc : matched) {
        double score = 0.0;
        for (const auto& term : terms) score += bm25_term_score(term, doc);
        scored.emplace_back(score, doc);
    }
    std::sort(scored.begin(), scored.end(), [this](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return passages_[a.second].doc_id < passages_[b.second].doc_id;
    });
    if (scored.size() > k) scored.resize(k);

    std::vector<SearchHit> hits;
    hits.reserve(scored.size());
    for (const auto& [score, doc] : scored) {
        hits.push_back({passages_[doc].doc_id, score, snippet(passages_[doc].doc_id, query)});
    }
    return hits;
}

std::string KnowledgeIndex::snippet(std::string_view doc_id, std::string_view query) const {
    const Passage* p = find(doc_id);
    if (p == nullptr) throw NotFoundError("unknown doc_id '" + std::string(doc_id) + "'");

    QueryNode root = QueryParser(lex_query(query)).parse();
    std::vector<std::string> terms;
    collect_positive_terms(root, terms);

    const std::string& content = p->content;
    auto spans = scan_spans(content);
    auto is_match = [&](const TokenSpan& s) {
        return std::find(terms.begin(), terms.end(), s.stem) != terms.end();
    };

    std::size_t window_begin = 0;
    auto first = std::find_if(spans.begin(), spans.end(), is_match);
    bool any_match = first != spans.end();
    if (any_match) {
        window_begin = first->begin > 60 ? first->begin - 60 : 0;
    }
    std::size_t window_end = std::min(content.size(), window_begin + kSnippetWindow);

    if (!any_match) return content.substr(0, window_end);

    std::string out;
    out.reserve(kSnippetWindow + 16);
    std::size_t cursor = window_begin;
    for (const auto& s : spans) {
        if (s.end <= window_begin || s.begin >= window_end) continue;
        if (!is_match(s)) continue;
        if (s.begin < cursor) continue;  // run already highlighted (multi-term span)
        out += content.substr(cursor, s.begin - cursor);
        out += '[';
        out += content.substr(s.begin, s.end - s.begin);
        out += ']';
        cursor = s.end;
    }
    out += content.substr(cursor, window_end - cursor);
    return out;
}

bool KnowledgeIndex::contains(std::string_view doc_id) const { return find(doc_id) != nullptr; }

const Passage* KnowledgeIndex::find(std::string_view doc_id) const {
    auto it = std::lower_bound(passages_.begin(), passages_.end(), doc_id,
                               [](const Passage& p, std::string_view id) { return p.doc_id < id; });
    if (it == passages_.end() || it->doc_id != doc_id) return nullptr;
    return &*it;
}

void KnowledgeIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot open '" + path + "' for writing");
    out.write(kIndexMagic, sizeof kIndexMagic);
    write_u32(out, 1);  // version
    write_u32(out, static_cast<std::uint32_t>(passages_.size()));
    for (const auto& p : passages_) {
        write_str(out, p.doc_id);
        write_str(out, p.source);
        write_str(out, p.title);
        write_str(out, p.content);
        write_str(out, p.category);
        write_str(out, p.dataset_name);
    }
    if (!out) throw IngestError("short write to '" + path + "'");
}

KnowledgeIndex KnowledgeIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kIndexMagic, sizeof magic) != 0) {
        throw IngestError("'" + path + "' is not a clinigym index file");
    }
    std::uint32_t version = read_u32(in);
    if (version != 1) throw IngestError("unsupported index version");
    std::uint32_t count = read_u32(in);
    std::vector<Passage> passages;
    passages.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Passage p;
        p.doc_id = read_str(in);
        p.source = read_str(in);
        p.title = read_str(in);
        p.content = read_str(in);
        p.category = read_str(in);
        p.dataset_name = read_str(in);
        passages.push_back(std::move(p));
    }
    KnowledgeIndex idx;
    idx.ingest(std::move(passages));
    return idx;
}

std::vector<Passage> read_passages_jsonl(std::istream& in) {
    std::vector<Passage> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw IngestError("line " + std::to_string(line_no) + ": not a JSON object");
        }
        Passage p;
        try {
            p.doc_id = j.at("doc_id").get<std::string>();
            p.content = j.at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw IngestError("line " + std::to_string(line_no) +
                              ": doc_id and content are required");
        }
        p.source = j.value("source", "");
        p.title = j.value("title", "");
        p.category = j.value("category", "");
        p.dataset_name = j.value("dataset_name", "");
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace clinigym
