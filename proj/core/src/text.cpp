#include "clinigym/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace clinigym::text {

namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Latin-1 supplement diacritic folding (the subset unicode61 folds).
// Returns 0 when the codepoint has no ASCII base letter.
char fold_latin1(unsigned cp) {
    struct Range {
        unsigned lo, hi;
        char base;
    };
    static constexpr std::array<Range, 14> kRanges{{
        {0xC0, 0xC5, 'a'}, {0xC8, 0xCB, 'e'}, {0xCC, 0xCF, 'i'}, {0xD2, 0xD6, 'o'},
        {0xD9, 0xDC, 'u'}, {0xE0, 0xE5, 'a'}, {0xE8, 0xEB, 'e'}, {0xEC, 0xEF, 'i'},
        {0xF2, 0xF6, 'o'}, {0xF9, 0xFC, 'u'}, {0xC7, 0xC7, 'c'}, {0xE7, 0xE7, 'c'},
        {0xD1, 0xD1, 'n'}, {0xF1, 0xF1, 'n'},
    }};
    for (const auto& r : kRanges) {
        if (cp >= r.lo && cp <= r.hi) return r.base;
    }
    if (cp == 0xDD) return 'y';
    if (cp == 0xFD || cp == 0xFF) return 'y';
    return 0;
}

// --- Porter stemmer ------------------------------------------------------
//
// The 1980 algorithm with the departures found in common production
// implementations: step-2 uses bli->ble and adds logi->log, suffix rules
// only fire when a non-empty stem remains, and words of length <= 2 are
// returned untouched.

bool is_consonant(const std::string& w, std::size_t i) {
    char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
    return true;
}

// Number of vowel->consonant transitions in w[0..n): the Porter measure.
int measure(const std::string& w, std::size_t n) {
    std::size_t i = 0;
    int m = 0;
    while (i < n && is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !is_consonant(w, i)) ++i;
        if (i >= n) break;
        ++m;
        while (i < n && is_consonant(w, i)) ++i;
    }
    return m;
}

bool has_vowel(const std::string& w, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

bool double_consonant(const std::string& w, std::size_t n) {
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant and the final consonant is not
// w, x or y.
bool cvc_end(const std::string& w, std::size_t n) {
    if (n < 3) return false;
    if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, std::string_view suf) {
    // Strict '>' keeps the remaining stem non-empty.
    return w.size() > suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
    int min_measure;  // measure of the remaining stem must exceed this
};

// Apply the first rule whose suffix matches textually; later rules are not
// tried even when the measure condition fails.
bool apply_rules(std::string& w, std::initializer_list<Rule> rules) {
    for (const auto& r : rules) {
        if (!ends_with(w, r.suffix)) continue;
        std::size_t stem_len = w.size() - r.suffix.size();
        if (measure(w, stem_len) > r.min_measure) {
            w.resize(stem_len);
            w.append(r.replacement);
        }
        return true;
    }
    return false;
}

void step1a(std::string& w) {
    if (w.back() != 's') return;
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ss")) {
        // keep
    } else {
        w.pop_back();
    }
}

void step1b(std::string& w) {
    if (ends_with(w, "eed")) {
        if (measure(w, w.size() - 3) > 0) w.pop_back();
        return;
    }
    bool removed = false;
    if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
        w.resize(w.size() - 2);
        removed = true;
    } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
        w.resize(w.size() - 3);
        removed = true;
    }
    if (!removed) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
    } else if (double_consonant(w, w.size())) {
        char last = w.back();
        if (last != 'l' && last != 's' && last != 'z') w.pop_back();
    } else if (measure(w, w.size()) == 1 && cvc_end(w, w.size())) {
        w.push_back('e');
    }
}

void step1c(std::string& w) {
    if (w.back() == 'y' && w.size() > 1 && has_vowel(w, w.size() - 1)) {
        w.back() = 'i';
    }
}

void step2(std::string& w) {
    apply_rules(w, {
        {"ization", "ize", 0}, {"ational", "ate", 0}, {"iveness", "ive", 0},
        {"fulness", "ful", 0}, {"ousness", "ous", 0}, {"biliti", "ble", 0},
        {"tional", "tion", 0}, {"alism", "al", 0}, {"aliti", "al", 0},
        {"ousli", "ous", 0}, {"entli", "ent", 0}, {"iviti", "ive", 0},
        {"ation", "ate", 0}, {"enci", "ence", 0}, {"anci", "ance", 0},
        {"izer", "ize", 0}, {"logi", "log", 0}, {"alli", "al", 0},
        {"ator", "ate", 0}, {"bli", "ble", 0}, {"eli", "e", 0},
    });
}

void step3(std::string& w) {
    apply_rules(w, {
        {"icate", "ic", 0}, {"ative", "", 0}, {"alize", "al", 0},
        {"iciti", "ic", 0}, {"ical", "ic", 0}, {"ful", "", 0}, {"ness", "", 0},
    });
}

void step4(std::string& w) {
    if (ends_with(w, "ion")) {
        std::size_t stem_len = w.size() - 3;
        char prev = w[stem_len - 1];
        if (measure(w, stem_len) > 1 && (prev == 's' || prev == 't')) w.resize(stem_len);
        return;
    }
    apply_rules(w, {
        {"ement", "", 1}, {"ance", "", 1}, {"ence", "", 1}, {"able", "", 1},
        {"ible", "", 1}, {"ment", "", 1}, {"ant", "", 1}, {"ent", "", 1},
        {"ism", "", 1}, {"ate", "", 1}, {"iti", "", 1}, {"ous", "", 1},
        {"ive", "", 1}, {"ize", "", 1}, {"al", "", 1}, {"er", "", 1},
        {"ic", "", 1}, {"ou", "", 1},
    });
}

void step5(std::string& w) {
    if (w.back() == 'e' && w.size() > 1) {
        std::size_t n = w.size() - 1;
        int m = measure(w, n);
        if (m > 1 || (m == 1 && !cvc_end(w, n))) w.pop_back();
    }
    if (w.size() > 2 && w.back() == 'l' && double_consonant(w, w.size()) &&
        measure(w, w.size()) > 1) {
        w.pop_back();
    }
}

bool is_pure_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c < 0x80; });
}

}  // namespace

std::string porter_stem(std::string_view word) {
    std::string w(word);
    if (w.size() <= 2 || !is_pure_ascii(w)) return w;
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return w;
}

std::vector<std::string> word_tokens(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    const std::size_t n = input.size();
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    while (i < n) {
        unsigned char b = input[i];
        if (b < 0x80) {
            if (is_ascii_alnum(b)) {
                current.push_back(static_cast<char>(std::tolower(b)));
            } else {
                flush();
            }
            ++i;
            continue;
        }
        // Decode one UTF-8 codepoint (2-4 bytes); malformed bytes separate.
        unsigned cp = 0;
        std::size_t len = 0;
        if ((b & 0xE0) == 0xC0) {
            cp = b & 0x1F;
            len = 2;
        } else if ((b & 0xF0) == 0xE0) {
            cp = b & 0x0F;
            len = 3;
        } else if ((b & 0xF8) == 0xF0) {
            cp = b & 0x07;
            len = 4;
        } else {
            flush();
            ++i;
            continue;
        }
        if (i + len > n) {
            flush();
            break;
        }
        bool valid = true;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cont = input[i + k];
            if ((cont & 0xC0) != 0x80) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (!valid) {
            flush();
            ++i;
            continue;
        }
        if (char folded = (cp <= 0xFF ? fold_latin1(cp) : 0); folded != 0) {
            current.push_back(folded);
        } else {
            current.append(input.substr(i, len));
        }
        i += len;
    }
    flush();
    return tokens;
}

std::vector<std::string> stem_tokens(std::string_view input) {
    std::vector<std::string> tokens = word_tokens(input);
    for (auto& t : tokens) t = porter_stem(t);
    return tokens;
}

std::size_t approx_token_count(std::string_view input) {
    std::size_t count = 0;
    bool in_word = false;
    for (unsigned char c : input) {
        if (is_ascii_alnum(c) || c >= 0x80) {
            if (!in_word) {
                ++count;
                in_word = true;
            }
        } else {
            in_word = false;
            if (!std::isspace(c)) ++count;  // punctuation is its own token
        }
    }
    return count;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_answer(std::string_view answer) {
    std::string t = trim(answer);
    // Bare option letter, optionally wrapped in punctuation: "b)", "(C", "d."
    std::size_t i = 0, j = t.size();
    while (i < j && (t[i] == '(' || t[i] == '[' || t[i] == '"' || t[i] == '\'')) ++i;
    if (i < j) {
        char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t[i])));
        if (c >= 'A' && c <= 'E') {
            bool rest_punct = true;
            for (std::size_t k = i + 1; k < j; ++k) {
                unsigned char r = t[k];
                if (!std::ispunct(r) && !std::isspace(r)) {
                    rest_punct = false;
                    break;
                }
            }
            if (rest_punct) return std::string(1, c);
        }
    }
    std::string lower = to_lower(t);
    while (!lower.empty()) {
        unsigned char c = lower.back();
        if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' ||
            std::isspace(c)) {
            lower.pop_back();
        } else {
            break;
        }
    }
    return lower;
}

}  // namespace clinigym::text
