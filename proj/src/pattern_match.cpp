#include "spamsift/pattern_match.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "spamsift/errors.hpp"

namespace spamsift {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_alnum(char c) { return is_alpha(c) || (c >= '0' && c <= '9'); }

bool starts_with_folded(std::string_view text, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > text.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (fold_char(text[pos + i]) != prefix[i]) return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Folded search for a lower-case needle; used to find raw-text terminators.
std::size_t find_folded(std::string_view text, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
        if (starts_with_folded(text, i, needle)) return i;
    }
    return std::string_view::npos;
}

std::vector<KmpPattern> compile_list(const std::vector<std::string>& words, const char* which) {
    if (words.empty()) throw ConfigError(std::string(which) + " keyword list is empty");
    std::vector<KmpPattern> out;
    std::set<std::string> seen;
    out.reserve(words.size());
    for (const auto& w : words) {
        const auto t = trim(w);
        if (t.empty()) throw ConfigError(std::string(which) + " keyword list holds an empty entry");
        KmpPattern p(t);
        if (!seen.insert(p.text()).second) {
            throw ConfigError(std::string(which) + " keyword list repeats '" + p.text() + "'");
        }
        out.push_back(std::move(p));
    }
    return out;
}

class TagScanner {
public:
    explicit TagScanner(std::string_view html) : html_(html) {}

    std::vector<HtmlTag> run() {
        std::vector<HtmlTag> tags;
        while (pos_ < html_.size()) {
            const auto lt = html_.find('<', pos_);
            if (lt == std::string_view::npos) break;
            pos_ = lt;
            if (starts_with_folded(html_, pos_, "<!--")) {
                const auto close = html_.find("-->", pos_ + 4);
                pos_ = close == std::string_view::npos ? html_.size() : close + 3;
                continue;
            }
            if (pos_ + 1 < html_.size() && (html_[pos_ + 1] == '!' || html_[pos_ + 1] == '?')) {
                const auto close = html_.find('>', pos_);
                pos_ = close == std::string_view::npos ? html_.size() : close + 1;
                continue;
            }
            const bool closing = pos_ + 1 < html_.size() && html_[pos_ + 1] == '/';
            const std::size_t name_at = pos_ + (closing ? 2 : 1);
            if (name_at >= html_.size() || !is_alpha(html_[name_at])) {
                ++pos_;  // a literal '<' in text
                continue;
            }
            HtmlTag tag;
            tag.begin = pos_;
            tag.closing = closing;
            pos_ = name_at;
            while (pos_ < html_.size() && (is_alnum(html_[pos_]) || html_[pos_] == '-' ||
                                           html_[pos_] == '_' || html_[pos_] == ':')) {
                tag.name.push_back(fold_char(html_[pos_++]));
            }
            read_attributes(tag);
            tag.end = pos_;
            const bool raw_text = !tag.closing && !tag.self_closing &&
                                  (tag.name == "script" || tag.name == "style");
            const std::string terminator = raw_text ? "</" + tag.name : std::string();
            tags.push_back(std::move(tag));
            if (raw_text) {
                const auto close = find_folded(html_, terminator, pos_);
                pos_ = close == std::string_view::npos ? html_.size() : close;
            }
        }
        return tags;
    }

private:
    void skip_space() {
        while (pos_ < html_.size() && is_space(html_[pos_])) ++pos_;
    }

    void read_attributes(HtmlTag& tag) {
        while (pos_ < html_.size()) {
            skip_space();
            if (pos_ >= html_.size()) return;
            const char c = html_[pos_];
            if (c == '>') {
                ++pos_;
                return;
            }
            if (c == '/') {
                ++pos_;
                if (pos_ < html_.size() && html_[pos_] == '>') {
                    tag.self_closing = true;
                    ++pos_;
                    return;
                }
                continue;
            }
            if (c == '<') return;  // unterminated tag; let the next scan start here
            TagAttribute attr;
            while (pos_ < html_.size() && !is_space(html_[pos_]) && html_[pos_] != '=' &&
                   html_[pos_] != '>' && html_[pos_] != '/' && html_[pos_] != '<') {
                attr.name.push_back(fold_char(html_[pos_++]));
            }
            if (attr.name.empty()) {
                ++pos_;  // stray quote or similar junk
                continue;
            }
            skip_space();
            if (pos_ < html_.size() && html_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < html_.size() && (html_[pos_] == '"' || html_[pos_] == '\'')) {
                    const char quote = html_[pos_++];
                    const auto close = html_.find(quote, pos_);
                    const auto stop = close == std::string_view::npos ? html_.size() : close;
                    attr.value = decode_entities(html_.substr(pos_, stop - pos_));
                    pos_ = close == std::string_view::npos ? html_.size() : close + 1;
                } else {
                    const auto start = pos_;
                    while (pos_ < html_.size() && !is_space(html_[pos_]) && html_[pos_] != '>') ++pos_;
                    attr.value = decode_entities(html_.substr(start, pos_ - start));
                }
            }
            tag.attributes.push_back(std::move(attr));
        }
    }

    std::string_view html_;
    std::size_t pos_ = 0;
};

bool equals_folded(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return fold_char(x) == fold_char(y); });
}

}  // namespace

std::string fold_case(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = fold_char(c);
    return out;
}

std::vector<std::size_t> build_failure_table(std::string_view pattern) {
    if (pattern.empty()) throw InvalidPatternError("pattern must not be empty");
    std::vector<std::size_t> table(pattern.size(), 0);
    std::size_t k = 0;
    for (std::size_t i = 1; i < pattern.size(); ++i) {
        while (k > 0 && pattern[i] != pattern[k]) k = table[k - 1];
        if (pattern[i] == pattern[k]) ++k;
        table[i] = k;
    }
    return table;
}

KmpPattern::KmpPattern(std::string_view text) : text_(fold_case(text)), failure_(build_failure_table(text_)) {}

namespace {

// Shared scan loop. on_match returns false to stop early.
template <typename OnMatch>
void kmp_scan(std::string_view text, const KmpPattern& pattern, SearchStats* stats, OnMatch on_match) {
    const auto& p = pattern.text();
    const auto& fail = pattern.failure();
    const std::size_t m = p.size();
    std::size_t comparisons = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = fold_char(text[i]);
        for (;;) {
            ++comparisons;
            if (c == p[j]) {
                ++j;
                break;
            }
            if (j == 0) break;
            j = fail[j - 1];
        }
        if (j == m) {
            if (!on_match(i + 1 - m)) break;
            j = fail[m - 1];
        }
    }
    if (stats != nullptr) stats->comparisons += comparisons;
}

}  // namespace

std::vector<std::size_t> kmp_search(std::string_view text, const KmpPattern& pattern, SearchStats* stats) {
    std::vector<std::size_t> hits;
    kmp_scan(text, pattern, stats, [&](std::size_t at) {
        hits.push_back(at);
        return true;
    });
    return hits;
}

std::optional<std::size_t> kmp_find_first(std::string_view text, const KmpPattern& pattern, SearchStats* stats) {
    std::optional<std::size_t> hit;
    kmp_scan(text, pattern, stats, [&](std::size_t at) {
        hit = at;
        return false;
    });
    return hit;
}

MatchSummary contains_any(std::string_view text, const std::vector<KmpPattern>& patterns) {
    MatchSummary summary;
    for (const auto& p : patterns) {
        if (kmp_find_first(text, p)) ++summary.matched_count;
    }
    summary.matched = summary.matched_count > 0;
    return summary;
}

KeywordSet::KeywordSet(std::vector<std::string> special, std::vector<std::string> public_words, int special_score,
                       int public_score)
    : special_(compile_list(special, "special")),
      public_(compile_list(public_words, "public")),
      special_score_(special_score),
      public_score_(public_score) {
    if (special_score_ <= 0 || public_score_ <= 0) throw ConfigError("keyword scores must be positive");
}

KeywordScore score_breakdown(std::string_view text, const KeywordSet& keywords) {
    KeywordScore score;
    score.special_matched = contains_any(text, keywords.special()).matched_count;
    score.public_matched = contains_any(text, keywords.public_words()).matched_count;
    score.special_points = static_cast<long>(score.special_matched) * keywords.special_score();
    score.public_points = static_cast<long>(score.public_matched) * keywords.public_score();
    return score;
}

long score_keywords(std::string_view text, const KeywordSet& keywords) {
    return score_breakdown(text, keywords).total();
}

std::vector<std::string> load_keyword_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read keyword file " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (!view.empty()) words.emplace_back(view);
    }
    return words;
}

const std::string* HtmlTag::attribute(std::string_view attr_name) const {
    for (const auto& a : attributes) {
        if (a.name == attr_name) return &a.value;
    }
    return nullptr;
}

std::vector<HtmlTag> scan_tags(std::string_view html) { return TagScanner(html).run(); }

std::string decode_entities(std::string_view text) {
    static constexpr std::pair<std::string_view, char> kNamed[] = {
        {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}, {"nbsp", ' '},
    };
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out.push_back(text[i]);
            continue;
        }
        const auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        const auto name = text.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (name.size() > 1 && name[0] == '#') {
            unsigned long code = 0;
            bool ok = true;
            const bool hex = name[1] == 'x' || name[1] == 'X';
            for (std::size_t k = hex ? 2 : 1; k < name.size() && ok; ++k) {
                const char c = fold_char(name[k]);
                if (c >= '0' && c <= '9') code = code * (hex ? 16 : 10) + static_cast<unsigned long>(c - '0');
                else if (hex && c >= 'a' && c <= 'f') code = code * 16 + static_cast<unsigned long>(c - 'a' + 10);
                else ok = false;
                if (code > 0x10FFFF) ok = false;
            }
            if (ok && code > 0 && code < 0x80) {
                out.push_back(static_cast<char>(code));
                decoded = true;
            }
        } else {
            for (const auto& [entity, ch] : kNamed) {
                if (name == entity) {
                    out.push_back(ch);
                    decoded = true;
                    break;
                }
            }
        }
        if (decoded) {
            i = semi;
        } else {
            out.push_back('&');
        }
    }
    return out;
}

void TagPattern::validate() const {
    if (tag_name.empty() || !is_alpha(tag_name.front()) ||
        !std::all_of(tag_name.begin(), tag_name.end(), is_alnum)) {
        throw ConfigError("tag pattern name must be ASCII letters: '" + tag_name + "'");
    }
}

std::vector<std::string> extract_tag_content(std::string_view html, const TagPattern& pattern) {
    pattern.validate();
    const std::string name = fold_case(pattern.tag_name);
    const auto tags = scan_tags(html);
    std::vector<std::string> out;
    for (std::size_t t = 0; t < tags.size(); ++t) {
        const auto& tag = tags[t];
        if (tag.closing || tag.name != name) continue;
        if (pattern.attribute_filter) {
            const auto* value = tag.attribute(fold_case(pattern.attribute_filter->first));
            if (value == nullptr || !equals_folded(trim(*value), trim(pattern.attribute_filter->second))) continue;
        }
        if (const auto* content = tag.attribute("content")) {
            out.push_back(*content);
            continue;
        }
        if (tag.self_closing) {
            out.emplace_back();
            continue;
        }
        std::string text;
        std::size_t cursor = tag.end;
        for (std::size_t u = t + 1; u < tags.size(); ++u) {
            const auto& inner = tags[u];
            text.append(html.substr(cursor, inner.begin - cursor));
            cursor = inner.end;
            if (inner.name == name) break;
            if (u + 1 == tags.size()) {
                cursor = html.size();
                text.append(html.substr(inner.end));
            }
        }
        if (t + 1 == tags.size()) text.append(html.substr(tag.end));
        out.push_back(std::string(trim(decode_entities(text))));
    }
    return out;
}

}  // namespace spamsift
