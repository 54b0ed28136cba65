#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spamsift {

/// ASCII-only lower-casing; bytes >= 0x80 pass through untouched.
constexpr char fold_char(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string fold_case(std::string_view text);

/// Prefix function: entry i is the length of the longest proper prefix of
/// pattern[0..=i] that is also a suffix of it. Throws InvalidPatternError
/// on an empty pattern. Comparison is case-sensitive; callers fold first.
std::vector<std::size_t> build_failure_table(std::string_view pattern);

/// Case-folded keyword with its precomputed failure table. Immutable.
class KmpPattern {
public:
    explicit KmpPattern(std::string_view text);

    const std::string& text() const noexcept { return text_; }
    const std::vector<std::size_t>& failure() const noexcept { return failure_; }
    std::size_t size() const noexcept { return text_.size(); }

    friend bool operator==(const KmpPattern& a, const KmpPattern& b) { return a.text_ == b.text_; }

private:
    std::string text_;
    std::vector<std::size_t> failure_;
};

/// Character comparisons performed by a search. Bounded by 2 * |text|.
struct SearchStats {
    std::size_t comparisons = 0;
};

/// All match start offsets, strictly increasing, overlaps included.
/// The text is folded on the fly, so it need not be pre-folded.
std::vector<std::size_t> kmp_search(std::string_view text, const KmpPattern& pattern,
                                    SearchStats* stats = nullptr);

/// First match offset, or nullopt. Stops scanning at the first hit.
std::optional<std::size_t> kmp_find_first(std::string_view text, const KmpPattern& pattern,
                                          SearchStats* stats = nullptr);

struct MatchSummary {
    bool matched = false;
    std::size_t matched_count = 0;  // distinct patterns seen at least once
};

MatchSummary contains_any(std::string_view text, const std::vector<KmpPattern>& patterns);

/// Special and public keyword lists with their per-pattern scores.
class KeywordSet {
public:
    static constexpr int kDefaultSpecialScore = 10;
    static constexpr int kDefaultPublicScore = 5;

    /// Throws ConfigError if a list is empty, holds duplicates after
    /// case-folding, or a score is not positive.
    KeywordSet(std::vector<std::string> special, std::vector<std::string> public_words,
               int special_score = kDefaultSpecialScore, int public_score = kDefaultPublicScore);

    const std::vector<KmpPattern>& special() const noexcept { return special_; }
    const std::vector<KmpPattern>& public_words() const noexcept { return public_; }
    int special_score() const noexcept { return special_score_; }
    int public_score() const noexcept { return public_score_; }

private:
    std::vector<KmpPattern> special_;
    std::vector<KmpPattern> public_;
    int special_score_;
    int public_score_;
};

struct KeywordScore {
    std::size_t special_matched = 0;
    std::size_t public_matched = 0;
    long special_points = 0;
    long public_points = 0;

    long total() const noexcept { return special_points + public_points; }
};

/// Each distinct keyword scores once no matter how often it occurs.
KeywordScore score_breakdown(std::string_view text, const KeywordSet& keywords);

long score_keywords(std::string_view text, const KeywordSet& keywords);

/// One keyword per line; blank lines and '#' comments are skipped.
std::vector<std::string> load_keyword_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Tag scanning

struct TagAttribute {
    std::string name;   // lower-cased
    std::string value;  // entities decoded
};

/// One start or end tag found by scan_tags.
struct HtmlTag {
    std::string name;  // lower-cased, without '/'
    std::vector<TagAttribute> attributes;
    bool closing = false;
    bool self_closing = false;
    std::size_t begin = 0;  // offset of '<'
    std::size_t end = 0;    // one past '>' (or end of input when unterminated)

    const std::string* attribute(std::string_view attr_name) const;
};

/// Best-effort linear tag scan. Comments, doctype and processing
/// instructions are skipped; script/style bodies are not scanned for tags.
/// Never throws on malformed markup.
std::vector<HtmlTag> scan_tags(std::string_view html);

/// Decodes the handful of named entities that matter for keyword text plus
/// numeric references in the ASCII range.
std::string decode_entities(std::string_view text);

struct TagPattern {
    std::string tag_name;
    std::optional<std::pair<std::string, std::string>> attribute_filter;  // exact, case-insensitive

    /// Throws ConfigError unless tag_name is non-empty ASCII letters/digits
    /// starting with a letter (h1..h6 need the digits).
    void validate() const;
};

/// Payload of every element matching the pattern, in document order: the
/// `content` attribute when present, otherwise the text up to the matching
/// close tag (or the next tag of the same name when unclosed).
std::vector<std::string> extract_tag_content(std::string_view html, const TagPattern& pattern);

}  // namespace spamsift
