#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spamsift/pattern_match.hpp"
#include "spamsift/record.hpp"
#include "spamsift/url.hpp"

namespace spamsift {

struct PageDocument {
    std::string url;
    std::string html;
    std::string fetched_from;
};

/// Four strictly ascending cut points splitting a count into five levels.
struct Thresholds {
    std::array<long, 4> cuts{};

    /// Throws ConfigError unless the cuts are strictly ascending.
    void validate() const;
};

/// value < t1 -> very-min, < t2 -> min, < t3 -> mid, < t4 -> max, else very-max.
OrdinalLevel discretize(long value, const Thresholds& thresholds);

/// Element selector for counting posts.
///
/// Text form: `tag`, `tag[attr*=value]`, `[attr*=value]` or `tag[attr=value]`;
/// `*=` is a case-insensitive substring match, `=` an exact one.
struct PostMarker {
    std::optional<std::string> tag;
    std::optional<std::string> attribute;
    std::string value;
    bool substring = true;

    /// Throws ConfigError on an unrecognised selector.
    static PostMarker parse(std::string_view selector);
    std::string to_string() const;
    bool matches(const HtmlTag& tag) const;
};

struct ExtractionConfig {
    /// Indexed by Attribute; the black_list slot is unused.
    std::array<Thresholds, kAttributeCount> thresholds;
    std::vector<PostMarker> post_markers;
    /// `name` values of the meta tags whose content is keyword-scored.
    std::vector<std::string> meta_names;

    static ExtractionConfig defaults();
    void validate() const;

    const Thresholds& threshold(Attribute a) const { return thresholds[static_cast<std::size_t>(a)]; }
    Thresholds& threshold(Attribute a) { return thresholds[static_cast<std::size_t>(a)]; }
};

/// The numeric scores behind a SiteRecord, one field per attribute.
struct RawFeatures {
    bool blacklisted = false;
    long url_score = 0;
    long meta_score = 0;
    long key_special_score = 0;
    long key_public_score = 0;
    long internal_links = 0;
    long external_links = 0;
    long post_count = 0;
};

struct LinkCounts {
    long internal = 0;
    long external = 0;
    long total_anchors = 0;
};

/// Keyword score of the case-folded host + path. Throws InvalidUrlError.
long score_url(std::string_view url, const KeywordSet& keywords);

long score_meta(std::string_view html, const KeywordSet& keywords,
                const std::vector<std::string>& meta_names = ExtractionConfig::defaults().meta_names);

/// Visible body text: tags stripped, script/style dropped, entities
/// decoded, whitespace collapsed, ASCII case-folded. Falls back to the
/// whole document when there is no body tag.
std::string extract_body_text(std::string_view html);

/// Relative links count as internal; mailto:, javascript: and other
/// non-http schemes count in neither bucket. Throws InvalidUrlError when
/// the base does not parse.
LinkCounts count_links(std::string_view html, std::string_view base_url);

/// Elements matching at least one marker; an element is counted once.
long count_posts(std::string_view html,
                 const std::vector<PostMarker>& markers = ExtractionConfig::defaults().post_markers);

RawFeatures extract_raw(const PageDocument& page, const Blacklist& blacklist, const KeywordSet& keywords,
                        const ExtractionConfig& config);

SiteRecord to_record(std::string url, const RawFeatures& raw, const ExtractionConfig& config);

/// Label is left unlabeled. Propagates InvalidUrlError; malformed markup
/// never fails.
SiteRecord extract_record(const PageDocument& page, const Blacklist& blacklist, const KeywordSet& keywords,
                          const ExtractionConfig& config);

}  // namespace spamsift
