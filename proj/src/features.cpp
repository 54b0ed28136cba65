#include "spamsift/features.hpp"

#include <algorithm>
#include <set>

#include "spamsift/errors.hpp"

namespace spamsift {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

// Tags that do not break a word when stripped.
const std::set<std::string, std::less<>>& inline_tags() {
    static const std::set<std::string, std::less<>> tags = {
        "a",    "abbr", "b",    "bdi",  "bdo",  "big",  "cite",  "code", "data", "dfn",    "em",
        "font", "i",    "kbd",  "mark", "q",    "s",    "samp",  "small", "span", "strike", "strong",
        "sub",  "sup",  "time", "tt",   "u",    "var",  "label", "wbr"};
    return tags;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (const char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(fold_char(c));
    }
    return out;
}

bool contains_folded(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    return !kmp_search(haystack, KmpPattern(needle)).empty();
}

std::optional<std::string> link_host(std::string_view href) {
    // Some(host) for http(s), Some("") for relative, nullopt for other schemes.
    while (!href.empty() && is_space(href.front())) href.remove_prefix(1);
    while (!href.empty() && is_space(href.back())) href.remove_suffix(1);
    if (href.substr(0, 2) == "//") {
        try {
            return Url::parse("http:" + std::string(href)).host;
        } catch (const InvalidUrlError&) {
            return std::nullopt;
        }
    }
    const auto colon = href.find(':');
    const auto first_delim = href.find_first_of("/?#");
    const bool has_scheme = colon != std::string_view::npos && colon > 0 &&
                            (first_delim == std::string_view::npos || colon < first_delim) &&
                            std::all_of(href.begin(), href.begin() + static_cast<std::ptrdiff_t>(colon), [](char c) {
                                return is_ident_char(c) || c == '+' || c == '.';
                            });
    if (!has_scheme) return std::string();
    const auto scheme = fold_case(href.substr(0, colon));
    if (scheme != "http" && scheme != "https") return std::nullopt;
    try {
        return Url::parse(href).host;
    } catch (const InvalidUrlError&) {
        return std::nullopt;
    }
}

}  // namespace

void Thresholds::validate() const {
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] <= cuts[i - 1]) throw ConfigError("thresholds must be strictly ascending");
    }
}

OrdinalLevel discretize(long value, const Thresholds& thresholds) {
    thresholds.validate();
    int level = 0;
    while (level < 4 && value >= thresholds.cuts[static_cast<std::size_t>(level)]) ++level;
    return static_cast<OrdinalLevel>(level);
}

PostMarker PostMarker::parse(std::string_view selector) {
    const std::string original(selector);
    PostMarker marker;
    std::size_t pos = 0;
    while (pos < selector.size() && is_ident_char(selector[pos])) ++pos;
    if (pos > 0) marker.tag = fold_case(selector.substr(0, pos));
    selector.remove_prefix(pos);
    if (!selector.empty()) {
        if (selector.front() != '[' || selector.back() != ']') throw ConfigError("bad post marker '" + original + "'");
        const auto body = selector.substr(1, selector.size() - 2);
        auto op = body.find("*=");
        std::size_t op_len = 2;
        if (op == std::string_view::npos) {
            op = body.find('=');
            op_len = 1;
            marker.substring = false;
        }
        if (op == std::string_view::npos || op == 0) throw ConfigError("bad post marker '" + original + "'");
        const auto name = body.substr(0, op);
        if (!std::all_of(name.begin(), name.end(), is_ident_char)) {
            throw ConfigError("bad post marker '" + original + "'");
        }
        auto value = body.substr(op + op_len);
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (value.empty()) throw ConfigError("bad post marker '" + original + "'");
        marker.attribute = fold_case(name);
        marker.value = fold_case(value);
    }
    if (!marker.tag && !marker.attribute) throw ConfigError("bad post marker '" + original + "'");
    return marker;
}

std::string PostMarker::to_string() const {
    std::string out = tag.value_or("");
    if (attribute) out += "[" + *attribute + (substring ? "*=" : "=") + value + "]";
    return out;
}

bool PostMarker::matches(const HtmlTag& html_tag) const {
    if (html_tag.closing) return false;
    if (tag && html_tag.name != *tag) return false;
    if (attribute) {
        const auto* v = html_tag.attribute(*attribute);
        if (v == nullptr) return false;
        const auto folded = fold_case(*v);
        return substring ? contains_folded(folded, value) : folded == value;
    }
    return true;
}

ExtractionConfig ExtractionConfig::defaults() {
    ExtractionConfig config;
    const Thresholds keyword{{1, 10, 20, 40}};
    const Thresholds links{{5, 15, 40, 100}};
    const Thresholds posts{{1, 5, 15, 40}};
    config.threshold(Attribute::black_list) = keyword;
    config.threshold(Attribute::feature_of_url) = keyword;
    config.threshold(Attribute::meta_tag) = keyword;
    config.threshold(Attribute::key_word_special) = keyword;
    config.threshold(Attribute::key_word_public) = keyword;
    config.threshold(Attribute::count_of_internal_link) = links;
    config.threshold(Attribute::count_external_link) = links;
    config.threshold(Attribute::count_of_post) = posts;
    config.post_markers = {PostMarker::parse("article"), PostMarker::parse("[class*=post]"),
                           PostMarker::parse("[id*=post]")};
    config.meta_names = {"keywords", "description"};
    return config;
}

void ExtractionConfig::validate() const {
    for (const auto& t : thresholds) t.validate();
}

long score_url(std::string_view url, const KeywordSet& keywords) {
    const auto parsed = Url::parse(url);
    return score_keywords(parsed.host + parsed.path, keywords);
}

long score_meta(std::string_view html, const KeywordSet& keywords, const std::vector<std::string>& meta_names) {
    std::string text;
    for (const auto& name : meta_names) {
        for (const auto& content : extract_tag_content(html, TagPattern{"meta", std::pair{std::string("name"), name}})) {
            if (!text.empty()) text.push_back(' ');
            text += content;
        }
    }
    return score_keywords(text, keywords);
}

std::string extract_body_text(std::string_view html) {
    const auto tags = scan_tags(html);
    std::size_t first = 0;
    std::size_t begin = 0;
    std::size_t end = html.size();
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (!tags[i].closing && tags[i].name == "body") {
            first = i + 1;
            begin = tags[i].end;
            for (std::size_t k = i + 1; k < tags.size(); ++k) {
                if (tags[k].closing && tags[k].name == "body") {
                    end = tags[k].begin;
                    break;
                }
            }
            break;
        }
    }

    std::string raw;
    std::size_t cursor = begin;
    bool skipping = false;
    for (std::size_t i = first; i < tags.size() && tags[i].begin < end; ++i) {
        const auto& tag = tags[i];
        if (!skipping && tag.begin > cursor) raw.append(html.substr(cursor, tag.begin - cursor));
        if (!inline_tags().contains(tag.name)) raw.push_back(' ');
        cursor = tag.end;
        if (tag.name == "script" || tag.name == "style") skipping = !tag.closing && !tag.self_closing;
    }
    if (!skipping && cursor < end) raw.append(html.substr(cursor, end - cursor));
    return collapse_whitespace(decode_entities(raw));
}

LinkCounts count_links(std::string_view html, std::string_view base_url) {
    const auto base = registrable_domain(Url::parse(base_url).host);
    LinkCounts counts;
    for (const auto& tag : scan_tags(html)) {
        if (tag.closing || tag.name != "a") continue;
        ++counts.total_anchors;
        const auto* href = tag.attribute("href");
        if (href == nullptr) continue;
        const auto host = link_host(*href);
        if (!host) continue;
        if (host->empty() || registrable_domain(*host) == base) {
            ++counts.internal;
        } else {
            ++counts.external;
        }
    }
    return counts;
}

long count_posts(std::string_view html, const std::vector<PostMarker>& markers) {
    long count = 0;
    for (const auto& tag : scan_tags(html)) {
        if (std::any_of(markers.begin(), markers.end(), [&](const PostMarker& m) { return m.matches(tag); })) ++count;
    }
    return count;
}

RawFeatures extract_raw(const PageDocument& page, const Blacklist& blacklist, const KeywordSet& keywords,
                        const ExtractionConfig& config) {
    RawFeatures raw;
    raw.blacklisted = check_blacklist(page.url, blacklist);
    raw.url_score = score_url(page.url, keywords);
    raw.meta_score = score_meta(page.html, keywords, config.meta_names);
    const auto body = score_breakdown(extract_body_text(page.html), keywords);
    raw.key_special_score = body.special_points;
    raw.key_public_score = body.public_points;
    const auto links = count_links(page.html, page.url);
    raw.internal_links = links.internal;
    raw.external_links = links.external;
    raw.post_count = count_posts(page.html, config.post_markers);
    return raw;
}

SiteRecord to_record(std::string url, const RawFeatures& raw, const ExtractionConfig& config) {
    SiteRecord record;
    record.url = std::move(url);
    record.black_list = raw.blacklisted;
    record.feature_of_url = discretize(raw.url_score, config.threshold(Attribute::feature_of_url));
    record.meta_tag = discretize(raw.meta_score, config.threshold(Attribute::meta_tag));
    record.key_word_special = discretize(raw.key_special_score, config.threshold(Attribute::key_word_special));
    record.key_word_public = discretize(raw.key_public_score, config.threshold(Attribute::key_word_public));
    record.count_of_internal_link =
        discretize(raw.internal_links, config.threshold(Attribute::count_of_internal_link));
    record.count_external_link = discretize(raw.external_links, config.threshold(Attribute::count_external_link));
    record.count_of_post = discretize(raw.post_count, config.threshold(Attribute::count_of_post));
    record.label = Label::unlabeled;
    return record;
}

SiteRecord extract_record(const PageDocument& page, const Blacklist& blacklist, const KeywordSet& keywords,
                          const ExtractionConfig& config) {
    return to_record(page.url, extract_raw(page, blacklist, keywords, config), config);
}

}  // namespace spamsift
