#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace spamsift {

enum class OrdinalLevel : int { very_min = 0, min, mid, max, very_max };

inline constexpr int kOrdinalLevelCount = 5;

std::string_view level_name(OrdinalLevel level);
std::optional<OrdinalLevel> parse_level(std::string_view text);

enum class Label : int { non_spam = 0, spam = 1, unlabeled = 2 };

std::string_view label_name(Label label);
/// Accepts the canonical names plus the manifest spellings `nonspam` and `unknown`.
std::optional<Label> parse_label(std::string_view text);

/// The eight dataset attributes in schema order. The order is also the
/// tie-break order when two predictors score the same.
enum class Attribute : int {
    black_list = 0,
    feature_of_url,
    meta_tag,
    key_word_special,
    key_word_public,
    count_of_internal_link,
    count_external_link,
    count_of_post,
};

inline constexpr std::size_t kAttributeCount = 8;

enum class AttributeKind { nominal, ordinal };

struct AttributeInfo {
    Attribute id;
    std::string_view name;
    AttributeKind kind;
    int level_count;
};

const std::array<AttributeInfo, kAttributeCount>& attribute_schema();
const AttributeInfo& attribute_info(Attribute a);
std::optional<Attribute> parse_attribute(std::string_view name);

/// Name of category code `code` of attribute `a` ("yes"/"no" or a level name).
std::string_view category_name(Attribute a, int code);
std::optional<int> parse_category(Attribute a, std::string_view text);

/// One website: the eight categorical attributes and its label.
struct SiteRecord {
    std::string url;
    bool black_list = false;
    OrdinalLevel feature_of_url = OrdinalLevel::very_min;
    OrdinalLevel meta_tag = OrdinalLevel::very_min;
    OrdinalLevel key_word_special = OrdinalLevel::very_min;
    OrdinalLevel key_word_public = OrdinalLevel::very_min;
    OrdinalLevel count_of_internal_link = OrdinalLevel::very_min;
    OrdinalLevel count_external_link = OrdinalLevel::very_min;
    OrdinalLevel count_of_post = OrdinalLevel::very_min;
    Label label = Label::unlabeled;

    /// Category code of attribute `a`: 0/1 for black_list (no/yes), the
    /// level index for ordinal attributes.
    int category(Attribute a) const;
    /// Throws SchemaError when `code` is out of range for `a`.
    void set_category(Attribute a, int code);

    friend bool operator==(const SiteRecord&, const SiteRecord&) = default;
};

}  // namespace spamsift
