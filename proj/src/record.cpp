#include "spamsift/record.hpp"

#include "spamsift/errors.hpp"

namespace spamsift {

namespace {

constexpr std::array<std::string_view, kOrdinalLevelCount> kLevelNames = {"very-min", "min", "mid", "max",
                                                                          "very-max"};

constexpr std::array<AttributeInfo, kAttributeCount> kSchema = {{
    {Attribute::black_list, "black_list", AttributeKind::nominal, 2},
    {Attribute::feature_of_url, "feature_of_url", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::meta_tag, "meta_tag", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::key_word_special, "key_word_special", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::key_word_public, "key_word_public", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::count_of_internal_link, "count_of_internal_link", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::count_external_link, "count_external_link", AttributeKind::ordinal, kOrdinalLevelCount},
    {Attribute::count_of_post, "count_of_post", AttributeKind::ordinal, kOrdinalLevelCount},
}};

}  // namespace

std::string_view level_name(OrdinalLevel level) { return kLevelNames.at(static_cast<std::size_t>(level)); }

std::optional<OrdinalLevel> parse_level(std::string_view text) {
    for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
        if (kLevelNames[i] == text) return static_cast<OrdinalLevel>(i);
    }
    return std::nullopt;
}

std::string_view label_name(Label label) {
    switch (label) {
        case Label::non_spam:
            return "non-spam";
        case Label::spam:
            return "spam";
        case Label::unlabeled:
            return "unlabeled";
    }
    return "unlabeled";
}

std::optional<Label> parse_label(std::string_view text) {
    if (text == "spam") return Label::spam;
    if (text == "non-spam" || text == "nonspam") return Label::non_spam;
    if (text == "unlabeled" || text == "unknown") return Label::unlabeled;
    return std::nullopt;
}

const std::array<AttributeInfo, kAttributeCount>& attribute_schema() { return kSchema; }

const AttributeInfo& attribute_info(Attribute a) { return kSchema.at(static_cast<std::size_t>(a)); }

std::optional<Attribute> parse_attribute(std::string_view name) {
    for (const auto& info : kSchema) {
        if (info.name == name) return info.id;
    }
    return std::nullopt;
}

std::string_view category_name(Attribute a, int code) {
    if (a == Attribute::black_list) return code == 1 ? "yes" : "no";
    return level_name(static_cast<OrdinalLevel>(code));
}

std::optional<int> parse_category(Attribute a, std::string_view text) {
    if (a == Attribute::black_list) {
        if (text == "yes") return 1;
        if (text == "no") return 0;
        return std::nullopt;
    }
    if (auto level = parse_level(text)) return static_cast<int>(*level);
    return std::nullopt;
}

int SiteRecord::category(Attribute a) const {
    switch (a) {
        case Attribute::black_list:
            return black_list ? 1 : 0;
        case Attribute::feature_of_url:
            return static_cast<int>(feature_of_url);
        case Attribute::meta_tag:
            return static_cast<int>(meta_tag);
        case Attribute::key_word_special:
            return static_cast<int>(key_word_special);
        case Attribute::key_word_public:
            return static_cast<int>(key_word_public);
        case Attribute::count_of_internal_link:
            return static_cast<int>(count_of_internal_link);
        case Attribute::count_external_link:
            return static_cast<int>(count_external_link);
        case Attribute::count_of_post:
            return static_cast<int>(count_of_post);
    }
    throw SchemaError("unknown attribute");
}

void SiteRecord::set_category(Attribute a, int code) {
    if (code < 0 || code >= attribute_info(a).level_count) {
        throw SchemaError("category " + std::to_string(code) + " out of range for " +
                          std::string(attribute_info(a).name));
    }
    const auto level = static_cast<OrdinalLevel>(code);
    switch (a) {
        case Attribute::black_list:
            black_list = code == 1;
            return;
        case Attribute::feature_of_url:
            feature_of_url = level;
            return;
        case Attribute::meta_tag:
            meta_tag = level;
            return;
        case Attribute::key_word_special:
            key_word_special = level;
            return;
        case Attribute::key_word_public:
            key_word_public = level;
            return;
        case Attribute::count_of_internal_link:
            count_of_internal_link = level;
            return;
        case Attribute::count_external_link:
            count_external_link = level;
            return;
        case Attribute::count_of_post:
            count_of_post = level;
            return;
    }
}

}  // namespace spamsift
