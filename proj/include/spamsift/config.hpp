#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "spamsift/chaid.hpp"
#include "spamsift/features.hpp"
#include "spamsift/pattern_match.hpp"
#include "spamsift/url.hpp"

namespace spamsift {

/// Everything a pipeline run needs, read from one JSON document:
///
///     {
///       "blacklist": "blacklist.txt",
///       "special_keywords": "special.txt",
///       "public_keywords": "public.txt",
///       "scores": {"special": 10, "public": 5},
///       "thresholds": {"key_word_special": [1, 10, 20, 40], ...},
///       "post_markers": ["article", "[class*=post]"],
///       "meta_names": ["keywords", "description"],
///       "chaid": {"alpha_merge": 0.05, "alpha_split": 0.05, ...},
///       "seed": 42
///     }
///
/// Relative file paths are resolved against the config file's directory.
struct AppConfig {
    std::optional<std::filesystem::path> blacklist_path;
    std::optional<std::filesystem::path> special_keywords_path;
    std::optional<std::filesystem::path> public_keywords_path;
    int special_score = KeywordSet::kDefaultSpecialScore;
    int public_score = KeywordSet::kDefaultPublicScore;
    ExtractionConfig extraction = ExtractionConfig::defaults();
    ChaidConfig chaid;
    std::uint64_t seed = 42;

    /// Throws ConfigError on malformed JSON, bad values or missing files.
    static AppConfig parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
    static AppConfig load(const std::filesystem::path& path);

    /// Throws ConfigError when either keyword list is not configured.
    KeywordSet keywords() const;
    /// Empty when no blacklist is configured.
    Blacklist blacklist() const;
};

}  // namespace spamsift
