#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spamsift/dataset.hpp"
#include "spamsift/record.hpp"
#include "spamsift/stats.hpp"

namespace spamsift {

enum class Statistic { pearson, likelihood_ratio };

std::string_view statistic_name(Statistic s);
std::optional<Statistic> parse_statistic(std::string_view text);

struct ChaidConfig {
    double alpha_merge = 0.05;
    double alpha_split = 0.05;
    Statistic statistic = Statistic::pearson;
    /// Deepest node depth; the root has depth 0.
    int max_depth = 3;
    std::int64_t min_parent_size = 30;
    std::int64_t min_child_size = 10;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    friend bool operator==(const ChaidConfig&, const ChaidConfig&) = default;
};

/// Class counts per category code of one predictor at one node.
/// Index [code][class] with class 0 = non-spam, 1 = spam.
using CategoryCounts = std::vector<std::array<std::int64_t, 2>>;

/// Throws ValidationError on unlabeled records.
CategoryCounts tally(std::span<const SiteRecord> records, Attribute predictor);

/// Partition of the observed category codes into disjoint groups. Codes
/// inside a group are ascending and groups are ordered by their first code.
struct CategoryGrouping {
    std::vector<std::vector<int>> groups;

    std::size_t size() const noexcept { return groups.size(); }
    /// Group holding `code`, or nullopt when the code was not observed.
    std::optional<std::size_t> group_of(int code) const;

    friend bool operator==(const CategoryGrouping&, const CategoryGrouping&) = default;
};

/// One group per observed category.
CategoryGrouping singleton_grouping(const CategoryCounts& counts);

/// Groups-by-class table for a grouping.
ContingencyTable grouped_table(const CategoryCounts& counts, const CategoryGrouping& grouping);

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    double log_p_value = 0.0;
};

/// Independence test on a table with the configured statistic. Degenerate
/// tables give p = 1.
TestResult independence_test(const ContingencyTable& table, Statistic statistic);

/// Kass merging. Repeatedly takes the pair of groups (adjacent ones only
/// for ordinal predictors) whose 2-row sub-table has the largest p-value
/// and merges them while that p exceeds alpha_merge. Ties go to the pair
/// that comes first in group order. Ordinal adjacency is among observed
/// categories.
CategoryGrouping merge_categories(const CategoryCounts& counts, AttributeKind kind, const ChaidConfig& config);
CategoryGrouping merge_categories(std::span<const SiteRecord> records, Attribute predictor, const ChaidConfig& config);

/// Continues merging from an existing grouping.
CategoryGrouping merge_groups(const CategoryCounts& counts, AttributeKind kind, CategoryGrouping grouping,
                              const ChaidConfig& config);

struct AdjustedP {
    TestResult test;
    double multiplier = 1.0;
    double p_adjusted = 1.0;
    /// ln(p_adjusted); stays finite when p_adjusted underflows.
    double log_p_adjusted = 0.0;
};

/// min(1, B * p_raw), with B the Bonferroni multiplier for reducing the
/// observed categories to this grouping.
AdjustedP adjusted_p(const CategoryCounts& counts, AttributeKind kind, const CategoryGrouping& grouping,
                     const ChaidConfig& config);
AdjustedP adjusted_p(std::span<const SiteRecord> records, Attribute predictor, const CategoryGrouping& grouping,
                     const ChaidConfig& config);

struct SplitChoice {
    Attribute predictor;
    CategoryGrouping grouping;
    AdjustedP score;
};

/// Best merged predictor by adjusted p (schema order breaks ties). Returns
/// nullopt unless that predictor has >= 2 groups, p_adjusted < alpha_split
/// and every child keeps at least min_child_size records.
std::optional<SplitChoice> select_split(std::span<const SiteRecord> records, std::span<const Attribute> predictors,
                                        const ChaidConfig& config);

/// All eight schema attributes in schema order.
std::span<const Attribute> all_predictors();

enum class StopReason { pure, max_depth, too_small, no_significant_split };

std::string_view stop_reason_name(StopReason reason);
std::optional<StopReason> parse_stop_reason(std::string_view text);

struct NodeSplit {
    Attribute predictor;
    CategoryGrouping grouping;
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    double multiplier = 1.0;
    double adjusted_p = 1.0;

    friend bool operator==(const NodeSplit&, const NodeSplit&) = default;
};

struct ChaidNode {
    std::size_t id = 0;
    int depth = 0;
    std::optional<std::size_t> parent;
    /// Index of the parent's group this node holds.
    std::size_t branch = 0;
    std::array<std::int64_t, 2> class_counts{};  // non-spam, spam
    std::optional<NodeSplit> split;
    /// One per group of split->grouping, in group order.
    std::vector<std::size_t> children;
    std::optional<StopReason> stop_reason;

    std::int64_t total() const noexcept { return class_counts[0] + class_counts[1]; }
    std::int64_t spam() const noexcept { return class_counts[1]; }
    double spam_proportion() const noexcept {
        return total() == 0 ? 0.0 : static_cast<double>(spam()) / static_cast<double>(total());
    }
    bool is_leaf() const noexcept { return !split.has_value(); }

    friend bool operator==(const ChaidNode&, const ChaidNode&) = default;
};

struct Prediction {
    Label label = Label::non_spam;
    double spam_probability = 0.0;
    std::size_t leaf = 0;
    /// The record hit a category never seen at some split and was sent to
    /// the largest child.
    bool fallback = false;
};

/// A grown tree. Node ids are breadth-first and equal vector positions.
class ChaidTree {
public:
    ChaidTree() = default;
    ChaidTree(ChaidConfig config, std::vector<ChaidNode> nodes);

    const ChaidConfig& config() const noexcept { return config_; }
    const std::vector<ChaidNode>& nodes() const noexcept { return nodes_; }
    const ChaidNode& root() const { return nodes_.at(0); }
    const ChaidNode& node(std::size_t id) const { return nodes_.at(id); }
    std::vector<std::size_t> leaves() const;

    /// Leaf reached by `record`, following split groupings.
    std::size_t route(const SiteRecord& record, bool* fallback = nullptr) const;

    friend bool operator==(const ChaidTree&, const ChaidTree&) = default;

private:
    ChaidConfig config_;
    std::vector<ChaidNode> nodes_;
};

/// Throws ValidationError when a record is unlabeled.
ChaidTree grow_tree(const Dataset& dataset, const ChaidConfig& config);

/// Majority class of the leaf; ties go to non-spam.
Prediction predict(const ChaidTree& tree, const SiteRecord& record);

struct RuleCondition {
    Attribute predictor;
    std::vector<int> categories;
};

struct PatternRule {
    std::vector<RuleCondition> conditions;
    std::int64_t spam_count = 0;
    std::int64_t total_count = 0;
    double spam_proportion = 0.0;
    std::size_t leaf = 0;

    /// e.g. `key_word_special in {max} and key_word_public in {very-max}`
    std::string condition_text() const;
    bool matches(const SiteRecord& record) const;
};

/// One rule per leaf, sorted by spam proportion descending, then leaf id.
std::vector<PatternRule> extract_rules(const ChaidTree& tree);

std::string to_json(const ChaidTree& tree);
/// Throws ModelFormatError on malformed documents or a version mismatch.
ChaidTree from_json(std::string_view text);

void save_model(const ChaidTree& tree, const std::filesystem::path& path);
ChaidTree load_model(const std::filesystem::path& path);

/// Graphviz rendering of the tree.
std::string to_dot(const ChaidTree& tree);

inline constexpr int kModelVersion = 1;

}  // namespace spamsift
