#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spamsift/record.hpp"

namespace spamsift {

/// Ordered collection of records sharing the fixed eight-attribute schema.
struct Dataset {
    std::vector<SiteRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    std::size_t count(Label label) const;

    /// Records at the given positions, in the order given.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Fixed CSV header line (without newline).
std::string_view csv_header();

void write_csv(const Dataset& dataset, std::ostream& out);
/// Throws ParseError (with the 1-based line) on a bad header, wrong
/// column count or unknown level/label name.
Dataset read_csv(std::istream& in);

void save_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

/// Drops unlabeled records.
Dataset labeled_only(const Dataset& dataset);

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    /// Keep the class ratio in both parts.
    bool stratify = false;

    void validate() const;
};

/// |train| = round(train_fraction * N). Both parts keep the input order.
std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, const SplitSpec& spec);

/// Assignment of record index -> fold; fold sizes differ by at most one.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

/// Throws ConfigError when k < 2 or k > N.
FoldPlan k_fold(std::size_t n, std::size_t k, std::uint64_t seed);
inline FoldPlan k_fold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    return k_fold(dataset.size(), k, seed);
}

// ---------------------------------------------------------------------------
// Synthetic corpora

/// A planted cell: records matching `conditions` (and no earlier rule) get
/// spam with probability `p_spam`.
struct GeneratorRule {
    std::map<Attribute, int> conditions;
    double p_spam = 0.0;
    /// Fraction of n assigned to this rule; `count`, when set, overrides it.
    double weight = 0.0;
    std::optional<std::size_t> count;
};

struct GeneratorSpec {
    std::size_t n = 0;
    std::size_t n_spam = 0;
    std::vector<GeneratorRule> rules;
    /// Per-attribute level distribution for free attributes; uniform when absent.
    std::map<Attribute, std::vector<double>> marginals;
    std::uint64_t seed = 0;

    /// Throws ConfigError on an infeasible or malformed spec.
    void validate() const;
    std::size_t rule_size(std::size_t rule) const;
};

/// Rules are matched first-wins: a record generated for rule r never
/// matches a rule listed before r, and background records match none.
/// Each rule cell draws its spam labels binomially; the background takes
/// the remaining spam so the total is exactly n_spam, spread uniformly so
/// background attributes stay independent of the label.
Dataset generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed);
inline Dataset generate_synthetic(const GeneratorSpec& spec) { return generate_synthetic(spec, spec.seed); }

/// Index of the first rule the record satisfies, or nullopt.
std::optional<std::size_t> matching_rule(const GeneratorSpec& spec, const SiteRecord& record);

GeneratorSpec parse_generator_spec(std::string_view json_text);
GeneratorSpec load_generator_spec(const std::filesystem::path& path);

}  // namespace spamsift
