#include "spamsift/chaid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "chaid_json.hpp"
#include "spamsift/errors.hpp"

namespace spamsift {

std::string_view statistic_name(Statistic s) {
    return s == Statistic::pearson ? "pearson" : "likelihood-ratio";
}

std::optional<Statistic> parse_statistic(std::string_view text) {
    if (text == "pearson") return Statistic::pearson;
    if (text == "likelihood-ratio" || text == "likelihood_ratio") return Statistic::likelihood_ratio;
    return std::nullopt;
}

void ChaidConfig::validate() const {
    if (!(alpha_merge > 0.0 && alpha_merge < 1.0)) throw ConfigError("alpha_merge must lie in (0, 1)");
    if (!(alpha_split > 0.0 && alpha_split < 1.0)) throw ConfigError("alpha_split must lie in (0, 1)");
    if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
    if (min_child_size < 1) throw ConfigError("min_child_size must be at least 1");
    if (min_child_size > min_parent_size) throw ConfigError("min_child_size must not exceed min_parent_size");
}

CategoryCounts tally(std::span<const SiteRecord> records, Attribute predictor) {
    CategoryCounts counts(static_cast<std::size_t>(attribute_info(predictor).level_count), {0, 0});
    for (const auto& r : records) {
        if (r.label == Label::unlabeled) throw ValidationError("unlabeled record " + r.url);
        ++counts[static_cast<std::size_t>(r.category(predictor))][static_cast<std::size_t>(r.label)];
    }
    return counts;
}

std::optional<std::size_t> CategoryGrouping::group_of(int code) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (std::find(groups[g].begin(), groups[g].end(), code) != groups[g].end()) return g;
    }
    return std::nullopt;
}

CategoryGrouping singleton_grouping(const CategoryCounts& counts) {
    CategoryGrouping grouping;
    for (std::size_t code = 0; code < counts.size(); ++code) {
        if (counts[code][0] + counts[code][1] > 0) grouping.groups.push_back({static_cast<int>(code)});
    }
    return grouping;
}

namespace {

std::array<std::int64_t, 2> group_counts(const CategoryCounts& counts, const std::vector<int>& group) {
    std::array<std::int64_t, 2> sum{0, 0};
    for (const int code : group) {
        sum[0] += counts[static_cast<std::size_t>(code)][0];
        sum[1] += counts[static_cast<std::size_t>(code)][1];
    }
    return sum;
}

double pair_log_p(const CategoryCounts& counts, const std::vector<int>& a, const std::vector<int>& b,
                  Statistic statistic) {
    const auto ca = group_counts(counts, a);
    const auto cb = group_counts(counts, b);
    const auto table = ContingencyTable::from_counts({{ca[0], ca[1]}, {cb[0], cb[1]}});
    return independence_test(table, statistic).log_p_value;
}

std::size_t observed_categories(const CategoryGrouping& grouping) {
    std::size_t n = 0;
    for (const auto& g : grouping.groups) n += g.size();
    return n;
}

}  // namespace

ContingencyTable grouped_table(const CategoryCounts& counts, const CategoryGrouping& grouping) {
    std::vector<std::vector<std::int64_t>> rows;
    rows.reserve(grouping.size());
    for (const auto& g : grouping.groups) {
        const auto c = group_counts(counts, g);
        rows.push_back({c[0], c[1]});
    }
    return ContingencyTable::from_counts(rows);
}

TestResult independence_test(const ContingencyTable& table, Statistic statistic) {
    const auto chi = statistic == Statistic::pearson ? pearson_chi_square(table) : likelihood_ratio_stat(table);
    TestResult result;
    if (chi.degenerate) return result;
    result.statistic = chi.statistic;
    result.df = chi.df;
    result.log_p_value = chi_square_log_p_value(chi.statistic, chi.df);
    result.p_value = std::exp(result.log_p_value);
    return result;
}

CategoryGrouping merge_groups(const CategoryCounts& counts, AttributeKind kind, CategoryGrouping grouping,
                              const ChaidConfig& config) {
    const double log_alpha = std::log(config.alpha_merge);
    while (grouping.size() > 1) {
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best = -std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t a = 0; a + 1 < grouping.size(); ++a) {
            const std::size_t b_end = kind == AttributeKind::ordinal ? a + 2 : grouping.size();
            for (std::size_t b = a + 1; b < b_end; ++b) {
                const double lp = pair_log_p(counts, grouping.groups[a], grouping.groups[b], config.statistic);
                if (!found || lp > best) {
                    best = lp;
                    best_a = a;
                    best_b = b;
                    found = true;
                }
            }
        }
        if (!(best > log_alpha)) break;
        auto& target = grouping.groups[best_a];
        target.insert(target.end(), grouping.groups[best_b].begin(), grouping.groups[best_b].end());
        std::sort(target.begin(), target.end());
        grouping.groups.erase(grouping.groups.begin() + static_cast<std::ptrdiff_t>(best_b));
        std::sort(grouping.groups.begin(), grouping.groups.end(),
                  [](const auto& x, const auto& y) { return x.front() < y.front(); });
    }
    return grouping;
}

CategoryGrouping merge_categories(const CategoryCounts& counts, AttributeKind kind, const ChaidConfig& config) {
    return merge_groups(counts, kind, singleton_grouping(counts), config);
}

CategoryGrouping merge_categories(std::span<const SiteRecord> records, Attribute predictor, const ChaidConfig& config) {
    return merge_categories(tally(records, predictor), attribute_info(predictor).kind, config);
}

AdjustedP adjusted_p(const CategoryCounts& counts, AttributeKind kind, const CategoryGrouping& grouping,
                     const ChaidConfig& config) {
    AdjustedP result;
    const auto levels = static_cast<int>(observed_categories(grouping));
    const auto groups = static_cast<int>(grouping.size());
    if (groups < 2) return result;
    result.test = independence_test(grouped_table(counts, grouping), config.statistic);
    result.multiplier = bonferroni_multiplier(levels, groups, kind);
    result.log_p_adjusted = std::min(0.0, std::log(result.multiplier) + result.test.log_p_value);
    result.p_adjusted = std::exp(result.log_p_adjusted);
    return result;
}

AdjustedP adjusted_p(std::span<const SiteRecord> records, Attribute predictor, const CategoryGrouping& grouping,
                     const ChaidConfig& config) {
    return adjusted_p(tally(records, predictor), attribute_info(predictor).kind, grouping, config);
}

std::optional<SplitChoice> select_split(std::span<const SiteRecord> records, std::span<const Attribute> predictors,
                                        const ChaidConfig& config) {
    std::optional<SplitChoice> best;
    std::optional<CategoryCounts> best_counts;
    for (const auto predictor : predictors) {
        const auto counts = tally(records, predictor);
        const auto kind = attribute_info(predictor).kind;
        auto grouping = singleton_grouping(counts);
        if (grouping.size() < 2) continue;
        grouping = merge_groups(counts, kind, std::move(grouping), config);
        auto score = adjusted_p(counts, kind, grouping, config);
        if (!best || score.log_p_adjusted < best->score.log_p_adjusted) {
            best = SplitChoice{predictor, std::move(grouping), score};
            best_counts = counts;
        }
    }
    if (!best || best->grouping.size() < 2) return std::nullopt;
    if (!(best->score.log_p_adjusted < std::log(config.alpha_split))) return std::nullopt;
    for (const auto& group : best->grouping.groups) {
        const auto c = group_counts(*best_counts, group);
        if (c[0] + c[1] < config.min_child_size) return std::nullopt;
    }
    return best;
}

std::span<const Attribute> all_predictors() {
    static constexpr std::array<Attribute, kAttributeCount> kAll = {
        Attribute::black_list,       Attribute::feature_of_url,        Attribute::meta_tag,
        Attribute::key_word_special, Attribute::key_word_public,       Attribute::count_of_internal_link,
        Attribute::count_external_link, Attribute::count_of_post,
    };
    return kAll;
}

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::pure:
            return "pure";
        case StopReason::max_depth:
            return "max_depth";
        case StopReason::too_small:
            return "too_small";
        case StopReason::no_significant_split:
            return "no_significant_split";
    }
    return "no_significant_split";
}

std::optional<StopReason> parse_stop_reason(std::string_view text) {
    for (const auto r : {StopReason::pure, StopReason::max_depth, StopReason::too_small,
                         StopReason::no_significant_split}) {
        if (stop_reason_name(r) == text) return r;
    }
    return std::nullopt;
}

ChaidTree::ChaidTree(ChaidConfig config, std::vector<ChaidNode> nodes)
    : config_(std::move(config)), nodes_(std::move(nodes)) {}

std::vector<std::size_t> ChaidTree::leaves() const {
    std::vector<std::size_t> out;
    for (const auto& n : nodes_) {
        if (n.is_leaf()) out.push_back(n.id);
    }
    return out;
}

std::size_t ChaidTree::route(const SiteRecord& record, bool* fallback) const {
    if (fallback != nullptr) *fallback = false;
    std::size_t id = 0;
    while (!nodes_.at(id).is_leaf()) {
        const auto& n = nodes_[id];
        const auto group = n.split->grouping.group_of(record.category(n.split->predictor));
        if (group) {
            id = n.children.at(*group);
            continue;
        }
        if (fallback != nullptr) *fallback = true;
        std::size_t largest = n.children.front();
        for (const auto c : n.children) {
            if (nodes_[c].total() > nodes_[largest].total()) largest = c;
        }
        id = largest;
    }
    return id;
}

ChaidTree grow_tree(const Dataset& dataset, const ChaidConfig& config) {
    config.validate();
    for (const auto& r : dataset.records) {
        if (r.label == Label::unlabeled) throw ValidationError("grow_tree needs labeled records; strip " + r.url);
    }

    struct Pending {
        std::size_t id;
        std::vector<SiteRecord> records;
    };
    std::vector<ChaidNode> nodes;
    std::deque<Pending> queue;

    const auto make_node = [&](std::vector<SiteRecord> records, int depth, std::optional<std::size_t> parent,
                               std::size_t branch) {
        ChaidNode node;
        node.id = nodes.size();
        node.depth = depth;
        node.parent = parent;
        node.branch = branch;
        for (const auto& r : records) ++node.class_counts[static_cast<std::size_t>(r.label)];
        nodes.push_back(node);
        queue.push_back({node.id, std::move(records)});
    };

    make_node(dataset.records, 0, std::nullopt, 0);
    while (!queue.empty()) {
        auto pending = std::move(queue.front());
        queue.pop_front();
        auto& node = nodes[pending.id];
        if (node.class_counts[0] == 0 || node.class_counts[1] == 0) {
            node.stop_reason = StopReason::pure;
            continue;
        }
        if (node.depth >= config.max_depth) {
            node.stop_reason = StopReason::max_depth;
            continue;
        }
        if (node.total() < config.min_parent_size) {
            node.stop_reason = StopReason::too_small;
            continue;
        }
        auto choice = select_split(pending.records, all_predictors(), config);
        if (!choice) {
            node.stop_reason = StopReason::no_significant_split;
            continue;
        }
        std::vector<std::vector<SiteRecord>> parts(choice->grouping.size());
        for (auto& r : pending.records) {
            parts[*choice->grouping.group_of(r.category(choice->predictor))].push_back(std::move(r));
        }
        node.split = NodeSplit{choice->predictor,        std::move(choice->grouping), choice->score.test.statistic,
                               choice->score.test.df,    choice->score.test.p_value,  choice->score.multiplier,
                               choice->score.p_adjusted};
        const auto depth = node.depth;
        const auto parent_id = node.id;
        for (std::size_t g = 0; g < parts.size(); ++g) {
            // make_node may reallocate `nodes`, so index afresh each time.
            nodes[parent_id].children.push_back(nodes.size());
            make_node(std::move(parts[g]), depth + 1, parent_id, g);
        }
    }
    return ChaidTree(config, std::move(nodes));
}

Prediction predict(const ChaidTree& tree, const SiteRecord& record) {
    Prediction p;
    p.leaf = tree.route(record, &p.fallback);
    const auto& leaf = tree.node(p.leaf);
    p.label = leaf.class_counts[1] > leaf.class_counts[0] ? Label::spam : Label::non_spam;
    p.spam_probability = leaf.spam_proportion();
    return p;
}

std::string PatternRule::condition_text() const {
    if (conditions.empty()) return "(all records)";
    std::string out;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (i > 0) out += " and ";
        out += std::string(attribute_info(conditions[i].predictor).name) + " in {";
        for (std::size_t k = 0; k < conditions[i].categories.size(); ++k) {
            if (k > 0) out += ", ";
            out += category_name(conditions[i].predictor, conditions[i].categories[k]);
        }
        out += "}";
    }
    return out;
}

bool PatternRule::matches(const SiteRecord& record) const {
    return std::all_of(conditions.begin(), conditions.end(), [&](const RuleCondition& c) {
        return std::find(c.categories.begin(), c.categories.end(), record.category(c.predictor)) !=
               c.categories.end();
    });
}

std::vector<PatternRule> extract_rules(const ChaidTree& tree) {
    std::vector<PatternRule> rules;
    for (const auto leaf_id : tree.leaves()) {
        const auto& leaf = tree.node(leaf_id);
        PatternRule rule;
        rule.leaf = leaf_id;
        rule.spam_count = leaf.spam();
        rule.total_count = leaf.total();
        rule.spam_proportion = leaf.spam_proportion();
        for (const ChaidNode* n = &leaf; n->parent; n = &tree.node(*n->parent)) {
            const auto& parent = tree.node(*n->parent);
            rule.conditions.push_back({parent.split->predictor, parent.split->grouping.groups.at(n->branch)});
        }
        std::reverse(rule.conditions.begin(), rule.conditions.end());
        rules.push_back(std::move(rule));
    }
    std::stable_sort(rules.begin(), rules.end(), [](const PatternRule& a, const PatternRule& b) {
        if (a.spam_proportion != b.spam_proportion) return a.spam_proportion > b.spam_proportion;
        return a.leaf < b.leaf;
    });
    return rules;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

nlohmann::json chaid_config_to_json(const ChaidConfig& config) {
    return {
        {"alpha_merge", config.alpha_merge},
        {"alpha_split", config.alpha_split},
        {"statistic", statistic_name(config.statistic)},
        {"max_depth", config.max_depth},
        {"min_parent_size", config.min_parent_size},
        {"min_child_size", config.min_child_size},
    };
}

ChaidConfig chaid_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("chaid config must be a JSON object");
    ChaidConfig config;
    try {
        config.alpha_merge = doc.value("alpha_merge", config.alpha_merge);
        config.alpha_split = doc.value("alpha_split", config.alpha_split);
        if (doc.contains("statistic")) {
            const auto name = doc.at("statistic").get<std::string>();
            const auto s = parse_statistic(name);
            if (!s) throw ConfigError("unknown statistic '" + name + "'");
            config.statistic = *s;
        }
        config.max_depth = doc.value("max_depth", config.max_depth);
        config.min_parent_size = doc.value("min_parent_size", config.min_parent_size);
        config.min_child_size = doc.value("min_child_size", config.min_child_size);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad chaid config: ") + e.what());
    }
    config.validate();
    return config;
}

}  // namespace detail

std::string to_json(const ChaidTree& tree) {
    using nlohmann::json;
    json schema = json::array();
    for (const auto& info : attribute_schema()) {
        json levels = json::array();
        for (int code = 0; code < info.level_count; ++code) levels.push_back(category_name(info.id, code));
        schema.push_back({{"name", info.name},
                          {"kind", info.kind == AttributeKind::ordinal ? "ordinal" : "nominal"},
                          {"levels", levels}});
    }
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        json jn = {{"id", n.id},
                   {"depth", n.depth},
                   {"class_counts", {{"non-spam", n.class_counts[0]}, {"spam", n.class_counts[1]}}}};
        if (n.split) {
            json groups = json::array();
            for (const auto& g : n.split->grouping.groups) {
                json names = json::array();
                for (const int code : g) names.push_back(category_name(n.split->predictor, code));
                groups.push_back(names);
            }
            jn["split"] = {{"predictor", attribute_info(n.split->predictor).name},
                           {"groups", groups},
                           {"statistic", n.split->statistic},
                           {"df", n.split->df},
                           {"p_value", n.split->p_value},
                           {"bonferroni", n.split->multiplier},
                           {"adjusted_p", n.split->adjusted_p}};
            jn["children"] = n.children;
        }
        if (n.stop_reason) jn["stop_reason"] = stop_reason_name(*n.stop_reason);
        nodes.push_back(std::move(jn));
    }
    json doc = {{"version", kModelVersion},
                {"config", detail::chaid_config_to_json(tree.config())},
                {"attribute_schema", schema},
                {"nodes", nodes}};
    return doc.dump(2) + "\n";
}

ChaidTree from_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("model is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || !doc.contains("version")) throw ModelFormatError("model has no version field");
        const auto version = doc.at("version").get<int>();
        if (version != kModelVersion) {
            throw ModelFormatError("unsupported model version " + std::to_string(version) + " (expected " +
                                   std::to_string(kModelVersion) + ")");
        }
        ChaidConfig config;
        try {
            config = detail::chaid_config_from_json(doc.at("config"));
        } catch (const ConfigError& e) {
            throw ModelFormatError(e.what());
        }
        const auto& schema = doc.at("attribute_schema");
        if (!schema.is_array() || schema.size() != kAttributeCount) throw ModelFormatError("attribute schema mismatch");
        for (std::size_t i = 0; i < kAttributeCount; ++i) {
            if (schema[i].at("name").get<std::string>() != attribute_schema()[i].name) {
                throw ModelFormatError("attribute schema mismatch at position " + std::to_string(i));
            }
        }

        const auto& jnodes = doc.at("nodes");
        if (!jnodes.is_array() || jnodes.empty()) throw ModelFormatError("model has no nodes");
        std::vector<ChaidNode> nodes(jnodes.size());
        for (std::size_t i = 0; i < jnodes.size(); ++i) {
            const auto& jn = jnodes[i];
            auto& n = nodes[i];
            n.id = jn.at("id").get<std::size_t>();
            if (n.id != i) throw ModelFormatError("node ids must equal their position");
            n.depth = jn.at("depth").get<int>();
            n.class_counts = {jn.at("class_counts").at("non-spam").get<std::int64_t>(),
                              jn.at("class_counts").at("spam").get<std::int64_t>()};
            if (n.class_counts[0] < 0 || n.class_counts[1] < 0) throw ModelFormatError("negative class count");
            if (jn.contains("stop_reason")) {
                const auto reason = parse_stop_reason(jn.at("stop_reason").get<std::string>());
                if (!reason) throw ModelFormatError("unknown stop reason");
                n.stop_reason = reason;
            }
            if (jn.contains("split")) {
                const auto& js = jn.at("split");
                const auto predictor = parse_attribute(js.at("predictor").get<std::string>());
                if (!predictor) throw ModelFormatError("unknown predictor in node " + std::to_string(i));
                NodeSplit split{*predictor, {}, js.at("statistic").get<double>(), js.at("df").get<int>(),
                                js.at("p_value").get<double>(), js.at("bonferroni").get<double>(),
                                js.at("adjusted_p").get<double>()};
                for (const auto& jg : js.at("groups")) {
                    std::vector<int> group;
                    for (const auto& name : jg) {
                        const auto code = parse_category(*predictor, name.get<std::string>());
                        if (!code) throw ModelFormatError("unknown level in node " + std::to_string(i));
                        group.push_back(*code);
                    }
                    if (group.empty()) throw ModelFormatError("empty group in node " + std::to_string(i));
                    split.grouping.groups.push_back(std::move(group));
                }
                n.split = std::move(split);
                n.children = jn.at("children").get<std::vector<std::size_t>>();
                if (n.children.size() != n.split->grouping.size() || n.children.size() < 2) {
                    throw ModelFormatError("node " + std::to_string(i) + " children do not match its groups");
                }
            } else if (jn.contains("children") && !jn.at("children").empty()) {
                throw ModelFormatError("leaf node " + std::to_string(i) + " has children");
            }
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            std::array<std::int64_t, 2> sum{0, 0};
            for (std::size_t b = 0; b < nodes[i].children.size(); ++b) {
                const auto c = nodes[i].children[b];
                if (c <= i || c >= nodes.size() || nodes[c].parent) {
                    throw ModelFormatError("bad child reference in node " + std::to_string(i));
                }
                nodes[c].parent = i;
                nodes[c].branch = b;
                sum[0] += nodes[c].class_counts[0];
                sum[1] += nodes[c].class_counts[1];
            }
            if (!nodes[i].children.empty() && sum != nodes[i].class_counts) {
                throw ModelFormatError("class counts of node " + std::to_string(i) + " do not match its children");
            }
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (!nodes[i].parent) throw ModelFormatError("node " + std::to_string(i) + " is unreachable");
        }
        return ChaidTree(config, std::move(nodes));
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model: ") + e.what());
    }
}

void save_model(const ChaidTree& tree, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(tree);
    if (!out) throw Error("write failed for " + path.string());
}

ChaidTree load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot read model " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string to_dot(const ChaidTree& tree) {
    std::ostringstream out;
    out << "digraph chaid {\n  node [shape=box, fontname=\"Helvetica\"];\n";
    out.setf(std::ios::fixed);
    out.precision(1);
    for (const auto& n : tree.nodes()) {
        out << "  n" << n.id << " [label=\"Node " << n.id << "\\nspam " << 100.0 * n.spam_proportion() << "% ("
            << n.spam() << "/" << n.total() << ")";
        if (n.split) {
            out << "\\nsplit on " << attribute_info(n.split->predictor).name;
            out.unsetf(std::ios::fixed);
            out.precision(3);
            out << "\\nadj. p = " << n.split->adjusted_p;
            out.setf(std::ios::fixed);
            out.precision(1);
        }
        out << "\"];\n";
    }
    for (const auto& n : tree.nodes()) {
        for (std::size_t b = 0; b < n.children.size(); ++b) {
            out << "  n" << n.id << " -> n" << n.children[b] << " [label=\"";
            const auto& group = n.split->grouping.groups[b];
            for (std::size_t k = 0; k < group.size(); ++k) {
                if (k > 0) out << ", ";
                out << category_name(n.split->predictor, group[k]);
            }
            out << "\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace spamsift
