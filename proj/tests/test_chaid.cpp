#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "spamsift/chaid.hpp"
#include "spamsift/errors.hpp"
#include "spamsift/stats.hpp"

using namespace spamsift;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(SPAMSIFT_SOURCE_DIR) / "data";

/// `n` records at `code` of `a`, `spam` of them spam.
void add(Dataset& d, Attribute a, int code, int n, int spam) {
    for (int i = 0; i < n; ++i) {
        SiteRecord r;
        r.url = "http://" + std::to_string(d.size()) + ".test/";
        r.set_category(a, code);
        r.label = i < spam ? Label::spam : Label::non_spam;
        d.records.push_back(r);
    }
}

ChaidTree single_node(std::int64_t non_spam, std::int64_t spam) {
    ChaidNode root;
    root.class_counts = {non_spam, spam};
    root.stop_reason = StopReason::too_small;
    return ChaidTree(ChaidConfig{}, {root});
}

Dataset pattern_a(std::uint64_t seed) { return generate_synthetic(load_generator_spec(kData / "pattern_a.json"), seed); }

}  // namespace

TEST_CASE("chaid config validation") {
    CHECK_NOTHROW(ChaidConfig{}.validate());
    ChaidConfig c;
    c.alpha_merge = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.alpha_split = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.min_child_size = 40;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_depth = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_statistic("likelihood-ratio") == Statistic::likelihood_ratio);
    CHECK(statistic_name(Statistic::pearson) == "pearson");
    CHECK_FALSE(parse_statistic("f-test").has_value());
}

TEST_CASE("merge_categories") {
    const ChaidConfig config;
    SUBCASE("identical distributions merge") {
        Dataset d;
        add(d, Attribute::meta_tag, 1, 20, 5);
        add(d, Attribute::meta_tag, 2, 40, 10);
        const auto g = merge_categories(d.records, Attribute::meta_tag, config);
        CHECK(g.groups == std::vector<std::vector<int>>{{1, 2}});
    }
    SUBCASE("very different distributions stay apart") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 50, 0);
        add(d, Attribute::meta_tag, 1, 50, 50);
        add(d, Attribute::meta_tag, 2, 50, 0);
        const auto g = merge_categories(d.records, Attribute::meta_tag, config);
        CHECK(g.groups == std::vector<std::vector<int>>{{0}, {1}, {2}});
    }
    SUBCASE("ordinal merging only joins neighbours") {
        // Levels 0 and 2 look alike but level 1 sits between them.
        Dataset d;
        add(d, Attribute::meta_tag, 0, 50, 5);
        add(d, Attribute::meta_tag, 1, 50, 45);
        add(d, Attribute::meta_tag, 2, 50, 5);
        CHECK(merge_categories(d.records, Attribute::meta_tag, config).size() == 3);
    }
    SUBCASE("nominal merging may join any pair") {
        Dataset d;
        add(d, Attribute::black_list, 0, 30, 10);
        add(d, Attribute::black_list, 1, 30, 10);
        CHECK(merge_categories(d.records, Attribute::black_list, config).size() == 1);
    }
    SUBCASE("unobserved levels are skipped when looking for neighbours") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 40, 10);
        add(d, Attribute::meta_tag, 3, 40, 10);
        const auto g = merge_categories(d.records, Attribute::meta_tag, config);
        CHECK(g.groups == std::vector<std::vector<int>>{{0, 3}});
        CHECK_FALSE(g.group_of(1).has_value());
        CHECK(g.group_of(3) == 0u);
    }
}

TEST_CASE("merge_categories on a planted 4-level predictor matches the exhaustive optimum") {
    Rng rng(12);
    Dataset d;
    const double rate[] = {0.15, 0.2, 0.7, 0.75};
    for (int i = 0; i < 500; ++i) {
        SiteRecord r;
        const int code = static_cast<int>(rng.uniform_index(4));
        r.key_word_public = static_cast<OrdinalLevel>(code);
        r.label = rng.bernoulli(rate[code]) ? Label::spam : Label::non_spam;
        d.records.push_back(r);
    }
    const ChaidConfig config;
    const auto g = merge_categories(d.records, Attribute::key_word_public, config);
    const auto best = oracle::best_groupings(d.records, {Attribute::key_word_public});
    REQUIRE(best.size() == 1);
    CHECK(g.groups == best.front().groups);
    CHECK(g.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    CHECK(adjusted_p(d.records, Attribute::key_word_public, g, config).p_adjusted ==
          doctest::Approx(best.front().p_adjusted).epsilon(1e-9));
}

TEST_CASE("merge_categories reaches a fixed point") {
    Rng rng(13);
    const ChaidConfig config;
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = all_predictors()[rng.uniform_index(kAttributeCount)];
        const auto d = oracle::random_dataset(rng, 20 + rng.uniform_index(200), {{a, attribute_info(a).level_count}}, a);
        const auto counts = tally(d.records, a);
        const auto kind = attribute_info(a).kind;
        const auto g = merge_categories(counts, kind, config);
        CHECK(merge_groups(counts, kind, g, config) == g);

        // Post-state: every mergeable pair differs significantly.
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t j = i + 1; j < g.size(); ++j) {
                if (kind == AttributeKind::ordinal && j != i + 1) continue;
                std::vector<std::array<long, 2>> rows(2, {0, 0});
                for (const int c : g.groups[i]) rows[0] = {rows[0][0] + counts[c][0], rows[0][1] + counts[c][1]};
                for (const int c : g.groups[j]) rows[1] = {rows[1][0] + counts[c][0], rows[1][1] + counts[c][1]};
                const auto [stat, df] = oracle::pearson(rows);
                CHECK(oracle::p_value(stat, df) <= config.alpha_merge);
            }
        }
        // Groups partition the observed codes; ordinal groups are contiguous runs.
        std::vector<int> seen;
        for (const auto& grp : g.groups) seen.insert(seen.end(), grp.begin(), grp.end());
        std::vector<int> observed;
        for (int c = 0; c < static_cast<int>(counts.size()); ++c) {
            if (counts[c][0] + counts[c][1] > 0) observed.push_back(c);
        }
        CHECK(seen == observed);
    }
}

TEST_CASE("adjusted_p") {
    const ChaidConfig config;
    Dataset d;
    add(d, Attribute::meta_tag, 0, 30, 5);
    add(d, Attribute::meta_tag, 1, 30, 20);
    add(d, Attribute::meta_tag, 2, 30, 6);
    const auto counts = tally(d.records, Attribute::meta_tag);

    const auto unmerged = adjusted_p(counts, AttributeKind::ordinal, singleton_grouping(counts), config);
    CHECK(unmerged.multiplier == 1.0);
    CHECK(unmerged.p_adjusted == unmerged.test.p_value);

    const CategoryGrouping two{{{0, 1}, {2}}};
    const auto merged = adjusted_p(counts, AttributeKind::ordinal, two, config);
    CHECK(merged.multiplier == 2.0);
    CHECK(merged.p_adjusted == doctest::Approx(std::min(1.0, 2.0 * merged.test.p_value)));

    // Clamp: five levels into two groups multiplies by 4.
    Dataset flat;
    for (int c = 0; c < 5; ++c) add(flat, Attribute::meta_tag, c, 20, c < 2 ? 6 : 7);
    const CategoryGrouping halves{{{0, 1}, {2, 3, 4}}};
    const auto clamped = adjusted_p(flat.records, Attribute::meta_tag, halves, config);
    CHECK(clamped.multiplier == 4.0);
    CHECK(clamped.test.p_value > 0.25);
    CHECK(clamped.p_adjusted == 1.0);

    Dataset strong;
    for (int c = 0; c < 5; ++c) add(strong, Attribute::meta_tag, c, 20, c < 2 ? 4 : 10);
    const auto scaled = adjusted_p(strong.records, Attribute::meta_tag, halves, config);
    CHECK(scaled.test.p_value < 0.25);
    CHECK(scaled.p_adjusted == doctest::Approx(4.0 * scaled.test.p_value).epsilon(1e-12));
    CHECK(scaled.log_p_adjusted == doctest::Approx(std::log(scaled.p_adjusted)).epsilon(1e-9));
}

TEST_CASE("select_split") {
    ChaidConfig config;
    config.min_parent_size = 2;
    config.min_child_size = 1;
    SUBCASE("pure node") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 20, 20);
        add(d, Attribute::meta_tag, 3, 20, 20);
        CHECK_FALSE(select_split(d.records, all_predictors(), config).has_value());
    }
    SUBCASE("a perfectly separating predictor wins") {
        Rng rng(1);
        Dataset d;
        for (int i = 0; i < 80; ++i) {
            SiteRecord r;
            r.label = i % 2 ? Label::spam : Label::non_spam;
            r.count_of_post = r.label == Label::spam ? OrdinalLevel::very_max : OrdinalLevel::min;
            r.meta_tag = static_cast<OrdinalLevel>(rng.uniform_index(5));
            r.black_list = rng.bernoulli(0.5);
            d.records.push_back(r);
        }
        const auto s = select_split(d.records, all_predictors(), config);
        REQUIRE(s.has_value());
        CHECK(s->predictor == Attribute::count_of_post);
        CHECK(s->grouping.size() == 2);
        CHECK(s->score.p_adjusted < 1e-10);
    }
    SUBCASE("nothing significant") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 20, 10);
        add(d, Attribute::meta_tag, 1, 20, 11);
        CHECK_FALSE(select_split(d.records, all_predictors(), config).has_value());
    }
    SUBCASE("equal p-values go to the earlier attribute") {
        Dataset d;
        add(d, Attribute::count_of_post, 0, 30, 2);
        add(d, Attribute::count_of_post, 4, 30, 28);
        for (auto& r : d.records) r.feature_of_url = r.count_of_post;
        const auto s = select_split(d.records, all_predictors(), config);
        REQUIRE(s.has_value());
        CHECK(s->predictor == Attribute::feature_of_url);
    }
    SUBCASE("a child below min_child_size blocks the split") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 60, 0);
        add(d, Attribute::meta_tag, 4, 6, 6);
        config.min_child_size = 10;
        config.min_parent_size = 30;
        CHECK_FALSE(select_split(d.records, all_predictors(), config).has_value());
        config.min_child_size = 6;
        CHECK(select_split(d.records, all_predictors(), config).has_value());
    }
}

TEST_CASE("grow_tree") {
    SUBCASE("independent target gives a single node") {
        Dataset d;
        for (int c = 0; c < 5; ++c) add(d, Attribute::meta_tag, c, 20, 5);
        const auto t = grow_tree(d, ChaidConfig{});
        CHECK(t.nodes().size() == 1);
        CHECK(t.root().stop_reason == StopReason::no_significant_split);
        CHECK(t.root().class_counts == std::array<std::int64_t, 2>{75, 25});
    }
    SUBCASE("stop reasons") {
        Dataset pure;
        add(pure, Attribute::meta_tag, 0, 40, 40);
        CHECK(grow_tree(pure, ChaidConfig{}).root().stop_reason == StopReason::pure);
        Dataset small;
        add(small, Attribute::meta_tag, 0, 10, 5);
        add(small, Attribute::meta_tag, 4, 10, 0);
        CHECK(grow_tree(small, ChaidConfig{}).root().stop_reason == StopReason::too_small);

        ChaidConfig shallow;
        shallow.max_depth = 1;
        const auto t = grow_tree(pattern_a(2), shallow);
        for (const auto id : t.leaves()) {
            const auto& n = t.node(id);
            CHECK(n.depth == 1);
            if (n.total() >= shallow.min_parent_size && n.class_counts[0] > 0 && n.class_counts[1] > 0) {
                CHECK(n.stop_reason == StopReason::max_depth);
            }
        }
    }
    SUBCASE("unlabeled records are rejected") {
        Dataset d;
        add(d, Attribute::meta_tag, 0, 40, 10);
        d.records[3].label = Label::unlabeled;
        CHECK_THROWS_AS(grow_tree(d, ChaidConfig{}), ValidationError);
    }
    SUBCASE("Pattern A") {
        ChaidConfig config;
        config.max_depth = 2;
        const auto data = pattern_a(1);
        const auto t = grow_tree(data, config);
        REQUIRE_FALSE(t.root().is_leaf());
        CHECK(t.root().split->predictor == Attribute::key_word_special);
        const auto rules = extract_rules(t);
        CHECK(oracle::tree_violations(t, data, rules).empty());
        const auto& top = rules.front();
        REQUIRE(top.conditions.size() == 2);
        CHECK(top.conditions[0].predictor == Attribute::key_word_special);
        CHECK(top.conditions[1].predictor == Attribute::key_word_public);
        CHECK(top.conditions[1].categories == std::vector<int>{4});
        CHECK(std::abs(top.spam_proportion - 0.871) <= 0.05);
        CHECK(t.node(top.leaf).depth == 2);
    }
    SUBCASE("Pattern B") {
        ChaidConfig config;
        config.max_depth = 2;
        const auto data = generate_synthetic(load_generator_spec(kData / "pattern_b.json"), 1);
        const auto t = grow_tree(data, config);
        REQUIRE_FALSE(t.root().is_leaf());
        CHECK(t.root().split->predictor == Attribute::count_of_internal_link);
        const auto branch = t.root().split->grouping.group_of(3);
        REQUIRE(branch.has_value());
        const auto& node = t.node(t.root().children[*branch]);
        CHECK(std::abs(node.spam_proportion() - 0.67) <= 0.05);
        REQUIRE_FALSE(node.is_leaf());
        CHECK(node.split->predictor == Attribute::count_external_link);
        const auto& leaf = t.node(node.children[*node.split->grouping.group_of(3)]);
        CHECK(std::abs(leaf.spam_proportion() - 0.759) <= 0.05);
    }
    SUBCASE("likelihood-ratio statistic also finds Pattern A") {
        ChaidConfig config;
        config.max_depth = 2;
        config.statistic = Statistic::likelihood_ratio;
        const auto t = grow_tree(pattern_a(5), config);
        CHECK(t.root().split->predictor == Attribute::key_word_special);
    }
    SUBCASE("deterministic") {
        const auto data = pattern_a(9);
        CHECK(to_json(grow_tree(data, ChaidConfig{})) == to_json(grow_tree(data, ChaidConfig{})));
    }
}

TEST_CASE("predict") {
    SiteRecord r;
    const auto p = predict(single_node(3199, 1073), r);
    CHECK(p.label == Label::non_spam);
    CHECK(p.spam_probability == doctest::Approx(0.2512).epsilon(1e-3));
    CHECK(p.spam_probability == doctest::Approx(1073.0 / 4272.0));
    CHECK_FALSE(p.fallback);

    const auto tie = predict(single_node(5, 5), r);
    CHECK(tie.label == Label::non_spam);
    CHECK(tie.spam_probability == 0.5);

    const auto pure = predict(single_node(0, 7), r);
    CHECK(pure.label == Label::spam);
    CHECK(pure.spam_probability == 1.0);

    // Fallback routing for a level the split never saw.
    Dataset d;
    add(d, Attribute::meta_tag, 0, 60, 5);
    add(d, Attribute::meta_tag, 4, 30, 28);
    const auto t = grow_tree(d, ChaidConfig{});
    REQUIRE_FALSE(t.root().is_leaf());
    SiteRecord unseen;
    unseen.meta_tag = OrdinalLevel::mid;
    const auto fb = predict(t, unseen);
    CHECK(fb.fallback);
    CHECK(t.node(fb.leaf).total() == 60);
    SiteRecord seen;
    seen.meta_tag = OrdinalLevel::very_max;
    const auto ok = predict(t, seen);
    CHECK_FALSE(ok.fallback);
    CHECK(ok.label == Label::spam);
}

TEST_CASE("extract_rules") {
    const auto one = extract_rules(single_node(10, 3));
    REQUIRE(one.size() == 1);
    CHECK(one[0].conditions.empty());
    CHECK(one[0].spam_count == 3);
    CHECK(one[0].total_count == 13);
    CHECK(one[0].condition_text() == "(all records)");

    Rng rng(31);
    ChaidConfig config;
    config.min_parent_size = 10;
    config.min_child_size = 3;
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = oracle::random_dataset(
            rng, 60 + rng.uniform_index(300),
            {{Attribute::meta_tag, 5}, {Attribute::black_list, 2}, {Attribute::count_of_post, 4}},
            trial % 2 ? Attribute::meta_tag : Attribute::count_of_post);
        const auto t = grow_tree(d, config);
        const auto rules = extract_rules(t);
        CHECK(rules.size() == t.leaves().size());
        for (std::size_t i = 1; i < rules.size(); ++i) CHECK(rules[i - 1].spam_proportion >= rules[i].spam_proportion);
        CHECK(oracle::tree_violations(t, d, rules).empty());
    }

    ChaidConfig two;
    two.max_depth = 2;
    const auto rules = extract_rules(grow_tree(pattern_a(1), two));
    CHECK(rules.front().condition_text() == "key_word_special in {max} and key_word_public in {very-max}");
}

TEST_CASE("model files") {
    const auto dir = fs::temp_directory_path() / "spamsift_models";
    fs::create_directories(dir);
    const auto single = single_node(3199, 1073);
    save_model(single, dir / "single.json");
    CHECK(load_model(dir / "single.json") == single);

    ChaidConfig config;
    config.max_depth = 2;
    config.statistic = Statistic::likelihood_ratio;
    const auto tree = grow_tree(pattern_a(1), config);
    save_model(tree, dir / "a.json");
    const auto loaded = load_model(dir / "a.json");
    CHECK(loaded == tree);
    CHECK(to_json(loaded) == to_json(tree));

    const auto text = to_json(tree);
    {
        std::ofstream out(dir / "truncated.json");
        out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(load_model(dir / "truncated.json"), ModelFormatError);
    CHECK_THROWS_AS(load_model(dir / "missing.json"), ModelFormatError);

    auto bumped = text;
    bumped.replace(bumped.find("\"version\": 1"), 12, "\"version\": 2");
    CHECK_THROWS_AS(from_json(bumped), ModelFormatError);
    CHECK_THROWS_AS(from_json("[]"), ModelFormatError);
    CHECK_THROWS_AS(from_json(R"({"version": 1})"), ModelFormatError);

    // Count conservation is checked on load.
    auto broken = text;
    const auto at = broken.find("\"spam\": ");
    REQUIRE(at != std::string::npos);
    broken.insert(at + 8, "1");
    CHECK_THROWS_AS(from_json(broken), ModelFormatError);

    const auto dot = to_dot(tree);
    CHECK(dot.rfind("digraph chaid {", 0) == 0);
    CHECK(dot.find("n0 -> n") != std::string::npos);
    CHECK(dot.find("very-max") != std::string::npos);
    fs::remove_all(dir);
}
