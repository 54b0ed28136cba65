#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "spamsift/errors.hpp"
#include "spamsift/metrics.hpp"

using namespace spamsift;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(SPAMSIFT_SOURCE_DIR) / "data";

/// Label follows count_of_post exactly; the other attributes are noise.
Dataset separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = oracle::random_record(rng, i, false);
        r.label = r.count_of_post >= OrdinalLevel::mid ? Label::spam : Label::non_spam;
        d.records.push_back(r);
    }
    return d;
}

/// Spam at a flat 20% whatever the attributes say.
Dataset independent(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = oracle::random_record(rng, i, false);
        r.label = i % 5 == 0 ? Label::spam : Label::non_spam;
        d.records.push_back(r);
    }
    return d;
}

}  // namespace

TEST_CASE("ratios") {
    const ConfusionMatrix perfect{4, 0, 6, 0};
    CHECK(precision(perfect).value == 1.0);
    CHECK(recall(perfect).value == 1.0);
    CHECK(f_measure(perfect).value == 1.0);
    CHECK(perfect.accuracy() == 1.0);

    const ConfusionMatrix silent{0, 0, 6, 4};
    CHECK(precision(silent).degenerate);
    CHECK(precision(silent).value == 0.0);
    CHECK(recall(silent).value == 0.0);
    CHECK_FALSE(recall(silent).degenerate);
    CHECK(f_measure(silent).degenerate);
    CHECK(f_measure(silent).value == 0.0);

    const ConfusionMatrix mixed{3, 1, 5, 1};
    CHECK(precision(mixed).value == 0.75);
    CHECK(recall(mixed).value == 0.75);
    CHECK(f_measure(mixed).value == doctest::Approx(0.75));

    CHECK(recall(ConfusionMatrix{0, 3, 7, 0}).degenerate);
    CHECK(ConfusionMatrix{}.accuracy() == 0.0);
}

TEST_CASE("f-measure is the harmonic mean") {
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const ConfusionMatrix cm{static_cast<std::int64_t>(rng.uniform_index(50)),
                                 static_cast<std::int64_t>(rng.uniform_index(50)),
                                 static_cast<std::int64_t>(rng.uniform_index(50)),
                                 static_cast<std::int64_t>(rng.uniform_index(50))};
        const double f = f_measure(cm).value;
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        if (cm.tp > 0) {
            // Equivalent closed form: 2tp / (2tp + fp + fn).
            CHECK(f == doctest::Approx(2.0 * cm.tp / (2.0 * cm.tp + cm.fp + cm.fn)).epsilon(1e-12));
            CHECK(f <= std::max(precision(cm).value, recall(cm).value) + 1e-12);
            CHECK(f >= std::min(precision(cm).value, recall(cm).value) - 1e-12);
        }
    }
}

TEST_CASE("add_outcome") {
    ConfusionMatrix cm;
    add_outcome(cm, Label::spam, Label::spam);
    add_outcome(cm, Label::non_spam, Label::spam);
    add_outcome(cm, Label::non_spam, Label::non_spam);
    add_outcome(cm, Label::spam, Label::non_spam);
    CHECK(cm == ConfusionMatrix{1, 1, 1, 1});
    CHECK_THROWS_AS(add_outcome(cm, Label::unlabeled, Label::spam), ValidationError);
}

TEST_CASE("evaluate a majority-class tree") {
    ChaidNode root;
    root.class_counts = {3199, 1073};
    root.stop_reason = StopReason::no_significant_split;
    const ChaidTree tree(ChaidConfig{}, {root});
    const auto data = generate_synthetic(load_generator_spec(kData / "pattern_a.json"), 1);
    const auto cm = evaluate(tree, data);
    CHECK(cm == ConfusionMatrix{0, 0, 3199, 1073});
    CHECK(cm.accuracy() == doctest::Approx(0.7488).epsilon(1e-4));
    CHECK(f_measure(cm).degenerate);

    auto bad = data;
    bad.records[0].label = Label::unlabeled;
    CHECK_THROWS_AS(evaluate(tree, bad), ValidationError);
}

TEST_CASE("cross_validate") {
    SUBCASE("separable labels") {
        const auto cv = cross_validate(separable(600, 3), ChaidConfig{}, 10, 1);
        CHECK(cv.folds.size() == 10);
        CHECK(cv.f_measure.mean == 1.0);
        CHECK(cv.f_measure.stdev == 0.0);
        CHECK(cv.pooled.fp == 0);
        CHECK(cv.pooled.fn == 0);
    }
    SUBCASE("independent labels") {
        const auto cv = cross_validate(independent(600, 4), ChaidConfig{}, 10, 1);
        CHECK(cv.f_measure.mean <= 0.1);
        CHECK(cv.pooled.tp <= 10);
    }
    SUBCASE("pattern A") {
        ChaidConfig config;
        config.max_depth = 2;
        const auto data = generate_synthetic(load_generator_spec(kData / "pattern_a.json"), 1);
        const auto cv = cross_validate(data, config, 10, 1);
        CHECK(cv.recall.mean >= 0.55);
        CHECK(cv.precision.mean >= 0.75);

        ConfusionMatrix sum;
        std::vector<std::size_t> seen;
        for (const auto& f : cv.folds) {
            sum += f.confusion;
            seen.push_back(f.fold);
            CHECK(f.f_measure == doctest::Approx(f_measure(f.confusion).value));
        }
        CHECK(sum == cv.pooled);
        CHECK(sum.total() == 4272);
        CHECK(sum.tp + sum.fn == 1073);
        CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

        // Same seed, same folds, same numbers.
        const auto again = cross_validate(data, config, 10, 1);
        CHECK(again.pooled == cv.pooled);
        CHECK(again.f_measure.mean == cv.f_measure.mean);
    }
    SUBCASE("bad k") {
        CHECK_THROWS_AS(cross_validate(separable(20, 1), ChaidConfig{}, 1, 1), ConfigError);
        CHECK_THROWS_AS(cross_validate(separable(5, 1), ChaidConfig{}, 10, 1), ConfigError);
    }
}

TEST_CASE("metrics csv") {
    CrossValidation cv;
    FoldResult a;
    a.fold = 0;
    a.confusion = {3, 1, 5, 1};
    a.precision = a.recall = a.f_measure = 0.75;
    FoldResult b;
    b.fold = 1;
    b.confusion = {4, 0, 6, 0};
    b.precision = b.recall = b.f_measure = 1.0;
    cv.folds = {a, b};
    cv.pooled = {7, 1, 11, 1};
    cv.precision = cv.recall = cv.f_measure = {0.875, 0.1767767};
    std::ostringstream out;
    write_metrics_csv(cv, out);
    CHECK(out.str() ==
          "fold,precision,recall,f_measure,tp,fp,tn,fn\n"
          "0,0.750000,0.750000,0.750000,3,1,5,1\n"
          "1,1.000000,1.000000,1.000000,4,0,6,0\n"
          "mean,0.875000,0.875000,0.875000,7,1,11,1\n");
}
