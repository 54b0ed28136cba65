#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spamsift/chaid.hpp"
#include "spamsift/dataset.hpp"

namespace spamsift {

/// Spam is the positive class.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const noexcept { return tp + fp + tn + fn; }
    double accuracy() const noexcept;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// A ratio whose denominator may be zero; then value is 0 and degenerate is set.
struct Ratio {
    double value = 0.0;
    bool degenerate = false;
};

Ratio precision(const ConfusionMatrix& cm);
Ratio recall(const ConfusionMatrix& cm);
/// 2PR / (P + R); degenerate when P + R = 0.
Ratio f_measure(const ConfusionMatrix& cm);

void add_outcome(ConfusionMatrix& cm, Label truth, Label predicted);

/// Throws ValidationError on unlabeled test records.
ConfusionMatrix evaluate(const ChaidTree& tree, const Dataset& test);

struct FoldResult {
    std::size_t fold = 0;
    ConfusionMatrix confusion;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

struct MeanStd {
    double mean = 0.0;
    double stdev = 0.0;  // sample standard deviation (n - 1)
};

struct CrossValidation {
    std::vector<FoldResult> folds;
    /// Sum of the per-fold matrices.
    ConfusionMatrix pooled;
    MeanStd precision;
    MeanStd recall;
    MeanStd f_measure;
};

/// Trains on k-1 folds and tests on the held-out one, for each fold.
CrossValidation cross_validate(const Dataset& dataset, const ChaidConfig& config, std::size_t k, std::uint64_t seed);

/// `fold,precision,recall,f_measure,tp,fp,tn,fn` rows plus a `mean` row
/// carrying the mean ratios and the pooled counts.
void write_metrics_csv(const CrossValidation& cv, std::ostream& out);

}  // namespace spamsift
