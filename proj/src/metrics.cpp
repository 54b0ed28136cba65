#include "spamsift/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "spamsift/errors.hpp"

namespace spamsift {

namespace {

Ratio safe_ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return {0.0, true};
    return {static_cast<double>(num) / static_cast<double>(den), false};
}

MeanStd summarize(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (const double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

double ConfusionMatrix::accuracy() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

Ratio precision(const ConfusionMatrix& cm) { return safe_ratio(cm.tp, cm.tp + cm.fp); }

Ratio recall(const ConfusionMatrix& cm) { return safe_ratio(cm.tp, cm.tp + cm.fn); }

Ratio f_measure(const ConfusionMatrix& cm) {
    const auto p = precision(cm).value;
    const auto r = recall(cm).value;
    if (p + r == 0.0) return {0.0, true};
    return {2.0 * p * r / (p + r), false};
}

void add_outcome(ConfusionMatrix& cm, Label truth, Label predicted) {
    if (truth == Label::unlabeled) throw ValidationError("cannot score an unlabeled record");
    const bool actual = truth == Label::spam;
    const bool flagged = predicted == Label::spam;
    if (actual && flagged) ++cm.tp;
    else if (!actual && flagged) ++cm.fp;
    else if (!actual) ++cm.tn;
    else ++cm.fn;
}

ConfusionMatrix evaluate(const ChaidTree& tree, const Dataset& test) {
    ConfusionMatrix cm;
    for (const auto& r : test.records) {
        if (r.label == Label::unlabeled) throw ValidationError("unlabeled test record " + r.url);
        add_outcome(cm, r.label, predict(tree, r).label);
    }
    return cm;
}

CrossValidation cross_validate(const Dataset& dataset, const ChaidConfig& config, std::size_t k, std::uint64_t seed) {
    const auto plan = k_fold(dataset, k, seed);
    CrossValidation cv;
    std::vector<double> ps, rs, fs;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const auto tree = grow_tree(dataset.subset(plan.train_indices(fold)), config);
        FoldResult result;
        result.fold = fold;
        result.confusion = evaluate(tree, dataset.subset(plan.test_indices(fold)));
        result.precision = precision(result.confusion).value;
        result.recall = recall(result.confusion).value;
        result.f_measure = f_measure(result.confusion).value;
        cv.pooled += result.confusion;
        ps.push_back(result.precision);
        rs.push_back(result.recall);
        fs.push_back(result.f_measure);
        cv.folds.push_back(result);
    }
    cv.precision = summarize(ps);
    cv.recall = summarize(rs);
    cv.f_measure = summarize(fs);
    return cv;
}

void write_metrics_csv(const CrossValidation& cv, std::ostream& out) {
    out << "fold,precision,recall,f_measure,tp,fp,tn,fn\n";
    for (const auto& f : cv.folds) {
        out << f.fold << ',' << fixed6(f.precision) << ',' << fixed6(f.recall) << ',' << fixed6(f.f_measure) << ','
            << f.confusion.tp << ',' << f.confusion.fp << ',' << f.confusion.tn << ',' << f.confusion.fn << '\n';
    }
    out << "mean," << fixed6(cv.precision.mean) << ',' << fixed6(cv.recall.mean) << ',' << fixed6(cv.f_measure.mean)
        << ',' << cv.pooled.tp << ',' << cv.pooled.fp << ',' << cv.pooled.tn << ',' << cv.pooled.fn << '\n';
}

}  // namespace spamsift
