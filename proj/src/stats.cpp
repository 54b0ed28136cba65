#include "spamsift/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spamsift/errors.hpp"

namespace spamsift {

ContingencyTable ContingencyTable::from_counts(const std::vector<std::vector<std::int64_t>>& observed,
                                               std::vector<int> row_categories) {
    if (!row_categories.empty() && row_categories.size() != observed.size()) {
        throw DomainError("row category list does not match the table");
    }
    ContingencyTable table;
    const std::size_t width = observed.empty() ? 0 : observed.front().size();
    table.col_totals_.assign(width, 0);
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const auto& row = observed[i];
        if (row.size() != width) throw DomainError("ragged contingency table");
        std::int64_t row_total = 0;
        for (const auto n : row) {
            if (n < 0) throw DomainError("negative cell count");
            row_total += n;
        }
        if (row_total == 0) continue;
        table.observed_.push_back(row);
        table.row_categories_.push_back(row_categories.empty() ? static_cast<int>(i) : row_categories[i]);
        table.row_totals_.push_back(row_total);
        for (std::size_t j = 0; j < width; ++j) table.col_totals_[j] += row[j];
        table.total_ += row_total;
    }
    return table;
}

double ContingencyTable::expected(std::size_t i, std::size_t j) const {
    return static_cast<double>(row_totals_[i]) * static_cast<double>(col_totals_[j]) / static_cast<double>(total_);
}

bool ContingencyTable::degenerate() const {
    std::size_t live_cols = 0;
    for (const auto c : col_totals_) live_cols += c > 0 ? 1 : 0;
    return rows() < 2 || live_cols < 2;
}

ContingencyTable build_contingency(std::span<const SiteRecord> records, Attribute predictor) {
    if (records.empty()) throw ValidationError("contingency table needs at least one record");
    const auto levels = static_cast<std::size_t>(attribute_info(predictor).level_count);
    std::vector<std::vector<std::int64_t>> counts(levels, std::vector<std::int64_t>(2, 0));
    for (const auto& r : records) {
        if (r.label == Label::unlabeled) throw ValidationError("unlabeled record " + r.url);
        ++counts[static_cast<std::size_t>(r.category(predictor))][static_cast<std::size_t>(r.label)];
    }
    return ContingencyTable::from_counts(counts);
}

ContingencyTable build_contingency(std::span<const SiteRecord> records, std::string_view predictor,
                                   std::string_view target) {
    if (target != "label") throw SchemaError("unknown target '" + std::string(target) + "'");
    const auto attr = parse_attribute(predictor);
    if (!attr) throw SchemaError("unknown attribute '" + std::string(predictor) + "'");
    return build_contingency(records, *attr);
}

namespace {

int live_columns(const ContingencyTable& table) {
    int live = 0;
    for (std::size_t j = 0; j < table.cols(); ++j) live += table.col_total(j) > 0 ? 1 : 0;
    return live;
}

}  // namespace

ChiSquare pearson_chi_square(const ContingencyTable& table) {
    ChiSquare result;
    if (table.degenerate()) {
        result.degenerate = true;
        return result;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            if (table.col_total(j) == 0) continue;
            const double m = table.expected(i, j);
            const double d = static_cast<double>(table.observed(i, j)) - m;
            sum += d * d / m;
        }
    }
    result.statistic = sum;
    result.df = (static_cast<int>(table.rows()) - 1) * (live_columns(table) - 1);
    return result;
}

ChiSquare likelihood_ratio_stat(const ContingencyTable& table) {
    ChiSquare result;
    if (table.degenerate()) {
        result.degenerate = true;
        return result;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const auto n = table.observed(i, j);
            if (n == 0) continue;
            sum += static_cast<double>(n) * std::log(static_cast<double>(n) / table.expected(i, j));
        }
    }
    // Rounding can leave a tiny negative value when n == m.
    result.statistic = std::max(0.0, 2.0 * sum);
    result.df = (static_cast<int>(table.rows()) - 1) * (live_columns(table) - 1);
    return result;
}

double log_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma needs a > 0");
    if (x < 0.0 || std::isnan(x)) throw DomainError("incomplete gamma needs x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    constexpr double kEps = 1e-16;
    constexpr int kMaxIter = 100000;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);

    if (x < a + 1.0) {
        // Series for the lower tail P, then Q = 1 - P.
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int n = 0; n < kMaxIter; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * kEps) break;
        }
        const double p = std::exp(log_prefix + std::log(sum));
        return std::log1p(-std::min(p, 1.0));
    }

    // Modified Lentz continued fraction for Q.
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return log_prefix + std::log(h);
}

double chi_square_log_p_value(double statistic, int df) {
    if (std::isnan(statistic) || statistic < 0.0) throw DomainError("chi-square statistic must be non-negative");
    if (df < 1) throw DomainError("chi-square df must be at least 1");
    return log_gamma_q(0.5 * df, 0.5 * statistic);
}

double chi_square_p_value(double statistic, int df) { return std::exp(chi_square_log_p_value(statistic, df)); }

double bonferroni_multiplier(int levels, int groups, AttributeKind kind) {
    if (groups < 1 || levels < 1 || groups > levels) {
        throw DomainError("Bonferroni multiplier needs 1 <= g <= c (c=" + std::to_string(levels) +
                          ", g=" + std::to_string(groups) + ")");
    }
    if (groups == levels || groups == 1) return 1.0;
    if (kind == AttributeKind::ordinal) {
        // C(c-1, g-1)
        long double result = 1.0L;
        const int n = levels - 1;
        const int k = groups - 1;
        for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
        return static_cast<double>(std::round(result));
    }
    // sum_{i=0}^{g-1} (-1)^i (g-i)^c / (i! (g-i)!)
    long double sum = 0.0L;
    long double i_fact = 1.0L;
    for (int i = 0; i < groups; ++i) {
        if (i > 0) i_fact *= i;
        const long double g_minus_i_fact = std::tgamma(static_cast<long double>(groups - i + 1));
        const long double term = std::pow(static_cast<long double>(groups - i), levels) / (i_fact * g_minus_i_fact);
        sum += (i % 2 == 0) ? term : -term;
    }
    return static_cast<double>(std::round(sum));
}

}  // namespace spamsift
