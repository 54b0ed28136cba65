#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spamsift/record.hpp"

namespace spamsift {

/// Two-way table of predictor categories (rows) by target classes
/// (columns), with expected counts under independence. Rows whose total
/// is zero are dropped on construction.
class ContingencyTable {
public:
    /// `row_categories`, when given, names each input row (same length as
    /// `observed`); otherwise rows are numbered from zero. Every row must
    /// have the same width.
    static ContingencyTable from_counts(const std::vector<std::vector<std::int64_t>>& observed,
                                        std::vector<int> row_categories = {});

    std::size_t rows() const noexcept { return observed_.size(); }
    std::size_t cols() const noexcept { return col_totals_.size(); }
    std::int64_t observed(std::size_t i, std::size_t j) const { return observed_[i][j]; }
    /// row_total(i) * col_total(j) / N
    double expected(std::size_t i, std::size_t j) const;
    std::int64_t row_total(std::size_t i) const { return row_totals_[i]; }
    std::int64_t col_total(std::size_t j) const { return col_totals_[j]; }
    std::int64_t total() const noexcept { return total_; }
    const std::vector<int>& row_categories() const noexcept { return row_categories_; }

    /// Fewer than two rows, or fewer than two non-empty columns.
    bool degenerate() const;

private:
    std::vector<std::vector<std::int64_t>> observed_;
    std::vector<int> row_categories_;
    std::vector<std::int64_t> row_totals_;
    std::vector<std::int64_t> col_totals_;
    std::int64_t total_ = 0;
};

/// Predictor-by-label table (columns: non-spam, spam). Throws
/// ValidationError on unlabeled records and on an empty input.
ContingencyTable build_contingency(std::span<const SiteRecord> records, Attribute predictor);
/// Name-based variant; throws SchemaError on an unknown predictor or a
/// target other than "label".
ContingencyTable build_contingency(std::span<const SiteRecord> records, std::string_view predictor,
                                   std::string_view target = "label");

struct ChiSquare {
    double statistic = 0.0;
    int df = 0;
    /// Single row or single non-empty column: no association, p = 1.
    bool degenerate = false;
};

/// Pearson X^2 = sum_ij (n_ij - m_ij)^2 / m_ij over non-empty columns.
ChiSquare pearson_chi_square(const ContingencyTable& table);

/// G^2 = 2 sum_ij n_ij ln(n_ij / m_ij), with 0 ln 0 = 0.
ChiSquare likelihood_ratio_stat(const ContingencyTable& table);

/// Upper tail of the chi-square distribution, Q(df/2, statistic/2).
/// Throws DomainError on a negative statistic or df < 1.
double chi_square_p_value(double statistic, int df);

/// Natural log of chi_square_p_value, finite far past double underflow.
double chi_square_log_p_value(double statistic, int df);

/// ln Q(a, x), the regularized upper incomplete gamma function.
double log_gamma_q(double a, double x);

/// Number of ways `levels` original categories can be reduced to `groups`
/// groups: C(c-1, g-1) for ordinal predictors (contiguous runs), the
/// Stirling number S(c, g) for nominal ones. Throws DomainError unless
/// 1 <= g <= c.
double bonferroni_multiplier(int levels, int groups, AttributeKind kind);

}  // namespace spamsift
