#pragma once

#include "govdisc/parallel.hpp"
#include "govdisc/regression_set.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace govdisc {

/// One candidate term: a monomial given by per-feature exponents aligned with
/// the owning library's feature list. The constant term has all exponents 0.
struct TermSpec {
    std::vector<int> exponents;
    std::string extension; // reserved for non-monomial terms; empty = monomial

    int degree() const;
    friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

/// All monomials of total degree <= max_degree over `features`, in graded
/// lexicographic order: by degree, then by exponent vector descending, so the
/// constant comes first and T precedes u within each degree.
class TermLibrary {
public:
    TermLibrary() = default;

    const std::vector<std::string>& features() const { return features_; }
    int max_degree() const { return max_degree_; }
    const std::vector<TermSpec>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    const TermSpec& term(std::size_t p) const { return terms_.at(p); }
    /// Index of the term with these exponents, or -1.
    long find(const std::vector<int>& exponents) const;
    std::string term_name(std::size_t p) const;

    friend bool operator==(const TermLibrary&, const TermLibrary&) = default;
    friend TermLibrary build_library(std::vector<std::string> features, int max_degree);

private:
    std::vector<std::string> features_;
    int max_degree_ = 0;
    std::vector<TermSpec> terms_;
};

TermLibrary build_library(std::vector<std::string> features, int max_degree);

/// Product of values[f]^exponents[f] by repeated multiplication.
double monomial(std::span<const double> values, std::span<const int> exponents);

struct DesignMatrix {
    Eigen::MatrixXd values; // N x P
    TermLibrary library;
    std::vector<std::string> column_names;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

DesignMatrix evaluate_library(const TermLibrary& lib, const RegressionSet& rows,
                              Execution exec = Execution::Parallel);

/// Same as above for raw columns aligned with `lib.features()`.
DesignMatrix evaluate_library(const TermLibrary& lib, std::span<const std::vector<double>> feature_columns,
                              Execution exec = Execution::Parallel);

struct NormalizedProblem {
    Eigen::MatrixXd matrix;       // unit-l2 columns; excluded columns are zero
    Eigen::VectorXd target;       // unit l2 norm
    std::vector<double> col_norms;
    double target_norm = 0.0;
    std::vector<bool> excluded;   // zero-norm columns

    std::size_t active_count() const;
    /// Indices of non-excluded columns, ascending.
    std::vector<int> active_columns() const;
};

NormalizedProblem normalize_columns(const DesignMatrix& dm, std::span<const double> target);

/// Coefficient text used in equations: sign, 4-decimal mantissa, bare exponent.
/// Negative values use U+2212 as the sign ("−1.3500e-2").
std::string format_coefficient(double c);

/// e.g. "+2.7640e-9·ω^3·T_f"; the constant term prints only its coefficient.
std::string term_to_string(const TermSpec& term, std::span<const std::string> features, double coefficient);

/// e.g. "ω^3·T_f" or "1".
std::string monomial_name(const TermSpec& term, std::span<const std::string> features);

} // namespace govdisc
