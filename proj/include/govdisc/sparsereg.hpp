#pragma once

#include "govdisc/featlib.hpp"
#include "govdisc/parallel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace govdisc {

struct HyperParams {
    int k = 3;
    double lambda2 = 100.0;
    double big_m = 1000.0;
    int max_degree = 4;

    void validate() const;
    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct SupportVector {
    std::vector<bool> gamma;

    std::size_t count() const;
    std::vector<int> indices() const;
    static SupportVector from_indices(std::size_t P, std::span<const int> idx);
    friend bool operator==(const SupportVector&, const SupportVector&) = default;
};

struct FitDiagnostics {
    double stage1_objective = 0.0;      // normalized ridge objective of the chosen support
    double stage2_residual_norm = 0.0;  // ||y - Theta xi|| on original data
    double condition_estimate = 1.0;    // of the equilibrated refit block
    std::vector<int> excluded;          // zero-norm columns
    std::string solver;                 // "exhaustive" | "branch-and-bound"
    std::uint64_t supports_evaluated = 0;
    double seconds = 0.0;               // wall clock; reported, never saved

    /// Timing is not part of a fit's identity and is left out.
    friend bool operator==(const FitDiagnostics& a, const FitDiagnostics& b) {
        return a.stage1_objective == b.stage1_objective && a.stage2_residual_norm == b.stage2_residual_norm &&
               a.condition_estimate == b.condition_estimate && a.excluded == b.excluded && a.solver == b.solver &&
               a.supports_evaluated == b.supports_evaluated;
    }
};

struct SparseModel {
    TermLibrary library;
    SupportVector gamma;
    std::vector<double> xi;
    HyperParams hp;
    FitDiagnostics diag;

    /// Sum of xi_p * term_p(values) over the support, in library order.
    /// `values` aligned with library.features().
    double evaluate(std::span<const double> values) const;

    friend bool operator==(const SparseModel&, const SparseModel&) = default;
};

/// Builds a model from known coefficients, e.g. for fixtures: terms given as
/// exponent vectors aligned with `features`.
SparseModel make_model(std::vector<std::string> features, int max_degree,
                       const std::vector<std::pair<std::vector<int>, double>>& terms);

enum class SolverMethod { Auto, Exhaustive, BranchAndBound };

struct SolverOptions {
    SolverMethod method = SolverMethod::Auto;
    Execution exec = Execution::Parallel;
    std::uint64_t max_nodes = 0; // branch-and-bound node budget, 0 = unlimited
};

/// Supports at or below this count are enumerated exhaustively under Auto.
inline constexpr double kExhaustiveLimit = 1e6;

/// Objectives within this relative distance count as tied; the lexicographically
/// smallest index tuple wins. A tiny absolute floor absorbs roundoff near zero.
inline constexpr double kTieRelative = 1e-12;
inline constexpr double kTieAbsolute = 1e-15;

/// Ridge objective min_xi ||y - A_S xi||^2 + lambda2 ||xi||^2 for any column
/// subset S of a normalized problem. Precomputes a QR of the full matrix so
/// each evaluation works on a small projected system.
class SubsetObjective {
public:
    SubsetObjective(const NormalizedProblem& problem, double lambda2);
    double operator()(std::span<const int> columns) const;

private:
    Eigen::MatrixXd r_;     // min(N,P) x P
    Eigen::VectorXd z_;     // Q^T y, leading part
    double outside_ = 0.0;  // squared norm of y orthogonal to range(A)
    double sqrt_lambda_ = 0.0;
};

struct SupportSolution {
    SupportVector support;
    double objective = 0.0;
    std::uint64_t evaluated = 0;
    SolverMethod used = SolverMethod::Exhaustive;
};

SupportSolution solve_support(const NormalizedProblem& problem, const HyperParams& hp,
                              const SolverOptions& opts = {});

struct RefitInfo {
    double condition_estimate = 1.0;
    double residual_norm = 0.0;
};

/// Unregularized least squares on the original selected columns.
std::vector<double> refit_least_squares(const DesignMatrix& dm, std::span<const double> target,
                                        const SupportVector& gamma, RefitInfo* info = nullptr);

/// normalize -> exact support -> refit -> big-M check.
SparseModel discover(const DesignMatrix& dm, std::span<const double> target, const HyperParams& hp,
                     const SolverOptions& opts = {});

struct KCandidate {
    HyperParams hp;
    bool ok = false;
    double mape = 0.0;
    std::string failure;
};

struct TuneResult {
    HyperParams best;
    std::vector<KCandidate> table;
};

/// Scores every candidate (lower is better) and picks the best; ties go to the
/// smallest k. `score` signals a failed candidate by throwing NumericalError.
/// A single candidate is returned without scoring.
TuneResult tune_k(std::span<const HyperParams> candidates, const std::function<double(const HyperParams&)>& score);

std::string fit_report(const SparseModel& model, const std::string& title, const TuneResult* tuning = nullptr);

} // namespace govdisc
