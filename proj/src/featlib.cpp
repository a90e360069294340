#include "govdisc/featlib.hpp"

#include "govdisc/error.hpp"
#include "govdisc/log.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace govdisc {

int TermSpec::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

namespace {

// Exponent vectors of exactly `degree` over features [f, F), first feature
// taking the largest exponent first.
void compositions(int degree, std::size_t f, std::vector<int>& cur, std::vector<TermSpec>& out) {
    if (f + 1 == cur.size()) {
        cur[f] = degree;
        out.push_back({cur, {}});
        return;
    }
    for (int e = degree; e >= 0; --e) {
        cur[f] = e;
        compositions(degree - e, f + 1, cur, out);
    }
}

} // namespace

TermLibrary build_library(std::vector<std::string> features, int max_degree) {
    if (max_degree < 0) throw ConfigError("library degree must be >= 0");
    std::set<std::string> seen;
    for (const auto& f : features)
        if (!seen.insert(f).second) throw ConfigError("duplicate feature name '" + f + "' in term library");

    TermLibrary lib;
    lib.features_ = std::move(features);
    lib.max_degree_ = max_degree;
    lib.terms_.push_back({std::vector<int>(lib.features_.size(), 0), {}});
    if (!lib.features_.empty()) {
        std::vector<int> cur(lib.features_.size(), 0);
        for (int d = 1; d <= max_degree; ++d) compositions(d, 0, cur, lib.terms_);
    }
    return lib;
}

long TermLibrary::find(const std::vector<int>& exponents) const {
    for (std::size_t p = 0; p < terms_.size(); ++p)
        if (terms_[p].exponents == exponents && terms_[p].extension.empty()) return static_cast<long>(p);
    return -1;
}

std::string TermLibrary::term_name(std::size_t p) const { return monomial_name(terms_.at(p), features_); }

double monomial(std::span<const double> values, std::span<const int> exponents) {
    double acc = 1.0;
    for (std::size_t f = 0; f < exponents.size(); ++f)
        for (int e = 0; e < exponents[f]; ++e) acc *= values[f];
    return acc;
}

DesignMatrix evaluate_library(const TermLibrary& lib, std::span<const std::vector<double>> cols, Execution exec) {
    const std::size_t nf = lib.features().size();
    if (cols.size() != nf) throw SchemaError("", "design matrix: expected " + std::to_string(nf) + " feature columns");
    const long n = nf == 0 ? 0 : static_cast<long>(cols[0].size());
    for (const auto& c : cols)
        if (static_cast<long>(c.size()) != n) throw DataError("design matrix: feature columns differ in length");

    DesignMatrix dm;
    dm.library = lib;
    const long P = static_cast<long>(lib.size());
    dm.values.resize(n, P);
    for (std::size_t p = 0; p < lib.size(); ++p) dm.column_names.push_back(lib.term_name(p));

    auto fill_row = [&](long i) {
        double row[16];
        std::vector<double> big;
        double* vals = row;
        if (nf > 16) {
            big.resize(nf);
            vals = big.data();
        }
        for (std::size_t f = 0; f < nf; ++f) vals[f] = cols[f][i];
        for (long p = 0; p < P; ++p)
            dm.values(i, p) = monomial(std::span<const double>(vals, nf), lib.term(p).exponents);
    };

    if (exec == Execution::Serial) {
        for (long i = 0; i < n; ++i) fill_row(i);
    } else {
#pragma omp parallel for schedule(static) num_threads(thread_count())
        for (long i = 0; i < n; ++i) fill_row(i);
    }
    return dm;
}

DesignMatrix evaluate_library(const TermLibrary& lib, const RegressionSet& rows, Execution exec) {
    std::vector<std::vector<double>> cols;
    cols.reserve(lib.features().size());
    for (const auto& f : lib.features()) {
        if (!rows.has(f)) throw SchemaError(f, "feature '" + f + "' missing from regression rows");
        cols.push_back(rows.column(f));
    }
    if (lib.features().empty()) cols.clear();
    auto dm = evaluate_library(lib, cols, exec);
    if (lib.features().empty()) {
        dm.values = Eigen::MatrixXd::Ones(static_cast<long>(rows.rows()), 1);
    }
    return dm;
}

std::size_t NormalizedProblem::active_count() const {
    return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), false));
}

std::vector<int> NormalizedProblem::active_columns() const {
    std::vector<int> out;
    for (std::size_t p = 0; p < excluded.size(); ++p)
        if (!excluded[p]) out.push_back(static_cast<int>(p));
    return out;
}

NormalizedProblem normalize_columns(const DesignMatrix& dm, std::span<const double> target) {
    if (dm.rows() == 0) throw DataError("cannot normalize an empty design matrix");
    if (target.size() != dm.rows()) throw DataError("target length does not match design matrix rows");
    NormalizedProblem np;
    np.matrix = dm.values;
    const long P = dm.values.cols();
    np.col_norms.resize(P);
    np.excluded.assign(P, false);
    for (long p = 0; p < P; ++p) {
        double nrm = dm.values.col(p).norm();
        np.col_norms[p] = nrm;
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            np.excluded[p] = true;
            np.matrix.col(p).setZero();
            log::warn("column " + dm.column_names[p] + " has zero norm; excluded from the support search");
        } else {
            np.matrix.col(p) /= nrm;
        }
    }
    Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<long>(target.size()));
    np.target_norm = y.norm();
    if (!(np.target_norm > 0.0)) throw DataError("regression target has zero norm");
    np.target = y / np.target_norm;
    return np;
}

std::string format_coefficient(double c) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4e", std::fabs(c));
    std::string s(buf);
    auto e = s.find('e');
    std::string mant = s.substr(0, e);
    int expo = std::stoi(s.substr(e + 1));
    return std::string(std::signbit(c) && c != 0.0 ? "−" : "+") + mant + "e" + std::to_string(expo);
}

std::string monomial_name(const TermSpec& term, std::span<const std::string> features) {
    std::string out;
    for (std::size_t f = 0; f < term.exponents.size(); ++f) {
        int e = term.exponents[f];
        if (e == 0) continue;
        if (!out.empty()) out += "·";
        out += features[f];
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out.empty() ? "1" : out;
}

std::string term_to_string(const TermSpec& term, std::span<const std::string> features, double coefficient) {
    std::string out = format_coefficient(coefficient);
    if (term.degree() > 0) out += "·" + monomial_name(term, features);
    return out;
}

} // namespace govdisc
