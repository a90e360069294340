#include "govdisc/sparsereg.hpp"

#include "govdisc/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>

namespace govdisc {

void HyperParams::validate() const {
    if (k < 1) throw ConfigError("k must be >= 1 (got " + std::to_string(k) + ")");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw ConfigError("lambda2 must be finite and >= 0");
    if (!(big_m > 0.0)) throw ConfigError("big-M bound must be > 0");
    if (max_degree < 0) throw ConfigError("max degree must be >= 0");
}

std::size_t SupportVector::count() const {
    return static_cast<std::size_t>(std::count(gamma.begin(), gamma.end(), true));
}

std::vector<int> SupportVector::indices() const {
    std::vector<int> out;
    for (std::size_t p = 0; p < gamma.size(); ++p)
        if (gamma[p]) out.push_back(static_cast<int>(p));
    return out;
}

SupportVector SupportVector::from_indices(std::size_t P, std::span<const int> idx) {
    SupportVector s;
    s.gamma.assign(P, false);
    for (int i : idx) s.gamma.at(static_cast<std::size_t>(i)) = true;
    return s;
}

double SparseModel::evaluate(std::span<const double> values) const {
    double acc = 0.0;
    for (std::size_t p = 0; p < xi.size(); ++p)
        if (gamma.gamma[p]) acc += xi[p] * monomial(values, library.term(p).exponents);
    return acc;
}

SparseModel make_model(std::vector<std::string> features, int max_degree,
                       const std::vector<std::pair<std::vector<int>, double>>& terms) {
    SparseModel m;
    m.library = build_library(std::move(features), max_degree);
    m.gamma.gamma.assign(m.library.size(), false);
    m.xi.assign(m.library.size(), 0.0);
    for (const auto& [exps, c] : terms) {
        long p = m.library.find(exps);
        if (p < 0) throw ConfigError("term is not part of the library");
        m.gamma.gamma[p] = true;
        m.xi[p] = c;
    }
    m.hp.k = static_cast<int>(terms.size());
    m.hp.max_degree = max_degree;
    return m;
}

// ---------------------------------------------------------------- objective

SubsetObjective::SubsetObjective(const NormalizedProblem& problem, double lambda2)
    : sqrt_lambda_(std::sqrt(lambda2)) {
    const auto& a = problem.matrix;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const long r = std::min(a.rows(), a.cols());
    r_ = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::VectorXd qty = qr.householderQ().adjoint() * problem.target;
    z_ = qty.head(r);
    outside_ = qty.tail(a.rows() - r).squaredNorm();
}

double SubsetObjective::operator()(std::span<const int> cols) const {
    const long m = static_cast<long>(cols.size());
    const long r = r_.rows();
    if (m == 0) return outside_ + z_.squaredNorm();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(r + m, m);
    for (long j = 0; j < m; ++j) {
        b.col(j).head(r) = r_.col(cols[j]);
        b(r + j, j) = sqrt_lambda_;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r + m);
    rhs.head(r) = z_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::VectorXd q = qr.householderQ().adjoint() * rhs;
    const long rank = qr.rank();
    return outside_ + q.tail(r + m - rank).squaredNorm();
}

// ---------------------------------------------------------------- search

namespace {

double tie_tolerance(double best) { return kTieRelative * std::fabs(best) + kTieAbsolute; }

double binomial(long n, long k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (long i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(c);
}

// Combination at lexicographic rank `rank` of k items out of n.
std::vector<int> unrank(std::uint64_t rank, int n, int k) {
    std::vector<int> out;
    int x = 0;
    for (int slot = 0; slot < k; ++slot) {
        for (;; ++x) {
            auto block = static_cast<std::uint64_t>(binomial(n - x - 1, k - slot - 1));
            if (rank < block) break;
            rank -= block;
        }
        out.push_back(x++);
    }
    return out;
}

bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return false;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

// Picks the lexicographically smallest tuple among those tied with the best.
struct Candidate {
    double j;
    std::vector<int> idx; // positions into the active list
};

std::pair<std::vector<int>, double> pick(const std::vector<Candidate>& cands) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::min(best, c.j);
    const double cut = best + tie_tolerance(best);
    const Candidate* win = nullptr;
    for (const auto& c : cands)
        if (c.j <= cut && (!win || c.idx < win->idx)) win = &c;
    return {win->idx, win->j};
}

std::vector<int> map_columns(std::span<const int> pos, const std::vector<int>& active) {
    std::vector<int> out(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) out[i] = active[pos[i]];
    return out;
}

SupportSolution exhaustive(const SubsetObjective& obj, const std::vector<int>& active, int k, Execution exec) {
    const int m = static_cast<int>(active.size());
    const auto total = static_cast<std::uint64_t>(binomial(m, k));
    std::vector<double> values(total);

    auto run_chunk = [&](std::uint64_t begin, std::uint64_t end) {
        if (begin >= end) return;
        auto c = unrank(begin, m, k);
        std::vector<int> cols(k);
        for (std::uint64_t r = begin; r < end; ++r) {
            for (int i = 0; i < k; ++i) cols[i] = active[c[i]];
            values[r] = obj(cols);
            next_combination(c, m);
        }
    };

    if (exec == Execution::Serial) {
        run_chunk(0, total);
    } else {
        const long chunks = std::max<long>(1, static_cast<long>(thread_count()) * 8);
        const std::uint64_t step = (total + chunks - 1) / chunks;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
        for (long ch = 0; ch < chunks; ++ch)
            run_chunk(std::min(total, ch * step), std::min(total, (ch + 1) * step));
    }

    // First minimum in enumeration order is the lex-smallest among exact ties;
    // the tolerance pass below widens that to near-ties.
    double best = std::numeric_limits<double>::infinity();
    for (double v : values) best = std::min(best, v);
    const double cut = best + tie_tolerance(best);
    std::uint64_t win = 0;
    while (!(values[win] <= cut)) ++win;

    SupportSolution sol;
    sol.objective = values[win];
    sol.evaluated = total;
    sol.used = SolverMethod::Exhaustive;
    sol.support = SupportVector::from_indices(static_cast<std::size_t>(active.back() + 1),
                                              map_columns(unrank(win, m, k), active));
    return sol;
}

struct Node {
    double bound;
    std::vector<int> chosen; // positions
    int next;                // first undecided position
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.chosen > b.chosen;
    }
};

SupportSolution branch_and_bound(const SubsetObjective& obj, const std::vector<int>& active, int k,
                                 std::uint64_t max_nodes) {
    const int m = static_cast<int>(active.size());
    std::uint64_t evaluated = 0;
    auto eval = [&](const std::vector<int>& pos) {
        ++evaluated;
        auto cols = map_columns(pos, active);
        return obj(cols);
    };
    auto relaxed = [&](const std::vector<int>& chosen, int next) {
        std::vector<int> pos = chosen;
        for (int j = next; j < m; ++j) pos.push_back(j);
        return eval(pos);
    };

    double incumbent = std::numeric_limits<double>::infinity();
    std::vector<Candidate> leaves;
    auto prune_level = [&] {
        // Slightly looser than the tie cut so roundoff in bounds never hides a tie.
        return std::isinf(incumbent) ? incumbent : (incumbent + tie_tolerance(incumbent)) * (1.0 + 1e-9) + 1e-13;
    };
    auto add_leaf = [&](std::vector<int> pos, double j) {
        if (j <= prune_level()) leaves.push_back({j, std::move(pos)});
        incumbent = std::min(incumbent, j);
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push({relaxed({}, 0), {}, 0});
    std::uint64_t nodes = 0;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound > prune_level()) break;
        if (max_nodes && ++nodes > max_nodes)
            throw NumericalError("branch-and-bound node budget of " + std::to_string(max_nodes) + " exhausted");

        const int have = static_cast<int>(node.chosen.size());
        const int left = m - node.next;
        if (have + left == k) {
            // Relaxed superset is exactly the leaf.
            std::vector<int> pos = node.chosen;
            for (int j = node.next; j < m; ++j) pos.push_back(j);
            add_leaf(std::move(pos), node.bound);
            continue;
        }
        // include next
        {
            std::vector<int> chosen = node.chosen;
            chosen.push_back(node.next);
            if (have + 1 == k) {
                add_leaf(chosen, eval(chosen));
            } else {
                open.push({node.bound, std::move(chosen), node.next + 1});
            }
        }
        // exclude next (still room for k)
        if (have + left - 1 >= k) {
            double b = relaxed(node.chosen, node.next + 1);
            if (b <= prune_level()) open.push({b, node.chosen, node.next + 1});
        }
    }

    auto [pos, j] = pick(leaves);
    SupportSolution sol;
    sol.objective = j;
    sol.evaluated = evaluated;
    sol.used = SolverMethod::BranchAndBound;
    sol.support = SupportVector::from_indices(static_cast<std::size_t>(active.back() + 1), map_columns(pos, active));
    return sol;
}

} // namespace

SupportSolution solve_support(const NormalizedProblem& problem, const HyperParams& hp, const SolverOptions& opts) {
    hp.validate();
    const auto active = problem.active_columns();
    const std::size_t P = problem.excluded.size();
    if (static_cast<std::size_t>(hp.k) > active.size())
        throw ConfigError("k = " + std::to_string(hp.k) + " exceeds the " + std::to_string(active.size()) +
                          " usable library columns");

    SubsetObjective obj(problem, hp.lambda2);
    SolverMethod method = opts.method;
    if (method == SolverMethod::Auto)
        method = binomial(static_cast<long>(active.size()), hp.k) <= kExhaustiveLimit ? SolverMethod::Exhaustive
                                                                                       : SolverMethod::BranchAndBound;
    SupportSolution sol = method == SolverMethod::Exhaustive
                              ? exhaustive(obj, active, hp.k, opts.exec)
                              : branch_and_bound(obj, active, hp.k, opts.max_nodes);
    sol.support.gamma.resize(P, false);
    return sol;
}

std::vector<double> refit_least_squares(const DesignMatrix& dm, std::span<const double> target,
                                        const SupportVector& gamma, RefitInfo* info) {
    if (target.size() != dm.rows()) throw DataError("target length does not match design matrix rows");
    if (gamma.gamma.size() != dm.cols()) throw ConfigError("support length does not match library size");
    const auto idx = gamma.indices();
    const long n = static_cast<long>(dm.rows());
    const long k = static_cast<long>(idx.size());
    std::vector<double> xi(dm.cols(), 0.0);
    if (k == 0) return xi;
    if (n < k) throw NumericalError("refit needs more samples than selected terms");

    Eigen::MatrixXd a(n, k);
    Eigen::VectorXd scale(k);
    for (long j = 0; j < k; ++j) {
        a.col(j) = dm.values.col(idx[j]);
        scale(j) = a.col(j).norm();
        if (!(scale(j) > 0.0)) throw NumericalError("selected column " + dm.column_names[idx[j]] + " is identically zero");
        a.col(j) /= scale(j);
    }
    Eigen::Map<const Eigen::VectorXd> y(target.data(), n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double cond = diag(k - 1) > 0.0 ? diag(0) / diag(k - 1) : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g", cond);
        throw NumericalError(std::string("selected columns are rank deficient (condition estimate ") + buf + ")");
    }
    Eigen::VectorXd sol = qr.solve(y);
    for (long j = 0; j < k; ++j) xi[idx[j]] = sol(j) / scale(j);
    if (info) {
        info->condition_estimate = cond;
        info->residual_norm = (y - a * sol).norm();
    }
    return xi;
}

SparseModel discover(const DesignMatrix& dm, std::span<const double> target, const HyperParams& hp,
                     const SolverOptions& opts) {
    hp.validate();
    const auto t0 = std::chrono::steady_clock::now();
    NormalizedProblem np = normalize_columns(dm, target);
    SupportSolution sol = solve_support(np, hp, opts);
    RefitInfo info;
    auto xi = refit_least_squares(dm, target, sol.support, &info);

    SparseModel m;
    m.library = dm.library;
    m.gamma = sol.support;
    m.xi = std::move(xi);
    m.hp = hp;
    m.diag.stage1_objective = sol.objective;
    m.diag.stage2_residual_norm = info.residual_norm;
    m.diag.condition_estimate = info.condition_estimate;
    for (std::size_t p = 0; p < np.excluded.size(); ++p)
        if (np.excluded[p]) m.diag.excluded.push_back(static_cast<int>(p));
    m.diag.solver = sol.used == SolverMethod::Exhaustive ? "exhaustive" : "branch-and-bound";
    m.diag.supports_evaluated = sol.evaluated;
    m.diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (int p : m.gamma.indices()) {
        if (std::fabs(m.xi[p]) > hp.big_m) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "big-M violation: coefficient of %s is %.6g, |xi| > M = %g",
                          dm.column_names[p].c_str(), m.xi[p], hp.big_m);
            throw BigMViolation(buf);
        }
    }
    return m;
}

TuneResult tune_k(std::span<const HyperParams> candidates, const std::function<double(const HyperParams&)>& score) {
    if (candidates.empty()) throw ConfigError("no k candidates to tune");
    TuneResult res;
    if (candidates.size() == 1) {
        res.best = candidates.front();
        res.table.push_back({candidates.front(), true, std::numeric_limits<double>::quiet_NaN(), "not scored"});
        return res;
    }
    std::vector<HyperParams> sorted(candidates.begin(), candidates.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
    const KCandidate* best = nullptr;
    for (const auto& hp : sorted) {
        KCandidate c{hp, false, 0.0, {}};
        try {
            c.mape = score(hp);
            c.ok = std::isfinite(c.mape);
            if (!c.ok) c.failure = "non-finite score";
        } catch (const NumericalError& e) {
            c.failure = e.what();
        } catch (const ConfigError& e) {
            c.failure = e.what();
        }
        res.table.push_back(c);
    }
    for (const auto& c : res.table)
        if (c.ok && (!best || c.mape < best->mape)) best = &c;
    if (!best) {
        std::string msg = "every k candidate failed validation:";
        for (const auto& c : res.table) msg += " [k=" + std::to_string(c.hp.k) + ": " + c.failure + "]";
        throw ConfigError(msg);
    }
    res.best = best->hp;
    return res;
}

std::string fit_report(const SparseModel& model, const std::string& title, const TuneResult* tuning) {
    std::ostringstream os;
    char buf[256];
    os << "fit report: " << title << "\n";
    os << "library: " << model.library.size() << " terms over {";
    for (std::size_t f = 0; f < model.library.features().size(); ++f)
        os << (f ? ", " : "") << model.library.features()[f];
    os << "}, degree " << model.library.max_degree() << "\n";
    std::snprintf(buf, sizeof buf, "hyperparameters: k=%d lambda2=%g M=%g\n", model.hp.k, model.hp.lambda2,
                  model.hp.big_m);
    os << buf;
    std::snprintf(buf, sizeof buf, "stage 1 (%s, %llu supports): objective %.10g\n", model.diag.solver.c_str(),
                  static_cast<unsigned long long>(model.diag.supports_evaluated), model.diag.stage1_objective);
    os << buf;
    std::snprintf(buf, sizeof buf, "stage 2 (least squares): residual norm %.10g, condition %.3g\n",
                  model.diag.stage2_residual_norm, model.diag.condition_estimate);
    os << buf;
    if (model.diag.seconds > 0.0) {
        std::snprintf(buf, sizeof buf, "solve time: %.3f s\n", model.diag.seconds);
        os << buf;
    }
    if (!model.diag.excluded.empty()) {
        os << "excluded zero-norm columns:";
        for (int p : model.diag.excluded) os << " " << model.library.term_name(p);
        os << "\n";
    }
    os << "selected terms:\n";
    for (int p : model.gamma.indices()) {
        std::snprintf(buf, sizeof buf, "  %-16s % .17g\n", model.library.term_name(p).c_str(), model.xi[p]);
        os << buf;
    }
    if (tuning) {
        os << "k tuning (validation MAPE %):\n";
        for (const auto& c : tuning->table) {
            if (c.ok)
                std::snprintf(buf, sizeof buf, "  k=%d  %.4f%s\n", c.hp.k, c.mape, c.hp == tuning->best ? "  *" : "");
            else
                std::snprintf(buf, sizeof buf, "  k=%d  failed: %s\n", c.hp.k, c.failure.c_str());
            os << buf;
        }
    }
    return os.str();
}

} // namespace govdisc
