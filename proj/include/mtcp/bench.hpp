#pragma once

// Benchmark trial runner: per (n, alpha, algorithm) averages over seeded
// trials. Trial t uses instance seed base_seed + t, and the same instance is
// shared by every (algorithm, alpha) pair so rows are comparable.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mtcp/problems.hpp"
#include "mtcp/solver.hpp"

namespace mtcp {

enum class Algorithm { ld_leqa, ld_a_newton };

inline const char* to_string(Algorithm a) {
    return a == Algorithm::ld_leqa ? "ld_leqa" : "ld_a_newton";
}

struct MemoryBudgetError : std::runtime_error {
    int m, n;
    MemoryBudgetError(int m_, int n_, std::size_t need, std::size_t budget)
        : std::runtime_error("tensor for (m=" + std::to_string(m_) + ", n=" + std::to_string(n_) +
                             ") needs " + std::to_string(need / (1024 * 1024)) +
                             " MB, over the " + std::to_string(budget / (1024 * 1024)) +
                             " MB budget"),
          m(m_), n(n_) {}
};

/// Default 512 MB; MTCP_MEM_BUDGET_MB overrides.
inline std::size_t default_mem_budget() {
    if (const char* env = std::getenv("MTCP_MEM_BUDGET_MB")) {
        const long mb = std::strtol(env, nullptr, 10);
        if (mb > 0) return static_cast<std::size_t>(mb) * 1024 * 1024;
    }
    return std::size_t{512} * 1024 * 1024;
}

struct BenchSpec {
    GeneratorSpec generator;  // template; seed is overridden per trial
    std::vector<double> alphas;
    int trials = 1;
    std::vector<Algorithm> algorithms{Algorithm::ld_leqa, Algorithm::ld_a_newton};
    std::uint64_t base_seed = 1;
    double eta = 1e-8;
    int max_iter = 1000;
    int jobs = 1;
    bool record_detail = false;  // forwarded to the solvers, for invariant audits
    std::size_t mem_budget_bytes = default_mem_budget();

    void validate() const {
        generator.validate();
        detail::require(trials >= 1, "BenchSpec: trials must be >= 1");
        detail::require(!alphas.empty(), "BenchSpec: at least one alpha");
        for (double a : alphas)
            detail::require(a > 0.0 && a <= 1.0, "BenchSpec: alphas must lie in (0,1]");
        detail::require(!algorithms.empty(), "BenchSpec: at least one algorithm");
        detail::require(jobs >= 1, "BenchSpec: jobs must be >= 1");
    }
};

struct SummaryRow {
    int n = 0;
    double alpha = 0.0;
    std::string algorithm;
    double avg_iter = 0.0;
    double avg_time_s = 0.0;
    double avg_index_updates = 0.0;
    double avg_residual = 0.0;
    double avg_K = 0.0;
    int fail_count = 0;
};

/// One solve inside a sweep, reported to the observer in deterministic
/// (trial, alpha, algorithm) order regardless of the worker count.
struct TrialEvent {
    int trial;
    std::uint64_t instance_seed;
    std::uint64_t instance_hash;
    Algorithm algorithm;
    double alpha;
    const SolveOutcome& outcome;
};

using TrialObserver = std::function<void(const TrialEvent&)>;

namespace detail {

struct TrialStats {
    bool converged = false;
    int iterations = 0;
    int index_set_updates = 0;
    int total_epsilon_resolves = 0;
    double final_residual = 0.0;
    double wall_time_s = 0.0;
};

inline SolveOutcome run_one(const ProblemInstance& p, Algorithm alg, const SolverConfig& cfg) {
    return alg == Algorithm::ld_leqa ? ld_leqa(p, cfg) : ld_a_newton(p, cfg);
}

}  // namespace detail

inline std::vector<SummaryRow> run_bench(const BenchSpec& spec,
                                         const TrialObserver& observer = {}) {
    spec.validate();
    const std::size_t need = detail::checked_pow(spec.generator.n, spec.generator.m) * sizeof(double);
    if (need > spec.mem_budget_bytes)
        throw MemoryBudgetError(spec.generator.m, spec.generator.n, need, spec.mem_budget_bytes);

    const std::size_t combos = spec.alphas.size() * spec.algorithms.size();
    std::vector<detail::TrialStats> stats(static_cast<std::size_t>(spec.trials) * combos);
    std::vector<std::uint64_t> hashes(static_cast<std::size_t>(spec.trials));

    auto run_trial = [&](int t, const TrialObserver& sink) {
        GeneratorSpec gs = spec.generator;
        gs.seed = spec.base_seed + static_cast<std::uint64_t>(t);
        const ProblemInstance inst = generate(gs);
        hashes[static_cast<std::size_t>(t)] = instance_hash(inst);
        std::size_t slot = static_cast<std::size_t>(t) * combos;
        for (double alpha : spec.alphas) {
            for (Algorithm alg : spec.algorithms) {
                SolverConfig cfg;
                cfg.alpha = alpha;
                cfg.eta = spec.eta;
                cfg.max_iter = spec.max_iter;
                cfg.record_detail = spec.record_detail;
                const SolveOutcome out = detail::run_one(inst, alg, cfg);
                stats[slot++] = {out.status == SolveStatus::converged, out.iterations,
                                 out.index_set_updates, out.total_epsilon_resolves,
                                 out.final_residual, out.wall_time_s};
                if (sink)
                    sink(TrialEvent{t, gs.seed, hashes[static_cast<std::size_t>(t)], alg, alpha, out});
            }
        }
    };

    if (spec.jobs <= 1 || spec.trials == 1) {
        for (int t = 0; t < spec.trials; ++t) run_trial(t, observer);
    } else {
        // Workers own disjoint trial stripes; observer events are deferred so
        // callers always see trial order. Everything but wall time is
        // reproducible at any job count.
        const int workers = std::min(spec.jobs, spec.trials);
        std::vector<std::vector<std::pair<int, SolveOutcome>>> deferred(
            observer ? static_cast<std::size_t>(spec.trials) : 0);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < spec.trials; t += workers) {
                    if (observer) {
                        int idx = 0;
                        run_trial(t, [&](const TrialEvent& ev) {
                            deferred[static_cast<std::size_t>(t)].emplace_back(idx++, ev.outcome);
                        });
                    } else {
                        run_trial(t, {});
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (observer) {
            for (int t = 0; t < spec.trials; ++t) {
                std::size_t i = 0;
                for (double alpha : spec.alphas)
                    for (Algorithm alg : spec.algorithms) {
                        const SolveOutcome& out = deferred[static_cast<std::size_t>(t)][i++].second;
                        observer(TrialEvent{t, spec.base_seed + static_cast<std::uint64_t>(t),
                                            hashes[static_cast<std::size_t>(t)], alg, alpha, out});
                    }
            }
        }
    }

    // Aggregate in trial-index order; averages cover converged trials only.
    std::vector<SummaryRow> rows;
    std::size_t combo = 0;
    for (double alpha : spec.alphas) {
        for (Algorithm alg : spec.algorithms) {
            SummaryRow row;
            row.n = spec.generator.n;
            row.alpha = alpha;
            row.algorithm = to_string(alg);
            double it = 0, time = 0, upd = 0, res = 0, kk = 0;
            int ok = 0;
            for (int t = 0; t < spec.trials; ++t) {
                const detail::TrialStats& st = stats[static_cast<std::size_t>(t) * combos + combo];
                if (!st.converged) {
                    ++row.fail_count;
                    continue;
                }
                ++ok;
                it += st.iterations;
                time += st.wall_time_s;
                upd += st.index_set_updates;
                res += st.final_residual;
                kk += st.total_epsilon_resolves;
            }
            if (ok > 0) {
                row.avg_iter = it / ok;
                row.avg_time_s = time / ok;
                row.avg_index_updates = upd / ok;
                row.avg_residual = res / ok;
                row.avg_K = kk / ok;
            }
            rows.push_back(std::move(row));
            ++combo;
        }
    }
    return rows;
}

namespace detail {

inline std::string format_sig6(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace detail

/// CSV with the fixed header, rows sorted by (n, alpha, algorithm), reals at
/// 6 significant digits.
inline std::string emit_csv(std::vector<SummaryRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.n != b.n) return a.n < b.n;
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.algorithm < b.algorithm;
    });
    std::ostringstream os;
    os << "n,alpha,algorithm,avg_iter,avg_time_s,avg_index_updates,avg_residual,avg_K,fail_count\n";
    for (const SummaryRow& r : rows) {
        os << r.n << ',' << detail::format_sig6(r.alpha) << ',' << r.algorithm << ','
           << detail::format_sig6(r.avg_iter) << ',' << detail::format_sig6(r.avg_time_s) << ','
           << detail::format_sig6(r.avg_index_updates) << ',' << detail::format_sig6(r.avg_residual)
           << ',' << detail::format_sig6(r.avg_K) << ',' << r.fail_count << '\n';
    }
    return os.str();
}

}  // namespace mtcp
