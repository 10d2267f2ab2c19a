// mtcp: generate, solve, benchmark and verify M-tensor complementarity
// problems from the command line.
//
// Exit codes: 0 success (solve: converged), 1 runtime/input error,
// 2 bad flags, 3 solve hit the iteration cap, 4 memory budget refusal.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mtcp/bench.hpp"
#include "mtcp/oracle.hpp"
#include "mtcp/problems.hpp"
#include "mtcp/solver.hpp"

namespace {

using namespace mtcp;

GeneratorSpec::Kind kind_from_int(int problem) {
    switch (problem) {
        case 1: return GeneratorSpec::Kind::P1;
        case 2: return GeneratorSpec::Kind::P2;
        case 3: return GeneratorSpec::Kind::P3;
        default: throw CLI::ValidationError("--problem must be 1, 2 or 3");
    }
}

ProblemInstance load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_mtcp(in);
}

std::vector<double> parse_alphas(const std::string& text) {
    std::vector<double> alphas;
    if (text.find(':') != std::string::npos) {  // a:b:step
        double a = 0, b = 0, step = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0)
            throw CLI::ValidationError("--alphas range must be a:b:step with step > 0");
        for (double v = a; v <= b + 1e-12; v += step) alphas.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) alphas.push_back(std::stod(tok));
    }
    if (alphas.empty()) throw CLI::ValidationError("--alphas is empty");
    for (double a : alphas)
        if (!(a > 0.0 && a <= 1.0)) throw CLI::ValidationError("alphas must lie in (0,1]");
    return alphas;
}

int cmd_gen(int problem, int m, int n, std::uint64_t seed, double eps, const std::string& out,
            const std::string& mtt_out) {
    GeneratorSpec spec{kind_from_int(problem), m, n, seed, eps};
    const ProblemInstance p = generate(spec);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    write_mtcp(os, p);
    if (!os.flush()) throw std::runtime_error("write failed for " + out);
    if (!mtt_out.empty()) {
        std::ofstream ts(mtt_out);
        if (!ts) throw std::runtime_error("cannot write " + mtt_out);
        write_mtt(ts, p.tensor);
        if (!ts.flush()) throw std::runtime_error("write failed for " + mtt_out);
    }
    return 0;
}

int cmd_solve(const std::string& input, const std::string& alg, const SolverConfig& cfg,
              bool with_trace) {
    const ProblemInstance p = load_problem(input);
    const SolveOutcome out = alg == "ldleqa" ? ld_leqa(p, cfg) : ld_a_newton(p, cfg);
    std::cout << format_record(out);
    if (with_trace) std::cout << format_trace(out);
    switch (out.status) {
        case SolveStatus::converged: return 0;
        case SolveStatus::iteration_cap: return 3;
        default:
            std::cerr << "solve error: " << out.error_message << '\n';
            return 1;
    }
}

void dump_jsonl(std::ostream& os, const TrialEvent& ev) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"trial\":%d,\"seed\":%llu,\"instance_hash\":\"%016llx\","
                  "\"algorithm\":\"%s\",\"alpha\":%.17g,\"status\":\"%s\","
                  "\"iterations\":%d,\"final_residual\":%.17g,"
                  "\"index_set_updates\":%d,\"K\":%d,\"wall_time_s\":%.6g}\n",
                  ev.trial, static_cast<unsigned long long>(ev.instance_seed),
                  static_cast<unsigned long long>(ev.instance_hash), to_string(ev.algorithm),
                  ev.alpha, to_string(ev.outcome.status), ev.outcome.iterations,
                  ev.outcome.final_residual, ev.outcome.index_set_updates,
                  ev.outcome.total_epsilon_resolves, ev.outcome.wall_time_s);
    os << buf;
}

int cmd_bench(int problem, int m, const std::vector<int>& ns, const std::string& alphas_text,
              int trials, std::uint64_t seed, double eps, double eta, int max_iter, int jobs,
              const std::vector<std::string>& algs, const std::string& csv_out,
              const std::string& jsonl_out) {
    std::vector<Algorithm> algorithms;
    for (const std::string& a : algs) {
        if (a == "ldleqa")
            algorithms.push_back(Algorithm::ld_leqa);
        else if (a == "ldanewton")
            algorithms.push_back(Algorithm::ld_a_newton);
        else
            throw CLI::ValidationError("--algs entries must be ldleqa or ldanewton");
    }

    std::ofstream jsonl;
    TrialObserver observer;
    if (!jsonl_out.empty()) {
        jsonl.open(jsonl_out);
        if (!jsonl) throw std::runtime_error("cannot write " + jsonl_out);
        observer = [&jsonl](const TrialEvent& ev) { dump_jsonl(jsonl, ev); };
    }

    std::vector<SummaryRow> all_rows;
    for (int n : ns) {
        BenchSpec spec;
        spec.generator = {kind_from_int(problem), m, n, 0, eps};
        spec.alphas = parse_alphas(alphas_text);
        spec.trials = trials;
        spec.algorithms = algorithms;
        spec.base_seed = seed;
        spec.eta = eta;
        spec.max_iter = max_iter;
        spec.jobs = jobs;
        std::vector<SummaryRow> rows = run_bench(spec, observer);
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
    const std::string csv = emit_csv(all_rows);
    if (csv_out == "-") {
        std::cout << csv;
    } else {
        std::ofstream os(csv_out);
        if (!os) throw std::runtime_error("cannot write " + csv_out);
        os << csv;
        if (!os.flush()) throw std::runtime_error("write failed for " + csv_out);
    }
    return 0;
}

int cmd_verify(const std::string& input, const std::string& x_path, double tol) {
    const ProblemInstance p = load_problem(input);
    bool ok = true;

    const bool tensor_cert = strong_m_certificate(p.tensor);
    std::cout << "strong_m_certificate " << (tensor_cert ? "pass" : "fail") << '\n';
    ok = ok && tensor_cert;

    const MajorizationSplit split = majorization_split(p.tensor);
    const bool matrix_cert = m_matrix_certificate(DenseMatrix(p.tensor.dim, split.matrix));
    std::cout << "m_matrix_certificate " << (matrix_cert ? "pass" : "fail") << '\n';
    ok = ok && matrix_cert;

    RealVector x;
    std::string source;
    if (!x_path.empty()) {
        std::ifstream in(x_path);
        if (!in) throw std::runtime_error("cannot open " + x_path);
        x.resize(static_cast<std::size_t>(p.tensor.dim));
        for (auto& v : x)
            if (!(in >> v)) throw std::runtime_error("x file must hold n reals");
        source = "file";
    } else if (p.witness) {
        x = *p.witness;
        source = "witness";
    }
    if (!x.empty()) {
        const bool solves = verify_solution(p, x, tol);
        std::cout << "solution_check(" << source << ") " << (solves ? "pass" : "fail")
                  << " residual " << detail::format_shortest(residual(eval_F(p, x), x)) << '\n';
        ok = ok && solves;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"M-tensor complementarity problem toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a problem instance (.mtcp)");
    int g_problem = 1, g_m = 3, g_n = 10;
    std::uint64_t g_seed = 1;
    double g_eps = 0.01;
    std::string g_out, g_mtt;
    gen->add_option("--problem", g_problem, "problem family: 1, 2 or 3")->required();
    gen->add_option("--m", g_m, "tensor order (>= 2)")->required();
    gen->add_option("--n", g_n, "dimension (>= 1)")->required();
    gen->add_option("--seed", g_seed, "64-bit instance seed")->required();
    gen->add_option("--eps", g_eps, "margin in s = (1+eps) max row sum (P1/P2)");
    gen->add_option("--out", g_out, "output .mtcp path")->required();
    gen->add_option("--mtt", g_mtt, "also write the bare tensor (.mtt)");

    // solve
    auto* solve = app.add_subcommand("solve", "solve an .mtcp instance");
    std::string s_alg = "ldleqa", s_init = "zero", s_input;
    SolverConfig s_cfg;
    bool s_trace = false;
    solve->add_option("--alg", s_alg, "ldleqa or ldanewton")
        ->check(CLI::IsMember({"ldleqa", "ldanewton"}));
    solve->add_option("--alpha", s_cfg.alpha, "step parameter in (0,1]");
    solve->add_option("--eta", s_cfg.eta, "stopping tolerance");
    solve->add_option("--max-iter", s_cfg.max_iter, "iteration cap");
    solve->add_option("--init", s_init, "initial point strategy: zero or ldeq")
        ->check(CLI::IsMember({"zero", "ldeq"}));
    solve->add_option("--rho", s_cfg.rho_fallback, "shrink factor for the ldeq fallback");
    solve->add_option("--resolve-cap", s_cfg.epsilon_resolve_cap,
                      "eps=0 re-solve cap per iteration (ldanewton)");
    solve->add_flag("--strict-theory", s_cfg.strict_theory, "require alpha < 1");
    solve->add_flag("--trace", s_trace, "dump one line per iteration");
    solve->add_option("input", s_input, "problem file (.mtcp)")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark sweep, write CSV");
    int b_problem = 1, b_m = 3, b_trials = 100, b_max_iter = 1000, b_jobs = 1;
    std::uint64_t b_seed = 1;
    double b_eps = 0.01, b_eta = 1e-8;
    std::string b_ns = "10", b_alphas = "1.0", b_csv, b_jsonl;
    std::vector<std::string> b_algs{"ldleqa", "ldanewton"};
    bench->add_option("--problem", b_problem, "problem family: 1, 2 or 3")->required();
    bench->add_option("--m", b_m, "tensor order")->required();
    bench->add_option("--n", b_ns, "dimension(s), comma separated")->required();
    bench->add_option("--alphas", b_alphas, "comma list or a:b:step")->required();
    bench->add_option("--trials", b_trials, "trials per row");
    bench->add_option("--seed", b_seed, "base seed; trial t uses seed+t");
    bench->add_option("--eps", b_eps, "generator margin (P1/P2)");
    bench->add_option("--eta", b_eta, "stopping tolerance");
    bench->add_option("--max-iter", b_max_iter, "iteration cap");
    bench->add_option("--jobs", b_jobs, "parallel trial workers");
    bench->add_option("--algs", b_algs, "subset of {ldleqa, ldanewton}")->delimiter(',');
    bench->add_option("--csv", b_csv, "CSV output path, or - for stdout")->required();
    bench->add_option("--trace-jsonl", b_jsonl, "per-solve JSON lines dump");

    // verify
    auto* verify = app.add_subcommand("verify", "check certificates and a solution");
    std::string v_in, v_x;
    double v_tol = 1e-6;
    verify->add_option("--in", v_in, "problem file (.mtcp)")->required();
    verify->add_option("--x", v_x, "candidate solution file (n reals); default: the witness");
    verify->add_option("--tol", v_tol, "verification tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(g_problem, g_m, g_n, g_seed, g_eps, g_out, g_mtt);
        if (solve->parsed()) {
            s_cfg.init_strategy =
                s_init == "ldeq" ? InitStrategy::lower_dim_equation : InitStrategy::zero;
            s_cfg.validate();  // bad numeric flags are usage errors
            return cmd_solve(s_input, s_alg, s_cfg, s_trace);
        }
        if (bench->parsed()) {
            std::vector<int> ns;
            std::stringstream ss(b_ns);
            std::string tok;
            while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
            return cmd_bench(b_problem, b_m, ns, b_alphas, b_trials, b_seed, b_eps, b_eta,
                             b_max_iter, b_jobs, b_algs, b_csv, b_jsonl);
        }
        return cmd_verify(v_in, v_x, v_tol);
    } catch (const MemoryBudgetError& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 4;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
}
