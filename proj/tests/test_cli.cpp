#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the command-line surface: every documented exit code
// must be reachable. The binary path comes from MTCP_CLI_BIN (set by ctest).

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

std::string cli_bin() {
    const char* env = std::getenv("MTCP_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr, "MTCP_CLI_BIN must point at the mtcp binary");
    return env;
}

CliResult run_cli(const std::string& args) {
    const std::string cmd = cli_bin() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("gen writes a deterministic problem file") {
    const CliResult a = run_cli("gen --problem 1 --m 3 --n 6 --seed 1 --out /tmp/mtcp_a.mtcp");
    CHECK(a.exit_code == 0);
    const CliResult b = run_cli("gen --problem 1 --m 3 --n 6 --seed 1 --out /tmp/mtcp_b.mtcp");
    CHECK(b.exit_code == 0);
    CHECK(slurp("/tmp/mtcp_a.mtcp") == slurp("/tmp/mtcp_b.mtcp"));
    CHECK(slurp("/tmp/mtcp_a.mtcp").substr(0, 9) == "3 6 P1 1\n");
}

TEST_CASE("gen problem 3 embeds the sine tensor") {
    const CliResult r =
        run_cli("gen --problem 3 --m 3 --n 2 --seed 7 --out /tmp/mtcp_p3.mtcp --mtt /tmp/mtcp_p3.mtt");
    CHECK(r.exit_code == 0);
    // tensor entry (1,1,1) = 4 - |sin 3| = 3.8588799919401326...
    CHECK(slurp("/tmp/mtcp_p3.mtt").find("3.8588799919401326") != std::string::npos);
}

TEST_CASE("missing required flag exits 2") {
    CHECK(run_cli("gen --problem 1 --m 3 --n 6 --seed 1").exit_code == 2);
    CHECK(run_cli("gen --problem 1 --m 3 --n 6 --seed 1 --out /tmp/x --bogus 1").exit_code == 2);
    CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("solve converges on a generated instance and reports a record") {
    REQUIRE(run_cli("gen --problem 1 --m 3 --n 8 --seed 5 --out /tmp/mtcp_s.mtcp").exit_code == 0);
    const CliResult r = run_cli("solve --alg ldleqa --alpha 1.0 /tmp/mtcp_s.mtcp");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("status converged\n") == 0);
    CHECK(r.out.find("final_residual") != std::string::npos);

    SUBCASE("trace adds per-iteration lines") {
        const CliResult t = run_cli("solve --alg ldanewton --alpha 0.9 --trace /tmp/mtcp_s.mtcp");
        CHECK(t.exit_code == 0);
        CHECK(t.out.find("\ntrace 0 ") != std::string::npos);
    }
    SUBCASE("non-timing output is identical across runs") {
        auto strip_time = [](std::string s) {
            const auto pos = s.find("wall_time_s");
            REQUIRE(pos != std::string::npos);
            const auto end = s.find('\n', pos);
            s.erase(pos, end - pos + 1);
            return s;
        };
        const CliResult r2 = run_cli("solve --alg ldleqa --alpha 1.0 /tmp/mtcp_s.mtcp");
        CHECK(strip_time(r.out) == strip_time(r2.out));
    }
}

TEST_CASE("solve exit codes") {
    REQUIRE(run_cli("gen --problem 1 --m 3 --n 8 --seed 6 --out /tmp/mtcp_h.mtcp").exit_code == 0);
    SUBCASE("alpha out of range is a usage error") {
        CHECK(run_cli("solve --alg ldleqa --alpha 1.5 /tmp/mtcp_h.mtcp").exit_code == 2);
    }
    SUBCASE("strict theory rejects alpha = 1") {
        CHECK(run_cli("solve --alg ldleqa --alpha 1.0 --strict-theory /tmp/mtcp_h.mtcp").exit_code == 2);
    }
    SUBCASE("iteration cap exits 3") {
        CHECK(run_cli("solve --alg ldleqa --alpha 0.1 --max-iter 1 /tmp/mtcp_h.mtcp").exit_code == 3);
    }
    SUBCASE("unreadable file exits 1") {
        CHECK(run_cli("solve --alg ldleqa /tmp/does_not_exist.mtcp").exit_code == 1);
    }
}

TEST_CASE("bench writes a CSV with one row per (alpha, algorithm)") {
    const CliResult r = run_cli(
        "bench --problem 1 --m 3 --n 6 --alphas 0.5,1.0 --trials 5 --seed 1 --csv /tmp/mtcp_b.csv");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp("/tmp/mtcp_b.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows
    CHECK(csv.find("n,alpha,algorithm,") == 0);

    SUBCASE("rerun is byte-identical apart from the time column") {
        REQUIRE(run_cli("bench --problem 1 --m 3 --n 6 --alphas 0.5,1.0 --trials 5 --seed 1 "
                        "--csv /tmp/mtcp_b2.csv")
                    .exit_code == 0);
        auto strip_time = [](const std::string& text) {
            std::istringstream in(text);
            std::string line, outp;
            while (std::getline(in, line)) {
                int col = 0;
                std::string kept;
                std::stringstream ls(line);
                std::string field;
                while (std::getline(ls, field, ',')) {
                    if (col != 4) kept += field + ",";
                    ++col;
                }
                outp += kept + "\n";
            }
            return outp;
        };
        CHECK(strip_time(csv) == strip_time(slurp("/tmp/mtcp_b2.csv")));
    }
}

TEST_CASE("bench memory budget refusal exits 4") {
    const CliResult r = run_cli(
        "bench --problem 1 --m 3 --n 500 --alphas 1.0 --trials 1 --seed 1 --csv /tmp/mtcp_big.csv");
    CHECK(r.exit_code == 4);
}

TEST_CASE("bench jsonl dump emits one line per solve") {
    const CliResult r = run_cli(
        "bench --problem 2 --m 3 --n 5 --alphas 1.0 --trials 3 --seed 9 --csv - "
        "--trace-jsonl /tmp/mtcp_t.jsonl");
    CHECK(r.exit_code == 0);
    const std::string jl = slurp("/tmp/mtcp_t.jsonl");
    CHECK(std::count(jl.begin(), jl.end(), '\n') == 6);  // 3 trials x 2 algorithms
    CHECK(jl.find("\"algorithm\":\"ld_leqa\"") != std::string::npos);
    CHECK(jl.find("\"status\":\"converged\"") != std::string::npos);
}

TEST_CASE("verify accepts the witness and rejects a wrong point") {
    REQUIRE(run_cli("gen --problem 2 --m 3 --n 5 --seed 3 --out /tmp/mtcp_v.mtcp").exit_code == 0);
    const CliResult ok = run_cli("verify --in /tmp/mtcp_v.mtcp");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("strong_m_certificate pass") != std::string::npos);
    CHECK(ok.out.find("m_matrix_certificate pass") != std::string::npos);
    CHECK(ok.out.find("solution_check(witness) pass") != std::string::npos);

    std::ofstream bad("/tmp/mtcp_bad_x.txt");
    bad << "0 0 0 0 0\n";  // F(0) = -b < 0 somewhere for generated b
    bad.close();
    CHECK(run_cli("verify --in /tmp/mtcp_v.mtcp --x /tmp/mtcp_bad_x.txt").exit_code == 1);
}
