#include "cobra/analyzer.hpp"
#include "cobra/client.hpp"
#include "cobra/oracle.hpp"
#include "cobra/report.hpp"
#include "cobra/scenario.hpp"
#include "cobra/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace cobra;
using nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct SimOpts {
    std::vector<std::string> files;
    int jobs = 1;
    std::string out_dir;
    bool quiet = false;
};

int sim_run(const SimOpts& o) {
    std::vector<Scenario> scenarios;
    for (const auto& f : o.files) {
        try {
            Scenario s = load_scenario(f);
            apply_seed_override(s);
            resolve(s);
            scenarios.push_back(std::move(s));
        } catch (const std::exception& e) {
            std::cerr << f << ": " << e.what() << "\n";
            return kUsage;
        }
    }
    std::vector<RunResult> results(scenarios.size());
    std::vector<std::string> errors(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                results[i] = run_scenario(scenarios[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kPass;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << scenarios[i].name << ": " << errors[i] << "\n";
            code = kUsage;
            continue;
        }
        const auto& r = results[i];
        const json rep = report_json(r);
        if (!o.out_dir.empty()) {
            std::filesystem::create_directories(o.out_dir);
            const auto base = std::filesystem::path(o.out_dir) / r.scenario.name;
            std::ofstream(base.string() + ".report.json") << rep.dump(2) << "\n";
            std::ofstream(base.string() + ".transcript.jsonl") << transcript_jsonl(r);
            for (std::size_t v = 0; v < r.finalization_logs.size(); ++v)
                std::ofstream(base.string() + ".final." + std::to_string(v) + ".jsonl")
                    << finalization_jsonl(r, static_cast<ValidatorId>(v));
        } else if (!o.quiet && scenarios.size() == 1) {
            std::cout << rep.dump(2) << "\n";
        }
        std::cerr << (r.passed ? "PASS " : "FAIL ") << r.scenario.name;
        if (!r.violated.empty()) {
            std::cerr << " violated:";
            for (const auto& v : r.violated) std::cerr << " " << v;
        }
        std::cerr << "\n";
        if (!r.passed && code == kPass) code = kFail;
    }
    return code;
}

int oracle_sweep(int f_max, const std::string& rule_s) {
    auto rule = parse_rule(rule_s);
    if (!rule || f_max < 1) {
        std::cerr << "bad rule or f-max\n";
        return kUsage;
    }
    std::cout << "f,i,argmax_m,bound_over_d,regime\n";
    const Coins d = 1;
    int bad = 0;
    for (int f = 1; f <= f_max; ++f)
        for (int i = 0; i <= f; ++i) {
            const auto r = max_double_spend({f, i, *rule, d});
            if (r.value > Rational(d)) ++bad;
            std::cout << f << "," << i << "," << r.argmax_m << "," << rational_string(r.value) << "," << regime_name(r.regime)
                      << "\n";
        }
    return bad ? kFail : kPass;
}

int oracle_threshold(int f_max) {
    std::cout << "f,n,votes,fraction,unique\n";
    for (int f = 1; f <= f_max; ++f) {
        const auto t = strongest_threshold_votes(f);
        const bool uniq = f <= 12 ? strongest_chain_unique(f, strongest_need(f)) : true;
        std::cout << f << "," << t.n << "," << t.votes << "," << rational_string(t.fraction) << ","
                  << (f <= 12 ? (uniq ? "yes" : "no") : "skipped") << "\n";
    }
    return kPass;
}

int proof_verify(const std::string& path, int f) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return kUsage;
    }
    InclusionProof p;
    SystemConfig cfg = make_config(f, 0, 0, 100, 2, 10, 29);
    try {
        json j;
        in >> j;
        if (j.contains("config")) {
            const auto& c = j.at("config");
            cfg = make_config(c.value("f", f), 0, 0, 100, 2, 10, 29);
            cfg.n = c.value("n", cfg.n);
            cfg.q = c.value("q", cfg.q);
        }
        p = proof_from_json(j.contains("proof") ? j.at("proof") : j);
    } catch (const std::exception& e) {
        std::cerr << "bad proof: " << e.what() << "\n";
        return kUsage;
    }
    const auto v = verify_proof(p, cfg);
    std::cout << verdict_name(v) << "\n";
    return v == ProofVerdict::Accept ? kPass : kFail;
}

struct TraceOpts {
    std::string path;
    int n = 0;
    int f = -1;
    int window = 1;
    double delta_star = -1;
    std::string format = "auto";
    double stake = -1;
    double daily = 0;
    double block_time = 6;
    double capacity_delta_star = 0;
};

int trace_analyze(const TraceOpts& o) {
    if (o.n <= 0) {
        std::cerr << "--n is required\n";
        return kUsage;
    }
    const int f = o.f >= 0 ? o.f : (o.n - 1) / 3;
    TraceFormat fmt = TraceFormat::Csv;
    if (o.format == "jsonl" || (o.format == "auto" && std::filesystem::path(o.path).extension() == ".jsonl"))
        fmt = TraceFormat::Jsonl;
    try {
        const auto trace = ingest(o.path, fmt, o.n);
        ClassifyOptions co;
        co.window_blocks = o.window;
        if (o.delta_star > 0) co.delta_star = o.delta_star;
        const auto c = classify(trace, o.n, f, co);
        json streaks = json::array();
        for (const auto& s : c.report.weak_streaks)
            streaks.push_back({{"start_height", s.start_height}, {"length", s.length}, {"volume", s.volume},
                               {"duration", s.duration}});
        json out = {{"blocks", c.report.blocks},
                    {"strongest_blocks", c.report.strongest_blocks},
                    {"fraction_strongest", c.report.fraction_strongest},
                    {"max_streak_length", c.report.max_streak_length},
                    {"max_streak_volume", c.report.max_streak_volume},
                    {"weak_streaks", streaks}};
        if (o.stake > 0) {
            const double ds = o.capacity_delta_star > 0 ? o.capacity_delta_star : (o.delta_star > 0 ? o.delta_star : 0);
            const auto v = capacity(c.report, o.stake, o.daily, o.block_time, ds);
            out["capacity"] = {{"volume_per_delta_star", v.volume_per_delta_star},
                               {"feasible", v.feasible},
                               {"slack", v.slack},
                               {"sustainable_delta_star", v.sustainable_delta_star},
                               {"required_stake", v.required_stake},
                               {"weak_streak_seconds", v.weak_streak_seconds},
                               {"streaks_covered", v.streaks_covered}};
        }
        std::cout << out.dump(2) << "\n";
    } catch (const TraceError& e) {
        std::cerr << "trace error at line " << e.line << ": " << e.what() << "\n";
        return kUsage;
    }
    return kPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finality gadget simulator and verification tools"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "Scenario simulation");
    sim->require_subcommand(1);
    SimOpts so;
    auto* run = sim->add_subcommand("run", "Run one or more scenario files");
    run->add_option("scenarios", so.files, "Scenario JSON files")->required();
    run->add_option("--jobs,-j", so.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
    run->add_option("--out-dir,-o", so.out_dir, "Write report, transcript and finalization logs here");
    run->add_flag("--quiet,-q", so.quiet, "Only print PASS/FAIL lines");

    auto* oracle = app.add_subcommand("oracle", "Exact bound oracles");
    oracle->require_subcommand(1);
    int f_max = 20;
    std::string rule = "strong";
    auto* sweep = oracle->add_subcommand("sweep", "Bound/D for every f and i as CSV");
    sweep->add_option("--f-max", f_max, "Largest f");
    sweep->add_option("--rule", rule, "stake, strong or strongest");
    int thr_f_max = 20;
    auto* threshold = oracle->add_subcommand("threshold", "Strongest-chain vote threshold per f");
    threshold->add_option("--f-max", thr_f_max, "Largest f");

    auto* proof = app.add_subcommand("proof", "Client proofs");
    proof->require_subcommand(1);
    std::string proof_path;
    int proof_f = 2;
    auto* verify = proof->add_subcommand("verify", "Verify an inclusion proof");
    verify->add_option("proof", proof_path, "Proof JSON")->required();
    verify->add_option("--f", proof_f, "Fault bound used when the file has no config");

    auto* trace = app.add_subcommand("trace", "Participation traces");
    trace->require_subcommand(1);
    TraceOpts to;
    auto* analyze = trace->add_subcommand("analyze", "Classify blocks and report weak streaks");
    analyze->add_option("trace", to.path, "CSV or JSONL trace")->required();
    analyze->add_option("--n", to.n, "Validator count")->required();
    analyze->add_option("--f", to.f, "Fault bound, default (n-1)/3");
    analyze->add_option("--window", to.window, "Window in blocks");
    analyze->add_option("--delta-star", to.delta_star, "Time window in seconds (needs timestamps)");
    analyze->add_option("--format", to.format, "csv, jsonl or auto");
    analyze->add_option("--stake", to.stake, "Stake per validator for the capacity verdict");
    analyze->add_option("--daily-volume", to.daily, "Daily transferred volume");
    analyze->add_option("--block-time", to.block_time, "Seconds per block");
    analyze->add_option("--capacity-delta-star", to.capacity_delta_star, "Δ* in seconds for the capacity verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    if (*run) return sim_run(so);
    if (*sweep) return oracle_sweep(f_max, rule);
    if (*threshold) return oracle_threshold(thr_f_max);
    if (*verify) return proof_verify(proof_path, proof_f);
    if (*analyze) return trace_analyze(to);
    return kUsage;
}
