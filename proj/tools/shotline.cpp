#include "shotline/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace shotline;

namespace {

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument(what + ": expected a nonnegative integer, got '" + text + "'");
    return v;
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::string>& seed, unsigned jobs) {
    const auto cfg = load_experiment(config_path);
    RunOptions opt;
    opt.jobs = jobs;
    if (out) opt.out_dir = *out;
    if (seed) {
        opt.seed = parse_seed(*seed, "--seed");
        opt.seed_source = "cli";
    } else if (const char* env = std::getenv("SHOTLINE_SEED"); env && *env) {
        opt.seed = parse_seed(env, "SHOTLINE_SEED");
        opt.seed_source = "env";
    }
    const auto res = run_experiment(cfg, opt);
    std::cout << "J* = " << format_double(res.ground_truth.value) << " (" << to_string(res.ground_truth.mode)
              << "), seed " << res.seed << "\n";
    for (const auto& arm : res.arms) {
        std::cout << arm.name << ": " << arm.runs.size() << " replications";
        if (!arm.rows.empty())
            std::cout << ", final median regret " << format_double(arm.rows.back().median) << " [IQR "
                      << format_double(arm.rows.back().q25) << ", " << format_double(arm.rows.back().q75) << "]";
        std::cout << "\n";
    }
    std::cout << "wrote " << res.out_dir.string() << "\n";
    return 0;
}

int cmd_compare(const std::string& dir, const std::string& a, const std::string& b, long shots) {
    const auto c = compare_arms(dir, a, b, shots);
    std::cout << "arm,replications,median_regret\n"
              << a << "," << c.n_a << "," << format_double(c.median_a) << "\n"
              << b << "," << c.n_b << "," << format_double(c.median_b) << "\n"
              << "U = " << format_double(c.u) << ", p = " << format_double(c.p_value) << " (two-sided rank-sum)\n";
    return 0;
}

int cmd_regret(const std::string& path, double jstar) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    const auto run = read_jsonl(in, path);
    const auto curve = compute_regret(run.queries, jstar);
    std::cout << "shots,regret\n";
    for (std::size_t i = 0; i < curve.shots.size(); ++i)
        std::cout << curve.shots[i] << "," << (curve.regret[i] ? format_double(*curve.regret[i]) : "") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shot-budgeted Bayesian optimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir, seed;
    unsigned jobs = 0;
    auto* run = app.add_subcommand("run", "Run every arm of an experiment config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_option("--seed", seed, "Master seed (overrides SHOTLINE_SEED and the config)");
    run->add_option("--jobs", jobs, "Worker threads for replications (0 = all cores)");

    std::string dir, arm_a, arm_b;
    long at_shots = 0;
    auto* compare = app.add_subcommand("compare", "Rank-sum comparison of two arms at a shot checkpoint");
    compare->add_option("resultsdir", dir, "Results directory written by 'run'")->required();
    compare->add_option("armA", arm_a)->required();
    compare->add_option("armB", arm_b)->required();
    compare->add_option("--at-shots", at_shots, "Cumulative-shot checkpoint")->required();

    std::string run_log;
    double jstar = 0.0;
    auto* regret = app.add_subcommand("regret", "Print the simple-regret curve of one run log as CSV");
    regret->add_option("run", run_log, "Run log (JSONL)")->required();
    regret->add_option("--jstar", jstar, "Reference minimum J*")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, jobs);
        if (compare->parsed()) return cmd_compare(dir, arm_a, arm_b, at_shots);
        return cmd_regret(run_log, jstar);
    } catch (const std::exception& e) {
        std::cerr << "shotline: " << e.what() << "\n";
        return 1;
    }
}
