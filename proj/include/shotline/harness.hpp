#pragma once

#include "shotline/config.hpp"
#include "shotline/engine.hpp"
#include "shotline/objective.hpp"
#include "shotline/record_io.hpp"
#include "shotline/stats.hpp"
#include "shotline/svg.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace shotline {

/// Simple regret of one replication, one point per query. Points before the
/// first incumbent-eligible query (LSR low-shot phase) carry no regret.
struct RegretCurve {
    std::vector<long> shots;
    std::vector<std::optional<double>> regret;
};

template <class Query>
RegretCurve compute_regret(const std::vector<Query>& queries, double jstar) {
    require(std::isfinite(jstar), "compute_regret needs a finite reference minimum");
    RegretCurve c;
    c.shots.reserve(queries.size());
    c.regret.reserve(queries.size());
    for (const auto& q : queries) {
        c.shots.push_back(q.cumulative_shots);
        c.regret.push_back(q.incumbent_y ? std::optional<double>(*q.incumbent_y - jstar) : std::nullopt);
    }
    return c;
}

inline RegretCurve compute_regret(const RunRecord& r, double jstar) { return compute_regret(r.queries, jstar); }

/// Regret at a shot checkpoint: the incumbent after the last query with
/// B_k <= checkpoint.
inline std::optional<double> regret_at(const RegretCurve& c, long checkpoint) {
    std::optional<double> out;
    for (std::size_t i = 0; i < c.shots.size() && c.shots[i] <= checkpoint; ++i) out = c.regret[i];
    return out;
}

struct AggregateRow {
    long shots = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

/// Median and interquartile band across replications at every cumulative
/// shot count where all replications have a regret value.
inline std::vector<AggregateRow> aggregate(const std::vector<RegretCurve>& reps) {
    require(!reps.empty(), "aggregate needs at least one replication");
    std::vector<AggregateRow> rows;
    const std::size_t n = reps.front().shots.size();
    for (const auto& r : reps)
        require(r.shots == reps.front().shots, "replications disagree on the cumulative-shot axis");
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v;
        for (const auto& r : reps)
            if (r.regret[i]) v.push_back(*r.regret[i]);
        if (v.size() != reps.size()) continue;
        rows.push_back({reps.front().shots[i], quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75)});
    }
    return rows;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string rep_file_name(int rep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%03d.jsonl", rep);
    return buf;
}

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides the config
    std::optional<std::uint64_t> seed;             // overrides the config
    std::string seed_source = "config";
    unsigned jobs = 0;  // 0 = hardware concurrency
    bool write_svg = true;
};

struct ArmResult {
    std::string name;
    std::vector<RunRecord> runs;
    std::vector<RegretCurve> curves;
    std::vector<AggregateRow> rows;
};

struct ExperimentResult {
    std::filesystem::path out_dir;
    GroundTruth ground_truth;
    std::uint64_t seed = 0;
    std::vector<ArmResult> arms;
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(p.string() + ": cannot open for writing");
    out << s;
    if (!out.flush()) throw std::runtime_error(p.string() + ": write failed");
}

inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string s = "shots,median_regret,q25,q75\n";
    for (const auto& r : rows)
        s += std::to_string(r.shots) + "," + format_double(r.median) + "," + format_double(r.q25) + "," +
             format_double(r.q75) + "\n";
    return s;
}

inline std::string raw_csv(const std::vector<RegretCurve>& reps) {
    std::string s = "shots";
    for (std::size_t r = 0; r < reps.size(); ++r) {
        char buf[24];
        std::snprintf(buf, sizeof buf, ",rep_%03zu", r);
        s += buf;
    }
    s += "\n";
    for (std::size_t i = 0; i < reps.front().shots.size(); ++i) {
        s += std::to_string(reps.front().shots[i]);
        for (const auto& c : reps) s += "," + (c.regret[i] ? format_double(*c.regret[i]) : std::string());
        s += "\n";
    }
    return s;
}

inline Json ground_truth_json(const GroundTruth& g) {
    Json j;
    j["jstar"] = g.value;
    j["mode"] = std::string(to_string(g.mode));
    j["argmin"] = std::vector<double>(g.argmin.data(), g.argmin.data() + g.argmin.size());
    if (g.spectrum) {
        j["spectrum"] = {{"lowest", g.spectrum->lowest}, {"highest", g.spectrum->highest}};
    } else {
        j["spectrum"] = nullptr;
    }
    return j;
}

/// Runs task(i) for i in [0, count) on `jobs` threads; the first exception
/// is rethrown after all workers stop.
template <class Task>
void parallel_for(std::size_t count, unsigned jobs, Task&& task) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                task(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Replication r of every arm uses seed derive_seed(master, r), so arms that
/// differ only in name or label produce identical traces.
inline std::uint64_t replication_seed(std::uint64_t master, int rep) {
    return derive_seed(master, static_cast<std::uint64_t>(rep));
}

/// Runs every arm for R replications and writes
///   runs/<arm>/rep_NNN.jsonl, raw/<arm>.csv, aggregate/<arm>.csv,
///   regret.svg and manifest.json
/// under the output directory. Earlier outputs there are replaced.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
    namespace fs = std::filesystem;
    ExperimentResult res;
    res.out_dir = opt.out_dir ? *opt.out_dir : fs::path(cfg.output_dir);
    res.seed = opt.seed.value_or(cfg.seed);
    res.ground_truth = ground_truth_minimum(cfg.objective);

    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    res.arms.resize(cfg.arms.size());
    for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
        res.arms[a].name = cfg.arms[a].name;
        res.arms[a].runs.resize(reps);
    }
    detail::parallel_for(cfg.arms.size() * reps, opt.jobs, [&](std::size_t task) {
        const std::size_t a = task / reps;
        const int r = static_cast<int>(task % reps);
        res.arms[a].runs[static_cast<std::size_t>(r)] =
            run_bo(cfg.objective, cfg.arms[a].bo, replication_seed(res.seed, r));
    });

    std::error_code ec;
    fs::create_directories(res.out_dir, ec);
    if (ec) throw std::runtime_error(res.out_dir.string() + ": cannot create output directory: " + ec.message());
    for (const char* sub : {"runs", "raw", "aggregate"}) fs::remove_all(res.out_dir / sub);
    fs::remove(res.out_dir / "regret.svg");

    std::vector<SvgSeries> series;
    for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
        auto& arm = res.arms[a];
        const fs::path run_dir = res.out_dir / "runs" / arm.name;
        fs::create_directories(run_dir);
        for (std::size_t r = 0; r < reps; ++r) {
            std::ostringstream os;
            write_jsonl(os, arm.runs[r], arm.name);
            detail::write_text(run_dir / rep_file_name(static_cast<int>(r)), os.str());
            arm.curves.push_back(compute_regret(arm.runs[r], res.ground_truth.value));
        }
        arm.rows = aggregate(arm.curves);
        fs::create_directories(res.out_dir / "raw");
        fs::create_directories(res.out_dir / "aggregate");
        detail::write_text(res.out_dir / "raw" / (arm.name + ".csv"), detail::raw_csv(arm.curves));
        detail::write_text(res.out_dir / "aggregate" / (arm.name + ".csv"), detail::aggregate_csv(arm.rows));
        SvgSeries s{cfg.arms[a].label, {}, {}, {}, {}};
        for (const auto& row : arm.rows) {
            s.x.push_back(static_cast<double>(row.shots));
            s.median.push_back(row.median);
            s.lo.push_back(row.q25);
            s.hi.push_back(row.q75);
        }
        series.push_back(std::move(s));
    }
    if (opt.write_svg)
        detail::write_text(res.out_dir / "regret.svg",
                           regret_svg(series, static_cast<double>(cfg.budget), "cumulative shots", "simple regret"));

    Json m;
    m["config_hash"] = "fnv1a64:" + hex64(fnv1a(cfg.text));
    m["master_seed"] = res.seed;
    m["seed_source"] = opt.seed_source;
    m["replications"] = cfg.replications;
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < reps; ++r) seeds.push_back(replication_seed(res.seed, static_cast<int>(r)));
    m["replication_seeds"] = seeds;
    m["shots_per_eval"] = cfg.shots_per_eval;
    m["budget"] = cfg.budget;
    m["objective"] = cfg.objective_source;
    m["ground_truth"] = detail::ground_truth_json(res.ground_truth);
    Json arms = Json::array();
    for (const auto& a : cfg.arms) {
        Json j = to_json(a.bo);
        j["name"] = a.name;
        j["label"] = a.label;
        arms.push_back(std::move(j));
    }
    m["arms"] = std::move(arms);
    detail::write_text(res.out_dir / "manifest.json", m.dump(2) + "\n");
    return res;
}

struct Comparison {
    double median_a = 0.0;
    double median_b = 0.0;
    double u = 0.0;
    double p_value = 1.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

/// Per-replication regret of one arm at a checkpoint, read back from disk.
inline std::vector<double> arm_regret_at(const std::filesystem::path& dir, const std::string& arm, long checkpoint) {
    namespace fs = std::filesystem;
    const Json manifest = Json::parse(detail::read_file(dir / "manifest.json"));
    const double jstar = manifest.at("ground_truth").at("jstar").get<double>();
    const fs::path run_dir = dir / "runs" / arm;
    if (!fs::is_directory(run_dir)) throw std::invalid_argument("no runs for arm '" + arm + "' in " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(run_dir))
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<double> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        const auto run = read_jsonl(in, f.string());
        const auto r = regret_at(compute_regret(run.queries, jstar), checkpoint);
        if (!r) throw std::invalid_argument("arm '" + arm + "' has no incumbent by " + std::to_string(checkpoint) +
                                            " shots in " + f.filename().string());
        out.push_back(*r);
    }
    return out;
}

/// Medians of checkpoint regret for two arms and the two-sided rank-sum
/// p-value between them.
inline Comparison compare_arms(const std::filesystem::path& dir, const std::string& arm_a, const std::string& arm_b,
                               long checkpoint) {
    const Json manifest = Json::parse(detail::read_file(dir / "manifest.json"));
    const long budget = manifest.at("budget").get<long>();
    require(checkpoint >= 1, "checkpoint must be positive");
    require(checkpoint <= budget, "checkpoint " + std::to_string(checkpoint) + " is beyond the budget " +
                                      std::to_string(budget));
    const auto a = arm_regret_at(dir, arm_a, checkpoint);
    const auto b = arm_regret_at(dir, arm_b, checkpoint);
    require(a.size() >= 5 && b.size() >= 5, "comparison needs at least 5 replications per arm");
    const auto test = mann_whitney(a, b);
    return {median(a), median(b), test.u, test.p_value, a.size(), b.size()};
}

}  // namespace shotline
