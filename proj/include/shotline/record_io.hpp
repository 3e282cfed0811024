#pragma once

#include "shotline/engine.hpp"

#include <json.hpp>

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace shotline {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline Json to_json(const FitResult& f) {
    Json j;
    j["family"] = std::string(to_string(f.kernel.family));
    if (f.kernel.family == KernelFamily::Matern) j["nu"] = smoothness_value(f.kernel.nu);
    j["lengthscales"] = std::vector<double>(f.kernel.lengthscales.data(),
                                            f.kernel.lengthscales.data() + f.kernel.lengthscales.size());
    j["output_scale"] = f.kernel.output_scale;
    if (f.kernel.family == KernelFamily::Periodic) j["period"] = f.kernel.period;
    j["noise_variance"] = f.noise_variance;
    j["prior_mean"] = f.prior_mean;
    j["log_likelihood"] = f.log_likelihood;
    return j;
}

inline Json to_json(const BoConfig& c) {
    Json j;
    j["method"] = std::string(to_string(c.method));
    j["kernel"] = std::string(to_string(c.kernel));
    if (c.kernel == KernelFamily::Matern) j["nu"] = smoothness_value(c.nu);
    j["gamma"] = c.gamma;
    j["budget"] = c.total_budget;
    j["shots_per_eval"] = c.high_shots;
    if (c.method == Method::Lsr) {
        j["r"] = c.ratio;
        j["low_shots"] = c.low_shots();
    }
    j["beta"] = c.beta;
    j["pin_noise"] = c.pin_noise;
    return j;
}

inline Json header_json(const RunRecord& r, const std::string& arm = {}) {
    Json j;
    j["type"] = "header";
    if (!arm.empty()) j["arm"] = arm;
    j["seed"] = r.seed;
    j["config"] = to_json(r.config);
    j["low_shot_model"] = r.low_shot_model ? to_json(*r.low_shot_model) : Json(nullptr);
    return j;
}

inline Json query_json(const QueryRecord& q) {
    Json j;
    j["phase"] = std::string(to_string(q.phase));
    j["k"] = q.k;
    j["theta"] = std::vector<double>(q.theta.data(), q.theta.data() + q.theta.size());
    j["shots"] = q.shots;
    j["y"] = q.y;
    j["incumbent_y"] = q.incumbent_y ? Json(*q.incumbent_y) : Json(nullptr);
    j["B_k"] = q.cumulative_shots;
    j["J"] = q.true_value;
    if (q.low_shot_mean) j["mu_g"] = *q.low_shot_mean;
    if (q.model) j["hyper"] = to_json(*q.model);
    return j;
}

/// One header line, then one line per query. Wall time is left out so that
/// replays are byte-identical.
inline void write_jsonl(std::ostream& os, const RunRecord& r, const std::string& arm = {}) {
    os << header_json(r, arm).dump() << '\n';
    for (const auto& q : r.queries) os << query_json(q).dump() << '\n';
}

/// The optimizer-facing part of a logged query, as read back from JSONL.
struct LoggedQuery {
    Phase phase = Phase::Init;
    int k = 0;
    std::vector<double> theta;
    long shots = 0;
    double y = 0.0;
    std::optional<double> incumbent_y;
    long cumulative_shots = 0;
};

struct LoggedRun {
    Json header;
    std::vector<LoggedQuery> queries;
};

inline LoggedRun read_jsonl(std::istream& is, const std::string& source = "run log") {
    LoggedRun run;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw std::runtime_error(where + e.what());
        }
        if (lineno == 1) {
            if (j.value("type", "") != "header") throw std::runtime_error(where + "first line is not a header");
            run.header = std::move(j);
            continue;
        }
        try {
            LoggedQuery q;
            q.phase = j.at("phase").get<std::string>() == "init" ? Phase::Init : Phase::Bo;
            q.k = j.at("k").get<int>();
            q.theta = j.at("theta").get<std::vector<double>>();
            q.shots = j.at("shots").get<long>();
            q.y = j.at("y").get<double>();
            if (!j.at("incumbent_y").is_null()) q.incumbent_y = j.at("incumbent_y").get<double>();
            q.cumulative_shots = j.at("B_k").get<long>();
            run.queries.push_back(std::move(q));
        } catch (const Json::exception& e) {
            throw std::runtime_error(where + e.what());
        }
    }
    if (run.header.is_null()) throw std::runtime_error(source + ": empty run log");
    return run;
}

}  // namespace shotline
