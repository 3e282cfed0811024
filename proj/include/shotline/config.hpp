#pragma once

#include "shotline/engine.hpp"
#include "shotline/objective.hpp"
#include "shotline/record_io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace shotline {

/// Malformed or inconsistent configuration; the message starts with
/// "<source>:<line>: <field>:" when the offending field can be located.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ArmConfig {
    std::string name;
    std::string label;  // legend text only
    BoConfig bo;
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    std::string objective_source;  // file path as written, or "inline"
    long shots_per_eval = 0;
    long budget = 0;
    int replications = 1;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool pin_noise = false;
    std::vector<ArmConfig> arms;
    std::string text;  // raw bytes the config was parsed from
};

namespace detail {

// JSON-pointer token escaping: "~" -> "~0", "/" -> "~1".
inline std::string escape_token(const std::string& key) {
    std::string out;
    for (const char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

/// Maps JSON pointers to source lines by pairing the textual order of object
/// keys with a preorder walk of the (insertion-ordered) parsed document.
class LineIndex {
public:
    LineIndex(const std::string& text, const Json& doc, std::string source)
        : source_(std::move(source)) {
        std::vector<int> key_lines;
        int line = 1;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '\n') ++line;
            if (c != '"') continue;
            const int start = line;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\') ++i;
                else if (text[i] == '\n') ++line;
            }
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r' || text[j] == '\n'))
                ++j;
            if (j < text.size() && text[j] == ':') key_lines.push_back(start);
        }
        std::vector<std::string> pointers;
        walk(doc, "", pointers);
        if (pointers.size() != key_lines.size())
            throw ConfigError(source_ + ": duplicate field names");
        for (std::size_t k = 0; k < pointers.size(); ++k) {
            lines_[pointers[k]] = key_lines[k];
            order_.push_back(pointers[k]);
        }
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        std::string where = source_;
        if (const int l = line_of(pointer); l > 0) where += ":" + std::to_string(l);
        throw ConfigError(where + ": " + display(pointer) + ": " + msg);
    }

    const std::string& source() const { return source_; }

private:
    static void walk(const Json& j, const std::string& at, std::vector<std::string>& out) {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it) {
                const std::string p = at + "/" + escape_token(it.key());
                out.push_back(p);
                walk(it.value(), p, out);
            }
        } else if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) walk(j[i], at + "/" + std::to_string(i), out);
        }
    }

    int line_of(std::string pointer) const {
        while (true) {
            if (const auto it = lines_.find(pointer); it != lines_.end()) return it->second;
            for (const auto& p : order_)
                if (p.rfind(pointer + "/", 0) == 0) return lines_.at(p);
            if (pointer.empty()) return 0;
            pointer = pointer.substr(0, pointer.rfind('/'));
        }
    }

    // "/arms/1/gamma" -> "arms[1].gamma"
    static std::string display(const std::string& pointer) {
        if (pointer.empty()) return "(top level)";
        std::string out;
        std::size_t pos = 1;
        while (pos <= pointer.size()) {
            const std::size_t next = std::min(pointer.find('/', pos), pointer.size());
            const std::string tok = pointer.substr(pos, next - pos);
            if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos)
                out += "[" + tok + "]";
            else
                out += (out.empty() ? "" : ".") + tok;
            pos = next + 1;
        }
        return out;
    }

    std::string source_;
    std::map<std::string, int> lines_;
    std::vector<std::string> order_;
};

/// Typed field access with located errors.
class Fields {
public:
    Fields(const Json& obj, std::string pointer, const LineIndex& lines)
        : obj_(obj), at_(std::move(pointer)), lines_(lines) {
        if (!obj_.is_object()) lines_.fail(at_, "expected an object");
    }

    void allow_only(std::initializer_list<const char*> names) const {
        const std::set<std::string> ok(names.begin(), names.end());
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!ok.count(it.key())) lines_.fail(ptr(it.key()), "unknown field");
    }

    bool has(const char* name) const { return obj_.contains(name); }
    const Json& raw(const char* name) const { return need(name); }
    std::string ptr(const std::string& name) const { return at_ + "/" + escape_token(name); }
    [[noreturn]] void fail(const char* name, const std::string& msg) const { lines_.fail(ptr(name), msg); }

    double number(const char* name) const {
        const Json& v = need(name);
        if (!v.is_number()) fail(name, "expected a number");
        return v.get<double>();
    }

    long integer(const char* name) const {
        const Json& v = need(name);
        if (!v.is_number_integer()) fail(name, "expected an integer");
        return v.get<long>();
    }

    std::string string(const char* name) const {
        const Json& v = need(name);
        if (!v.is_string()) fail(name, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const char* name) const {
        const Json& v = need(name);
        if (!v.is_boolean()) fail(name, "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const char* name) const {
        const Json& v = need(name);
        if (!v.is_array()) fail(name, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(name, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    const Json& need(const char* name) const {
        if (!obj_.contains(name)) lines_.fail(at_, std::string("missing required field '") + name + "'");
        return obj_.at(name);
    }

    const Json& obj_;
    std::string at_;
    const LineIndex& lines_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(p.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
    }
}

inline ObjectiveSpec parse_objective(const Json& j, const std::string& at, const LineIndex& lines) {
    const Fields f(j, at, lines);
    if (f.has("qubits")) {
        f.allow_only({"qubits", "layers", "terms", "noise_scale", "description"});
        Hamiltonian h;
        h.qubits = static_cast<int>(f.integer("qubits"));
        if (h.qubits < 1 || h.qubits > kMaxQubits) f.fail("qubits", "must be in [1, 12]");
        const long layers = f.integer("layers");
        if (layers < 1) f.fail("layers", "must be at least 1");
        const Json& terms = f.raw("terms");
        if (!terms.is_array() || terms.empty()) f.fail("terms", "expected a nonempty array of {coeff, pauli}");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const Fields t(terms[i], f.ptr("terms") + "/" + std::to_string(i), lines);
            t.allow_only({"coeff", "pauli"});
            PauliTerm term{t.number("coeff"), t.string("pauli")};
            if (term.pauli.size() != static_cast<std::size_t>(h.qubits))
                t.fail("pauli", "length must equal qubits (" + std::to_string(h.qubits) + ")");
            if (term.pauli.find_first_not_of("IXYZ") != std::string::npos)
                t.fail("pauli", "characters must be uppercase I, X, Y or Z");
            h.terms.push_back(std::move(term));
        }
        const double noise = f.number("noise_scale");
        if (noise < 0.0) f.fail("noise_scale", "must be nonnegative");
        return ObjectiveSpec::circuit(std::move(h), static_cast<int>(layers), noise);
    }
    if (f.has("dimension")) {
        f.allow_only({"dimension", "amplitudes", "phases", "offset", "noise_scale", "description"});
        const long d = f.integer("dimension");
        if (d < 1) f.fail("dimension", "must be at least 1");
        const auto a = f.numbers("amplitudes");
        const auto phi = f.numbers("phases");
        if (static_cast<long>(a.size()) != d) f.fail("amplitudes", "length must equal dimension");
        if (static_cast<long>(phi.size()) != d) f.fail("phases", "length must equal dimension");
        const double noise = f.number("noise_scale");
        if (noise < 0.0) f.fail("noise_scale", "must be nonnegative");
        return ObjectiveSpec::synthetic(Eigen::Map<const Eigen::VectorXd>(a.data(), d),
                                        Eigen::Map<const Eigen::VectorXd>(phi.data(), d), f.number("offset"), noise);
    }
    lines.fail(at, "objective needs either 'qubits' (circuit) or 'dimension' (synthetic)");
}

}  // namespace detail

/// Objective file on its own: circuit {qubits, layers, terms, noise_scale} or
/// synthetic {dimension, amplitudes, phases, offset, noise_scale}.
inline ObjectiveSpec load_objective(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    const Json doc = detail::parse_text(text, path.string());
    const detail::LineIndex lines(text, doc, path.string());
    return detail::parse_objective(doc, "", lines);
}

/// Parses an experiment config. Relative objective paths resolve against
/// `base_dir` (the config file's directory when loaded from disk).
inline ExperimentConfig parse_experiment(const std::string& text, const std::string& source,
                                         const std::filesystem::path& base_dir) {
    const Json doc = detail::parse_text(text, source);
    const detail::LineIndex lines(text, doc, source);
    const detail::Fields top(doc, "", lines);
    top.allow_only({"objective", "shots_per_eval", "budget", "replications", "seed", "output_dir", "pin_noise",
                    "arms", "description"});

    const Json& obj = top.raw("objective");
    std::string objective_source = "inline";
    auto objective = [&] {
        if (obj.is_string()) {
            objective_source = obj.get<std::string>();
            const std::filesystem::path p = base_dir / objective_source;
            try {
                return load_objective(p);
            } catch (const ConfigError& e) {
                lines.fail("/objective", e.what());
            }
        }
        if (!obj.is_object()) top.fail("objective", "expected a file path or an inline object");
        return detail::parse_objective(obj, "/objective", lines);
    }();

    const long s_bar = top.integer("shots_per_eval");
    if (s_bar < 1) top.fail("shots_per_eval", "must be at least 1");
    const long budget = top.integer("budget");
    if (budget < s_bar) top.fail("budget", "must cover at least one query of shots_per_eval shots");
    const long reps = top.has("replications") ? top.integer("replications") : 1;
    if (reps < 1) top.fail("replications", "must be at least 1");
    std::uint64_t seed = 0;
    if (top.has("seed")) {
        const Json& s = top.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            top.fail("seed", "expected a nonnegative integer");
        seed = s.get<std::uint64_t>();
    }
    const std::string out_dir = top.has("output_dir") ? top.string("output_dir") : "results";
    const bool pin = top.has("pin_noise") && top.boolean("pin_noise");

    const Json& arms = top.raw("arms");
    if (!arms.is_array() || arms.empty()) top.fail("arms", "expected a nonempty array of arms");
    std::vector<ArmConfig> parsed;
    std::set<std::string> names;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const detail::Fields a(arms[i], "/arms/" + std::to_string(i), lines);
        a.allow_only({"name", "label", "method", "kernel", "gamma", "r", "beta", "nu"});
        ArmConfig arm;
        arm.name = a.string("name");
        if (arm.name.empty() || arm.name.find_first_of("/\\ \t") != std::string::npos || arm.name[0] == '.')
            a.fail("name", "must be a nonempty file-name-safe token");
        if (!names.insert(arm.name).second) a.fail("name", "duplicate arm name '" + arm.name + "'");
        arm.label = a.has("label") ? a.string("label") : arm.name;
        BoConfig& c = arm.bo;
        try {
            c.method = parse_method(a.string("method"));
        } catch (const std::invalid_argument&) {
            a.fail("method", "must be \"vanilla\" or \"lsr\"");
        }
        try {
            c.kernel = parse_kernel_family(a.string("kernel"));
        } catch (const std::invalid_argument&) {
            a.fail("kernel", "must be \"matern\" or \"periodic\"");
        }
        c.gamma = a.number("gamma");
        if (c.method == Method::Vanilla && !(c.gamma >= 0.0 && c.gamma <= 1.0)) a.fail("gamma", "must lie in [0, 1]");
        if (c.method == Method::Lsr && !(c.gamma > 0.0 && c.gamma < 1.0)) a.fail("gamma", "LSR needs gamma in (0, 1)");
        if (c.method == Method::Lsr) {
            c.ratio = a.number("r");
            if (!(c.ratio > 0.0 && c.ratio <= 1.0)) a.fail("r", "must lie in (0, 1]");
        } else if (a.has("r") && a.number("r") != 1.0) {
            a.fail("r", "vanilla arms query at shots_per_eval only (r = 1)");
        }
        c.beta = a.has("beta") ? a.number("beta") : (c.method == Method::Lsr ? kDefaultBetaLsr : kDefaultBetaLcb);
        if (!(c.beta >= 0.0)) a.fail("beta", "must be nonnegative");
        if (a.has("nu")) {
            if (c.kernel != KernelFamily::Matern) a.fail("nu", "only applies to the matern kernel");
            try {
                c.nu = parse_smoothness(a.number("nu"));
            } catch (const std::invalid_argument&) {
                a.fail("nu", "must be 0.5, 1.5 or 2.5");
            }
        }
        c.high_shots = s_bar;
        c.total_budget = budget;
        c.pin_noise = pin;
        if (c.method == Method::Lsr) {
            if (c.low_shots() < 1) a.fail("r", "r * shots_per_eval rounds to zero shots");
            if (BudgetLedger(budget, s_bar, c.low_shots(), c.gamma).init_count() < 1)
                a.fail("gamma", "gamma * budget is smaller than one low-shot query");
        }
        parsed.push_back(std::move(arm));
    }

    return ExperimentConfig{std::move(objective), objective_source, s_bar, budget, static_cast<int>(reps), seed,
                            out_dir, pin, std::move(parsed), text};
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
    return parse_experiment(detail::read_file(path), path.string(), path.parent_path());
}

}  // namespace shotline
