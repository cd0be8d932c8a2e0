#include "ndsf/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ndsf/errors.hpp"

namespace ndsf {

using nlohmann::json;

namespace {

double parse_number(std::string_view s, std::string_view whole) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ArgumentError("cannot parse angle '" + std::string(whole) + "'");
    return v;
}

std::string trim(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

// field readers; `path` is the JSON path used in error messages
template <class T>
void read(const json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

void read_angle(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    try {
        if (v.is_string())
            out = parse_angle(v.get<std::string>());
        else
            out = v.get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(path + key, e.what());
    }
}

const json& section(const json& root, const char* key) {
    static const json empty = json::object();
    if (!root.contains(key) || root.at(key).is_null()) return empty;
    if (!root.at(key).is_object()) throw ConfigError(key, "expected an object");
    return root.at(key);
}

template <class F>
void check(const char* field, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(field, e.what());
    }
}

}  // namespace

std::vector<double> ScanSpec::gammas() const {
    std::vector<double> g;
    if (!enabled) return g;
    const auto n = static_cast<long>(std::floor((gamma_stop - gamma_start) / gamma_step + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(gamma_start + gamma_step * static_cast<double>(i));
    return g;
}

std::string RunConfig::op_pair() const { return std::string{to_char(alpha)} + to_char(beta); }

void RunConfig::validate() const {
    if (model.length % 2 != 0) throw ConfigError("model.length", "length must be even");
    check("model", [&] { model.validate(); });
    for (Pauli p : {alpha, beta})
        if (p == Pauli::Y) throw ConfigError("op_pair", "operator pair must be one of xx, zz, xz, zx");
    check("evolution", [&] { evolution.validate(); });
    if (evolution.picture != Picture::Heisenberg)
        throw ConfigError("evolution.picture", "runs use the Heisenberg picture");
    check("lp", [&] { lp.validate(static_cast<std::size_t>(evolution.samples())); });
    check("window", [&] { window.validate(); });
    if (lp.enabled && window.half_width > std::max(lp.horizon, evolution.t_max) + 1e-9)
        throw ConfigError("window.half_width", "window is wider than the available time range");
    if (!lp.enabled && window.half_width > evolution.t_max + 1e-9)
        throw ConfigError("window.half_width", "window is wider than the available time range");
    check("omega", [&] { omega.validate(); });
    check("spatial", [&] { spatial.validate(model.length); });
    if (output.directory.empty()) throw ConfigError("output.directory", "output directory is empty");
    if (output.format != "csv") throw ConfigError("output.format", "only csv output is supported");
    if (scan.enabled) {
        if (!(scan.gamma_step > 0.0)) throw ConfigError("scan.gamma_step", "step must be positive");
        if (scan.gamma_stop < scan.gamma_start) throw ConfigError("scan.gamma_stop", "stop is below start");
        if (scan.kcuts.empty()) throw ConfigError("scan.kcuts", "at least one k-cut is needed");
        const double dk = 2.0 * std::numbers::pi / model.length;
        for (double k : scan.kcuts) {
            const double m = k / dk;
            if (std::abs(m - std::round(m)) > 1e-9 || m < -1e-9 || std::round(m) >= model.length)
                throw ConfigError("scan.kcuts", "k-cut " + std::to_string(k) + " is not on the momentum grid");
        }
        for (double g : scan.gammas())
            if (g < 0.0 || g > std::numbers::pi / 2 + 1e-12)
                throw ConfigError("scan", "gamma values must lie in [0, pi/2]");
    }
    if (reference.boundstates && !(model.hz > 0.0))
        throw ConfigError("reference.boundstates", "bound states need hz > 0");
    if (reference.boundstate_cutoff < 1) throw ConfigError("reference.boundstate_cutoff", "cutoff must be >= 1");
    if (jobs < 0) throw ConfigError("jobs", "jobs must be >= 0");
}

double parse_angle(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw ArgumentError("empty angle");
    const auto at = s.find("pi");
    if (at == std::string::npos) return parse_number(s, text);

    std::string pre = s.substr(0, at);
    std::string post = s.substr(at + 2);
    if (!pre.empty() && pre.back() == '*') pre.pop_back();
    double factor = 1.0;
    if (pre == "-")
        factor = -1.0;
    else if (!pre.empty() && pre != "+")
        factor = parse_number(pre, text);
    double divisor = 1.0;
    if (!post.empty()) {
        if (post[0] != '/') throw ArgumentError("cannot parse angle '" + std::string(text) + "'");
        divisor = parse_number(post.substr(1), text);
        if (divisor == 0.0) throw ArgumentError("division by zero in angle '" + std::string(text) + "'");
    }
    return factor * std::numbers::pi / divisor;
}

void parse_op_pair(std::string_view text, Pauli& alpha, Pauli& beta) {
    if (text.size() != 2) throw ArgumentError("operator pair must have two letters, got '" + std::string(text) + "'");
    alpha = parse_pauli(text.substr(0, 1));
    beta = parse_pauli(text.substr(1, 1));
}

RunConfig config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("", "configuration must be a JSON object");

    RunConfig cfg;
    {
        const auto& m = section(root, "model");
        read_angle(m, "gamma", "model.", cfg.model.gamma);
        read(m, "hz", "model.", cfg.model.hz);
        read(m, "length", "model.", cfg.model.length);
    }
    if (root.contains("state")) {
        std::string s;
        read(root, "state", "", s);
        try {
            cfg.state = parse_state_kind(s);
        } catch (const Error& e) {
            throw ConfigError("state", e.what());
        }
    }
    if (root.contains("op_pair")) {
        std::string s;
        read(root, "op_pair", "", s);
        try {
            parse_op_pair(s, cfg.alpha, cfg.beta);
        } catch (const Error& e) {
            throw ConfigError("op_pair", e.what());
        }
    }
    {
        const auto& e = section(root, "evolution");
        auto& ev = cfg.evolution;
        read(e, "dt", "evolution.", ev.dt);
        read(e, "t_max", "evolution.", ev.t_max);
        read(e, "max_bond", "evolution.", ev.truncation.max_bond);
        read(e, "cutoff", "evolution.", ev.truncation.rel_cutoff);
        read(e, "sample_stride", "evolution.", ev.sample_stride);
        read(e, "abort_threshold", "evolution.", ev.abort_threshold);
        if (e.contains("order")) {
            int order = 4;
            read(e, "order", "evolution.", order);
            if (order == 2)
                ev.order = TrotterOrder::Second;
            else if (order == 4)
                ev.order = TrotterOrder::Fourth;
            else
                throw ConfigError("evolution.order", "Trotter order must be 2 or 4");
        }
    }
    {
        const auto& l = section(root, "lp");
        read(l, "enabled", "lp.", cfg.lp.enabled);
        read(l, "order", "lp.", cfg.lp.order);
        read(l, "horizon", "lp.", cfg.lp.horizon);
        read(l, "stabilize", "lp.", cfg.lp.stabilize);
        read(l, "refine", "lp.", cfg.lp.refine);
    }
    {
        const auto& w = section(root, "window");
        if (w.contains("family")) {
            std::string fam;
            read(w, "family", "window.", fam);
            if (fam != "PARZEN") throw ConfigError("window.family", "only PARZEN is available");
        }
        read(w, "half_width", "window.", cfg.window.half_width);
    }
    {
        const auto& o = section(root, "omega");
        read(o, "min", "omega.", cfg.omega.min);
        read(o, "max", "omega.", cfg.omega.max);
        read(o, "step", "omega.", cfg.omega.step);
    }
    {
        const auto& s = section(root, "spatial");
        read(s, "first", "spatial.", cfg.spatial.first);
        read(s, "last", "spatial.", cfg.spatial.last);
    }
    {
        const auto& o = section(root, "output");
        read(o, "directory", "output.", cfg.output.directory);
        read(o, "format", "output.", cfg.output.format);
    }
    if (root.contains("scan") && !root.at("scan").is_null()) {
        const auto& s = section(root, "scan");
        cfg.scan.enabled = true;
        read_angle(s, "gamma_start", "scan.", cfg.scan.gamma_start);
        read_angle(s, "gamma_stop", "scan.", cfg.scan.gamma_stop);
        read_angle(s, "gamma_step", "scan.", cfg.scan.gamma_step);
        if (s.contains("kcuts")) {
            if (!s.at("kcuts").is_array()) throw ConfigError("scan.kcuts", "expected an array");
            for (std::size_t i = 0; i < s.at("kcuts").size(); ++i) {
                double k = 0.0;
                json holder = {{"k", s.at("kcuts").at(i)}};
                read_angle(holder, "k", "scan.kcuts[" + std::to_string(i) + "].", k);
                cfg.scan.kcuts.push_back(k);
            }
        }
    }
    {
        const auto& r = section(root, "reference");
        read(r, "bounds", "reference.", cfg.reference.bounds);
        read(r, "boundstates", "reference.", cfg.reference.boundstates);
        read(r, "dispersion", "reference.", cfg.reference.dispersion);
        read(r, "boundstate_cutoff", "reference.", cfg.reference.boundstate_cutoff);
    }
    read(root, "jobs", "", cfg.jobs);
    return cfg;
}

std::string config_to_json(const RunConfig& cfg, int indent) {
    json j;
    j["model"] = {{"gamma", cfg.model.gamma}, {"hz", cfg.model.hz}, {"length", cfg.model.length}};
    j["state"] = to_string(cfg.state);
    j["op_pair"] = cfg.op_pair();
    const auto& ev = cfg.evolution;
    j["evolution"] = {{"dt", ev.dt},
                      {"t_max", ev.t_max},
                      {"max_bond", ev.truncation.max_bond},
                      {"cutoff", ev.truncation.rel_cutoff},
                      {"sample_stride", ev.sample_stride},
                      {"order", static_cast<int>(ev.order)},
                      {"abort_threshold", ev.abort_threshold}};
    j["lp"] = {{"enabled", cfg.lp.enabled},
               {"order", cfg.lp.order},
               {"horizon", cfg.lp.horizon},
               {"stabilize", cfg.lp.stabilize},
               {"refine", cfg.lp.refine}};
    j["window"] = {{"family", "PARZEN"}, {"half_width", cfg.window.half_width}};
    j["omega"] = {{"min", cfg.omega.min}, {"max", cfg.omega.max}, {"step", cfg.omega.step}};
    j["spatial"] = {{"first", cfg.spatial.first}, {"last", cfg.spatial.last}};
    j["output"] = {{"directory", cfg.output.directory}, {"format", cfg.output.format}};
    if (cfg.scan.enabled)
        j["scan"] = {{"gamma_start", cfg.scan.gamma_start},
                     {"gamma_stop", cfg.scan.gamma_stop},
                     {"gamma_step", cfg.scan.gamma_step},
                     {"kcuts", cfg.scan.kcuts}};
    else
        j["scan"] = nullptr;
    j["reference"] = {{"bounds", cfg.reference.bounds},
                      {"boundstates", cfg.reference.boundstates},
                      {"dispersion", cfg.reference.dispersion},
                      {"boundstate_cutoff", cfg.reference.boundstate_cutoff}};
    j["jobs"] = cfg.jobs;
    return j.dump(indent);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

}  // namespace ndsf
