#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjlab/lattice.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fully resolved experiment description. Tolerance defaults that scale with
/// the grid are filled in after the grid block is known.
struct ExperimentConfig {
    ModelSpec model;
    AlphaProfile alpha = AlphaProfile::constant(1.0);

    int N = 256;
    int K = 4;
    double dt = 1.0 / 64.0;
    Quadrature quadrature = Quadrature::Source;

    double lambda_start = 0.5;
    double lambda_ratio = 0.5;
    int rungs = 10;

    double tol_fp = 1e-10;
    double tol_h = 0.0;      // default 1e-9 * N
    double tol_aubry = 0.0;  // default 10 * tol_h
    double tol_sel = 0.0;    // default 1e-6 * N * dt
    double tol_mmc = 1e-9;
    double tol_tight = 0.0;  // default 1e-8 * (1 + |c_grid|) * dt, resolved at run time

    std::string out_dir = "out";
    std::vector<std::string> tables;  // empty = all
    std::uint64_t seed = 20240901;

    double default_tol_tight(double c_grid) const {
        return tol_tight > 0.0 ? tol_tight : 1e-8 * (1.0 + std::abs(c_grid)) * dt;
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + (path.empty() ? it.key() : path + "." + it.key()) +
                              "\"");
}

inline double need_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw ConfigError("missing key \"" + path + "." + key + "\"");
    if (!obj[key].is_number()) throw ConfigError("key \"" + path + "." + key + "\" must be a number");
    return obj[key].get<double>();
}

inline ModelSpec parse_model(const json& j) {
    reject_unknown(j, {"family", "potential", "omega", "amplitude"}, "model");
    if (!j.contains("family")) throw ConfigError("missing key \"model.family\"");
    std::string fam = j["family"].get<std::string>();
    if (fam == "mechanical") {
        std::vector<TrigTerm> terms;
        if (j.contains("potential")) {
            if (!j["potential"].is_array())
                throw ConfigError("key \"model.potential\" must be an array");
            for (std::size_t t = 0; t < j["potential"].size(); ++t) {
                const auto& e = j["potential"][t];
                std::string p = "model.potential[" + std::to_string(t) + "]";
                reject_unknown(e, {"k", "a", "phi"}, p);
                TrigTerm term;
                term.k = static_cast<int>(need_number(e, "k", p));
                term.a = need_number(e, "a", p);
                term.phi = e.contains("phi") ? need_number(e, "phi", p) : 0.0;
                terms.push_back(term);
            }
        } else {
            terms.push_back({2, 1.0, 0.0});  // cos(4 pi x)
        }
        return ModelSpec::mechanical(std::move(terms));
    }
    if (fam == "rotation") {
        double omega = j.contains("omega") ? need_number(j, "omega", "model") : 1.0;
        double amp = j.contains("amplitude") ? need_number(j, "amplitude", "model") : 0.3;
        return ModelSpec::rotation(omega, amp);
    }
    throw ConfigError("model.family must be \"mechanical\" or \"rotation\"");
}

inline AlphaProfile parse_alpha(const json& j) {
    reject_unknown(j, {"kind", "level", "base", "amplitude", "phase", "band_start", "band_end",
                       "ramp"},
                   "alpha");
    if (!j.contains("kind")) throw ConfigError("missing key \"alpha.kind\"");
    std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "constant")
            return AlphaProfile::constant(j.contains("level") ? need_number(j, "level", "alpha")
                                                              : 1.0);
        if (kind == "positive_sinusoid")
            return AlphaProfile::positive_sinusoid(need_number(j, "base", "alpha"),
                                                   need_number(j, "amplitude", "alpha"),
                                                   j.contains("phase")
                                                       ? need_number(j, "phase", "alpha")
                                                       : 0.0);
        if (kind == "vanishing_band")
            return AlphaProfile::vanishing_band(
                need_number(j, "band_start", "alpha"), need_number(j, "band_end", "alpha"),
                j.contains("level") ? need_number(j, "level", "alpha") : 1.0,
                j.contains("ramp") ? need_number(j, "ramp", "alpha") : 0.05);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("alpha: ") + e.what());
    }
    throw ConfigError("alpha.kind must be constant, positive_sinusoid or vanishing_band");
}

}  // namespace detail

/// Parse and validate a single-object JSON config; every unknown key is an
/// error, every numeric constraint is checked here so later stages can trust
/// the struct blindly.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a single JSON object");
    detail::reject_unknown(
        j, {"model", "alpha", "grid", "ladder", "tolerances", "outputs", "seed"}, "");

    ExperimentConfig cfg;
    if (!j.contains("model")) throw ConfigError("missing key \"model\"");
    cfg.model = detail::parse_model(j["model"]);
    if (!j.contains("alpha")) throw ConfigError("missing key \"alpha\"");
    cfg.alpha = detail::parse_alpha(j["alpha"]);

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        detail::reject_unknown(g, {"N", "K", "dt", "quadrature"}, "grid");
        if (g.contains("N")) cfg.N = static_cast<int>(detail::need_number(g, "N", "grid"));
        if (g.contains("K")) cfg.K = static_cast<int>(detail::need_number(g, "K", "grid"));
        if (g.contains("dt")) cfg.dt = detail::need_number(g, "dt", "grid");
        if (g.contains("quadrature")) {
            std::string q = g["quadrature"].get<std::string>();
            if (q == "source")
                cfg.quadrature = Quadrature::Source;
            else if (q == "midpoint")
                cfg.quadrature = Quadrature::Midpoint;
            else
                throw ConfigError("grid.quadrature must be \"source\" or \"midpoint\"");
        }
    }
    if (cfg.N < 8) throw ConfigError("grid.N must be >= 8");
    if (cfg.K < 1 || 4 * cfg.K > cfg.N) throw ConfigError("grid.K must satisfy 1 <= K <= N/4");
    if (!(cfg.dt > 0.0)) throw ConfigError("grid.dt must be > 0");

    if (j.contains("ladder")) {
        const auto& l = j["ladder"];
        detail::reject_unknown(l, {"lambda_start", "ratio", "rungs"}, "ladder");
        if (l.contains("lambda_start"))
            cfg.lambda_start = detail::need_number(l, "lambda_start", "ladder");
        if (l.contains("ratio")) cfg.lambda_ratio = detail::need_number(l, "ratio", "ladder");
        if (l.contains("rungs")) cfg.rungs = static_cast<int>(detail::need_number(l, "rungs", "ladder"));
    }
    if (!(cfg.lambda_start > 0.0)) throw ConfigError("ladder.lambda_start must be > 0");
    if (!(cfg.lambda_ratio > 0.0 && cfg.lambda_ratio < 1.0))
        throw ConfigError("ladder.ratio must be in (0,1)");
    if (cfg.rungs < 1) throw ConfigError("ladder.rungs must be >= 1");

    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        detail::reject_unknown(t, {"tol_fp", "tol_h", "tol_aubry", "tol_sel", "tol_mmc", "tol_tight"},
                               "tolerances");
        auto grab = [&](const char* k, double& slot) {
            if (t.contains(k)) {
                slot = detail::need_number(t, k, "tolerances");
                if (!(slot > 0.0))
                    throw ConfigError(std::string("tolerances.") + k + " must be > 0");
            }
        };
        grab("tol_fp", cfg.tol_fp);
        grab("tol_h", cfg.tol_h);
        grab("tol_aubry", cfg.tol_aubry);
        grab("tol_sel", cfg.tol_sel);
        grab("tol_mmc", cfg.tol_mmc);
        grab("tol_tight", cfg.tol_tight);
    }
    if (cfg.tol_h == 0.0) cfg.tol_h = 1e-9 * cfg.N;
    if (cfg.tol_aubry == 0.0) cfg.tol_aubry = 10.0 * cfg.tol_h;
    if (cfg.tol_sel == 0.0) cfg.tol_sel = 1e-6 * cfg.N * cfg.dt;

    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        detail::reject_unknown(o, {"directory", "tables"}, "outputs");
        if (o.contains("directory")) cfg.out_dir = o["directory"].get<std::string>();
        if (o.contains("tables")) {
            if (!o["tables"].is_array()) throw ConfigError("outputs.tables must be an array");
            for (const auto& t : o["tables"]) cfg.tables.push_back(t.get<std::string>());
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed must be an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    return cfg;
}

/// Echo of the effective config, written alongside outputs.
inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (cfg.model.family == Family::Mechanical) {
        j["model"]["family"] = "mechanical";
        for (const auto& t : cfg.model.potential)
            j["model"]["potential"].push_back({{"k", t.k}, {"a", t.a}, {"phi", t.phi}});
    } else {
        j["model"]["family"] = "rotation";
        j["model"]["omega"] = cfg.model.rotation_mean;
        j["model"]["amplitude"] = cfg.model.rotation_amplitude;
    }
    switch (cfg.alpha.kind()) {
        case AlphaKind::Constant: j["alpha"]["kind"] = "constant"; break;
        case AlphaKind::PositiveSinusoid: j["alpha"]["kind"] = "positive_sinusoid"; break;
        case AlphaKind::VanishingBand: j["alpha"]["kind"] = "vanishing_band"; break;
    }
    j["grid"] = {{"N", cfg.N},
                 {"K", cfg.K},
                 {"dt", cfg.dt},
                 {"quadrature", cfg.quadrature == Quadrature::Source ? "source" : "midpoint"}};
    j["ladder"] = {{"lambda_start", cfg.lambda_start}, {"ratio", cfg.lambda_ratio}, {"rungs", cfg.rungs}};
    j["tolerances"] = {{"tol_fp", cfg.tol_fp},   {"tol_h", cfg.tol_h},     {"tol_aubry", cfg.tol_aubry},
                       {"tol_sel", cfg.tol_sel}, {"tol_mmc", cfg.tol_mmc}, {"tol_tight", cfg.tol_tight}};
    j["outputs"] = {{"directory", cfg.out_dir}};
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace hjlab
