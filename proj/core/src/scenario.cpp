#include "lrm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lrm {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& parent, const char* key) {
    const std::string field = parent.empty() ? key : parent + "." + key;
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(field, "missing required field");
    return obj.at(key);
}

std::string child(const std::string& parent, const char* key) {
    return parent.empty() ? std::string(key) : parent + "." + key;
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

long long integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
    return j.get<long long>();
}

Vector vector_of(const json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected a list");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = number(j[i], field + "[" + std::to_string(i) + "]");
    }
    return v;
}

HazardModel parse_hazard(const json& h) {
    const std::string p = "hazard";
    if (!h.is_object()) throw ConfigError(p, "expected an object");
    const json& gen = require(h, p, "generator");
    const std::string gf = child(p, "generator");
    if (!gen.is_array() || gen.empty()) throw ConfigError(gf, "expected a non-empty square matrix");
    const auto n = static_cast<Eigen::Index>(gen.size());
    if (h.contains("n_states") && integer(h.at("n_states"), child(p, "n_states")) != n) {
        throw ConfigError(child(p, "n_states"), "does not match the generator size");
    }
    Matrix q(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string rf = gf + "[" + std::to_string(i) + "]";
        const Vector row = vector_of(gen[static_cast<std::size_t>(i)], rf);
        if (row.size() != n) throw ConfigError(rf, "row length differs from the number of states");
        double sum = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != i && row[k] < 0.0) {
                throw ConfigError(rf + "[" + std::to_string(k) + "]",
                                  "off-diagonal rate must be >= 0");
            }
            sum += row[k];
        }
        if (std::abs(sum) > 1e-12) throw ConfigError(rf, "row must sum to zero");
        q.row(i) = row.transpose();
    }

    const std::string tf = child(p, "rate_times");
    std::vector<double> times;
    if (h.contains("rate_times")) {
        const Vector t = vector_of(h.at("rate_times"), tf);
        times.assign(t.data(), t.data() + t.size());
    } else {
        times = {0.0};
    }
    if (times.empty() || times.front() != 0.0) throw ConfigError(tf, "must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ConfigError(tf + "[" + std::to_string(i) + "]", "must be strictly increasing");
        }
    }

    const std::string lf = child(p, "rates");
    const json& rates_j = require(h, p, "rates");
    if (!rates_j.is_array() || rates_j.size() != times.size()) {
        throw ConfigError(lf, "expected one row of per-state rates per entry of rate_times");
    }
    std::vector<Vector> rates;
    for (std::size_t i = 0; i < rates_j.size(); ++i) {
        const std::string rf = lf + "[" + std::to_string(i) + "]";
        Vector row = vector_of(rates_j[i], rf);
        if (row.size() != n) throw ConfigError(rf, "expected one rate per state");
        for (Eigen::Index x = 0; x < n; ++x) {
            if (!(row[x] > 0.0)) {
                throw ConfigError(rf + "[" + std::to_string(x) + "]", "hazard rate must be > 0");
            }
        }
        rates.push_back(std::move(row));
    }

    const std::string hf = child(p, "horizon");
    const double horizon = number(require(h, p, "horizon"), hf);
    if (!(horizon > 0.0)) throw ConfigError(hf, "must be > 0");

    const std::string df = child(p, "initial_dist");
    const Vector init = vector_of(require(h, p, "initial_dist"), df);
    if (init.size() != n) throw ConfigError(df, "expected one probability per state");
    for (Eigen::Index x = 0; x < n; ++x) {
        if (init[x] < 0.0) throw ConfigError(df + "[" + std::to_string(x) + "]", "must be >= 0");
    }
    if (std::abs(init.sum() - 1.0) > 1e-12) throw ConfigError(df, "must sum to 1");

    try {
        return HazardModel(q, times, rates, horizon, init);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(p, e.what());
    }
}

MarketModel parse_market(const json& m, double horizon) {
    const std::string p = "market";
    if (!m.is_object()) throw ConfigError(p, "expected an object");
    MarketModel out;
    out.s0 = number(require(m, p, "s0"), child(p, "s0"));
    out.mu = number(require(m, p, "mu"), child(p, "mu"));
    out.sigma = number(require(m, p, "sigma"), child(p, "sigma"));
    out.horizon = horizon;
    if (m.contains("horizon")) {
        out.horizon = number(m.at("horizon"), child(p, "horizon"));
        if (out.horizon != horizon) {
            throw ConfigError(child(p, "horizon"), "must equal hazard.horizon");
        }
    }
    if (!(out.s0 > 0.0)) throw ConfigError(child(p, "s0"), "must be > 0");
    if (!(out.sigma > 0.0)) throw ConfigError(child(p, "sigma"), "must be > 0");
    return out;
}

ClaimSpec parse_claim(const json& c) {
    const std::string p = "claim";
    if (!c.is_object()) throw ConfigError(p, "expected an object");
    ClaimSpec out;
    const std::string cf = child(p, "contract");
    const json& contract = require(c, p, "contract");
    if (contract == "pure_endowment") {
        out.contract = ContractKind::pure_endowment;
    } else if (contract == "term") {
        out.contract = ContractKind::term;
    } else {
        throw ConfigError(cf, "expected \"pure_endowment\" or \"term\"");
    }
    const std::string pf = child(p, "payoff");
    const json& payoff = require(c, p, "payoff");
    const json& type = require(payoff, pf, "type");
    const std::string tf = pf + ".type";
    if (type == "constant") {
        out.payoff = {PayoffKind::constant, number(require(payoff, pf, "value"), pf + ".value")};
    } else if (type == "identity") {
        out.payoff = {PayoffKind::identity, 0.0};
    } else if (type == "call" || type == "put") {
        const double k = number(require(payoff, pf, "strike"), pf + ".strike");
        if (k < 0.0) throw ConfigError(pf + ".strike", "must be >= 0");
        out.payoff = {type == "call" ? PayoffKind::call : PayoffKind::put, k};
    } else {
        throw ConfigError(tf, "expected constant, identity, call or put");
    }
    if (out.contract == ContractKind::term && out.payoff.kind == PayoffKind::put) {
        throw ConfigError(tf, "term contracts support constant, identity and call payoffs");
    }
    return out;
}

json hazard_json(const HazardModel& h) {
    json gen = json::array();
    for (Eigen::Index i = 0; i < h.n_states(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < h.n_states(); ++k) row.push_back(h.generator()(i, k));
        gen.push_back(row);
    }
    json rates = json::array();
    for (const Vector& r : h.rate_table()) {
        rates.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    const Vector& d = h.initial_dist();
    return {{"n_states", h.n_states()},
            {"generator", gen},
            {"rate_times", h.rate_times()},
            {"rates", rates},
            {"horizon", h.horizon()},
            {"initial_dist", std::vector<double>(d.data(), d.data() + d.size())}};
}

json payoff_json(const Payoff& p) {
    switch (p.kind) {
        case PayoffKind::constant: return {{"type", "constant"}, {"value", p.parameter}};
        case PayoffKind::identity: return {{"type", "identity"}};
        case PayoffKind::call: return {{"type", "call"}, {"strike", p.parameter}};
        case PayoffKind::put: return {{"type", "put"}, {"strike", p.parameter}};
    }
    return {};
}

}  // namespace

bool operator==(const HazardModel& a, const HazardModel& b) {
    return a.generator() == b.generator() && a.rate_times() == b.rate_times() &&
           a.rate_table() == b.rate_table() && a.horizon() == b.horizon() &&
           a.initial_dist() == b.initial_dist();
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.hazard == b.hazard && a.market.s0 == b.market.s0 && a.market.mu == b.market.mu &&
           a.market.sigma == b.market.sigma && a.market.horizon == b.market.horizon &&
           a.claim == b.claim && a.cohort == b.cohort && a.grid_steps == b.grid_steps &&
           a.n_paths == b.n_paths && a.quadrature_nodes == b.quadrature_nodes &&
           a.seed == b.seed && a.outputs == b.outputs && a.report == b.report;
}

ScenarioConfig load_config(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "scenario document must be an object");

    HazardModel hazard = parse_hazard(require(doc, "", "hazard"));
    ScenarioConfig cfg{hazard, parse_market(require(doc, "", "market"), hazard.horizon()),
                       parse_claim(require(doc, "", "claim"))};

    auto positive_int = [&](const char* key, long long min_value, bool required,
                            long long fallback) -> long long {
        if (!doc.contains(key)) {
            if (required) throw ConfigError(key, "missing required field");
            return fallback;
        }
        const long long v = integer(doc.at(key), key);
        if (v < min_value) {
            throw ConfigError(key, "must be >= " + std::to_string(min_value));
        }
        return v;
    };
    cfg.cohort = static_cast<int>(positive_int("l_a", 1, true, 0));
    cfg.grid_steps = static_cast<int>(positive_int("grid_steps", 100, true, 0));
    cfg.n_paths = static_cast<int>(positive_int("n_paths", 1, true, 0));
    cfg.quadrature_nodes = static_cast<int>(positive_int("quadrature_nodes", 2, false, 64));
    if (!doc.contains("seed")) throw ConfigError("seed", "missing required field");
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
        throw ConfigError("seed", "expected a nonnegative integer");
    }
    if (doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() < 0) {
        throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("outputs")) {
        if (!doc.at("outputs").is_string()) throw ConfigError("outputs", "expected a path string");
        cfg.outputs = doc.at("outputs").get<std::string>();
    }
    if (doc.contains("report")) {
        const json& r = doc.at("report");
        if (!r.is_object()) throw ConfigError("report", "expected an object");
        if (r.contains("path_csv_limit")) {
            cfg.report.path_csv_limit =
                static_cast<int>(integer(r.at("path_csv_limit"), "report.path_csv_limit"));
            if (cfg.report.path_csv_limit < 0) {
                throw ConfigError("report.path_csv_limit", "must be >= 0");
            }
        }
        if (r.contains("oracle_paths")) {
            cfg.report.oracle_paths =
                static_cast<int>(integer(r.at("oracle_paths"), "report.oracle_paths"));
            if (cfg.report.oracle_paths < 0) throw ConfigError("report.oracle_paths", "must be >= 0");
        }
    }
    return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& config) {
    json doc;
    doc["hazard"] = hazard_json(config.hazard);
    doc["market"] = {{"s0", config.market.s0},
                     {"mu", config.market.mu},
                     {"sigma", config.market.sigma},
                     {"horizon", config.market.horizon}};
    doc["claim"] = {{"contract", to_string(config.claim.contract)},
                    {"payoff", payoff_json(config.claim.payoff)}};
    doc["l_a"] = config.cohort;
    doc["grid_steps"] = config.grid_steps;
    doc["n_paths"] = config.n_paths;
    doc["quadrature_nodes"] = config.quadrature_nodes;
    doc["seed"] = config.seed;
    doc["outputs"] = config.outputs;
    doc["report"] = {{"path_csv_limit", config.report.path_csv_limit},
                     {"oracle_paths", config.report.oracle_paths}};
    return doc.dump(2) + "\n";
}

}  // namespace lrm
