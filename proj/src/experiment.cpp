#include "wisq/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wisq/errors.hpp"

namespace wisq {

int minimal_users(const std::vector<ClassSpec>& classes, double alpha) {
    for (int n = 2; n <= 1000000; ++n) {
        bool ok = true;
        for (const auto& c : classes) {
            const double exact = c.fraction * n;
            if (std::abs(exact - std::lround(exact)) > 1e-9 || std::lround(exact) < 1) {
                ok = false;
                break;
            }
        }
        const long m = std::lround(alpha * n);
        if (ok && m >= 1 && m < n) return n;
    }
    throw model_error("no realizable user count below 10^6 for this class mix");
}

ExperimentConfig preset_experiment(const std::string& id) {
    ExperimentConfig cfg;
    cfg.preset = id;
    if (id == "fig2") {
        cfg.system.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
        cfg.system.buffer = 50;
        cfg.system.alpha = 0.5;
        cfg.sweep = {400, 800, 1600, 3200};
        cfg.horizon = 4000;
        cfg.seeds = {1};
        cfg.epsilon = 0.05;
        cfg.policies = {PolicyKind::WhittleIndex};
        cfg.start = ExperimentConfig::Start::Both;
    } else if (id == "fig4") {
        cfg.system.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
        cfg.system.buffer = 50;
        cfg.system.alpha = 0.5;
        cfg.sweep = {200, 400, 800, 1600, 3200};
        cfg.horizon = 20000;
        cfg.seeds = {1, 2, 3};
        cfg.policies = {PolicyKind::WhittleIndex, PolicyKind::MaxWeight};
        cfg.start = ExperimentConfig::Start::Empty;
    } else if (id == "fig5") {
        cfg.system.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
        cfg.system.buffer = 50;
        cfg.system.alpha = 0.5;
        cfg.sweep = {200, 400, 800, 1600, 3200};
        cfg.horizon = 20000;
        cfg.seeds = {1, 2, 3};
        cfg.policies = {PolicyKind::FairIndex, PolicyKind::WhittleIndex};
        cfg.start = ExperimentConfig::Start::Empty;
    } else if (id == "fig6") {
        cfg.system.classes = {{20, 1.0, 0.5}, {30, 1.0, 0.5}};
        cfg.system.buffer = 10;
        cfg.system.alpha = 0.5;
        cfg.sweep = {200, 400, 800, 1600, 3200};
        cfg.horizon = 10000;
        cfg.seeds = {1, 2, 3};
        cfg.policies = {PolicyKind::WhittleIndex, PolicyKind::MaxWeight};
        cfg.start = ExperimentConfig::Start::Empty;
    } else {
        throw model_error("unknown preset '" + id + "'");
    }
    cfg.system.users = cfg.sweep.front();
    return cfg;
}

namespace {

void require_known_fields(const nlohmann::json& j, const std::set<std::string>& allowed,
                          const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.contains(it.key()))
            throw model_error("unknown field '" + it.key() + "' in " + where);
}

ClassSpec parse_class(const nlohmann::json& j) {
    require_known_fields(j, {"rate", "weight", "fraction"}, "class spec");
    ClassSpec c;
    c.rate = j.at("rate").get<int>();
    c.weight = j.value("weight", 1.0);
    c.fraction = j.value("fraction", 1.0);
    return c;
}

}  // namespace

ExperimentConfig parse_experiment(const nlohmann::json& j) {
    require_known_fields(j,
                         {"preset", "classes", "buffer", "alpha", "users", "sweep", "horizon",
                          "seeds", "epsilon", "policies", "start", "output_dir"},
                         "experiment config");
    ExperimentConfig cfg;
    if (j.contains("preset") && j.at("preset").get<std::string>() != "none")
        cfg = preset_experiment(j.at("preset").get<std::string>());

    if (j.contains("classes")) {
        cfg.system.classes.clear();
        for (const auto& cj : j.at("classes")) cfg.system.classes.push_back(parse_class(cj));
    }
    if (j.contains("buffer")) cfg.system.buffer = j.at("buffer").get<int>();
    if (j.contains("alpha")) cfg.system.alpha = j.at("alpha").get<double>();
    if (j.contains("sweep")) cfg.sweep = j.at("sweep").get<std::vector<int>>();
    if (j.contains("users")) {
        cfg.system.users = j.at("users").get<int>();
        if (!j.contains("sweep")) cfg.sweep = {cfg.system.users};
    }
    if (cfg.sweep.empty()) {
        cfg.system.users = minimal_users(cfg.system.classes, cfg.system.alpha);
        cfg.sweep = {cfg.system.users};
    } else {
        cfg.system.users = cfg.sweep.front();
    }
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<long>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("policies")) {
        cfg.policies.clear();
        for (const auto& pj : j.at("policies")) {
            const auto p = policy_from_name(pj.get<std::string>());
            if (!p) throw model_error("unknown policy '" + pj.get<std::string>() + "'");
            cfg.policies.push_back(*p);
        }
    }
    if (j.contains("start")) {
        const std::string s = j.at("start").get<std::string>();
        if (s == "empty") cfg.start = ExperimentConfig::Start::Empty;
        else if (s == "full") cfg.start = ExperimentConfig::Start::Full;
        else if (s == "both") cfg.start = ExperimentConfig::Start::Both;
        else throw model_error("start must be one of empty, full, both");
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

    if (cfg.horizon < 1) throw model_error("horizon must be at least 1");
    if (!(cfg.epsilon > 0.0)) throw model_error("epsilon must be positive");
    if (cfg.seeds.empty()) throw model_error("at least one seed is required");
    cfg.system.validate_classes();
    return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return parse_experiment(j);
}

nlohmann::json experiment_to_json(const ExperimentConfig& config) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : config.system.classes)
        classes.push_back({{"rate", c.rate}, {"weight", c.weight}, {"fraction", c.fraction}});
    nlohmann::json policies = nlohmann::json::array();
    for (const auto& p : config.policies) policies.push_back(policy_name(p));
    const char* start = config.start == ExperimentConfig::Start::Empty  ? "empty"
                        : config.start == ExperimentConfig::Start::Full ? "full"
                                                                        : "both";
    return {{"preset", config.preset},
            {"classes", classes},
            {"buffer", config.system.buffer},
            {"alpha", config.system.alpha},
            {"users", config.system.users},
            {"sweep", config.sweep},
            {"horizon", config.horizon},
            {"seeds", config.seeds},
            {"epsilon", config.epsilon},
            {"policies", policies},
            {"start", start},
            {"output_dir", config.output_dir}};
}

nlohmann::json solution_to_json(const RelaxedSolution& solution) {
    // Classes are numbered from 1 in reports; states keep their raw values.
    return {{"w_star", solution.w_star},
            {"m", solution.pivot_class + 1},
            {"p", solution.pivot_state},
            {"p_lower", solution.pivot_lower},
            {"l", solution.thresholds},
            {"theta", solution.theta},
            {"z_star", solution.z_star},
            {"cost_per_user", solution.cost_per_user},
            {"buffer", solution.buffer},
            {"alpha", solution.alpha}};
}

nlohmann::json trace_to_json(const SimTrace& trace, long hitting) {
    nlohmann::json out = {{"policy", policy_name(trace.policy)},
                          {"seed", trace.seed},
                          {"horizon", trace.horizon},
                          {"users", trace.users},
                          {"budget", trace.budget},
                          {"cost_per_user", trace.cost_per_user},
                          {"class_cost_per_user", trace.class_cost_per_user},
                          {"active_fraction", trace.active_fraction}};
    if (hitting != -2) out["hitting_time"] = hitting;
    return out;
}

}  // namespace wisq
