#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "wisq/dp.hpp"
#include "wisq/errors.hpp"
#include "wisq/experiment.hpp"
#include "wisq/fluid.hpp"
#include "wisq/simulator.hpp"

using nlohmann::json;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitModel = 2;

std::string default_out_dir() {
    const char* env = std::getenv("WISQ_OUT_DIR");
    return env ? env : ".";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open output file '" + path + "'");
    return out;
}

int run_whittle_table(int rate, double weight, int buffer, const std::string& out_path) {
    wisq::ClassSpec cls{rate, weight, 1.0};
    const wisq::WhittleTable algo = wisq::whittle_algorithm1(cls, buffer);
    const wisq::WhittleTable closed = wisq::whittle_closed_form(cls, buffer);
    const bool short_regime = buffer < rate;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_out(out_path);
        os = &file;
    }
    *os << "state,closed_form_index,algorithm1_index,match";
    if (short_regime) *os << ",printed_form_index,printed_advisory_ok";
    *os << "\n";
    for (int n = 0; n <= buffer; ++n) {
        const double c = closed.at(n);
        const double a = algo.at(n);
        const bool match = std::abs(c - a) <= 1e-9 * std::max(1.0, std::abs(a));
        *os << n << "," << c << "," << a << "," << (match ? 1 : 0);
        if (short_regime) {
            const double printed = wisq::short_buffer_index_formula(n, cls, buffer);
            const bool ok = std::abs(printed - a) <= 1e-9 * std::max(1.0, std::abs(a));
            *os << "," << printed << "," << (ok ? 1 : 0);
        }
        *os << "\n";
    }
    return 0;
}

int run_stationary(int rate, double weight, int buffer, int threshold,
                   const std::string& out_path) {
    wisq::ClassSpec cls{rate, weight, 1.0};
    cls.validate();
    const wisq::StationaryDist closed = wisq::stationary_closed_form(cls, threshold, buffer);
    const wisq::StationaryDist solved =
        wisq::stationary_solve(wisq::threshold_kernel(cls, threshold, buffer));

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_out(out_path);
        os = &file;
    }
    *os << "state,closed_form,linear_solve\n";
    for (int i = 0; i <= buffer; ++i)
        *os << i << "," << closed.u[static_cast<size_t>(i)] << ","
            << solved.u[static_cast<size_t>(i)] << "\n";
    if (!out_path.empty()) {
        json summary = {{"regime", wisq::regime_name(closed.regime)},
                        {"threshold", threshold},
                        {"mean_cost", wisq::mean_cost(cls, threshold, buffer)},
                        {"passive_time", wisq::passive_time(cls, threshold, buffer)}};
        std::cout << summary.dump(2) << "\n";
    }
    return 0;
}

int run_relaxed_solve(const std::string& config_path, const std::string& out_path) {
    const wisq::ExperimentConfig cfg = wisq::load_experiment_file(config_path);
    const wisq::RelaxedSolution sol = wisq::solve_relaxed(cfg.system);
    const json j = wisq::solution_to_json(sol);
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) open_out(out_path) << j.dump(2) << "\n";
    return 0;
}

struct RunKey {
    int users;
    wisq::PolicyKind policy;
    uint64_t seed;
    bool full_start;
    bool operator<(const RunKey& o) const {
        return std::tie(users, policy, seed, full_start) <
               std::tie(o.users, o.policy, o.seed, o.full_start);
    }
};

std::map<RunKey, wisq::SimTrace> run_sweep(const wisq::ExperimentConfig& cfg,
                                           bool record_proportions) {
    std::vector<std::pair<RunKey, std::future<wisq::SimTrace>>> jobs;
    std::vector<bool> starts;
    if (cfg.start == wisq::ExperimentConfig::Start::Both) starts = {false, true};
    else starts = {cfg.start == wisq::ExperimentConfig::Start::Full};

    // Tables depend only on the class list; share them across runs.
    auto tables = std::make_shared<std::vector<wisq::WhittleTable>>();
    for (const auto& cls : cfg.system.classes)
        tables->push_back(wisq::whittle_closed_form(cls, cfg.system.buffer));
    auto relaxed = std::make_shared<wisq::RelaxedSolution>();
    bool have_relaxed = false;
    for (const auto p : cfg.policies)
        if (p == wisq::PolicyKind::RelaxedRandomized) {
            *relaxed = wisq::solve_relaxed(cfg.system, *tables);
            have_relaxed = true;
        }

    for (const int n : cfg.sweep)
        for (const auto policy : cfg.policies)
            for (const uint64_t seed : cfg.seeds)
                for (const bool full : starts) {
                    wisq::SystemConfig system = cfg.system;
                    system.users = n;
                    wisq::SimOptions options;
                    options.horizon = cfg.horizon;
                    options.seed = seed;
                    options.start = full ? wisq::SimOptions::Start::Full
                                         : wisq::SimOptions::Start::Empty;
                    options.record_proportions = record_proportions;
                    RunKey key{n, policy, seed, full};
                    jobs.emplace_back(
                        key, std::async(std::launch::async, [system, policy, tables, relaxed,
                                                             have_relaxed, options]() {
                            if (policy == wisq::PolicyKind::RelaxedRandomized) {
                                if (!have_relaxed)
                                    throw wisq::model_error("relaxed policy without solution");
                                return wisq::simulate_relaxed_reference(system, *relaxed,
                                                                        options);
                            }
                            return wisq::simulate(system, policy, *tables, options);
                        }));
                }
    std::map<RunKey, wisq::SimTrace> out;
    for (auto& [key, fut] : jobs) out.emplace(key, fut.get());
    return out;
}

double mean_cost_over_seeds(const std::map<RunKey, wisq::SimTrace>& runs, int n,
                            wisq::PolicyKind policy, const std::vector<uint64_t>& seeds,
                            bool full_start, int class_id = -1) {
    double acc = 0.0;
    for (const uint64_t s : seeds) {
        const auto& trace = runs.at(RunKey{n, policy, s, full_start});
        acc += class_id < 0 ? trace.cost_per_user
                            : trace.class_cost_per_user[static_cast<size_t>(class_id)];
    }
    return acc / static_cast<double>(seeds.size());
}

int run_simulate(const wisq::ExperimentConfig& cfg, const std::string& trace_path) {
    namespace fs = std::filesystem;
    for (const int n : cfg.sweep) {  // fail before any run starts
        wisq::SystemConfig probe = cfg.system;
        probe.users = n;
        probe.validate();
    }
    const std::string out_dir = cfg.output_dir.empty() ? default_out_dir() : cfg.output_dir;
    fs::create_directories(out_dir);

    const bool preset_series = cfg.preset == "fig2" || cfg.preset == "fig4" ||
                               cfg.preset == "fig5" || cfg.preset == "fig6";
    const bool want_proportions = cfg.preset == "fig2" || !trace_path.empty();
    const auto runs = run_sweep(cfg, want_proportions);

    json summary;
    summary["config"] = wisq::experiment_to_json(cfg);
    json results = json::array();

    std::vector<double> target;
    wisq::RelaxedSolution bound;
    const bool long_regime = [&] {
        for (const auto& c : cfg.system.classes)
            if (cfg.system.buffer < 2 * c.rate) return false;
        return true;
    }();
    if (long_regime) {
        bound = wisq::solve_relaxed(cfg.system);
        target = wisq::flatten_proportions(bound.z_star);
        summary["rp_bound"] = bound.cost_per_user;
    }

    for (const auto& [key, trace] : runs) {
        long hit = -2;
        if (!trace.proportions.empty() && !target.empty())
            hit = wisq::hitting_time(trace, target, cfg.epsilon);
        json r = wisq::trace_to_json(trace, hit);
        r["start"] = key.full_start ? "full" : "empty";
        results.push_back(r);
    }
    summary["runs"] = results;

    if (preset_series) {
        const std::string series_path = out_dir + "/" + cfg.preset + "_series.csv";
        std::ofstream csv = open_out(series_path);
        if (cfg.preset == "fig2") {
            csv << "users,start,seed,hitting_time\n";
            for (const auto& [key, trace] : runs) {
                const long hit = wisq::hitting_time(trace, target, cfg.epsilon);
                csv << key.users << "," << (key.full_start ? "full" : "empty") << ","
                    << key.seed << "," << hit << "\n";
            }
        } else if (cfg.preset == "fig4") {
            csv << "users,whittle_cost,maxweight_cost,rp_bound\n";
            for (const int n : cfg.sweep)
                csv << n << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::WhittleIndex, cfg.seeds,
                                            false)
                    << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::MaxWeight, cfg.seeds,
                                            false)
                    << "," << bound.cost_per_user << "\n";
        } else if (cfg.preset == "fig5") {
            csv << "users,fair_class1,fair_class2,whittle_class1,whittle_class2\n";
            for (const int n : cfg.sweep)
                csv << n << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::FairIndex, cfg.seeds,
                                            false, 0)
                    << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::FairIndex, cfg.seeds,
                                            false, 1)
                    << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::WhittleIndex, cfg.seeds,
                                            false, 0)
                    << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::WhittleIndex, cfg.seeds,
                                            false, 1)
                    << "\n";
        } else {  // fig6
            csv << "users,whittle_cost,maxweight_cost\n";
            for (const int n : cfg.sweep)
                csv << n << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::WhittleIndex, cfg.seeds,
                                            false)
                    << ","
                    << mean_cost_over_seeds(runs, n, wisq::PolicyKind::MaxWeight, cfg.seeds,
                                            false)
                    << "\n";
        }
        summary["series_csv"] = series_path;
    }

    if (!trace_path.empty()) {
        const auto& first = runs.begin()->second;
        std::ofstream csv = open_out(trace_path);
        const int states = cfg.system.buffer + 1;
        csv << "t";
        for (size_t k = 0; k < cfg.system.classes.size(); ++k)
            for (int i = 0; i < states; ++i) csv << ",z_" << k << "_" << i;
        csv << "\n";
        for (size_t t = 0; t < first.proportions.size(); ++t) {
            csv << t;
            for (const double v : first.proportions[t]) csv << "," << v;
            csv << "\n";
        }
        summary["trace_csv"] = trace_path;
    }

    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_fluid(const std::string& config_path, int steps, double perturb,
              const std::string& out_path) {
    const wisq::ExperimentConfig cfg = wisq::load_experiment_file(config_path);
    std::vector<wisq::WhittleTable> tables;
    for (const auto& cls : cfg.system.classes)
        tables.push_back(wisq::whittle_closed_form(cls, cfg.system.buffer));
    const wisq::RelaxedSolution sol = wisq::solve_relaxed(cfg.system, tables);
    const wisq::FluidSystem sys = wisq::build_fluid_map(sol, cfg.system.classes,
                                                        cfg.system.buffer, cfg.system.alpha,
                                                        tables);
    const std::vector<double> z_star = wisq::flatten_proportions(sol.z_star);
    const std::vector<double> fixed = wisq::fluid_fixed_point(sys);
    double residual = 0.0;
    for (size_t i = 0; i < fixed.size(); ++i)
        residual = std::max(residual, std::abs(fixed[i] - z_star[i]));
    const wisq::SpectralEstimate spectral = wisq::spectral_radius(sys.map);
    const double expected =
        sol.thresholds[static_cast<size_t>(sol.pivot_class)] *
        cfg.system.classes[static_cast<size_t>(sol.pivot_class)].rho();

    json out = {{"spectral_radius", spectral.radius},
                {"spectral_converged", spectral.converged},
                {"pivot_rate_product", expected},
                {"fixed_point_residual", residual},
                {"solution", wisq::solution_to_json(sol)}};

    if (steps > 0) {
        std::vector<double> z0 = z_star;
        const int lm = sol.thresholds[static_cast<size_t>(sol.pivot_class)];
        const int base = sol.pivot_class * (cfg.system.buffer + 1);
        // Shuffle pivot-class mass below the pivot index so the start stays
        // inside the switching set.
        if (lm >= 1) {
            z0[static_cast<size_t>(base + lm)] -= perturb;
            z0[static_cast<size_t>(base + lm - 1)] += perturb;
        } else {
            z0[static_cast<size_t>(base + lm + 2)] -= perturb;
            z0[static_cast<size_t>(base + lm + 1)] += perturb;
        }
        const wisq::FluidTrajectory traj = wisq::iterate_fluid(sys, z0, steps);
        out["start_inside_switching_set"] = traj.start_inside;
        if (!out_path.empty()) {
            std::ofstream csv = open_out(out_path);
            csv << "t,distance_inf\n";
            for (size_t t = 0; t < traj.z.size(); ++t) {
                double dist = 0.0;
                for (size_t i = 0; i < traj.z[t].size(); ++i)
                    dist = std::max(dist, std::abs(traj.z[t][i] - z_star[i]));
                csv << t << "," << dist << "\n";
            }
            out["trajectory_csv"] = out_path;
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_dp_verify(int rate, double weight, int buffer, double subsidy, double tol) {
    wisq::ClassSpec cls{rate, weight, 1.0};
    cls.validate();
    const wisq::DpSolution sol = wisq::relative_value_iteration(cls, subsidy, buffer, tol);
    const wisq::StructureReport report = wisq::verify_structure(sol, cls, buffer);
    const wisq::WhittleTable table = wisq::whittle_closed_form(cls, buffer);
    const wisq::DualThreshold dual = wisq::dual_threshold(subsidy, table);
    const bool threshold_match = report.threshold == dual.upper ||
                                 (dual.indifferent && report.threshold == dual.lower);
    json out = {{"subsidy", subsidy},
                {"average_cost", sol.average_cost},
                {"iterations", sol.iterations},
                {"span_residual", sol.span_residual},
                {"threshold", report.threshold},
                {"dual_threshold", dual.upper},
                {"dual_indifferent", dual.indifferent},
                {"threshold_match", threshold_match},
                {"value_monotone", report.value_monotone},
                {"value_batch_convex", report.value_batch_convex},
                {"policy_monotone", report.policy_monotone},
                {"action_gap_monotone", report.action_gap_monotone},
                {"ok", report.all_pass() && threshold_match}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whittle-index scheduling toolkit: index tables, stationary laws, "
                 "relaxed bounds, fluid maps and N-queue simulation"};
    app.require_subcommand(1);

    int rate = 5, buffer = 50, threshold = 0, steps = 0;
    double weight = 1.0, subsidy = 0.0, tol = 1e-9, perturb = 0.01, epsilon = -1.0;
    std::string out_path, config_path, preset, policy_name, trace_path, out_dir;
    long horizon = -1;
    int users = -1;
    long long seed = -1;
    std::string start;

    auto* wt = app.add_subcommand("whittle-table", "Index table for one class, both routes");
    wt->add_option("--rate", rate, "max packets per slot")->required();
    wt->add_option("--weight", weight, "holding-cost weight");
    wt->add_option("--buffer", buffer, "queue capacity L")->required();
    wt->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* st = app.add_subcommand("stationary", "Stationary law under a threshold policy");
    st->add_option("--rate", rate)->required();
    st->add_option("--weight", weight);
    st->add_option("--buffer", buffer)->required();
    st->add_option("--threshold", threshold)->required();
    st->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* rs = app.add_subcommand("relaxed-solve", "Solve the averaged-budget problem");
    rs->add_option("--config", config_path, "experiment config JSON")->required();
    rs->add_option("--out", out_path, "also write the solution JSON here");

    auto* sim = app.add_subcommand("simulate", "Run policy sweeps over N, seeds and starts");
    sim->add_option("--config", config_path, "experiment config JSON");
    sim->add_option("--preset", preset, "fig2 | fig4 | fig5 | fig6");
    sim->add_option("--policy", policy_name, "whittle | maxweight | fair | relaxed");
    sim->add_option("--users", users, "override: single N");
    sim->add_option("--horizon", horizon, "override: slots per run");
    sim->add_option("--seed", seed, "override: single seed");
    sim->add_option("--epsilon", epsilon, "override: hitting-time radius");
    sim->add_option("--start", start, "override: empty | full | both");
    sim->add_option("--out-dir", out_dir, "output directory (default $WISQ_OUT_DIR or .)");
    sim->add_option("--trace", trace_path, "write per-slot proportions CSV for the first run");

    auto* fl = app.add_subcommand("fluid", "Fluid map: spectral radius, fixed point, decay");
    fl->add_option("--config", config_path)->required();
    fl->add_option("--steps", steps, "trajectory length (0 = skip)");
    fl->add_option("--perturb", perturb, "initial mass moved off the fixed point");
    fl->add_option("--out", out_path, "trajectory CSV");

    auto* dp = app.add_subcommand("dp-verify", "Value-iteration structure certificate");
    dp->add_option("--rate", rate)->required();
    dp->add_option("--weight", weight);
    dp->add_option("--buffer", buffer)->required();
    dp->add_option("--subsidy", subsidy)->required();
    dp->add_option("--tol", tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitParse;
    }

    try {
        if (wt->parsed()) return run_whittle_table(rate, weight, buffer, out_path);
        if (st->parsed()) return run_stationary(rate, weight, buffer, threshold, out_path);
        if (rs->parsed()) return run_relaxed_solve(config_path, out_path);
        if (fl->parsed()) return run_fluid(config_path, steps, perturb, out_path);
        if (dp->parsed()) return run_dp_verify(rate, weight, buffer, subsidy, tol);
        if (sim->parsed()) {
            wisq::ExperimentConfig cfg;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw std::ios_base::failure("cannot open config file '" +
                                                      config_path + "'");
                nlohmann::json j;
                in >> j;
                // A preset flag supplies the parameter base; file fields
                // stay on top of it.
                if (!preset.empty()) j["preset"] = preset;
                cfg = wisq::parse_experiment(j);
            } else if (!preset.empty()) {
                cfg = wisq::preset_experiment(preset);
            } else {
                throw wisq::model_error("simulate needs --config or --preset");
            }
            if (!policy_name.empty()) {
                const auto p = wisq::policy_from_name(policy_name);
                if (!p) throw wisq::model_error("unknown policy '" + policy_name + "'");
                cfg.policies = {*p};
            }
            if (users > 0) {
                cfg.sweep = {users};
                cfg.system.users = users;
            }
            if (horizon > 0) cfg.horizon = horizon;
            if (seed >= 0) cfg.seeds = {static_cast<uint64_t>(seed)};
            if (epsilon > 0) cfg.epsilon = epsilon;
            if (!start.empty()) {
                if (start == "empty") cfg.start = wisq::ExperimentConfig::Start::Empty;
                else if (start == "full") cfg.start = wisq::ExperimentConfig::Start::Full;
                else if (start == "both") cfg.start = wisq::ExperimentConfig::Start::Both;
                else throw wisq::model_error("start must be empty, full or both");
            }
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            return run_simulate(cfg, trace_path);
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config parse failed: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const wisq::assumption_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const wisq::model_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return 0;
}
