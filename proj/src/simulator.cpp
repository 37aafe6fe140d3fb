#include "wisq/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "wisq/errors.hpp"
#include "wisq/rng.hpp"

namespace wisq {

namespace {
// Stream tags for the counter RNG.
constexpr uint64_t kArrival = 0xA1;
constexpr uint64_t kTieBreak = 0x7E;
constexpr uint64_t kBernoulli = 0xBE;
}  // namespace

const char* policy_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::WhittleIndex: return "whittle";
        case PolicyKind::MaxWeight: return "maxweight";
        case PolicyKind::FairIndex: return "fair";
        case PolicyKind::RelaxedRandomized: return "relaxed";
    }
    return "?";
}

std::optional<PolicyKind> policy_from_name(const std::string& name) {
    if (name == "whittle") return PolicyKind::WhittleIndex;
    if (name == "maxweight") return PolicyKind::MaxWeight;
    if (name == "fair") return PolicyKind::FairIndex;
    if (name == "relaxed") return PolicyKind::RelaxedRandomized;
    return std::nullopt;
}

Simulation::Simulation(const SystemConfig& config, PolicyKind policy,
                       const std::vector<WhittleTable>* tables, const RelaxedSolution* relaxed,
                       const SimOptions& options)
    : config_(config), policy_(policy), tables_(tables), relaxed_(relaxed), options_(options) {
    config_.validate();
    const bool needs_tables =
        policy == PolicyKind::WhittleIndex || policy == PolicyKind::FairIndex;
    if (needs_tables && (!tables_ || tables_->size() != config_.classes.size()))
        throw std::invalid_argument("index policies need one Whittle table per class");
    if (policy == PolicyKind::RelaxedRandomized && !relaxed_)
        throw std::invalid_argument("the randomized reference policy needs a relaxed solution");

    if (std::abs(config_.alpha * config_.users - config_.budget()) > 1e-9)
        std::fprintf(stderr,
                     "note: alpha * N = %.6f is not integral; running with budget M = %d\n",
                     config_.alpha * config_.users, config_.budget());

    const int n = config_.users;
    queue_.assign(static_cast<size_t>(n), 0);
    class_of_.resize(static_cast<size_t>(n));
    uint32_t next = 0;
    for (size_t k = 0; k < config_.classes.size(); ++k)
        for (int c = 0; c < config_.class_count(static_cast<int>(k)); ++c)
            class_of_[next++] = static_cast<uint8_t>(k);

    if (options_.start == SimOptions::Start::Full) {
        std::fill(queue_.begin(), queue_.end(), static_cast<uint16_t>(config_.buffer));
    } else if (options_.start == SimOptions::Start::Custom) {
        if (static_cast<int>(options_.custom_start.size()) != n)
            throw std::invalid_argument("custom start needs one queue length per user");
        queue_ = options_.custom_start;
    }
    past_cost_.assign(static_cast<size_t>(n), 0.0);
    class_cost_total_.assign(config_.classes.size(), 0.0);
}

void Simulation::set_queues(std::span<const uint16_t> q) {
    if (q.size() != queue_.size()) throw std::invalid_argument("queue vector size mismatch");
    queue_.assign(q.begin(), q.end());
}

std::vector<double> Simulation::proportion_snapshot() const {
    const int states = config_.buffer + 1;
    std::vector<double> z(config_.classes.size() * static_cast<size_t>(states), 0.0);
    for (size_t u = 0; u < queue_.size(); ++u)
        z[class_of_[u] * static_cast<size_t>(states) + queue_[u]] += 1.0;
    for (double& v : z) v /= config_.users;
    return z;
}

std::vector<uint8_t> Simulation::select_top(const std::vector<double>& key) const {
    const int n = config_.users;
    const int m = config_.budget();
    std::vector<uint8_t> mask(static_cast<size_t>(n), 0);
    // Cutoff value such that fewer than M users lie strictly above it and at
    // least M lie at or above; everyone above transmits, the remainder of
    // the budget is drawn uniformly from the users sitting exactly on it.
    std::vector<double> sorted(key);
    std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end(),
                     std::greater<double>());
    const double cut = sorted[static_cast<size_t>(m - 1)];
    int above = 0;
    std::vector<uint32_t> boundary;
    for (int u = 0; u < n; ++u) {
        if (key[static_cast<size_t>(u)] > cut) {
            mask[static_cast<size_t>(u)] = 1;
            ++above;
        } else if (key[static_cast<size_t>(u)] == cut) {
            boundary.push_back(static_cast<uint32_t>(u));
        }
    }
    int need = m - above;
    assert(need >= 1 && need <= static_cast<int>(boundary.size()));
    // Partial Fisher-Yates over the boundary bucket.
    for (int i = 0; i < need; ++i) {
        const uint64_t j = i + draw_below(options_.seed, kTieBreak, static_cast<uint64_t>(slot_),
                                          static_cast<uint64_t>(i), boundary.size() - i);
        std::swap(boundary[static_cast<size_t>(i)], boundary[j]);
        mask[boundary[static_cast<size_t>(i)]] = 1;
    }
    return mask;
}

std::vector<uint8_t> Simulation::policy_whittle() const {
    std::vector<double> key(queue_.size());
    for (size_t u = 0; u < queue_.size(); ++u)
        key[u] = (*tables_)[class_of_[u]].at(queue_[u]);
    return select_top(key);
}

std::vector<uint8_t> Simulation::policy_maxweight() const {
    std::vector<double> key(queue_.size());
    for (size_t u = 0; u < queue_.size(); ++u)
        key[u] = config_.classes[class_of_[u]].weight * queue_[u];
    return select_top(key);
}

double Simulation::running_cost_average(uint32_t user) const {
    // Mean of a q over slots 1..t, with the initial cost seeding slot 0.
    const double current = config_.classes[class_of_[user]].weight * queue_[user];
    if (slot_ == 0) return current;
    return (past_cost_[user] + current) / static_cast<double>(slot_);
}

std::vector<uint8_t> Simulation::policy_fair() const {
    std::vector<double> key(queue_.size());
    for (size_t u = 0; u < queue_.size(); ++u)
        key[u] = (*tables_)[class_of_[u]].at(queue_[u]) *
                 running_cost_average(static_cast<uint32_t>(u));
    return select_top(key);
}

std::vector<uint8_t> Simulation::policy_relaxed_randomized() const {
    std::vector<uint8_t> mask(queue_.size(), 0);
    for (size_t u = 0; u < queue_.size(); ++u) {
        const int k = class_of_[u];
        const int q = queue_[u];
        const int threshold = relaxed_->thresholds[static_cast<size_t>(k)];
        if (q > threshold) {
            mask[u] = 1;
        } else if (k == relaxed_->pivot_class && q > relaxed_->pivot_lower) {
            // Between the two mixed thresholds: transmit with the weight of
            // the lower policy.
            const double p = 1.0 - relaxed_->theta;
            if (draw_unit(options_.seed, kBernoulli, static_cast<uint64_t>(slot_),
                          static_cast<uint64_t>(u)) < p)
                mask[u] = 1;
        }
    }
    return mask;
}

void Simulation::apply(const std::vector<uint8_t>& transmit) {
    const int buffer = config_.buffer;
    long scheduled = 0;
    for (size_t u = 0; u < queue_.size(); ++u) {
        const ClassSpec& cls = config_.classes[class_of_[u]];
        int q = queue_[u];
        if (transmit[u]) {
            q = std::max(q - cls.rate, 0);
            ++scheduled;
        }
        const int arrival = static_cast<int>(draw_below(
            options_.seed, kArrival, static_cast<uint64_t>(slot_), u, cls.rate));
        queue_[u] = static_cast<uint16_t>(std::min(q + arrival, buffer));
    }
    scheduled_total_ += scheduled;
}

void Simulation::step() {
    for (size_t u = 0; u < queue_.size(); ++u)
        class_cost_total_[class_of_[u]] += config_.classes[class_of_[u]].weight * queue_[u];
    if (options_.record_proportions) proportions_.push_back(proportion_snapshot());

    std::vector<uint8_t> mask;
    switch (policy_) {
        case PolicyKind::WhittleIndex: mask = policy_whittle(); break;
        case PolicyKind::MaxWeight: mask = policy_maxweight(); break;
        case PolicyKind::FairIndex: mask = policy_fair(); break;
        case PolicyKind::RelaxedRandomized: mask = policy_relaxed_randomized(); break;
    }
    if (policy_ == PolicyKind::FairIndex && slot_ >= 1) {
        // Fold this slot's cost into the history the next slots average over.
        for (size_t u = 0; u < queue_.size(); ++u)
            past_cost_[u] += config_.classes[class_of_[u]].weight * queue_[u];
    }
    apply(mask);
    ++slot_;
}

SimTrace Simulation::finish() {
    SimTrace trace;
    trace.policy = policy_;
    trace.seed = options_.seed;
    trace.horizon = slot_;
    trace.users = config_.users;
    trace.budget = config_.budget();
    const double norm = static_cast<double>(slot_) * config_.users;
    trace.class_cost_per_user.resize(class_cost_total_.size());
    double total = 0.0;
    for (size_t k = 0; k < class_cost_total_.size(); ++k) {
        trace.class_cost_per_user[k] = class_cost_total_[k] / norm;
        total += trace.class_cost_per_user[k];
    }
    trace.cost_per_user = total;
    trace.active_fraction = static_cast<double>(scheduled_total_) / norm;
    trace.proportions = std::move(proportions_);
    return trace;
}

SimTrace Simulation::run() {
    for (long t = 0; t < options_.horizon; ++t) step();
    return finish();
}

SimTrace simulate(const SystemConfig& config, PolicyKind policy,
                  const std::vector<WhittleTable>& tables, const SimOptions& options) {
    Simulation sim(config, policy, &tables, nullptr, options);
    return sim.run();
}

SimTrace simulate_relaxed_reference(const SystemConfig& config, const RelaxedSolution& solution,
                                    const SimOptions& options) {
    Simulation sim(config, PolicyKind::RelaxedRandomized, nullptr, &solution, options);
    return sim.run();
}

long hitting_time(const SimTrace& trace, std::span<const double> target, double epsilon) {
    if (trace.proportions.empty())
        throw std::invalid_argument("hitting_time needs a trace with recorded proportions");
    for (size_t t = 0; t < trace.proportions.size(); ++t) {
        const auto& z = trace.proportions[t];
        if (z.size() != target.size())
            throw std::invalid_argument("target dimension does not match the trace");
        double dist = 0.0;
        for (size_t i = 0; i < z.size(); ++i) dist = std::max(dist, std::abs(z[i] - target[i]));
        if (dist < epsilon) return static_cast<long>(t);
    }
    return -1;
}

}  // namespace wisq
