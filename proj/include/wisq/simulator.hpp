#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wisq/relaxed.hpp"
#include "wisq/whittle.hpp"

namespace wisq {

enum class PolicyKind {
    WhittleIndex,       // top-M by index
    MaxWeight,          // top-M by weighted queue length
    FairIndex,          // top-M by index x running-average cost
    RelaxedRandomized,  // per-queue threshold rule, budget not enforced
};

const char* policy_name(PolicyKind p);
std::optional<PolicyKind> policy_from_name(const std::string& name);

struct SimOptions {
    long horizon = 1;
    uint64_t seed = 1;
    enum class Start { Empty, Full, Custom } start = Start::Empty;
    std::vector<uint16_t> custom_start;  // per user, used when start == Custom
    bool record_proportions = false;
};

/// Result of one run. Proportions, when recorded, are flattened as
/// [class * (L+1) + state], one row per slot (the pre-action state).
struct SimTrace {
    PolicyKind policy = PolicyKind::WhittleIndex;
    uint64_t seed = 0;
    long horizon = 0;
    int users = 0;
    int budget = 0;
    double cost_per_user = 0.0;
    std::vector<double> class_cost_per_user;  // adds up to cost_per_user
    double active_fraction = 0.0;             // scheduled share of all users
    std::vector<std::vector<double>> proportions;
};

/// Live state of the N-queue system; exposed so policies and tests can step
/// it directly.
class Simulation {
  public:
    Simulation(const SystemConfig& config, PolicyKind policy,
               const std::vector<WhittleTable>* tables, const RelaxedSolution* relaxed,
               const SimOptions& options);

    void step();                 // one slot: record costs, schedule, evolve
    SimTrace finish();           // averages + trace, after horizon steps
    SimTrace run();              // step() x horizon, then finish()

    std::span<const uint16_t> queues() const { return queue_; }
    void set_queues(std::span<const uint16_t> q);
    int class_of(uint32_t user) const { return class_of_[user]; }
    long slot() const { return slot_; }
    std::vector<double> proportion_snapshot() const;

    /// Scheduling masks (1 = transmit), one entry per user. The budgeted
    /// policies return exactly M ones, ties broken uniformly from the
    /// run's random stream.
    std::vector<uint8_t> policy_whittle() const;
    std::vector<uint8_t> policy_maxweight() const;
    std::vector<uint8_t> policy_fair() const;
    std::vector<uint8_t> policy_relaxed_randomized() const;

  private:
    std::vector<uint8_t> select_top(const std::vector<double>& key) const;
    void apply(const std::vector<uint8_t>& transmit);
    double running_cost_average(uint32_t user) const;

    SystemConfig config_;
    PolicyKind policy_;
    const std::vector<WhittleTable>* tables_;
    const RelaxedSolution* relaxed_;
    SimOptions options_;
    std::vector<uint16_t> queue_;
    std::vector<uint8_t> class_of_;
    std::vector<double> past_cost_;  // sum of a q over slots 1..t-1 (fair policy)
    long slot_ = 0;
    double cost_total_ = 0.0;
    std::vector<double> class_cost_total_;
    long scheduled_total_ = 0;
    std::vector<std::vector<double>> proportions_;
};

SimTrace simulate(const SystemConfig& config, PolicyKind policy,
                  const std::vector<WhittleTable>& tables, const SimOptions& options);
SimTrace simulate_relaxed_reference(const SystemConfig& config, const RelaxedSolution& solution,
                                    const SimOptions& options);

/// First recorded slot whose proportion vector is within epsilon of the
/// target in the max norm; -1 when the trace never enters. Throws
/// std::invalid_argument when the trace has no recorded proportions.
long hitting_time(const SimTrace& trace, std::span<const double> target, double epsilon);

}  // namespace wisq
