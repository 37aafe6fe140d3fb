#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wisq/bigrat.hpp"
#include "wisq/stationary.hpp"

namespace wisq {

/// Per-state Whittle index values for one class, plus the cost curves they
/// were computed from. `pivot` is the last state priced at its marginal
/// rate; every state above it shares the buffer-limited value. For L < R
/// each state keeps its own value and pivot = L.
struct WhittleTable {
    std::vector<double> index;  // size L+1
    int pivot = -1;             // d
    ClassSpec cls;
    int buffer = 0;
    CostCurve curves;

    double at(int q) const { return index.at(static_cast<size_t>(q)); }
    int states() const { return static_cast<int>(index.size()); }
};

/// Verdict of the three structural conditions behind the index computation:
/// passive time nondecreasing, holding cost nondecreasing, and equal passive
/// times forcing strictly ordered holding costs.
struct IndexabilityReport {
    bool is_indexable = true;
    bool passive_monotone = true;
    bool holding_monotone = true;
    bool equal_passive_strict_holding = true;
    std::vector<std::pair<int, std::string>> violations;
};

/// Abscissa x_{i,j} where the lines a_i - W b_i and a_j - W b_j cross.
/// Throws std::invalid_argument when b_i == b_j (parallel lines).
double intersection(int i, int j, const CostCurve& curves);

/// The buffer size at which state n's marginal rate w_n stops being the
/// index: f(n) = w_n (1 - b_n) + a_n on the sub-R closed forms, with
/// f(-1) = 0 and f(R) = +inf.
double f_value(int n, const ClassSpec& cls);

/// The unique d in [0, R-1] with f(d) < a L <= f(d+1). Requires L >= 2R;
/// throws std::invalid_argument otherwise. Decided in exact arithmetic.
int find_d(const ClassSpec& cls, int buffer);

IndexabilityReport check_indexability(const ClassSpec& cls, int buffer);

/// Index table by the generic minimizer loop, run in exact rational
/// arithmetic so that ties resolve deterministically. Refuses classes that
/// fail check_indexability.
WhittleTable whittle_algorithm1(const ClassSpec& cls, int buffer);

/// Index table from the closed-form expressions: w_n = a R n / (R - n) up
/// to the pivot and the single buffer-limited value x_{L,d} above it when
/// L >= R; the per-state short-buffer expressions when L < R.
WhittleTable whittle_closed_form(const ClassSpec& cls, int buffer);

/// Short-buffer (L < R) index of one state from the printed per-state
/// expressions; advisory next to whittle_algorithm1, which stays the
/// ground truth.
double short_buffer_index_formula(int n, const ClassSpec& cls, int buffer);

namespace exact {

/// Stationary numerators over the implicit denominator R^(L+2).
std::vector<BigInt> stationary_numerators(int rate, int threshold, int buffer);

/// Weight-1 cost-curve numerators over denom; slot n+1 holds threshold n.
struct Curves {
    std::vector<BigInt> holding;  // numerator of sum u(q) q
    std::vector<BigInt> passive;  // numerator of sum_{q<=n} u(q)
    BigInt denom;
    int buffer = 0;
};

Curves curves(int rate, int buffer);

/// Weight-1 index values; multiply by the class weight to price a class.
std::vector<BigRatio> algorithm1(int rate, int buffer);
std::vector<BigRatio> closed_form(int rate, int buffer);

/// Largest n in [0, R-1] whose crossover buffer stays below L, on the true
/// curves. Defined for L >= R.
int pivot_state(int rate, int buffer);

}  // namespace exact

}  // namespace wisq
