#include "wisq/whittle.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "wisq/errors.hpp"

namespace wisq {

double intersection(int i, int j, const CostCurve& curves) {
    const double bi = curves.passive_at(i);
    const double bj = curves.passive_at(j);
    if (std::abs(bi - bj) < 1e-13)
        throw std::invalid_argument("degenerate intersection: equal passive times at " +
                                    std::to_string(i) + " and " + std::to_string(j));
    return (curves.holding_at(i) - curves.holding_at(j)) / (bi - bj);
}

double f_value(int n, const ClassSpec& cls) {
    const int rate = cls.rate;
    if (n < -1 || n > rate) throw std::invalid_argument("f is defined on [-1, R]");
    if (n == -1) return 0.0;
    if (n == rate) return std::numeric_limits<double>::infinity();
    const double a = cls.weight;
    const double r = rate;
    const double w_n = a * r * n / (r - n);
    const double b_n = (1.0 - n / (2.0 * r)) * (n + 1) / r;
    const double a_n = a * ((r - 1.0) / 2.0 + n * (n + 1) / (2.0 * r));
    return w_n * (1.0 - b_n) + a_n;
}

int find_d(const ClassSpec& cls, int buffer) {
    if (buffer < 2 * cls.rate)
        throw std::invalid_argument("find_d requires the long-buffer regime L >= 2R");
    return exact::pivot_state(cls.rate, buffer);
}

IndexabilityReport check_indexability(const ClassSpec& cls, int buffer) {
    const CostCurve curves = build_cost_curves(cls, buffer);
    IndexabilityReport report;
    for (int n = 0; n <= buffer; ++n) {
        if (curves.passive_at(n) < curves.passive_at(n - 1) - 1e-12) {
            report.passive_monotone = false;
            report.violations.emplace_back(n, "passive time decreases");
        }
        if (curves.holding_at(n) < curves.holding_at(n - 1) - 1e-12) {
            report.holding_monotone = false;
            report.violations.emplace_back(n, "holding cost decreases");
        }
    }
    // Equal passive times must still order the holding costs strictly.
    for (int i = -1; i <= buffer; ++i) {
        for (int j = i + 1; j <= buffer; ++j) {
            if (std::abs(curves.passive_at(i) - curves.passive_at(j)) > 1e-12) continue;
            if (!(curves.holding_at(j) > curves.holding_at(i) + 1e-12)) {
                report.equal_passive_strict_holding = false;
                report.violations.emplace_back(
                    j, "equal passive time without strictly larger holding cost vs " +
                           std::to_string(i));
            }
        }
    }
    report.is_indexable = report.passive_monotone && report.holding_monotone &&
                          report.equal_passive_strict_holding;
    return report;
}

namespace exact {

std::vector<BigInt> stationary_numerators(int rate, int threshold, int buffer) {
    const int R = rate;
    const int L = buffer;
    const int n = threshold;
    if (n < -1 || n > L) throw std::invalid_argument("threshold out of [-1, L]");
    // Everything lives over the common denominator R^(L+2).
    auto rp = [&](int e) { return BigInt::pow_int(R, e); };      // R^e
    auto qp = [&](int e) { return BigInt::pow_int(R - 1, e); };  // (R-1)^e
    std::vector<BigInt> num(static_cast<size_t>(L) + 1, BigInt(0));
    auto set = [&](int i, BigInt v) {
        assert(num[static_cast<size_t>(i)].is_zero());
        num[static_cast<size_t>(i)] = std::move(v);
    };
    auto geometric = [&](int i) { return qp(n - i) * rp(L + 1 - (n - i)); };  // rho (1-rho)^(n-i)
    auto linear_lo = [&](int i) { return BigInt(R - (n - i)) * rp(L); };      // rho - (n-i) rho^2
    auto linear_hi = [&](int i) { return BigInt(R - (i - n)) * rp(L); };      // rho - (i-n) rho^2
    auto clipped_atom = [&]() {  // (1-rho)^(n-L+R+1) - rho (L-1-n)
        const int e = n - L + R + 1;
        return qp(e) * rp(L + 2 - e) - BigInt(L - 1 - n) * rp(L + 1);
    };

    if (n == L) {
        set(L, rp(L + 2));
    } else if (L < R) {
        for (int i = 0; i <= n; ++i) set(i, geometric(i));
        for (int i = n + 1; i <= L - 1; ++i) set(i, rp(L + 1));
        set(L, qp(n + 1) * rp(L + 1 - n) - BigInt(L - n - 1) * rp(L + 1));
    } else if (L < 2 * R) {
        if (n <= L - R - 1) {
            for (int i = 0; i <= n; ++i) set(i, linear_lo(i));
            for (int i = n + 1; i <= R - 1; ++i) set(i, rp(L + 1));
            for (int i = R; i <= n + R; ++i) set(i, linear_hi(i));
        } else if (n <= R - 1) {
            for (int i = 0; i <= L - R - 1; ++i) set(i, linear_lo(i));
            for (int i = L - R; i <= n; ++i) set(i, geometric(i));
            for (int i = n + 1; i <= R - 1; ++i) set(i, rp(L + 1));
            for (int i = R; i <= L - 1; ++i) set(i, linear_hi(i));
            set(L, clipped_atom());
        } else {
            for (int i = n - R + 1; i <= L - R - 1; ++i) set(i, linear_lo(i));
            for (int i = std::max(L - R, n - R + 1); i <= n; ++i) set(i, geometric(i));
            for (int i = n + 1; i <= L - 1; ++i) set(i, linear_hi(i));
            set(L, clipped_atom());
        }
    } else {
        if (n <= R - 1) {
            for (int i = 0; i <= n; ++i) set(i, linear_lo(i));
            for (int i = n + 1; i <= R - 1; ++i) set(i, rp(L + 1));
            for (int i = R; i <= n + R; ++i) set(i, linear_hi(i));
        } else if (n <= L - R - 1) {
            for (int i = n - R + 1; i <= n; ++i) set(i, linear_lo(i));
            for (int i = n + 1; i <= n + R - 1; ++i) set(i, linear_hi(i));
        } else {
            for (int i = n - R + 1; i <= L - R - 1; ++i) set(i, linear_lo(i));
            for (int i = std::max(L - R, n - R + 1); i <= n; ++i) set(i, geometric(i));
            for (int i = n + 1; i <= L - 1; ++i) set(i, linear_hi(i));
            set(L, clipped_atom());
        }
    }
    return num;
}

Curves curves(int rate, int buffer) {
    Curves out;
    out.buffer = buffer;
    out.denom = BigInt::pow_int(rate, buffer + 2);
    out.holding.assign(static_cast<size_t>(buffer) + 2, BigInt(0));
    out.passive.assign(static_cast<size_t>(buffer) + 2, BigInt(0));
    for (int n = -1; n <= buffer; ++n) {
        const std::vector<BigInt> num = stationary_numerators(rate, n, buffer);
        BigInt hold(0), pass(0), total(0);
        for (int i = 0; i <= buffer; ++i) {
            hold += num[static_cast<size_t>(i)] * BigInt(i);
            if (i <= n) pass += num[static_cast<size_t>(i)];
            total += num[static_cast<size_t>(i)];
        }
        assert(total == out.denom);  // the exact law must sum to one
        (void)total;
        out.holding[static_cast<size_t>(n + 1)] = std::move(hold);
        out.passive[static_cast<size_t>(n + 1)] = std::move(pass);
    }
    return out;
}

namespace {

const BigInt& curve_a(const Curves& c, int n) { return c.holding[static_cast<size_t>(n + 1)]; }
const BigInt& curve_b(const Curves& c, int n) { return c.passive[static_cast<size_t>(n + 1)]; }

int pivot_from_curves(const Curves& c, int rate, int buffer) {
    // Largest n in [0, R-1] with x_{n,n-1} (1 - b_n) + a_n < L, i.e. whose
    // crossover buffer length still lies below L. n = 0 always qualifies.
    int d = 0;
    const BigInt big_l(buffer);
    for (int n = 1; n <= rate - 1; ++n) {
        const BigInt da = curve_a(c, n) - curve_a(c, n - 1);
        const BigInt db = curve_b(c, n) - curve_b(c, n - 1);
        if (!(db > BigInt(0))) break;  // flat passive time: marginal rate undefined
        const BigInt lhs = da * (c.denom - curve_b(c, n)) + curve_a(c, n) * db;
        const BigInt rhs = big_l * c.denom * db;
        if (lhs < rhs) d = n;
    }
    return d;
}

}  // namespace

int pivot_state(int rate, int buffer) {
    if (buffer < rate) throw std::invalid_argument("pivot_state requires L >= R");
    return pivot_from_curves(curves(rate, buffer), rate, buffer);
}

std::vector<BigRatio> algorithm1(int rate, int buffer) {
    const Curves c = curves(rate, buffer);
    std::vector<BigRatio> index(static_cast<size_t>(buffer) + 1);
    int prev = -1;
    while (prev != buffer) {
        int arg = -1;
        BigRatio best;
        for (int n = prev + 1; n <= buffer; ++n) {
            BigInt db = curve_b(c, n) - curve_b(c, prev);
            if (db.is_zero()) continue;  // excluded: same passive time as the anchor
            BigRatio ratio(curve_a(c, n) - curve_a(c, prev), std::move(db));
            if (arg < 0 || ratio.compare(best) <= 0) {  // ties go to the largest minimizer
                best = std::move(ratio);
                arg = n;
            }
        }
        assert(arg > prev);  // n = L is always admissible
        for (int k = prev + 1; k <= arg; ++k) index[static_cast<size_t>(k)] = best;
        prev = arg;
    }
    return index;
}

std::vector<BigRatio> closed_form(int rate, int buffer) {
    const Curves c = curves(rate, buffer);
    std::vector<BigRatio> index(static_cast<size_t>(buffer) + 1);
    auto step_ratio = [&](int n) {
        return BigRatio(curve_a(c, n) - curve_a(c, n - 1), curve_b(c, n) - curve_b(c, n - 1));
    };
    if (buffer < rate) {
        for (int n = 0; n <= buffer; ++n) index[static_cast<size_t>(n)] = step_ratio(n);
        return index;
    }
    const int d = pivot_from_curves(c, rate, buffer);
    for (int n = 0; n <= d; ++n) index[static_cast<size_t>(n)] = step_ratio(n);
    const BigRatio tail(curve_a(c, buffer) - curve_a(c, d), curve_b(c, buffer) - curve_b(c, d));
    for (int n = d + 1; n <= buffer; ++n) index[static_cast<size_t>(n)] = tail;
    return index;
}

}  // namespace exact

namespace {

std::string describe_violations(const IndexabilityReport& report) {
    std::string msg = "class is not indexable:";
    for (const auto& [n, detail] : report.violations) {
        msg += " [n=" + std::to_string(n) + "] " + detail + ";";
        if (msg.size() > 300) break;
    }
    return msg;
}

}  // namespace

WhittleTable whittle_algorithm1(const ClassSpec& cls, int buffer) {
    cls.validate();
    const IndexabilityReport report = check_indexability(cls, buffer);
    if (!report.is_indexable) throw model_error(describe_violations(report));
    const std::vector<BigRatio> exact_index = exact::algorithm1(cls.rate, buffer);
    WhittleTable table;
    table.cls = cls;
    table.buffer = buffer;
    table.curves = build_cost_curves(cls, buffer);
    table.index.resize(exact_index.size());
    for (size_t i = 0; i < exact_index.size(); ++i)
        table.index[i] = cls.weight * exact_index[i].to_double();
    table.pivot = (buffer >= cls.rate) ? exact::pivot_state(cls.rate, buffer) : buffer;
    return table;
}

double short_buffer_index_formula(int n, const ClassSpec& cls, int buffer) {
    const int R = cls.rate;
    const int L = buffer;
    if (L >= R) throw std::invalid_argument("short-buffer formula needs L < R");
    if (n < 0 || n > L) throw std::invalid_argument("state out of [0, L]");
    const double a = cls.weight;
    const double rho = cls.rho();
    const double q = 1.0 - rho;
    if (n < L) {
        const double numer =
            -rho * (L + R) * std::pow(q, n) + (-2.0 * n + 1.0) * rho / 2.0 + 1.0 + L * rho -
            rho / 2.0;
        return a * numer / (rho * std::pow(q, n));
    }
    const double b = 1.0 - L * L * rho / 2.0 - (rho / 2.0) * L + L * rho - 1.0 / rho;
    const double bracket = (L + R) * std::pow(q, L) - (L - 1.0) * (L - 1.0) * rho / 2.0 +
                           (L - 1.0) * (1.0 + L * rho - rho / 2.0) + b;
    return a * (L - bracket) / std::pow(q, L);
}

WhittleTable whittle_closed_form(const ClassSpec& cls, int buffer) {
    cls.validate();
    WhittleTable table;
    table.cls = cls;
    table.buffer = buffer;
    table.curves = build_cost_curves(cls, buffer);
    table.index.assign(static_cast<size_t>(buffer) + 1, 0.0);
    const int R = cls.rate;
    if (buffer < R) {
        for (int n = 0; n <= buffer; ++n)
            table.index[static_cast<size_t>(n)] = short_buffer_index_formula(n, cls, buffer);
        table.pivot = buffer;
        return table;
    }
    const int d = exact::pivot_state(R, buffer);
    table.pivot = d;
    for (int n = 1; n <= d; ++n) {
        if (buffer >= 2 * R) {
            table.index[static_cast<size_t>(n)] =
                cls.weight * R * static_cast<double>(n) / (R - n);
        } else {
            // Mid regime: the marginal rate read off the true curves.
            table.index[static_cast<size_t>(n)] = intersection(n, n - 1, table.curves);
        }
    }
    const double tail = intersection(buffer, d, table.curves);
    for (int n = d + 1; n <= buffer; ++n) table.index[static_cast<size_t>(n)] = tail;
    return table;
}

}  // namespace wisq
