#pragma once

#include <cstdint>
#include <vector>

namespace wisq {

/// Sign-magnitude big integer covering exactly what the index algebra
/// needs: +, -, *, comparison and conversion to double. Magnitudes stay
/// below R^(L+2) * L, a few hundred bits, so no division is ever required
/// (ratios are compared by cross-multiplication).
class BigInt {
  public:
    BigInt() = default;
    BigInt(long long v);

    static BigInt pow_int(int base, int exp);  // base >= 1, exp >= 0

    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;
    BigInt& operator+=(const BigInt& o);
    BigInt& operator-=(const BigInt& o);

    /// -1, 0, +1 as *this compares to o.
    int compare(const BigInt& o) const;
    bool operator==(const BigInt& o) const { return compare(o) == 0; }
    bool operator!=(const BigInt& o) const { return compare(o) != 0; }
    bool operator<(const BigInt& o) const { return compare(o) < 0; }
    bool operator>(const BigInt& o) const { return compare(o) > 0; }

    bool is_zero() const { return limbs_.empty(); }
    bool is_negative() const { return negative_; }
    int sign() const { return is_zero() ? 0 : (negative_ ? -1 : 1); }

    double to_double() const;

  private:
    bool negative_ = false;
    std::vector<uint32_t> limbs_;  // little-endian, base 2^32, no leading zeros

    void trim();
    static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a,
                                         const std::vector<uint32_t>& b);
    static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a,
                                         const std::vector<uint32_t>& b);  // needs a >= b
    static std::vector<uint32_t> mul_mag(const std::vector<uint32_t>& a,
                                         const std::vector<uint32_t>& b);
};

/// num / den with den > 0; never reduced.
struct BigRatio {
    BigInt num;
    BigInt den;

    BigRatio() : num(0), den(1) {}
    BigRatio(BigInt n, BigInt d) : num(std::move(n)), den(std::move(d)) {}

    /// -1, 0, +1 as *this compares to o (both denominators positive).
    int compare(const BigRatio& o) const { return (num * o.den).compare(o.num * den); }
    bool operator==(const BigRatio& o) const { return compare(o) == 0; }
    bool operator<(const BigRatio& o) const { return compare(o) < 0; }

    double to_double() const { return num.to_double() / den.to_double(); }
};

}  // namespace wisq
