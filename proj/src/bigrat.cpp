#include "wisq/bigrat.hpp"

#include <cmath>
#include <stdexcept>

namespace wisq {

BigInt::BigInt(long long v) {
    negative_ = v < 0;
    unsigned long long mag = negative_ ? -static_cast<unsigned long long>(v)
                                       : static_cast<unsigned long long>(v);
    while (mag != 0) {
        limbs_.push_back(static_cast<uint32_t>(mag & 0xFFFFFFFFull));
        mag >>= 32;
    }
}

BigInt BigInt::pow_int(int base, int exp) {
    if (base < 1 || exp < 0) throw std::invalid_argument("pow_int: base >= 1, exp >= 0");
    BigInt acc(1);
    const BigInt b(base);
    for (int i = 0; i < exp; ++i) acc = acc * b;
    return acc;
}

void BigInt::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    if (limbs_.empty()) negative_ = false;
}

int BigInt::cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

std::vector<uint32_t> BigInt::add_mag(const std::vector<uint32_t>& a,
                                      const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out(std::max(a.size(), b.size()) + 1, 0);
    uint64_t carry = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        uint64_t sum = carry;
        if (i < a.size()) sum += a[i];
        if (i < b.size()) sum += b[i];
        out[i] = static_cast<uint32_t>(sum & 0xFFFFFFFFull);
        carry = sum >> 32;
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

std::vector<uint32_t> BigInt::sub_mag(const std::vector<uint32_t>& a,
                                      const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out(a.size(), 0);
    int64_t borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        int64_t diff = static_cast<int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
        if (diff < 0) {
            diff += (1ll << 32);
            borrow = 1;
        } else {
            borrow = 0;
        }
        out[i] = static_cast<uint32_t>(diff);
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

std::vector<uint32_t> BigInt::mul_mag(const std::vector<uint32_t>& a,
                                      const std::vector<uint32_t>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<uint32_t> out(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        uint64_t carry = 0;
        for (size_t j = 0; j < b.size(); ++j) {
            uint64_t cur = static_cast<uint64_t>(a[i]) * b[j] + out[i + j] + carry;
            out[i + j] = static_cast<uint32_t>(cur & 0xFFFFFFFFull);
            carry = cur >> 32;
        }
        size_t k = i + b.size();
        while (carry != 0) {
            uint64_t cur = out[k] + carry;
            out[k] = static_cast<uint32_t>(cur & 0xFFFFFFFFull);
            carry = cur >> 32;
            ++k;
        }
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

BigInt BigInt::operator+(const BigInt& o) const {
    BigInt out;
    if (negative_ == o.negative_) {
        out.negative_ = negative_;
        out.limbs_ = add_mag(limbs_, o.limbs_);
    } else if (cmp_mag(limbs_, o.limbs_) >= 0) {
        out.negative_ = negative_;
        out.limbs_ = sub_mag(limbs_, o.limbs_);
    } else {
        out.negative_ = o.negative_;
        out.limbs_ = sub_mag(o.limbs_, limbs_);
    }
    out.trim();
    return out;
}

BigInt BigInt::operator-(const BigInt& o) const {
    BigInt flipped = o;
    if (!flipped.is_zero()) flipped.negative_ = !flipped.negative_;
    return *this + flipped;
}

BigInt BigInt::operator*(const BigInt& o) const {
    BigInt out;
    out.limbs_ = mul_mag(limbs_, o.limbs_);
    out.negative_ = !out.limbs_.empty() && (negative_ != o.negative_);
    return out;
}

BigInt& BigInt::operator+=(const BigInt& o) { return *this = *this + o; }
BigInt& BigInt::operator-=(const BigInt& o) { return *this = *this - o; }

int BigInt::compare(const BigInt& o) const {
    if (negative_ != o.negative_) {
        if (is_zero() && o.is_zero()) return 0;
        return negative_ ? -1 : 1;
    }
    const int mag = cmp_mag(limbs_, o.limbs_);
    return negative_ ? -mag : mag;
}

double BigInt::to_double() const {
    double acc = 0.0;
    for (size_t i = limbs_.size(); i-- > 0;) acc = acc * 4294967296.0 + limbs_[i];
    return negative_ ? -acc : acc;
}

}  // namespace wisq
