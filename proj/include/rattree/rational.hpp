#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "errors.hpp"

namespace rattree {

// Exact rational arithmetic on checked 64-bit integers.  Exponents, radii and
// translation lengths all stay small (denominators are bounded by the
// ramification budget), so int64 with overflow detection beats bignums here.
class Rat {
  public:
    constexpr Rat() : num_(0), den_(1) {}
    constexpr Rat(std::int64_t n) : num_(n), den_(1) {}
    Rat(std::int64_t n, std::int64_t d) : num_(n), den_(d) { reduce(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return Rat(checked(i128(a.num_) * b.den_ + i128(b.num_) * a.den_),
                   checked(i128(a.den_) * b.den_));
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return Rat(checked(i128(a.num_) * b.den_ - i128(b.num_) * a.den_),
                   checked(i128(a.den_) * b.den_));
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return Rat(checked(i128(a.num_) * b.num_), checked(i128(a.den_) * b.den_));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw numerical_error("rational division by zero");
        return Rat(checked(i128(a.num_) * b.den_), checked(i128(a.den_) * b.num_));
    }
    Rat operator-() const { return Rat(-num_, den_); }

    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
    Rat abs() const { return num_ < 0 ? Rat(-num_, den_) : *this; }
    bool is_integer() const { return den_ == 1; }

    std::int64_t floor() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }
    std::int64_t ceil() const { return -(-*this).floor(); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

    std::size_t hash() const {
        std::size_t h = std::hash<std::int64_t>{}(num_);
        return h ^ (std::hash<std::int64_t>{}(den_) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    }

  private:
    using i128 = __int128;

    static std::int64_t checked(i128 v) {
        if (v > std::numeric_limits<std::int64_t>::max() ||
            v < std::numeric_limits<std::int64_t>::min())
            throw numerical_error("rational overflow");
        return static_cast<std::int64_t>(v);
    }

    void reduce() {
        if (den_ == 0) throw numerical_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }

    std::int64_t num_;
    std::int64_t den_;
};

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0) return 0;
    __int128 l = (__int128)(a / std::gcd(a, b)) * b;
    if (l > std::numeric_limits<std::int64_t>::max())
        throw numerical_error("lcm overflow");
    return static_cast<std::int64_t>(l);
}

// A rational extended with +infinity; the natural value type for valuations
// and truncation orders (the zero series has valuation +infinity).
class ExtRat {
  public:
    constexpr ExtRat() : inf_(true), v_() {}
    ExtRat(const Rat& v) : inf_(false), v_(v) {}
    ExtRat(std::int64_t v) : inf_(false), v_(v) {}

    static constexpr ExtRat infinity() { return ExtRat(); }

    bool is_infinite() const { return inf_; }
    bool is_finite() const { return !inf_; }
    const Rat& value() const {
        if (inf_) throw numerical_error("infinite valuation has no finite value");
        return v_;
    }

    friend ExtRat operator+(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ || b.inf_) return infinity();
        return ExtRat(a.v_ + b.v_);
    }
    friend ExtRat operator+(const ExtRat& a, const Rat& b) { return a + ExtRat(b); }

    // Subtracting a finite amount keeps infinity infinite.
    friend ExtRat operator-(const ExtRat& a, const Rat& b) {
        return a.is_infinite() ? a : ExtRat(a.value() - b);
    }

    friend bool operator==(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ != b.inf_) return false;
        return a.inf_ || a.v_ == b.v_;
    }
    friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
    friend bool operator<(const ExtRat& a, const ExtRat& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
    friend bool operator<=(const ExtRat& a, const ExtRat& b) { return !(b < a); }
    friend bool operator>=(const ExtRat& a, const ExtRat& b) { return !(a < b); }

    std::string str() const { return inf_ ? std::string("inf") : v_.str(); }
    friend std::ostream& operator<<(std::ostream& os, const ExtRat& e) { return os << e.str(); }

  private:
    bool inf_;
    Rat v_;
};

inline ExtRat ext_min(const ExtRat& a, const ExtRat& b) { return a < b ? a : b; }

} // namespace rattree
