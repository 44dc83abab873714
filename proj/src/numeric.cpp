#include "esn/numeric.hpp"

#include "esn/error.hpp"

#include <cmath>
#include <limits>

namespace esn {

namespace {

constexpr __int128 k_min = std::numeric_limits<std::int64_t>::min();
constexpr __int128 k_max = std::numeric_limits<std::int64_t>::max();

std::int64_t checked(__int128 v, const char* op) {
    if (v < k_min || v > k_max) {
        throw NumericOverflow(std::string("numeric overflow in ") + op);
    }
    return static_cast<std::int64_t>(v);
}

__int128 isqrt(__int128 n) {
    if (n < 2) return n;
    auto x = static_cast<__int128>(std::sqrt(static_cast<long double>(n)));
    while (x * x > n) --x;
    while ((x + 1) * (x + 1) <= n) ++x;
    return x;
}

} // namespace

__int128 rounded_div(__int128 num, __int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 q = num / den;
    __int128 r = num % den;
    if (r < 0) r = -r;
    if (2 * r >= den) q += (num < 0) ? -1 : 1;
    return q;
}

Numeric Numeric::from_int(std::int64_t whole) {
    return Numeric(checked(static_cast<__int128>(whole) * scale, "from_int"));
}

Numeric Numeric::from_double(double value) {
    double scaled = std::round(value * scale);
    if (!std::isfinite(scaled) || scaled < -9.2e18 || scaled > 9.2e18) {
        throw NumericOverflow("numeric overflow converting " + std::to_string(value));
    }
    return Numeric(static_cast<std::int64_t>(scaled));
}

std::optional<Numeric> Numeric::parse(std::string_view text) {
    bool negative = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    __int128 whole = 0;
    std::size_t digits = 0;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > k_max) return std::nullopt;
    }
    if (digits == 0) return std::nullopt;
    __int128 frac = 0;
    std::size_t frac_digits = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++frac_digits) {
            if (frac_digits >= 3) return std::nullopt;
            frac = frac * 10 + (text[i] - '0');
        }
        if (frac_digits == 0) return std::nullopt;
    }
    if (i != text.size()) return std::nullopt;
    for (std::size_t k = frac_digits; k < 3; ++k) frac *= 10;
    __int128 v = whole * scale + frac;
    if (negative) v = -v;
    if (v < -k_max || v > k_max) return std::nullopt;
    return Numeric(static_cast<std::int64_t>(v));
}

std::string Numeric::to_string() const {
    __int128 v = milli_;
    bool negative = v < 0;
    if (negative) v = -v;
    auto whole = static_cast<unsigned long long>(v / scale);
    auto frac = static_cast<int>(v % scale);
    std::string out = negative ? "-" : "";
    out += std::to_string(whole);
    if (frac != 0) {
        char buf[4] = {static_cast<char>('0' + frac / 100), static_cast<char>('0' + frac / 10 % 10),
                       static_cast<char>('0' + frac % 10), '\0'};
        std::string f(buf);
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

Numeric Numeric::operator-() const {
    return Numeric(checked(-static_cast<__int128>(milli_), "negation"));
}

Numeric operator+(Numeric a, Numeric b) {
    return Numeric(checked(static_cast<__int128>(a.milli_) + b.milli_, "addition"));
}

Numeric operator-(Numeric a, Numeric b) {
    return Numeric(checked(static_cast<__int128>(a.milli_) - b.milli_, "subtraction"));
}

Numeric operator*(Numeric a, Numeric b) {
    __int128 p = static_cast<__int128>(a.milli_) * b.milli_;
    return Numeric(checked(rounded_div(p, Numeric::scale), "multiplication"));
}

Numeric operator/(Numeric a, Numeric b) {
    if (b.milli_ == 0) {
        throw ArithmeticError("/", a.to_string() + ", " + b.to_string());
    }
    __int128 n = static_cast<__int128>(a.milli_) * Numeric::scale;
    return Numeric(checked(rounded_div(n, b.milli_), "division"));
}

Numeric Numeric::pow(Numeric exponent) const {
    if (!exponent.is_integer() || exponent.milli_ < 0) {
        throw ArithmeticError("^", to_string() + ", " + exponent.to_string());
    }
    std::int64_t n = exponent.milli_ / scale;
    if (milli_ == -scale) return (n % 2 == 0) ? from_int(1) : *this;
    Numeric acc = from_int(1);
    for (std::int64_t k = 0; k < n; ++k) {
        Numeric next = acc * *this;
        // fixed point reached (bases 0, 1, or repeated rounding to zero)
        if (next == acc) break;
        acc = next;
    }
    return acc;
}

Numeric Numeric::sqrt() const {
    if (milli_ < 0) {
        throw ArithmeticError("sqrt", to_string());
    }
    // sqrt(v / 1000) * 1000 = sqrt(v * 1000)
    __int128 n = static_cast<__int128>(milli_) * scale;
    __int128 s = isqrt(n);
    // round to nearest: compare n against (s + 1/2)^2; an exact tie is impossible
    if (4 * n >= (2 * s + 1) * (2 * s + 1)) ++s;
    return Numeric(checked(s, "sqrt"));
}

std::int64_t Numeric::round_to_int() const {
    return static_cast<std::int64_t>(rounded_div(milli_, scale));
}

} // namespace esn
