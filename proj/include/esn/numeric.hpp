#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace esn {

/// Fixed-point decimal with three fractional digits, stored as value * 1000.
///
/// Every operation is exact at milli resolution. Results that need more
/// precision (products, quotients, square roots) are rounded to the nearest
/// milli-unit with ties away from zero. Overflow throws NumericOverflow.
class Numeric {
public:
    static constexpr std::int64_t scale = 1000;

    constexpr Numeric() = default;

    static constexpr Numeric from_milli(std::int64_t milli) { return Numeric(milli); }
    static Numeric from_int(std::int64_t whole);
    /// Nearest milli-unit; used where values come in as binary floating point.
    static Numeric from_double(double value);

    /// Parses `[-]digits[.digits]` with at most three fractional digits.
    static std::optional<Numeric> parse(std::string_view text);

    constexpr std::int64_t milli() const { return milli_; }
    double to_double() const { return static_cast<double>(milli_) / scale; }
    bool is_integer() const { return milli_ % scale == 0; }

    /// Canonical decimal text: integer part, then fractional digits with
    /// trailing zeros removed ("15.2", "3.5", "30", "-0.001").
    std::string to_string() const;

    Numeric operator-() const;
    friend Numeric operator+(Numeric a, Numeric b);
    friend Numeric operator-(Numeric a, Numeric b);
    friend Numeric operator*(Numeric a, Numeric b);
    /// Throws ArithmeticError on division by zero.
    friend Numeric operator/(Numeric a, Numeric b);

    /// Exponent must be a non-negative integer.
    Numeric pow(Numeric exponent) const;
    /// Throws ArithmeticError on negative input.
    Numeric sqrt() const;
    /// Rounds to the nearest integer, ties away from zero.
    std::int64_t round_to_int() const;

    friend constexpr bool operator==(Numeric, Numeric) = default;
    friend constexpr auto operator<=>(Numeric, Numeric) = default;

private:
    constexpr explicit Numeric(std::int64_t milli) : milli_(milli) {}

    std::int64_t milli_ = 0;
};

/// Rounds num/den to the nearest integer with ties away from zero.
__int128 rounded_div(__int128 num, __int128 den);

} // namespace esn
