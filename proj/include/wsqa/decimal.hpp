#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace wsqa {

// Fixed-point decimal with at most six fractional digits.
// All arithmetic used by solution execution (add, subtract, negate,
// min/max, rounded mean) stays inside this representation, so answer
// equality is exact integer comparison of the scaled value.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 1'000'000;
  // Integer part is capped so that sums of a few table cells or
  // equation operands cannot overflow the scaled int64.
  static constexpr std::int64_t kMaxAbsInteger = 1'000'000'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_int(std::int64_t v) { return Decimal(v * kScale); }
  static constexpr Decimal from_micros(std::int64_t m) { return Decimal(m); }

  // Accepts [+-]digits[.digits][eE[+-]digits]; rejects anything that does
  // not land exactly on the six-digit grid or exceeds the magnitude cap.
  static std::optional<Decimal> parse(std::string_view text);

  // Shortest round-trip formatting of x, then parse(). Used when reading
  // JSON numbers that were written as doubles.
  static std::optional<Decimal> from_double(double x);

  constexpr std::int64_t micros() const { return micros_; }
  constexpr bool is_integer() const { return micros_ % kScale == 0; }
  std::optional<std::int64_t> as_int() const {
    if (!is_integer()) return std::nullopt;
    return micros_ / kScale;
  }
  double to_double() const { return static_cast<double>(micros_) / kScale; }

  // Canonical form: no exponent, no trailing fractional zeros, "-0" is "0".
  std::string str() const;

  constexpr Decimal operator-() const { return Decimal(-micros_); }
  constexpr Decimal operator+(Decimal o) const { return Decimal(micros_ + o.micros_); }
  constexpr Decimal operator-(Decimal o) const { return Decimal(micros_ - o.micros_); }
  friend constexpr auto operator<=>(Decimal a, Decimal b) = default;

  // sum / count with round-half-away-from-zero; count must be positive.
  static Decimal mean_of_sum(Decimal sum, std::int64_t count);

 private:
  constexpr explicit Decimal(std::int64_t m) : micros_(m) {}
  std::int64_t micros_ = 0;
};

inline std::optional<Decimal> Decimal::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  if (i >= text.size()) return std::nullopt;

  std::int64_t int_part = 0;
  bool any_digit = false;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    any_digit = true;
    int_part = int_part * 10 + (text[i] - '0');
    if (int_part > kMaxAbsInteger) return std::nullopt;
    ++i;
  }

  std::int64_t frac = 0;
  int frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      any_digit = true;
      if (frac_digits < 18) {  // keep reading, track significance below
        frac = frac * 10 + (text[i] - '0');
        ++frac_digits;
      }
      ++i;
    }
    if (frac_digits == 0 && !any_digit) return std::nullopt;
  }
  if (!any_digit) return std::nullopt;

  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      eneg = text[i] == '-';
      ++i;
    }
    if (i >= text.size()) return std::nullopt;
    int ev = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      ev = ev * 10 + (text[i] - '0');
      if (ev > 40) return std::nullopt;
      ++i;
    }
    exponent = eneg ? -ev : ev;
  }
  if (i != text.size()) return std::nullopt;

  // Value = (int_part + frac / 10^frac_digits) * 10^exponent.
  // Express as digits with a shifted decimal point and check the result
  // fits the six-digit grid.
  long long scaled_frac_digits = frac_digits - exponent;
  __int128 mant = static_cast<__int128>(int_part);
  for (int k = 0; k < frac_digits; ++k) mant *= 10;
  mant += frac;
  // micros = mant * 10^(6 - scaled_frac_digits)
  long long shift = 6 - scaled_frac_digits;
  if (shift < 0) {
    for (long long k = 0; k < -shift; ++k) {
      if (mant % 10 != 0) return std::nullopt;
      mant /= 10;
    }
  } else {
    for (long long k = 0; k < shift; ++k) {
      mant *= 10;
      if (mant > static_cast<__int128>(kMaxAbsInteger) * kScale * 10) return std::nullopt;
    }
  }
  if (mant > static_cast<__int128>(kMaxAbsInteger) * kScale) return std::nullopt;
  std::int64_t micros = static_cast<std::int64_t>(mant);
  return Decimal(neg ? -micros : micros);
}

inline std::optional<Decimal> Decimal::from_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return std::nullopt;
  return parse(std::string_view(buf, ptr - buf));
}

inline std::string Decimal::str() const {
  std::int64_t m = micros_;
  std::string out;
  if (m < 0) {
    out.push_back('-');
    m = -m;
  }
  out += std::to_string(m / kScale);
  std::int64_t f = m % kScale;
  if (f != 0) {
    char frac[8];
    std::snprintf(frac, sizeof(frac), "%06lld", static_cast<long long>(f));
    std::string fs(frac);
    while (!fs.empty() && fs.back() == '0') fs.pop_back();
    out.push_back('.');
    out += fs;
  }
  if (out == "-0") out = "0";
  return out;
}

inline Decimal Decimal::mean_of_sum(Decimal sum, std::int64_t count) {
  __int128 num = sum.micros();
  bool neg = num < 0;
  if (neg) num = -num;
  __int128 q = num / count;
  __int128 r = num % count;
  if (2 * r >= count) q += 1;
  std::int64_t m = static_cast<std::int64_t>(q);
  return Decimal::from_micros(neg ? -m : m);
}

}  // namespace wsqa
