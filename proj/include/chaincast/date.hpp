#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chaincast {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian, UTC).
// Conversions use the days_from_civil / civil_from_days algorithms.
class Date {
public:
    Date() = default;
    explicit constexpr Date(std::int32_t serial) : serial_(serial) {}
    Date(int year, int month, int day);

    // Parses strict "YYYY-MM-DD"; throws IngestError on malformed input.
    static Date parse(std::string_view text);

    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::int32_t serial() const noexcept { return serial_; }
    [[nodiscard]] int year() const;
    [[nodiscard]] int month() const;  // 1..12

    Date operator+(int days) const { return Date(serial_ + days); }
    Date operator-(int days) const { return Date(serial_ - days); }
    int operator-(Date other) const { return serial_ - other.serial_; }
    Date& operator++() { ++serial_; return *this; }

    friend bool operator==(Date a, Date b) { return a.serial_ == b.serial_; }
    friend bool operator!=(Date a, Date b) { return a.serial_ != b.serial_; }
    friend bool operator<(Date a, Date b) { return a.serial_ < b.serial_; }
    friend bool operator<=(Date a, Date b) { return a.serial_ <= b.serial_; }
    friend bool operator>(Date a, Date b) { return a.serial_ > b.serial_; }
    friend bool operator>=(Date a, Date b) { return a.serial_ >= b.serial_; }

private:
    std::int32_t serial_ = 0;
};

}  // namespace chaincast
