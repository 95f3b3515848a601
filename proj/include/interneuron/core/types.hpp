#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace interneuron {

/// Signed microsecond difference between two clock readings.
using Elapsed = std::chrono::microseconds;

using Bytes = std::int64_t;
using BytesPerSecond = std::int64_t;

constexpr Elapsed ms(std::int64_t v) { return std::chrono::milliseconds(v); }
constexpr Elapsed us(std::int64_t v) { return Elapsed(v); }

/// A reading of one node's local clock, in microseconds.
/// Readings of different nodes are not comparable in absolute terms; only
/// their difference (which embeds the clock offset) is meaningful.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t micros) : micros_(micros) {}

    constexpr std::int64_t micros() const { return micros_; }

    constexpr Timestamp operator+(Elapsed d) const { return Timestamp(micros_ + d.count()); }
    constexpr Timestamp operator-(Elapsed d) const { return Timestamp(micros_ - d.count()); }
    constexpr Elapsed operator-(Timestamp o) const { return Elapsed(micros_ - o.micros_); }

    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t micros_ = 0;
};

/// now - origin, with no attempt at clock-offset correction. Negative results
/// are legal: they occur when the observing clock lags the origin clock.
constexpr Elapsed elapsed_since(Timestamp origin, Timestamp now) { return now - origin; }

/// Fixed-point rational with 1e-6 resolution. Used for X, k, beta and the
/// overrun ratio so that repeated +0.2 steps accumulate exactly.
class Ratio {
public:
    static constexpr std::int64_t kScale = 1'000'000;

    constexpr Ratio() = default;

    static constexpr Ratio from_micros(std::int64_t m) { return Ratio(m); }
    static Ratio from_double(double v);
    /// Parses a plain decimal literal ("0.3", "-1", "1e-3" is rejected) exactly.
    static Ratio parse(std::string_view text);

    constexpr std::int64_t micros() const { return micros_; }
    double to_double() const { return static_cast<double>(micros_) / kScale; }
    std::string str() const;

    constexpr Ratio operator+(Ratio o) const { return Ratio(micros_ + o.micros_); }
    constexpr Ratio operator-(Ratio o) const { return Ratio(micros_ - o.micros_); }
    constexpr Ratio operator-() const { return Ratio(-micros_); }
    constexpr auto operator<=>(const Ratio&) const = default;

    /// round-half-up(r * d) in microseconds; shift-exact for integer offsets.
    Elapsed scale(Elapsed d) const;

    /// num/den rounded half-up to 1e-6; den must be non-zero.
    static Ratio of(Elapsed num, Elapsed den);

private:
    constexpr explicit Ratio(std::int64_t m) : micros_(m) {}
    std::int64_t micros_ = 0;
};

constexpr Ratio ratio_one() { return Ratio::from_micros(Ratio::kScale); }

enum class PayloadKind : std::uint8_t { RawFrame, SampledFrame, Result, BackupResult };

std::string_view to_string(PayloadKind k);
PayloadKind payload_kind_from_string(std::string_view s);

/// Describes a payload by kind, size and the accuracy it carries. No actual
/// pixels travel through the system.
struct PayloadDescriptor {
    PayloadKind kind = PayloadKind::RawFrame;
    Bytes size_bytes = 0;
    /// Multiplier applied to detection accuracy when this payload is consumed.
    Ratio accuracy_factor = ratio_one();
    // Accuracy of a Result/BackupResult payload; zero for frames.
    double ap = 0.0;
    double ar = 0.0;

    bool operator==(const PayloadDescriptor&) const = default;
};

/// Application QoS placed in the message header.
struct QosRequirement {
    Elapsed max_e2e_deadline = ms(130);
    BytesPerSecond min_bandwidth = 0;
    double security_floor = 0.0;
    double reliability_floor = 0.0;

    bool operator==(const QosRequirement&) const = default;
};

enum class TransmitMode : std::uint8_t { Normal, DegradedSampledOnly };

std::string_view to_string(TransmitMode m);

struct MessageHeader {
    std::uint64_t round_id = 0;
    Timestamp t0;
    /// Whether the previous round met the e2e deadline.
    bool indicator = true;
    Ratio x;
    QosRequirement qos;
    PayloadDescriptor payload;
    /// Send mode chosen by the origin's policy; the receiver merges accordingly.
    TransmitMode mode = TransmitMode::Normal;

    bool operator==(const MessageHeader&) const = default;
};

struct OnTime {
    bool operator==(const OnTime&) const = default;
};
struct Overrun {
    Ratio rho;
    bool operator==(const Overrun&) const = default;
};
using RunState = std::variant<OnTime, Overrun>;

inline bool is_overrun(const RunState& s) { return std::holds_alternative<Overrun>(s); }

/// Violated precondition of a public operation.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace interneuron
