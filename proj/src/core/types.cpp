#include "interneuron/core/types.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace interneuron {

Ratio Ratio::from_double(double v) {
    if (!std::isfinite(v)) {
        throw ContractError("Ratio::from_double: non-finite value");
    }
    return Ratio(std::llround(v * kScale));
}

Ratio Ratio::parse(std::string_view text) {
    if (text.empty()) {
        throw std::invalid_argument("empty decimal");
    }
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        ++i;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool seen_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_dot) {
                throw std::invalid_argument("malformed decimal: " + std::string(text));
            }
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') {
            throw std::invalid_argument("malformed decimal: " + std::string(text));
        }
        seen_digit = true;
        const int d = c - '0';
        if (!seen_dot) {
            if (whole > (std::numeric_limits<std::int64_t>::max() / kScale) / 10) {
                throw std::invalid_argument("decimal out of range: " + std::string(text));
            }
            whole = whole * 10 + d;
        } else if (frac_digits < 6) {
            frac = frac * 10 + d;
            ++frac_digits;
        } else if (d != 0) {
            throw std::invalid_argument("decimal finer than 1e-6: " + std::string(text));
        }
    }
    if (!seen_digit) {
        throw std::invalid_argument("malformed decimal: " + std::string(text));
    }
    for (; frac_digits < 6; ++frac_digits) {
        frac *= 10;
    }
    const std::int64_t m = whole * kScale + frac;
    return Ratio(neg ? -m : m);
}

std::string Ratio::str() const {
    const std::int64_t a = std::llabs(micros_);
    std::string frac = std::to_string(a % kScale);
    frac.insert(0, 6 - frac.size(), '0');
    while (frac.size() > 1 && frac.back() == '0') {
        frac.pop_back();
    }
    return (micros_ < 0 ? "-" : "") + std::to_string(a / kScale) + "." + frac;
}

Elapsed Ratio::scale(Elapsed d) const {
    const __int128 p = static_cast<__int128>(micros_) * d.count() + kScale / 2;
    __int128 q = p / kScale;
    if (p % kScale != 0 && p < 0) {
        --q;
    }
    return Elapsed(static_cast<std::int64_t>(q));
}

Ratio Ratio::of(Elapsed num, Elapsed den) {
    if (den.count() == 0) {
        throw ContractError("Ratio::of: zero denominator");
    }
    std::int64_t n = num.count();
    std::int64_t d = den.count();
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const __int128 p = static_cast<__int128>(n) * kScale * 2 + d;
    const __int128 q2 = static_cast<__int128>(d) * 2;
    __int128 q = p / q2;
    if (p % q2 != 0 && p < 0) {
        --q;
    }
    return Ratio(static_cast<std::int64_t>(q));
}

std::string_view to_string(PayloadKind k) {
    switch (k) {
    case PayloadKind::RawFrame:
        return "raw";
    case PayloadKind::SampledFrame:
        return "sampled";
    case PayloadKind::Result:
        return "result";
    case PayloadKind::BackupResult:
        return "backup";
    }
    return "unknown";
}

PayloadKind payload_kind_from_string(std::string_view s) {
    if (s == "raw") return PayloadKind::RawFrame;
    if (s == "sampled") return PayloadKind::SampledFrame;
    if (s == "result") return PayloadKind::Result;
    if (s == "backup") return PayloadKind::BackupResult;
    throw std::invalid_argument("unknown payload kind: " + std::string(s));
}

std::string_view to_string(TransmitMode m) {
    return m == TransmitMode::Normal ? "normal" : "sampled_only";
}

}  // namespace interneuron
