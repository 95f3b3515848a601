#pragma once

#include "interneuron/core/types.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace interneuron::wire {

/// Fixed-order little-endian header record:
///   magic u32 | version u8 | round_id u64 | t0 i64 | indicator u8 | x i64
///   | d3 i64 | min_bw i64 | security f64 | reliability f64
///   | kind u8 | size i64 | acc_factor i64 | ap f64 | ar f64 | mode u8
inline constexpr std::uint32_t kMagic = 0x4E524E49;  // "INRN"
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kEncodedSize = 4 + 1 + 8 + 8 + 1 + 8 + 8 + 8 + 8 + 8 + 1 + 8 + 8 + 8 + 8 + 1;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode(const MessageHeader& h);
MessageHeader decode(std::span<const std::uint8_t> bytes);

}  // namespace interneuron::wire
