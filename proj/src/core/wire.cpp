#include "interneuron/core/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace interneuron::wire {

namespace {

class Writer {
public:
    template <typename T>
    void put(T v) {
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            std::reverse(std::begin(buf), std::end(buf));
        }
        out_.insert(out_.end(), std::begin(buf), std::end(buf));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > in_.size()) {
            throw DecodeError("header truncated");
        }
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, in_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            std::reverse(std::begin(buf), std::end(buf));
        }
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(const MessageHeader& h) {
    Writer w;
    w.put<std::uint32_t>(kMagic);
    w.put<std::uint8_t>(kVersion);
    w.put<std::uint64_t>(h.round_id);
    w.put<std::int64_t>(h.t0.micros());
    w.put<std::uint8_t>(h.indicator ? 1 : 0);
    w.put<std::int64_t>(h.x.micros());
    w.put<std::int64_t>(h.qos.max_e2e_deadline.count());
    w.put<std::int64_t>(h.qos.min_bandwidth);
    w.put<double>(h.qos.security_floor);
    w.put<double>(h.qos.reliability_floor);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(h.payload.kind));
    w.put<std::int64_t>(h.payload.size_bytes);
    w.put<std::int64_t>(h.payload.accuracy_factor.micros());
    w.put<double>(h.payload.ap);
    w.put<double>(h.payload.ar);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(h.mode));
    return w.take();
}

MessageHeader decode(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.get<std::uint32_t>() != kMagic) {
        throw DecodeError("bad header magic");
    }
    if (r.get<std::uint8_t>() != kVersion) {
        throw DecodeError("unsupported header version");
    }
    MessageHeader h;
    h.round_id = r.get<std::uint64_t>();
    h.t0 = Timestamp(r.get<std::int64_t>());
    const auto ind = r.get<std::uint8_t>();
    if (ind > 1) {
        throw DecodeError("bad indicator byte");
    }
    h.indicator = ind == 1;
    h.x = Ratio::from_micros(r.get<std::int64_t>());
    h.qos.max_e2e_deadline = Elapsed(r.get<std::int64_t>());
    h.qos.min_bandwidth = r.get<std::int64_t>();
    h.qos.security_floor = r.get<double>();
    h.qos.reliability_floor = r.get<double>();
    const auto kind = r.get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(PayloadKind::BackupResult)) {
        throw DecodeError("bad payload kind");
    }
    h.payload.kind = static_cast<PayloadKind>(kind);
    h.payload.size_bytes = r.get<std::int64_t>();
    h.payload.accuracy_factor = Ratio::from_micros(r.get<std::int64_t>());
    h.payload.ap = r.get<double>();
    h.payload.ar = r.get<double>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > static_cast<std::uint8_t>(TransmitMode::DegradedSampledOnly)) {
        throw DecodeError("bad transmit mode");
    }
    h.mode = static_cast<TransmitMode>(mode);
    if (!r.done()) {
        throw DecodeError("trailing bytes after header");
    }
    return h;
}

}  // namespace interneuron::wire
