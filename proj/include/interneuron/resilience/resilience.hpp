#pragma once

#include "interneuron/core/types.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string_view>

namespace interneuron::resilience {

/// Minimum-quality computation started on the origin node at t0, in
/// parallel with offloading.
struct BackupTask {
    std::uint64_t round_id = 0;
    Timestamp started_at;
    std::size_t quality_index = 0;
    Timestamp completes_at;
    PayloadDescriptor result;
};

/// Hands out at most one backup per round.
class BackupLauncher {
public:
    /// `service_time` is the origin-side duration of the lowest quality level;
    /// `ap`/`ar` that level's accuracy.
    BackupTask start_backup(std::uint64_t round_id, Timestamp now, std::size_t lowest_index, Elapsed service_time,
                            double ap, double ar);

private:
    std::set<std::uint64_t> started_;
};

enum class ResultSource : std::uint8_t { Remote, Backup, None };

std::string_view to_string(ResultSource s);

struct RemoteResult {
    PayloadDescriptor payload;
    /// θt_3 of the remote result's arrival on the origin clock.
    Elapsed theta3;
};

struct Resolution {
    PayloadDescriptor payload;
    ResultSource source = ResultSource::Backup;
    bool timeout = false;
    /// When the application receives the result, relative to t0.
    Elapsed delivered_at{};
};

/// Picks the application-visible result of one round. A remote result with
/// θt_3 <= d3 wins; otherwise the backup is delivered at
/// max(d3, backup completion) and the round counts as an e2e timeout.
Resolution resolve_round(const std::optional<RemoteResult>& remote, const BackupTask& backup, Elapsed d3,
                         Timestamp t0);

/// Threshold ratio X as maintained by the timeout handler.
struct XState {
    Ratio x;
    /// Set while x < 0 after a timeout; the +step ladder replaces compute_x.
    bool recovering = false;
    /// The next round uses `x` verbatim instead of recomputing it.
    bool pinned = false;
    /// One-shot: the next round transmits sampled data only.
    bool force_sampled = false;
};

inline constexpr Ratio kRecoveryStep = Ratio::from_micros(200'000);
inline constexpr Ratio kMinX = Ratio::from_micros(-1'000'000);

/// x <- max(x - 1, -1); arms ForceSampled for the next round.
void on_timeout(XState& s);

/// While x < 0, each on-time round adds `step` until x >= 0, then control
/// returns to compute_x.
void on_round_success(XState& s, Ratio step = kRecoveryStep);

/// Consumes the one-shot ForceSampled flag.
bool take_force_sampled(XState& s);

}  // namespace interneuron::resilience
