#include "interneuron/resilience/resilience.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace interneuron::resilience {

std::string_view to_string(ResultSource s) {
    switch (s) {
    case ResultSource::Remote:
        return "remote";
    case ResultSource::Backup:
        return "backup";
    case ResultSource::None:
        return "none";
    }
    return "unknown";
}

BackupTask BackupLauncher::start_backup(std::uint64_t round_id, Timestamp now, std::size_t lowest_index,
                                        Elapsed service_time, double ap, double ar) {
    if (!started_.insert(round_id).second) {
        throw ContractError("backup already started for round " + std::to_string(round_id));
    }
    BackupTask t;
    t.round_id = round_id;
    t.started_at = now;
    t.quality_index = lowest_index;
    t.completes_at = now + service_time;
    t.result.kind = PayloadKind::BackupResult;
    t.result.size_bytes = 1;
    t.result.ap = ap;
    t.result.ar = ar;
    return t;
}

Resolution resolve_round(const std::optional<RemoteResult>& remote, const BackupTask& backup, Elapsed d3,
                         Timestamp t0) {
    Resolution r;
    if (remote && remote->theta3 <= d3) {
        r.payload = remote->payload;
        r.source = ResultSource::Remote;
        r.timeout = false;
        r.delivered_at = remote->theta3;
        return r;
    }
    r.payload = backup.result;
    r.source = ResultSource::Backup;
    r.timeout = true;
    r.delivered_at = std::max(d3, backup.completes_at - t0);
    return r;
}

void on_timeout(XState& s) {
    s.x = std::max(s.x - ratio_one(), kMinX);
    s.recovering = s.x < Ratio{};
    s.pinned = true;
    s.force_sampled = true;
}

void on_round_success(XState& s, Ratio step) {
    if (s.x < Ratio{}) {
        s.x = s.x + step;
        s.recovering = s.x < Ratio{};
        s.pinned = s.recovering;
        return;
    }
    s.recovering = false;
    s.pinned = false;
}

bool take_force_sampled(XState& s) {
    return std::exchange(s.force_sampled, false);
}

}  // namespace interneuron::resilience
