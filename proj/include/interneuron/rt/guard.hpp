#pragma once

#include "interneuron/core/types.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace interneuron::rt {

/// How the per-checkpoint deadline D_n is derived from X and the reference
/// elapsed time.
enum class DeadlineForm : std::uint8_t {
    /// D_n = base_n + X * D3. The tolerated overrun is expressed in the
    /// origin's e2e budget, so a constant clock offset shifts θt_n and D_n
    /// equally and every decision is offset-independent.
    Slack,
    /// D_n = (1 + X) * base_n, i.e. (θt_n - base_n) / base_n > X means late.
    Ratio,
    /// D_n = X * base_n, taken verbatim.
    Literal,
};

std::string_view to_string(DeadlineForm f);
DeadlineForm deadline_form_from_string(std::string_view s);

inline constexpr std::size_t kCheckpoints = 3;

struct CheckpointTiming {
    std::optional<Elapsed> base;
    std::optional<Elapsed> history;
};

/// Reference elapsed times kept by one node for one pipeline.
struct TimingState {
    std::array<CheckpointTiming, kCheckpoints> checkpoints{};
    Ratio k = Ratio::from_micros(300'000);
    Elapsed d3 = ms(130);
    Ratio beta{};

    CheckpointTiming& at(int n);
    const CheckpointTiming& at(int n) const;
};

enum class TransmitDirective : std::uint8_t { Full, ReduceTime };

std::string_view to_string(TransmitDirective d);

struct ComputeDirective {
    std::size_t quality_level_index = 0;
    bool operator==(const ComputeDirective&) const = default;
};

/// θt_n = now - t0 on the local clock; stored as this checkpoint's history
/// (last write wins). The first observation also seeds the reference.
Elapsed record_checkpoint(TimingState& state, int n, const MessageHeader& header, Timestamp now);

/// Folds the previous round's history into the reference when the indicator
/// says that round met its e2e deadline, otherwise discards it:
///   base <- base * k + history * (1 - k)
void update_base(TimingState& state, int n, bool indicator);

/// base * k + history * (1 - k), rounded half-up to the microsecond.
Elapsed smooth(Elapsed base, Elapsed history, Ratio k);

/// X = 1 - base3 / d3 + beta.
Ratio compute_x(Elapsed theta_base_3, Elapsed d3, Ratio beta);

/// Ratio form: D_n = (1 + x) * base_n, clamped below at 0.
Elapsed deadline(Ratio x, Elapsed theta_base_n);

Elapsed deadline(DeadlineForm form, Ratio x, Elapsed theta_base_n, Elapsed d3);

/// Divisor for the overrun ratio under a given deadline form.
Elapsed overrun_normalizer(DeadlineForm form, Elapsed theta_base_n, Elapsed d3);

/// OnTime iff theta_n <= d_n (boundary inclusive), else
/// Overrun(rho = (theta_n - d_n) / normalizer).
RunState judge(Elapsed theta_n, Elapsed d_n, Elapsed normalizer);

/// OnTime -> level 0; Overrun(rho <= rho1) -> level 1; worse -> last level.
ComputeDirective directive_for_compute(const RunState& state, std::size_t levels, Ratio rho1);

TransmitDirective directive_for_transmit(const RunState& state);

}  // namespace interneuron::rt
