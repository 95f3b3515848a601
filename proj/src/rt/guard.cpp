#include "interneuron/rt/guard.hpp"

#include <algorithm>
#include <string>

namespace interneuron::rt {

std::string_view to_string(DeadlineForm f) {
    switch (f) {
    case DeadlineForm::Slack:
        return "slack";
    case DeadlineForm::Ratio:
        return "ratio";
    case DeadlineForm::Literal:
        return "literal";
    }
    return "unknown";
}

DeadlineForm deadline_form_from_string(std::string_view s) {
    if (s == "slack") return DeadlineForm::Slack;
    if (s == "ratio") return DeadlineForm::Ratio;
    if (s == "literal") return DeadlineForm::Literal;
    throw std::invalid_argument("unknown deadline form '" + std::string(s) + "' (expected slack|ratio|literal)");
}

std::string_view to_string(TransmitDirective d) {
    return d == TransmitDirective::Full ? "full" : "reduce_time";
}

CheckpointTiming& TimingState::at(int n) {
    if (n < 1 || n > static_cast<int>(kCheckpoints)) {
        throw ContractError("checkpoint index out of range: " + std::to_string(n));
    }
    return checkpoints[static_cast<std::size_t>(n - 1)];
}

const CheckpointTiming& TimingState::at(int n) const {
    return const_cast<TimingState&>(*this).at(n);
}

Elapsed record_checkpoint(TimingState& state, int n, const MessageHeader& header, Timestamp now) {
    auto& cp = state.at(n);
    const Elapsed theta = elapsed_since(header.t0, now);
    cp.history = theta;
    if (!cp.base) {
        cp.base = theta;
    }
    return theta;
}

Elapsed smooth(Elapsed base, Elapsed history, Ratio k) {
    const __int128 s = Ratio::kScale;
    const __int128 p =
        static_cast<__int128>(k.micros()) * base.count() + (s - k.micros()) * history.count() + s / 2;
    __int128 q = p / s;
    if (p % s != 0 && p < 0) {
        --q;
    }
    return Elapsed(static_cast<std::int64_t>(q));
}

void update_base(TimingState& state, int n, bool indicator) {
    if (state.k < Ratio{} || state.k > ratio_one()) {
        throw ContractError("k must lie in [0, 1]");
    }
    auto& cp = state.at(n);
    if (indicator && cp.history && cp.base) {
        cp.base = smooth(*cp.base, *cp.history, state.k);
    }
    cp.history.reset();
}

Ratio compute_x(Elapsed theta_base_3, Elapsed d3, Ratio beta) {
    if (d3 <= Elapsed::zero()) {
        throw ContractError("compute_x: d3 must be positive");
    }
    return ratio_one() - Ratio::of(theta_base_3, d3) + beta;
}

Elapsed deadline(Ratio x, Elapsed theta_base_n) {
    return std::max(Elapsed::zero(), theta_base_n + x.scale(theta_base_n));
}

Elapsed deadline(DeadlineForm form, Ratio x, Elapsed theta_base_n, Elapsed d3) {
    switch (form) {
    case DeadlineForm::Slack:
        return theta_base_n + x.scale(d3);
    case DeadlineForm::Ratio:
        return deadline(x, theta_base_n);
    case DeadlineForm::Literal:
        return std::max(Elapsed::zero(), x.scale(theta_base_n));
    }
    return theta_base_n;
}

Elapsed overrun_normalizer(DeadlineForm form, Elapsed theta_base_n, Elapsed d3) {
    if (form == DeadlineForm::Slack || theta_base_n <= Elapsed::zero()) {
        return d3;
    }
    return theta_base_n;
}

RunState judge(Elapsed theta_n, Elapsed d_n, Elapsed normalizer) {
    if (theta_n <= d_n) {
        return OnTime{};
    }
    if (normalizer <= Elapsed::zero()) {
        throw ContractError("judge: normalizer must be positive");
    }
    Ratio rho = Ratio::of(theta_n - d_n, normalizer);
    if (rho <= Ratio{}) {
        rho = Ratio::from_micros(1);
    }
    return Overrun{rho};
}

ComputeDirective directive_for_compute(const RunState& state, std::size_t levels, Ratio rho1) {
    if (levels == 0) {
        throw ContractError("quality table must not be empty");
    }
    const auto* over = std::get_if<Overrun>(&state);
    if (over == nullptr) {
        return {0};
    }
    if (over->rho <= rho1) {
        return {std::min<std::size_t>(1, levels - 1)};
    }
    return {levels - 1};
}

TransmitDirective directive_for_transmit(const RunState& state) {
    return is_overrun(state) ? TransmitDirective::ReduceTime : TransmitDirective::Full;
}

}  // namespace interneuron::rt
