// schedule.hpp — Piecewise-constant protocol schedules shared by the exact,
// semiclassical and Gaussian solvers.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqz/hilbert.hpp"

namespace sqz {

// Decoherence rates. kappa: boson decay; gamma: spontaneous emission;
// gamma_z: dephasing; gamma_plus: balanced spin flips.
struct DissipationParams {
    double kappa = 0.0;
    double gamma = 0.0;
    double gamma_z = 0.0;
    double gamma_plus = 0.0;
};

enum class HamiltonianKind { Dicke, TC, ATC };

// Instantaneous collective rotation applied at the start of a segment.
struct RotationPulse {
    char axis = 'z';
    double angle = 0.0;
    bool instantaneous = true;
};

struct ScheduleSegment {
    double duration = 0.0;
    hilbert::CouplingParams params;
    HamiltonianKind kind = HamiltonianKind::Dicke;
    std::optional<RotationPulse> pre_pulse;
};

struct ProtocolSchedule {
    std::vector<ScheduleSegment> segments;

    double total_duration() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }
    void validate() const {
        for (const auto& s : segments) {
            if (s.duration < 0.0) throw ConfigError("ProtocolSchedule: negative duration");
        }
    }
};

} // namespace sqz
