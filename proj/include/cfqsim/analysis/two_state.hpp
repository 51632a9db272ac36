#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "cfqsim/optics/evolve.hpp"
#include "cfqsim/protocol/toy_circuit.hpp"

namespace cfqsim::analysis {

/// A named set of (timestep boundary, mode) pairs: the locations whose
/// occupation a path criterion interrogates.
struct RegionSpec {
    std::string name;
    std::vector<std::pair<std::size_t, optics::ModeIndex>> members;
};

struct WeakValueEntry {
    std::size_t timestep = 0;
    optics::ModeIndex mode = 0;
    std::string mode_name;
    optics::Amplitude forward_amp;
    optics::Amplitude backward_amp;
    std::complex<double> weak_value;
    /// Set when |<phi|psi>| < 1e-14; the weak value is then meaningless and
    /// excluded from the region maximum.
    bool undefined = false;
};

struct WeakTraceReport {
    std::string postselect;
    std::complex<double> overlap;
    std::vector<WeakValueEntry> entries;
    double max_abs_weak_value_in_region = 0.0;
};

struct TwoStateTrace {
    optics::EvolutionTrace forward;
    optics::EvolutionTrace backward;
    /// <phi|psi>, equal to the forward amplitude on the post-selected mode;
    /// constant across boundaries within 1e-12.
    optics::Amplitude overlap;
};

/// Pairs forward evolution with the adjoint-evolved co-state of `postselect`.
/// Throws ZeroPostselectionProbability when |overlap| < 1e-14, i.e. the
/// post-selection can never fire (up to rounding dust).
TwoStateTrace two_state_trace(const optics::Circuit& circuit, optics::ModeIndex postselect);

/// Weak value of the occupation projector at every region member:
/// WV(t, m) = conj(phi_t(m)) * psi_t(m) / <phi|psi>.
WeakTraceReport weak_value_profile(const optics::Circuit& circuit,
                                   optics::ModeIndex postselect, const RegionSpec& region);

/// The canonical Bob region of a toy circuit: mode b at the boundary after
/// each inner rotation, plus every blocker sink from the boundary where it is
/// written through the end. sinks_only drops the b-arm members and keeps the
/// blocker sinks alone (for the narrower reading of where Bob sits).
RegionSpec make_bob_region(const protocol::ToyCircuit& toy, bool sinks_only = false);

/// Builds the toy circuit for (params, x), post-selects on the detector named
/// by `postselect` ("D0", "D1" or "D3"), and returns the largest |weak value|
/// over the canonical Bob region.
double bob_presence_by_weak_trace(const protocol::ProtocolParams& params, int x,
                                  const std::string& postselect, bool sinks_only = false);

}  // namespace cfqsim::analysis
