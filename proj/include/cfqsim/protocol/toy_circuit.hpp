#pragma once

#include <vector>

#include "cfqsim/optics/circuit.hpp"
#include "cfqsim/protocol/params.hpp"

namespace cfqsim::protocol {

/// Where everything ended up in a built toy circuit: mode indices, the sink
/// lists used to aggregate outcomes, and the timestep boundaries that the
/// path-analysis module slices at.
struct ToyLayout {
    optics::ModeIndex outer = 0;  // "O", Alice keeps this arm
    optics::ModeIndex a = 0;      // inner chain, Alice's side
    optics::ModeIndex b = 0;      // inner chain, Bob's side
    optics::ModeIndex d0 = 0;
    optics::ModeIndex d1 = 0;
    optics::ModeIndex d3 = 0;
    std::vector<optics::ModeIndex> blocker_sinks;  // sink_k, one per cycle when blocked
    std::vector<optics::ModeIndex> loss_sinks;     // per-cycle loss sinks when inner_loss < 1

    bool blocked = false;
    bool d0_topmost = false;
    int n_inner = 0;

    /// Boundary index right after the outer rotation step.
    std::size_t after_outer = 0;
    /// Boundary right after the k-th inner rotation (1-based cycle k at [k-1]).
    std::vector<std::size_t> after_inner_rotation;
    /// Boundary after cycle k completes (loss and blocker steps included).
    std::vector<std::size_t> after_cycle;
    /// Boundary at which blocker_sinks[k] first holds amplitude, parallel to
    /// blocker_sinks. Empty when unblocked.
    std::vector<std::size_t> sink_written_at;
    std::size_t n_steps = 0;
};

struct ToyCircuit {
    optics::Circuit circuit;
    ToyLayout layout;
};

/// Single-outer-cycle protocol circuit, laid out sequentially in time:
/// outer rotation splitting the source onto {outer, a}, then N inner cycles
/// of a pi/(2N) rotation on (a, b), each followed by per-arm loss rotations
/// when inner_loss < 1 and an Absorb{b -> sink_k} when blocked, and a final
/// routing a -> D1, b -> D3, outer -> D0. With d0_topmost the outer arm is
/// routed to D0 immediately after the split instead; the statistics are
/// identical either way.
ToyCircuit build_toy_circuit(const ProtocolParams& params, bool blocked,
                             bool d0_topmost = false);

/// The inner chain alone: the photon is fired straight into mode a, with no
/// outer arm and no D0. Used by the biased-coin and no-coin comparisons.
ToyCircuit build_basic_apparatus(const ProtocolParams& params, bool blocked);

namespace detail {

/// Assembly without ProtocolParams::validate, so tests can build the
/// degenerate theta in {0, pi/2} limits. Everything else is identical to
/// build_toy_circuit.
ToyCircuit assemble(const ProtocolParams& params, bool blocked, bool d0_topmost,
                    bool with_outer);

}  // namespace detail

}  // namespace cfqsim::protocol
