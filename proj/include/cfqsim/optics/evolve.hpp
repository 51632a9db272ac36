#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cfqsim/optics/circuit.hpp"
#include "cfqsim/optics/state.hpp"
#include "cfqsim/rng.hpp"

namespace cfqsim::optics {

enum class Direction { Forward, Backward };

/// One state per timestep boundary. Forward traces start at the source basis
/// state; backward traces end at the post-selection co-state, with earlier
/// entries produced by adjoint application. Both have n_boundaries entries,
/// so forward and backward states at the same index describe the same
/// boundary.
struct EvolutionTrace {
    Direction direction = Direction::Forward;
    std::vector<StateVector> states;
};

/// Applies one element. Terminal modes may receive amplitude once; an
/// element touching a terminal mode that already holds amplitude throws
/// TerminalModeReuse. Norm is preserved by construction.
StateVector apply_element(const StateVector& state, const Element& e);

/// Applies the adjoint of an element (rotation by -theta; swaps are their own
/// adjoints). Terminal-reuse rules do not apply backward: adjoints are
/// exactly how amplitude is pulled back out of terminals.
StateVector apply_element_adjoint(const StateVector& state, const Element& e);

/// Full forward evolution from amp(source) = source_amp. After the last step
/// all amplitude must rest on terminal modes (within 1e-12); this check is
/// skipped for circuits that declare no terminal modes at all.
EvolutionTrace evolve_forward(const Circuit& circuit, Amplitude source_amp = {1.0, 0.0});

/// Adjoint evolution of the basis co-state on `postselect` (a detector or
/// sink), filling boundaries from last to first. <backward(t)|forward(t)> is
/// constant over t and equals the forward amplitude on `postselect`.
EvolutionTrace evolve_backward(const Circuit& circuit, ModeIndex postselect);

/// Born-rule probabilities on the terminal modes of a forward trace, in
/// registry order (zero entries included).
std::vector<std::pair<ModeIndex, double>> outcome_distribution(const EvolutionTrace& trace);

/// Inverse-CDF draw over the entries in the order given (registry order when
/// the input comes from outcome_distribution). Tiny negative rounding dust
/// (>= -1e-12) is clamped to zero; anything more negative throws
/// NegativeProbability. The total is renormalized internally.
ModeIndex sample_outcome(const std::vector<std::pair<ModeIndex, double>>& dist, Rng& rng);

/// Shared inverse-CDF core used by sample_outcome and the protocol-level
/// samplers: returns an index into `probs`.
std::size_t sample_index(const std::vector<double>& probs, Rng& rng);

}  // namespace cfqsim::optics
