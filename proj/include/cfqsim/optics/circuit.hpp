#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "cfqsim/optics/mode.hpp"

namespace cfqsim::optics {

/// Two-mode rotation by theta: on basis states, |u> -> cos(theta)|u> +
/// sin(theta)|v> and |v> -> -sin(theta)|u> + cos(theta)|v>. Models
/// beamsplitters and wave plates; the adjoint is the rotation by -theta.
struct Rotation {
    ModeIndex u = 0;
    ModeIndex v = 0;
    double theta = 0.0;
};

/// Permutation element expressed as disjoint amplitude swaps. Swapping a
/// path mode with an empty detector is how amplitude is routed onto a
/// terminal. Self-adjoint.
struct Route {
    std::vector<std::pair<ModeIndex, ModeIndex>> swaps;
};

/// Moves all amplitude from `from` to the sink `to` (a swap on {from, to},
/// unitary because `to` must be empty). Models an absorbing object in the
/// beam path without losing norm.
struct Absorb {
    ModeIndex from = 0;
    ModeIndex to = 0;
};

using Element = std::variant<Rotation, Route, Absorb>;

/// Modes touched by an element, in declaration order (may repeat only if the
/// element itself is malformed).
std::vector<ModeIndex> touched_modes(const Element& e);

/// One timestep: elements acting on pairwise disjoint mode sets.
using Step = std::vector<Element>;

/// Timestep-ordered single-photon circuit over a shared mode registry.
/// State boundaries are indexed 0..steps.size(): boundary t is the state
/// after the first t steps.
struct Circuit {
    std::shared_ptr<const ModeRegistry> registry;
    ModeIndex source = 0;
    std::vector<Step> steps;

    std::size_t n_boundaries() const { return steps.size() + 1; }

    std::vector<ModeIndex> terminal_modes() const { return registry->terminal_modes(); }

    /// Structural checks: registered modes only, source is a path mode,
    /// rotation angles finite, swaps disjoint, absorbers go from a path mode
    /// to a sink, and elements within a step touch disjoint mode sets.
    /// Throws MalformedCircuit (or UnknownMode for bad indices).
    void validate() const;
};

}  // namespace cfqsim::optics
