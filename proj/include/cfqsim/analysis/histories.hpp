#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cfqsim/optics/evolve.hpp"
#include "cfqsim/protocol/toy_circuit.hpp"

namespace cfqsim::analysis {

/// A family of two-sided histories: at each listed timestep boundary the
/// photon's location is coarse-grained to Alice's side or Bob's side. The
/// same mode partition applies at every slice; modes not listed in bob_side
/// count as AliceSide, so the two projectors are orthogonal and complete by
/// construction.
struct HistoryFamily {
    std::vector<std::size_t> slice_boundaries;
    std::vector<optics::ModeIndex> bob_side;
};

/// Canonical slicing: one slice after the outer split and one after each
/// inner cycle, with BobSide = {b} + blocker sinks + b-arm loss sinks. When
/// max_slices > 0 caps the count, the first and last slices are kept and the
/// interior is thinned evenly, needed for post-selections whose history
/// count grows as 2^slices (unblocked D3).
HistoryFamily make_default_history_family(const protocol::ToyCircuit& toy,
                                          std::size_t max_slices = 0);

/// Rank-one decoherence functional over a history family: with class
/// amplitudes A_h = <f| C_h |psi>, D(h, h') = conj(A_h) * A_h'. Histories
/// whose class amplitude is exactly zero by structure may be omitted from
/// the listing (they contribute nothing to any entry); `exhaustive` is true
/// when every label sequence is listed instead.
struct DecoherenceMatrix {
    std::vector<std::string> histories;  // 'A'/'B' per slice
    std::vector<std::complex<double>> amplitudes;
    std::vector<std::size_t> slice_boundaries;
    std::string postselect;
    /// Forward Born probability of the post-selection, for the trace check:
    /// trace equals this only when the family is consistent.
    double postselect_probability = 0.0;
    bool exhaustive = false;

    std::complex<double> entry(std::size_t i, std::size_t j) const;
    /// Sum of diagonal entries = sum |A_h|^2.
    double trace() const;
    /// Largest |D(h, h')| over h != h', i.e. the two largest |A_h| multiplied.
    double max_offdiag() const;
    /// Diagonal normalized by the trace.
    std::vector<double> history_probabilities() const;
};

struct ConsistencyReport {
    bool consistent = false;
    double max_offdiag = 0.0;
    /// Normalized probability of histories with at least one BobSide label.
    double bob_history_probability = 0.0;
};

/// Evaluates the family by branching the forward state at each slice. Small
/// families (2^slices <= 4096) are enumerated exhaustively, zero histories
/// included. Larger ones are walked depth-first with branches filtered to the
/// modes from which the post-selection is still reachable (a filter that
/// never changes any class amplitude) and zero branches dropped, which keeps
/// the count linear in slices for the post-selections the protocol keeps.
/// Throws MalformedFamily for bad slices or when the branch count exceeds
/// max_histories, and ZeroPostselectionProbability when the post-selection
/// cannot fire.
DecoherenceMatrix decoherence_functional(const optics::Circuit& circuit,
                                         const HistoryFamily& family,
                                         optics::ModeIndex postselect,
                                         std::size_t max_histories = 262144);

ConsistencyReport consistency_report(const DecoherenceMatrix& matrix, double eps = 1e-10);

}  // namespace cfqsim::analysis
