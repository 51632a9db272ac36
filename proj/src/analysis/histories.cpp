#include "cfqsim/analysis/histories.hpp"

#include <algorithm>
#include <cmath>

#include "cfqsim/errors.hpp"

namespace cfqsim::analysis {

namespace {

constexpr std::size_t kExhaustiveCap = 4096;

using optics::Circuit;
using optics::Element;
using optics::ModeIndex;
using optics::StateVector;

/// reach[t][m]: the post-selection mode can still be reached from mode m at
/// boundary t through the remaining steps. Amplitude sitting on unreachable
/// modes contributes nothing to any class amplitude, so zeroing it is safe.
std::vector<std::vector<bool>> reachability(const Circuit& circuit, ModeIndex postselect) {
    const std::size_t n_modes = circuit.registry->size();
    std::vector<std::vector<bool>> reach(circuit.n_boundaries(),
                                         std::vector<bool>(n_modes, false));
    reach.back()[postselect] = true;
    for (std::size_t t = circuit.steps.size(); t-- > 0;) {
        reach[t] = reach[t + 1];
        for (const Element& e : circuit.steps[t]) {
            const auto touched = optics::touched_modes(e);
            const bool hits = std::any_of(touched.begin(), touched.end(),
                                          [&](ModeIndex m) { return reach[t + 1][m]; });
            if (hits) {
                for (ModeIndex m : touched) reach[t][m] = true;
            }
        }
    }
    return reach;
}

StateVector evolve_segment(const Circuit& circuit, StateVector state, std::size_t from,
                           std::size_t to) {
    for (std::size_t s = from; s < to; ++s) {
        for (const Element& e : circuit.steps[s]) {
            state = optics::apply_element(state, e);
        }
    }
    return state;
}

struct Walk {
    const Circuit& circuit;
    const std::vector<std::size_t>& slices;
    std::vector<bool> is_bob;  // per mode
    ModeIndex postselect;
    bool exhaustive;
    std::size_t max_histories;
    const std::vector<std::vector<bool>>* reach = nullptr;

    std::vector<std::string> histories;
    std::vector<std::complex<double>> amplitudes;

    void project(StateVector& state, char label) const {
        for (ModeIndex m = 0; m < state.size(); ++m) {
            const bool keep = (label == 'B') == is_bob[m];
            if (!keep) state.set_amp(m, {0.0, 0.0});
        }
    }

    void descend(const StateVector& at_prev, std::size_t slice_idx, std::string& labels) {
        const std::size_t prev_boundary = slice_idx == 0 ? 0 : slices[slice_idx - 1];
        if (slice_idx == slices.size()) {
            const StateVector final_state =
                evolve_segment(circuit, at_prev, prev_boundary, circuit.steps.size());
            if (histories.size() >= max_histories) {
                throw MalformedFamily("history family exceeds " +
                                      std::to_string(max_histories) +
                                      " branches; coarsen the slicing");
            }
            histories.push_back(labels);
            amplitudes.push_back(final_state.amp(postselect));
            return;
        }
        const StateVector at_slice =
            evolve_segment(circuit, at_prev, prev_boundary, slices[slice_idx]);
        for (char label : {'A', 'B'}) {
            StateVector branch = at_slice;
            project(branch, label);
            if (!exhaustive) {
                const auto& ok = (*reach)[slices[slice_idx]];
                for (ModeIndex m = 0; m < branch.size(); ++m) {
                    if (!ok[m]) branch.set_amp(m, {0.0, 0.0});
                }
                if (branch.norm_sq() == 0.0) continue;
            }
            labels.push_back(label);
            descend(branch, slice_idx + 1, labels);
            labels.pop_back();
        }
    }
};

}  // namespace

HistoryFamily make_default_history_family(const protocol::ToyCircuit& toy,
                                          std::size_t max_slices) {
    const protocol::ToyLayout& lay = toy.layout;
    HistoryFamily family;
    if (lay.after_outer > 0) {
        family.slice_boundaries.push_back(lay.after_outer);
    }
    family.slice_boundaries.insert(family.slice_boundaries.end(), lay.after_cycle.begin(),
                                   lay.after_cycle.end());
    if (max_slices > 0 && family.slice_boundaries.size() > max_slices) {
        const std::size_t total = family.slice_boundaries.size();
        std::vector<std::size_t> thinned;
        for (std::size_t i = 0; i < max_slices; ++i) {
            const std::size_t pick =
                max_slices == 1 ? total - 1 : i * (total - 1) / (max_slices - 1);
            if (thinned.empty() || family.slice_boundaries[pick] != thinned.back()) {
                thinned.push_back(family.slice_boundaries[pick]);
            }
        }
        family.slice_boundaries = std::move(thinned);
    }
    family.bob_side.push_back(lay.b);
    family.bob_side.insert(family.bob_side.end(), lay.blocker_sinks.begin(),
                           lay.blocker_sinks.end());
    for (std::size_t i = 1; i < lay.loss_sinks.size(); i += 2) {
        family.bob_side.push_back(lay.loss_sinks[i]);  // b-arm loss sits in the channel
    }
    return family;
}

std::complex<double> DecoherenceMatrix::entry(std::size_t i, std::size_t j) const {
    return std::conj(amplitudes.at(i)) * amplitudes.at(j);
}

double DecoherenceMatrix::trace() const {
    double t = 0.0;
    for (const auto& a : amplitudes) t += std::norm(a);
    return t;
}

double DecoherenceMatrix::max_offdiag() const {
    double top1 = 0.0;
    double top2 = 0.0;
    for (const auto& a : amplitudes) {
        const double mag = std::abs(a);
        if (mag > top1) {
            top2 = top1;
            top1 = mag;
        } else if (mag > top2) {
            top2 = mag;
        }
    }
    return top1 * top2;
}

std::vector<double> DecoherenceMatrix::history_probabilities() const {
    const double t = trace();
    std::vector<double> probs;
    probs.reserve(amplitudes.size());
    for (const auto& a : amplitudes) {
        probs.push_back(t > 0.0 ? std::norm(a) / t : 0.0);
    }
    return probs;
}

DecoherenceMatrix decoherence_functional(const optics::Circuit& circuit,
                                         const HistoryFamily& family,
                                         optics::ModeIndex postselect,
                                         std::size_t max_histories) {
    circuit.validate();
    if (!circuit.registry->is_terminal(postselect)) {
        throw NotTerminal("post-selection mode '" + circuit.registry->mode(postselect).name +
                          "' is not a detector or sink");
    }
    for (std::size_t i = 0; i < family.slice_boundaries.size(); ++i) {
        const std::size_t b = family.slice_boundaries[i];
        if (b > circuit.steps.size()) {
            throw MalformedFamily("slice boundary " + std::to_string(b) +
                                  " beyond the circuit");
        }
        if (i > 0 && b <= family.slice_boundaries[i - 1]) {
            throw MalformedFamily("slice boundaries must be strictly increasing");
        }
    }
    std::vector<bool> is_bob(circuit.registry->size(), false);
    for (ModeIndex m : family.bob_side) {
        if (m >= circuit.registry->size()) {
            throw MalformedFamily("BobSide lists an unregistered mode");
        }
        is_bob[m] = true;
    }

    const auto forward = optics::evolve_forward(circuit);
    const optics::Amplitude final_amp = forward.states.back().amp(postselect);
    if (std::abs(final_amp) < 1e-14) {
        throw ZeroPostselectionProbability(
            "post-selection on '" + circuit.registry->mode(postselect).name +
            "' has zero probability");
    }

    const std::size_t n_slices = family.slice_boundaries.size();
    const bool exhaustive = n_slices < 64 && (std::size_t{1} << n_slices) <= kExhaustiveCap;

    Walk walk{circuit, family.slice_boundaries, std::move(is_bob), postselect,
              exhaustive,  max_histories};
    std::vector<std::vector<bool>> reach;
    if (!exhaustive) {
        reach = reachability(circuit, postselect);
        walk.reach = &reach;
    }
    StateVector initial = StateVector::basis(circuit.registry, circuit.source);
    std::string labels;
    labels.reserve(n_slices);
    walk.descend(initial, 0, labels);

    DecoherenceMatrix matrix;
    matrix.histories = std::move(walk.histories);
    matrix.amplitudes = std::move(walk.amplitudes);
    matrix.slice_boundaries = family.slice_boundaries;
    matrix.postselect = circuit.registry->mode(postselect).name;
    matrix.postselect_probability = std::norm(final_amp);
    matrix.exhaustive = exhaustive;
    return matrix;
}

ConsistencyReport consistency_report(const DecoherenceMatrix& matrix, double eps) {
    ConsistencyReport report;
    report.max_offdiag = matrix.max_offdiag();
    report.consistent = report.max_offdiag <= eps;
    const double t = matrix.trace();
    double bob = 0.0;
    for (std::size_t i = 0; i < matrix.histories.size(); ++i) {
        if (matrix.histories[i].find('B') != std::string::npos) {
            bob += std::norm(matrix.amplitudes[i]);
        }
    }
    report.bob_history_probability = t > 0.0 ? bob / t : 0.0;
    return report;
}

}  // namespace cfqsim::analysis
