#include "cfqsim/analysis/two_state.hpp"

#include <cmath>

#include "cfqsim/errors.hpp"

namespace cfqsim::analysis {

TwoStateTrace two_state_trace(const optics::Circuit& circuit, optics::ModeIndex postselect) {
    TwoStateTrace pair;
    pair.forward = optics::evolve_forward(circuit);
    pair.overlap = pair.forward.states.back().amp(postselect);
    if (std::abs(pair.overlap) < 1e-14) {
        throw ZeroPostselectionProbability(
            "post-selection on '" + circuit.registry->mode(postselect).name +
            "' has zero probability");
    }
    pair.backward = optics::evolve_backward(circuit, postselect);
    return pair;
}

WeakTraceReport weak_value_profile(const optics::Circuit& circuit,
                                   optics::ModeIndex postselect, const RegionSpec& region) {
    const TwoStateTrace pair = two_state_trace(circuit, postselect);
    WeakTraceReport report;
    report.postselect = circuit.registry->mode(postselect).name;
    report.overlap = pair.overlap;
    for (const auto& [t, m] : region.members) {
        if (t >= pair.forward.states.size()) {
            throw MalformedCircuit("region references timestep " + std::to_string(t) +
                                   " beyond the circuit");
        }
        WeakValueEntry entry;
        entry.timestep = t;
        entry.mode = m;
        entry.mode_name = circuit.registry->mode(m).name;
        entry.forward_amp = pair.forward.states[t].amp(m);
        entry.backward_amp = pair.backward.states[t].amp(m);
        entry.weak_value = std::conj(entry.backward_amp) * entry.forward_amp / pair.overlap;
        entry.undefined = std::abs(pair.overlap) < 1e-14;
        if (!entry.undefined) {
            report.max_abs_weak_value_in_region =
                std::max(report.max_abs_weak_value_in_region, std::abs(entry.weak_value));
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

RegionSpec make_bob_region(const protocol::ToyCircuit& toy, bool sinks_only) {
    const protocol::ToyLayout& lay = toy.layout;
    RegionSpec region;
    region.name = sinks_only ? "bob_blocker_sinks" : "bob_channel";
    if (!sinks_only) {
        for (std::size_t t : lay.after_inner_rotation) {
            region.members.emplace_back(t, lay.b);
        }
    }
    for (std::size_t k = 0; k < lay.blocker_sinks.size(); ++k) {
        for (std::size_t t = lay.sink_written_at[k]; t <= lay.n_steps; ++t) {
            region.members.emplace_back(t, lay.blocker_sinks[k]);
        }
    }
    return region;
}

double bob_presence_by_weak_trace(const protocol::ProtocolParams& params, int x,
                                  const std::string& postselect, bool sinks_only) {
    const protocol::ToyCircuit toy = protocol::build_toy_circuit(params, params.blocks(x));
    const optics::ModeIndex target = toy.circuit.registry->index_of(postselect);
    const RegionSpec region = make_bob_region(toy, sinks_only);
    return weak_value_profile(toy.circuit, target, region).max_abs_weak_value_in_region;
}

}  // namespace cfqsim::analysis
