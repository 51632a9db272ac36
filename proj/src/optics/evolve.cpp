#include "cfqsim/optics/evolve.hpp"

#include <cmath>
#include <string>

#include "cfqsim/errors.hpp"

namespace cfqsim::optics {

namespace {

void check_terminal_untouched(const StateVector& state, ModeIndex m) {
    const ModeRegistry& reg = state.registry();
    if (reg.is_terminal(m) && std::norm(state.amp(m)) != 0.0) {
        throw TerminalModeReuse("terminal mode '" + reg.mode(m).name +
                                "' already holds amplitude");
    }
}

void check_finite(const StateVector& state, const Element& e) {
    for (ModeIndex m : touched_modes(e)) {
        const Amplitude a = state.amp(m);
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw NonFiniteAmplitude("non-finite amplitude on mode '" +
                                     state.registry().mode(m).name + "'");
        }
    }
}

StateVector apply_impl(const StateVector& state, const Element& e, bool adjoint) {
    StateVector out = state;
    if (const auto* r = std::get_if<Rotation>(&e)) {
        const double th = adjoint ? -r->theta : r->theta;
        const double c = std::cos(th);
        const double s = std::sin(th);
        const Amplitude au = state.amp(r->u);
        const Amplitude av = state.amp(r->v);
        out.set_amp(r->u, c * au - s * av);
        out.set_amp(r->v, s * au + c * av);
    } else if (const auto* p = std::get_if<Route>(&e)) {
        for (const auto& [a, b] : p->swaps) {
            out.set_amp(a, state.amp(b));
            out.set_amp(b, state.amp(a));
        }
    } else if (const auto* a = std::get_if<Absorb>(&e)) {
        out.set_amp(a->to, state.amp(a->from));
        out.set_amp(a->from, state.amp(a->to));
    }
    check_finite(out, e);
    return out;
}

}  // namespace

StateVector apply_element(const StateVector& state, const Element& e) {
    for (ModeIndex m : touched_modes(e)) {
        state.registry().mode(m);  // UnknownMode for bad indices
        check_terminal_untouched(state, m);
    }
    return apply_impl(state, e, false);
}

StateVector apply_element_adjoint(const StateVector& state, const Element& e) {
    for (ModeIndex m : touched_modes(e)) {
        state.registry().mode(m);
    }
    return apply_impl(state, e, true);
}

EvolutionTrace evolve_forward(const Circuit& circuit, Amplitude source_amp) {
    circuit.validate();
    if (!std::isfinite(source_amp.real()) || !std::isfinite(source_amp.imag())) {
        throw NonFiniteAmplitude("source amplitude is not finite");
    }
    EvolutionTrace trace;
    trace.direction = Direction::Forward;
    trace.states.reserve(circuit.n_boundaries());

    StateVector state = StateVector::zero(circuit.registry);
    state.set_amp(circuit.source, source_amp);
    trace.states.push_back(state);
    for (const Step& step : circuit.steps) {
        for (const Element& e : step) {
            state = apply_element(state, e);
        }
        trace.states.push_back(state);
    }

    if (!circuit.terminal_modes().empty()) {
        double leftover = 0.0;
        for (ModeIndex m = 0; m < circuit.registry->size(); ++m) {
            if (!circuit.registry->is_terminal(m)) {
                leftover += std::norm(state.amp(m));
            }
        }
        if (leftover > 1e-12) {
            throw MalformedCircuit("amplitude left on non-terminal modes after the last step ("
                                   + std::to_string(leftover) + ")");
        }
    }
    return trace;
}

EvolutionTrace evolve_backward(const Circuit& circuit, ModeIndex postselect) {
    circuit.validate();
    if (!circuit.registry->is_terminal(postselect)) {
        throw NotTerminal("post-selection mode '" + circuit.registry->mode(postselect).name +
                          "' is not a detector or sink");
    }
    std::vector<StateVector> reversed;
    reversed.reserve(circuit.n_boundaries());
    StateVector state = StateVector::basis(circuit.registry, postselect);
    reversed.push_back(state);
    for (auto it = circuit.steps.rbegin(); it != circuit.steps.rend(); ++it) {
        for (auto eit = it->rbegin(); eit != it->rend(); ++eit) {
            state = apply_element_adjoint(state, *eit);
        }
        reversed.push_back(state);
    }
    EvolutionTrace trace;
    trace.direction = Direction::Backward;
    trace.states.assign(reversed.rbegin(), reversed.rend());
    return trace;
}

std::vector<std::pair<ModeIndex, double>> outcome_distribution(const EvolutionTrace& trace) {
    if (trace.direction != Direction::Forward) {
        throw WrongDirection("outcome distribution needs a forward trace");
    }
    const StateVector& final_state = trace.states.back();
    const ModeRegistry& reg = final_state.registry();
    std::vector<std::pair<ModeIndex, double>> dist;
    for (ModeIndex m = 0; m < reg.size(); ++m) {
        if (reg.is_terminal(m)) {
            dist.emplace_back(m, std::norm(final_state.amp(m)));
        }
    }
    return dist;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) {
        if (p < -1e-12) {
            throw NegativeProbability("negative probability " + std::to_string(p));
        }
        total += std::max(p, 0.0);
    }
    if (total <= 0.0) {
        throw NegativeProbability("probabilities sum to zero");
    }
    const double u = rng.next_double() * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    bool seen_positive = false;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::max(probs[i], 0.0);
        if (p > 0.0) {
            last_positive = i;
            seen_positive = true;
        }
        cum += p;
        if (u < cum && p > 0.0) {
            return i;
        }
    }
    // u landed on the trailing rounding gap; fall back to the last real entry.
    return seen_positive ? last_positive : 0;
}

ModeIndex sample_outcome(const std::vector<std::pair<ModeIndex, double>>& dist, Rng& rng) {
    std::vector<double> probs;
    probs.reserve(dist.size());
    for (const auto& [m, p] : dist) probs.push_back(p);
    return dist.at(sample_index(probs, rng)).first;
}

}  // namespace cfqsim::optics
