#include "cfqsim/protocol/toy_circuit.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace cfqsim::protocol {

using optics::Absorb;
using optics::ModeKind;
using optics::ModeRegistry;
using optics::Rotation;
using optics::Route;
using optics::Step;

namespace detail {

ToyCircuit assemble(const ProtocolParams& params, bool blocked, bool d0_topmost,
                    bool with_outer) {
    const int n = params.n_inner;
    const bool lossy = params.inner_loss < 1.0;
    // amplitude transmission sqrt(inner_loss) per arm per cycle
    const double loss_angle = lossy ? std::acos(std::sqrt(params.inner_loss)) : 0.0;

    auto registry = std::make_shared<ModeRegistry>();
    ToyLayout layout;
    layout.blocked = blocked;
    layout.d0_topmost = with_outer && d0_topmost;
    layout.n_inner = n;

    if (with_outer) {
        layout.outer = registry->add("O", ModeKind::Path);
    }
    layout.a = registry->add("a", ModeKind::Path);
    layout.b = registry->add("b", ModeKind::Path);
    if (with_outer) {
        layout.d0 = registry->add("D0", ModeKind::Detector);
    }
    layout.d1 = registry->add("D1", ModeKind::Detector);
    layout.d3 = registry->add("D3", ModeKind::Detector);
    for (int k = 1; k <= n && blocked; ++k) {
        layout.blocker_sinks.push_back(
            registry->add("sink_" + std::to_string(k), ModeKind::Sink));
    }
    for (int k = 1; k <= n && lossy; ++k) {
        layout.loss_sinks.push_back(
            registry->add("loss_a_" + std::to_string(k), ModeKind::Sink));
        layout.loss_sinks.push_back(
            registry->add("loss_b_" + std::to_string(k), ModeKind::Sink));
    }

    optics::Circuit circuit;
    circuit.registry = registry;
    circuit.source = with_outer ? layout.outer : layout.a;

    if (with_outer) {
        circuit.steps.push_back(Step{Rotation{layout.outer, layout.a, params.theta_out}});
        layout.after_outer = circuit.steps.size();
        if (layout.d0_topmost) {
            circuit.steps.push_back(Step{Route{{{layout.outer, layout.d0}}}});
        }
    }

    for (int k = 1; k <= n; ++k) {
        circuit.steps.push_back(
            Step{Rotation{layout.a, layout.b, M_PI / (2.0 * n)}});
        layout.after_inner_rotation.push_back(circuit.steps.size());
        if (lossy) {
            circuit.steps.push_back(
                Step{Rotation{layout.a, layout.loss_sinks[2 * (k - 1)], loss_angle},
                     Rotation{layout.b, layout.loss_sinks[2 * k - 1], loss_angle}});
        }
        if (blocked) {
            circuit.steps.push_back(
                Step{Absorb{layout.b, layout.blocker_sinks[k - 1]}});
            layout.sink_written_at.push_back(circuit.steps.size());
        }
        layout.after_cycle.push_back(circuit.steps.size());
    }

    Step final_route;
    if (with_outer && !layout.d0_topmost) {
        final_route.push_back(Route{{{layout.outer, layout.d0},
                                     {layout.a, layout.d1},
                                     {layout.b, layout.d3}}});
    } else {
        final_route.push_back(Route{{{layout.a, layout.d1}, {layout.b, layout.d3}}});
    }
    circuit.steps.push_back(final_route);
    layout.n_steps = circuit.steps.size();

    circuit.validate();
    return ToyCircuit{std::move(circuit), std::move(layout)};
}

}  // namespace detail

ToyCircuit build_toy_circuit(const ProtocolParams& params, bool blocked, bool d0_topmost) {
    params.validate();
    return detail::assemble(params, blocked, d0_topmost, true);
}

ToyCircuit build_basic_apparatus(const ProtocolParams& params, bool blocked) {
    params.validate();
    return detail::assemble(params, blocked, false, false);
}

}  // namespace cfqsim::protocol
