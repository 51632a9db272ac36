#include "cfqsim/optics/circuit.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "cfqsim/errors.hpp"

namespace cfqsim::optics {

std::vector<ModeIndex> touched_modes(const Element& e) {
    std::vector<ModeIndex> out;
    if (const auto* r = std::get_if<Rotation>(&e)) {
        out = {r->u, r->v};
    } else if (const auto* p = std::get_if<Route>(&e)) {
        for (const auto& [a, b] : p->swaps) {
            out.push_back(a);
            out.push_back(b);
        }
    } else if (const auto* a = std::get_if<Absorb>(&e)) {
        out = {a->from, a->to};
    }
    return out;
}

namespace {

void validate_element(const ModeRegistry& reg, const Element& e) {
    for (ModeIndex m : touched_modes(e)) {
        reg.mode(m);  // throws UnknownMode when out of range
    }
    if (const auto* r = std::get_if<Rotation>(&e)) {
        if (r->u == r->v) {
            throw MalformedCircuit("rotation needs two distinct modes");
        }
        if (!std::isfinite(r->theta)) {
            throw MalformedCircuit("rotation angle is not finite");
        }
    } else if (const auto* p = std::get_if<Route>(&e)) {
        std::unordered_set<ModeIndex> seen;
        for (const auto& [a, b] : p->swaps) {
            if (a == b || !seen.insert(a).second || !seen.insert(b).second) {
                throw MalformedCircuit("route swaps must be pairwise disjoint");
            }
        }
    } else if (const auto* a = std::get_if<Absorb>(&e)) {
        if (a->from == a->to) {
            throw MalformedCircuit("absorber needs two distinct modes");
        }
        if (reg.is_terminal(a->from)) {
            throw MalformedCircuit("absorber input '" + reg.mode(a->from).name +
                                   "' must be a path mode");
        }
        if (reg.mode(a->to).kind != ModeKind::Sink) {
            throw MalformedCircuit("absorber target '" + reg.mode(a->to).name +
                                   "' must be a sink");
        }
    }
}

}  // namespace

void Circuit::validate() const {
    if (!registry || registry->size() == 0) {
        throw MalformedCircuit("circuit has no mode registry");
    }
    if (registry->mode(source).kind != ModeKind::Path) {
        throw MalformedCircuit("source '" + registry->mode(source).name +
                               "' must be a path mode");
    }
    for (std::size_t s = 0; s < steps.size(); ++s) {
        std::unordered_set<ModeIndex> in_step;
        for (const Element& e : steps[s]) {
            validate_element(*registry, e);
            for (ModeIndex m : touched_modes(e)) {
                if (!in_step.insert(m).second) {
                    throw MalformedCircuit("step " + std::to_string(s) +
                                           " touches mode '" + registry->mode(m).name +
                                           "' more than once");
                }
            }
        }
    }
}

}  // namespace cfqsim::optics
