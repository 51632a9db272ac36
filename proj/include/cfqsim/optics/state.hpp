#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "cfqsim/errors.hpp"
#include "cfqsim/optics/mode.hpp"

namespace cfqsim::optics {

using Amplitude = std::complex<double>;

/// Single-photon state: one complex amplitude per registered mode. The
/// registry is shared, not copied, so states from the same circuit agree on
/// mode indexing by construction.
class StateVector {
public:
    StateVector(std::shared_ptr<const ModeRegistry> registry, std::vector<Amplitude> amps)
        : registry_(std::move(registry)), amps_(std::move(amps)) {
        if (!registry_ || amps_.size() != registry_->size()) {
            throw MalformedCircuit("state dimension does not match mode registry");
        }
    }

    /// All-zero state over the registry.
    static StateVector zero(std::shared_ptr<const ModeRegistry> registry) {
        std::vector<Amplitude> amps(registry->size(), Amplitude{0.0, 0.0});
        return StateVector(std::move(registry), std::move(amps));
    }

    /// Unit amplitude on one mode, zero elsewhere.
    static StateVector basis(std::shared_ptr<const ModeRegistry> registry, ModeIndex idx) {
        StateVector out = zero(std::move(registry));
        out.registry().mode(idx);  // range check
        out.amps_[idx] = Amplitude{1.0, 0.0};
        return out;
    }

    const ModeRegistry& registry() const { return *registry_; }
    std::shared_ptr<const ModeRegistry> registry_ptr() const { return registry_; }

    std::size_t size() const { return amps_.size(); }

    Amplitude amp(ModeIndex idx) const {
        registry_->mode(idx);  // range check
        return amps_[idx];
    }

    void set_amp(ModeIndex idx, Amplitude value) {
        registry_->mode(idx);  // range check
        amps_[idx] = value;
    }

    const std::vector<Amplitude>& amps() const { return amps_; }
    std::vector<Amplitude>& amps() { return amps_; }

    double norm_sq() const {
        double total = 0.0;
        for (const Amplitude& a : amps_) total += std::norm(a);
        return total;
    }

    /// <this|other> with the conjugate on this state's amplitudes.
    Amplitude inner(const StateVector& other) const {
        if (other.size() != size()) {
            throw MalformedCircuit("inner product between states of different dimension");
        }
        Amplitude total{0.0, 0.0};
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            total += std::conj(amps_[i]) * other.amps_[i];
        }
        return total;
    }

    bool all_finite() const {
        for (const Amplitude& a : amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
        }
        return true;
    }

private:
    std::shared_ptr<const ModeRegistry> registry_;
    std::vector<Amplitude> amps_;
};

}  // namespace cfqsim::optics
