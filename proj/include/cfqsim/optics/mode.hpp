#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfqsim/errors.hpp"

namespace cfqsim::optics {

using ModeIndex = std::size_t;

/// How a mode participates in evolution.
///
///  - Path modes carry amplitude that later elements may transform.
///  - Detector modes are terminal: once amplitude lands there it must not be
///    touched by any later element.
///  - Sink modes are terminal in the same sense but represent absorption
///    (e.g. an object in the beam path) rather than a measurement click.
enum class ModeKind { Path, Detector, Sink };

struct Mode {
    std::string name;
    ModeKind kind = ModeKind::Path;
};

/// Registry of the modes a circuit acts on. Indices are dense and stable:
/// the i-th registered mode has index i, and state vectors over the registry
/// are plain arrays ordered the same way.
class ModeRegistry {
public:
    ModeIndex add(std::string name, ModeKind kind) {
        if (by_name_.contains(name)) {
            throw MalformedCircuit("duplicate mode name: " + name);
        }
        const ModeIndex idx = modes_.size();
        by_name_.emplace(name, idx);
        modes_.push_back(Mode{std::move(name), kind});
        return idx;
    }

    std::size_t size() const { return modes_.size(); }

    const Mode& mode(ModeIndex idx) const {
        if (idx >= modes_.size()) {
            throw UnknownMode("mode index " + std::to_string(idx) + " out of range");
        }
        return modes_[idx];
    }

    ModeIndex index_of(std::string_view name) const {
        auto it = by_name_.find(std::string(name));
        if (it == by_name_.end()) {
            throw UnknownMode("no mode named '" + std::string(name) + "'");
        }
        return it->second;
    }

    bool has(std::string_view name) const { return by_name_.contains(std::string(name)); }

    bool is_terminal(ModeIndex idx) const {
        const ModeKind k = mode(idx).kind;
        return k == ModeKind::Detector || k == ModeKind::Sink;
    }

    std::vector<ModeIndex> terminal_modes() const {
        std::vector<ModeIndex> out;
        for (ModeIndex i = 0; i < modes_.size(); ++i) {
            if (is_terminal(i)) out.push_back(i);
        }
        return out;
    }

private:
    std::vector<Mode> modes_;
    std::unordered_map<std::string, ModeIndex> by_name_;
};

}  // namespace cfqsim::optics
