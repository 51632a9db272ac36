#pragma once

#include <stdexcept>
#include <string>

namespace cfqsim {

/// Base class for all domain errors raised by the simulator. The CLI maps
/// these to exit code 3; usage and I/O problems have their own types.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// optics
struct UnknownMode : Error {
    using Error::Error;
};
struct TerminalModeReuse : Error {
    using Error::Error;
};
struct NonFiniteAmplitude : Error {
    using Error::Error;
};
struct MalformedCircuit : Error {
    using Error::Error;
};
struct NotTerminal : Error {
    using Error::Error;
};
struct WrongDirection : Error {
    using Error::Error;
};
struct NegativeProbability : Error {
    using Error::Error;
};

// protocol
struct InvalidParams : Error {
    using Error::Error;
};
struct LossUnsupportedHere : Error {
    using Error::Error;
};
struct RetriesExhausted : Error {
    using Error::Error;
};
struct EmptyAfterPostselection : Error {
    using Error::Error;
};

// path analysis
struct ZeroPostselectionProbability : Error {
    using Error::Error;
};
struct MalformedFamily : Error {
    using Error::Error;
};

// cli
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cfqsim
