#pragma once

#include <cmath>
#include <cstdint>

#include "cfqsim/errors.hpp"

namespace cfqsim::protocol {

/// Which of Bob's bit values means "blocker inserted".
///
/// The protocol is described with two mutually inconsistent conventions:
/// its quoted definition pairs blocking with X=0 while its error analysis
/// (one-sided erroneous 0-bits, '0' meaning "no blocking") only coheres with
/// blocking on X=1. block_means_one is the default; blockquote_literal
/// applies the quoted mapping verbatim, which systematically inverts 1-bits
/// because D1 can only fire when the channel is blocked.
enum class BitConvention { BlockMeansOne, BlockquoteLiteral };

struct ProtocolParams {
    /// Outer rotation; the photon enters the inner chain with p = sin^2(theta_out).
    double theta_out = M_PI / 4.0;
    /// Number of inner cycles N, each rotating by pi/(2N).
    int n_inner = 25;
    BitConvention bit_convention = BitConvention::BlockMeansOne;
    /// Per-segment transmission applied on both inner arms each cycle; 1 = lossless.
    double inner_loss = 1.0;
    std::uint64_t seed = 0;

    /// Throws InvalidParams unless 0 < theta_out < pi/2, n_inner >= 1 and
    /// 0 < inner_loss <= 1. Degenerate angles are rejected here; tests that
    /// need theta in {0, pi/2} assemble circuits through detail::assemble.
    void validate() const {
        if (!(theta_out > 0.0) || !(theta_out < M_PI / 2.0) || !std::isfinite(theta_out)) {
            throw InvalidParams("theta_out must lie strictly between 0 and pi/2");
        }
        if (n_inner < 1) {
            throw InvalidParams("n_inner must be at least 1");
        }
        if (!(inner_loss > 0.0) || !(inner_loss <= 1.0) || !std::isfinite(inner_loss)) {
            throw InvalidParams("inner_loss must lie in (0, 1]");
        }
    }

    /// Whether Bob blocks his channel for bit value x.
    bool blocks(int x) const {
        return bit_convention == BitConvention::BlockMeansOne ? x == 1 : x == 0;
    }
};

/// Quantum Zeno survival amplitude c = cos^N(pi/(2N)): the amplitude with
/// which a blocked chain returns the photon to Alice's side.
inline double zeno_amplitude(int n_inner) {
    return std::pow(std::cos(M_PI / (2.0 * n_inner)), n_inner);
}

}  // namespace cfqsim::protocol
