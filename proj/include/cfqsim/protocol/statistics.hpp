#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfqsim/protocol/toy_circuit.hpp"
#include "cfqsim/rng.hpp"

namespace cfqsim::protocol {

/// Where a round's photon ended up, after aggregating per-cycle sinks.
enum class Outcome { D0 = 0, D1 = 1, D3 = 2, BobAbsorbed = 3, ApparatusLoss = 4 };
inline constexpr std::size_t kNumOutcomes = 5;

const std::string& outcome_name(Outcome o);

/// Probabilities per outcome, in the fixed order D0, D1, D3, BobAbsorbed,
/// ApparatusLoss (the registry order of the corresponding modes).
struct RoundDistribution {
    std::array<double, kNumOutcomes> p{};

    double& operator[](Outcome o) { return p[static_cast<std::size_t>(o)]; }
    double operator[](Outcome o) const { return p[static_cast<std::size_t>(o)]; }
    double sum() const;
};

struct RoundOutcome {
    Outcome detector = Outcome::D0;
    /// Estimated bit, present iff the round succeeded: D0 -> 0, D1 -> 1.
    std::optional<int> x_est;
    bool success = false;
};

/// Applies the D0 -> 0 / D1 -> 1 estimation rule.
RoundOutcome classify(Outcome o);

struct MessageResult {
    std::vector<int> sent;
    bool retained = false;
    std::optional<std::vector<int>> decoded;
    std::optional<bool> all_correct;
    std::vector<RoundOutcome> per_bit;
};

/// joint[x][x_est] counts over post-selected data.
using JointCounts = std::array<std::array<std::uint64_t, 2>, 2>;

struct ChannelStats {
    JointCounts joint{};
    /// P(x_est = x | X = x) among retained data; absent when the row is empty.
    std::optional<double> accuracy0;
    std::optional<double> accuracy1;
    /// Fraction of rounds (or messages) that survived post-selection.
    double retention = 0.0;
    double mutual_information_bits = 0.0;
    std::uint64_t n_total = 0;
    std::uint64_t n_retained = 0;
};

struct PopescuResult {
    std::vector<int> guesses;
    std::vector<bool> live_mask;
    bool message_retained = false;
    /// joint[bob_bit][guess] over the guessed (non-live) positions.
    JointCounts guessed_joint{};
};

struct SweepRow {
    double theta_out = 0.0;
    int n_inner = 0;
    double retention_exact = 0.0;
    double accuracy_exact = 0.0;
    double mi_exact = 0.0;
    double expected_messages_until_one_retained = 0.0;
    double retention_sim = 0.0;
    std::optional<double> accuracy_sim;
    std::optional<double> mi_sim;
};

/// Closed forms for the lossless toy circuit, with c = zeno_amplitude(N):
/// unblocked -> {D0: cos^2, D3: sin^2, D1: 0}; blocked -> {D0: cos^2,
/// D1: c^2 sin^2, BobAbsorbed: (1-c^2) sin^2}. Whether x blocks follows
/// params.bit_convention. Throws LossUnsupportedHere when inner_loss < 1.
RoundDistribution analytic_round_distribution(const ProtocolParams& params, int x);

/// The same distribution computed by evolving the built circuit (loss
/// allowed); equals the closed forms within 1e-12 when lossless.
RoundDistribution round_distribution(const ProtocolParams& params, int x);

/// Collapses a terminal-mode distribution into outcome categories using the
/// layout's sink lists.
RoundDistribution aggregate_outcomes(const ToyCircuit& toy,
                                     const std::vector<std::pair<optics::ModeIndex, double>>& mode_dist);

/// The accepted biased-coin simplification: with probability cos^2(theta) the
/// photon is withheld and booked as D0; otherwise it is fired straight into
/// the basic apparatus (inner chain only). Distribution-identical to the
/// full circuit, loss included.
RoundDistribution coin_variant_distribution(const ProtocolParams& params, int x);

/// One Born-rule draw from an outcome distribution.
RoundOutcome sample_round(const RoundDistribution& dist, Rng& rng);

/// Samples rounds until one lands in {D0, D1}; throws RetriesExhausted after
/// max_rounds failures (e.g. the degenerate unblocked theta = pi/2 case).
std::pair<int, int> run_round_with_retries(const RoundDistribution& dist, Rng& rng,
                                           int max_rounds);
std::pair<int, int> run_round_with_retries(const ProtocolParams& params, int x, Rng& rng,
                                           int max_rounds);

/// One photon per bit, no retries; the whole message is retained only if
/// every photon landed in D0 or D1.
MessageResult send_message_postselected(const ProtocolParams& params,
                                        const std::vector<int>& bits, Rng& rng);

/// Number of live positions in the no-coin variant: round(p * n) with
/// p = sin^2(theta_out).
int popescu_live_count(double p, int n_bits);

/// The no-coin simplification: the first round(p*n) positions (or a random
/// subset when random_positions) fire the basic apparatus directly (blocked
/// positions reach D1 with probability c^2 and are absorbed otherwise,
/// unblocked positions always exit at D3) and Alice guesses 0
/// everywhere else. The message is retained only if every live photon
/// reached D1, so a retained message has all live bits equal to 1 and its
/// guessed positions carry no information about Bob's bits.
PopescuResult run_popescu_no_coin(const ProtocolParams& params, const std::vector<int>& bits,
                                  Rng& rng, bool random_positions = false);

/// Joint counts, conditional accuracies, retention and I(X; X_est) in bits
/// from empirical frequencies. n_total is the pre-selection total used for
/// retention. Throws EmptyAfterPostselection when the joint is empty.
ChannelStats channel_statistics(const JointCounts& joint, std::uint64_t n_total);

/// Per-round mode: joint over successful rounds, retention over all rounds.
ChannelStats channel_statistics(const std::vector<std::pair<int, RoundOutcome>>& rounds);

/// Per-message mode: joint over the bits of retained messages, retention
/// over whole messages.
ChannelStats channel_statistics(const std::vector<MessageResult>& messages);

double mutual_information_bits(const JointCounts& joint);

// Closed-form channel/message statistics (lossless).

/// P(round succeeds | bit x).
double analytic_success_probability(const ProtocolParams& params, int x);
/// P(D1 | success) for a blocked round: c^2 sin^2 / (cos^2 + c^2 sin^2).
double analytic_d1_given_success(const ProtocolParams& params);
/// Per-bit channel MI when every bit is retried until success (uniform bits):
/// X uniform, X_est = 1 only for blocked bits surviving the chain.
double analytic_channel_mi(const ProtocolParams& params);
/// P(whole L-bit uniform random message retained) = ((2cos^2 + c^2 sin^2)/2)^L.
double analytic_message_retention_uniform(const ProtocolParams& params, int length);
/// P(decoded == sent | retained) for uniform messages
/// = ((cos^2 + c^2 sin^2)/(2cos^2 + c^2 sin^2))^L.
double analytic_message_accuracy_uniform(const ProtocolParams& params, int length);
/// Same, for a fixed bit string.
double analytic_message_retention(const ProtocolParams& params, const std::vector<int>& bits);
double analytic_message_accuracy(const ProtocolParams& params, const std::vector<int>& bits);

/// Exact and simulated statistics per grid point; trials uniform random
/// messages of message_length bits at each point, batch-seeded from seed.
std::vector<SweepRow> sweep(const std::vector<double>& theta_grid,
                            const std::vector<int>& n_grid, int message_length, int trials,
                            std::uint64_t seed);

}  // namespace cfqsim::protocol
