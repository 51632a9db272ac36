#include "cfqsim/protocol/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfqsim/optics/evolve.hpp"

namespace cfqsim::protocol {

const std::string& outcome_name(Outcome o) {
    static const std::array<std::string, kNumOutcomes> names{
        "D0", "D1", "D3", "BobAbsorbed", "ApparatusLoss"};
    return names[static_cast<std::size_t>(o)];
}

double RoundDistribution::sum() const {
    return std::accumulate(p.begin(), p.end(), 0.0);
}

RoundOutcome classify(Outcome o) {
    RoundOutcome r;
    r.detector = o;
    r.success = o == Outcome::D0 || o == Outcome::D1;
    if (o == Outcome::D0) r.x_est = 0;
    if (o == Outcome::D1) r.x_est = 1;
    return r;
}

RoundDistribution analytic_round_distribution(const ProtocolParams& params, int x) {
    params.validate();
    if (params.inner_loss < 1.0) {
        throw LossUnsupportedHere("closed forms cover the lossless chain only");
    }
    const double s2 = std::sin(params.theta_out) * std::sin(params.theta_out);
    const double c2 = std::cos(params.theta_out) * std::cos(params.theta_out);
    const double c = zeno_amplitude(params.n_inner);
    RoundDistribution dist;
    dist[Outcome::D0] = c2;
    if (params.blocks(x)) {
        dist[Outcome::D1] = c * c * s2;
        dist[Outcome::BobAbsorbed] = (1.0 - c * c) * s2;
    } else {
        dist[Outcome::D1] = 0.0;
        dist[Outcome::D3] = s2;
    }
    return dist;
}

RoundDistribution aggregate_outcomes(
    const ToyCircuit& toy,
    const std::vector<std::pair<optics::ModeIndex, double>>& mode_dist) {
    const ToyLayout& lay = toy.layout;
    RoundDistribution dist;
    const bool has_d0 = toy.circuit.registry->has("D0");
    for (const auto& [m, prob] : mode_dist) {
        if (has_d0 && m == lay.d0) {
            dist[Outcome::D0] += prob;
        } else if (m == lay.d1) {
            dist[Outcome::D1] += prob;
        } else if (m == lay.d3) {
            dist[Outcome::D3] += prob;
        } else if (std::find(lay.blocker_sinks.begin(), lay.blocker_sinks.end(), m) !=
                   lay.blocker_sinks.end()) {
            dist[Outcome::BobAbsorbed] += prob;
        } else {
            dist[Outcome::ApparatusLoss] += prob;
        }
    }
    return dist;
}

namespace {

RoundDistribution distribution_for_blocked(const ProtocolParams& params, bool blocked) {
    const ToyCircuit toy = build_toy_circuit(params, blocked);
    const auto trace = optics::evolve_forward(toy.circuit);
    return aggregate_outcomes(toy, optics::outcome_distribution(trace));
}

}  // namespace

RoundDistribution round_distribution(const ProtocolParams& params, int x) {
    return distribution_for_blocked(params, params.blocks(x));
}

RoundDistribution coin_variant_distribution(const ProtocolParams& params, int x) {
    const double c2 = std::cos(params.theta_out) * std::cos(params.theta_out);
    const double s2 = std::sin(params.theta_out) * std::sin(params.theta_out);
    const ToyCircuit basic = build_basic_apparatus(params, params.blocks(x));
    const auto trace = optics::evolve_forward(basic.circuit);
    RoundDistribution inner = aggregate_outcomes(basic, optics::outcome_distribution(trace));
    RoundDistribution dist;
    dist[Outcome::D0] = c2;  // photon withheld by the coin, booked as a 0
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
        dist.p[i] += s2 * inner.p[i];
    }
    return dist;
}

RoundOutcome sample_round(const RoundDistribution& dist, Rng& rng) {
    const std::vector<double> probs(dist.p.begin(), dist.p.end());
    return classify(static_cast<Outcome>(optics::sample_index(probs, rng)));
}

std::pair<int, int> run_round_with_retries(const RoundDistribution& dist, Rng& rng,
                                           int max_rounds) {
    if (max_rounds < 1) {
        throw InvalidParams("max_rounds must be at least 1");
    }
    for (int i = 1; i <= max_rounds; ++i) {
        const RoundOutcome r = sample_round(dist, rng);
        if (r.success) {
            return {*r.x_est, i};
        }
    }
    throw RetriesExhausted("no successful round in " + std::to_string(max_rounds) +
                           " attempts");
}

std::pair<int, int> run_round_with_retries(const ProtocolParams& params, int x, Rng& rng,
                                           int max_rounds) {
    return run_round_with_retries(round_distribution(params, x), rng, max_rounds);
}

MessageResult send_message_postselected(const ProtocolParams& params,
                                        const std::vector<int>& bits, Rng& rng) {
    if (bits.empty()) {
        throw InvalidParams("message must contain at least one bit");
    }
    const RoundDistribution dist_unblocked = distribution_for_blocked(params, false);
    const RoundDistribution dist_blocked = distribution_for_blocked(params, true);

    MessageResult result;
    result.sent = bits;
    result.retained = true;
    for (int bit : bits) {
        const RoundOutcome r =
            sample_round(params.blocks(bit) ? dist_blocked : dist_unblocked, rng);
        result.per_bit.push_back(r);
        result.retained = result.retained && r.success;
    }
    if (result.retained) {
        std::vector<int> decoded;
        decoded.reserve(bits.size());
        for (const RoundOutcome& r : result.per_bit) {
            decoded.push_back(*r.x_est);
        }
        result.all_correct = decoded == bits;
        result.decoded = std::move(decoded);
    }
    return result;
}

int popescu_live_count(double p, int n_bits) {
    return static_cast<int>(std::llround(p * n_bits));
}

PopescuResult run_popescu_no_coin(const ProtocolParams& params, const std::vector<int>& bits,
                                  Rng& rng, bool random_positions) {
    params.validate();
    if (bits.empty()) {
        throw InvalidParams("message must contain at least one bit");
    }
    const int n = static_cast<int>(bits.size());
    const double p = std::sin(params.theta_out) * std::sin(params.theta_out);
    const int n_live = std::min(popescu_live_count(p, n), n);
    const double c = zeno_amplitude(params.n_inner);

    PopescuResult result;
    result.live_mask.assign(bits.size(), false);
    if (random_positions) {
        // partial Fisher-Yates over position indices
        std::vector<int> idx(bits.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n_live; ++i) {
            const int j = i + static_cast<int>(rng.next_double() * (n - i));
            std::swap(idx[i], idx[std::min(j, n - 1)]);
            result.live_mask[idx[i]] = true;
        }
    } else {
        std::fill(result.live_mask.begin(), result.live_mask.begin() + n_live, true);
    }

    result.guesses.assign(bits.size(), 0);
    result.message_retained = true;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!result.live_mask[i]) {
            // no photon: Alice guesses "no blocking", recorded as 0
            result.guessed_joint[bits[i] & 1][0] += 1;
            continue;
        }
        if (params.blocks(bits[i])) {
            const bool survived = rng.next_double() < c * c;
            result.guesses[i] = survived ? 1 : 0;
            result.message_retained = result.message_retained && survived;
        } else {
            // unblocked live run always exits at D3
            result.message_retained = false;
        }
    }
    return result;
}

double mutual_information_bits(const JointCounts& joint) {
    const double total = static_cast<double>(joint[0][0] + joint[0][1] + joint[1][0] +
                                             joint[1][1]);
    if (total == 0.0) {
        throw EmptyAfterPostselection("no post-selected samples");
    }
    double mi = 0.0;
    for (int x = 0; x < 2; ++x) {
        const double px = (joint[x][0] + joint[x][1]) / total;
        for (int y = 0; y < 2; ++y) {
            const double py = (joint[0][y] + joint[1][y]) / total;
            const double pxy = joint[x][y] / total;
            if (pxy > 0.0) {
                mi += pxy * std::log2(pxy / (px * py));
            }
        }
    }
    return std::max(mi, 0.0);
}

ChannelStats channel_statistics(const JointCounts& joint, std::uint64_t n_total) {
    ChannelStats stats;
    stats.joint = joint;
    stats.n_total = n_total;
    stats.n_retained = joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1];
    if (stats.n_retained == 0) {
        throw EmptyAfterPostselection("no post-selected samples");
    }
    stats.retention = n_total == 0 ? 0.0
                                   : static_cast<double>(stats.n_retained) /
                                         static_cast<double>(n_total);
    const std::uint64_t row0 = joint[0][0] + joint[0][1];
    const std::uint64_t row1 = joint[1][0] + joint[1][1];
    if (row0 > 0) stats.accuracy0 = static_cast<double>(joint[0][0]) / row0;
    if (row1 > 0) stats.accuracy1 = static_cast<double>(joint[1][1]) / row1;
    stats.mutual_information_bits = mutual_information_bits(joint);
    return stats;
}

ChannelStats channel_statistics(const std::vector<std::pair<int, RoundOutcome>>& rounds) {
    JointCounts joint{};
    for (const auto& [x, r] : rounds) {
        if (r.success) {
            joint[x & 1][*r.x_est & 1] += 1;
        }
    }
    return channel_statistics(joint, rounds.size());
}

ChannelStats channel_statistics(const std::vector<MessageResult>& messages) {
    JointCounts joint{};
    std::uint64_t retained = 0;
    for (const MessageResult& m : messages) {
        if (!m.retained) continue;
        retained += 1;
        for (std::size_t i = 0; i < m.sent.size(); ++i) {
            joint[m.sent[i] & 1][(*m.decoded)[i] & 1] += 1;
        }
    }
    ChannelStats stats = channel_statistics(joint, 0);
    stats.n_total = messages.size();
    stats.n_retained = retained;
    stats.retention = messages.empty() ? 0.0
                                       : static_cast<double>(retained) /
                                             static_cast<double>(messages.size());
    return stats;
}

double analytic_success_probability(const ProtocolParams& params, int x) {
    const RoundDistribution d = analytic_round_distribution(params, x);
    return d[Outcome::D0] + d[Outcome::D1];
}

double analytic_d1_given_success(const ProtocolParams& params) {
    const double s2 = std::sin(params.theta_out) * std::sin(params.theta_out);
    const double c2 = std::cos(params.theta_out) * std::cos(params.theta_out);
    const double c = zeno_amplitude(params.n_inner);
    return c * c * s2 / (c2 + c * c * s2);
}

double analytic_channel_mi(const ProtocolParams& params) {
    const double q = analytic_d1_given_success(params);
    // X uniform; X = 0 always decodes to 0, X = 1 decodes to 1 w.p. q
    const double p00 = 0.5;
    const double p10 = 0.5 * (1.0 - q);
    const double p11 = 0.5 * q;
    const double py0 = p00 + p10;
    const double py1 = p11;
    double mi = 0.0;
    if (p00 > 0) mi += p00 * std::log2(p00 / (0.5 * py0));
    if (p10 > 0) mi += p10 * std::log2(p10 / (0.5 * py0));
    if (p11 > 0) mi += p11 * std::log2(p11 / (0.5 * py1));
    return std::max(mi, 0.0);
}

double analytic_message_retention_uniform(const ProtocolParams& params, int length) {
    const double s_unblocked = analytic_success_probability(params, params.blocks(0) ? 1 : 0);
    const double s_blocked = analytic_success_probability(params, params.blocks(1) ? 1 : 0);
    return std::pow(0.5 * (s_unblocked + s_blocked), length);
}

double analytic_message_accuracy_uniform(const ProtocolParams& params, int length) {
    // per bit: P(correct and success) / P(success), averaged over the uniform bit
    const double s_unblocked = analytic_success_probability(params, params.blocks(0) ? 1 : 0);
    const double s_blocked = analytic_success_probability(params, params.blocks(1) ? 1 : 0);
    const double q = analytic_d1_given_success(params);
    const double correct = 0.5 * (s_unblocked + s_blocked * q);
    return std::pow(correct / (0.5 * (s_unblocked + s_blocked)), length);
}

double analytic_message_retention(const ProtocolParams& params, const std::vector<int>& bits) {
    double r = 1.0;
    for (int bit : bits) {
        r *= analytic_success_probability(params, bit);
    }
    return r;
}

double analytic_message_accuracy(const ProtocolParams& params, const std::vector<int>& bits) {
    const double q = analytic_d1_given_success(params);
    double a = 1.0;
    for (int bit : bits) {
        if (params.blocks(bit)) a *= q;
        // unblocked successes always decode correctly: P(D1 | unblocked) = 0
    }
    return a;
}

std::vector<SweepRow> sweep(const std::vector<double>& theta_grid,
                            const std::vector<int>& n_grid, int message_length, int trials,
                            std::uint64_t seed) {
    if (message_length < 1 || trials < 1) {
        throw InvalidParams("sweep needs message_length >= 1 and trials >= 1");
    }
    std::vector<SweepRow> rows;
    std::uint64_t batch = 0;
    for (double theta : theta_grid) {
        for (int n : n_grid) {
            ProtocolParams params;
            params.theta_out = theta;
            params.n_inner = n;
            params.validate();

            SweepRow row;
            row.theta_out = theta;
            row.n_inner = n;
            row.retention_exact = analytic_message_retention_uniform(params, message_length);
            row.accuracy_exact = analytic_message_accuracy_uniform(params, message_length);
            row.mi_exact = analytic_channel_mi(params);
            row.expected_messages_until_one_retained = 1.0 / row.retention_exact;

            Rng rng = Rng::for_batch(seed, batch++);
            std::uint64_t retained = 0;
            std::uint64_t correct = 0;
            JointCounts joint{};
            std::vector<int> bits(message_length);
            for (int t = 0; t < trials; ++t) {
                for (int& b : bits) {
                    b = rng.next_double() < 0.5 ? 0 : 1;
                }
                const MessageResult m = send_message_postselected(params, bits, rng);
                if (m.retained) {
                    retained += 1;
                    if (*m.all_correct) correct += 1;
                }
                for (std::size_t i = 0; i < bits.size(); ++i) {
                    const RoundOutcome& r = m.per_bit[i];
                    if (r.success) {
                        joint[bits[i]][*r.x_est] += 1;
                    }
                }
            }
            row.retention_sim = static_cast<double>(retained) / trials;
            if (retained > 0) {
                row.accuracy_sim = static_cast<double>(correct) / retained;
            }
            const std::uint64_t joint_total =
                joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1];
            if (joint_total > 0) {
                row.mi_sim = mutual_information_bits(joint);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace cfqsim::protocol
