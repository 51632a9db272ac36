// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Tolerances are stated inline with each result.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cfqsim/analysis/histories.hpp"
#include "cfqsim/analysis/two_state.hpp"
#include "cfqsim/cli/cli.hpp"
#include "cfqsim/errors.hpp"
#include "cfqsim/optics/evolve.hpp"
#include "cfqsim/protocol/statistics.hpp"
#include "test_helpers.hpp"

using namespace cfqsim;

namespace {

const std::vector<double> kThetaGrid = {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5};
const std::vector<int> kNGrid = {1, 2, 5, 10, 25, 100};

protocol::ProtocolParams make_params(double theta, int n) {
    protocol::ProtocolParams p;
    p.theta_out = theta;
    p.n_inner = n;
    return p;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

/// Skips of D1 are legitimate only where it structurally cannot fire: the
/// unblocked channel (exactly zero) and N=1 blocked, where the survival
/// amplitude cos(pi/2)*sin(theta) is rounding dust below the 1e-14 cutoff.
bool expected_d1_skip(const protocol::ProtocolParams& params, int bit) {
    return !params.blocks(bit) || params.n_inner == 1;
}

Outcome criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    double max_diff = 0.0;
    int points = 0;
    for (double theta : kThetaGrid) {
        for (int n : kNGrid) {
            for (int bit : {0, 1}) {
                const auto params = make_params(theta, n);
                const protocol::RoundDistribution sim = protocol::round_distribution(params, bit);
                const protocol::RoundDistribution exact =
                    protocol::analytic_round_distribution(params, bit);
                for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
                    max_diff = std::max(max_diff, std::abs(sim.p[i] - exact.p[i]));
                }
                points += 1;
            }
        }
    }
    const double elapsed = seconds_since(start);
    Outcome r;
    r.pass = max_diff <= 1e-12 && elapsed < 1.0;
    r.detail = fmt("evolved vs closed-form distributions: max |diff| %.2e (tol 1e-12) over %d "
                   "grid points in %.2fs (limit 1s)",
                   max_diff, points, elapsed);
    return r;
}

Outcome criterion_2() {
    double max_diff = 0.0;
    for (double theta : kThetaGrid) {
        for (int n : kNGrid) {
            for (int bit : {0, 1}) {
                const auto params = make_params(theta, n);
                const protocol::RoundDistribution reference =
                    protocol::round_distribution(params, bit);
                const protocol::ToyCircuit topmost =
                    protocol::build_toy_circuit(params, params.blocks(bit), true);
                const protocol::RoundDistribution moved = protocol::aggregate_outcomes(
                    topmost, optics::outcome_distribution(optics::evolve_forward(topmost.circuit)));
                const protocol::RoundDistribution coin =
                    protocol::coin_variant_distribution(params, bit);
                for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
                    max_diff = std::max(max_diff, std::abs(moved.p[i] - reference.p[i]));
                    max_diff = std::max(max_diff, std::abs(coin.p[i] - reference.p[i]));
                }
            }
        }
    }
    Outcome r;
    r.pass = max_diff <= 1e-12;
    r.detail = fmt("D0-topmost and biased-coin variants vs full circuit: max |diff| %.2e "
                   "(tol 1e-12)",
                   max_diff);
    return r;
}

Outcome criterion_3() {
    double max_kept = 0.0;
    bool skips_expected = true;
    int skips = 0;
    for (double theta : kThetaGrid) {
        for (int n : kNGrid) {
            for (int bit : {0, 1}) {
                const auto params = make_params(theta, n);
                for (const char* name : {"D0", "D1"}) {
                    try {
                        max_kept = std::max(
                            max_kept, analysis::bob_presence_by_weak_trace(params, bit, name));
                    } catch (const ZeroPostselectionProbability&) {
                        skips += 1;
                        if (std::string(name) != "D1" || !expected_d1_skip(params, bit)) {
                            skips_expected = false;
                        }
                    }
                }
            }
        }
    }
    double min_failure = 1e300;
    for (int n : {2, 5, 10, 25, 100}) {
        const auto params = make_params(M_PI / 4.0, n);
        const int open_bit = params.blocks(0) ? 1 : 0;
        min_failure = std::min(
            min_failure, analysis::bob_presence_by_weak_trace(params, open_bit, "D3"));
    }
    Outcome r;
    r.pass = max_kept < 1e-10 && min_failure > 0.1 && skips_expected;
    r.detail = fmt("weak trace on Bob region: max for kept D0/D1 %.2e (tol 1e-10, %d "
                   "structurally-zero D1 cases skipped), min for unblocked D3 %.3f (must "
                   "exceed 0.1)",
                   max_kept, skips, min_failure);
    return r;
}

Outcome criterion_4() {
    double max_bob = 0.0;
    double max_offdiag = 0.0;
    bool all_consistent = true;
    bool skips_expected = true;
    int skips = 0;
    for (double theta : kThetaGrid) {
        for (int n : kNGrid) {
            for (int bit : {0, 1}) {
                const auto params = make_params(theta, n);
                const protocol::ToyCircuit toy =
                    protocol::build_toy_circuit(params, params.blocks(bit));
                const analysis::HistoryFamily family =
                    analysis::make_default_history_family(toy, 12);
                for (const char* name : {"D0", "D1"}) {
                    analysis::DecoherenceMatrix matrix;
                    try {
                        matrix = analysis::decoherence_functional(
                            toy.circuit, family, toy.circuit.registry->index_of(name));
                    } catch (const ZeroPostselectionProbability&) {
                        skips += 1;
                        if (std::string(name) != "D1" || !expected_d1_skip(params, bit)) {
                            skips_expected = false;
                        }
                        continue;
                    }
                    const analysis::ConsistencyReport report =
                        analysis::consistency_report(matrix, 1e-10);
                    all_consistent = all_consistent && report.consistent;
                    max_offdiag = std::max(max_offdiag, report.max_offdiag);
                    max_bob = std::max(max_bob, report.bob_history_probability);
                }
            }
        }
    }
    Outcome r;
    r.pass = all_consistent && max_bob < 1e-12 && skips_expected;
    r.detail = fmt("consistent histories for kept D0/D1: all consistent at eps 1e-10 (max "
                   "offdiag %.2e), max Bob-history probability %.2e (tol 1e-12), %d "
                   "structurally-zero D1 cases skipped",
                   max_offdiag, max_bob, skips);
    return r;
}

Outcome criterion_5() {
    double max_d1_open = 0.0;
    bool d1_exact_zero = true;
    double max_d0_err = 0.0;
    for (double theta : kThetaGrid) {
        for (int n : kNGrid) {
            const auto params = make_params(theta, n);
            const int open_bit = params.blocks(0) ? 1 : 0;
            const int blocked_bit = 1 - open_bit;
            const protocol::RoundDistribution open_exact =
                protocol::analytic_round_distribution(params, open_bit);
            d1_exact_zero = d1_exact_zero && open_exact[protocol::Outcome::D1] == 0.0;
            const protocol::RoundDistribution open_evolved =
                protocol::round_distribution(params, open_bit);
            max_d1_open = std::max(max_d1_open, open_evolved[protocol::Outcome::D1]);

            const double expected_d0 = std::cos(theta) * std::cos(theta);
            max_d0_err = std::max(
                max_d0_err, std::abs(protocol::analytic_round_distribution(
                                         params, blocked_bit)[protocol::Outcome::D0] -
                                     expected_d0));
            max_d0_err = std::max(
                max_d0_err,
                std::abs(protocol::round_distribution(params, blocked_bit)[protocol::Outcome::D0] -
                         expected_d0));
        }
    }
    Outcome r;
    r.pass = d1_exact_zero && max_d1_open < 1e-30 && max_d0_err <= 1e-12;
    r.detail = fmt("one-sided errors: P(D1|unblocked) exactly 0 analytic, max %.2e evolved "
                   "(tol 1e-30); max |P(D0|blocked) - cos^2| %.2e (tol 1e-12)",
                   max_d1_open, max_d0_err);
    return r;
}

Outcome criterion_6() {
    const auto start = std::chrono::steady_clock::now();
    struct Point {
        double theta;
        int n;
        int bit;
    };
    const std::vector<Point> points = {{M_PI / 4.0, 2, 1}, {0.3, 10, 0}, {1.3, 25, 1}};
    const int trials = 1000000;
    double max_sigmas = 0.0;
    bool reference_ok = true;
    std::uint64_t seed = 61;
    for (const Point& pt : points) {
        const auto params = make_params(pt.theta, pt.n);
        const protocol::RoundDistribution exact =
            protocol::analytic_round_distribution(params, pt.bit);
        if (pt.n == 2 && pt.bit == 1) {
            reference_ok = std::abs(exact[protocol::Outcome::D0] - 0.5) < 1e-12 &&
                           std::abs(exact[protocol::Outcome::D1] - 0.125) < 1e-12 &&
                           std::abs(exact[protocol::Outcome::BobAbsorbed] - 0.375) < 1e-12;
        }
        std::array<std::uint64_t, protocol::kNumOutcomes> counts{};
        Rng rng(seed++);
        for (int t = 0; t < trials; ++t) {
            counts[static_cast<std::size_t>(protocol::sample_round(exact, rng).detector)] += 1;
        }
        for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
            const double freq = static_cast<double>(counts[i]) / trials;
            const double sigma = std::sqrt(exact.p[i] * (1.0 - exact.p[i]) / trials);
            if (sigma == 0.0) {
                if (freq != exact.p[i]) max_sigmas = 1e300;
                continue;
            }
            max_sigmas = std::max(max_sigmas, std::abs(freq - exact.p[i]) / sigma);
        }
    }
    const double elapsed = seconds_since(start);
    Outcome r;
    r.pass = max_sigmas <= 4.0 && reference_ok && elapsed < 10.0;
    r.detail = fmt("10^6 sampled rounds at 3 grid points (pi/4, N=2 blocked = "
                   "{0.5, 0.125, 0.375}): worst frequency deviation %.2f sigma (limit 4) in "
                   "%.1fs (limit 10s)",
                   max_sigmas, elapsed);
    return r;
}

Outcome criterion_7() {
    const int trials = 100000;
    const int length = 16;
    std::vector<double> thetas;
    for (double s2 : {0.5, 0.9, 0.99}) thetas.push_back(std::asin(std::sqrt(s2)));
    const std::vector<protocol::SweepRow> rows =
        protocol::sweep(thetas, {25}, length, trials, 777);

    bool monotone = rows[0].retention_exact > rows[1].retention_exact &&
                    rows[1].retention_exact > rows[2].retention_exact &&
                    rows[0].accuracy_exact < rows[1].accuracy_exact &&
                    rows[1].accuracy_exact < rows[2].accuracy_exact;
    double max_sigmas = 0.0;
    for (const protocol::SweepRow& row : rows) {
        const double r_sigma =
            std::sqrt(row.retention_exact * (1.0 - row.retention_exact) / trials);
        max_sigmas = std::max(max_sigmas,
                              std::abs(row.retention_sim - row.retention_exact) / r_sigma);
        if (row.accuracy_sim) {
            const auto retained =
                static_cast<std::uint64_t>(std::llround(row.retention_sim * trials));
            const double a_sigma = std::sqrt(
                row.accuracy_exact * (1.0 - row.accuracy_exact) / static_cast<double>(retained));
            max_sigmas =
                std::max(max_sigmas, std::abs(*row.accuracy_sim - row.accuracy_exact) / a_sigma);
        }
    }
    Outcome r;
    r.pass = monotone && max_sigmas <= 4.0;
    r.detail = fmt("N=25, sin^2 in {0.5, 0.9, 0.99}, 16-bit messages, 10^5 trials: closed-form "
                   "retention strictly falls (%.2e > %.2e > %.2e), accuracy strictly rises; "
                   "simulated values within %.2f sigma (limit 4)",
                   rows[0].retention_exact, rows[1].retention_exact, rows[2].retention_exact,
                   max_sigmas);
    return r;
}

Outcome criterion_8() {
    const int trials = 100000;
    const int n_bits = 16;
    const auto params = make_params(M_PI / 4.0, 100);
    Rng rng(88);
    std::vector<int> bits(n_bits);
    int retained = 0;
    bool all_live_ones = true;
    protocol::JointCounts guessed{};
    for (int t = 0; t < trials; ++t) {
        for (int& b : bits) b = rng.next_double() < 0.5 ? 0 : 1;
        const protocol::PopescuResult result =
            protocol::run_popescu_no_coin(params, bits, rng);
        if (result.message_retained) {
            retained += 1;
            for (int i = 0; i < n_bits; ++i) {
                if (result.live_mask[i] && bits[i] != 1) all_live_ones = false;
            }
        }
        for (int x = 0; x < 2; ++x) {
            for (int g = 0; g < 2; ++g) guessed[x][g] += result.guessed_joint[x][g];
        }
    }
    const double guessed_mi = protocol::mutual_information_bits(guessed);

    const auto strong = make_params(std::asin(std::sqrt(0.99)), 100);
    const double mi = protocol::analytic_channel_mi(strong);
    // Independent recomputation from the closed-form channel.
    const double c = protocol::zeno_amplitude(100);
    const double s2 = std::sin(strong.theta_out) * std::sin(strong.theta_out);
    const double c2 = 1.0 - s2;
    const double q = c * c * s2 / (c2 + c * c * s2);  // P(est 1 | x = 1, retried)
    const auto h = [](double p) {
        if (p <= 0.0 || p >= 1.0) return 0.0;
        return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
    };
    const double mi_recomputed = h(0.5 * q) - 0.5 * h(q);

    Outcome r;
    r.pass = retained > 0 && all_live_ones && guessed_mi < 1e-2 &&
             std::abs(mi - mi_recomputed) < 1e-12 && mi > 0.5;
    r.detail = fmt("no-coin rival at 10^5 messages: %d retained, all with every live bit = 1; "
                   "guessed-position MI %.2e bits (tol 1e-2). Toy retained-round MI at "
                   "sin^2 = 0.99, N=100: %.10f bits (recomputed %.10f, must exceed 0.5)",
                   retained, guessed_mi, mi, mi_recomputed);
    return r;
}

Outcome criterion_9() {
    Rng rng(909);
    double max_norm_err = 0.0;
    double max_overlap_drift = 0.0;
    double max_sum_err = 0.0;
    int circuits = 0;
    int sum_checks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const optics::Circuit circuit = testutil::random_circuit(rng, 10, 16);
        const optics::EvolutionTrace forward = optics::evolve_forward(circuit);
        for (const optics::StateVector& state : forward.states) {
            max_norm_err = std::max(max_norm_err, std::abs(state.norm_sq() - 1.0));
        }
        for (optics::ModeIndex post : circuit.terminal_modes()) {
            const optics::Amplitude overlap = forward.states.back().amp(post);
            const optics::EvolutionTrace backward = optics::evolve_backward(circuit, post);
            for (std::size_t t = 0; t < forward.states.size(); ++t) {
                max_overlap_drift = std::max(
                    max_overlap_drift,
                    std::abs(backward.states[t].inner(forward.states[t]) - overlap));
            }
            if (std::abs(overlap) > 1e-8) {
                for (std::size_t t = 0; t < forward.states.size(); ++t) {
                    std::complex<double> total{0.0, 0.0};
                    for (optics::ModeIndex m = 0; m < circuit.registry->size(); ++m) {
                        total += std::conj(backward.states[t].amp(m)) *
                                 forward.states[t].amp(m) / overlap;
                    }
                    max_sum_err =
                        std::max(max_sum_err, std::abs(total - std::complex<double>{1.0, 0.0}));
                    sum_checks += 1;
                }
            }
        }
        circuits += 1;
    }
    Outcome r;
    r.pass = max_norm_err <= 1e-12 && max_overlap_drift <= 1e-12 && max_sum_err <= 1e-10;
    r.detail = fmt("%d random circuits: max |norm - 1| %.2e, max overlap drift %.2e (tol "
                   "1e-12); weak-value sum rule off by %.2e over %d boundaries (tol 1e-10)",
                   circuits, max_norm_err, max_overlap_drift, max_sum_err, sum_checks);
    return r;
}

Outcome criterion_10(double elapsed_so_far) {
    using cli::RunConfig;
    bool reproducible = true;
    int commands = 0;
    const std::vector<std::vector<std::string>> invocations = {
        {"simulate", "--trials", "20000", "--seed", "5", "--n-inner", "4"},
        {"message", "--bits", "1011001010110100", "--trials", "5000", "--seed", "17",
         "--n-inner", "25"},
        {"popescu", "--n-bits", "16", "--trials", "5000", "--seed", "29", "--n-inner", "100"},
        {"sweep", "--theta-grid", "0.5,1.2", "--n-grid", "2,25", "--trials", "2000", "--seed",
         "3", "--format", "csv"},
        {"compare", "--theta-out", "1.4", "--n-inner", "25", "--n-bits", "8", "--trials",
         "2000", "--seed", "11"},
        {"histories", "--bit", "1", "--postselect", "D1", "--n-inner", "25"},
        {"weak-trace", "--bit", "0", "--postselect", "D3", "--n-inner", "25"},
    };
    for (const auto& args : invocations) {
        const RunConfig config = cli::parse_config(args);
        std::ostringstream first;
        std::ostringstream second;
        cli::execute(config, first);
        cli::execute(config, second);
        reproducible = reproducible && first.str() == second.str() && !first.str().empty();
        commands += 1;
    }
    Outcome r;
    r.pass = reproducible && elapsed_so_far < 60.0;
    r.detail = fmt("suite wall clock %.1fs (limit 60s); %d seeded commands byte-identical "
                   "across reruns",
                   elapsed_so_far, commands);
    return r;
}

}  // namespace

int main() {
    const auto suite_start = std::chrono::steady_clock::now();
    int failures = 0;
    const std::vector<std::function<Outcome()>> criteria = {
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9,
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome result;
        try {
            result = criteria[i]();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("unexpected exception: ") + e.what();
        }
        if (!result.pass) failures += 1;
        std::printf("criterion %2zu: %s  %s\n", i + 1, result.pass ? "PASS" : "FAIL",
                    result.detail.c_str());
        std::fflush(stdout);
    }
    Outcome last;
    try {
        last = criterion_10(seconds_since(suite_start));
    } catch (const std::exception& e) {
        last.pass = false;
        last.detail = std::string("unexpected exception: ") + e.what();
    }
    if (!last.pass) failures += 1;
    std::printf("criterion 10: %s  %s\n", last.pass ? "PASS" : "FAIL", last.detail.c_str());
    return failures;
}
