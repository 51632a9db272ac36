#include "cfqsim/cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "cfqsim/analysis/histories.hpp"
#include "cfqsim/analysis/two_state.hpp"
#include "cfqsim/cli/emit.hpp"
#include "cfqsim/errors.hpp"

namespace cfqsim::cli {

namespace {

struct HelpRequested {
    std::string text;
};

const std::set<std::string> kConfigKeys = {
    "theta_out",   "n_inner",        "bit_convention",   "inner_loss", "seed",
    "bit",         "bits",           "n_bits",           "trials",     "message_length",
    "postselect",  "sinks_only",     "random_positions", "eps",        "max_slices",
    "theta_grid",  "n_grid",         "format",           "out"};

std::vector<int> parse_bits(const std::string& text) {
    std::vector<int> bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw UsageError("--bits must contain only 0 and 1 characters");
        }
        bits.push_back(c - '0');
    }
    return bits;
}

json params_json(const RunConfig& config) {
    json p;
    p["theta_out"] = config.params.theta_out;
    p["n_inner"] = config.params.n_inner;
    p["bit_convention"] =
        config.params.bit_convention == protocol::BitConvention::BlockMeansOne
            ? "block-means-one"
            : "blockquote-literal";
    p["inner_loss"] = config.params.inner_loss;
    p["seed"] = config.params.seed;
    return p;
}

json dist_json(const protocol::RoundDistribution& dist) {
    json d;
    for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
        d[protocol::outcome_name(static_cast<protocol::Outcome>(i))] = dist.p[i];
    }
    return d;
}

json complex_json(std::complex<double> z) {
    json c;
    c["re"] = z.real();
    c["im"] = z.imag();
    return c;
}

json joint_json(const protocol::JointCounts& joint) {
    return json::array({json::array({joint[0][0], joint[0][1]}),
                        json::array({joint[1][0], joint[1][1]})});
}

struct Rendered {
    json doc;
    Table table;
};

void kv_row(Table& table, const std::string& key, const std::string& value) {
    table.rows.push_back({key, value});
}

Rendered exec_probs(const RunConfig& config) {
    const protocol::RoundDistribution sim =
        protocol::round_distribution(config.params, config.bit);
    const bool lossless = config.params.inner_loss == 1.0;
    protocol::RoundDistribution analytic;
    double max_abs_diff = 0.0;
    if (lossless) {
        analytic = protocol::analytic_round_distribution(config.params, config.bit);
        for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
            max_abs_diff = std::max(max_abs_diff, std::abs(sim.p[i] - analytic.p[i]));
        }
    }

    Rendered r;
    r.doc["command"] = "probs";
    r.doc["params"] = params_json(config);
    r.doc["bit"] = config.bit;
    r.doc["blocked"] = config.params.blocks(config.bit);
    r.doc["simulated"] = dist_json(sim);
    r.doc["analytic"] = lossless ? dist_json(analytic) : json(nullptr);
    r.doc["max_abs_diff"] = lossless ? json(max_abs_diff) : json(nullptr);

    r.table.header = {"outcome", "simulated", "analytic", "abs_diff"};
    for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
        const std::string name = protocol::outcome_name(static_cast<protocol::Outcome>(i));
        r.table.rows.push_back(
            {name, format_double(sim.p[i]),
             lossless ? format_double(analytic.p[i]) : "",
             lossless ? format_double(std::abs(sim.p[i] - analytic.p[i])) : ""});
    }
    return r;
}

Rendered exec_simulate(const RunConfig& config) {
    const protocol::RoundDistribution dist =
        protocol::round_distribution(config.params, config.bit);
    const bool lossless = config.params.inner_loss == 1.0;
    protocol::RoundDistribution analytic;
    if (lossless) {
        analytic = protocol::analytic_round_distribution(config.params, config.bit);
    }

    std::array<std::uint64_t, protocol::kNumOutcomes> counts{};
    std::uint64_t successes = 0;
    std::array<std::uint64_t, 2> est_counts{};
    Rng rng(config.params.seed);
    for (int t = 0; t < config.trials; ++t) {
        const protocol::RoundOutcome r = protocol::sample_round(dist, rng);
        counts[static_cast<std::size_t>(r.detector)] += 1;
        if (r.success) {
            successes += 1;
            est_counts[static_cast<std::size_t>(*r.x_est)] += 1;
        }
    }

    Rendered r;
    r.doc["command"] = "simulate";
    r.doc["params"] = params_json(config);
    r.doc["bit"] = config.bit;
    r.doc["blocked"] = config.params.blocks(config.bit);
    r.doc["trials"] = config.trials;
    json counts_json;
    json freq_json;
    double max_abs_diff = 0.0;
    for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
        const std::string name = protocol::outcome_name(static_cast<protocol::Outcome>(i));
        counts_json[name] = counts[i];
        const double freq = static_cast<double>(counts[i]) / config.trials;
        freq_json[name] = freq;
        if (lossless) {
            max_abs_diff = std::max(max_abs_diff, std::abs(freq - analytic.p[i]));
        }
    }
    r.doc["counts"] = counts_json;
    r.doc["frequencies"] = freq_json;
    r.doc["analytic"] = lossless ? dist_json(analytic) : json(nullptr);
    r.doc["max_abs_diff_vs_analytic"] = lossless ? json(max_abs_diff) : json(nullptr);
    r.doc["success_count"] = successes;
    r.doc["x_est_counts"] = json::array({est_counts[0], est_counts[1]});

    r.table.header = {"outcome", "count", "frequency", "analytic"};
    for (std::size_t i = 0; i < protocol::kNumOutcomes; ++i) {
        const std::string name = protocol::outcome_name(static_cast<protocol::Outcome>(i));
        r.table.rows.push_back({name, std::to_string(counts[i]),
                                format_double(static_cast<double>(counts[i]) / config.trials),
                                lossless ? format_double(analytic.p[i]) : ""});
    }
    return r;
}

Rendered exec_message(const RunConfig& config) {
    const std::vector<int> bits = parse_bits(config.bits);
    Rng rng(config.params.seed);
    std::uint64_t retained = 0;
    std::uint64_t correct = 0;
    for (int t = 0; t < config.trials; ++t) {
        const protocol::MessageResult m =
            protocol::send_message_postselected(config.params, bits, rng);
        if (m.retained) {
            retained += 1;
            if (*m.all_correct) correct += 1;
        }
    }
    const bool lossless = config.params.inner_loss == 1.0;
    const double retention_sim = static_cast<double>(retained) / config.trials;

    Rendered r;
    r.doc["command"] = "message";
    r.doc["params"] = params_json(config);
    r.doc["bits"] = config.bits;
    r.doc["trials"] = config.trials;
    r.doc["retained_count"] = retained;
    r.doc["retention_sim"] = retention_sim;
    r.doc["retention_exact"] =
        lossless ? json(protocol::analytic_message_retention(config.params, bits))
                 : json(nullptr);
    r.doc["accuracy_sim"] = retained > 0
                                ? json(static_cast<double>(correct) / retained)
                                : json(nullptr);
    r.doc["accuracy_exact"] =
        lossless ? json(protocol::analytic_message_accuracy(config.params, bits))
                 : json(nullptr);
    r.doc["status"] = retained > 0 ? "ok" : "empty_postselection";

    r.table.header = {"metric", "value"};
    kv_row(r.table, "retained_count", std::to_string(retained));
    kv_row(r.table, "retention_sim", format_double(retention_sim));
    if (lossless) {
        kv_row(r.table, "retention_exact",
               format_double(protocol::analytic_message_retention(config.params, bits)));
    }
    if (retained > 0) {
        kv_row(r.table, "accuracy_sim",
               format_double(static_cast<double>(correct) / retained));
    }
    if (lossless) {
        kv_row(r.table, "accuracy_exact",
               format_double(protocol::analytic_message_accuracy(config.params, bits)));
    }
    return r;
}

struct PopescuAggregate {
    std::uint64_t retained = 0;
    bool retained_all_live_ones = true;
    protocol::JointCounts guessed_joint{};
    int live_count = 0;
};

PopescuAggregate run_popescu_trials(const RunConfig& config, const std::vector<int>& fixed_bits,
                                    Rng& rng) {
    PopescuAggregate agg;
    const int n = fixed_bits.empty() ? config.n_bits : static_cast<int>(fixed_bits.size());
    const double p = std::sin(config.params.theta_out) * std::sin(config.params.theta_out);
    agg.live_count = std::min(protocol::popescu_live_count(p, n), n);
    std::vector<int> bits = fixed_bits;
    for (int t = 0; t < config.trials; ++t) {
        if (fixed_bits.empty()) {
            bits.resize(n);
            for (int& b : bits) b = rng.next_double() < 0.5 ? 0 : 1;
        }
        const protocol::PopescuResult res = protocol::run_popescu_no_coin(
            config.params, bits, rng, config.random_positions);
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                agg.guessed_joint[x][y] += res.guessed_joint[x][y];
            }
        }
        if (res.message_retained) {
            agg.retained += 1;
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (res.live_mask[i] && bits[i] != 1) {
                    agg.retained_all_live_ones = false;
                }
            }
        }
    }
    return agg;
}

Rendered exec_popescu(const RunConfig& config) {
    const std::vector<int> fixed_bits = config.bits.empty() ? std::vector<int>{}
                                                            : parse_bits(config.bits);
    Rng rng(config.params.seed);
    const PopescuAggregate agg = run_popescu_trials(config, fixed_bits, rng);

    json mi = nullptr;
    std::string status = "ok";
    try {
        mi = protocol::mutual_information_bits(agg.guessed_joint);
    } catch (const EmptyAfterPostselection&) {
        status = "empty_postselection";
    }

    Rendered r;
    r.doc["command"] = "popescu";
    r.doc["params"] = params_json(config);
    if (!fixed_bits.empty()) {
        r.doc["bits"] = config.bits;
    }
    r.doc["n_bits"] = fixed_bits.empty() ? config.n_bits
                                         : static_cast<int>(fixed_bits.size());
    r.doc["trials"] = config.trials;
    r.doc["random_positions"] = config.random_positions;
    r.doc["live_count"] = agg.live_count;
    r.doc["retained_count"] = agg.retained;
    r.doc["retention_sim"] = static_cast<double>(agg.retained) / config.trials;
    r.doc["retained_all_live_ones"] = agg.retained_all_live_ones;
    r.doc["guessed_joint"] = joint_json(agg.guessed_joint);
    r.doc["guessed_mi_bits"] = mi;
    r.doc["status"] = status;

    r.table.header = {"metric", "value"};
    kv_row(r.table, "live_count", std::to_string(agg.live_count));
    kv_row(r.table, "retained_count", std::to_string(agg.retained));
    kv_row(r.table, "retention_sim",
           format_double(static_cast<double>(agg.retained) / config.trials));
    kv_row(r.table, "retained_all_live_ones", agg.retained_all_live_ones ? "true" : "false");
    if (!mi.is_null()) {
        kv_row(r.table, "guessed_mi_bits", format_double(mi.get<double>()));
    }
    return r;
}

Rendered exec_compare(const RunConfig& config) {
    Rng rng(config.params.seed);
    std::uint64_t toy_retained = 0;
    std::uint64_t toy_correct = 0;
    protocol::JointCounts toy_joint{};  // bits carried by the retry-until-success channel
    const std::array<protocol::RoundDistribution, 2> dists = {
        protocol::round_distribution(config.params, 0),
        protocol::round_distribution(config.params, 1)};
    PopescuAggregate pop;
    {
        const double p = std::sin(config.params.theta_out) * std::sin(config.params.theta_out);
        pop.live_count = std::min(protocol::popescu_live_count(p, config.n_bits),
                                  config.n_bits);
    }
    constexpr int kMaxRetries = 100000;
    std::vector<int> bits(config.n_bits);
    for (int t = 0; t < config.trials; ++t) {
        for (int& b : bits) b = rng.next_double() < 0.5 ? 0 : 1;
        const protocol::MessageResult m =
            protocol::send_message_postselected(config.params, bits, rng);
        if (m.retained) {
            toy_retained += 1;
            if (*m.all_correct) toy_correct += 1;
        }
        for (int b : bits) {
            const auto [x_est, rounds_used] = protocol::run_round_with_retries(
                dists[static_cast<std::size_t>(b)], rng, kMaxRetries);
            (void)rounds_used;
            toy_joint[b][x_est] += 1;
        }
        const protocol::PopescuResult res = protocol::run_popescu_no_coin(
            config.params, bits, rng, config.random_positions);
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                pop.guessed_joint[x][y] += res.guessed_joint[x][y];
            }
        }
        if (res.message_retained) {
            pop.retained += 1;
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (res.live_mask[i] && bits[i] != 1) pop.retained_all_live_ones = false;
            }
        }
    }

    const bool lossless = config.params.inner_loss == 1.0;
    json toy;
    toy["retention_sim"] = static_cast<double>(toy_retained) / config.trials;
    toy["retention_exact"] =
        lossless
            ? json(protocol::analytic_message_retention_uniform(config.params, config.n_bits))
            : json(nullptr);
    toy["accuracy_sim"] = toy_retained > 0
                              ? json(static_cast<double>(toy_correct) / toy_retained)
                              : json(nullptr);
    toy["accuracy_exact"] =
        lossless
            ? json(protocol::analytic_message_accuracy_uniform(config.params, config.n_bits))
            : json(nullptr);
    toy["mi_sim"] = protocol::mutual_information_bits(toy_joint);
    toy["mi_exact"] = lossless ? json(protocol::analytic_channel_mi(config.params))
                               : json(nullptr);

    json popj;
    popj["live_count"] = pop.live_count;
    popj["retention_sim"] = static_cast<double>(pop.retained) / config.trials;
    popj["retained_all_live_ones"] = pop.retained_all_live_ones;
    const std::uint64_t guessed_total = pop.guessed_joint[0][0] + pop.guessed_joint[0][1] +
                                        pop.guessed_joint[1][0] + pop.guessed_joint[1][1];
    popj["guessed_mi_bits"] = guessed_total > 0
                                  ? json(protocol::mutual_information_bits(pop.guessed_joint))
                                  : json(nullptr);

    Rendered r;
    r.doc["command"] = "compare";
    r.doc["params"] = params_json(config);
    r.doc["n_bits"] = config.n_bits;
    r.doc["trials"] = config.trials;
    r.doc["toy"] = toy;
    r.doc["popescu"] = popj;

    r.table.header = {"protocol", "metric", "value"};
    for (const auto& [key, value] : toy.items()) {
        r.table.rows.push_back(
            {"toy", key, value.is_null() ? "" : format_double(value.get<double>())});
    }
    for (const auto& [key, value] : popj.items()) {
        std::string text;
        if (value.is_boolean()) {
            text = value.get<bool>() ? "true" : "false";
        } else if (value.is_number_integer()) {
            text = std::to_string(value.get<std::int64_t>());
        } else if (!value.is_null()) {
            text = format_double(value.get<double>());
        }
        r.table.rows.push_back({"popescu", key, text});
    }
    return r;
}

Rendered exec_sweep(const RunConfig& config) {
    const std::vector<protocol::SweepRow> rows = protocol::sweep(
        config.theta_grid, config.n_grid, config.message_length, config.trials,
        config.params.seed);

    Rendered r;
    r.doc["command"] = "sweep";
    r.doc["message_length"] = config.message_length;
    r.doc["trials"] = config.trials;
    r.doc["seed"] = config.params.seed;
    json rows_json = json::array();
    for (const protocol::SweepRow& row : rows) {
        json j;
        j["theta_out"] = row.theta_out;
        j["n_inner"] = row.n_inner;
        j["retention_exact"] = row.retention_exact;
        j["accuracy_exact"] = row.accuracy_exact;
        j["mi_exact"] = row.mi_exact;
        j["expected_messages_until_one_retained"] = row.expected_messages_until_one_retained;
        j["retention_sim"] = row.retention_sim;
        j["accuracy_sim"] = row.accuracy_sim ? json(*row.accuracy_sim) : json(nullptr);
        j["mi_sim"] = row.mi_sim ? json(*row.mi_sim) : json(nullptr);
        rows_json.push_back(j);
    }
    r.doc["rows"] = rows_json;

    r.table.header = {"theta_out",
                      "n_inner",
                      "retention_exact",
                      "accuracy_exact",
                      "mi_exact",
                      "expected_messages_until_one_retained",
                      "retention_sim",
                      "accuracy_sim",
                      "mi_sim"};
    for (const protocol::SweepRow& row : rows) {
        r.table.rows.push_back(
            {format_double(row.theta_out), std::to_string(row.n_inner),
             format_double(row.retention_exact), format_double(row.accuracy_exact),
             format_double(row.mi_exact),
             format_double(row.expected_messages_until_one_retained),
             format_double(row.retention_sim),
             row.accuracy_sim ? format_double(*row.accuracy_sim) : "",
             row.mi_sim ? format_double(*row.mi_sim) : ""});
    }
    return r;
}

Rendered exec_weak_trace(const RunConfig& config) {
    const bool blocked = config.params.blocks(config.bit);
    const protocol::ToyCircuit toy = protocol::build_toy_circuit(config.params, blocked);
    const optics::ModeIndex target = toy.circuit.registry->index_of(config.postselect);
    const analysis::RegionSpec region = analysis::make_bob_region(toy, config.sinks_only);
    const analysis::WeakTraceReport report =
        analysis::weak_value_profile(toy.circuit, target, region);

    Rendered r;
    r.doc["command"] = "weak-trace";
    r.doc["params"] = params_json(config);
    r.doc["bit"] = config.bit;
    r.doc["blocked"] = blocked;
    r.doc["postselect"] = config.postselect;
    r.doc["region"] = region.name;
    r.doc["overlap"] = complex_json(report.overlap);
    r.doc["max_abs_weak_value_in_region"] = report.max_abs_weak_value_in_region;
    json entries = json::array();
    for (const analysis::WeakValueEntry& e : report.entries) {
        json je;
        je["timestep"] = e.timestep;
        je["mode"] = e.mode_name;
        je["forward_amp"] = complex_json(e.forward_amp);
        je["backward_amp"] = complex_json(e.backward_amp);
        je["weak_value"] = complex_json(e.weak_value);
        je["abs_weak_value"] = std::abs(e.weak_value);
        je["undefined"] = e.undefined;
        entries.push_back(je);
    }
    r.doc["entries"] = entries;

    r.table.header = {"timestep", "mode",    "forward_re", "forward_im", "backward_re",
                      "backward_im", "weak_re", "weak_im",    "abs_weak_value"};
    for (const analysis::WeakValueEntry& e : report.entries) {
        r.table.rows.push_back({std::to_string(e.timestep), e.mode_name,
                                format_double(e.forward_amp.real()),
                                format_double(e.forward_amp.imag()),
                                format_double(e.backward_amp.real()),
                                format_double(e.backward_amp.imag()),
                                format_double(e.weak_value.real()),
                                format_double(e.weak_value.imag()),
                                format_double(std::abs(e.weak_value))});
    }
    return r;
}

Rendered exec_histories(const RunConfig& config) {
    const bool blocked = config.params.blocks(config.bit);
    const protocol::ToyCircuit toy = protocol::build_toy_circuit(config.params, blocked);
    const optics::ModeIndex target = toy.circuit.registry->index_of(config.postselect);
    const analysis::HistoryFamily family = analysis::make_default_history_family(
        toy, static_cast<std::size_t>(config.max_slices));
    const analysis::DecoherenceMatrix matrix =
        analysis::decoherence_functional(toy.circuit, family, target);
    const analysis::ConsistencyReport report =
        analysis::consistency_report(matrix, config.eps);
    const std::vector<double> probs = matrix.history_probabilities();

    Rendered r;
    r.doc["command"] = "histories";
    r.doc["params"] = params_json(config);
    r.doc["bit"] = config.bit;
    r.doc["blocked"] = blocked;
    r.doc["postselect"] = config.postselect;
    r.doc["eps"] = config.eps;
    r.doc["slice_boundaries"] = matrix.slice_boundaries;
    r.doc["exhaustive"] = matrix.exhaustive;
    r.doc["n_histories"] = matrix.histories.size();
    r.doc["postselect_probability"] = matrix.postselect_probability;
    r.doc["trace"] = matrix.trace();
    r.doc["consistent"] = report.consistent;
    r.doc["max_offdiag"] = report.max_offdiag;
    r.doc["bob_history_probability"] = report.bob_history_probability;
    json hist = json::array();
    for (std::size_t i = 0; i < matrix.histories.size(); ++i) {
        json h;
        h["labels"] = matrix.histories[i];
        h["amplitude"] = complex_json(matrix.amplitudes[i]);
        h["probability"] = probs[i];
        hist.push_back(h);
    }
    r.doc["histories"] = hist;

    r.table.header = {"labels", "probability", "amp_re", "amp_im"};
    for (std::size_t i = 0; i < matrix.histories.size(); ++i) {
        r.table.rows.push_back({matrix.histories[i], format_double(probs[i]),
                                format_double(matrix.amplitudes[i].real()),
                                format_double(matrix.amplitudes[i].imag())});
    }
    return r;
}

/// Returns true when the file supplied a seed that was not overridden by a flag.
bool apply_config_file(const std::string& path, RunConfig& config,
                       const std::map<std::string, CLI::Option*>& opts,
                       std::string& convention, std::string& format_name) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw UsageError("config file must contain a JSON object");
    }
    const auto given = [&](const char* key) {
        auto it = opts.find(key);
        return it != opts.end() && it->second->count() > 0;
    };
    bool seed_applied = false;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!kConfigKeys.contains(key)) {
                throw UsageError("unknown config key '" + key + "'");
            }
            if (given(key.c_str())) continue;  // flags win
            if (key == "seed") seed_applied = true;
            if (key == "theta_out") config.params.theta_out = value.get<double>();
            else if (key == "n_inner") config.params.n_inner = value.get<int>();
            else if (key == "bit_convention") convention = value.get<std::string>();
            else if (key == "inner_loss") config.params.inner_loss = value.get<double>();
            else if (key == "seed") config.params.seed = value.get<std::uint64_t>();
            else if (key == "bit") config.bit = value.get<int>();
            else if (key == "bits") config.bits = value.get<std::string>();
            else if (key == "n_bits") config.n_bits = value.get<int>();
            else if (key == "trials") config.trials = value.get<int>();
            else if (key == "message_length") config.message_length = value.get<int>();
            else if (key == "postselect") config.postselect = value.get<std::string>();
            else if (key == "sinks_only") config.sinks_only = value.get<bool>();
            else if (key == "random_positions") config.random_positions = value.get<bool>();
            else if (key == "eps") config.eps = value.get<double>();
            else if (key == "max_slices") config.max_slices = value.get<int>();
            else if (key == "theta_grid") config.theta_grid = value.get<std::vector<double>>();
            else if (key == "n_grid") config.n_grid = value.get<std::vector<int>>();
            else if (key == "format") format_name = value.get<std::string>();
            else if (key == "out") config.out_path = value.get<std::string>();
        }
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "' has a wrongly typed value: " +
                         e.what());
    }
    return seed_applied;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig config;
    config.theta_grid = {M_PI / 4.0};
    config.n_grid = {25};
    std::string convention = "block-means-one";
    std::string format_name = "json";
    std::string config_path;

    CLI::App app{"exact simulator and path-criteria analyzer for the single-outer-cycle "
                 "counterfactual communication toy protocol",
                 "cfqsim"};
    app.require_subcommand(1);

    std::map<std::string, CLI::Option*> opts;
    opts["theta_out"] =
        app.add_option("--theta-out", config.params.theta_out,
                       "outer rotation angle in radians, strictly inside (0, pi/2)")
            ->capture_default_str();
    opts["n_inner"] = app.add_option("--n-inner", config.params.n_inner,
                                     "number of inner cycles N")
                          ->capture_default_str();
    opts["bit_convention"] =
        app.add_option("--bit-convention", convention,
                       "which bit value blocks the channel")
            ->check(CLI::IsMember({"block-means-one", "blockquote-literal"}))
            ->capture_default_str();
    opts["inner_loss"] = app.add_option("--inner-loss", config.params.inner_loss,
                                        "per-segment transmission in (0, 1]; 1 = lossless")
                             ->capture_default_str();
    opts["seed"] = app.add_option("--seed", config.params.seed,
                                  "64-bit RNG seed (CFQSIM_SEED overrides this default)");
    opts["bit"] = app.add_option("--bit", config.bit, "Bob's bit for single-round commands")
                      ->check(CLI::IsMember({0, 1}))
                      ->capture_default_str();
    opts["bits"] = app.add_option("--bits", config.bits, "explicit message as a 0/1 string");
    opts["n_bits"] = app.add_option("--n-bits", config.n_bits,
                                    "message length when bits are drawn uniformly")
                         ->capture_default_str();
    opts["trials"] = app.add_option("--trials", config.trials, "Monte Carlo repetitions")
                         ->capture_default_str();
    opts["message_length"] = app.add_option("--message-length", config.message_length,
                                            "bits per message in sweeps")
                                 ->capture_default_str();
    opts["postselect"] = app.add_option("--postselect", config.postselect,
                                        "detector to post-select on")
                             ->check(CLI::IsMember({"D0", "D1", "D3"}))
                             ->capture_default_str();
    opts["sinks_only"] = app.add_flag("--sinks-only", config.sinks_only,
                                      "restrict the Bob region to the blocker sinks");
    opts["random_positions"] =
        app.add_flag("--random-positions", config.random_positions,
                     "choose the no-coin live positions at random instead of first-k");
    opts["eps"] = app.add_option("--eps", config.eps, "consistency tolerance")
                      ->capture_default_str();
    opts["max_slices"] = app.add_option("--max-slices", config.max_slices,
                                        "cap on history slices (0 = one per cycle)")
                             ->capture_default_str();
    opts["theta_grid"] = app.add_option("--theta-grid", config.theta_grid,
                                        "comma-separated theta_out values for sweeps")
                             ->delimiter(',');
    opts["n_grid"] = app.add_option("--n-grid", config.n_grid,
                                    "comma-separated n_inner values for sweeps")
                         ->delimiter(',');
    opts["format"] = app.add_option("--format", format_name, "output format")
                         ->check(CLI::IsMember({"json", "csv"}))
                         ->capture_default_str();
    opts["out"] = app.add_option("--out", config.out_path,
                                 "write output to this file instead of stdout");
    app.add_option("--config", config_path, "JSON config file; flags override its keys");

    const std::map<std::string, Command> commands = {
        {"probs", Command::Probs},         {"simulate", Command::Simulate},
        {"message", Command::Message},     {"popescu", Command::Popescu},
        {"sweep", Command::Sweep},         {"weak-trace", Command::WeakTrace},
        {"histories", Command::Histories}, {"compare", Command::Compare}};
    const std::map<std::string, std::string> descriptions = {
        {"probs", "exact outcome distribution: circuit evolution vs closed form"},
        {"simulate", "Monte Carlo rounds against the exact distribution"},
        {"message", "post-selected fixed-bit message simulation"},
        {"popescu", "the no-coin simplification: live runs plus constant guesses"},
        {"sweep", "accuracy/retention tradeoff over a parameter grid"},
        {"weak-trace", "two-state-vector weak values over the Bob region"},
        {"histories", "decoherence functional over Alice/Bob history families"},
        {"compare", "toy protocol vs no-coin variant on the same messages"}};
    for (const auto& [name, cmd] : commands) {
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        sub->fallthrough();
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.get_name()) + ": " + e.what());
    }

    for (const auto& [name, cmd] : commands) {
        if (app.got_subcommand(name)) {
            config.command = cmd;
        }
    }

    bool seed_from_config = false;
    if (!config_path.empty()) {
        seed_from_config =
            apply_config_file(config_path, config, opts, convention, format_name);
    }
    // Seed precedence: --seed, then config file, then CFQSIM_SEED, then 0.
    if (opts.at("seed")->count() == 0 && !seed_from_config) {
        if (const char* env = std::getenv("CFQSIM_SEED")) {
            try {
                std::size_t pos = 0;
                config.params.seed = std::stoull(env, &pos);
                if (pos != std::string(env).size()) {
                    throw UsageError("CFQSIM_SEED must be an unsigned 64-bit integer");
                }
            } catch (const UsageError&) {
                throw;
            } catch (const std::exception&) {
                throw UsageError("CFQSIM_SEED must be an unsigned 64-bit integer");
            }
        }
    }

    config.params.bit_convention = convention == "block-means-one"
                                       ? protocol::BitConvention::BlockMeansOne
                                       : protocol::BitConvention::BlockquoteLiteral;
    config.format = format_name == "json" ? Format::Json : Format::Csv;

    try {
        config.params.validate();
    } catch (const InvalidParams& e) {
        throw UsageError(e.what());
    }
    if (config.trials < 1) {
        throw UsageError("--trials must be at least 1");
    }
    if (config.message_length < 1) {
        throw UsageError("--message-length must be at least 1");
    }
    if (config.n_bits < 1) {
        throw UsageError("--n-bits must be at least 1");
    }
    if (config.max_slices < 0) {
        throw UsageError("--max-slices must be non-negative");
    }
    if (config.eps < 0.0) {
        throw UsageError("--eps must be non-negative");
    }
    for (double theta : config.theta_grid) {
        if (!(theta > 0.0) || !(theta < M_PI / 2.0)) {
            throw UsageError("--theta-grid values must lie strictly inside (0, pi/2)");
        }
    }
    for (int n : config.n_grid) {
        if (n < 1) {
            throw UsageError("--n-grid values must be at least 1");
        }
    }
    if (config.command == Command::Message && config.bits.empty()) {
        throw UsageError("message needs --bits");
    }
    if (!config.bits.empty()) {
        parse_bits(config.bits);  // character check, result discarded
    }
    return config;
}

int execute(const RunConfig& config, std::ostream& out) {
    Rendered rendered;
    switch (config.command) {
        case Command::Probs: rendered = exec_probs(config); break;
        case Command::Simulate: rendered = exec_simulate(config); break;
        case Command::Message: rendered = exec_message(config); break;
        case Command::Popescu: rendered = exec_popescu(config); break;
        case Command::Sweep: rendered = exec_sweep(config); break;
        case Command::WeakTrace: rendered = exec_weak_trace(config); break;
        case Command::Histories: rendered = exec_histories(config); break;
        case Command::Compare: rendered = exec_compare(config); break;
    }
    const std::string payload = config.format == Format::Json
                                    ? to_json_text(rendered.doc)
                                    : to_csv(rendered.table);
    if (!config.out_path.empty()) {
        std::ofstream file(config.out_path, std::ios::binary);
        if (!file) {
            throw IoError("cannot open '" + config.out_path + "' for writing");
        }
        file << payload;
        file.flush();
        if (!file) {
            throw IoError("failed writing to '" + config.out_path + "'");
        }
    } else {
        out << payload;
    }
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    try {
        const RunConfig config = parse_config(args);
        return execute(config, out);
    } catch (const HelpRequested& help) {
        out << help.text;
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace cfqsim::cli
