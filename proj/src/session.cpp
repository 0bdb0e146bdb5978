#include "entb92/session.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace entb92 {

using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Normalization;

void SessionConfig::validate() const {
    if (n_rounds < 1) throw std::domain_error("n_rounds must be at least 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::domain_error("test_fraction must lie in (0, 1)");
    if (chunk_size < 1) throw std::domain_error("chunk_size must be at least 1");
    if (!std::isfinite(abort_threshold)) throw std::domain_error("abort_threshold must be finite");
    channel.validate();
}

nlohmann::json to_json(const SessionConfig& c) {
    return {{"theta_deg", c.angle.degrees()},
            {"theta_rad", c.angle.radians()},
            {"rounds", c.n_rounds},
            {"test_fraction", c.test_fraction},
            {"eta_a", c.channel.eta_a},
            {"eta_b", c.channel.eta_b},
            {"depol_p", c.channel.depol_p},
            {"attack", to_string(c.channel.attacker)},
            {"seed", c.seed},
            {"abort_threshold", c.abort_threshold},
            {"chunk_size", c.chunk_size}};
}

namespace {

// Cumulative distribution over the nine cells of one setting pair.
std::array<double, 9> cumulative_cells(const CorrelationTable& table, int i, int j) {
    std::array<double, 9> out{};
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            acc += table.probability(i, j, a, b);
            out[3 * a + b] = acc;
        }
    }
    return out;
}

int draw_index(const std::array<double, 9>& cumulative, double u) {
    // Scale by the total so round-off in the last cell never leaks.
    const double x = u * cumulative.back();
    for (int k = 0; k < 8; ++k) {
        if (x < cumulative[k]) return k;
    }
    return 8;
}

AliceOutcome alice_outcome_for(AliceBasis basis, int cell) {
    if (cell == kVacuum) return AliceOutcome::Vacuum;
    // Z targets |0_z>; X targets |1_x>.
    const bool target = cell == kTarget;
    if (basis == AliceBasis::Z) return target ? AliceOutcome::Zero : AliceOutcome::One;
    return target ? AliceOutcome::One : AliceOutcome::Zero;
}

BobOutcome bob_outcome_for(int cell) {
    switch (cell) {
        case kTarget: return BobOutcome::Conclusive;
        case kOrthogonal: return BobOutcome::Inconclusive;
        default: return BobOutcome::Vacuum;
    }
}

int alice_cell(const RoundRecord& r) {
    if (r.alice_outcome == AliceOutcome::Vacuum) return kVacuum;
    const AliceOutcome target = r.alice_basis == AliceBasis::Z ? AliceOutcome::Zero : AliceOutcome::One;
    return r.alice_outcome == target ? kTarget : kOrthogonal;
}

int bob_cell(const RoundRecord& r) {
    switch (r.bob_outcome) {
        case BobOutcome::Conclusive: return kTarget;
        case BobOutcome::Inconclusive: return kOrthogonal;
        default: return kVacuum;
    }
}

}  // namespace

RoundSampler::RoundSampler(const SessionConfig& config) : config_(config) {
    config_.validate();
    const ProtocolAngle& angle = config_.angle;
    const auto settings = states::protocol_settings(angle);
    const ChannelModel& channel = config_.channel;

    auto make_branch = [&](int eve, double cumulative, const channels::PipelineState& state) {
        const CorrelationTable table = bell::table_from_state(state, settings, channel);
        Branch b{eve, cumulative, {}};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) b.cells[CorrelationTable::pair_index(i, j)] = cumulative_cells(table, i, j);
        }
        return b;
    };

    if (channel.attacker == Attacker::None) {
        branches_.push_back(make_branch(0, 1.0, channels::analytic_pipeline_state(angle, channel)));
        return;
    }

    // Intercept and resend: Eve's outcome is sampled first, then the round is
    // measured on Alice's conditional state and the resent (or missing) photon.
    const DensityMatrix source = DensityMatrix::pure(states::entangled_state(angle));
    const qcore::Povm eve = channels::usd_povm(angle);
    double cumulative = 0.0;
    for (std::size_t e = 0; e < eve.size(); ++e) {
        const qcore::Operator lifted = qcore::tensor(qcore::Operator::identity(2), eve.element(e));
        const double weight = qcore::born_probability(source, lifted);
        if (weight <= 0.0) continue;
        const qcore::Operator root = std::sqrt(2.0) * eve.element(e);
        const std::array<qcore::Operator, 1> kraus{qcore::tensor(qcore::Operator::identity(2), root)};
        const DensityMatrix conditioned = qcore::apply_channel(source, kraus, Normalization::Subnormalized);
        const DensityMatrix alice(qcore::partial_trace(conditioned, qcore::Subsystem::A).entries() / weight);

        const auto outcome = channels::attack_outcome(static_cast<int>(e) + 1);
        channels::PipelineState branch{DensityMatrix(Matrix::Zero(4, 4), Normalization::Subnormalized),
                                       DensityMatrix(Matrix::Zero(2, 2), Normalization::Subnormalized)};
        if (outcome.resend == channels::ResendState::Vacuum) {
            branch.alice_given_vacuum = DensityMatrix(alice.entries(), Normalization::Subnormalized);
        } else {
            const int j = outcome.resend == channels::ResendState::Phi0 ? 0 : 1;
            const DensityMatrix resent = DensityMatrix::pure(states::signal_state(j, angle));
            branch.clicked = qcore::tensor(alice, resent);
            if (channel.depol_p > 0.0) branch.clicked = channels::depolarize(branch.clicked, channel.depol_p);
        }
        cumulative += weight;
        branches_.push_back(make_branch(outcome.povm_index, cumulative, branch));
    }
}

RoundRecord RoundSampler::sample(RoundStream& rng) const {
    RoundRecord r;
    r.alice_basis = rng.uniform() < config_.test_fraction ? AliceBasis::X : AliceBasis::Z;
    r.bob_basis = rng.uniform() < 0.5 ? 0 : 1;
    const double u_eve = rng.uniform();
    const double u_cell = rng.uniform();

    const Branch* branch = &branches_.back();
    if (branches_.size() > 1) {
        const double x = u_eve * branches_.back().cumulative_weight;
        for (const auto& b : branches_) {
            if (x < b.cumulative_weight) {
                branch = &b;
                break;
            }
        }
        r.eve_outcome = branch->eve_outcome;
    }

    const int i = r.alice_basis == AliceBasis::Z ? 0 : 1;
    const int cell = draw_index(branch->cells[CorrelationTable::pair_index(i, r.bob_basis)], u_cell);
    r.alice_outcome = alice_outcome_for(r.alice_basis, cell / 3);
    r.bob_outcome = bob_outcome_for(cell % 3);
    if (r.alice_basis == AliceBasis::Z && r.alice_outcome != AliceOutcome::Vacuum &&
        r.bob_outcome == BobOutcome::Conclusive) {
        // A conclusive result in B_k decodes Alice's bit as k xor 1.
        r.key = KeyBits{r.alice_outcome == AliceOutcome::Zero ? 0 : 1, r.bob_basis ^ 1};
    }
    return r;
}

RoundRecord sample_round(RoundStream& rng, const RoundSampler& sampler) { return sampler.sample(rng); }

SiftResult sift(std::span<const RoundRecord> records) {
    SiftResult out;
    for (const auto& r : records) {
        if (r.alice_outcome != AliceOutcome::Vacuum && r.bob_outcome != BobOutcome::Vacuum) {
            ++out.n_detected;
            if (r.alice_basis == AliceBasis::Z) ++out.n_key_detected;
        }
        if (!r.key) continue;
        out.alice_key.push_back(static_cast<std::uint8_t>(r.key->alice));
        out.bob_key.push_back(static_cast<std::uint8_t>(r.key->bob));
        ++out.n_con;
        if (r.key->alice != r.key->bob) ++out.n_err;
    }
    return out;
}

CorrelationTable estimate_table(std::span<const RoundRecord> records) {
    std::array<CountGrid, 4> counts{};
    for (const auto& r : records) {
        const int i = r.alice_basis == AliceBasis::Z ? 0 : 1;
        ++counts[CorrelationTable::pair_index(i, r.bob_basis)][alice_cell(r)][bob_cell(r)];
    }
    return CorrelationTable::from_counts(counts);
}

namespace {

struct ChunkTally {
    CorrelationTable table = CorrelationTable::empty_counts();
    std::uint64_t n_con = 0;
    std::uint64_t n_err = 0;
    std::uint64_t n_detected = 0;
    std::uint64_t n_key_detected = 0;
};

ChunkTally run_chunk(const RoundSampler& sampler, std::uint64_t begin, std::uint64_t end) {
    std::vector<RoundRecord> records;
    records.reserve(end - begin);
    for (std::uint64_t round = begin; round < end; ++round) {
        RoundStream rng(sampler.config().seed, round);
        records.push_back(sample_round(rng, sampler));
    }
    const SiftResult s = sift(records);
    return {estimate_table(records), s.n_con, s.n_err, s.n_detected, s.n_key_detected};
}

}  // namespace

SessionResult run_session(const SessionConfig& config, unsigned workers) {
    const RoundSampler sampler(config);
    const std::uint64_t n_chunks = (config.n_rounds + config.chunk_size - 1) / config.chunk_size;
    std::vector<ChunkTally> tallies(n_chunks);
    std::atomic<std::uint64_t> next{0};

    auto work = [&] {
        for (std::uint64_t c = next++; c < n_chunks; c = next++) {
            const std::uint64_t begin = c * config.chunk_size;
            tallies[c] = run_chunk(sampler, begin, std::min(config.n_rounds, begin + config.chunk_size));
        }
    };
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), n_chunks));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }

    SessionResult out;
    out.config = config;
    for (const auto& t : tallies) {
        out.table = out.table.merged(t.table);
        out.n_con += t.n_con;
        out.n_err += t.n_err;
        out.n_detected += t.n_detected;
        out.n_key_detected += t.n_key_detected;
    }

    bool all_pairs = true;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) all_pairs = all_pairs && out.table.total(i, j) > 0;
    }
    if (all_pairs) out.s_ch = bell::ch_value(out.table);
    if (out.n_con > 0) {
        const double q = static_cast<double>(out.n_err) / static_cast<double>(out.n_con);
        out.qber = q;
        out.qber_standard_error = std::sqrt(q * (1.0 - q) / static_cast<double>(out.n_con));
    }
    out.insufficient_statistics = !out.s_ch || !out.qber;

    if (!out.insufficient_statistics) {
        // Sampling noise can push the estimate past the quantum limit.
        const double s_max = (std::numbers::sqrt2 - 1.0) / 2.0;
        const double s = std::clamp(out.s_ch->value, -(1.0 + std::numbers::sqrt2) / 2.0, s_max);
        RateReport r;
        r.s_ch = out.s_ch->value;
        r.s_chsh = bell::chsh_from_ch(*out.s_ch).value;
        r.qber = *out.qber;
        r.gain = rates::gain_from_ch(s, r.qber);
        r.rate = rates::key_rate(static_cast<double>(out.n_con), r.gain);
        r.conclusive_fraction = static_cast<double>(out.n_con) / static_cast<double>(out.n_detected);
        r.normalized_rate = r.rate / static_cast<double>(out.n_detected);
        out.rate_report = r;
        out.normalized_rate_extrapolated =
            static_cast<double>(out.n_con) / static_cast<double>(out.n_key_detected) * r.gain;
    }
    out.aborted = out.insufficient_statistics || out.s_ch->value <= config.abort_threshold;
    return out;
}

nlohmann::json to_json(const SessionResult& r) {
    auto optional_number = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["config"] = to_json(r.config);
    j["table"] = to_json(r.table);
    j["counts"] = {{"rounds", r.config.n_rounds},
                   {"detected", r.n_detected},
                   {"key_detected", r.n_key_detected},
                   {"conclusive", r.n_con},
                   {"errors", r.n_err}};
    if (r.s_ch) {
        const BellValue chsh = bell::chsh_from_ch(*r.s_ch);
        j["s_ch"] = {{"value", r.s_ch->value}, {"standard_error", r.s_ch->standard_error}};
        j["s_chsh"] = {{"value", chsh.value}, {"standard_error", chsh.standard_error}};
    } else {
        j["s_ch"] = nullptr;
        j["s_chsh"] = nullptr;
    }
    j["qber"] = optional_number(r.qber);
    j["qber_standard_error"] = optional_number(r.qber_standard_error);
    j["rate_report"] = r.rate_report ? to_json(*r.rate_report) : nlohmann::json(nullptr);
    j["normalized_rate_extrapolated"] = optional_number(r.normalized_rate_extrapolated);
    j["insufficient_statistics"] = r.insufficient_statistics;
    j["aborted"] = r.aborted;
    return j;
}

}  // namespace entb92
