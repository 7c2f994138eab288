#include "u1dec/sep.hpp"

#include <cmath>
#include <limits>

#include "u1dec/kernels.hpp"
#include "u1dec/qsim.hpp"

namespace u1dec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dense_size(int n_sites) {
    if (n_sites < 2) throw std::invalid_argument("dense backend: L must be >= 2");
    if (n_sites > kMaxDenseSites)
        throw data_error("dense backend limited to L <= 24");
}

// events grouped per measurement round
std::vector<std::vector<MeasurementEvent>> events_by_round(const MeasurementRecord& rec) {
    std::vector<std::vector<MeasurementEvent>> rounds(2 * rec.n_timesteps);
    for (const auto& ev : rec.events) rounds.at(ev.half_layer).push_back(ev);
    return rounds;
}

// per-round projector masks: sites measured 1 / measured 0
struct RoundMasks {
    std::uint64_t ones = 0;
    std::uint64_t zeros = 0;
    bool any = false;
};

std::vector<RoundMasks> masks_by_round(const MeasurementRecord& rec) {
    std::vector<RoundMasks> rounds(2 * rec.n_timesteps);
    for (const auto& ev : rec.events) {
        auto& m = rounds.at(ev.half_layer);
        const std::uint64_t bit = std::uint64_t{1} << (rec.n_sites - 1 - ev.site);
        (ev.outcome ? m.ones : m.zeros) |= bit;
        m.any = true;
    }
    return rounds;
}

std::uint64_t sample_basis_string(int n_sites, const InitSpec& init, Rng& rng) {
    switch (init.kind) {
        case InitKind::neel:
            return neel_index(n_sites);
        case InitKind::neel_flip:
            return neel_flip_index(n_sites);
        case InitKind::plus:
            return rng.next_u64() & ((std::uint64_t{1} << n_sites) - 1);
        case InitKind::dicke: {
            // rejection sampling; acceptance C(L,Q)/2^L is fine at desk sizes
            const std::uint64_t mask = (std::uint64_t{1} << n_sites) - 1;
            for (;;) {
                const std::uint64_t b = rng.next_u64() & mask;
                if (charge_of(b) == init.dicke_charge) return b;
            }
        }
    }
    throw std::invalid_argument("unknown init kind");
}

}  // namespace

std::array<double, 16> transfer_matrix(double hop) {
    if (!(hop >= 0.0 && hop <= 1.0))
        throw std::invalid_argument("transfer_matrix: hop must lie in [0, 1]");
    const double stay = 1.0 - hop;
    return {1, 0,    0,    0,
            0, stay, hop,  0,
            0, hop,  stay, 0,
            0, 0,    0,    1};
}

double ProbabilityState::mass() const {
    return kernels::sum(weights.data(), weights.size());
}

ProbabilityState initial_classical_state(int n_sites, const InitSpec& init) {
    check_dense_size(n_sites);
    validate_init(init, n_sites);
    ProbabilityState st;
    st.n_sites = n_sites;
    st.weights.assign(std::uint64_t{1} << n_sites, 0.0);
    switch (init.kind) {
        case InitKind::dicke: {
            const double w = 1.0 / binomial(n_sites, init.dicke_charge);
            for (std::uint64_t b = 0; b < st.weights.size(); ++b)
                if (charge_of(b) == init.dicke_charge) st.weights[b] = w;
            break;
        }
        case InitKind::neel:
            st.weights[neel_index(n_sites)] = 1.0;
            break;
        case InitKind::neel_flip:
            st.weights[neel_flip_index(n_sites)] = 1.0;
            break;
        case InitKind::plus: {
            const double w = std::pow(2.0, -n_sites);
            for (auto& x : st.weights) x = w;
            break;
        }
    }
    return st;
}

BiasSchedule BiasSchedule::uniform(const CircuitLayout& layout, double hop) {
    BiasSchedule sched;
    sched.hops.reserve(layout.half_layers.size());
    for (const auto& hl : layout.half_layers) sched.hops.emplace_back(hl.size(), hop);
    return sched;
}

void BiasSchedule::check_alignment(const CircuitLayout& layout) const {
    if (hops.size() != layout.half_layers.size())
        throw std::invalid_argument("bias schedule does not cover every half-layer");
    for (std::size_t tau = 0; tau < hops.size(); ++tau)
        if (hops[tau].size() != layout.half_layers[tau].size())
            throw std::invalid_argument("bias schedule does not match layout placements");
}

double evolve_dense_likelihood(const MeasurementRecord& rec, const InitSpec& label_state,
                               const BiasSchedule& bias) {
    validate_record(rec);
    check_dense_size(rec.n_sites);
    const CircuitLayout layout = rec.layout();
    bias.check_alignment(layout);

    ProbabilityState st = initial_classical_state(rec.n_sites, label_state);
    double* w = st.weights.data();
    const auto rounds = masks_by_round(rec);
    double running = 1.0;  // current total mass; transfers preserve it exactly
    for (int tau = 0; tau < layout.n_rounds(); ++tau) {
        const auto& pairs = layout.half_layers[tau];
        for (std::size_t k = 0; k < pairs.size(); ++k)
            kernels::apply_sep_hop(w, rec.n_sites, pairs[k].first, bias.hops[tau][k]);
        if (!rounds[tau].any) continue;
        running = kernels::project_round_and_sum(w, rec.n_sites, rounds[tau].ones,
                                                 rounds[tau].zeros);
        if (running <= 0.0) return kNegInf;
        if (running < 1e-120) {  // rescale only near underflow
            st.log_scale += std::log(running);
            kernels::scale(w, st.weights.size(), 1.0 / running);
            running = 1.0;
        }
    }
    return st.log_scale + std::log(running);
}

DenseCovector evolve_dense_covector(const MeasurementRecord& rec, const BiasSchedule& bias) {
    validate_record(rec);
    check_dense_size(rec.n_sites);
    const CircuitLayout layout = rec.layout();
    bias.check_alignment(layout);

    DenseCovector cov;
    cov.n_sites = rec.n_sites;
    cov.weights.assign(std::uint64_t{1} << rec.n_sites, 1.0);
    double* w = cov.weights.data();
    const auto rounds = masks_by_round(rec);
    for (int tau = layout.n_rounds() - 1; tau >= 0; --tau) {
        // forward order within a round is gates then projectors, so the
        // reverse pass applies projectors first
        if (rounds[tau].any) {
            const double s = kernels::project_round_and_sum(w, rec.n_sites, rounds[tau].ones,
                                                            rounds[tau].zeros);
            if (s <= 0.0) {
                cov.log_scale = kNegInf;
                return cov;
            }
            const double mean = s / static_cast<double>(cov.weights.size());
            if (mean < 1e-120) {  // keep entries O(1); rescale only near underflow
                cov.log_scale += std::log(mean);
                kernels::scale(w, cov.weights.size(), 1.0 / mean);
            }
        }
        const auto& pairs = layout.half_layers[tau];
        for (std::size_t k = pairs.size(); k-- > 0;)
            kernels::apply_sep_hop(w, rec.n_sites, pairs[k].first, bias.hops[tau][k]);
    }
    return cov;
}

double covector_loglik(const DenseCovector& cov, const InitSpec& label_state) {
    if (cov.log_scale == kNegInf) return kNegInf;
    validate_init(label_state, cov.n_sites);
    double dot = 0.0;
    switch (label_state.kind) {
        case InitKind::dicke: {
            const auto sector = kernels::sector_sums(cov.weights.data(), cov.n_sites);
            dot = sector[label_state.dicke_charge] / binomial(cov.n_sites, label_state.dicke_charge);
            break;
        }
        case InitKind::neel:
            dot = cov.weights[neel_index(cov.n_sites)];
            break;
        case InitKind::neel_flip:
            dot = cov.weights[neel_flip_index(cov.n_sites)];
            break;
        case InitKind::plus:
            dot = kernels::sum(cov.weights.data(), cov.weights.size()) /
                  std::pow(2.0, cov.n_sites);
            break;
    }
    if (dot <= 0.0) return kNegInf;
    return cov.log_scale + std::log(dot);
}

MeasurementRecord sample_record_from_model(int n_sites, int n_timesteps, double meas_prob,
                                           const InitSpec& init, const BiasSchedule& bias,
                                           Rng& rng, ChargeTrajectory* trajectory_out,
                                           const std::vector<std::pair<int, int>>* forced_placements) {
    check_dense_size(n_sites);
    validate_init(init, n_sites);
    if (!(meas_prob >= 0.0 && meas_prob <= 1.0))
        throw std::invalid_argument("sample_record_from_model: p must lie in [0, 1]");
    const CircuitLayout layout = build_layout(n_sites, n_timesteps);
    bias.check_alignment(layout);

    // forced placements, grouped per round
    std::vector<std::vector<int>> forced(layout.n_rounds());
    if (forced_placements) {
        for (const auto& [tau, site] : *forced_placements) {
            if (tau < 0 || tau >= layout.n_rounds() || site < 0 || site >= n_sites)
                throw std::invalid_argument("forced placement out of range");
            forced[tau].push_back(site);
        }
    }
    auto measure_here = [&](int tau, int site) {
        if (forced_placements) {
            const auto& f = forced[tau];
            return std::find(f.begin(), f.end(), site) != f.end();
        }
        return rng.uniform() < meas_prob;
    };

    MeasurementRecord rec;
    rec.n_sites = n_sites;
    rec.n_timesteps = n_timesteps;
    rec.meas_prob = meas_prob;
    rec.init = init.kind;
    rec.record_seed = 0;

    if (trajectory_out) {
        // world-line sampler: exchange differing bits with the bond's hop probability
        std::uint64_t config = sample_basis_string(n_sites, init, rng);
        trajectory_out->n_sites = n_sites;
        trajectory_out->n_slices = layout.n_rounds() + 1;
        trajectory_out->values.clear();
        trajectory_out->values.reserve(static_cast<std::size_t>(trajectory_out->n_slices) * n_sites);
        auto push_slice = [&] {
            for (int s = 0; s < n_sites; ++s)
                trajectory_out->values.push_back(static_cast<std::uint8_t>(bit_of_site(config, n_sites, s)));
        };
        push_slice();
        for (int tau = 0; tau < layout.n_rounds(); ++tau) {
            const auto& pairs = layout.half_layers[tau];
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const auto [left, right] = pairs[k];
                const int bl = bit_of_site(config, n_sites, left);
                const int br = bit_of_site(config, n_sites, right);
                if (bl != br && rng.uniform() < bias.hops[tau][k]) {
                    config ^= (std::uint64_t{1} << (n_sites - 1 - left)) |
                              (std::uint64_t{1} << (n_sites - 1 - right));
                }
            }
            push_slice();
            for (int site = 0; site < n_sites; ++site)
                if (measure_here(tau, site))
                    rec.events.push_back({tau, site, bit_of_site(config, n_sites, site)});
        }
        rec.true_label = init.kind == InitKind::plus ? charge_of(config)
                                                     : definite_charge_of(init, n_sites);
        return rec;
    }

    ProbabilityState st = initial_classical_state(n_sites, init);
    double* w = st.weights.data();
    double total = 1.0;
    for (int tau = 0; tau < layout.n_rounds(); ++tau) {
        const auto& pairs = layout.half_layers[tau];
        for (std::size_t k = 0; k < pairs.size(); ++k)
            kernels::apply_sep_hop(w, n_sites, pairs[k].first, bias.hops[tau][k]);
        bool measured_any = false;
        for (int site = 0; site < n_sites; ++site) {
            if (!measure_here(tau, site)) continue;
            measured_any = true;
            const double m1 = kernels::bit_one_mass(w, n_sites, site);
            double p1 = m1 / total;
            if (p1 < -1e-9 || p1 > 1.0 + 1e-9)
                throw numeric_error("measurement marginal outside [0, 1]");
            p1 = std::min(1.0, std::max(0.0, p1));
            const int outcome = rng.uniform() < p1 ? 1 : 0;
            kernels::project_bit(w, n_sites, site, outcome, 1.0);
            total = outcome ? m1 : total - m1;
            rec.events.push_back({tau, site, outcome});
        }
        if (measured_any) {
            st.log_scale += std::log(total);
            kernels::scale(w, st.weights.size(), 1.0 / total);
            total = 1.0;
        }
    }
    if (init.kind == InitKind::plus) {
        const auto sector = kernels::sector_sums(w, n_sites);
        const double r = rng.uniform() * total;
        double acc = 0.0;
        int charge = n_sites;
        for (int q = 0; q <= n_sites; ++q) {
            acc += sector[q];
            if (r < acc) {
                charge = q;
                break;
            }
        }
        rec.true_label = charge;
    } else {
        rec.true_label = definite_charge_of(init, n_sites);
    }
    return rec;
}

DoubledChannelReport verify_doubled_channel(long n_samples, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("verify_doubled_channel: n_samples >= 1");
    DoubledChannelReport rep;
    rep.n_samples = n_samples;
    rep.target = transfer_matrix(0.5);
    std::array<double, 16> acc{};
    for (long s = 0; s < n_samples; ++s) {
        const GateParams g = sample_gate_params(rng);
        const auto u = build_unitary(g);
        for (int i = 0; i < 16; ++i) acc[i] += std::norm(u[i]);
    }
    for (int i = 0; i < 16; ++i) rep.estimate[i] = acc[i] / static_cast<double>(n_samples);

    auto dev = [&](int j, int k) { return std::abs(rep.estimate[j * 4 + k] - rep.target[j * 4 + k]); };
    rep.dev_charge0 = dev(0, 0);
    rep.dev_charge2 = dev(3, 3);
    for (int j = 1; j <= 2; ++j)
        for (int k = 1; k <= 2; ++k) rep.dev_charge1 = std::max(rep.dev_charge1, dev(j, k));
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) rep.max_abs_dev = std::max(rep.max_abs_dev, dev(j, k));
    return rep;
}

}  // namespace u1dec
