#include "u1dec/qsim.hpp"

#include <cmath>

#include "u1dec/kernels.hpp"

namespace u1dec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_state(const QuantumState& state) {
    const double n2 = state.norm2();
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw numeric_error("quantum state has zero or non-finite norm");
}

}  // namespace

double QuantumState::norm2() const {
    return kernels::norm2(amps.data(), amps.size());
}

QuantumState init_state(int n_sites, const InitSpec& init) {
    if (n_sites < 2 || n_sites > kMaxStatevectorSites)
        throw std::invalid_argument("init_state: L out of supported range");
    validate_init(init, n_sites);
    QuantumState state;
    state.n_sites = n_sites;
    state.amps.assign(std::uint64_t{1} << n_sites, cplx{});
    switch (init.kind) {
        case InitKind::dicke: {
            const double amp = 1.0 / std::sqrt(binomial(n_sites, init.dicke_charge));
            for (std::uint64_t b = 0; b < state.amps.size(); ++b)
                if (charge_of(b) == init.dicke_charge) state.amps[b] = amp;
            break;
        }
        case InitKind::neel:
            state.amps[neel_index(n_sites)] = 1.0;
            break;
        case InitKind::neel_flip:
            state.amps[neel_flip_index(n_sites)] = 1.0;
            break;
        case InitKind::plus: {
            const double amp = std::pow(2.0, -0.5 * n_sites);
            for (auto& a : state.amps) a = amp;
            break;
        }
    }
    return state;
}

GateParams sample_gate_params(Rng& rng) {
    GateParams g;
    g.alpha = rng.uniform(0.0, kTwoPi);
    g.rho = rng.uniform(0.0, kTwoPi);
    g.psi = rng.uniform(0.0, kTwoPi);
    g.chi = rng.uniform(0.0, kTwoPi);
    g.xi = rng.uniform();
    return g;
}

void apply_gate(QuantumState& state, int left_site, const GateParams& g) {
    kernels::apply_u1_gate(state.amps.data(), state.n_sites, left_site, kernels::gate_block(g));
}

int measure_site(QuantumState& state, int site, Rng& rng) {
    check_state(state);
    const double w1 = kernels::bit_one_weight(state.amps.data(), state.n_sites, site);
    const int outcome = rng.uniform() < w1 ? 1 : 0;
    const double w = outcome ? w1 : 1.0 - w1;
    kernels::project_bit(state.amps.data(), state.n_sites, site, outcome, 1.0 / std::sqrt(w));
    return outcome;
}

int measure_global_charge(QuantumState& state, Rng& rng) {
    check_state(state);
    const auto weights = kernels::sector_norm2(state.amps.data(), state.n_sites);
    const double r = rng.uniform();
    double acc = 0.0;
    int charge = state.n_sites;  // fall through to the last sector on roundoff
    for (int q = 0; q <= state.n_sites; ++q) {
        acc += weights[q];
        if (r < acc) {
            charge = q;
            break;
        }
    }
    const double w = weights[charge];
    if (!(w > 0.0)) throw numeric_error("sampled a zero-weight charge sector");
    const double scale = 1.0 / std::sqrt(w);
    for (std::uint64_t b = 0; b < state.amps.size(); ++b) {
        if (charge_of(b) == charge)
            state.amps[b] *= scale;
        else
            state.amps[b] = cplx{};
    }
    return charge;
}

TrajectoryResult run_trajectory(int n_sites, int n_timesteps, double meas_prob,
                                const InitSpec& init, std::uint64_t record_seed,
                                bool keep_gates, const std::optional<GateParams>& forced_gate) {
    if (!(meas_prob >= 0.0 && meas_prob <= 1.0))
        throw std::invalid_argument("run_trajectory: p must lie in [0, 1]");
    CircuitLayout layout = build_layout(n_sites, n_timesteps);
    QuantumState state = init_state(n_sites, init);
    Rng rng(record_seed);

    TrajectoryResult out;
    out.circuit.layout = layout;
    out.circuit.master_seed = record_seed;
    out.circuit.gates.resize(layout.half_layers.size());

    MeasurementRecord& rec = out.record;
    rec.n_sites = n_sites;
    rec.n_timesteps = n_timesteps;
    rec.meas_prob = meas_prob;
    rec.init = init.kind;
    rec.record_seed = record_seed;

    for (int tau = 0; tau < layout.n_rounds(); ++tau) {
        const auto& pairs = layout.half_layers[tau];
        auto& gates = out.circuit.gates[tau];
        gates.reserve(pairs.size());
        for (const auto& [left, right] : pairs) {
            (void)right;
            GateParams g = sample_gate_params(rng);
            if (forced_gate) g = *forced_gate;
            gates.push_back(g);
            apply_gate(state, left, g);
        }
        for (int site = 0; site < n_sites; ++site) {
            if (rng.uniform() < meas_prob) {
                const int outcome = measure_site(state, site, rng);
                rec.events.push_back({tau, site, outcome});
            }
        }
    }

    if (init.kind == InitKind::plus)
        rec.true_label = measure_global_charge(state, rng);
    else
        rec.true_label = definite_charge_of(init, n_sites);

    out.final_state = std::move(state);
    if (keep_gates) rec.gates = out.circuit;
    return out;
}

}  // namespace u1dec
