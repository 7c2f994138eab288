#include "u1dec/core.hpp"

#include <algorithm>
#include <cmath>

namespace u1dec {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
    // golden-gamma counter step, then avalanche
    return mix64(master_seed + (stream_id + 1) * 0x9E3779B97F4A7C15ull);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // rejection sampling to kill modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::size_t CircuitLayout::n_gates() const {
    std::size_t total = 0;
    for (const auto& hl : half_layers) total += hl.size();
    return total;
}

CircuitLayout build_layout(int n_sites, int n_timesteps) {
    if (n_sites < 2) throw std::invalid_argument("build_layout: n_sites must be >= 2");
    if (n_timesteps < 1) throw std::invalid_argument("build_layout: n_timesteps must be >= 1");
    CircuitLayout layout;
    layout.n_sites = n_sites;
    layout.n_timesteps = n_timesteps;
    layout.half_layers.resize(2 * static_cast<std::size_t>(n_timesteps));
    for (int tau = 0; tau < 2 * n_timesteps; ++tau) {
        auto& pairs = layout.half_layers[tau];
        for (int left = (tau % 2 == 0) ? 0 : 1; left + 1 < n_sites; left += 2) {
            pairs.emplace_back(left, left + 1);
        }
    }
    return layout;
}

void validate_gate_params(const GateParams& g) {
    auto phase_ok = [](double v) { return v >= 0.0 && v < kTwoPi; };
    if (!phase_ok(g.alpha) || !phase_ok(g.rho) || !phase_ok(g.psi) || !phase_ok(g.chi))
        throw std::invalid_argument("gate phases must lie in [0, 2pi)");
    if (!(g.xi >= 0.0 && g.xi <= 1.0))
        throw std::invalid_argument("gate xi must lie in [0, 1]");
}

std::array<cplx, 16> build_unitary(const GateParams& g) {
    validate_gate_params(g);
    const double s = std::sqrt(g.xi);
    const double c = std::sqrt(1.0 - g.xi);
    std::array<cplx, 16> u{};  // zero-initialized: off-block entries stay exactly 0
    u[0 * 4 + 0] = 1.0;
    u[1 * 4 + 1] = std::polar(c, g.alpha + g.psi);
    u[1 * 4 + 2] = std::polar(s, g.alpha + g.chi);
    u[2 * 4 + 1] = -std::polar(s, g.alpha - g.chi);
    u[2 * 4 + 2] = std::polar(c, g.alpha - g.psi);
    u[3 * 4 + 3] = std::polar(1.0, g.rho);
    return u;
}

double hopping_probability(const GateParams& g) {
    validate_gate_params(g);
    return g.xi;
}

std::string init_kind_name(InitKind k) {
    switch (k) {
        case InitKind::dicke: return "dicke";
        case InitKind::neel: return "neel";
        case InitKind::neel_flip: return "neel_flip";
        case InitKind::plus: return "plus";
    }
    throw std::invalid_argument("unknown init kind");
}

InitKind init_kind_from_name(const std::string& s) {
    if (s == "dicke") return InitKind::dicke;
    if (s == "neel") return InitKind::neel;
    if (s == "neel_flip") return InitKind::neel_flip;
    if (s == "plus") return InitKind::plus;
    throw std::invalid_argument("unknown init kind: " + s);
}

int definite_charge_of(const InitSpec& init, int n_sites) {
    switch (init.kind) {
        case InitKind::dicke: return init.dicke_charge;
        case InitKind::neel: return n_sites / 2;
        case InitKind::neel_flip: return n_sites / 2 - 1;
        case InitKind::plus:
            throw std::invalid_argument("plus initial state has no definite charge");
    }
    throw std::invalid_argument("unknown init kind");
}

std::uint64_t neel_index(int n_sites) {
    std::uint64_t b = 0;
    for (int site = 0; site < n_sites; site += 2) b |= 1ull << (n_sites - 1 - site);
    return b;
}

std::uint64_t neel_flip_index(int n_sites) {
    // site 0 carries a 1 in the Neel string; flipping it lowers the charge
    return neel_index(n_sites) ^ (1ull << (n_sites - 1));
}

void validate_init(const InitSpec& init, int n_sites) {
    switch (init.kind) {
        case InitKind::dicke:
            if (init.dicke_charge < 0 || init.dicke_charge > n_sites)
                throw std::invalid_argument("dicke charge out of [0, L]");
            break;
        case InitKind::neel:
        case InitKind::neel_flip:
            if (n_sites % 2 != 0)
                throw std::invalid_argument("neel initial states require even L");
            break;
        case InitKind::plus:
            break;
    }
}

void validate_record(const MeasurementRecord& rec) {
    if (rec.n_sites < 2 || rec.n_timesteps < 1)
        throw data_error("record has invalid dimensions");
    const int rounds = 2 * rec.n_timesteps;
    const MeasurementEvent* prev = nullptr;
    for (const auto& ev : rec.events) {
        if (ev.half_layer < 0 || ev.half_layer >= rounds)
            throw data_error("event round out of range");
        if (ev.site < 0 || ev.site >= rec.n_sites)
            throw data_error("event site out of range");
        if (ev.outcome != 0 && ev.outcome != 1)
            throw data_error("event outcome must be a bit");
        if (prev) {
            const bool ordered = prev->half_layer < ev.half_layer ||
                                 (prev->half_layer == ev.half_layer && prev->site < ev.site);
            if (!ordered) throw data_error("events not in canonical (round, site) order");
        }
        prev = &ev;
    }
    if (rec.true_label && (*rec.true_label < 0 || *rec.true_label > rec.n_sites))
        throw data_error("true label out of [0, L]");
    if (rec.gates) {
        const auto& cr = *rec.gates;
        if (cr.layout.n_sites != rec.n_sites || cr.layout.n_timesteps != rec.n_timesteps)
            throw data_error("embedded gates disagree with record dimensions");
        if (cr.gates.size() != cr.layout.half_layers.size())
            throw data_error("gate table does not cover every half-layer");
        for (std::size_t tau = 0; tau < cr.gates.size(); ++tau)
            if (cr.gates[tau].size() != cr.layout.half_layers[tau].size())
                throw data_error("gate table does not match layout placements");
    }
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_sites < 2) throw std::invalid_argument("config: L must be >= 2");
    if (cfg.n_timesteps < 1) throw std::invalid_argument("config: tf must be >= 1");
    if (!(cfg.meas_prob >= 0.0 && cfg.meas_prob <= 1.0))
        throw std::invalid_argument("config: p must lie in [0, 1]");
    if (cfg.n_per_class < 0) throw std::invalid_argument("config: n must be >= 0");
    std::vector<int> sorted = cfg.labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("config: labels must be distinct");
    for (int q : sorted)
        if (q < 0 || q > cfg.n_sites)
            throw std::invalid_argument("config: label out of [0, L]");
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

double log_binomial(int n, int k) {
    return std::log(binomial(n, k));
}

}  // namespace u1dec
