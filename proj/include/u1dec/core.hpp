#pragma once

// Shared domain types for the charge-learnability toolkit: brickwork layout,
// U(1) gate parametrization, measurement records, seed derivation.
//
// Bit convention (fixed project-wide): a basis state is an L-bit integer with
// site 0 as the MOST significant bit, so bit(site i) = (b >> (L-1-i)) & 1.
// The charge of a basis state is its popcount.

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace u1dec {

using cplx = std::complex<double>;

// Exit-code-relevant error classes (see cli): invalid_argument -> 2,
// missing_info/data/numeric -> 3, io -> 1.
struct missing_info_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding and RNG

// Splittable-counter seed derivation: an avalanche mix of (master, stream).
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_id);

// mt19937_64 with fixed draw formats. std::mt19937_64's output sequence is
// specified by the standard, and the conversions below avoid the
// implementation-defined std::uniform_real_distribution, so a seed produces
// the same draws on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n);

    // Box-Muller, two uniforms per draw (no cached spare)
    double normal();

  private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Circuit layout

struct CircuitLayout {
    int n_sites = 0;      // L
    int n_timesteps = 0;  // t_f; one timestep = two half-layers
    // half_layers[tau] lists gate site pairs (left, left+1); even tau couples
    // (2j, 2j+1), odd tau couples (2j+1, 2j+2), open boundaries.
    std::vector<std::vector<std::pair<int, int>>> half_layers;

    int n_rounds() const { return 2 * n_timesteps; }
    std::size_t n_gates() const;
};

CircuitLayout build_layout(int n_sites, int n_timesteps);

// ---------------------------------------------------------------------------
// Gates

struct GateParams {
    double alpha = 0.0;  // phases in [0, 2pi)
    double rho = 0.0;
    double psi = 0.0;
    double chi = 0.0;
    double xi = 0.0;  // hop parameter in [0, 1]
};

void validate_gate_params(const GateParams& g);

// 4x4 unitary on the two-site basis {|00>, |01>, |10>, |11>} (left site is
// the more significant bit), row-major. Block diagonal in total charge.
std::array<cplx, 16> build_unitary(const GateParams& g);

// h(U) = |<01|U|10>|^2; equals xi for this family, independent of the phases.
double hopping_probability(const GateParams& g);

struct CircuitRealization {
    CircuitLayout layout;
    // gates[tau][k] belongs to layout.half_layers[tau][k]
    std::vector<std::vector<GateParams>> gates;
    std::uint64_t master_seed = 0;

    const GateParams& at(int half_layer, std::size_t pair_index) const {
        return gates.at(half_layer).at(pair_index);
    }
};

// ---------------------------------------------------------------------------
// Initial states

enum class InitKind { dicke, neel, neel_flip, plus };

struct InitSpec {
    InitKind kind = InitKind::dicke;
    int dicke_charge = 0;  // meaningful for kind == dicke only

    static InitSpec dicke(int q) { return {InitKind::dicke, q}; }
    static InitSpec neel() { return {InitKind::neel, 0}; }
    static InitSpec neel_flip() { return {InitKind::neel_flip, 0}; }
    static InitSpec plus() { return {InitKind::plus, 0}; }
};

std::string init_kind_name(InitKind k);
InitKind init_kind_from_name(const std::string& s);

// Charge of the initial state; for plus (superposition of all charges) there
// is none and the call is invalid.
int definite_charge_of(const InitSpec& init, int n_sites);

// Basis index of the Neel string 1010... and of its charge-lowered variant
// (first site flipped 1 -> 0, charge L/2 - 1).
std::uint64_t neel_index(int n_sites);
std::uint64_t neel_flip_index(int n_sites);

void validate_init(const InitSpec& init, int n_sites);

// ---------------------------------------------------------------------------
// Measurement records

struct MeasurementEvent {
    int half_layer = 0;  // measurement round, immediately after gates of this half-layer
    int site = 0;
    int outcome = 0;  // q in {0, 1}
};

inline bool operator==(const MeasurementEvent& a, const MeasurementEvent& b) {
    return a.half_layer == b.half_layer && a.site == b.site && a.outcome == b.outcome;
}

struct MeasurementRecord {
    int n_sites = 0;
    int n_timesteps = 0;
    double meas_prob = 0.0;  // p used to generate the record
    InitKind init = InitKind::dicke;
    std::optional<int> true_label;  // charge Q*, when known
    std::uint64_t record_seed = 0;
    std::vector<MeasurementEvent> events;  // lexicographic in (half_layer, site)
    std::optional<CircuitRealization> gates;  // present iff gate knowledge is granted

    CircuitLayout layout() const { return build_layout(n_sites, n_timesteps); }
};

// Throws data_error on out-of-range events, bad ordering or duplicates.
void validate_record(const MeasurementRecord& rec);

// ---------------------------------------------------------------------------
// Experiment configuration (batch generation)

struct ExperimentConfig {
    int n_sites = 0;
    int n_timesteps = 0;
    double meas_prob = 0.0;
    int n_per_class = 0;
    std::vector<int> labels;  // charges; for dicke tasks, one class per label
    InitKind init = InitKind::dicke;
    std::uint64_t master_seed = 0;
    bool with_gates = false;
};

void validate_config(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Small numeric helpers

inline int charge_of(std::uint64_t basis_index) {
    return std::popcount(basis_index);
}

inline int bit_of_site(std::uint64_t basis_index, int n_sites, int site) {
    return static_cast<int>((basis_index >> (n_sites - 1 - site)) & 1u);
}

// C(n, k) exactly (n <= 26 keeps it well inside double precision)
double binomial(int n, int k);

double log_binomial(int n, int k);

}  // namespace u1dec
