#include "u1dec/kernels.hpp"

#include <cmath>

namespace u1dec::kernels {

namespace {

constexpr std::size_t kChunk = 4096;           // reduction chunk (fixed, schedule-independent)
constexpr std::size_t kParMin = std::size_t{1} << 14;  // below this, threading is not worth it

template <typename T>
double chunked_reduce(const T* data, std::size_t n, double (*partial)(const T*, std::size_t)) {
    if (n <= kChunk) return partial(data, n);
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> parts(n_chunks);
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        parts[c] = partial(data + begin, std::min(kChunk, n - begin));
    }
    double total = 0.0;
    for (double v : parts) total += v;  // fixed combine order
    return total;
}

double norm2_part(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i]);
    return s;
}

double sum_part(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

inline void check_bond(int n_sites, int left_site) {
    if (left_site < 0 || left_site + 1 >= n_sites)
        throw std::invalid_argument("gate bond out of range");
}

inline void check_site(int n_sites, int site) {
    if (site < 0 || site >= n_sites) throw std::invalid_argument("site out of range");
}

}  // namespace

TwoSiteU1Gate gate_block(const GateParams& g) {
    validate_gate_params(g);
    const double s = std::sqrt(g.xi);
    const double c = std::sqrt(1.0 - g.xi);
    TwoSiteU1Gate b;
    b.u01_01 = std::polar(c, g.alpha + g.psi);
    b.u01_10 = std::polar(s, g.alpha + g.chi);
    b.u10_01 = -std::polar(s, g.alpha - g.chi);
    b.u10_10 = std::polar(c, g.alpha - g.psi);
    b.u11_11 = std::polar(1.0, g.rho);
    return b;
}

namespace {

// The two gate bits are adjacent, so the four two-site configurations form
// contiguous runs of length 2^lo repeating with period 2^(lo+2). Updating
// run against run keeps the access sequential; the complex products are
// written out on the real/imaginary pairs (std::complex guarantees the
// layout) so the loop vectorizes instead of calling __muldc3.
inline void u1_gate_runs(cplx* a01c, cplx* a10c, cplx* a11c, std::uint64_t run,
                         const TwoSiteU1Gate& g) {
    double* __restrict__ a01 = reinterpret_cast<double*>(a01c);
    double* __restrict__ a10 = reinterpret_cast<double*>(a10c);
    double* __restrict__ a11 = reinterpret_cast<double*>(a11c);
    const double b00r = g.u01_01.real(), b00i = g.u01_01.imag();
    const double b01r = g.u01_10.real(), b01i = g.u01_10.imag();
    const double b10r = g.u10_01.real(), b10i = g.u10_01.imag();
    const double b11r = g.u10_10.real(), b11i = g.u10_10.imag();
    const double phr = g.u11_11.real(), phi = g.u11_11.imag();
    for (std::uint64_t i = 0; i < 2 * run; i += 2) {
        const double xr = a01[i], xi = a01[i + 1];
        const double yr = a10[i], yi = a10[i + 1];
        a01[i] = b00r * xr - b00i * xi + b01r * yr - b01i * yi;
        a01[i + 1] = b00r * xi + b00i * xr + b01r * yi + b01i * yr;
        a10[i] = b10r * xr - b10i * xi + b11r * yr - b11i * yi;
        a10[i + 1] = b10r * xi + b10i * xr + b11r * yi + b11i * yr;
        const double zr = a11[i], zi = a11[i + 1];
        a11[i] = phr * zr - phi * zi;
        a11[i + 1] = phr * zi + phi * zr;
    }
}

}  // namespace

void apply_u1_gate_serial(cplx* amps, int n_sites, int left_site, const TwoSiteU1Gate& g) {
    check_bond(n_sites, left_site);
    const int lo = n_sites - 2 - left_site;
    const std::uint64_t run = std::uint64_t{1} << lo;
    const std::uint64_t blocks = std::uint64_t{1} << (n_sites - 2 - lo);
    for (std::uint64_t blk = 0; blk < blocks; ++blk) {
        cplx* base = amps + blk * (run << 2);
        u1_gate_runs(base + run, base + 2 * run, base + 3 * run, run, g);
    }
}

void apply_u1_gate(cplx* amps, int n_sites, int left_site, const TwoSiteU1Gate& g) {
    check_bond(n_sites, left_site);
    const int lo = n_sites - 2 - left_site;
    const std::uint64_t run = std::uint64_t{1} << lo;
    const std::int64_t blocks = std::int64_t{1} << (n_sites - 2 - lo);
#pragma omp parallel for schedule(static) if ((std::uint64_t{1} << n_sites) >= kParMin)
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
        cplx* base = amps + static_cast<std::uint64_t>(blk) * (run << 2);
        u1_gate_runs(base + run, base + 2 * run, base + 3 * run, run, g);
    }
}

namespace {

// Masked reduction over the bit(site) == 1 half, fixed chunk decomposition.
template <typename T, typename Accum>
double bit_one_reduce(const T* v, int n_sites, int site, Accum accum) {
    const std::uint64_t mask = std::uint64_t{1} << (n_sites - 1 - site);
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> parts(n_chunks);
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
        const std::uint64_t end = std::min<std::uint64_t>(begin + kChunk, n);
        double s = 0.0;
        for (std::uint64_t i = begin; i < end; ++i)
            if (i & mask) s += accum(v[i]);
        parts[c] = s;
    }
    double total = 0.0;
    for (double p : parts) total += p;
    return total;
}

template <typename T>
void project_bit_impl(T* v, int n_sites, int site, int outcome, double scale, bool parallel) {
    const int shift = n_sites - 1 - site;
    const std::uint64_t run = std::uint64_t{1} << shift;
    const std::uint64_t n_runs = std::uint64_t{1} << (n_sites - 1 - shift);
    const std::uint64_t keep_offset = outcome ? run : 0;
    const std::uint64_t kill_offset = outcome ? 0 : run;
#pragma omp parallel for schedule(static) if (parallel && (std::uint64_t{1} << n_sites) >= kParMin)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(n_runs); ++r) {
        const std::uint64_t base = static_cast<std::uint64_t>(r) * 2 * run;
        for (std::uint64_t i = 0; i < run; ++i) v[base + kill_offset + i] = T{};
        if (scale != 1.0)
            for (std::uint64_t i = 0; i < run; ++i) v[base + keep_offset + i] *= scale;
    }
}

}  // namespace

double bit_one_weight_serial(const cplx* amps, int n_sites, int site) {
    check_site(n_sites, site);
    double s = 0.0;
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    for (std::uint64_t i = 0; i < n; ++i)
        if (bit_of_site(i, n_sites, site)) s += std::norm(amps[i]);
    return s;
}

double bit_one_weight(const cplx* amps, int n_sites, int site) {
    check_site(n_sites, site);
    return bit_one_reduce(amps, n_sites, site, [](const cplx& a) { return std::norm(a); });
}

double bit_one_mass_serial(const double* w, int n_sites, int site) {
    check_site(n_sites, site);
    double s = 0.0;
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    for (std::uint64_t i = 0; i < n; ++i)
        if (bit_of_site(i, n_sites, site)) s += w[i];
    return s;
}

namespace {

inline double project_round_part(double* __restrict__ w, std::uint64_t begin, std::uint64_t end,
                                 std::uint64_t ones_mask, std::uint64_t zeros_mask) {
    double s = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
        const bool keep = ((i & ones_mask) == ones_mask) && ((i & zeros_mask) == 0);
        w[i] = keep ? w[i] : 0.0;
        s += w[i];
    }
    return s;
}

}  // namespace

double project_round_and_sum_serial(double* w, int n_sites, std::uint64_t ones_mask,
                                    std::uint64_t zeros_mask) {
    return project_round_part(w, 0, std::uint64_t{1} << n_sites, ones_mask, zeros_mask);
}

double project_round_and_sum(double* w, int n_sites, std::uint64_t ones_mask,
                             std::uint64_t zeros_mask) {
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    if (n <= kChunk) return project_round_part(w, 0, n, ones_mask, zeros_mask);
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> parts(n_chunks);
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
        parts[c] = project_round_part(w, begin, std::min<std::uint64_t>(begin + kChunk, n),
                                      ones_mask, zeros_mask);
    }
    double total = 0.0;
    for (double p : parts) total += p;
    return total;
}

double bit_one_mass(const double* w, int n_sites, int site) {
    check_site(n_sites, site);
    return bit_one_reduce(w, n_sites, site, [](double x) { return x; });
}

void project_bit_serial(cplx* amps, int n_sites, int site, int outcome, double scale) {
    check_site(n_sites, site);
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (bit_of_site(i, n_sites, site) != outcome)
            amps[i] = cplx{};
        else
            amps[i] *= scale;
    }
}

void project_bit(cplx* amps, int n_sites, int site, int outcome, double scale) {
    check_site(n_sites, site);
    project_bit_impl(amps, n_sites, site, outcome, scale, true);
}

void project_bit_serial(double* w, int n_sites, int site, int outcome, double scale) {
    check_site(n_sites, site);
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (bit_of_site(i, n_sites, site) != outcome)
            w[i] = 0.0;
        else
            w[i] *= scale;
    }
}

void project_bit(double* w, int n_sites, int site, int outcome, double scale) {
    check_site(n_sites, site);
    project_bit_impl(w, n_sites, site, outcome, scale, true);
}

double norm2_serial(const cplx* amps, std::size_t n) {
    return norm2_part(amps, n);
}

double norm2(const cplx* amps, std::size_t n) {
    return chunked_reduce(amps, n, &norm2_part);
}

double sum_serial(const double* w, std::size_t n) {
    return sum_part(w, n);
}

double sum(const double* w, std::size_t n) {
    return chunked_reduce(w, n, &sum_part);
}

namespace {

template <typename T, typename Accum>
std::vector<double> sector_reduce(const T* v, int n_sites, Accum accum) {
    const std::uint64_t n = std::uint64_t{1} << n_sites;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> parts(n_chunks);
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        std::vector<double> local(n_sites + 1, 0.0);
        const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
        const std::uint64_t end = std::min<std::uint64_t>(begin + kChunk, n);
        for (std::uint64_t i = begin; i < end; ++i) local[charge_of(i)] += accum(v[i]);
        parts[c] = std::move(local);
    }
    std::vector<double> total(n_sites + 1, 0.0);
    for (const auto& local : parts)
        for (int q = 0; q <= n_sites; ++q) total[q] += local[q];
    return total;
}

}  // namespace

std::vector<double> sector_norm2(const cplx* amps, int n_sites) {
    return sector_reduce(amps, n_sites, [](const cplx& a) { return std::norm(a); });
}

std::vector<double> sector_sums(const double* w, int n_sites) {
    return sector_reduce(w, n_sites, [](double x) { return x; });
}

void scale_serial(cplx* amps, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) amps[i] *= s;
}

void scale(cplx* amps, std::size_t n, double s) {
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) amps[i] *= s;
}

void scale_serial(double* w, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) w[i] *= s;
}

void scale(double* w, std::size_t n, double s) {
#pragma omp parallel for schedule(static) if (n >= kParMin)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) w[i] *= s;
}

namespace {

inline void sep_hop_runs(double* __restrict__ w01, double* __restrict__ w10, std::uint64_t run,
                         double hop) {
    const double stay = 1.0 - hop;
    for (std::uint64_t i = 0; i < run; ++i) {
        const double x = w01[i];
        const double y = w10[i];
        w01[i] = stay * x + hop * y;
        w10[i] = hop * x + stay * y;
    }
}

}  // namespace

void apply_sep_hop_serial(double* w, int n_sites, int left_site, double hop) {
    check_bond(n_sites, left_site);
    if (!(hop >= 0.0 && hop <= 1.0)) throw std::invalid_argument("hop must lie in [0, 1]");
    const int lo = n_sites - 2 - left_site;
    const std::uint64_t run = std::uint64_t{1} << lo;
    const std::uint64_t blocks = std::uint64_t{1} << (n_sites - 2 - lo);
    for (std::uint64_t blk = 0; blk < blocks; ++blk) {
        double* base = w + blk * (run << 2);
        sep_hop_runs(base + run, base + 2 * run, run, hop);
    }
}

void apply_sep_hop(double* w, int n_sites, int left_site, double hop) {
    check_bond(n_sites, left_site);
    if (!(hop >= 0.0 && hop <= 1.0)) throw std::invalid_argument("hop must lie in [0, 1]");
    const int lo = n_sites - 2 - left_site;
    const std::uint64_t run = std::uint64_t{1} << lo;
    const std::int64_t blocks = std::int64_t{1} << (n_sites - 2 - lo);
#pragma omp parallel for schedule(static) if ((std::uint64_t{1} << n_sites) >= kParMin)
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
        double* base = w + static_cast<std::uint64_t>(blk) * (run << 2);
        sep_hop_runs(base + run, base + 2 * run, run, hop);
    }
}

}  // namespace u1dec::kernels
