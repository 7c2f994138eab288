#include "u1dec/mps.hpp"

#include <cmath>
#include <limits>

namespace u1dec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Eigen::MatrixXd;
using Eigen::VectorXd;

double tensor_fnorm2(const std::array<MatrixXd, 2>& t) {
    return t[0].squaredNorm() + t[1].squaredNorm();
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw numeric_error(std::string("mps contraction degenerated (") + what + ")");
}

// A singular direction is dropped only when BOTH criteria say it is
// negligible:
//  - 2-norm: its singular value is below threshold * s_max;
//  - 1-norm: its exact contribution to the flat contraction, which is
//    (l . u_n) s_n (v_n . r) given flat environments l and r, is below
//    threshold * total mass (cumulative over the dropped set).
// The 2-norm floor alone fails here because the conditioned probability
// vector spans a huge dynamic range and singular values 1e-10 below the top
// still carry likelihood mass; the 1-norm budget alone fails because sign
// structure hidden from the current flat contraction can be revealed by
// later projectors.
int kept_rank(const VectorXd& sv, const MatrixXd& u, const MatrixXd& vt,
              const VectorXd& env_l, const VectorXd& env_r, int dl, int dr,
              double threshold) {
    const int n = static_cast<int>(sv.size());
    const double sv_floor = threshold * sv[0];
    double total = 0.0;
    std::vector<double> mass(n);
    for (int i = 0; i < n; ++i) {
        const double lu = env_l.dot(u.col(i).head(dl)) + env_l.dot(u.col(i).tail(dl));
        const double vr = env_r.dot(vt.row(i).head(dr)) + env_r.dot(vt.row(i).tail(dr));
        mass[i] = std::abs(lu * sv[i] * vr);
        total += mass[i];
    }
    const double budget = total > 0.0 ? threshold * total
                                      : std::numeric_limits<double>::infinity();
    double dropped = 0.0;
    int keep = n;
    while (keep > 1) {
        if (sv[keep - 1] > sv_floor) break;
        if (dropped + mass[keep - 1] > budget) break;
        dropped += mass[keep - 1];
        --keep;
    }
    return keep;
}

// QR push of the orthogonality center from `site` to `site`+1.
void shift_center_right(ProbabilityMps& mps, int site) {
    auto& a = mps.tensors[site];
    const int dl = static_cast<int>(a[0].rows());
    const int dr = static_cast<int>(a[0].cols());
    MatrixXd m(2 * dl, dr);
    m.topRows(dl) = a[0];
    m.bottomRows(dl) = a[1];
    Eigen::HouseholderQR<MatrixXd> qr(m);
    const int rank = std::min(2 * dl, dr);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(2 * dl, rank);
    MatrixXd r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
    a[0] = q.topRows(dl);
    a[1] = q.bottomRows(dl);
    auto& b = mps.tensors[site + 1];
    b[0] = r * b[0];
    b[1] = r * b[1];
}

}  // namespace

int ProbabilityMps::bond_dim(int bond) const {
    return static_cast<int>(tensors.at(bond)[0].cols());
}

int ProbabilityMps::max_bond_dim() const {
    int m = 1;
    for (const auto& t : tensors) m = std::max(m, static_cast<int>(t[0].cols()));
    return m;
}

ProbabilityMps flat_mps(int n_sites) {
    ProbabilityMps mps;
    mps.tensors.assign(n_sites, {MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)});
    return mps;
}

ProbabilityMps delta_mps(int n_sites, std::uint64_t basis_index) {
    ProbabilityMps mps;
    mps.tensors.reserve(n_sites);
    for (int site = 0; site < n_sites; ++site) {
        const int bit = bit_of_site(basis_index, n_sites, site);
        std::array<MatrixXd, 2> t{MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)};
        t[bit](0, 0) = 1.0;
        mps.tensors.push_back(std::move(t));
    }
    return mps;
}

ProbabilityMps dicke_mps(int n_sites, int charge) {
    if (charge < 0 || charge > n_sites)
        throw std::invalid_argument("dicke_mps: charge out of [0, L]");
    // counting automaton: bond state = number of 1s so far; bond c after site i
    // ranges over [max(0, charge - (L - i)), min(i, charge)]
    auto lo = [&](int i) { return std::max(0, charge - (n_sites - i)); };
    auto hi = [&](int i) { return std::min(i, charge); };
    ProbabilityMps mps;
    mps.tensors.reserve(n_sites);
    for (int site = 0; site < n_sites; ++site) {
        const int dl = hi(site) - lo(site) + 1;
        const int dr = hi(site + 1) - lo(site + 1) + 1;
        std::array<MatrixXd, 2> t{MatrixXd::Zero(dl, dr), MatrixXd::Zero(dl, dr)};
        for (int c = lo(site); c <= hi(site); ++c) {
            for (int q = 0; q <= 1; ++q) {
                const int c2 = c + q;
                if (c2 >= lo(site + 1) && c2 <= hi(site + 1))
                    t[q](c - lo(site), c2 - lo(site + 1)) = 1.0;
            }
        }
        mps.tensors.push_back(std::move(t));
    }
    mps.log_scale = -log_binomial(n_sites, charge);
    return mps;
}

ProbabilityMps initial_classical_mps(int n_sites, const InitSpec& init) {
    validate_init(init, n_sites);
    switch (init.kind) {
        case InitKind::dicke:
            return dicke_mps(n_sites, init.dicke_charge);
        case InitKind::neel:
            return delta_mps(n_sites, neel_index(n_sites));
        case InitKind::neel_flip:
            return delta_mps(n_sites, neel_flip_index(n_sites));
        case InitKind::plus: {
            ProbabilityMps mps = flat_mps(n_sites);
            mps.log_scale = -n_sites * std::log(2.0);
            return mps;
        }
    }
    throw std::invalid_argument("unknown init kind");
}

void right_canonicalize(ProbabilityMps& mps) {
    if (mps.dead) return;
    for (int site = mps.n_sites() - 1; site >= 1; --site) {
        auto& a = mps.tensors[site];
        const int dl = static_cast<int>(a[0].rows());
        const int dr = static_cast<int>(a[0].cols());
        MatrixXd m(dl, 2 * dr);
        m.leftCols(dr) = a[0];
        m.rightCols(dr) = a[1];
        // LQ of m via QR of m^T: m = r^T q^T with q^T having orthonormal rows
        Eigen::HouseholderQR<MatrixXd> qr(m.transpose());
        const int rank = std::min(dl, 2 * dr);
        MatrixXd q = qr.householderQ() * MatrixXd::Identity(2 * dr, rank);
        MatrixXd r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
        MatrixXd qt = q.transpose();  // rank x 2*dr
        a[0] = qt.leftCols(dr);
        a[1] = qt.rightCols(dr);
        auto& prev = mps.tensors[site - 1];
        prev[0] = prev[0] * r.transpose();
        prev[1] = prev[1] * r.transpose();
    }
    auto& head = mps.tensors[0];
    const double f = std::sqrt(tensor_fnorm2(head));
    check_finite(f, "canonicalization");
    if (f <= 0.0) {
        mps.dead = true;
        return;
    }
    head[0] /= f;
    head[1] /= f;
    mps.log_scale += std::log(f);
}

namespace {

// flat covector contracted through tensors [0, site)
VectorXd flat_left_env(const ProbabilityMps& mps, int site) {
    VectorXd env = VectorXd::Ones(1);
    for (int i = 0; i < site; ++i)
        env = ((mps.tensors[i][0] + mps.tensors[i][1]).transpose() * env).eval();
    return env;
}

// flat covector contracted through tensors [site, L)
VectorXd flat_right_env(const ProbabilityMps& mps, int site) {
    VectorXd env = VectorXd::Ones(1);
    for (int i = mps.n_sites() - 1; i >= site; --i)
        env = ((mps.tensors[i][0] + mps.tensors[i][1]) * env).eval();
    return env;
}

void apply_hop_bond_env(ProbabilityMps& mps, int left_site, double hop,
                        const VectorXd& env_l, const VectorXd& env_r) {
    if (mps.dead) return;
    if (left_site < 0 || left_site + 1 >= mps.n_sites())
        throw std::invalid_argument("apply_hop_bond: bond out of range");
    auto& a = mps.tensors[left_site];
    auto& b = mps.tensors[left_site + 1];
    const int dl = static_cast<int>(a[0].rows());
    const int dr = static_cast<int>(b[0].cols());

    // theta[(qa, l), (qb, r)], physical index major on both sides
    MatrixXd theta(2 * dl, 2 * dr);
    for (int qa = 0; qa <= 1; ++qa)
        for (int qb = 0; qb <= 1; ++qb)
            theta.block(qa * dl, qb * dr, dl, dr) = a[qa] * b[qb];

    const double stay = 1.0 - hop;
    MatrixXd t01 = theta.block(0, dr, dl, dr);  // (qa, qb) = (0, 1)
    MatrixXd t10 = theta.block(dl, 0, dl, dr);
    theta.block(0, dr, dl, dr) = stay * t01 + hop * t10;
    theta.block(dl, 0, dl, dr) = hop * t01 + stay * t10;

    // Jacobi rather than BDC: the conditioned states put ~300 orders of
    // magnitude inside one theta, where BDC can emit NaNs and loses the
    // relative accuracy of the small singular values.
    Eigen::JacobiSVD<MatrixXd> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const int keep = mps.threshold > 0.0
                         ? kept_rank(sv, svd.matrixU(), svd.matrixV().transpose(), env_l,
                                     env_r, dl, dr, mps.threshold)
                         : static_cast<int>(sv.size());
    const double nrm = sv.head(keep).norm();
    check_finite(nrm, "svd");
    if (nrm <= 0.0) {
        mps.dead = true;
        return;
    }
    const MatrixXd u = svd.matrixU().leftCols(keep);
    const MatrixXd sv_vt =
        (sv.head(keep) / nrm).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
    a[0] = u.topRows(dl);
    a[1] = u.bottomRows(dl);
    b[0] = sv_vt.leftCols(dr);
    b[1] = sv_vt.rightCols(dr);
    mps.log_scale += std::log(nrm);
}

}  // namespace

void apply_hop_bond(ProbabilityMps& mps, int left_site, double hop) {
    if (mps.dead) return;
    apply_hop_bond_env(mps, left_site, hop, flat_left_env(mps, left_site),
                       flat_right_env(mps, left_site + 2));
}

void apply_projector_site(ProbabilityMps& mps, int site, int outcome) {
    if (mps.dead) return;
    auto& t = mps.tensors.at(site);
    t[1 - outcome].setZero();
    const double f = std::sqrt(tensor_fnorm2(t));
    check_finite(f, "projector");
    if (f <= 0.0) {
        mps.dead = true;
        return;
    }
    t[0] /= f;
    t[1] /= f;
    mps.log_scale += std::log(f);
}

double overlap_log(const ProbabilityMps& a, const ProbabilityMps& b) {
    if (a.dead || b.dead) return kNegInf;
    if (a.n_sites() != b.n_sites())
        throw std::invalid_argument("overlap_log: size mismatch");
    MatrixXd env = MatrixXd::Ones(1, 1);
    double log_acc = a.log_scale + b.log_scale;
    for (int site = 0; site < a.n_sites(); ++site) {
        const auto& ta = a.tensors[site];
        const auto& tb = b.tensors[site];
        MatrixXd next = ta[0].transpose() * env * tb[0] + ta[1].transpose() * env * tb[1];
        const double m = next.cwiseAbs().maxCoeff();
        check_finite(m, "overlap");
        if (m <= 0.0) return kNegInf;
        next /= m;
        log_acc += std::log(m);
        env = std::move(next);
    }
    const double v = env(0, 0);
    check_finite(v, "overlap");
    if (v <= 0.0) return kNegInf;  // clamp truncation-induced negatives
    return log_acc + std::log(v);
}

std::vector<double> to_dense(const ProbabilityMps& mps) {
    const int n_sites = mps.n_sites();
    if (n_sites > 20) throw std::invalid_argument("to_dense: too many sites");
    std::vector<double> out(std::uint64_t{1} << n_sites, 0.0);
    if (mps.dead) return out;
    const double scale = std::exp(mps.log_scale);
    for (std::uint64_t basis = 0; basis < out.size(); ++basis) {
        MatrixXd env = MatrixXd::Ones(1, 1);
        for (int site = 0; site < n_sites; ++site)
            env = env * mps.tensors[site][bit_of_site(basis, n_sites, site)];
        out[basis] = scale * env(0, 0);
    }
    return out;
}

namespace {

// One half-layer of transfers, swept left to right with the orthogonality
// center on the active bond (locally optimal truncations). Flat environments
// travel with the sweep: the left one is extended site by site, the right
// ones are precomputed and only consumed at indices the sweep has not touched
// yet.
void apply_half_layer(ProbabilityMps& mps, const std::vector<std::pair<int, int>>& pairs,
                      const std::vector<double>& hops) {
    if (pairs.empty() || mps.dead) return;
    right_canonicalize(mps);
    if (mps.dead) return;
    const int n_sites = mps.n_sites();
    std::vector<VectorXd> right_envs(n_sites + 1);
    right_envs[n_sites] = VectorXd::Ones(1);
    for (int i = n_sites - 1; i >= 0; --i)
        right_envs[i] = (mps.tensors[i][0] + mps.tensors[i][1]) * right_envs[i + 1];
    VectorXd left_env = VectorXd::Ones(1);
    int center = 0;
    int env_covered = 0;  // left_env spans tensors [0, env_covered)
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const int left = pairs[k].first;
        while (center < left) shift_center_right(mps, center++);
        while (env_covered < left) {
            const auto& t = mps.tensors[env_covered++];
            left_env = ((t[0] + t[1]).transpose() * left_env).eval();
        }
        apply_hop_bond_env(mps, left, hops[k], left_env, right_envs[left + 2]);
        if (mps.dead) return;
        center = left + 1;
    }
}

void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw std::invalid_argument("truncation threshold must lie in [0, 1)");
}

}  // namespace

ProbabilityMps evolve_mps_covector(const MeasurementRecord& rec, const BiasSchedule& bias,
                                   double threshold) {
    validate_record(rec);
    const CircuitLayout layout = rec.layout();
    bias.check_alignment(layout);
    check_threshold(threshold);

    std::vector<std::vector<MeasurementEvent>> rounds(layout.n_rounds());
    for (const auto& ev : rec.events) rounds[ev.half_layer].push_back(ev);

    ProbabilityMps mps = flat_mps(rec.n_sites);
    mps.threshold = threshold;
    for (int tau = layout.n_rounds() - 1; tau >= 0 && !mps.dead; --tau) {
        for (const auto& ev : rounds[tau]) apply_projector_site(mps, ev.site, ev.outcome);
        apply_half_layer(mps, layout.half_layers[tau], bias.hops[tau]);
    }
    return mps;
}

double mps_covector_loglik(const ProbabilityMps& cov, const InitSpec& label_state) {
    return overlap_log(cov, initial_classical_mps(cov.n_sites(), label_state));
}

ProbabilityMps evolve_mps_forward(const MeasurementRecord& rec, const InitSpec& label_state,
                                  const BiasSchedule& bias, double threshold) {
    validate_record(rec);
    const CircuitLayout layout = rec.layout();
    bias.check_alignment(layout);
    check_threshold(threshold);

    std::vector<std::vector<MeasurementEvent>> rounds(layout.n_rounds());
    for (const auto& ev : rec.events) rounds[ev.half_layer].push_back(ev);

    ProbabilityMps mps = initial_classical_mps(rec.n_sites, label_state);
    mps.threshold = threshold;
    for (int tau = 0; tau < layout.n_rounds() && !mps.dead; ++tau) {
        apply_half_layer(mps, layout.half_layers[tau], bias.hops[tau]);
        for (const auto& ev : rounds[tau]) apply_projector_site(mps, ev.site, ev.outcome);
    }
    return mps;
}

double evolve_mps_likelihood(const MeasurementRecord& rec, const InitSpec& label_state,
                             const BiasSchedule& bias, double threshold) {
    // Single-pass truncated evolution cannot certify the likelihood error
    // here: conditioning on a deep measurement record re-weights the state so
    // strongly that a Schmidt component negligible in both 2-norm and current
    // mass can later dominate, once projectors have killed the rest. The
    // likelihood therefore verifies itself: re-evaluate with the truncation
    // floor tightened by 1e6 until two successive passes agree in log, with
    // the exact (zero-floor) pass as the last resort.
    constexpr double kLogTol = 1e-8;
    auto one_pass = [&](double floor) {
        const ProbabilityMps state = evolve_mps_forward(rec, label_state, bias, floor);
        return overlap_log(state, flat_mps(rec.n_sites));
    };
    double floor = threshold;
    double prev = one_pass(floor);
    while (floor > 0.0) {
        floor = floor > 1e-15 * 1e6 ? floor * 1e-6 : 0.0;
        const double cur = one_pass(floor);
        const bool both_zero = std::isinf(prev) && std::isinf(cur);
        if (both_zero || std::abs(cur - prev) <= kLogTol) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace u1dec
