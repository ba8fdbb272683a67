#ifndef JCPE_CPE_HPP
#define JCPE_CPE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "jcpe/channel.hpp"
#include "jcpe/constellation.hpp"
#include "jcpe/pilots.hpp"

namespace jcpe {

/// Forward/smoothed phase trajectories and their per-channel variances
/// (diagonals of the filter and smoother covariances).
struct PhaseTrack {
    Eigen::MatrixXd theta_f;  // D x N forward means
    Eigen::MatrixXd var_f;    // D x N diag of forward covariances
    Eigen::MatrixXd theta_s;  // D x N smoothed means
    Eigen::MatrixXd var_s;    // D x N diag of smoothed covariances
};

struct CpeResult {
    Eigen::MatrixXcd decisions;          // D x N; pilot positions hold the pilot value
    std::vector<double> bit_llrs;        // per data position (column-major scan), log2(M) each
    PhaseTrack phase_track;
    int iterations_run = 0;
};

namespace detail {

// log posterior metric f(x) for one received sample given the smoothed phase
// estimate; shared by the decision, soft-update and LLR paths.
struct PosteriorMetric {
    const Constellation& c;
    cplx anchor;      // e^{j theta_s} / M_s  -  r * sbar_conj / var_tilde
    cplx r_over_var;  // r / sigma^2
    double inv_2var;  // 1 / (2 sigma^2)

    double operator()(int point_idx) const {
        const cplx x = c.points[point_idx];
        const cplx xi = anchor + r_over_var * std::conj(x);
        double n = std::norm(xi);
        if (n < 1e-300) n = 1e-300;
        return std::sqrt(n) - std::norm(x) * inv_2var - 0.25 * std::log(n);
    }
};

} // namespace detail

/// Iterative pilot-aided joint-channel CPE: an extended Kalman smoother over
/// the D-dimensional phase random walk with increment covariance Q, fed with
/// soft symbols that are refined across iterations. Runs a fixed number of
/// iterations; decisions (and optionally bit LLRs) are produced on the last
/// one.
inline CpeResult fg_eks(const Eigen::MatrixXcd& received, const PilotSchedule& sched,
                        const Constellation& c, const Eigen::MatrixXd& q,
                        const Eigen::VectorXd& noise_var, int iterations,
                        bool compute_llrs = false) {
    const int d = static_cast<int>(received.rows());
    const int n = static_cast<int>(received.cols());
    if (sched.channels != d || sched.length != n)
        throw std::invalid_argument("fg_eks: schedule shape mismatch");
    if (q.rows() != d || q.cols() != d) throw std::invalid_argument("fg_eks: Q shape mismatch");
    if (noise_var.size() != d) throw std::invalid_argument("fg_eks: noise_var size mismatch");
    if (iterations < 1) throw std::invalid_argument("fg_eks: need at least one iteration");
    for (int i = 0; i < d; ++i) {
        if (!(noise_var(i) > 0.0))
            throw std::invalid_argument("fg_eks: noise variances must be positive");
        if (!sched.is_pilot(i, 0))
            throw std::invalid_argument("fg_eks: every channel needs a pilot at the first index");
    }

    const double es = c.es;

    // Soft-symbol state
    Eigen::MatrixXcd s_bar(d, n);
    Eigen::MatrixXd var_tilde(d, n);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < n; ++k) {
            if (sched.is_pilot(i, k)) {
                s_bar(i, k) = sched.values(i, k);
                var_tilde(i, k) = noise_var(i);
            } else {
                s_bar(i, k) = cplx(0.0, 0.0);
                var_tilde(i, k) = noise_var(i) + es / 2.0;
            }
        }

    CpeResult res;
    res.decisions = Eigen::MatrixXcd::Zero(d, n);
    res.phase_track.theta_f.resize(d, n);
    res.phase_track.var_f.resize(d, n);
    res.phase_track.theta_s.resize(d, n);
    res.phase_track.var_s.resize(d, n);

    std::vector<Eigen::MatrixXd> m_fwd(n); // forward covariances
    const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(d, d);

    for (int it = 0; it < iterations; ++it) {
        const bool last = (it == iterations - 1);

        // Forward EKF pass
        Eigen::VectorXd theta_prev(d);
        for (int i = 0; i < d; ++i)
            theta_prev(i) = std::arg(received(i, 0) * std::conj(s_bar(i, 0)));
        Eigen::MatrixXd m_prev = (var_tilde.col(0) / es).asDiagonal();
        m_fwd[0] = m_prev;
        res.phase_track.theta_f.col(0) = theta_prev;
        res.phase_track.var_f.col(0) = m_prev.diagonal();

        Eigen::VectorXd h(d), v(d);
        for (int k = 1; k < n; ++k) {
            for (int i = 0; i < d; ++i) {
                const cplx rot(std::cos(-theta_prev(i)), std::sin(-theta_prev(i)));
                h(i) = (received(i, k) * std::conj(s_bar(i, k)) * rot).imag() / var_tilde(i, k);
                v(i) = std::norm(s_bar(i, k)) / var_tilde(i, k);
            }
            const Eigen::MatrixXd m_pred = m_prev + q;
            Eigen::MatrixXd m_upd =
                (ident + m_pred * v.asDiagonal().toDenseMatrix()).partialPivLu().solve(m_pred);
            m_upd = 0.5 * (m_upd + m_upd.transpose()).eval();
            theta_prev += m_upd * h;
            m_prev = m_upd;
            m_fwd[k] = m_upd;
            res.phase_track.theta_f.col(k) = theta_prev;
            res.phase_track.var_f.col(k) = m_upd.diagonal();
        }

        // Backward RTS pass
        Eigen::VectorXd theta_s = res.phase_track.theta_f.col(n - 1);
        Eigen::MatrixXd m_s = m_fwd[n - 1];
        res.phase_track.theta_s.col(n - 1) = theta_s;
        res.phase_track.var_s.col(n - 1) = m_s.diagonal();
        for (int k = n - 2; k >= 0; --k) {
            const Eigen::MatrixXd m_pred = m_fwd[k] + q; // covariance predicted to k+1
            const Eigen::MatrixXd gain =
                m_pred.transpose().partialPivLu().solve(m_fwd[k].transpose()).transpose();
            const Eigen::VectorXd theta_fk = res.phase_track.theta_f.col(k);
            theta_s = theta_fk + gain * (theta_s - theta_fk);
            m_s = m_fwd[k] + gain * (m_s - m_pred) * gain.transpose();
            m_s = 0.5 * (m_s + m_s.transpose()).eval();
            res.phase_track.theta_s.col(k) = theta_s;
            res.phase_track.var_s.col(k) = m_s.diagonal();
        }

        // Symbol-posterior pass over data positions
        if (last && compute_llrs) res.bit_llrs.reserve(sched.data_count() * c.bits_per_symbol);
        std::vector<double> f(c.order);
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < d; ++i) {
                if (sched.is_pilot(i, k)) {
                    if (last) res.decisions(i, k) = sched.values(i, k);
                    continue;
                }
                const double ms = res.phase_track.var_s(i, k);
                const double ts = res.phase_track.theta_s(i, k);
                detail::PosteriorMetric metric{
                    c,
                    cplx(std::cos(ts), std::sin(ts)) / ms -
                        received(i, k) * std::conj(s_bar(i, k)) / var_tilde(i, k),
                    received(i, k) / noise_var(i), 1.0 / (2.0 * noise_var(i))};

                double fmax = -1e300;
                int best = 0;
                for (int x = 0; x < c.order; ++x) {
                    f[x] = metric(x);
                    if (f[x] > fmax) {
                        fmax = f[x];
                        best = x;
                    }
                }

                if (last) {
                    res.decisions(i, k) = c.points[best];
                    if (compute_llrs) {
                        const int m = c.bits_per_symbol;
                        std::vector<double> pe(c.order);
                        for (int x = 0; x < c.order; ++x) pe[x] = std::exp(f[x] - fmax);
                        for (int b = 0; b < m; ++b) {
                            const std::uint32_t bit = 1u << (m - 1 - b);
                            double s0 = 0.0, s1 = 0.0;
                            for (int x = 0; x < c.order; ++x) {
                                if (c.labels[x] & bit)
                                    s1 += pe[x];
                                else
                                    s0 += pe[x];
                            }
                            if (s0 > 0.0 && s1 > 0.0) {
                                res.bit_llrs.push_back(std::log(s0) - std::log(s1));
                                continue;
                            }
                            // one side underflowed under the shared max:
                            // redo this bit with per-subset max subtraction
                            double m0 = -1e300, m1 = -1e300;
                            for (int x = 0; x < c.order; ++x)
                                ((c.labels[x] & bit) ? m1 : m0) =
                                    std::max((c.labels[x] & bit) ? m1 : m0, f[x]);
                            double t0 = 0.0, t1 = 0.0;
                            for (int x = 0; x < c.order; ++x) {
                                if (c.labels[x] & bit)
                                    t1 += std::exp(f[x] - m1);
                                else
                                    t0 += std::exp(f[x] - m0);
                            }
                            res.bit_llrs.push_back(m0 + std::log(t0) - m1 - std::log(t1));
                        }
                    }
                } else {
                    double z = 0.0;
                    cplx mean(0.0, 0.0);
                    for (int x = 0; x < c.order; ++x) {
                        const double p = std::exp(f[x] - fmax);
                        z += p;
                        mean += p * c.points[x];
                    }
                    mean /= z;
                    double spread = 0.0;
                    for (int x = 0; x < c.order; ++x)
                        spread += std::exp(f[x] - fmax) / z * std::norm(c.points[x] - mean);
                    s_bar(i, k) = mean;
                    var_tilde(i, k) = noise_var(i) + 0.5 * spread;
                }
            }
        }
        res.iterations_run = it + 1;
    }
    return res;
}

/// Per-channel CPE: the same algorithm run independently on each channel
/// with the scalar increment variance var_nu + var_c + var_p.
inline CpeResult pc_cpe(const Eigen::MatrixXcd& received, const PilotSchedule& sched,
                        const Constellation& c, const PhaseModel& pm,
                        const Eigen::VectorXd& noise_var, int iterations,
                        bool compute_llrs = false) {
    const int d = static_cast<int>(received.rows());
    const int n = static_cast<int>(received.cols());
    Eigen::MatrixXd q1(1, 1);
    q1(0, 0) = pm.total_per_channel_variance();

    CpeResult res;
    res.decisions.resize(d, n);
    res.phase_track.theta_f.resize(d, n);
    res.phase_track.var_f.resize(d, n);
    res.phase_track.theta_s.resize(d, n);
    res.phase_track.var_s.resize(d, n);

    // Per-channel LLRs come out channel-by-channel; reorder to the joint
    // column-major data scan so both strategies expose the same layout.
    std::vector<std::vector<double>> llrs_per_channel(compute_llrs ? d : 0);

    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd nv(1);
        nv(0) = noise_var(i);
        CpeResult one = fg_eks(received.row(i), channel_slice(sched, i), c, q1, nv, iterations,
                               compute_llrs);
        res.decisions.row(i) = one.decisions.row(0);
        res.phase_track.theta_f.row(i) = one.phase_track.theta_f.row(0);
        res.phase_track.var_f.row(i) = one.phase_track.var_f.row(0);
        res.phase_track.theta_s.row(i) = one.phase_track.theta_s.row(0);
        res.phase_track.var_s.row(i) = one.phase_track.var_s.row(0);
        res.iterations_run = one.iterations_run;
        if (compute_llrs) llrs_per_channel[i] = std::move(one.bit_llrs);
    }

    if (compute_llrs) {
        std::vector<std::size_t> cursor(d, 0);
        const int m = c.bits_per_symbol;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < d; ++i) {
                if (sched.is_pilot(i, k)) continue;
                for (int b = 0; b < m; ++b)
                    res.bit_llrs.push_back(llrs_per_channel[i][cursor[i]++]);
            }
    }
    return res;
}

/// Blind phase search over one channel. Test phases span [0, pi/2); the
/// per-symbol winning phase is unwrapped across the pi/2 ambiguity using
/// continuity seeded with the true initial phase.
struct BpsResult {
    Eigen::VectorXcd decisions;
    Eigen::VectorXd phase;
};

inline BpsResult bps(const Eigen::VectorXcd& received, const Constellation& c,
                     int num_test_phases, int half_window, double genie_initial_phase) {
    const int n = static_cast<int>(received.size());
    if (num_test_phases < 2) throw std::invalid_argument("bps: need at least 2 test phases");
    if (half_window < 1 || 2 * half_window + 1 > n)
        throw std::invalid_argument("bps: window does not fit block");

    const double quarter = std::numbers::pi / 2.0;
    const int nb = num_test_phases;

    // Prefix sums of per-symbol distances for each test phase
    Eigen::MatrixXd acc(nb, n + 1);
    for (int b = 0; b < nb; ++b) {
        const double phi = quarter * b / nb;
        const cplx rot(std::cos(-phi), std::sin(-phi));
        double run = 0.0;
        acc(b, 0) = 0.0;
        for (int k = 0; k < n; ++k) {
            const cplx y = received(k) * rot;
            run += std::norm(y - c.points[slice_index(c, y)]);
            acc(b, k + 1) = run;
        }
    }

    BpsResult out;
    out.decisions.resize(n);
    out.phase.resize(n);
    double prev_est = genie_initial_phase;
    for (int k = 0; k < n; ++k) {
        const int lo = std::max(0, k - half_window);
        const int hi = std::min(n - 1, k + half_window);
        int best = 0;
        double best_d = acc(0, hi + 1) - acc(0, lo);
        for (int b = 1; b < nb; ++b) {
            const double dsum = acc(b, hi + 1) - acc(b, lo);
            if (dsum < best_d) {
                best_d = dsum;
                best = b;
            }
        }
        const double raw = quarter * best / nb;
        const double est = raw + quarter * std::round((prev_est - raw) / quarter);
        out.phase(k) = est;
        prev_est = est;
        const cplx y = received(k) * cplx(std::cos(-est), std::sin(-est));
        out.decisions(k) = c.points[slice_index(c, y)];
    }
    return out;
}

/// Fourth-power (Viterbi-Viterbi) phase estimation for one channel; exact
/// for QPSK. The pi/2 ambiguity is resolved with the true initial phase.
inline Eigen::VectorXd viterbi_viterbi(const Eigen::VectorXcd& received, int half_window,
                                       double genie_initial_phase) {
    const int n = static_cast<int>(received.size());
    if (half_window < 0 || 2 * half_window + 1 > n)
        throw std::invalid_argument("viterbi_viterbi: window does not fit block");

    std::vector<cplx> prefix(n + 1, cplx(0.0, 0.0));
    for (int k = 0; k < n; ++k) {
        const cplx r = received(k);
        prefix[k + 1] = prefix[k] + r * r * r * r;
    }

    const double quarter = std::numbers::pi / 2.0;
    const double two_pi = 2.0 * std::numbers::pi;
    Eigen::VectorXd est(n);
    double prev4 = 0.0;
    bool have_prev = false;
    for (int k = 0; k < n; ++k) {
        const int lo = std::max(0, k - half_window);
        const int hi = std::min(n - 1, k + half_window);
        const cplx w = prefix[hi + 1] - prefix[lo];
        if (std::abs(w) < 1e-300)
            throw std::invalid_argument("viterbi_viterbi: zero-magnitude fourth-power sum");
        // QPSK points to the fourth power land on the negative real axis
        double a4 = std::arg(-w);
        if (have_prev) a4 += two_pi * std::round((prev4 - a4) / two_pi);
        prev4 = a4;
        have_prev = true;
        est(k) = a4 / 4.0;
    }
    const double offset = quarter * std::round((genie_initial_phase - est(0)) / quarter);
    for (int k = 0; k < n; ++k) est(k) += offset;
    return est;
}

} // namespace jcpe

#endif
