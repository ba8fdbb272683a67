#ifndef JCPE_PILOTS_HPP
#define JCPE_PILOTS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "jcpe/constellation.hpp"

namespace jcpe {

/// Pilot placement over a D x N block. All pilot positions carry the value
/// stored in `values`; every channel has a pilot at the first and last time
/// index.
struct PilotSchedule {
    int channels = 0;
    int length = 0;
    std::vector<std::uint8_t> mask; // row-major D x N, 1 = pilot
    Eigen::MatrixXcd values;        // meaningful where mask is set

    bool is_pilot(int i, int k) const { return mask[static_cast<std::size_t>(i) * length + k] != 0; }
    void set_pilot(int i, int k, cplx v) {
        mask[static_cast<std::size_t>(i) * length + k] = 1;
        values(i, k) = v;
    }

    long pilot_count() const {
        long c = 0;
        for (auto m : mask) c += m;
        return c;
    }
    long data_count() const { return static_cast<long>(channels) * length - pilot_count(); }
};

/// Pilot overhead: pilots per data symbol.
inline double overhead(const PilotSchedule& sched) {
    const long data = sched.data_count();
    if (data == 0) throw std::invalid_argument("overhead: schedule has no data positions");
    return static_cast<double>(sched.pilot_count()) / static_cast<double>(data);
}

namespace detail {

inline PilotSchedule empty_schedule(int d, int n) {
    if (d < 1 || n < 2) throw std::invalid_argument("pilot schedule: need D >= 1, N >= 2");
    PilotSchedule s;
    s.channels = d;
    s.length = n;
    s.mask.assign(static_cast<std::size_t>(d) * n, 0);
    s.values = Eigen::MatrixXcd::Zero(d, n);
    return s;
}

inline void add_endpoints(PilotSchedule& s, cplx v) {
    for (int i = 0; i < s.channels; ++i) {
        s.set_pilot(i, 0, v);
        s.set_pilot(i, s.length - 1, v);
    }
}

inline PilotSchedule build_diagonal(int d, int n, int spacing, cplx v) {
    PilotSchedule s = empty_schedule(d, n);
    int ch = 0;
    for (long k = 0; k < n; k += spacing) {
        // endpoint columns already cover every channel
        if (k != 0 && k != n - 1) s.set_pilot(ch, static_cast<int>(k), v);
        ch = (ch + 1) % d;
    }
    add_endpoints(s, v);
    return s;
}

inline PilotSchedule build_uniform(int d, int n, int spacing, cplx v) {
    PilotSchedule s = empty_schedule(d, n);
    for (int i = 0; i < d; ++i)
        for (long k = 0; k < n; k += spacing) s.set_pilot(i, static_cast<int>(k), v);
    add_endpoints(s, v);
    return s;
}

template <typename Builder>
PilotSchedule pick_spacing(int d, int n, double oh, double ideal, Builder build) {
    if (!(oh > 0.0 && oh <= 1.0)) throw std::invalid_argument("pilot schedule: need 0 < oh <= 1");
    const long t0 = std::max<long>(1, static_cast<long>(std::floor(ideal)));
    PilotSchedule best;
    double best_err = -1.0;
    for (long t : {t0, t0 + 1}) {
        if (t > n - 1) continue;
        PilotSchedule s = build(static_cast<int>(t));
        const double err = std::abs(overhead(s) - oh);
        if (best_err < 0.0 || err < best_err) {
            best_err = err;
            best = std::move(s);
        }
    }
    if (best_err < 0.0)
        throw std::invalid_argument("pilot schedule: overhead too small for block length "
                                    "(interior spacing exceeds N-1)");
    return best;
}

} // namespace detail

/// Wrapped-diagonal arrangement for joint-channel processing: one pilot per
/// selected time index, channel advancing by one per pilot instant and
/// wrapping mod D, plus endpoint pilots for every channel. Pilot value
/// sqrt(Es).
inline PilotSchedule wrapped_diagonal(int d, int n, double oh, double es) {
    const cplx v(std::sqrt(es), 0.0);
    return detail::pick_spacing(d, n, oh, 1.0 / (oh * d),
                                [&](int t) { return detail::build_diagonal(d, n, t, v); });
}

/// Identical evenly spaced pilots in every channel, endpoints included.
inline PilotSchedule uniform_per_channel(int d, int n, double oh, double es) {
    const cplx v(std::sqrt(es), 0.0);
    return detail::pick_spacing(d, n, oh, 1.0 / oh,
                                [&](int t) { return detail::build_uniform(d, n, t, v); });
}

/// Endpoint-only schedule (first and last column pilots in every channel).
inline PilotSchedule endpoints_only(int d, int n, double es) {
    PilotSchedule s = detail::empty_schedule(d, n);
    detail::add_endpoints(s, cplx(std::sqrt(es), 0.0));
    return s;
}

/// Row slice of a schedule as a single-channel schedule.
inline PilotSchedule channel_slice(const PilotSchedule& sched, int i) {
    PilotSchedule s = detail::empty_schedule(1, sched.length);
    for (int k = 0; k < sched.length; ++k)
        if (sched.is_pilot(i, k)) s.set_pilot(0, k, sched.values(i, k));
    return s;
}

} // namespace jcpe

#endif
