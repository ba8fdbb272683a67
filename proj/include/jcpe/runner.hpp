#ifndef JCPE_RUNNER_HPP
#define JCPE_RUNNER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "jcpe/channel.hpp"
#include "jcpe/constellation.hpp"
#include "jcpe/cpe.hpp"
#include "jcpe/metrics.hpp"
#include "jcpe/pilots.hpp"
#include "jcpe/rng.hpp"

namespace jcpe {

enum class Strategy { Joint, PerChannel, Bps, ViterbiViterbi };

inline std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Joint: return "joint";
        case Strategy::PerChannel: return "per-channel";
        case Strategy::Bps: return "bps";
        case Strategy::ViterbiViterbi: return "viterbi";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& s) {
    if (s == "joint") return Strategy::Joint;
    if (s == "per-channel" || s == "per_channel") return Strategy::PerChannel;
    if (s == "bps") return Strategy::Bps;
    if (s == "viterbi" || s == "viterbi-viterbi") return Strategy::ViterbiViterbi;
    throw std::invalid_argument("unknown strategy: " + s);
}

/// One point of the phase-noise axis, fully resolved to increment variances.
struct PhasePoint {
    double dnu_hz = std::numeric_limits<double>::quiet_NaN();
    double symbol_rate_baud = std::numeric_limits<double>::quiet_NaN();
    double dnu_ts = 0.0; // var_nu / (2 pi)
    double var_nu = 0.0;
    double var_c = 0.0;
    double var_p = 0.0;
};

struct SweepSpec {
    std::vector<int> modulations{16};
    std::vector<int> cores{1};
    int block_length = 10000;
    std::vector<double> oh_pilot{0.01};

    // Exactly one of the two modes
    std::vector<double> ebn0_db;
    bool required_snr_mode = false;
    double target_ber = 1.44e-2;
    double bracket_lo_db = 0.0;
    double bracket_hi_db = 30.0;
    double tol_db = 0.05;

    // Phase-noise axis: either dnu_ts values, or dnu_hz values with a symbol
    // rate, or explicit variance triples, or a correlation-ratio sweep with a
    // fixed variance budget (var_nu + var_p = correlation_total, var_c = 0).
    std::vector<double> dnu_ts;
    std::vector<double> dnu_hz;
    double symbol_rate_baud = 0.0;
    double ratio_c = 1e3; // var_nu / var_c; <= 0 means var_c = 0
    double ratio_p = 1e6; // var_nu / var_p; <= 0 means var_p = 0
    std::vector<PhasePoint> explicit_phase_points;
    std::vector<double> correlation_ratio; // var_nu / var_p grid
    double correlation_total = 0.0;

    std::vector<Strategy> strategies{Strategy::Joint};
    int iterations = 2;
    std::uint64_t master_seed = 1;
    std::uint64_t error_target = 10000;
    std::uint64_t max_frames = 4096;
    bool compute_air = false;
    int bps_test_phases = 128;
    int bps_half_window = 0; // 0 = tune per point
    int vv_half_window = 64;

    void validate() const {
        std::string errs;
        auto fail = [&](const std::string& e) { errs += "  - " + e + "\n"; };
        if (modulations.empty()) fail("modulation list is empty");
        for (int m : modulations)
            if (m != 4 && m != 16 && m != 64 && m != 256 && m != 1024)
                fail("unsupported modulation order " + std::to_string(m));
        if (cores.empty()) fail("cores list is empty");
        for (int cr : cores)
            if (cr < 1) fail("core count must be >= 1");
        if (block_length < 2) fail("block length must be >= 2");
        if (oh_pilot.empty()) fail("pilot overhead list is empty");
        for (double oh : oh_pilot)
            if (!(oh > 0.0 && oh <= 1.0)) fail("pilot overhead must be in (0, 1]");
        if (required_snr_mode == !ebn0_db.empty())
            fail("exactly one of an Eb/N0 grid or required-SNR mode must be given");
        if (required_snr_mode && !(bracket_lo_db < bracket_hi_db)) fail("bad bisection bracket");
        const int axes = (!dnu_ts.empty()) + (!dnu_hz.empty()) + (!explicit_phase_points.empty()) +
                         (!correlation_ratio.empty());
        if (axes != 1) fail("exactly one phase-noise axis must be given");
        if (!dnu_hz.empty() && !(symbol_rate_baud > 0.0))
            fail("dnu_hz requires a positive symbol rate");
        if (!correlation_ratio.empty() && !(correlation_total > 0.0))
            fail("correlation sweep requires a positive total variance");
        if (strategies.empty()) fail("strategy list is empty");
        if (iterations < 1) fail("iterations must be >= 1");
        if (error_target < 1) fail("error target must be >= 1");
        if (!errs.empty()) throw std::invalid_argument("invalid sweep configuration:\n" + errs);
    }

    std::vector<PhasePoint> resolve_phase_points() const {
        std::vector<PhasePoint> pts;
        auto from_var_nu = [&](double var_nu) {
            PhasePoint p;
            p.var_nu = var_nu;
            p.var_c = ratio_c > 0.0 ? var_nu / ratio_c : 0.0;
            p.var_p = ratio_p > 0.0 ? var_nu / ratio_p : 0.0;
            p.dnu_ts = var_nu / (2.0 * std::numbers::pi);
            return p;
        };
        if (!explicit_phase_points.empty()) return explicit_phase_points;
        for (double dt : dnu_ts) pts.push_back(from_var_nu(2.0 * std::numbers::pi * dt));
        for (double dnu : dnu_hz) {
            PhasePoint p = from_var_nu(linewidth_to_var(dnu, symbol_rate_baud));
            p.dnu_hz = dnu;
            p.symbol_rate_baud = symbol_rate_baud;
            pts.push_back(p);
        }
        for (double ratio : correlation_ratio) {
            PhasePoint p;
            p.var_nu = correlation_total * ratio / (1.0 + ratio);
            p.var_p = correlation_total / (1.0 + ratio);
            p.var_c = 0.0;
            p.dnu_ts = p.var_nu / (2.0 * std::numbers::pi);
            pts.push_back(p);
        }
        return pts;
    }
};

struct TrialRecord {
    std::string modulation;
    int m = 0;
    int cores = 0;
    int d = 0;
    int n = 0;
    std::string strategy;
    int iterations = 0;
    double oh_pilot_target = 0.0;
    double oh_pilot_achieved = 0.0;
    double dnu_hz = std::numeric_limits<double>::quiet_NaN();
    double symbol_rate_baud = std::numeric_limits<double>::quiet_NaN();
    double dnu_ts = 0.0;
    double var_nu = 0.0;
    double var_c = 0.0;
    double var_p = 0.0;
    double ebn0_db = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    double ber = std::numeric_limits<double>::quiet_NaN();
    double air = std::numeric_limits<double>::quiet_NaN();
    double required_ebn0_db = std::numeric_limits<double>::quiet_NaN();
    double target_ber = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    bool underpowered = false;
};

/// Parameters of one Monte Carlo evaluation point.
struct PointParams {
    int m = 16;
    int d = 2;
    int n = 10000;
    double oh = 0.01;
    Strategy strategy = Strategy::Joint;
    int iterations = 2;
    double var_nu = 0.0, var_c = 0.0, var_p = 0.0;
    double sigma2 = 0.1; // noise variance per real dimension
    std::uint64_t master_seed = 1;
    std::uint64_t combo_id = 0;
    std::uint64_t error_target = 10000;
    std::uint64_t max_frames = 4096;
    bool compute_air = false;
    bool endpoint_pilots_only = false; // override the schedule with k=0 and k=N-1 pilots
    int bps_test_phases = 128;
    int bps_half_window = 0;
    int vv_half_window = 64;
};

struct PointResult {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double gmi_penalty = 0.0; // summed softplus penalty over all counted bits
    double achieved_oh = 0.0;
    int frames = 0;
    double ber() const { return static_cast<double>(errors) / static_cast<double>(bits); }
    double air(int bits_per_symbol, double oh) const {
        const double g = bits_per_symbol * (1.0 - gmi_penalty / static_cast<double>(bits));
        return std::max(0.0, g) / (1.0 + oh);
    }
};

namespace detail_runner {

struct FrameOutcome {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double gmi_penalty = 0.0;
    bool finite = true;
};

inline bool blind(Strategy s) { return s == Strategy::Bps || s == Strategy::ViterbiViterbi; }

inline PilotSchedule make_schedule(const PointParams& p, double es) {
    if (blind(p.strategy)) return detail::empty_schedule(p.d, p.n); // no pilots
    if (p.endpoint_pilots_only) return endpoints_only(p.d, p.n, es);
    if (p.strategy == Strategy::Joint) return wrapped_diagonal(p.d, p.n, p.oh, es);
    return uniform_per_channel(p.d, p.n, p.oh, es);
}

inline double softplus2(double z) {
    if (z > 40.0) return z / std::numbers::ln2;
    return std::log1p(std::exp(z)) / std::numbers::ln2;
}

/// Simulate and detect one frame. Deterministic in (params, frame index).
inline FrameOutcome run_frame(const PointParams& p, const Constellation& c,
                              const PilotSchedule& sched, std::uint64_t frame,
                              int bps_half_window) {
    auto bits_gen = rng::make_stream(p.master_seed, p.combo_id, frame, rng::Role::DataBits);
    auto phase_gen = rng::make_stream(p.master_seed, p.combo_id, frame, rng::Role::Phase);
    auto noise_gen = rng::make_stream(p.master_seed, p.combo_id, frame, rng::Role::Noise);

    const int d = p.d, n = p.n, mbits = c.bits_per_symbol;
    std::uniform_int_distribution<int> coin(0, 1);

    // Data bits and symbols in the column-major data scan order (time outer,
    // channel inner), matching the LLR layout of the estimators.
    std::vector<std::uint8_t> tx_bits;
    tx_bits.reserve(static_cast<std::size_t>(sched.data_count()) * mbits);
    Eigen::MatrixXcd symbols(d, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) {
            if (sched.is_pilot(i, k)) {
                symbols(i, k) = sched.values(i, k);
                continue;
            }
            std::uint32_t lab = 0;
            for (int b = 0; b < mbits; ++b) {
                const int bit = coin(bits_gen);
                tx_bits.push_back(static_cast<std::uint8_t>(bit));
                lab = (lab << 1) | static_cast<std::uint32_t>(bit);
            }
            symbols(i, k) = c.point_of_label(lab);
        }

    PhaseModel pm{d, p.var_nu, p.var_c, p.var_p};
    const Eigen::MatrixXd theta = sample_phase_noise(pm, n, phase_gen);
    const Eigen::VectorXd noise_var = Eigen::VectorXd::Constant(d, p.sigma2);
    const Eigen::MatrixXcd received = apply_channel(symbols, theta, noise_var, noise_gen);

    Eigen::MatrixXcd decisions(d, n);
    std::vector<double> llrs;
    switch (p.strategy) {
        case Strategy::Joint: {
            const Eigen::MatrixXd q = build_covariance(pm);
            CpeResult res = fg_eks(received, sched, c, q, noise_var, p.iterations, p.compute_air);
            decisions = std::move(res.decisions);
            llrs = std::move(res.bit_llrs);
            break;
        }
        case Strategy::PerChannel: {
            CpeResult res = pc_cpe(received, sched, c, pm, noise_var, p.iterations, p.compute_air);
            decisions = std::move(res.decisions);
            llrs = std::move(res.bit_llrs);
            break;
        }
        case Strategy::Bps: {
            for (int i = 0; i < d; ++i) {
                BpsResult r =
                    bps(received.row(i), c, p.bps_test_phases, bps_half_window, theta(i, 0));
                decisions.row(i) = r.decisions;
            }
            break;
        }
        case Strategy::ViterbiViterbi: {
            for (int i = 0; i < d; ++i) {
                const Eigen::VectorXd est =
                    viterbi_viterbi(received.row(i), p.vv_half_window, theta(i, 0));
                for (int k = 0; k < n; ++k) {
                    const cplx y = received(i, k) * cplx(std::cos(-est(k)), std::sin(-est(k)));
                    decisions(i, k) = c.points[slice_index(c, y)];
                }
            }
            break;
        }
    }

    FrameOutcome out;
    std::size_t cursor = 0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) {
            if (sched.is_pilot(i, k)) continue;
            const cplx dec = decisions(i, k);
            if (!std::isfinite(dec.real()) || !std::isfinite(dec.imag())) out.finite = false;
            const std::uint32_t lab = c.labels[slice_index(c, dec)];
            for (int b = 0; b < mbits; ++b) {
                const std::uint8_t tx = tx_bits[cursor + b];
                const std::uint8_t rx =
                    static_cast<std::uint8_t>((lab >> (mbits - 1 - b)) & 1u);
                out.errors += tx ^ rx;
            }
            if (p.compute_air && !llrs.empty())
                for (int b = 0; b < mbits; ++b) {
                    const double llr = llrs[cursor + b];
                    if (!std::isfinite(llr)) out.finite = false;
                    out.gmi_penalty += softplus2(tx_bits[cursor + b] ? llr : -llr);
                }
            cursor += mbits;
        }
    out.bits = cursor;
    return out;
}

/// Pick the BPS half-window minimizing BER on a dedicated tuning frame.
inline int tune_bps_window(const PointParams& p, const Constellation& c,
                           const PilotSchedule& sched) {
    PointParams tp = p;
    tp.compute_air = false;
    const std::uint64_t tuning_frame = 0xFFFFFFFFULL; // outside the MC frame range
    int best_hw = 4;
    std::uint64_t best_err = ~0ULL;
    for (int hw = 4; hw <= 128; hw += 2) {
        FrameOutcome o = run_frame(tp, c, sched, tuning_frame, hw);
        if (o.errors < best_err) {
            best_err = o.errors;
            best_hw = hw;
        }
    }
    return best_hw;
}

} // namespace detail_runner

/// Run one Monte Carlo point until the error target is met (checked at fixed
/// batch boundaries so the result is independent of the worker count).
inline PointResult run_point(const PointParams& p, int workers = 1) {
    const Constellation c = build_qam(p.m, 1.0);
    const PilotSchedule sched = detail_runner::make_schedule(p, c.es);

    int bps_hw = p.bps_half_window;
    if (p.strategy == Strategy::Bps && bps_hw <= 0)
        bps_hw = detail_runner::tune_bps_window(p, c, sched);

    PointResult res;
    res.achieved_oh = detail_runner::blind(p.strategy) ? 0.0 : overhead(sched);

    constexpr std::uint64_t batch = 4;
    std::uint64_t frame = 0;
    bool nonfinite = false;
    while (frame < p.max_frames) {
        const std::uint64_t count = std::min<std::uint64_t>(batch, p.max_frames - frame);
        std::vector<detail_runner::FrameOutcome> outcomes(count);
        const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
        if (nthreads == 1) {
            for (std::uint64_t j = 0; j < count; ++j)
                outcomes[j] = detail_runner::run_frame(p, c, sched, frame + j, bps_hw);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t)
                pool.emplace_back([&, t] {
                    for (std::uint64_t j = t; j < count; j += nthreads)
                        outcomes[j] = detail_runner::run_frame(p, c, sched, frame + j, bps_hw);
                });
            for (auto& th : pool) th.join();
        }
        for (const auto& o : outcomes) {
            res.bits += o.bits;
            res.errors += o.errors;
            res.gmi_penalty += o.gmi_penalty;
            if (!o.finite) nonfinite = true;
        }
        frame += count;
        res.frames = static_cast<int>(frame);
        if (res.errors >= p.error_target) break;
    }
    if (nonfinite)
        throw std::runtime_error("run_point: non-finite value encountered in trial");
    return res;
}

/// Run a full sweep. Results are identical for any worker count: random
/// streams are derived per (combination, frame index), never per worker.
inline std::vector<TrialRecord> run_sweep(const SweepSpec& spec, int workers = 1) {
    spec.validate();
    const std::vector<PhasePoint> phase_points = spec.resolve_phase_points();
    std::vector<TrialRecord> records;

    std::uint64_t combo_id = 0;
    for (int m : spec.modulations)
        for (int cores : spec.cores)
            for (double oh : spec.oh_pilot)
                for (const PhasePoint& pp : phase_points) {
                    // One combination id per physical scenario: all strategies
                    // and Eb/N0 points share the random substream schedule.
                    const std::uint64_t combo = combo_id++;
                    for (Strategy st : spec.strategies) {
                        PointParams p;
                        p.m = m;
                        p.d = 2 * cores;
                        p.n = spec.block_length;
                        p.oh = oh;
                        p.strategy = st;
                        p.iterations = spec.iterations;
                        p.var_nu = pp.var_nu;
                        p.var_c = pp.var_c;
                        p.var_p = pp.var_p;
                        p.master_seed = spec.master_seed;
                        p.combo_id = combo;
                        p.error_target = spec.error_target;
                        p.max_frames = spec.max_frames;
                        p.compute_air = spec.compute_air && !detail_runner::blind(st);
                        p.bps_test_phases = spec.bps_test_phases;
                        p.bps_half_window = spec.bps_half_window;
                        p.vv_half_window = spec.vv_half_window;

                        const double oh_for_snr = detail_runner::blind(st) ? 0.0 : oh;

                        auto base_record = [&] {
                            TrialRecord r;
                            r.modulation = std::to_string(m) + "QAM";
                            r.m = m;
                            r.cores = cores;
                            r.d = p.d;
                            r.n = p.n;
                            r.strategy = strategy_name(st);
                            r.iterations = p.iterations;
                            r.oh_pilot_target = oh;
                            r.dnu_hz = pp.dnu_hz;
                            r.symbol_rate_baud = pp.symbol_rate_baud;
                            r.dnu_ts = pp.dnu_ts;
                            r.var_nu = pp.var_nu;
                            r.var_c = pp.var_c;
                            r.var_p = pp.var_p;
                            r.seed = spec.master_seed;
                            return r;
                        };

                        if (spec.required_snr_mode) {
                            const auto t0 = std::chrono::steady_clock::now();
                            TrialRecord r = base_record();
                            auto ber_at = [&](double db) {
                                PointParams q = p;
                                q.sigma2 = ebn0_to_noise_var(db, 1.0, oh_for_snr, m);
                                PointResult pr = run_point(q, workers);
                                r.oh_pilot_achieved = pr.achieved_oh;
                                return pr.ber();
                            };
                            r.required_ebn0_db =
                                required_ebn0(ber_at, spec.target_ber, spec.bracket_lo_db,
                                              spec.bracket_hi_db, spec.tol_db);
                            r.target_ber = spec.target_ber;
                            r.wall_time_s = std::chrono::duration<double>(
                                                std::chrono::steady_clock::now() - t0)
                                                .count();
                            records.push_back(std::move(r));
                        } else {
                            for (double db : spec.ebn0_db) {
                                const auto t0 = std::chrono::steady_clock::now();
                                PointParams q = p;
                                q.sigma2 = ebn0_to_noise_var(db, 1.0, oh_for_snr, m);
                                PointResult pr = run_point(q, workers);
                                TrialRecord r = base_record();
                                r.ebn0_db = db;
                                r.bits = pr.bits;
                                r.bit_errors = pr.errors;
                                r.ber = pr.ber();
                                r.oh_pilot_achieved = pr.achieved_oh;
                                if (p.compute_air) r.air = pr.air(build_qam(m, 1.0).bits_per_symbol, pr.achieved_oh);
                                r.underpowered = pr.errors < spec.error_target;
                                r.wall_time_s = std::chrono::duration<double>(
                                                    std::chrono::steady_clock::now() - t0)
                                                    .count();
                                records.push_back(std::move(r));
                            }
                        }
                    }
                }
    return records;
}

// ---------------------------------------------------------------------------
// Result emission

namespace detail_runner {

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail_runner

inline const char* csv_header() {
    return "modulation,M,cores,D,N,strategy,iterations,oh_pilot_target,oh_pilot_achieved,"
           "dnu_hz,symbol_rate_baud,dnu_ts,var_nu,var_c,var_p,ebn0_db,bits,bit_errors,ber,"
           "air_bits_per_sym_per_pol,required_ebn0_db,target_ber,seed,wall_time_s,underpowered";
}

inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
    if (records.empty()) throw std::invalid_argument("write_csv: no records");
    using detail_runner::fmt_double;
    os << csv_header() << "\n";
    for (const auto& r : records) {
        os << r.modulation << ',' << r.m << ',' << r.cores << ',' << r.d << ',' << r.n << ','
           << r.strategy << ',' << r.iterations << ',' << fmt_double(r.oh_pilot_target) << ','
           << fmt_double(r.oh_pilot_achieved) << ',' << fmt_double(r.dnu_hz) << ','
           << fmt_double(r.symbol_rate_baud) << ',' << fmt_double(r.dnu_ts) << ','
           << fmt_double(r.var_nu) << ',' << fmt_double(r.var_c) << ',' << fmt_double(r.var_p)
           << ',' << fmt_double(r.ebn0_db) << ',' << r.bits << ',' << r.bit_errors << ','
           << fmt_double(r.ber) << ',' << fmt_double(r.air) << ','
           << fmt_double(r.required_ebn0_db) << ',' << fmt_double(r.target_ber) << ',' << r.seed
           << ',' << fmt_double(r.wall_time_s) << ',' << (r.underpowered ? "true" : "false")
           << "\n";
    }
}

inline nlohmann::json spec_to_json(const SweepSpec& s) {
    nlohmann::json j;
    j["modulations"] = s.modulations;
    j["cores"] = s.cores;
    j["block_length"] = s.block_length;
    j["oh_pilot"] = s.oh_pilot;
    if (s.required_snr_mode) {
        j["mode"] = "required-snr";
        j["target_ber"] = s.target_ber;
        j["bracket_lo_db"] = s.bracket_lo_db;
        j["bracket_hi_db"] = s.bracket_hi_db;
        j["tol_db"] = s.tol_db;
    } else {
        j["mode"] = "ber";
        j["ebn0_db"] = s.ebn0_db;
    }
    if (!s.dnu_ts.empty()) j["dnu_ts"] = s.dnu_ts;
    if (!s.dnu_hz.empty()) {
        j["dnu_hz"] = s.dnu_hz;
        j["symbol_rate_baud"] = s.symbol_rate_baud;
    }
    if (!s.correlation_ratio.empty()) {
        j["correlation_ratio"] = s.correlation_ratio;
        j["correlation_total"] = s.correlation_total;
    }
    j["ratio_c"] = s.ratio_c;
    j["ratio_p"] = s.ratio_p;
    std::vector<std::string> sts;
    for (Strategy st : s.strategies) sts.push_back(strategy_name(st));
    j["strategies"] = sts;
    j["iterations"] = s.iterations;
    j["seed"] = s.master_seed;
    j["error_target"] = s.error_target;
    j["max_frames"] = s.max_frames;
    j["compute_air"] = s.compute_air;
    j["bps_test_phases"] = s.bps_test_phases;
    j["bps_half_window"] = s.bps_half_window;
    j["vv_half_window"] = s.vv_half_window;
    // resolved variances, so outputs are self-describing
    nlohmann::json pts = nlohmann::json::array();
    for (const PhasePoint& p : s.resolve_phase_points()) {
        nlohmann::json pj;
        pj["dnu_ts"] = p.dnu_ts;
        pj["var_nu"] = p.var_nu;
        pj["var_c"] = p.var_c;
        pj["var_p"] = p.var_p;
        if (!std::isnan(p.dnu_hz)) pj["dnu_hz"] = p.dnu_hz;
        pts.push_back(pj);
    }
    j["resolved_phase_points"] = pts;
    return j;
}

inline nlohmann::json record_to_json(const TrialRecord& r) {
    nlohmann::json j;
    j["modulation"] = r.modulation;
    j["M"] = r.m;
    j["cores"] = r.cores;
    j["D"] = r.d;
    j["N"] = r.n;
    j["strategy"] = r.strategy;
    j["iterations"] = r.iterations;
    j["oh_pilot_target"] = r.oh_pilot_target;
    j["oh_pilot_achieved"] = r.oh_pilot_achieved;
    if (!std::isnan(r.dnu_hz)) j["dnu_hz"] = r.dnu_hz;
    if (!std::isnan(r.symbol_rate_baud)) j["symbol_rate_baud"] = r.symbol_rate_baud;
    j["dnu_ts"] = r.dnu_ts;
    j["var_nu"] = r.var_nu;
    j["var_c"] = r.var_c;
    j["var_p"] = r.var_p;
    if (!std::isnan(r.ebn0_db)) j["ebn0_db"] = r.ebn0_db;
    j["bits"] = r.bits;
    j["bit_errors"] = r.bit_errors;
    if (!std::isnan(r.ber)) j["ber"] = r.ber;
    if (!std::isnan(r.air)) j["air_bits_per_sym_per_pol"] = r.air;
    if (!std::isnan(r.required_ebn0_db)) j["required_ebn0_db"] = r.required_ebn0_db;
    if (!std::isnan(r.target_ber)) j["target_ber"] = r.target_ber;
    j["seed"] = r.seed;
    j["wall_time_s"] = r.wall_time_s;
    j["underpowered"] = r.underpowered;
    return j;
}

inline TrialRecord record_from_json(const nlohmann::json& j) {
    TrialRecord r;
    r.modulation = j.at("modulation").get<std::string>();
    r.m = j.at("M").get<int>();
    r.cores = j.at("cores").get<int>();
    r.d = j.at("D").get<int>();
    r.n = j.at("N").get<int>();
    r.strategy = j.at("strategy").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.oh_pilot_target = j.at("oh_pilot_target").get<double>();
    r.oh_pilot_achieved = j.at("oh_pilot_achieved").get<double>();
    if (j.contains("dnu_hz")) r.dnu_hz = j["dnu_hz"].get<double>();
    if (j.contains("symbol_rate_baud")) r.symbol_rate_baud = j["symbol_rate_baud"].get<double>();
    r.dnu_ts = j.at("dnu_ts").get<double>();
    r.var_nu = j.at("var_nu").get<double>();
    r.var_c = j.at("var_c").get<double>();
    r.var_p = j.at("var_p").get<double>();
    if (j.contains("ebn0_db")) r.ebn0_db = j["ebn0_db"].get<double>();
    r.bits = j.at("bits").get<std::uint64_t>();
    r.bit_errors = j.at("bit_errors").get<std::uint64_t>();
    if (j.contains("ber")) r.ber = j["ber"].get<double>();
    if (j.contains("air_bits_per_sym_per_pol")) r.air = j["air_bits_per_sym_per_pol"].get<double>();
    if (j.contains("required_ebn0_db")) r.required_ebn0_db = j["required_ebn0_db"].get<double>();
    if (j.contains("target_ber")) r.target_ber = j["target_ber"].get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.underpowered = j.at("underpowered").get<bool>();
    return r;
}

inline void write_json(const SweepSpec& spec, const std::vector<TrialRecord>& records,
                       std::ostream& os) {
    if (records.empty()) throw std::invalid_argument("write_json: no records");
    nlohmann::json j;
    j["spec"] = spec_to_json(spec);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    j["results"] = arr;
    os << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Figure recipes: pre-filled sweeps matching the studied scenarios.

inline SweepSpec figure_recipe(const std::string& name) {
    SweepSpec s;
    s.dnu_hz = {200e3};
    s.symbol_rate_baud = 20e9;
    s.ratio_c = 1e3;
    s.ratio_p = 1e6;
    if (name == "fig3") {
        s.modulations = {256};
        s.cores = {1};
        s.strategies = {Strategy::PerChannel, Strategy::Bps};
        s.iterations = 20;
        s.ebn0_db = {19, 20, 21, 22, 23, 24, 25, 26};
    } else if (name == "fig4") {
        s.modulations = {16, 64, 256, 1024};
        s.cores = {1, 3, 10};
        s.oh_pilot = {0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.12, 0.16, 0.20};
        s.strategies = {Strategy::PerChannel, Strategy::Joint};
        s.required_snr_mode = true;
        s.bracket_lo_db = 2.0;
        s.bracket_hi_db = 30.0;
    } else if (name == "fig5c") {
        s.modulations = {16};
        s.cores = {1, 3, 10};
        s.dnu_hz.clear();
        s.correlation_ratio = {1e-2, 1e-1, 1, 1e1, 1e2, 1e3, 1e4, 1e5};
        s.correlation_total = 6.3e-5;
        s.strategies = {Strategy::PerChannel, Strategy::Joint};
        s.required_snr_mode = true;
        s.bracket_lo_db = 2.0;
        s.bracket_hi_db = 25.0;
    } else if (name == "fig6" || name == "table1") {
        s.modulations = {16, 64, 256, 1024};
        s.cores = {10};
        s.strategies = {Strategy::PerChannel, Strategy::Joint};
        s.ebn0_db = {6, 8, 10, 12, 14, 16, 18, 20, 22, 24};
    } else if (name == "fig7") {
        s.modulations = {16, 1024};
        s.cores = {10};
        s.strategies = {Strategy::PerChannel, Strategy::Joint};
        s.compute_air = true;
        s.ebn0_db = {6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26};
    } else if (name == "fig8") {
        s.modulations = {16};
        s.cores = {1, 3, 10};
        s.dnu_hz = {50e3, 100e3, 200e3, 400e3, 800e3, 1.6e6};
        s.strategies = {Strategy::Joint};
        s.required_snr_mode = true;
        s.bracket_lo_db = 2.0;
        s.bracket_hi_db = 25.0;
    } else {
        throw std::invalid_argument("unknown figure recipe: " + name);
    }
    return s;
}

} // namespace jcpe

#endif
