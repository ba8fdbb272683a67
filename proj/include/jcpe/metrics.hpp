#ifndef JCPE_METRICS_HPP
#define JCPE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jcpe {

/// Eb/N0 (dB) to complex-noise variance per real dimension, charging the
/// pilot overhead as an SNR penalty: sigma^2 = Es (1 + OH) / (2 log2(M) EbN0).
inline double ebn0_to_noise_var(double ebn0_db, double es, double oh_pilot, int order) {
    if (order < 4 || oh_pilot < 0.0)
        throw std::invalid_argument("ebn0_to_noise_var: bad order or overhead");
    int m = 0;
    while ((1 << m) < order) ++m;
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    return es * (1.0 + oh_pilot) / (2.0 * m * ebn0);
}

inline double noise_var_to_ebn0_db(double sigma2, double es, double oh_pilot, int order) {
    int m = 0;
    while ((1 << m) < order) ++m;
    return 10.0 * std::log10(es * (1.0 + oh_pilot) / (2.0 * m * sigma2));
}

/// Mergeable bit-error counter with a stopping target.
struct BerAccumulator {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    std::uint64_t target_errors = 10000;

    void add(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
        if (tx.size() != rx.size())
            throw std::invalid_argument("BerAccumulator: bit stream length mismatch");
        for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] ^ rx[i]) & 1u;
        bits += tx.size();
    }
    void add_counts(std::uint64_t b, std::uint64_t e) {
        bits += b;
        errors += e;
    }
    void merge(const BerAccumulator& other) { add_counts(other.bits, other.errors); }
    bool done() const { return errors >= target_errors; }
    double ber() const {
        if (bits == 0) throw std::logic_error("BerAccumulator: no bits accumulated");
        return static_cast<double>(errors) / static_cast<double>(bits);
    }
};

/// Pre-FEC BER thresholds and the FEC overhead they correspond to.
struct FecCodebook {
    // (pre-FEC BER threshold, OH_FEC), thresholds increasing with OH
    std::vector<std::pair<double, double>> entries;

    static FecCodebook defaults() {
        FecCodebook cb;
        cb.entries = {{5.16e-3, 0.0625}, {7.04e-3, 0.0714}, {9.29e-3, 0.0833},
                      {1.44e-2, 0.20},   {1.71e-2, 0.25},   {2.24e-2, 0.3333}};
        return cb;
    }
};

/// Bitwise achievable rate from exact LLRs (positive favors bit 0),
/// discounted by the pilot rate loss through the data fraction 1/(1+OH).
/// Input spans cover the log2(M) LLRs of every data symbol. Returns
/// bits/symbol per polarization, clipped at 0.
inline double gmi_air(std::span<const double> llrs, std::span<const std::uint8_t> tx_bits,
                      int bits_per_symbol, double oh_pilot) {
    if (llrs.empty() || llrs.size() != tx_bits.size())
        throw std::invalid_argument("gmi_air: empty input or LLR/bit length mismatch");
    auto softplus2 = [](double z) {
        if (z > 40.0) return z / std::numbers::ln2;
        return std::log1p(std::exp(z)) / std::numbers::ln2;
    };
    double penalty = 0.0;
    for (std::size_t i = 0; i < llrs.size(); ++i)
        penalty += softplus2(tx_bits[i] ? llrs[i] : -llrs[i]);
    double gmi = bits_per_symbol * (1.0 - penalty / static_cast<double>(llrs.size()));
    gmi = std::max(0.0, gmi);
    return gmi / (1.0 + oh_pilot); // data fraction = 1/(1+OH)
}

/// Bisection for the Eb/N0 (dB) where a monotonically decreasing BER curve
/// crosses target_ber.
inline double required_ebn0(const std::function<double(double)>& ber_at_db, double target_ber,
                            double lo_db, double hi_db, double tol_db = 0.05) {
    if (!(lo_db < hi_db) || !(tol_db > 0.0))
        throw std::invalid_argument("required_ebn0: bad bracket or tolerance");
    const double ber_lo = ber_at_db(lo_db);
    const double ber_hi = ber_at_db(hi_db);
    if (ber_lo < target_ber || ber_hi > target_ber)
        throw std::runtime_error("required_ebn0: bracket does not straddle target (BER at " +
                                 std::to_string(lo_db) + " dB = " + std::to_string(ber_lo) +
                                 ", at " + std::to_string(hi_db) + " dB = " +
                                 std::to_string(ber_hi) + ")");
    double lo = lo_db, hi = hi_db;
    while (hi - lo > tol_db) {
        const double mid = 0.5 * (lo + hi);
        if (ber_at_db(mid) > target_ber)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace jcpe

#endif
