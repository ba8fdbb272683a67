#ifndef JCPE_CONSTELLATION_HPP
#define JCPE_CONSTELLATION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

namespace jcpe {

using cplx = std::complex<double>;

/// Gray-mapped square M-QAM, normalized to zero mean and average symbol
/// energy Es. Point index a*side+b maps to amplitude (level[a] + j*level[b]);
/// the label is the per-axis binary-reflected Gray code of (a, b) with the
/// most-significant half of the bits on the I axis.
struct Constellation {
    int order = 0;               // M
    int bits_per_symbol = 0;     // log2(M)
    int side = 0;                // sqrt(M)
    double es = 0.0;             // average symbol energy
    double step = 0.0;           // spacing between adjacent PAM levels
    std::vector<cplx> points;
    std::vector<std::uint32_t> labels;
    std::vector<int> label_to_index; // inverse of labels

    cplx point_of_label(std::uint32_t lab) const { return points[label_to_index[lab]]; }
};

namespace detail {

inline std::uint32_t gray_encode(std::uint32_t n) { return n ^ (n >> 1); }

inline int int_log2(int m) {
    int b = 0;
    while ((1 << b) < m) ++b;
    return b;
}

} // namespace detail

inline Constellation build_qam(int m, double es) {
    if (m != 4 && m != 16 && m != 64 && m != 256 && m != 1024)
        throw std::invalid_argument("build_qam: unsupported order M=" + std::to_string(m) +
                                    " (need one of 4, 16, 64, 256, 1024)");
    if (!(es > 0.0))
        throw std::invalid_argument("build_qam: symbol energy must be positive");

    Constellation c;
    c.order = m;
    c.bits_per_symbol = detail::int_log2(m);
    c.side = 1 << (c.bits_per_symbol / 2);
    c.es = es;
    // Per-axis energy of levels +-1, +-3, ... is (side^2-1)/3.
    c.step = std::sqrt(3.0 * es / (2.0 * (static_cast<double>(c.side) * c.side - 1.0)));

    const int half_bits = c.bits_per_symbol / 2;
    c.points.resize(m);
    c.labels.resize(m);
    c.label_to_index.assign(m, -1);
    for (int a = 0; a < c.side; ++a) {
        const double re = (2 * a + 1 - c.side) * c.step;
        for (int b = 0; b < c.side; ++b) {
            const double im = (2 * b + 1 - c.side) * c.step;
            const int idx = a * c.side + b;
            c.points[idx] = cplx(re, im);
            const std::uint32_t lab =
                (detail::gray_encode(static_cast<std::uint32_t>(a)) << half_bits) |
                detail::gray_encode(static_cast<std::uint32_t>(b));
            c.labels[idx] = lab;
            c.label_to_index[lab] = idx;
        }
    }
    return c;
}

/// Map a bit stream (values 0/1) to symbols, log2(M) bits per symbol, MSB first.
inline std::vector<cplx> map_bits(const Constellation& c, std::span<const std::uint8_t> bits) {
    const int m = c.bits_per_symbol;
    if (bits.size() % static_cast<std::size_t>(m) != 0)
        throw std::invalid_argument("map_bits: bit count not divisible by bits per symbol");
    std::vector<cplx> out;
    out.reserve(bits.size() / m);
    for (std::size_t i = 0; i < bits.size(); i += m) {
        std::uint32_t lab = 0;
        for (int b = 0; b < m; ++b) lab = (lab << 1) | (bits[i + b] & 1u);
        out.push_back(c.point_of_label(lab));
    }
    return out;
}

/// Exact nearest-point decision; ties broken toward the lowest point index.
inline int demap_hard_index(const Constellation& c, cplx y) {
    int best = 0;
    double best_d = std::norm(y - c.points[0]);
    for (int i = 1; i < c.order; ++i) {
        const double d = std::norm(y - c.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline std::pair<cplx, std::uint32_t> demap_hard(const Constellation& c, cplx y) {
    const int i = demap_hard_index(c, y);
    return {c.points[i], c.labels[i]};
}

/// O(1) nearest-point index via per-axis quantization. Agrees with
/// demap_hard_index away from exact decision boundaries.
inline int slice_index(const Constellation& c, cplx y) {
    auto quant = [&](double v) {
        int a = static_cast<int>(std::floor(v / (2.0 * c.step) + 0.5 * c.side));
        return std::clamp(a, 0, c.side - 1);
    };
    return quant(y.real()) * c.side + quant(y.imag());
}

inline void append_label_bits(const Constellation& c, std::uint32_t lab,
                              std::vector<std::uint8_t>& out) {
    for (int b = c.bits_per_symbol - 1; b >= 0; --b)
        out.push_back(static_cast<std::uint8_t>((lab >> b) & 1u));
}

/// Exact bitwise LLRs under AWGN with variance sigma2 per real dimension.
/// Positive LLR favors bit value 0. Computed with max subtraction.
inline std::vector<double> bit_llrs_exact(const Constellation& c, cplx y, double sigma2) {
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("bit_llrs_exact: noise variance must be positive");
    const int m = c.bits_per_symbol;
    std::vector<double> metric(c.order);
    double mmax = -1e300;
    for (int i = 0; i < c.order; ++i) {
        metric[i] = -std::norm(y - c.points[i]) / (2.0 * sigma2);
        mmax = std::max(mmax, metric[i]);
    }
    std::vector<double> llrs(m);
    for (int b = 0; b < m; ++b) {
        const std::uint32_t bit = 1u << (m - 1 - b);
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < c.order; ++i) {
            const double e = std::exp(metric[i] - mmax);
            if (c.labels[i] & bit)
                s1 += e;
            else
                s0 += e;
        }
        llrs[b] = std::log(s0) - std::log(s1);
    }
    return llrs;
}

/// Exact bit-error probability of Gray-mapped square QAM over AWGN at the
/// given linear Eb/N0, by enumerating the per-axis PAM decision intervals.
inline double theory_ber_awgn(const Constellation& c, double ebn0_linear) {
    const int m = c.bits_per_symbol;
    const double sigma2 = c.es / (2.0 * m * ebn0_linear); // per real dimension
    const double sigma = std::sqrt(sigma2);
    const int side = c.side;
    const int half_bits = m / 2;

    std::vector<double> level(side);
    for (int a = 0; a < side; ++a) level[a] = (2 * a + 1 - side) * c.step;

    auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    // P(y in (lo, hi) | x), y = x + N(0, sigma^2)
    auto interval_prob = [&](double x, double lo, double hi) {
        const double phi_hi = std::isinf(hi) ? 1.0 : phi((hi - x) / sigma);
        const double phi_lo = std::isinf(lo) ? 0.0 : phi((lo - x) / sigma);
        return phi_hi - phi_lo;
    };

    double bit_err_sum = 0.0; // summed over one axis's bits, averaged over levels
    for (int j = 0; j < half_bits; ++j) {
        const std::uint32_t bit = 1u << (half_bits - 1 - j);
        double pj = 0.0;
        for (int a = 0; a < side; ++a) {
            const std::uint32_t tx_bit = detail::gray_encode(static_cast<std::uint32_t>(a)) & bit;
            for (int b = 0; b < side; ++b) {
                if ((detail::gray_encode(static_cast<std::uint32_t>(b)) & bit) == tx_bit) continue;
                const double lo = (b == 0) ? -std::numeric_limits<double>::infinity()
                                           : 0.5 * (level[b - 1] + level[b]);
                const double hi = (b == side - 1) ? std::numeric_limits<double>::infinity()
                                                  : 0.5 * (level[b] + level[b + 1]);
                pj += interval_prob(level[a], lo, hi);
            }
        }
        bit_err_sum += pj / side;
    }
    // Both axes are symmetric, so the average over all m bits equals the
    // average over one axis's half_bits.
    return bit_err_sum / half_bits;
}

} // namespace jcpe

#endif
