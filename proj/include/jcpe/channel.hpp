#ifndef JCPE_CHANNEL_HPP
#define JCPE_CHANNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "jcpe/constellation.hpp"
#include "jcpe/rng.hpp"

namespace jcpe {

/// Correlated random-walk phase-noise model for D spatial channels
/// (two polarizations per core; channels ordered (x,1),(y,1),(x,2),...).
/// The phase in each channel is the sum of a walk common to all channels,
/// a per-core walk, and a per-polarization walk with per-symbol increment
/// variances var_nu, var_c and var_p respectively.
struct PhaseModel {
    int channels = 2; // D, even
    double var_nu = 0.0;
    double var_c = 0.0;
    double var_p = 0.0;

    void validate() const {
        if (channels < 2 || channels % 2 != 0)
            throw std::invalid_argument("PhaseModel: channel count must be even and >= 2");
        if (var_nu < 0.0 || var_c < 0.0 || var_p < 0.0)
            throw std::invalid_argument("PhaseModel: variances must be non-negative");
    }

    double total_per_channel_variance() const { return var_nu + var_c + var_p; }
};

inline double linewidth_to_var(double dnu_hz, double symbol_rate_baud) {
    return 2.0 * std::numbers::pi * dnu_hz / symbol_rate_baud;
}

/// D x D covariance of the joint phase increment: diagonal entries
/// var_nu+var_c+var_p, intra-core off-diagonals var_nu+var_c, everything
/// else var_nu.
inline Eigen::MatrixXd build_covariance(const PhaseModel& pm) {
    pm.validate();
    const int d = pm.channels;
    Eigen::MatrixXd q = Eigen::MatrixXd::Constant(d, d, pm.var_nu);
    for (int i = 0; i < d; i += 2) {
        q(i, i + 1) += pm.var_c;
        q(i + 1, i) += pm.var_c;
        q(i, i) += pm.var_c + pm.var_p;
        q(i + 1, i + 1) += pm.var_c + pm.var_p;
    }
    return q;
}

/// Sample a D x N unwrapped phase-noise realization. Each of the three
/// components starts at an independent U[0,2pi) value and evolves as a
/// random walk; the two polarizations of a core share the identical core
/// walk.
inline Eigen::MatrixXd sample_phase_noise(const PhaseModel& pm, int n, rng::Engine& gen) {
    pm.validate();
    if (n < 1) throw std::invalid_argument("sample_phase_noise: need N >= 1");
    const int d = pm.channels;
    const int cores = d / 2;
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> g_nu(0.0, std::sqrt(pm.var_nu));
    std::normal_distribution<double> g_c(0.0, std::sqrt(pm.var_c));
    std::normal_distribution<double> g_p(0.0, std::sqrt(pm.var_p));

    Eigen::VectorXd common(n);
    common(0) = uni(gen);
    for (int k = 1; k < n; ++k) common(k) = common(k - 1) + (pm.var_nu > 0 ? g_nu(gen) : 0.0);

    Eigen::MatrixXd core(cores, n);
    for (int j = 0; j < cores; ++j) {
        core(j, 0) = uni(gen);
        for (int k = 1; k < n; ++k) core(j, k) = core(j, k - 1) + (pm.var_c > 0 ? g_c(gen) : 0.0);
    }

    Eigen::MatrixXd theta(d, n);
    for (int i = 0; i < d; ++i) {
        double pol = uni(gen);
        for (int k = 0; k < n; ++k) {
            if (k > 0 && pm.var_p > 0) pol += g_p(gen);
            theta(i, k) = common(k) + core(i / 2, k) + pol;
        }
    }
    return theta;
}

/// r = s .* exp(j theta) + n, with complex Gaussian noise of variance
/// noise_var(i) per real dimension in channel i.
inline Eigen::MatrixXcd apply_channel(const Eigen::MatrixXcd& symbols,
                                      const Eigen::MatrixXd& phases,
                                      const Eigen::VectorXd& noise_var, rng::Engine& gen) {
    const int d = static_cast<int>(symbols.rows());
    const int n = static_cast<int>(symbols.cols());
    if (phases.rows() != d || phases.cols() != n || noise_var.size() != d)
        throw std::invalid_argument("apply_channel: shape mismatch");
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd r(d, n);
    for (int i = 0; i < d; ++i) {
        const double sigma = std::sqrt(noise_var(i));
        for (int k = 0; k < n; ++k) {
            const cplx rot(std::cos(phases(i, k)), std::sin(phases(i, k)));
            cplx noise(0.0, 0.0);
            if (sigma > 0.0) noise = cplx(sigma * g(gen), sigma * g(gen));
            r(i, k) = symbols(i, k) * rot + noise;
        }
    }
    return r;
}

/// One simulated transmission block.
struct Frame {
    int channels = 0;
    int length = 0;
    Eigen::MatrixXcd symbols;
    Eigen::MatrixXd phases;
    Eigen::MatrixXcd received;
    Eigen::VectorXd noise_var;
};

} // namespace jcpe

#endif
