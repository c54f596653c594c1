#pragma once

#include <cstdint>
#include <random>

#include "bcl/numcore.hpp"

namespace bcl {

/// Deterministic random source.  mt19937_64 is bit-exact across platforms and
/// the Gaussian transform is spelled out here, so a seed pins every generated
/// matrix byte-for-byte (std::normal_distribution would not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in (0, 1].
    double uniform_pos()
    {
        return 1.0 - (gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform_pos();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx cgauss() { return cplx(normal(), normal()) / std::sqrt(2.0); }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

CMat gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Haar-distributed unitary: QR of a complex Gaussian with the R-diagonal
/// phases folded into Q.
CMat haar_unitary(Eigen::Index n, Rng& rng);

} // namespace bcl
