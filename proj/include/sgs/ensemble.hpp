#pragma once

#include <cstdint>
#include <vector>

#include "sgs/guidance.hpp"

namespace sgs {

/// psi(x, t) = sum_j c_j f_j(x, t) over freely evolving Gaussian packets.
struct PacketSuperposition {
    struct Term {
        Complex coefficient;
        FreePacket packet;
    };
    std::vector<Term> terms;

    Complex value(const Vec3& x, double t) const;
    ComplexField sample(const GridSpec& spec, double t) const;
};

/// Draws `count` points from |psi(., t)|^2 by exact rejection against the
/// envelope n sum_j |c_j f_j|^2 (Cauchy-Schwarz). Gaussian terms only.
/// The stream depends only on `seed`.
std::vector<Vec3> sample_density(const PacketSuperposition& psi, double t, std::size_t count, std::uint64_t seed);

struct MarginalTest {
    std::vector<double> edges;  ///< bin edges along the axis, in box coordinates
    std::vector<double> observed;
    std::vector<double> expected;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

/**
 * Pearson test of particle positions (wrapped into the box) against the
 * marginal of |psi|^2 along `axis`, using `bins` equal-probability bins. The
 * marginal between nodes is the trigonometric interpolant of its node values.
 */
MarginalTest chi_square_marginal(std::span<const Vec3> positions, const ComplexField& psi, int axis, int bins);

}  // namespace sgs
