#pragma once

#include "pdsde/bilinear.hpp"

namespace pdsde {

/// Linear damping A (symmetric PSD, kernel span{e_1..e_J}) and additive noise
/// amplitudes sigma_m on each coordinate.
struct DampingSpec {
    int d = 0;
    int J = 0;
    Matrix A;
    Vector sigma;

    // A = diag(0,...,0, rate,...,rate) with the first J entries zero.
    static DampingSpec diagonal(int d, int J, double rate, const Vector& sigma);

    // Checks symmetry, semidefiniteness, the kernel condition and sizes. Throws InvalidParameter.
    void validate() const;
    int forced_modes() const;
    double noise_power() const { return sigma.squaredNorm(); }
};

// Coordinate projections onto the kernel K = span{e_1..e_J} and its complement.
struct KernelSpec {
    int d = 0;
    int J = 0;

    KernelSpec(int d, int J);
    Vector project(const Vector& x) const;
    Vector project_perp(const Vector& x) const;
    Matrix proj_K() const;
    Matrix proj_K_perp() const;
};

}  // namespace pdsde
