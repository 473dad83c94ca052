#pragma once

#include <complex>
#include <vector>

#include "pdsde/bilinear.hpp"

namespace pdsde {

// Linearization of x -> B(x,x) at alpha * e_axis: L(k, j) = 2 alpha b^k_{axis, j}.
Matrix linearization(const CoefficientTensor& b, int axis, double alpha = 1.0);

// Eigenvalues with multiplicity sorted by (Re, Im). Throws SpectralFailure.
std::vector<std::complex<double>> spectrum(const Matrix& m);

enum class EigenClass { stable, unstable, center };
const char* to_string(EigenClass c);

struct AxisSpectrum {
    int axis = 0;
    std::vector<std::complex<double>> eigenvalues;
    std::vector<EigenClass> classes;  // parallel to eigenvalues
    int n_stable = 0;
    int n_unstable = 0;
    int n_center = 0;
    double margin = 0.0;  // min |Re| over the non-structural eigenvalues
};

struct HyperbolicityReport {
    std::vector<AxisSpectrum> axes;
    double min_margin = 0.0;
    bool pass = false;  // every axis: exactly one center eigenvalue and at least one unstable
};

// `tol_center <= 0` selects the default 1e-7 * ||L||_F per axis.
HyperbolicityReport hyperbolicity_report(const CoefficientTensor& b, double alpha = 1.0, double tol_center = 0.0);

struct SpectralSplit {
    int axis = 0;
    double alpha = 1.0;
    std::vector<std::complex<double>> eigenvalues;
    Matrix basis_s, basis_u, basis_c;  // columns span E_s, E_u, E_c
    Matrix proj_s, proj_u, proj_c;
    double margin = 0.0;
    // Smallest positive real part among unstable eigenvalues.
    double lambda_min_unstable = 0.0;
};

// Throws NotHyperbolic when the axis does not pass the hyperbolicity check.
SpectralSplit spectral_split(const CoefficientTensor& b, int axis, double alpha = 1.0, double tol_center = 0.0);

}  // namespace pdsde
