#pragma once

#include <vector>

#include "pdsde/bilinear.hpp"
#include "pdsde/damping.hpp"
#include "pdsde/polyfield.hpp"

namespace pdsde {

/// Scalar convention for the double bracket of two constant fields.
///   exact: [v, [w, B]] = 2 B(v, w), the true Lie bracket of x -> B(x,x).
///   unit:  B(v, w), the normalization under which the witness ladder is e_1..e_d.
/// Only the scale of each rung differs; the spanned subspaces are identical.
enum class BracketConvention { exact, unit };

struct LadderCertificate {
    int i = 0;  // 0-based forcing pair
    int j = 1;
    BracketConvention convention = BracketConvention::exact;
    std::vector<Vector> vectors;  // v_1 .. v_d
    double G = 0.0;               // det [v_1 ... v_d]
    double G_normalized = 0.0;    // G / prod |v_m|, in [-1, 1]
};

/// Bracket ladder for the forcing pair (i, j), i != j (0-based).
///
/// v_1 = e_i, v_2 = e_j and, for n >= 3,
///   v_n = DB(v_{n-2}, v_{n-1}) - sum_{l<n} kappa_l v_l,
/// where the kappa_l zero the components o_1..o_{n-1} of the coordinate order
/// o = (i, j, remaining indices ascending). The system for kappa is lower
/// triangular; a vanishing pivot leaves its kappa at zero.
LadderCertificate ladder(const CoefficientTensor& b, int i, int j,
                         BracketConvention convention = BracketConvention::exact);

// Same recursion with the double brackets [v, [w, F]] taken symbolically on an
// arbitrary polynomial drift F (for instance B + eps M x).
LadderCertificate ladder(const PolyField& drift, int i, int j);

// Recursive degree of G as a homogeneous function of b (exact convention).
int ladder_degree(int d);

// Witness tensor: for each m, b^{m+2}_{m,m+1} = 1 and b^{m+1}_{m,m+2} = -1 on the
// triple {m, m+1, m+2}; every other slot of the triples {m, m+1, k} is zero.
CoefficientTensor witness_tensor(int d);

struct PairMargin {
    int i = 0;
    int j = 0;
    double G = 0.0;
    double G_normalized = 0.0;
    bool pass = false;
};

struct HypoellipticityReport {
    std::vector<PairMargin> pairs;  // all ordered pairs i != j
    double min_margin = 0.0;        // min |G_normalized|
    bool pass = false;              // min_margin > tol
};

HypoellipticityReport generic_hypoellipticity(const CoefficientTensor& b, double tol);

/// Rank at x of the vectors collected in the parabolic Hörmander sets V_0..V_depth,
/// with V_0 = {sigma_m e_m : sigma_m != 0} and each level adding [Y, X] for Y in the
/// previous level and X in {X_0, sigma_m e_m}, X_0 = B(x,x) - eps A x.
/// Throws DepthError for depth > 4.
int numeric_bracket_span(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x,
                         int depth);

// Numerical rank of the columns after normalizing each to unit length.
int column_rank(const Matrix& cols, double rel_tol = 1e-9);

}  // namespace pdsde
