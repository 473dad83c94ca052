#pragma once

#include <map>
#include <vector>

#include "pdsde/bilinear.hpp"

namespace pdsde {

/// Polynomial vector field on R^d stored as monomial exponent -> coefficient vector.
/// Lie brackets are computed exactly by symbolic differentiation.
class PolyField {
public:
    using Exponent = std::vector<int>;

    explicit PolyField(int d) : d_(d) {}

    static PolyField constant(const Vector& v);
    static PolyField linear(const Matrix& m);            // x -> M x
    static PolyField quadratic(const CoefficientTensor& b);  // x -> B(x, x)

    int dim() const noexcept { return d_; }
    int degree() const;
    bool is_zero() const noexcept { return terms_.empty(); }
    const std::map<Exponent, Vector>& terms() const noexcept { return terms_; }

    Vector evaluate(const Vector& x) const;
    PolyField partial(int m) const;

    PolyField& operator+=(const PolyField& other);
    PolyField& operator-=(const PolyField& other);
    PolyField operator+(const PolyField& other) const { PolyField r = *this; r += other; return r; }
    PolyField operator-(const PolyField& other) const { PolyField r = *this; r -= other; return r; }
    PolyField operator*(double s) const;

    void add_term(const Exponent& e, const Vector& coeff);

private:
    int d_;
    std::map<Exponent, Vector> terms_;
};

// (DY) X: derivative of Y along X.
PolyField directional(const PolyField& y, const PolyField& x);
// [X, Y] = (DY) X - (DX) Y
PolyField bracket(const PolyField& x, const PolyField& y);

}  // namespace pdsde
