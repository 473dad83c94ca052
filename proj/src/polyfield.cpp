#include "pdsde/polyfield.hpp"

#include <cmath>

#include "pdsde/errors.hpp"

namespace pdsde {

void PolyField::add_term(const Exponent& e, const Vector& coeff) {
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        if (coeff.cwiseAbs().maxCoeff() != 0.0) terms_.emplace(e, coeff);
        return;
    }
    it->second += coeff;
    if (it->second.cwiseAbs().maxCoeff() == 0.0) terms_.erase(it);
}

PolyField PolyField::constant(const Vector& v) {
    PolyField f(static_cast<int>(v.size()));
    f.add_term(Exponent(static_cast<std::size_t>(v.size()), 0), v);
    return f;
}

PolyField PolyField::linear(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("linear field needs a square matrix");
    const int d = static_cast<int>(m.rows());
    PolyField f(d);
    for (int j = 0; j < d; ++j) {
        Exponent e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(j)] = 1;
        f.add_term(e, m.col(j));
    }
    return f;
}

PolyField PolyField::quadratic(const CoefficientTensor& b) {
    const int d = b.dim();
    PolyField f(d);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Vector c(d);
            for (int i = 0; i < d; ++i) c[i] = 2.0 * b(i, j, k);
            Exponent e(static_cast<std::size_t>(d), 0);
            e[static_cast<std::size_t>(j)] = 1;
            e[static_cast<std::size_t>(k)] = 1;
            f.add_term(e, c);
        }
    }
    return f;
}

int PolyField::degree() const {
    int deg = -1;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int p : e) s += p;
        deg = std::max(deg, s);
    }
    return deg;
}

Vector PolyField::evaluate(const Vector& x) const {
    if (x.size() != d_) throw DimensionError("PolyField::evaluate: dimension mismatch");
    Vector out = Vector::Zero(d_);
    for (const auto& [e, c] : terms_) {
        double mono = 1.0;
        for (int m = 0; m < d_; ++m) {
            for (int p = 0; p < e[static_cast<std::size_t>(m)]; ++p) mono *= x[m];
        }
        out += mono * c;
    }
    return out;
}

PolyField PolyField::partial(int m) const {
    PolyField f(d_);
    for (const auto& [e, c] : terms_) {
        const int p = e[static_cast<std::size_t>(m)];
        if (p == 0) continue;
        Exponent e2 = e;
        e2[static_cast<std::size_t>(m)] = p - 1;
        f.add_term(e2, static_cast<double>(p) * c);
    }
    return f;
}

PolyField& PolyField::operator+=(const PolyField& other) {
    for (const auto& [e, c] : other.terms_) add_term(e, c);
    return *this;
}

PolyField& PolyField::operator-=(const PolyField& other) {
    for (const auto& [e, c] : other.terms_) add_term(e, -c);
    return *this;
}

PolyField PolyField::operator*(double s) const {
    PolyField f(d_);
    if (s == 0.0) return f;
    for (const auto& [e, c] : terms_) f.terms_.emplace(e, s * c);
    return f;
}

PolyField directional(const PolyField& y, const PolyField& x) {
    if (x.dim() != y.dim()) throw DimensionError("directional: dimension mismatch");
    const int d = x.dim();
    PolyField out(d);
    for (int m = 0; m < d; ++m) {
        const PolyField dy = y.partial(m);
        if (dy.is_zero()) continue;
        for (const auto& [ex, cx] : x.terms()) {
            const double xm = cx[m];
            if (xm == 0.0) continue;
            for (const auto& [ey, cy] : dy.terms()) {
                PolyField::Exponent e(static_cast<std::size_t>(d));
                for (std::size_t q = 0; q < e.size(); ++q) e[q] = ex[q] + ey[q];
                out.add_term(e, xm * cy);
            }
        }
    }
    return out;
}

PolyField bracket(const PolyField& x, const PolyField& y) {
    PolyField out = directional(y, x);
    out -= directional(x, y);
    return out;
}

}  // namespace pdsde
