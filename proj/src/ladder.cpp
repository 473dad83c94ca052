#include "pdsde/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pdsde/errors.hpp"

namespace pdsde {

namespace {

using DoubleBracket = std::function<Vector(const Vector&, const Vector&)>;

LadderCertificate build_ladder(int d, int i, int j, const DoubleBracket& db) {
    if (i < 0 || i >= d || j < 0 || j >= d) throw IndexError("ladder pair out of range");
    if (i == j) throw InvalidParameter("ladder needs distinct forcing indices");

    std::vector<int> order{i, j};
    for (int m = 0; m < d; ++m) {
        if (m != i && m != j) order.push_back(m);
    }

    LadderCertificate cert;
    cert.i = i;
    cert.j = j;
    cert.vectors.push_back(Vector::Unit(d, i));
    cert.vectors.push_back(Vector::Unit(d, j));
    for (int n = 2; n < d; ++n) {
        Vector w = db(cert.vectors[n - 2], cert.vectors[n - 1]);
        // Forward substitution on rows order[0..n-1]; v_l vanishes on rows order[0..l-1].
        for (int r = 0; r < n; ++r) {
            const Vector& vl = cert.vectors[r];
            const double pivot = vl[order[r]];
            if (std::abs(pivot) <= 1e-14 * vl.norm()) continue;
            const double kappa = w[order[r]] / pivot;
            w -= kappa * vl;
            w[order[r]] = 0.0;
        }
        cert.vectors.push_back(std::move(w));
    }

    Matrix v(d, d);
    double norms = 1.0;
    for (int m = 0; m < d; ++m) {
        v.col(m) = cert.vectors[m];
        norms *= cert.vectors[m].norm();
    }
    cert.G = v.determinant();
    cert.G_normalized = norms > 0.0 ? cert.G / norms : 0.0;
    return cert;
}

}  // namespace

LadderCertificate ladder(const CoefficientTensor& b, int i, int j, BracketConvention convention) {
    const double factor = convention == BracketConvention::exact ? 2.0 : 1.0;
    const int d = b.dim();
    LadderCertificate cert = build_ladder(d, i, j, [&](const Vector& v, const Vector& w) {
        Vector out(d);
        b.bilinear(v.data(), w.data(), out.data());
        return Vector(factor * out);
    });
    cert.convention = convention;
    return cert;
}

LadderCertificate ladder(const PolyField& drift, int i, int j) {
    const int d = drift.dim();
    const Vector origin = Vector::Zero(d);
    return build_ladder(d, i, j, [&](const Vector& v, const Vector& w) {
        const PolyField inner = bracket(PolyField::constant(w), drift);
        return bracket(PolyField::constant(v), inner).evaluate(origin);
    });
}

int ladder_degree(int d) {
    std::vector<int> deg{0, 0};
    for (int n = 2; n < d; ++n) deg.push_back(1 + deg[n - 2] + deg[n - 1]);
    int total = 0;
    for (int m = 0; m < d; ++m) total += deg[m];
    return total;
}

CoefficientTensor witness_tensor(int d) {
    if (d < 3) throw InvalidDimension("witness tensor needs d >= 3");
    const std::vector<Triple> ts = triples(d);
    std::vector<double> free(class_dimension(d), 0.0);
    for (int m = 0; m + 2 < d; ++m) {
        // Triple {m, m+1, m+2}: free slots b^m_{m+1,m+2} = 0 and b^{m+1}_{m,m+2} = -1,
        // so the Jacobi-determined slot b^{m+2}_{m,m+1} equals 1.
        const auto t = static_cast<std::size_t>(std::find(ts.begin(), ts.end(), Triple{m, m + 1, m + 2}) - ts.begin());
        free[2 * t] = 0.0;
        free[2 * t + 1] = -1.0;
    }
    return CoefficientTensor::from_free(d, free);
}

HypoellipticityReport generic_hypoellipticity(const CoefficientTensor& b, double tol) {
    if (!(tol >= 0.0)) throw InvalidParameter("hypoellipticity tolerance must be >= 0");
    HypoellipticityReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    const int d = b.dim();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const LadderCertificate c = ladder(b, i, j);
            PairMargin p{i, j, c.G, c.G_normalized, std::abs(c.G_normalized) > tol};
            report.min_margin = std::min(report.min_margin, std::abs(c.G_normalized));
            report.pairs.push_back(p);
        }
    }
    report.pass = report.min_margin > tol;
    return report;
}

int column_rank(const Matrix& cols, double rel_tol) {
    std::vector<Vector> kept;
    double scale = 0.0;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) scale = std::max(scale, cols.col(c).norm());
    if (scale == 0.0) return 0;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
        const double n = cols.col(c).norm();
        if (n > 1e-14 * scale) kept.push_back(cols.col(c) / n);
    }
    if (kept.empty()) return 0;
    Matrix m(cols.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = kept[c];
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) rank += s[k] > rel_tol * s[0] ? 1 : 0;
    return rank;
}

int numeric_bracket_span(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x,
                         int depth) {
    if (depth < 0) throw DepthError("bracket depth must be >= 0");
    if (depth > 4) throw DepthError("bracket depth " + std::to_string(depth) + " exceeds the limit of 4");
    const int d = b.dim();
    if (damping.d != d || x.size() != d) throw DimensionError("numeric_bracket_span: dimension mismatch");

    const PolyField drift = PolyField::quadratic(b) - PolyField::linear(damping.A) * eps;
    std::vector<PolyField> noise;
    for (int m = 0; m < d; ++m) {
        if (damping.sigma[m] != 0.0) noise.push_back(PolyField::constant(damping.sigma[m] * Vector::Unit(d, m)));
    }
    std::vector<PolyField> generators{drift};
    generators.insert(generators.end(), noise.begin(), noise.end());

    std::vector<PolyField> all = noise;
    std::vector<PolyField> frontier = noise;
    for (int level = 1; level <= depth; ++level) {
        std::vector<PolyField> next;
        for (const PolyField& y : frontier) {
            for (const PolyField& g : generators) {
                PolyField z = bracket(y, g);
                if (!z.is_zero()) next.push_back(std::move(z));
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    Matrix cols(d, static_cast<Eigen::Index>(all.size()));
    for (std::size_t c = 0; c < all.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = all[c].evaluate(x);
    return column_rank(cols);
}

}  // namespace pdsde
