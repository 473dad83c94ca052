#include "pdsde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Eigenvalues>

#include "pdsde/errors.hpp"

namespace pdsde {

namespace {

std::uint64_t matrix_hash(const Matrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()) * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_square_finite(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("spectrum needs a square matrix");
    if (!m.allFinite()) throw SpectralFailure("matrix has non-finite entries", matrix_hash(m));
}

Eigen::EigenSolver<Matrix> solve(const Matrix& m, bool vectors) {
    check_square_finite(m);
    Eigen::EigenSolver<Matrix> es;
    // Hessenberg reduction followed by Francis double-shift QR; cap of 100 sweeps per eigenvalue.
    es.setMaxIterations(100);
    es.compute(m, vectors);
    if (es.info() != Eigen::Success) {
        throw SpectralFailure("QR iteration did not converge", matrix_hash(m));
    }
    return es;
}

struct Classified {
    std::vector<EigenClass> classes;
    std::size_t structural = 0;
    int n_stable = 0, n_unstable = 0, n_center = 0;
    double margin = std::numeric_limits<double>::infinity();
    double lambda_min_unstable = std::numeric_limits<double>::infinity();
};

Classified classify(const Eigen::VectorXcd& ev, double tol) {
    Classified c;
    const auto n = static_cast<std::size_t>(ev.size());
    c.classes.resize(n, EigenClass::center);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(ev[i]) < std::abs(ev[c.structural])) c.structural = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double re = ev[i].real();
        if (i == c.structural) {
            c.classes[i] = EigenClass::center;
        } else {
            c.margin = std::min(c.margin, std::abs(re));
            if (std::abs(re) <= tol) c.classes[i] = EigenClass::center;
            else if (re < 0) c.classes[i] = EigenClass::stable;
            else {
                c.classes[i] = EigenClass::unstable;
                c.lambda_min_unstable = std::min(c.lambda_min_unstable, re);
            }
        }
        switch (c.classes[i]) {
            case EigenClass::stable: ++c.n_stable; break;
            case EigenClass::unstable: ++c.n_unstable; break;
            case EigenClass::center: ++c.n_center; break;
        }
    }
    if (n <= 1) c.margin = 0.0;
    return c;
}

bool lex_less(const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

void check_axis(const CoefficientTensor& b, int axis) {
    if (axis < 0 || axis >= b.dim()) {
        throw IndexError("axis " + std::to_string(axis) + " out of range for d=" + std::to_string(b.dim()));
    }
}

}  // namespace

const char* to_string(EigenClass c) {
    switch (c) {
        case EigenClass::stable: return "stable";
        case EigenClass::unstable: return "unstable";
        case EigenClass::center: return "center";
    }
    return "?";
}

Matrix linearization(const CoefficientTensor& b, int axis, double alpha) {
    check_axis(b, axis);
    if (!(alpha > 0.0)) throw InvalidParameter("linearization needs alpha > 0");
    const int d = b.dim();
    Matrix l(d, d);
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) l(k, j) = 2.0 * alpha * b(k, axis, j);
    return l;
}

std::vector<std::complex<double>> spectrum(const Matrix& m) {
    if (m.size() == 0) return {};
    const auto es = solve(m, false);
    std::vector<std::complex<double>> out(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

HyperbolicityReport hyperbolicity_report(const CoefficientTensor& b, double alpha, double tol_center) {
    HyperbolicityReport report;
    report.pass = true;
    report.min_margin = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < b.dim(); ++axis) {
        const Matrix l = linearization(b, axis, alpha);
        const double tol = tol_center > 0.0 ? tol_center : 1e-7 * l.norm();
        const auto es = solve(l, false);
        const Eigen::VectorXcd& ev = es.eigenvalues();
        const Classified c = classify(ev, tol);

        std::vector<std::size_t> order(static_cast<std::size_t>(ev.size()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) { return lex_less(ev[a], ev[b2]); });

        AxisSpectrum rec;
        rec.axis = axis;
        for (std::size_t i : order) {
            rec.eigenvalues.push_back(ev[i]);
            rec.classes.push_back(c.classes[i]);
        }
        rec.n_stable = c.n_stable;
        rec.n_unstable = c.n_unstable;
        rec.n_center = c.n_center;
        rec.margin = c.margin;
        report.min_margin = std::min(report.min_margin, rec.margin);
        if (rec.n_center != 1 || rec.n_unstable < 1) report.pass = false;
        report.axes.push_back(std::move(rec));
    }
    return report;
}

SpectralSplit spectral_split(const CoefficientTensor& b, int axis, double alpha, double tol_center) {
    const Matrix l = linearization(b, axis, alpha);
    const int d = b.dim();
    const double tol = tol_center > 0.0 ? tol_center : 1e-7 * l.norm();
    const auto es = solve(l, true);
    const Eigen::VectorXcd& ev = es.eigenvalues();
    const Eigen::MatrixXcd& vecs = es.eigenvectors();
    const Classified c = classify(ev, tol);
    if (c.n_center != 1 || c.n_unstable < 1) {
        throw NotHyperbolic("axis " + std::to_string(axis + 1) + " has " + std::to_string(c.n_center) +
                            " center and " + std::to_string(c.n_unstable) + " unstable eigenvalues");
    }

    // Real bases: real eigenvalues contribute Re(v); a conjugate pair contributes Re(v), Im(v) once.
    std::vector<Vector> cols_s, cols_u, cols_c;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        auto& bucket = c.classes[static_cast<std::size_t>(i)] == EigenClass::stable     ? cols_s
                       : c.classes[static_cast<std::size_t>(i)] == EigenClass::unstable ? cols_u
                                                                                         : cols_c;
        if (ev[i].imag() == 0.0) {
            bucket.push_back(vecs.col(i).real());
        } else if (ev[i].imag() > 0.0) {
            bucket.push_back(vecs.col(i).real());
            bucket.push_back(vecs.col(i).imag());
        }
    }
    auto stack = [d](const std::vector<Vector>& cols) {
        Matrix m(d, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
        return m;
    };
    SpectralSplit s;
    s.axis = axis;
    s.alpha = alpha;
    s.eigenvalues = std::vector<std::complex<double>>(ev.begin(), ev.end());
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), lex_less);
    s.basis_s = stack(cols_s);
    s.basis_u = stack(cols_u);
    s.basis_c = stack(cols_c);
    s.margin = c.margin;
    s.lambda_min_unstable = c.lambda_min_unstable;

    Matrix full(d, d);
    full << s.basis_s, s.basis_u, s.basis_c;
    Eigen::FullPivLU<Matrix> lu(full);
    if (!lu.isInvertible()) throw NotHyperbolic("eigenvector basis is singular (defective linearization)");
    const Matrix inv = lu.inverse();
    const auto ns = s.basis_s.cols(), nu = s.basis_u.cols(), nc = s.basis_c.cols();
    s.proj_s = s.basis_s * inv.topRows(ns);
    s.proj_u = s.basis_u * inv.middleRows(ns, nu);
    s.proj_c = s.basis_c * inv.bottomRows(nc);
    return s;
}

}  // namespace pdsde
