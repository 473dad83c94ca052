#include "pdsde/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pdsde/errors.hpp"

namespace pdsde {

namespace {

void require_class_dim(int d) {
    if (d < 3) throw InvalidDimension("constraint class needs d >= 3, got " + std::to_string(d));
}

void require_len(const Vector& v, int d, const char* name) {
    if (v.size() != d) {
        throw DimensionError(std::string(name) + " has length " + std::to_string(v.size()) +
                             ", expected " + std::to_string(d));
    }
}

}  // namespace

std::size_t class_dimension(int d) {
    if (d < 3) return 0;
    const auto n = static_cast<std::size_t>(d);
    return n * (n - 1) * (n - 2) / 3;
}

RawTensor::RawTensor(int d) : d_(d) {
    if (d < 1) throw InvalidDimension("raw tensor needs d >= 1");
    data_.assign(static_cast<std::size_t>(d) * d * d, 0.0);
}

double RawTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double RawTensor::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

CoefficientTensor::CoefficientTensor(int d, std::vector<double> packed)
    : d_(d), pairs_(static_cast<std::size_t>(d) * (d - 1) / 2), packed_(std::move(packed)) {
    for (double v : packed_) max_abs_ = std::max(max_abs_, std::abs(v));
}

std::size_t CoefficientTensor::pair_index(int j, int k) const noexcept {
    return static_cast<std::size_t>(j) * (2 * d_ - j - 1) / 2 + static_cast<std::size_t>(k - j - 1);
}

CoefficientTensor CoefficientTensor::zero(int d) {
    require_class_dim(d);
    const std::size_t pairs = static_cast<std::size_t>(d) * (d - 1) / 2;
    return CoefficientTensor(d, std::vector<double>(pairs * d, 0.0));
}

CoefficientTensor CoefficientTensor::from_free(int d, std::span<const double> free) {
    require_class_dim(d);
    if (free.size() != class_dimension(d)) {
        throw DimensionError("expected " + std::to_string(class_dimension(d)) + " free coordinates, got " +
                             std::to_string(free.size()));
    }
    CoefficientTensor b = zero(d);
    std::size_t t = 0;
    for (const Triple& tr : triples(d)) {
        const double a = free[2 * t];
        const double c = free[2 * t + 1];
        b.packed_[tr.i * b.pairs_ + b.pair_index(tr.j, tr.k)] = a;
        b.packed_[tr.j * b.pairs_ + b.pair_index(tr.i, tr.k)] = c;
        b.packed_[tr.k * b.pairs_ + b.pair_index(tr.i, tr.j)] = -(a + c);
        ++t;
    }
    b.max_abs_ = 0.0;
    for (double v : b.packed_) b.max_abs_ = std::max(b.max_abs_, std::abs(v));
    return b;
}

CoefficientTensor CoefficientTensor::from_raw(const RawTensor& raw, double tol) {
    const int d = raw.dim();
    require_class_dim(d);
    const MembershipReport report = verify_membership(raw, tol);
    if (!report.pass) {
        throw DimensionError("array is not in the constraint class (symmetry " + std::to_string(report.symmetry) +
                             ", zero pattern " + std::to_string(report.zero_pattern) + ", jacobi " +
                             std::to_string(report.jacobi) + ")");
    }
    CoefficientTensor b = zero(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                if (i == j || i == k) continue;
                b.packed_[i * b.pairs_ + b.pair_index(j, k)] = 0.5 * (raw(i, j, k) + raw(i, k, j));
            }
        }
    }
    b.max_abs_ = 0.0;
    for (double v : b.packed_) b.max_abs_ = std::max(b.max_abs_, std::abs(v));
    return b;
}

double CoefficientTensor::operator()(int i, int j, int k) const noexcept {
    if (j == k) return 0.0;
    if (j > k) std::swap(j, k);
    return packed_[i * pairs_ + pair_index(j, k)];
}

std::vector<double> CoefficientTensor::free_coordinates() const {
    std::vector<double> free;
    free.reserve(class_dimension(d_));
    for (const Triple& tr : triples(d_)) {
        free.push_back((*this)(tr.i, tr.j, tr.k));
        free.push_back((*this)(tr.j, tr.i, tr.k));
    }
    return free;
}

RawTensor CoefficientTensor::to_raw() const {
    RawTensor raw(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) raw(i, j, k) = (*this)(i, j, k);
    return raw;
}

CoefficientTensor CoefficientTensor::scaled(double factor) const {
    std::vector<double> packed = packed_;
    for (double& v : packed) v *= factor;
    return CoefficientTensor(d_, std::move(packed));
}

CoefficientTensor CoefficientTensor::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != d_) throw DimensionError("permutation length mismatch");
    CoefficientTensor out = zero(d_);
    for (int a = 0; a < d_; ++a)
        for (int p = 0; p < d_; ++p)
            for (int q = p + 1; q < d_; ++q)
                out.packed_[a * pairs_ + pair_index(p, q)] = (*this)(perm[a], perm[p], perm[q]);
    out.max_abs_ = max_abs_;
    return out;
}

void CoefficientTensor::quadratic(const double* x, double* out) const noexcept {
    const double* row = packed_.data();
    for (int i = 0; i < d_; ++i) {
        double acc = 0.0;
        for (int j = 0; j + 1 < d_; ++j) {
            double inner = 0.0;
            for (int k = j + 1; k < d_; ++k) inner += (*row++) * x[k];
            acc += x[j] * inner;
        }
        out[i] = 2.0 * acc;
    }
}

void CoefficientTensor::bilinear(const double* x, const double* y, double* out) const noexcept {
    const double* row = packed_.data();
    for (int i = 0; i < d_; ++i) {
        double acc = 0.0;
        for (int j = 0; j + 1 < d_; ++j) {
            for (int k = j + 1; k < d_; ++k) {
                acc += (*row++) * (x[j] * y[k] + x[k] * y[j]);
            }
        }
        out[i] = acc;
    }
}

std::vector<Triple> triples(int d) {
    std::vector<Triple> out;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = j + 1; k < d; ++k) out.push_back({i, j, k});
    return out;
}

ClassBasis class_basis(int d) {
    require_class_dim(d);
    ClassBasis basis;
    basis.d = d;
    const std::size_t n = class_dimension(d);
    const std::vector<Triple> ts = triples(d);
    std::vector<double> unit(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        unit[m] = 1.0;
        basis.elements.push_back(CoefficientTensor::from_free(d, unit));
        basis.free_index_map.push_back({ts[m / 2], static_cast<int>(m % 2)});
        unit[m] = 0.0;
    }
    return basis;
}

CoefficientTensor sample(int d, double scale, Stream& rng) {
    require_class_dim(d);
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw InvalidParameter("sample scale must be finite and >= 0");
    std::vector<double> free(class_dimension(d));
    for (double& c : free) c = rng.uniform(-scale, scale);
    return CoefficientTensor::from_free(d, free);
}

Vector evaluate(const CoefficientTensor& b, const Vector& x, const Vector& y) {
    require_len(x, b.dim(), "x");
    require_len(y, b.dim(), "y");
    Vector out(b.dim());
    b.bilinear(x.data(), y.data(), out.data());
    return out;
}

double divergence(const RawTensor& b, const Vector& x) {
    const int d = b.dim();
    require_len(x, d, "x");
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) s += b(i, i, k) * x[k];
    return 2.0 * s;
}

double divergence(const CoefficientTensor& b, const Vector& x) {
    const int d = b.dim();
    require_len(x, d, "x");
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) s += b(i, i, k) * x[k];
    return 2.0 * s;
}

CoefficientTensor project(const RawTensor& raw) {
    const int d = raw.dim();
    require_class_dim(d);
    std::vector<double> free;
    free.reserve(class_dimension(d));
    for (const Triple& t : triples(d)) {
        // The class restricted to one triple is {(a,a,c,c,e,e) : a+c+e = 0} in R^6:
        // symmetrize, then remove the mean of the three slots.
        const double a = 0.5 * (raw(t.i, t.j, t.k) + raw(t.i, t.k, t.j));
        const double c = 0.5 * (raw(t.j, t.i, t.k) + raw(t.j, t.k, t.i));
        const double e = 0.5 * (raw(t.k, t.i, t.j) + raw(t.k, t.j, t.i));
        const double mean = (a + c + e) / 3.0;
        free.push_back(a - mean);
        free.push_back(c - mean);
    }
    return CoefficientTensor::from_free(d, free);
}

CoefficientTensor lorenz96(int d) {
    if (d < 4) throw InvalidDimension("lorenz96 needs d >= 4, got " + std::to_string(d));
    RawTensor raw(d);
    auto wrap = [d](int k) { return ((k % d) + d) % d; };
    for (int k = 0; k < d; ++k) {
        const int km2 = wrap(k - 2), km1 = wrap(k - 1), kp1 = wrap(k + 1);
        raw(k, km1, kp1) += 0.5;
        raw(k, kp1, km1) += 0.5;
        raw(k, km2, km1) -= 0.5;
        raw(k, km1, km2) -= 0.5;
    }
    return CoefficientTensor::from_raw(raw, 0.0);
}

MembershipReport verify_membership(const RawTensor& raw, double tol) {
    const int d = raw.dim();
    MembershipReport r;
    r.d = d;
    r.tol = tol;
    r.scale = raw.max_abs();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            r.zero_pattern = std::max({r.zero_pattern, std::abs(raw(i, i, j)), std::abs(raw(i, j, i)),
                                       std::abs(raw(i, j, j))});
            for (int k = 0; k < d; ++k) {
                r.symmetry = std::max(r.symmetry, std::abs(raw(i, j, k) - raw(i, k, j)));
                const double jac = std::abs(raw(i, j, k) + raw(j, i, k) + raw(k, i, j));
                if (jac > r.jacobi) {
                    r.jacobi = jac;
                    r.worst_jacobi = {i, j, k};
                }
            }
        }
    }
    const double thr = tol * r.scale;
    r.pass = r.symmetry <= thr && r.zero_pattern <= thr && r.jacobi <= thr;
    return r;
}

nlohmann::json to_json(const CoefficientTensor& b) {
    nlohmann::json entries = nlohmann::json::array();
    for (const Triple& t : triples(b.dim())) {
        entries.push_back({t.i + 1, t.j + 1, t.k + 1, b(t.i, t.j, t.k)});
        entries.push_back({t.j + 1, t.i + 1, t.k + 1, b(t.j, t.i, t.k)});
    }
    return {{"d", b.dim()}, {"entries", entries}};
}

CoefficientTensor tensor_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("d") || !j["d"].is_number_integer()) {
        throw DimensionError("tensor JSON needs an integer field 'd'");
    }
    const int d = j["d"].get<int>();
    require_class_dim(d);
    const std::vector<Triple> ts = triples(d);
    std::vector<double> free(class_dimension(d), 0.0);
    std::set<std::size_t> seen;
    if (j.contains("entries")) {
        for (const auto& e : j["entries"]) {
            if (!e.is_array() || e.size() != 4) throw DimensionError("tensor entry must be [i, j, k, value]");
            const int up = e[0].get<int>() - 1;
            const int lo1 = e[1].get<int>() - 1;
            const int lo2 = e[2].get<int>() - 1;
            for (int idx : {up, lo1, lo2}) {
                if (idx < 0 || idx >= d) throw IndexError("tensor entry index out of range 1.." + std::to_string(d));
            }
            std::array<int, 3> s{up, lo1, lo2};
            std::sort(s.begin(), s.end());
            if (s[0] == s[1] || s[1] == s[2]) {
                throw DimensionError("tensor entries must use three distinct indices");
            }
            int slot = -1;
            if (up == s[0]) slot = 0;
            else if (up == s[1]) slot = 1;
            else throw DimensionError("entry b^k_{ij} with k largest is determined by the Jacobi identity");
            const auto t = static_cast<std::size_t>(
                std::find(ts.begin(), ts.end(), Triple{s[0], s[1], s[2]}) - ts.begin());
            const std::size_t pos = 2 * t + static_cast<std::size_t>(slot);
            if (!seen.insert(pos).second) throw DimensionError("duplicate tensor entry");
            free[pos] = e[3].get<double>();
        }
    }
    return CoefficientTensor::from_free(d, free);
}

CoefficientTensor load_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open tensor file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed tensor file " + path + ": " + e.what());
    }
    return tensor_from_json(j);
}

void save_tensor(const CoefficientTensor& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write tensor file " + path);
    out << to_json(b).dump(2) << '\n';
}

}  // namespace pdsde
