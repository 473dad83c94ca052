#include "pdsde/damping.hpp"

#include <Eigen/Eigenvalues>

#include "pdsde/errors.hpp"

namespace pdsde {

DampingSpec DampingSpec::diagonal(int d, int J, double rate, const Vector& sigma) {
    DampingSpec s;
    s.d = d;
    s.J = J;
    s.A = Matrix::Zero(d, d);
    for (int m = J; m < d; ++m) s.A(m, m) = rate;
    s.sigma = sigma;
    s.validate();
    return s;
}

void DampingSpec::validate() const {
    if (d < 1) throw InvalidParameter("damping: d must be positive");
    if (J < 0 || J > d) throw InvalidParameter("damping: J must lie in [0, d]");
    if (A.rows() != d || A.cols() != d) throw InvalidParameter("damping: A must be d x d");
    if (sigma.size() != d) throw InvalidParameter("damping: sigma must have length d");
    if (!A.allFinite() || !sigma.allFinite()) throw InvalidParameter("damping: non-finite entries");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14) throw InvalidParameter("damping: A is not symmetric");
    const double norm = A.norm();
    if (norm > 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12 * norm) {
            throw InvalidParameter("damping: A is not positive semidefinite");
        }
    }
    for (int m = 0; m < J; ++m) {
        if (A.col(m).cwiseAbs().maxCoeff() != 0.0) {
            throw InvalidParameter("damping: A e_" + std::to_string(m + 1) + " must vanish for kernel modes");
        }
    }
}

int DampingSpec::forced_modes() const {
    int n = 0;
    for (Eigen::Index m = 0; m < sigma.size(); ++m) n += sigma[m] != 0.0 ? 1 : 0;
    return n;
}

KernelSpec::KernelSpec(int d_, int J_) : d(d_), J(J_) {
    if (d < 1 || J < 0 || J > d) throw InvalidParameter("kernel: need 0 <= J <= d");
}

Vector KernelSpec::project(const Vector& x) const {
    Vector y = Vector::Zero(d);
    y.head(J) = x.head(J);
    return y;
}

Vector KernelSpec::project_perp(const Vector& x) const {
    Vector y = x;
    y.head(J).setZero();
    return y;
}

Matrix KernelSpec::proj_K() const {
    Matrix p = Matrix::Zero(d, d);
    for (int m = 0; m < J; ++m) p(m, m) = 1.0;
    return p;
}

Matrix KernelSpec::proj_K_perp() const {
    return Matrix::Identity(d, d) - proj_K();
}

}  // namespace pdsde
