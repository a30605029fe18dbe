#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rislab {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cd = std::complex<double>;
using cmat = CMatrix<double>;
using cvec = CVector<double>;
using rvec = RVector<double>;

struct linalg_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// eigenvalues below this are refused by log / negative powers
inline constexpr double kFaithfulFloor = 1e-14;

inline double cluster_tol(double spr) { return 1e-8 * (1.0 + spr); }

template <typename Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m)
{
    return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
    return m.allFinite();
}

// (A⊗B)[(i·rB+k),(j·cB+l)] = A[i,j]·B[k,l]
template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B)
{
    using S = typename DA::Scalar;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

template <typename Derived>
auto partial_trace_env(const Eigen::MatrixBase<Derived>& M, Eigen::Index dS, Eigen::Index dE)
{
    if (M.rows() != dS * dE || M.cols() != dS * dE)
        throw linalg_error("partial_trace_env: dimension mismatch");
    using S = typename Derived::Scalar;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(dS, dS);
    for (Eigen::Index i = 0; i < dS; ++i)
        for (Eigen::Index j = 0; j < dS; ++j)
            out(i, j) = M.block(i * dE, j * dE, dE, dE).trace();
    return out;
}

template <typename Derived>
auto partial_trace_sys(const Eigen::MatrixBase<Derived>& M, Eigen::Index dS, Eigen::Index dE)
{
    if (M.rows() != dS * dE || M.cols() != dS * dE)
        throw linalg_error("partial_trace_sys: dimension mismatch");
    using S = typename Derived::Scalar;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Zero(dE, dE);
    for (Eigen::Index i = 0; i < dS; ++i) out += M.block(i * dE, i * dE, dE, dE);
    return out;
}

template <typename Real>
struct HermitianEig {
    RVector<Real> values;  // ascending
    CMatrix<Real> vectors;
};

template <typename Real>
bool is_hermitian(const CMatrix<Real>& H, Real rel = Real(1e-12))
{
    if (H.rows() != H.cols()) return false;
    Real scale = std::max(max_abs(H), Real(1e-300));
    return max_abs(CMatrix<Real>(H - H.adjoint())) <= rel * scale;
}

template <typename Real>
HermitianEig<Real> hermitian_eig(const CMatrix<Real>& H)
{
    if (!is_hermitian(H)) throw linalg_error("hermitian_eig: input is not Hermitian");
    CMatrix<Real> Hs = (H + H.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(Hs);
    if (es.info() != Eigen::Success) throw linalg_error("hermitian_eig: no convergence");
    HermitianEig<Real> r{es.eigenvalues(), es.eigenvectors()};
    Real res = max_abs(CMatrix<Real>(Hs * r.vectors - r.vectors * r.values.asDiagonal()));
    if (res > Real(1e-10) * std::max(max_abs(Hs), Real(1)))
        throw linalg_error("hermitian_eig: residual check failed");
    return r;
}

// V·diag(f(λ))·V†
template <typename Real, typename F>
CMatrix<Real> matrix_function_hermitian(const CMatrix<Real>& H, F&& f)
{
    auto e = hermitian_eig(H);
    CVector<Real> fv(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        std::complex<Real> v = f(e.values(i));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw linalg_error("matrix_function_hermitian: f undefined on spectrum");
        fv(i) = v;
    }
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

template <typename Real>
CMatrix<Real> expm_hermitian(const CMatrix<Real>& H, std::complex<Real> c)
{
    return matrix_function_hermitian(H, [c](Real x) { return std::exp(c * x); });
}

template <typename Real>
CMatrix<Real> logm_pd(const CMatrix<Real>& H)
{
    return matrix_function_hermitian(H, [](Real x) -> std::complex<Real> {
        if (x < Real(kFaithfulFloor)) throw linalg_error("log: eigenvalue below faithful floor");
        return std::log(x);
    });
}

template <typename Real>
CMatrix<Real> powm_pd(const CMatrix<Real>& H, Real p)
{
    return matrix_function_hermitian(H, [p](Real x) -> std::complex<Real> {
        if (p == Real(0)) return Real(1);
        if (x < Real(kFaithfulFloor)) {
            if (p > Real(0) && x > -Real(1e-12)) return Real(0);
            throw linalg_error("power: eigenvalue below faithful floor");
        }
        return std::pow(x, p);
    });
}

// opt-in regularisation: (ρ + εId)/(1 + dε)
template <typename Real>
CMatrix<Real> project_to_faithful(const CMatrix<Real>& rho, Real eps = Real(1e-12))
{
    CMatrix<Real> h = (rho + rho.adjoint()) / Real(2);
    auto e = hermitian_eig(h);
    RVector<Real> w = e.values.cwiseMax(Real(0)).array() + eps;
    CMatrix<Real> out = e.vectors * w.template cast<std::complex<Real>>().asDiagonal() * e.vectors.adjoint();
    return out / out.trace().real();
}

template <typename Real>
struct GeneralEig {
    CVector<Real> values;
    CMatrix<Real> right;  // columns
    CMatrix<Real> left;   // columns l with l† M = λ l†
};

template <typename Real>
GeneralEig<Real> general_eig(const CMatrix<Real>& M)
{
    if (M.rows() != M.cols()) throw linalg_error("general_eig: non-square input");
    Eigen::ComplexEigenSolver<CMatrix<Real>> er(M, true);
    Eigen::ComplexEigenSolver<CMatrix<Real>> el(CMatrix<Real>(M.adjoint()), true);
    if (er.info() != Eigen::Success || el.info() != Eigen::Success)
        throw linalg_error("general_eig: no convergence");
    GeneralEig<Real> g{er.eigenvalues(), er.eigenvectors(), CMatrix<Real>(M.rows(), M.cols())};
    const Eigen::Index n = M.rows();
    std::vector<bool> used(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = -1;
        Real bd = std::numeric_limits<Real>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (used[j]) continue;
            Real d = std::abs(std::conj(el.eigenvalues()(j)) - g.values(i));
            if (d < bd) { bd = d; best = j; }
        }
        used[best] = true;
        g.left.col(i) = el.eigenvectors().col(best);
    }
    return g;
}

template <typename Real>
Real spectral_radius(const CMatrix<Real>& M)
{
    if (M.size() == 0) return Real(0);
    Eigen::ComplexEigenSolver<CMatrix<Real>> es(M, false);
    if (es.info() != Eigen::Success) throw linalg_error("spectral_radius: no convergence");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Real>
Real trace_norm(const CMatrix<Real>& M)
{
    Eigen::JacobiSVD<CMatrix<Real>> svd(M);
    return svd.singularValues().sum();
}

// column stacking: vec(X)[i + d·j] = X(i,j)
template <typename Real>
CVector<Real> vectorize(const CMatrix<Real>& X)
{
    return Eigen::Map<const CVector<Real>>(X.data(), X.size());
}

template <typename Real>
CMatrix<Real> devectorize(const CVector<Real>& v, Eigen::Index d)
{
    if (v.size() != d * d) throw linalg_error("devectorize: size mismatch");
    return Eigen::Map<const CMatrix<Real>>(v.data(), d, d);
}

template <typename Real>
struct SuperOperator {
    Eigen::Index dim = 0;
    CMatrix<Real> matrix;
    std::optional<std::vector<CMatrix<Real>>> kraus;
    bool cp = false;
    bool tp = false;

    CMatrix<Real> operator()(const CMatrix<Real>& X) const
    {
        return devectorize<Real>(matrix * vectorize(X), dim);
    }
};

template <typename Real>
CMatrix<Real> kraus_matrix(const std::vector<CMatrix<Real>>& ks)
{
    const Eigen::Index d = ks.front().rows();
    CMatrix<Real> m = CMatrix<Real>::Zero(d * d, d * d);
    for (const auto& k : ks) m += kron(k.conjugate(), k);
    return m;
}

template <typename Real>
Real tp_defect(const std::vector<CMatrix<Real>>& ks)
{
    const Eigen::Index d = ks.front().cols();
    CMatrix<Real> s = CMatrix<Real>::Zero(d, d);
    for (const auto& k : ks) s += k.adjoint() * k;
    return max_abs(CMatrix<Real>(s - CMatrix<Real>::Identity(d, d)));
}

template <typename Real>
SuperOperator<Real> from_kraus(std::vector<CMatrix<Real>> ks)
{
    if (ks.empty()) throw linalg_error("from_kraus: empty family");
    SuperOperator<Real> s;
    s.dim = ks.front().rows();
    s.matrix = kraus_matrix(ks);
    s.cp = true;
    s.tp = tp_defect(ks) <= Real(1e-10);
    s.kraus = std::move(ks);
    return s;
}

template <typename Real>
SuperOperator<Real> from_matrix(CMatrix<Real> m, Eigen::Index d)
{
    if (m.rows() != d * d || m.cols() != d * d) throw linalg_error("from_matrix: size mismatch");
    SuperOperator<Real> s;
    s.dim = d;
    s.matrix = std::move(m);
    return s;
}

template <typename Real>
CMatrix<Real> apply_kraus(const std::vector<CMatrix<Real>>& ks, const CMatrix<Real>& X)
{
    CMatrix<Real> out = CMatrix<Real>::Zero(ks.front().rows(), ks.front().rows());
    for (const auto& k : ks) out += k * X * k.adjoint();
    return out;
}

// Hilbert–Schmidt adjoint: matrix of Φ* is the conjugate transpose
template <typename Real>
SuperOperator<Real> hs_adjoint(const SuperOperator<Real>& phi)
{
    SuperOperator<Real> a;
    a.dim = phi.dim;
    a.matrix = phi.matrix.adjoint();
    if (phi.kraus) {
        std::vector<CMatrix<Real>> ks;
        for (const auto& k : *phi.kraus) ks.push_back(k.adjoint());
        a.kraus = std::move(ks);
    }
    a.cp = phi.cp;
    return a;
}

template <typename Real>
std::complex<Real> hs_inner(const CMatrix<Real>& A, const CMatrix<Real>& B)
{
    return (A.adjoint() * B).trace();
}

}  // namespace rislab
