#pragma once

// Independent reference implementations. Nothing here calls an Eigen eigensolver.

#include "rislab/linalg.hpp"

#include <algorithm>
#include <random>

namespace oracle {

using rislab::cd;
using rislab::cmat;
using rislab::cvec;

inline std::mt19937_64& rng()
{
    static std::mt19937_64 g(20240611);
    return g;
}

inline cmat random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& g = rng())
{
    std::normal_distribution<double> n;
    cmat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cd(n(g), n(g));
    return m;
}

inline cmat random_hermitian(Eigen::Index d, std::mt19937_64& g = rng())
{
    cmat a = random_matrix(d, d, g);
    return (a + a.adjoint()) / 2.0;
}

inline cmat random_density(Eigen::Index d, std::mt19937_64& g = rng())
{
    cmat a = random_matrix(d, d, g);
    cmat r = a * a.adjoint() + 0.05 * cmat::Identity(d, d);
    return r / r.trace().real();
}

inline cmat random_unitary(Eigen::Index d, std::mt19937_64& g = rng())
{
    Eigen::HouseholderQR<cmat> qr(random_matrix(d, d, g));
    return qr.householderQ();
}

// c[k] coefficient of x^k, monic degree n
inline std::vector<cd> charpoly(const cmat& A)
{
    const Eigen::Index n = A.rows();
    std::vector<cd> c(static_cast<std::size_t>(n + 1));
    c[static_cast<std::size_t>(n)] = 1;
    cmat M = cmat::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        M = A * M + c[static_cast<std::size_t>(n - k + 1)] * cmat::Identity(n, n);
        c[static_cast<std::size_t>(n - k)] = -(A * M).trace() / double(k);
    }
    return c;
}

// Durand–Kerner
inline std::vector<cd> poly_roots(const std::vector<cd>& c)
{
    const std::size_t n = c.size() - 1;
    auto p = [&](cd x) {
        cd v = 0;
        for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
        return v;
    };
    double r = 1;
    for (std::size_t k = 0; k < n; ++k) r = std::max(r, 1 + std::abs(c[k]));
    std::vector<cd> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = r * std::pow(cd(0.4, 0.9), double(k));
    for (int it = 0; it < 5000; ++it) {
        double change = 0;
        for (std::size_t i = 0; i < n; ++i) {
            cd den = 1;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= z[i] - z[j];
            cd dz = p(z[i]) / den;
            z[i] -= dz;
            change = std::max(change, std::abs(dz));
        }
        if (change < 1e-15 * r) break;
    }
    // Newton polish
    for (auto& x : z)
        for (int it = 0; it < 3; ++it) {
            cd v = 0, dv = 0;
            for (std::size_t k = c.size(); k-- > 0;) {
                dv = dv * x + v;
                v = v * x + c[k];
            }
            if (std::abs(dv) > 0) x -= v / dv;
        }
    return z;
}

inline std::vector<double> hermitian_eigenvalues(const cmat& H)
{
    std::vector<double> out;
    for (cd z : poly_roots(charpoly(H))) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

inline cd lu_det(cmat A)
{
    const Eigen::Index n = A.rows();
    cd det = 1;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        for (Eigen::Index i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
        if (A(p, k) == cd(0)) return 0;
        if (p != k) {
            A.row(p).swap(A.row(k));
            det = -det;
        }
        det *= A(k, k);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            cd f = A(i, k) / A(k, k);
            for (Eigen::Index j = k; j < n; ++j) A(i, j) -= f * A(k, j);
        }
    }
    return det;
}

// scaling and squaring with a truncated Taylor series
inline cmat taylor_expm(const cmat& A)
{
    double nrm = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) nrm = std::max(nrm, A.row(i).cwiseAbs().sum());
    int s = 0;
    while (nrm > 0.25) {
        nrm /= 2;
        ++s;
    }
    cmat B = A / std::pow(2.0, s);
    cmat term = cmat::Identity(A.rows(), A.cols()), sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * B / double(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

inline cmat ptrace_env_loop(const cmat& M, int dS, int dE)
{
    cmat out = cmat::Zero(dS, dS);
    for (int i = 0; i < dS; ++i)
        for (int j = 0; j < dS; ++j)
            for (int k = 0; k < dE; ++k) out(i, j) += M(i * dE + k, j * dE + k);
    return out;
}

// superoperator matrix by pushing the matrix units E_pq through X ↦ Σ K X K†
inline cmat superop_by_columns(const std::vector<cmat>& ks)
{
    const Eigen::Index d = ks.front().rows();
    cmat S = cmat::Zero(d * d, d * d);
    for (Eigen::Index q = 0; q < d; ++q)
        for (Eigen::Index p = 0; p < d; ++p) {
            cmat E = cmat::Zero(d, d);
            E(p, q) = 1;
            cmat out = cmat::Zero(d, d);
            for (const auto& k : ks) out += k * E * k.adjoint();
            for (Eigen::Index b = 0; b < d; ++b)
                for (Eigen::Index a = 0; a < d; ++a) S(a + b * d, p + q * d) = out(a, b);
        }
    return S;
}

// Kolmogorov distance of a sorted sample to N(0, var)
inline double ks_normal(std::vector<double> x, double var)
{
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = 0.5 * std::erfc(-x[i] / std::sqrt(2 * var));
        d = std::max({d, std::abs(F - double(i) / n), std::abs(double(i + 1) / n - F)});
    }
    return d;
}

}  // namespace oracle
