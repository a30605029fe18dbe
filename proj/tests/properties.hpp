#pragma once

#include "oracles.hpp"
#include "rislab/mgf.hpp"

namespace props {

using namespace rislab;

constexpr int kCases = 100;

inline RISModel random_model(std::mt19937_64& g)
{
    std::uniform_real_distribution<double> U(0.2, 1.5);
    auto m = preset_model("fd", U(g) < 0.85 ? "beta1" : "beta2");
    m.name = "random";
    m.hS = oracle::random_hermitian(2, g);
    m.schedule.hE = cmat::Zero(2, 2);
    m.schedule.hE(1, 1) = U(g);
    cmat w = oracle::random_unitary(2, g);
    m.schedule.hE = w * m.schedule.hE * w.adjoint();
    m.schedule.v = oracle::random_hermitian(4, g);
    m.tau = U(g);
    m.coupling = U(g);
    return m;
}

inline cmat choi(const SuperOperator<double>& L)
{
    const Eigen::Index d = L.dim;
    cmat C = cmat::Zero(d * d, d * d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
            cmat E = cmat::Zero(d, d);
            E(a, b) = 1;
            C += kron(E, L(E));
        }
    return C;
}



inline int cptp_failures(int cases = kCases)
{
    std::mt19937_64 g(1001);
    int failures = 0;
    for (int t = 0; t < cases; ++t) {
        auto m = random_model(g);
        for (double s : {0.0, 0.5, 1.0}) {
            auto L = reduced_map(m, s);
            cmat C = choi(L);
            bool ok = max_abs(cmat(C - C.adjoint())) <= 1e-12;
            ok = ok && hermitian_eig(cmat((C + C.adjoint()) / 2.0)).values.minCoeff() >= -1e-12;
            ok = ok && max_abs(cmat(partial_trace_env(C, 2, 2) - cmat::Identity(2, 2))) <= 1e-12;
            cmat X = oracle::random_matrix(2, 2, g);
            ok = ok && std::abs(L(X).trace() - X.trace()) <= 1e-12;
            cmat rho = oracle::random_density(2, g);
            cmat out = L(rho);
            ok = ok && hermitian_eig(cmat((out + out.adjoint()) / 2.0)).values.minCoeff() >= -1e-12;
            ok = ok && max_abs(cmat(deformed_map(m, s, 0.0).matrix - L.matrix)) <= 1e-12;
            failures += !ok;
        }
    }
    return failures;
}

inline int measure_failures(int cases = kCases)
{
    std::mt19937_64 g(1002);
    int failures = 0;
    for (int t = 0; t < cases; ++t) {
        auto m = random_model(g);
        cmat rho = oracle::random_density(2, g);
        auto p = make_protocol(MeasurementSetup::entropic(rho), m, 2);
        double sf = 0, sb = 0;
        bool ok = true;
        for (const auto& tr : enumerate_measure(p)) {
            sf += tr.pF;
            sb += tr.pB;
            ok = ok && tr.pF >= -1e-14 && tr.pB >= -1e-14;
            ok = ok && ((tr.pF > 1e-14) == (tr.pB > 1e-14) || std::max(tr.pF, tr.pB) <= 1e-12);
        }
        ok = ok && std::abs(sf - 1) <= 1e-10 && std::abs(sb - 1) <= 1e-10;
        auto b = scalar_balance(m, 3, rho);
        for (double s : b.sigma) ok = ok && s >= -1e-12;
        ok = ok && b.max_identity_defect <= 1e-10;
        failures += !ok;
    }
    return failures;
}

inline int lambda_failures(int cases = kCases)
{
    std::mt19937_64 g(1003);
    int failures = 0;
    const auto alphas = linspace(-3, 2, 26);
    const double h = alphas[1] - alphas[0];
    for (int t = 0; t < cases; ++t) {
        auto m = random_model(g);
        auto c = lambda_curve(m, alphas, 21);
        bool ok = std::abs(c.fn.value(0)) <= 1e-12;
        for (std::size_t i = 1; i + 1 < c.Lambda.size(); ++i)
            ok = ok && (c.Lambda[i + 1] - 2 * c.Lambda[i] + c.Lambda[i - 1]) / (h * h) >= -1e-8;
        double x0 = c.fn.derivative(0);
        double r = legendre_transform(c, x0);
        ok = ok && std::abs(r) <= 1e-8;
        // nonnegative elsewhere
        for (double x : {x0 - 0.2, x0 + 0.2}) {
            double v = legendre_transform(c, x);
            ok = ok && (std::isinf(v) || v >= -1e-10);
        }
        failures += !ok;
    }
    return failures;
}

}  // namespace props
