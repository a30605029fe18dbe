#include "oracles.hpp"
#include "rislab/model.hpp"
#include "rislab/spectral.hpp"

#include <doctest.h>

using namespace rislab;

namespace {

std::vector<cmat> two_cycle()
{
    cmat v1 = cmat::Zero(2, 2), v2 = cmat::Zero(2, 2);
    v1(0, 1) = 1;
    v2(1, 0) = 1;
    return {v1, v2};
}

// random channel on C^d from a random isometry
std::vector<cmat> random_channel(int d, int n, std::mt19937_64& g)
{
    Eigen::HouseholderQR<cmat> qr(oracle::random_matrix(d * n, d, g));
    cmat Q = qr.householderQ() * cmat::Identity(d * n, d);
    std::vector<cmat> ks;
    for (int i = 0; i < n; ++i) ks.push_back(Q.block(i * d, 0, d, d));
    return ks;
}

}  // namespace

TEST_CASE("irreducibility")
{
    cmat u = cmat::Zero(2, 2);
    u(0, 0) = 1;
    u(1, 1) = std::polar(1.0, 0.9);
    auto conj = from_kraus<double>({u});
    auto r = is_irreducible(conj);
    CHECK_FALSE(r.irreducible);
    REQUIRE(r.witness.cols() == 1);
    // witness is a coordinate axis, invariant under u
    cvec w = r.witness.col(0);
    CHECK(std::min(std::abs(w(0)), std::abs(w(1))) <= 1e-12);
    CHECK((u * w - (w.adjoint() * u * w)(0) * w).norm() <= 1e-12);
    CHECK_FALSE(primitivity_check(conj));

    for (const char* p : {"rwa", "fd"})
        for (double s : {0.0, 0.5, 1.0}) {
            auto L = reduced_map(preset_model(p, "beta1"), s);
            CHECK(is_irreducible(L).irreducible);
            CHECK(spectral_irreducibility(L));
            CHECK(primitivity_check(L));
            CHECK(cycle_length(L) == 1);
        }

    // direct sum of a channel on C^2 and the identity on C^1
    std::mt19937_64 g(3);
    auto blk = random_channel(2, 2, g);
    std::vector<cmat> ks;
    for (const auto& b : blk) {
        cmat k = cmat::Zero(3, 3);
        k.block(0, 0, 2, 2) = b;
        ks.push_back(k);
    }
    cmat e = cmat::Zero(3, 3);
    e(2, 2) = 1;
    ks.push_back(e);
    auto sum = from_kraus(ks);
    REQUIRE(sum.tp);
    auto rs = is_irreducible(sum);
    CHECK_FALSE(rs.irreducible);
    CHECK(rs.witness.cols() >= 1);
    for (const auto& k : ks) {
        cmat P = rs.witness * rs.witness.adjoint();
        CHECK(max_abs(cmat(P * k * P - k * P)) <= 1e-10);
    }
    CHECK_FALSE(spectral_irreducibility(sum));
}

TEST_CASE("two-cycle")
{
    auto phi = from_kraus(two_cycle());
    CHECK(is_irreducible(phi).irreducible);
    CHECK(cycle_length(phi) == 2);
    CHECK_FALSE(primitivity_check(phi));
    auto dec = peripheral_decomposition(phi, phi);
    REQUIRE(dec.z == 2);
    CHECK(std::abs(dec.lambda - 1) <= 1e-12);
    cmat Z = cmat::Zero(2, 2);
    Z.diagonal() << 1, -1;
    CHECK(max_abs(cmat(dec.u * dec.u - cmat::Identity(2, 2))) <= 1e-10);
    CHECK(std::min(max_abs(cmat(dec.u - Z)), max_abs(cmat(dec.u + Z))) <= 1e-10);
    for (const auto& V : two_cycle()) CHECK(max_abs(cmat(V * dec.u + dec.u * V)) <= 1e-10);
    for (int m = 0; m < 2; ++m) {
        CHECK(std::abs((dec.rho * dec.p[static_cast<std::size_t>(m)]).trace().real() - 0.5) <= 1e-9);
        cmat ev = dec.rho * (m ? dec.u : cmat::Identity(2, 2));
        double theta = m ? -1 : 1;
        CHECK(max_abs(cmat(phi(ev) - theta * ev)) <= 1e-8);
    }
    CHECK(dec.residual <= 1e-8);
}

TEST_CASE("peripheral decomposition on the presets")
{
    for (const char* p : {"rwa", "fd"}) {
        auto m = preset_model(p, "beta2");
        for (double s : {0.0, 0.4, 1.0}) {
            auto phi0 = reduced_map(m, s);
            auto d0 = peripheral_decomposition(phi0, phi0);
            CHECK(d0.z == 1);
            CHECK(std::abs(d0.lambda - 1) <= 1e-12);
            CHECK(max_abs(cmat(d0.I - cmat::Identity(2, 2))) <= 1e-10);
            CHECK(max_abs(cmat(d0.rho - invariant_state(phi0))) <= 1e-12);
            CHECK(std::abs((d0.rho * d0.p[0]).trace().real() - 1) <= 1e-9);
            for (double a : {-2.0, -0.5, 0.7, 1.5}) {
                auto phia = deformed_map(m, s, a);
                auto d = peripheral_decomposition(phia, phi0);
                CHECK(d.residual <= 1e-8);
                CHECK(max_abs(cmat(phia(d.rho) - d.lambda * d.rho)) <= 1e-8 * d.lambda);
                cmat adjI = hs_adjoint(phia)(d.I);
                CHECK(max_abs(cmat(adjI - d.lambda * d.I)) <= 1e-8 * d.lambda * max_abs(d.I));
                CHECK(std::abs((d.I * d.rho).trace() - 1.0) <= 1e-10);
                CHECK(hermitian_eig(d.rho).values.minCoeff() > 0);
                CHECK(hermitian_eig(d.I).values.minCoeff() > 0);
            }
        }
    }

    // RWA with X ≡ 0: ρ^(α) ∝ e^{−(1+α)β k_S}, I^(α) ∝ e^{αβ k_S}, k_S = (E0/E) h_S
    auto r = preset_model("rwa", "beta1");
    for (double s : {0.0, 0.5, 1.0})
        for (double a : {-1.5, 0.3, 1.0}) {
            auto d = peripheral_decomposition(deformed_map(r, s, a), reduced_map(r, s));
            cmat kS = (0.8 / 0.9) * r.hS;
            cmat rho = expm_hermitian(kS, cd(-(1 + a) * r.beta(s)));
            rho /= rho.trace();
            cmat I = expm_hermitian(kS, cd(a * r.beta(s)));
            I /= (I * rho).trace();
            CHECK(max_abs(cmat(d.rho - rho)) <= 1e-10);
            CHECK(max_abs(cmat(d.I - I)) <= 1e-9 * max_abs(I));
            CHECK(std::abs(d.lambda - 1) <= 1e-10);
        }
}

TEST_CASE("conditioned map and deformation inverse")
{
    auto fd = preset_model("fd", "beta1");
    std::vector<cmat> ks;
    for (const auto& t : kraus_family(fd, 0.3, 0.0)) ks.push_back(t.K);
    auto phi0 = from_kraus(ks);
    auto d0 = peripheral_decomposition(phi0, phi0);
    auto same = conditioned_map(phi0, d0);
    CHECK(max_abs(cmat(same.matrix - phi0.matrix)) <= 1e-10);

    std::vector<cmat> ka;
    for (const auto& t : kraus_family(fd, 0.3, 0.7)) ka.push_back(t.K);
    auto phia = from_kraus(ka);
    auto hat = conditioned_map(phia, peripheral_decomposition(phia, phi0));
    CHECK(tp_defect(*hat.kraus) <= 1e-9);

    std::mt19937_64 g(11);
    for (int t = 0; t < 5; ++t) {
        auto V = random_channel(2, 3, g);
        std::vector<double> v = {0.5, 1.7, 3.1};
        for (double a : {-1.2, 0.4, 2.0}) {
            auto W = deform_kraus(V, v, a);
            CHECK(tp_defect(W) <= 1e-9);
            auto back = deform_kraus(W, v, -a);
            for (std::size_t i = 0; i < V.size(); ++i) CHECK(max_abs(cmat(back[i] - V[i])) <= 1e-8);
        }
    }
}

TEST_CASE("growth rates")
{
    auto m = preset_model("fd", "beta1");
    m.schedule.v = cmat::Zero(4, 4);
    auto z = growth_rates(m, 0.5);
    CHECK(z.nu_minus == 0);
    CHECK(z.nu_plus == 0);

    auto fd = preset_model("fd", "beta1");
    auto g = growth_rates(fd, linspace(0, 1, 201));
    CHECK(std::abs(g.nu_plus - 1.6) <= 1e-6);
    CHECK(std::abs(g.nu_minus + 1.6) <= 1e-6);

    for (double s : {0.0, 0.5, 1.0}) {
        auto gs = growth_rates(fd, s);
        // slope of log λ^(α) at |α| = 30; the O(1/α) offset log λ_± drops out
        auto ll = [&](double a) { return std::log(spectral_radius(deformed_map(fd, s, a).matrix)); };
        double up = ll(31.0) - ll(30.0);
        double dn = ll(-30.0) - ll(-31.0);
        CHECK(std::abs(up - gs.nu_plus) <= 0.02 * std::abs(gs.nu_plus));
        CHECK(std::abs(dn - gs.nu_minus) <= 0.02 * std::abs(gs.nu_minus));
    }
}

TEST_CASE("log lambda convexity proxy")
{
    auto fd = preset_model("fd", "beta2");
    auto alphas = linspace(-3, 2, 51);
    const double h = alphas[1] - alphas[0];
    for (double s : {0.0, 0.5, 1.0}) {
        std::vector<double> l;
        for (double a : alphas) l.push_back(std::log(spectral_radius(deformed_map(fd, s, a).matrix)));
        for (std::size_t i = 1; i + 1 < l.size(); ++i) CHECK((l[i + 1] - 2 * l[i] + l[i - 1]) / (h * h) >= -1e-6);
    }
}

TEST_CASE("simpson")
{
    // exact on cubics, including the 3/8 closing panel for odd interval counts
    for (int n : {5, 6, 11, 12}) {
        auto s = linspace(0, 1, n);
        std::vector<double> f;
        for (double x : s) f.push_back(1 + x - 3 * x * x + 4 * x * x * x);
        CHECK(std::abs(simpson(f, s[1] - s[0]) - (1 + 0.5 - 1 + 1)) <= 1e-14);
    }
}
