// one PASS/FAIL line per acceptance criterion; INFO lines carry context
#include "oracles.hpp"
#include "properties.hpp"
#include "rislab/adiabatic.hpp"
#include "rislab/mgf.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>

using namespace rislab;

namespace {

int failed = 0;

void verdict(int n, bool ok, const std::string& what)
{
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
    std::fflush(stdout);
    failed += !ok;
}

__attribute__((format(printf, 1, 2))) void info(const char* fmt, ...)
{
    std::va_list ap;
    va_start(ap, fmt);
    std::printf("INFO  ");
    std::vprintf(fmt, ap);
    std::printf("\n");
    va_end(ap);
}

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

cmat invariant0(const RISModel& m) { return invariant_state(reduced_map(m, 0.0)); }

void derivatives()
{
    Clock clk;
    struct Want {
        const char* beta;
        double prime, second;
    };
    bool ok = true;
    for (Want w : {Want{"beta1", 0.240, 0.530}, Want{"beta2", 0.275, 0.716}}) {
        auto d = lambda_derivatives_at_zero(preset_model("fd", w.beta), 201);
        bool a = std::abs(d.lambda_prime - w.prime) <= 0.005, b = std::abs(d.lambda_doubleprime - w.second) <= 0.005;
        info("fd/%s Lambda'(0) = %.6f (target %.3f) %s; Lambda''(0) = %.6f (target %.3f) %s; finite differences %.6f %.6f",
             w.beta, d.lambda_prime, w.prime, a ? "ok" : "off", d.lambda_doubleprime, w.second, b ? "ok" : "off",
             d.fd_prime, d.fd_doubleprime);
        ok = ok && a && b;
    }
    double t = clk.seconds();
    verdict(1, ok && t <= 60, "Lambda'(0), Lambda''(0) on fd/beta1 and fd/beta2 within 0.005; runtime " + std::to_string(t) + " s");
}

void mgf_oracle()
{
    auto m = preset_model("fd", "beta1");
    auto p = make_protocol(MeasurementSetup::entropic(invariant0(m)), m, 3);
    auto law = enumerate_measure(p);
    double worst = 0;
    for (double a : {-1.0, -0.5, 0.3, 1.0}) {
        double want = 0;
        for (const auto& t : law) want += std::exp(a * t.delta_y) * t.pF;
        worst = std::max(worst, std::abs(mgf_delta_y(p, a) - want));
    }
    info("max |product MGF - enumerated MGF| = %.3e over %zu trajectories", worst, law.size());
    verdict(2, worst <= 1e-9, "finite-T MGF equals enumeration at T = 3");
}

void balance()
{
    auto m = preset_model("fd", "beta1");
    cmat rho(2, 2);
    rho << 0.7, cd(0.1, 0.05), cd(0.1, -0.05), 0.3;
    auto p = make_protocol(MeasurementSetup::entropic(rho), m, 3);
    bool nondeg = p.Ai.values.size() == 2 && p.Af.values.size() == 2 && balance_applicable(p);
    double worst = 0, mean = 0;
    for (const auto& t : enumerate_measure(p)) {
        if (t.pF <= 0) continue;
        worst = std::max(worst, std::abs(balance_rhs(p, t) - std::log(t.pF / t.pB)));
        mean += t.pF * t.varsigma;
    }
    auto sb = scalar_balance(m, 3, rho);
    info("max per-trajectory balance defect = %.3e; E(varsigma) = %.15f; sigma_tot = %.15f", worst, mean, sb.sigma_tot);
    verdict(3, nondeg && worst <= 1e-10 && std::abs(mean - sb.sigma_tot) <= 1e-8,
            "trajectory balance per trajectory and E(varsigma) = sigma_tot at T = 3");
}

void closed_form()
{
    auto m = preset_model("rwa", "beta1");
    std::mt19937_64 g(4);
    cmat rho = oracle::random_density(2, g);
    cmat r0 = invariant0(m);
    const std::vector<std::pair<double, double>> grid = {{0.0, 0.0}, {-0.5, 0.0}, {0.3, 0.2}, {0.5, -0.3}, {-0.2, 0.4}};
    bool mgf_ok = true, sigma_ok = true;
    std::vector<double> prev(grid.size(), kInf), sig;
    const double lit = relative_entropy(r0, rho), mirror = relative_entropy(rho, r0);
    for (int T : {100, 200, 400}) {
        auto p = make_protocol(MeasurementSetup::entropic(rho), m, T);
        double worst = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto [a1, a2] = grid[i];
            double e = std::abs(mgf_pair(p, a1, a2) - limiting_mgf_X0(m, rho, a1, a2));
            worst = std::max(worst, e);
            // the origin is exact at every T
            if (e > 1e-12 && e >= prev[i]) mgf_ok = false;
            prev[i] = e;
        }
        mgf_ok = mgf_ok && worst <= 5.0 / T;
        double st = scalar_balance(m, T, rho).sigma_tot;
        sig.push_back(st);
        sigma_ok = sigma_ok && std::abs(st - lit) <= 5.0 / T;
        info("T = %d: max MGF error = %.3e (5/T = %.3e); sigma_tot = %.6f; S(rho_inv(0)|rho_i) = %.6f; S(rho_i|rho_inv(0)) = %.6f",
             T, worst, 5.0 / T, st, lit, mirror);
    }
    // σ_tot(T) ≈ σ_∞ + c/T
    info("Richardson limit of sigma_tot from T = 200, 400: %.6f (closer to S(rho_i|rho_inv(0)))", 2 * sig[2] - sig[1]);
    verdict(4, mgf_ok && sigma_ok, "X = 0 closed-form MGF within 5/T and decreasing; sigma_tot(T) -> S(rho_inv(0)|rho_i) within 5/T");
}

void gallavotti_cohen()
{
    bool ok = true;
    for (const char* b : {"beta1", "beta2"}) {
        auto c = lambda_curve(preset_model("fd", b), default_alpha_grid(), 201);
        auto d = gc_symmetry_defect(c, interior_x_grid(c));
        info("fd/%s: max|Lambda(a) - Lambda(-1-a)| = %.3e; max|L*(x) - x - L*(-x)| = %.3e; max|L*(-x) - x - L*(x)| = %.3e",
             b, d.lambda_defect, d.rate_defect, d.rate_defect_mirror);
        ok = ok && d.lambda_defect <= 1e-6 && d.rate_defect <= 1e-5;
    }
    verdict(5, ok, "Lambda(a) = Lambda(-1-a) within 1e-6 and L*(x) = x + L*(-x) within 1e-5");
}

void adiabatic()
{
    Clock clk;
    auto m = preset_model("fd", "beta1");
    cmat rho = invariant0(m);
    bool ok = true;
    for (double a : {0.0, 0.5}) {
        std::vector<double> lt, lr;
        for (int T : {100, 200, 400, 800}) {
            lt.push_back(std::log(double(T)));
            lr.push_back(std::log(deformed_adiabatic_state(m, a, T, T, rho).residual));
        }
        double mt = 0, mr = 0;
        for (std::size_t i = 0; i < lt.size(); ++i) mt += lt[i] / 4, mr += lr[i] / 4;
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lt.size(); ++i) sxy += (lt[i] - mt) * (lr[i] - mr), sxx += (lt[i] - mt) * (lt[i] - mt);
        info("alpha = %.1f: log-log slope of the residual = %.4f", a, sxy / sxx);
        ok = ok && std::abs(sxy / sxx + 1) <= 0.3;
    }
    double t = clk.seconds();
    verdict(6, ok && t <= 300, "adiabatic residual slope -1 +- 0.3; runtime " + std::to_string(t) + " s");
}

void clt()
{
    Clock clk;
    auto m = preset_model("fd", "beta1");
    const int T = 400;
    auto d = lambda_derivatives_at_zero(m, 201);
    auto p = make_protocol(MeasurementSetup::entropic(invariant0(m)), m, T);
    auto tab = sample_trajectories(p, 2000, 7, false);
    std::vector<double> dy;
    for (const auto& t : tab.rows) dy.push_back(t.delta_y);
    auto lln = lln_check(dy, T, d.lambda_prime);
    auto c = clt_check(dy, T, d.lambda_prime, d.lambda_doubleprime);
    double t = clk.seconds();
    info("mean/T = %.6f; Lambda'(0) = %.6f; deviation = %.2f SE; KS = %.4f", lln.mean_rate, d.lambda_prime,
         lln.deviation_in_se, c.ks);
    verdict(7, c.ks <= 0.05 && lln.deviation_in_se <= 3 && t <= 120,
            "fd/beta1 T = 400, n = 2000, seed 7: KS <= 0.05 and mean within 3 SE; runtime " + std::to_string(t) + " s");
}

void sampler()
{
    auto m = preset_model("fd", "beta1");
    auto p = make_protocol(MeasurementSetup::entropic(invariant0(m)), m, 3);
    auto key = [](const Trajectory& t) {
        std::vector<int> k = {t.a_i, t.a_f};
        k.insert(k.end(), t.i_vec.begin(), t.i_vec.end());
        k.insert(k.end(), t.j_vec.begin(), t.j_vec.end());
        return k;
    };
    std::map<std::vector<int>, double> exact, freq;
    for (const auto& t : enumerate_measure(p)) exact[key(t)] += t.pF;
    const int n = 100000;
    for (const auto& t : sample_trajectories(p, n, 7, false).rows) freq[key(t)] += 1.0 / n;
    double tv = 0, floor = 0;
    for (const auto& [k, q] : exact) {
        tv += std::abs((freq.count(k) ? freq[k] : 0.0) - q);
        floor += std::sqrt(2 * q * (1 - q) / (M_PI * n));
    }
    info("TV = %.5f; expected TV of an exact sampler at this n = %.5f", tv / 2, floor / 2);
    verdict(8, tv / 2 <= 0.01, "sampled vs enumerated law at T = 3, n = 1e5: TV <= 0.01");
}

void spectral()
{
    bool ok = true;
    double worst_res = 0, worst_tr = 0, worst_adj = 0;
    std::mt19937_64 g(9);
    for (const char* p : {"rwa", "fd"})
        for (const char* b : {"beta1", "beta2"}) {
            auto m = preset_model(p, b);
            for (double s : linspace(0, 1, 11)) {
                auto L = reduced_map(m, s);
                auto d = peripheral_decomposition(L, L);
                ok = ok && d.z == 1 && cycle_length(L) == 1;
                worst_res = std::max(worst_res, d.residual);
                for (const auto& pm : d.p) worst_tr = std::max(worst_tr, std::abs((d.rho * pm).trace().real() - 1.0 / d.z));
                for (double a : {-1.3, -0.5, 0.4, 1.0}) {
                    auto fwd = deformed_map(m, s, a, m.tau), back = deformed_map(m, s, -a - 1, -m.tau);
                    for (int t = 0; t < 3; ++t) {
                        cmat c1 = oracle::random_matrix(2, 2, g), c2 = oracle::random_matrix(2, 2, g);
                        cd lhs = hs_inner(fwd(c1), c2), rhs = hs_inner(c1, back(c2));
                        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
                    }
                }
            }
        }
    info("max peripheral residual = %.3e; max |Tr(rho p_m) - 1/z| = %.3e; max adjoint defect = %.3e", worst_res,
         worst_tr, worst_adj);
    verdict(9, ok && worst_res <= 1e-8 && worst_tr <= 1e-9 && worst_adj <= 1e-10,
            "z = 1 on both presets, residuals, Tr(rho_inv p_m) = 1/z and the adjoint identity");
}

void properties()
{
    int a = props::cptp_failures(), b = props::measure_failures(), c = props::lambda_failures();
    info("failures over %d random models: CPTP %d; measures and sigma %d; Lambda %d", props::kCases, a, b, c);
    verdict(10, a + b + c == 0, "randomized property suites with zero failures");
}

}  // namespace

int main()
{
    derivatives();
    mgf_oracle();
    balance();
    closed_form();
    gallavotti_cohen();
    adiabatic();
    clt();
    sampler();
    spectral();
    properties();
    std::printf("%d of 10 criteria failed\n", failed);
    return failed ? 1 : 0;
}
