#include "rislab/mgf.hpp"

#include <algorithm>
#include <numeric>

namespace rislab {

namespace {

cvec chain(const Protocol& p, double alpha, cvec x)
{
    for (int k = 1; k <= p.T; ++k) x = deformed_map(p.model, double(k) / p.T, alpha).matrix * x;
    return x;
}

cmat fn_of(const SpectralObservable& A, double c)
{
    cmat out = cmat::Zero(A.projectors.front().rows(), A.projectors.front().cols());
    for (std::size_t i = 0; i < A.values.size(); ++i) out += std::exp(c * A.values[i]) * A.projectors[i];
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double mgf_delta_y(const Protocol& p, double alpha)
{
    cmat start = cmat::Zero(p.model.dS, p.model.dS);
    for (const auto& pi : p.Ai.projectors) start += pi * p.rho_i * pi;
    return devectorize<double>(chain(p, alpha, vectorize<double>(start)), p.model.dS).trace().real();
}

double mgf_pair(const Protocol& p, double alpha1, double alpha2)
{
    cmat A = p.Ai.matrix();
    if (max_abs(cmat(A * p.rho_i - p.rho_i * A)) > 1e-9 * std::max(1.0, max_abs(A)))
        throw ldp_error("mgf_pair: [A^i, rho^i] != 0");
    cmat start = fn_of(p.Ai, alpha2) * p.rho_i;
    cmat end = devectorize<double>(chain(p, alpha1, vectorize<double>(start)), p.model.dS);
    return (fn_of(p.Af, -alpha2) * end).trace().real();
}

bool obstruction_vanishes(const RISModel& m, int samples, double tol)
{
    for (double s : linspace(0, 1, samples))
        if (trace_norm<double>(obstruction_X(m, s)) > tol) return false;
    return true;
}

double limiting_mgf_X0(const RISModel& m, const cmat& rho_i, double alpha1, double alpha2)
{
    if (!primitivity_check(reduced_map(m, 0.0)) || !primitivity_check(reduced_map(m, 1.0)))
        throw ldp_error("limiting_mgf_X0: reduced map is not primitive");
    if (!obstruction_vanishes(m)) throw ldp_error("limiting_mgf_X0: X(s) does not vanish");
    cmat r0 = invariant_state(reduced_map(m, 0.0));
    cmat r1 = invariant_state(reduced_map(m, 1.0));
    double a = (powm_pd(r0, -alpha1) * powm_pd(rho_i, 1 - alpha2)).trace().real();
    double b = powm_pd(r1, 1 + alpha1 + alpha2).trace().real();
    return a * b;
}

LambdaFunction::LambdaFunction(RISModel m, int quad_nodes) : m_(std::move(m))
{
    if (quad_nodes < 3) quad_nodes = 3;
    if (quad_nodes % 2 == 0) ++quad_nodes;
    s_ = linspace(0, 1, quad_nodes);
}

double LambdaFunction::log_lambda(double s, double alpha) const
{
    return std::log(spectral_radius<double>(deformed_map(m_, s, alpha).matrix));
}

double LambdaFunction::dlog_lambda(double s, double alpha) const
{
    cmat M = deformed_map(m_, s, alpha).matrix;
    auto g = general_eig(M);
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < g.values.size(); ++i)
        if (std::abs(g.values(i)) > std::abs(g.values(top))) top = i;
    cvec r = g.right.col(top), l = g.left.col(top);
    cmat D = deformed_map_alpha_derivative(m_, s, alpha);
    cd num = (l.adjoint() * D * r)(0, 0), den = (l.adjoint() * r)(0, 0);
    return (num / den / g.values(top)).real();
}

double LambdaFunction::value(double alpha) const
{
    std::vector<double> f;
    for (double s : s_) f.push_back(log_lambda(s, alpha));
    return simpson(f, s_[1] - s_[0]);
}

double LambdaFunction::derivative(double alpha) const
{
    std::vector<double> f;
    for (double s : s_) f.push_back(dlog_lambda(s, alpha));
    return simpson(f, s_[1] - s_[0]);
}

std::vector<double> default_alpha_grid()
{
    std::vector<double> a(101);
    for (int i = 0; i <= 100; ++i) a[static_cast<std::size_t>(i)] = -3.0 + 0.05 * i;
    a[60] = 0.0;
    return a;
}

LambdaCurve lambda_curve(const RISModel& m, const std::vector<double>& alpha_grid, int quad_nodes)
{
    LambdaCurve c;
    c.fn = LambdaFunction(m, quad_nodes);
    const auto& s = c.fn.nodes();
    for (double a : alpha_grid) {
        std::vector<double> row, drow;
        for (double x : s) {
            row.push_back(c.fn.log_lambda(x, a));
            drow.push_back(c.fn.dlog_lambda(x, a));
        }
        c.alpha.push_back(a);
        c.Lambda.push_back(simpson(row, s[1] - s[0]));
        c.Lambda_prime.push_back(simpson(drow, s[1] - s[0]));
        c.log_lambda.push_back(std::move(row));
    }
    auto g = growth_rates(m, s);
    c.nu_minus = g.nu_minus;
    c.nu_plus = g.nu_plus;
    return c;
}

cmat traceless_solve(const SuperOperator<double>& L, const cmat& rhs, double* residual)
{
    const Eigen::Index d = L.dim, n = d * d;
    if (std::abs(rhs.trace()) > 1e-10 * std::max(1.0, max_abs(rhs)))
        throw ldp_error("traceless_solve: right-hand side is not traceless");
    // basis: E_ab (a≠b) and E_aa − E_{d-1,d-1}; coordinates read off entries
    std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
    for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index a = 0; a < d; ++a)
            if (a != b || a < d - 1) idx.emplace_back(a, b);
    const Eigen::Index k = static_cast<Eigen::Index>(idx.size());
    cmat B = cmat::Zero(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        auto [a, b] = idx[static_cast<std::size_t>(c)];
        B(a + d * b, c) = 1.0;
        if (a == b) B((d - 1) + d * (d - 1), c) = -1.0;
    }
    cmat A = cmat::Identity(n, n) - L.matrix;
    cmat AB = A * B;
    cmat R(k, k);
    cvec r(k);
    cvec v = vectorize<double>(rhs);
    for (Eigen::Index c = 0; c < k; ++c) {
        auto [a, b] = idx[static_cast<std::size_t>(c)];
        R.row(c) = AB.row(a + d * b);
        r(c) = v(a + d * b);
    }
    Eigen::FullPivLU<cmat> lu(R);
    if (!lu.isInvertible()) throw ldp_error("traceless_solve: singular restriction, eigenvalue 1 is not simple");
    cvec x = lu.solve(r);
    cmat eta = devectorize<double>(cvec(B * x), d);
    double res = max_abs(cmat(eta - L(eta) - rhs));
    if (residual) *residual = res;
    if (res > 1e-10) throw ldp_error("traceless_solve: residual above 1e-10");
    return eta;
}

LambdaDerivatives lambda_derivatives_at_zero(const RISModel& m, int quad_nodes)
{
    LambdaFunction fn(m, quad_nodes);
    const auto& s = fn.nodes();
    std::vector<double> d1, d2;
    LambdaDerivatives out;
    for (double x : s) {
        auto ks = kraus_family(m, x, 0.0);
        auto L = reduced_map(m, x);
        cmat rho = invariant_state(L);
        double lp = 0;
        cmat rhs = cmat::Zero(m.dS, m.dS);
        double second = 0;
        for (const auto& k : ks) {
            double dy = k.yj - k.yi;
            cmat krk = k.K * rho * k.K.adjoint();
            lp += dy * krk.trace().real();
            second += dy * dy * krk.trace().real();
            rhs += dy * krk;
        }
        rhs -= lp * rho;
        double res = 0;
        cmat eta = traceless_solve(L, rhs, &res);
        out.max_solve_residual = std::max(out.max_solve_residual, res);
        for (const auto& k : ks) second += 2 * (k.yj - k.yi) * (k.K * eta * k.K.adjoint()).trace().real();
        d1.push_back(lp);
        d2.push_back(second - lp * lp);
    }
    const double h = s[1] - s[0];
    out.lambda_prime = simpson(d1, h);
    out.lambda_doubleprime = simpson(d2, h);

    const double e = 1e-4;
    double f2 = fn.value(2 * e), f1 = fn.value(e), f0 = fn.value(0), fm1 = fn.value(-e), fm2 = fn.value(-2 * e);
    out.fd_prime = (8 * (f1 - fm1) - (f2 - fm2)) / (12 * e);
    out.fd_doubleprime = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * e * e);
    return out;
}

double legendre_transform(const LambdaCurve& c, double x)
{
    if (x < c.nu_minus || x > c.nu_plus) return kInf;
    const auto& fn = c.fn;
    double lo = -50, hi = 50;
    double glo = fn.derivative(lo) - x, ghi = fn.derivative(hi) - x;
    // slope never reaches x: the supremum runs off to infinity
    const double tol = 1e-9 * (1 + std::abs(x));
    if (glo > tol || ghi < -tol) return kInf;
    if (glo >= 0) return lo * x - fn.value(lo);
    if (ghi <= 0) return hi * x - fn.value(hi);
    // start from the nearest tabulated node
    double a = 0;
    double best = kInf;
    for (std::size_t i = 0; i < c.alpha.size(); ++i) {
        double gap = std::abs(c.Lambda_prime[i] - x);
        if (gap < best) {
            best = gap;
            a = c.alpha[i];
        }
    }
    for (int it = 0; it < 200; ++it) {
        double g = fn.derivative(a) - x;
        if (g > 0) hi = a; else lo = a;
        if (std::abs(g) < 1e-13 || hi - lo < 1e-13) break;
        const double h = 1e-5;
        double gp = (fn.derivative(a + h) - fn.derivative(a - h)) / (2 * h);
        double next = gp > 0 ? a - g / gp : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        a = next;
    }
    return a * x - fn.value(a);
}

std::vector<double> interior_x_grid(const LambdaCurve& c, int n, double frac)
{
    double mid = 0.5 * (c.nu_minus + c.nu_plus), half = 0.5 * (c.nu_plus - c.nu_minus) * frac;
    return linspace(mid - half, mid + half, n);
}

GCDefect gc_symmetry_defect(const LambdaCurve& c, const std::vector<double>& x_grid)
{
    GCDefect d;
    for (double a : c.alpha) d.lambda_defect = std::max(d.lambda_defect, std::abs(c.fn.value(a) - c.fn.value(-1 - a)));
    for (double x : x_grid) {
        double p = legendre_transform(c, x), q = legendre_transform(c, -x);
        if (!std::isfinite(p) || !std::isfinite(q)) continue;
        d.rate_defect = std::max(d.rate_defect, std::abs(p - x - q));
        d.rate_defect_mirror = std::max(d.rate_defect_mirror, std::abs(q - x - p));
    }
    return d;
}

LLNReport lln_check(const std::vector<double>& delta_y, int T, double lambda_prime0)
{
    LLNReport r;
    const double n = double(delta_y.size());
    double mean = std::accumulate(delta_y.begin(), delta_y.end(), 0.0) / n;
    double var = 0;
    for (double v : delta_y) var += (v - mean) * (v - mean);
    var /= std::max(1.0, n - 1);
    r.mean_rate = mean / T;
    r.standard_error = std::sqrt(var / n) / T;
    r.deviation_in_se = r.standard_error > 0 ? std::abs(r.mean_rate - lambda_prime0) / r.standard_error
                                             : (r.mean_rate == lambda_prime0 ? 0.0 : kInf);
    r.flagged = r.deviation_in_se > 3;
    return r;
}

double ks_distance_normal(std::vector<double> x, double variance)
{
    std::sort(x.begin(), x.end());
    const double n = double(x.size()), sd = std::sqrt(variance);
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = normal_cdf(x[i] / sd);
        d = std::max({d, std::abs(F - double(i) / n), std::abs(double(i + 1) / n - F)});
    }
    return d;
}

CLTReport clt_check(const std::vector<double>& delta_y, int T, double lambda_prime0, double lambda_doubleprime0, int bins)
{
    if (!(lambda_doubleprime0 > 1e-12)) throw ldp_error("clt_check: degenerate variance");
    CLTReport r;
    for (double v : delta_y) r.standardized.push_back((v - T * lambda_prime0) / std::sqrt(double(T)));
    r.ks = ks_distance_normal(r.standardized, lambda_doubleprime0);
    auto [mn, mx] = std::minmax_element(r.standardized.begin(), r.standardized.end());
    double lo = *mn, hi = *mx;
    if (hi <= lo) hi = lo + 1;
    double w = (hi - lo) / bins;
    std::vector<double> cnt(static_cast<std::size_t>(bins), 0.0);
    for (double v : r.standardized) {
        int b = std::min(bins - 1, static_cast<int>((v - lo) / w));
        cnt[static_cast<std::size_t>(b)] += 1;
    }
    const double n = double(r.standardized.size()), sd = std::sqrt(lambda_doubleprime0);
    for (int b = 0; b < bins; ++b) {
        double left = lo + b * w, right = left + w, c = 0.5 * (left + right);
        double pdf = std::exp(-0.5 * c * c / lambda_doubleprime0) / (sd * std::sqrt(2 * M_PI));
        r.histogram.push_back({left, right, cnt[static_cast<std::size_t>(b)] / (n * w), pdf});
    }
    return r;
}

std::vector<Atom> x0_support_and_weights(const RISModel& m, const cmat& rho_i)
{
    if (!obstruction_vanishes(m)) throw ldp_error("x0_support_and_weights: X(s) does not vanish");
    cmat r0 = invariant_state(reduced_map(m, 0.0));
    cmat r1 = invariant_state(reduced_map(m, 1.0));
    if (trace_norm<double>(cmat(rho_i - r0)) > 1e-8)
        throw ldp_error("x0_support_and_weights: weight formula needs rho_i = rho_inv(0)");
    auto o0 = spectral_observable(r0), o1 = spectral_observable(r1);
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < o0.values.size(); ++j)
        for (std::size_t k = 0; k < o1.values.size(); ++k) {
            double w = (r0 * o0.projectors[j]).trace().real() * (r1 * o1.projectors[k]).trace().real();
            double v = std::log(o1.values[k]) - std::log(o0.values[j]);
            auto it = std::find_if(atoms.begin(), atoms.end(), [&](const Atom& a) { return std::abs(a.value - v) < 1e-12; });
            if (it != atoms.end()) it->weight += w;
            else atoms.push_back({v, w});
        }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    return atoms;
}

}  // namespace rislab
