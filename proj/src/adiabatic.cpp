#include "rislab/adiabatic.hpp"

#include <memory>

namespace rislab {

namespace {

constexpr std::complex<double> I1(0, 1);

std::pair<double, double> stencil(double s, double h)
{
    return {std::max(0.0, s - h), std::min(1.0, s + h)};
}

PeripheralDecomposition decompose(const RISModel& m, double s, double alpha)
{
    return peripheral_decomposition(deformed_map(m, s, alpha), reduced_map(m, s));
}

// u is fixed only up to a z-th root of unity; pick the one closest to ref
void align_u(PeripheralDecomposition& d, const cmat& ref)
{
    if (d.z == 1) return;
    double best = -1e300;
    cd pick = 1;
    for (int j = 0; j < d.z; ++j) {
        cd w = std::exp(2.0 * M_PI * I1 * double(j) / double(d.z));
        double ov = (ref.adjoint() * (w * d.u)).trace().real();
        if (ov > best) {
            best = ov;
            pick = w;
        }
    }
    d.u *= pick;
    // relabel projectors: u' = ωu shifts p_m to p_{m-j}
    int j = static_cast<int>(std::lround(std::arg(pick) * d.z / (2 * M_PI)));
    j = ((j % d.z) + d.z) % d.z;
    std::vector<cmat> p(d.p.size());
    for (int m = 0; m < d.z; ++m) p[static_cast<std::size_t>((m + j) % d.z)] = d.p[static_cast<std::size_t>(m)];
    d.p = std::move(p);
}

cmat upow(const cmat& u, int m)
{
    const Eigen::Index d = u.rows();
    cmat r = cmat::Identity(d, d);
    cmat b = m >= 0 ? u : cmat(u.adjoint());
    for (int k = 0; k < std::abs(m); ++k) r = r * b;
    return r;
}

std::vector<double> simpson_grid(double s1, int nodes)
{
    if (nodes < 3) nodes = 3;
    if (nodes % 2 == 0) ++nodes;
    return linspace(0.0, s1, nodes);
}

}  // namespace

AdmissibleFamily make_family(Eigen::Index dim, std::function<cmat(double)> F,
                             std::function<std::vector<cmat>(double)> P,
                             std::function<std::vector<cd>(double)> eig, int samples)
{
    AdmissibleFamily fam;
    fam.dim = dim;
    fam.F = std::move(F);
    fam.P = std::move(P);
    fam.eig = std::move(eig);
    fam.ell = 0;
    for (double s : linspace(0, 1, samples)) {
        cmat Q = cmat::Identity(dim, dim);
        for (const auto& p : fam.P(s)) Q -= p;
        fam.ell = std::max(fam.ell, spectral_radius<double>(fam.F(s) * Q));
    }
    if (!(fam.ell < 1)) throw spectral_error("family is not admissible: sup spr(FQ) >= 1");
    return fam;
}

AdmissibleFamily ris_family(const RISModel& m, double alpha, int samples)
{
    const int z0 = cycle_length(reduced_map(m, 0.0));
    for (double s : linspace(0, 1, samples))
        if (cycle_length(reduced_map(m, s)) != z0) throw model_error("cycle length varies along the schedule");
    auto F = [m, alpha](double s) {
        auto d = decompose(m, s, alpha);
        return cmat(deformed_map(m, s, alpha).matrix / d.lambda);
    };
    auto ref = std::make_shared<cmat>(decompose(m, 0.0, alpha).u);
    auto P = [m, alpha, ref](double s) {
        auto d = decompose(m, s, alpha);
        align_u(d, *ref);
        std::vector<cmat> out;
        for (int k = 0; k < d.z; ++k) out.push_back(peripheral_projector(d, k));
        return out;
    };
    auto eig = [z0](double) {
        std::vector<cd> out;
        for (int k = 0; k < z0; ++k) out.push_back(std::exp(2.0 * M_PI * I1 * double(k) / double(z0)));
        return out;
    };
    return make_family(m.dS * m.dS, F, P, eig, samples);
}

IntertwinerPath intertwiner(const AdmissibleFamily& fam, int n_steps, double h)
{
    const Eigen::Index D = fam.dim;
    auto gen = [&](double s) {
        auto [a, b] = stencil(s, h);
        auto Pa = fam.P(a), Pb = fam.P(b), P = fam.P(s);
        // the family is completed by Q = Id − Σ P^m, so Q'Q enters as well
        cmat G = cmat::Zero(D, D), Q = cmat::Identity(D, D), dQ = cmat::Zero(D, D);
        for (std::size_t m = 0; m < P.size(); ++m) {
            cmat dP = (Pb[m] - Pa[m]) / (b - a);
            G += dP * P[m];
            Q -= P[m];
            dQ -= dP;
        }
        return cmat(G + dQ * Q);
    };
    IntertwinerPath path;
    path.grid = linspace(0, 1, n_steps + 1);
    cmat W = cmat::Identity(D, D);
    path.W.push_back(W);
    const double dt = 1.0 / n_steps;
    for (int i = 0; i < n_steps; ++i) {
        double s = path.grid[static_cast<std::size_t>(i)];
        cmat G0 = gen(s), Gm = gen(s + dt / 2), G1 = gen(s + dt);
        cmat k1 = G0 * W;
        cmat k2 = Gm * (W + dt / 2 * k1);
        cmat k3 = Gm * (W + dt / 2 * k2);
        cmat k4 = G1 * (W + dt * k3);
        W += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        path.W.push_back(W);
    }
    auto P0 = fam.P(0.0);
    for (std::size_t i = 0; i < path.W.size(); ++i) {
        const cmat& w = path.W[i];
        Eigen::PartialPivLU<cmat> lu(w);
        path.Winv.push_back(lu.inverse());
        Eigen::JacobiSVD<cmat> svd(w);
        auto sv = svd.singularValues();
        path.max_cond = std::max(path.max_cond, sv(0) / sv(sv.size() - 1));
        auto Ps = fam.P(path.grid[i]);
        for (std::size_t m = 0; m < Ps.size(); ++m)
            path.defect = std::max(path.defect, max_abs(cmat(w * P0[m] - Ps[m] * w)));
    }
    if (path.defect > 1e-4) throw spectral_error("intertwiner: intertwining defect above 1e-4, refine n_steps");
    return path;
}

namespace {

// intertwiner on a grid that contains k/T
cmat intertwiner_at(const AdmissibleFamily& fam, int k, int T, int min_steps = 400)
{
    int r = std::max(1, (min_steps + T - 1) / T);
    auto path = intertwiner(fam, T * r);
    return path.W[static_cast<std::size_t>(k * r)];
}

}  // namespace

ProductComparison projector_product(const AdmissibleFamily& fam, int m, int T, int k)
{
    if (k < 0) k = T;
    ProductComparison c;
    auto pick = [&](double s) { return fam.P(s)[static_cast<std::size_t>(m)]; };
    c.product = pick(0.0);
    for (int n = 1; n <= k; ++n) c.product = pick(double(n) / T) * c.product;
    c.approx = intertwiner_at(fam, k, T) * pick(0.0);
    c.distance = (c.product - c.approx).norm();
    return c;
}

ProductComparison rank_one_product(const RISModel& model, double alpha, int T, int k)
{
    if (k < 0) k = T;
    const double s1 = double(k) / T;
    ProductComparison c;
    auto P = [&](double s) { return peripheral_projector(decompose(model, s, alpha), 0); };
    c.product = P(0.0);
    for (int n = 1; n <= k; ++n) c.product = P(double(n) / T) * c.product;
    double th = theta_exponent(model, alpha, s1, std::max(201, T + 1));
    auto d0 = decompose(model, 0.0, alpha);
    auto d1 = decompose(model, s1, alpha);
    cvec phi1 = vectorize<double>(d1.rho);
    cvec psi0 = vectorize<double>(cmat(d0.I.transpose()));
    c.approx = std::exp(-th) * phi1 * psi0.transpose();
    c.distance = (c.product - c.approx).norm();
    return c;
}

AdiabaticResult adiabatic_product(const AdmissibleFamily& fam, int T, const cmat& initial, int k)
{
    if (T > 10000) throw std::invalid_argument("adiabatic_product: T above 1e4");
    if (k < 0) k = T;
    const Eigen::Index d = initial.rows();
    cvec x = vectorize<double>(initial);
    cvec ex = x;
    for (int n = 1; n <= k; ++n) ex = fam.F(double(n) / T) * ex;

    cmat W = intertwiner_at(fam, k, T);
    auto P0 = fam.P(0.0);
    cvec ap = cvec::Zero(x.size());
    std::vector<cd> lp(P0.size(), cd(1));
    for (int n = 1; n <= k; ++n) {
        auto e = fam.eig(double(n) / T);
        for (std::size_t m = 0; m < lp.size(); ++m) lp[m] *= e[m];
    }
    for (std::size_t m = 0; m < P0.size(); ++m) ap += lp[m] * (W * (P0[m] * x));

    // Q-chain term
    cmat Q0 = cmat::Identity(fam.dim, fam.dim);
    for (const auto& p : P0) Q0 -= p;
    cvec q = Q0 * x;
    for (int n = 1; n <= k; ++n) {
        double s = double(n) / T;
        cmat Q = cmat::Identity(fam.dim, fam.dim);
        for (const auto& p : fam.P(s)) Q -= p;
        q = fam.F(s) * (Q * q);
    }
    ap += q;

    AdiabaticResult r;
    r.exact = devectorize<double>(ex, d);
    r.approx = devectorize<double>(ap, d);
    r.residual = trace_norm<double>(r.exact - r.approx);
    return r;
}

std::vector<double> qchain_norms(const AdmissibleFamily& fam, int T)
{
    auto Qat = [&](double s) {
        cmat Q = cmat::Identity(fam.dim, fam.dim);
        for (const auto& p : fam.P(s)) Q -= p;
        return Q;
    };
    cmat M = Qat(0.0);
    std::vector<double> out;
    for (int n = 1; n <= T; ++n) {
        double s = double(n) / T;
        M = fam.F(s) * Qat(s) * M;
        out.push_back(M.operatorNorm());
    }
    return out;
}

double theta_exponent(const RISModel& m, double alpha, double s1, int nodes, double h)
{
    auto grid = simpson_grid(s1, nodes);
    std::vector<double> f;
    for (double s : grid) {
        auto [a, b] = stencil(s, h);
        auto d = decompose(m, s, alpha);
        cmat dr = (decompose(m, b, alpha).rho - decompose(m, a, alpha).rho) / (b - a);
        f.push_back((d.I * dr).trace().real());
    }
    return simpson(f, grid.size() > 1 ? grid[1] - grid[0] : 0.0);
}

double theta_exponent_m(const RISModel& m, double alpha, int mm, double s1, int nodes, double h)
{
    auto grid = simpson_grid(s1, nodes);
    std::vector<double> f;
    for (double s : grid) {
        auto [a, b] = stencil(s, h);
        auto d = decompose(m, s, alpha);
        auto da = decompose(m, a, alpha), db = decompose(m, b, alpha);
        align_u(da, d.u);
        align_u(db, d.u);
        cmat dv = (upow(db.u, mm) * db.rho - upow(da.u, mm) * da.rho) / (b - a);
        f.push_back((d.I * upow(d.u, -mm) * dv).trace().real());
    }
    return simpson(f, grid.size() > 1 ? grid[1] - grid[0] : 0.0);
}

DeformedAdiabaticState deformed_adiabatic_state(const RISModel& m, double alpha, int k, int T, const cmat& rho_i)
{
    const double s1 = double(k) / T;
    const int z = cycle_length(reduced_map(m, 0.0));
    for (double s : linspace(0, 1, 21))
        if (cycle_length(reduced_map(m, s)) != z) throw model_error("cycle length varies along the schedule");
    DeformedAdiabaticState out;
    out.z = z;
    out.theta = theta_exponent(m, alpha, s1, std::max(201, T + 1));

    auto d0 = decompose(m, 0.0, alpha);
    auto d1 = decompose(m, s1, alpha);
    align_u(d1, d0.u);
    out.approx = cmat::Zero(m.dS, m.dS);
    for (int mm = 0; mm < z; ++mm) {
        cd w = (d0.I * d0.p[static_cast<std::size_t>(mm)] * rho_i).trace();
        int idx = (((mm - k) % z) + z) % z;
        out.approx += w * d1.rho * d1.p[static_cast<std::size_t>(idx)];
    }
    out.approx *= double(z) * std::exp(-out.theta);

    cvec x = vectorize<double>(rho_i);
    for (int n = 1; n <= k; ++n) {
        double s = double(n) / T;
        auto L = deformed_map(m, s, alpha);
        x = L.matrix * x / spectral_radius<double>(L.matrix);
    }
    out.exact = devectorize<double>(x, m.dS);
    out.residual = trace_norm<double>(out.exact - out.approx);
    return out;
}

cmat rho_adiab(const RISModel& m, int k, int T, const cmat& rho_i)
{
    const double s1 = double(k) / T;
    auto d0 = decompose(m, 0.0, 0.0);
    auto d1 = decompose(m, s1, 0.0);
    align_u(d1, d0.u);
    const int z = d0.z;
    if (d1.z != z) throw model_error("cycle length varies along the schedule");
    cmat out = cmat::Zero(m.dS, m.dS);
    for (int n = 0; n < z; ++n) {
        cd w = (d0.p[static_cast<std::size_t>(n)] * rho_i).trace();
        int idx = (((n - k) % z) + z) % z;
        out += w * d1.rho * d1.p[static_cast<std::size_t>(idx)];
    }
    return double(z) * out;
}

}  // namespace rislab
