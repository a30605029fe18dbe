#include "rislab/spectral.hpp"
#include "rislab/model.hpp"

#include <random>

namespace rislab {

namespace {

constexpr std::complex<double> I1(0, 1);

// orthonormal basis of span(cols) via rank-revealing QR
cmat orth(const cmat& A, double tol = 1e-10)
{
    if (A.cols() == 0) return cmat(A.rows(), 0);
    Eigen::ColPivHouseholderQR<cmat> qr(A);
    qr.setThreshold(tol);
    Eigen::Index r = qr.rank();
    cmat Q = qr.householderQ() * cmat::Identity(A.rows(), r);
    return Q;
}

cmat orbit(const std::vector<cmat>& ks, const cvec& x)
{
    const Eigen::Index d = x.size();
    cmat B = orth(cmat(x));
    for (Eigen::Index step = 0; step < d; ++step) {
        cmat grown(d, B.cols() * (1 + static_cast<Eigen::Index>(ks.size())));
        grown.leftCols(B.cols()) = B;
        Eigen::Index c = B.cols();
        for (const auto& k : ks) {
            grown.middleCols(c, B.cols()) = k * B;
            c += B.cols();
        }
        cmat nb = orth(grown);
        if (nb.cols() == B.cols()) break;
        B = nb;
    }
    return B;
}

void phase_fix_positive(cmat& X, const char* what)
{
    cd t = X.trace();
    if (std::abs(t) < 1e-300) throw spectral_error(std::string(what) + ": zero trace eigenvector");
    X *= std::conj(t) / std::abs(t);
    X = (X + X.adjoint()) / 2.0;
    auto e = hermitian_eig(X);
    double scale = std::max(1e-300, e.values.cwiseAbs().maxCoeff());
    if (e.values.minCoeff() < -1e-9 * scale) throw spectral_error(std::string(what) + ": phase fix left a negative eigenvalue");
    rvec w = e.values.cwiseMax(0.0);
    X = e.vectors * w.cast<cd>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

double simpson(const std::vector<double>& f, double h)
{
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return h * (f[0] + f[1]) / 2;
    auto simp = [&](std::size_t a, std::size_t b) {  // b - a even
        double s = f[a] + f[b];
        for (std::size_t i = a + 1; i < b; ++i) s += (i - a) % 2 ? 4 * f[i] : 2 * f[i];
        return s * h / 3;
    };
    if ((n - 1) % 2 == 0) return simp(0, n - 1);
    // odd number of intervals: close with a 3/8 panel
    std::size_t m = n - 4;
    double tail = 3 * h / 8 * (f[m] + 3 * f[m + 1] + 3 * f[m + 2] + f[m + 3]);
    return (m > 0 ? simp(0, m) : 0.0) + tail;
}

IrreducibilityResult is_irreducible(const SuperOperator<double>& phi)
{
    if (!phi.kraus) throw spectral_error("is_irreducible: Kraus family required");
    const auto& ks = *phi.kraus;
    const Eigen::Index d = phi.dim;
    IrreducibilityResult res;

    // algebra closure: span of words, grown until stable
    std::vector<cvec> basis_vecs;
    cmat W = vectorize<double>(cmat::Identity(d, d));
    W = orth(W);
    for (Eigen::Index step = 0; step < d * d; ++step) {
        cmat grown(d * d, W.cols() * (1 + static_cast<Eigen::Index>(ks.size())));
        grown.leftCols(W.cols()) = W;
        Eigen::Index c = W.cols();
        for (const auto& k : ks)
            for (Eigen::Index j = 0; j < W.cols(); ++j)
                grown.col(c++) = vectorize<double>(cmat(k * devectorize<double>(W.col(j), d)));
        cmat nw = orth(grown);
        if (nw.cols() == W.cols()) break;
        W = nw;
    }
    res.algebra_dim = W.cols();
    res.irreducible = res.algebra_dim == d * d;
    if (res.irreducible) return res;

    // witness: orbit of an eigenvector of a generic element of the algebra
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> nd;
    cmat A = cmat::Zero(d, d);
    for (Eigen::Index j = 0; j < W.cols(); ++j) A += cd(nd(gen), nd(gen)) * devectorize<double>(W.col(j), d);
    Eigen::ComplexEigenSolver<cmat> es(A);
    for (Eigen::Index j = 0; j < d; ++j) {
        cmat B = orbit(ks, es.eigenvectors().col(j));
        if (B.cols() < d) {
            res.witness = B;
            return res;
        }
    }
    // fall back to standard basis vectors
    for (Eigen::Index j = 0; j < d; ++j) {
        cmat B = orbit(ks, cvec::Unit(d, j));
        if (B.cols() < d) {
            res.witness = B;
            break;
        }
    }
    return res;
}

cmat invariant_state(const SuperOperator<double>& phi)
{
    auto g = general_eig(phi.matrix);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < g.values.size(); ++i)
        if (std::abs(g.values(i) - 1.0) < std::abs(g.values(best) - 1.0)) best = i;
    cmat rho = devectorize<double>(g.right.col(best), phi.dim);
    phase_fix_positive(rho, "invariant_state");
    return rho / rho.trace().real();
}

bool spectral_irreducibility(const SuperOperator<double>& phi)
{
    auto g = general_eig(phi.matrix);
    int near_one = 0;
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
        if (std::abs(g.values(i) - 1.0) <= cluster_tol(1.0)) ++near_one;
    if (near_one != 1) return false;
    try {
        cmat rho = invariant_state(phi);
        return hermitian_eig(rho).values.minCoeff() > 1e-12;
    } catch (const std::exception&) {
        return false;
    }
}

int cycle_length(const SuperOperator<double>& phi0)
{
    auto g = general_eig(phi0.matrix);
    std::vector<cd> per;
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
        if (std::abs(g.values(i)) >= 1 - 1e-8) per.push_back(g.values(i));
    const int z = static_cast<int>(per.size());
    if (z == 0) throw spectral_error("cycle_length: no peripheral eigenvalue on the unit circle");
    // must be exactly the z-th roots of unity
    for (int m = 0; m < z; ++m) {
        cd root = std::exp(2.0 * M_PI * I1 * double(m) / double(z));
        int hits = 0;
        for (auto v : per)
            if (std::abs(v - root) <= 1e-7) ++hits;
        if (hits != 1) throw spectral_error("cycle_length: peripheral spectrum is not a cyclic group");
    }
    return z;
}

cmat peripheral_projector(const PeripheralDecomposition& dec, int m)
{
    const Eigen::Index d = dec.rho.rows();
    cmat um = cmat::Identity(d, d), uinv = cmat::Identity(d, d);
    int mm = ((m % dec.z) + dec.z) % dec.z;
    for (int k = 0; k < mm; ++k) {
        um = um * dec.u;
        uinv = uinv * dec.u.adjoint();
    }
    cmat F = dec.I * uinv;  // functional η ↦ Tr(F η) = vec(F^T)^T vec(η)
    cvec r = vectorize<double>(cmat(dec.rho * um));
    cvec l = vectorize<double>(cmat(F.transpose()));
    return r * l.transpose();
}

PeripheralDecomposition peripheral_decomposition(const SuperOperator<double>& phi_alpha,
                                                 const SuperOperator<double>& phi0)
{
    const Eigen::Index d = phi0.dim;
    PeripheralDecomposition dec;
    dec.z = cycle_length(phi0);
    dec.u = cmat::Identity(d, d);
    if (dec.z > 1) {
        cd theta = std::exp(2.0 * M_PI * I1 / double(dec.z));
        auto g0 = general_eig(phi0.matrix);
        Eigen::Index k = 0;
        for (Eigen::Index i = 1; i < g0.values.size(); ++i)
            if (std::abs(g0.values(i) - theta) < std::abs(g0.values(k) - theta)) k = i;
        cmat u = devectorize<double>(g0.left.col(k), d);
        double c = (u * u.adjoint()).trace().real() / double(d);
        u /= std::sqrt(c);
        cmat uz = cmat::Identity(d, d);
        for (int j = 0; j < dec.z; ++j) uz = uz * u;
        cd ph = uz.trace() / double(d);
        u *= std::exp(-I1 * std::arg(ph) / double(dec.z));
        dec.u = u;
    }
    dec.p.clear();
    {
        cmat uk = cmat::Identity(d, d);
        std::vector<cmat> powers;
        for (int k = 0; k < dec.z; ++k) {
            powers.push_back(uk);
            uk = uk * dec.u;
        }
        for (int m = 0; m < dec.z; ++m) {
            cmat pm = cmat::Zero(d, d);
            for (int k = 0; k < dec.z; ++k)
                pm += std::exp(-2.0 * M_PI * I1 * double(m * k) / double(dec.z)) * powers[static_cast<std::size_t>(k)];
            dec.p.push_back(pm / double(dec.z));
        }
    }

    auto g = general_eig(phi_alpha.matrix);
    double spr = g.values.cwiseAbs().maxCoeff();
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < g.values.size(); ++i)
        if (std::abs(g.values(i) - spr) < std::abs(g.values(top) - spr)) top = i;
    int mult = 0;
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
        if (std::abs(g.values(i) - g.values(top)) <= cluster_tol(spr)) ++mult;
    if (mult != 1) throw spectral_error("peripheral_decomposition: spectral radius is not a simple eigenvalue");
    dec.lambda = g.values(top).real();

    dec.rho = devectorize<double>(g.right.col(top), d);
    phase_fix_positive(dec.rho, "rho");
    dec.rho /= dec.rho.trace().real();

    cmat L = devectorize<double>(g.left.col(top), d);
    dec.I = L.adjoint();
    phase_fix_positive(dec.I, "I");
    dec.I /= (dec.I * dec.rho).trace().real();

    // projector residual against the eigen-decomposition
    dec.residual = 0;
    for (int m = 0; m < dec.z; ++m) {
        cd mu = dec.lambda * std::exp(2.0 * M_PI * I1 * double(m) / double(dec.z));
        Eigen::Index k = 0;
        for (Eigen::Index i = 1; i < g.values.size(); ++i)
            if (std::abs(g.values(i) - mu) < std::abs(g.values(k) - mu)) k = i;
        cvec r = g.right.col(k), l = g.left.col(k);
        cmat Pe = r * l.adjoint() / (l.adjoint() * r)(0, 0);
        dec.residual = std::max(dec.residual, max_abs(cmat(Pe - peripheral_projector(dec, m))));
    }
    return dec;
}

bool primitivity_check(const SuperOperator<double>& phi)
{
    if (!spectral_irreducibility(phi)) return false;
    return cycle_length(phi) == 1;
}

SuperOperator<double> conditioned_map(const SuperOperator<double>& phi_alpha, const PeripheralDecomposition& dec)
{
    if (!phi_alpha.kraus) throw spectral_error("conditioned_map: Kraus family required");
    auto e = hermitian_eig(dec.I);
    if (e.values.minCoeff() <= 0 || e.values.maxCoeff() / e.values.minCoeff() > 1e12)
        throw spectral_error("conditioned_map: I is ill-conditioned");
    cmat Ih = e.vectors * e.values.cwiseSqrt().cast<cd>().asDiagonal() * e.vectors.adjoint();
    cmat Imh = e.vectors * e.values.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() * e.vectors.adjoint();
    std::vector<cmat> ks;
    for (const auto& k : *phi_alpha.kraus) ks.push_back(Ih * k * Imh / std::sqrt(dec.lambda));
    return from_kraus(std::move(ks));
}

std::vector<cmat> deform_kraus(const std::vector<cmat>& V, const std::vector<double>& v, double alpha)
{
    std::vector<cmat> W;
    for (std::size_t i = 0; i < V.size(); ++i) W.push_back(std::pow(v[i], alpha / 2) * V[i]);
    auto phi0 = from_kraus(V);
    auto phia = from_kraus(W);
    auto dec = peripheral_decomposition(phia, phi0);
    auto hat = conditioned_map(phia, dec);
    return *hat.kraus;
}

GrowthRates growth_rates(const RISModel& m, double s)
{
    auto ks = kraus_family(m, s, 0.0);
    double kmax = 0;
    for (const auto& k : ks) kmax = std::max(kmax, max_abs(k.K));
    if (kmax == 0) throw spectral_error("growth_rates: all Kraus operators vanish");
    GrowthRates g{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& k : ks) {
        if (max_abs(k.K) <= 1e-12 * kmax) continue;
        g.nu_minus = std::min(g.nu_minus, k.yj - k.yi);
        g.nu_plus = std::max(g.nu_plus, k.yj - k.yi);
    }
    return g;
}

GrowthRates growth_rates(const RISModel& m, const std::vector<double>& s_nodes)
{
    std::vector<double> lo, hi;
    for (double s : s_nodes) {
        auto g = growth_rates(m, s);
        lo.push_back(g.nu_minus);
        hi.push_back(g.nu_plus);
    }
    double h = s_nodes.size() > 1 ? s_nodes[1] - s_nodes[0] : 1.0;
    return {simpson(lo, h), simpson(hi, h)};
}

}  // namespace rislab
