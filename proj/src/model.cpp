#include "rislab/model.hpp"
#include "rislab/spectral.hpp"

#include <numeric>

namespace rislab {

namespace {

const std::array<double, 6> kBeta2 = {35.483, 141.929, 42.945, 93.5, 17.808, 1.061};

}  // namespace

double beta1(double s)
{
    return 2.0 * (3.0 + 4.0 * std::tanh(2.0 * s)) / (3.0 + 2.0 * std::log(std::cosh(2.0)));
}

double beta2(double s)
{
    const auto& a = kBeta2;
    return a[0] * std::tanh(2 * s) - a[1] * std::tanh(s / 2) - a[2] * s * s * s + a[3] * s * s - a[4] * s + a[5];
}

ScalarFn ScalarFn::constant(double c)
{
    ScalarFn f;
    f.kind_ = Kind::Constant;
    f.poly_ = {c, 0, 0, 0};
    return f;
}

ScalarFn ScalarFn::coeff(std::array<double, 4> poly, std::vector<double> a, std::vector<double> b)
{
    if (a.size() != b.size()) throw model_error("coefficient schedule: tanh a/b length mismatch");
    ScalarFn f;
    f.kind_ = Kind::Coeff;
    f.poly_ = poly;
    f.ta_ = std::move(a);
    f.tb_ = std::move(b);
    return f;
}

ScalarFn ScalarFn::table(std::vector<double> s, std::vector<double> v)
{
    const std::size_t n = s.size();
    if (n < 2 || v.size() != n) throw model_error("table schedule: need >= 2 nodes with matching values");
    for (std::size_t i = 1; i < n; ++i)
        if (!(s[i] > s[i - 1])) throw model_error("table schedule: nodes must increase");
    ScalarFn f;
    f.kind_ = Kind::Table;
    f.xs_ = std::move(s);
    f.ys_ = std::move(v);
    f.m_.assign(n, 0.0);
    if (n > 2) {
        // natural spline: tridiagonal system for interior second derivatives
        const Eigen::Index k = static_cast<Eigen::Index>(n) - 2;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd r(k);
        const auto& x = f.xs_;
        const auto& y = f.ys_;
        for (Eigen::Index i = 0; i < k; ++i) {
            std::size_t j = static_cast<std::size_t>(i) + 1;
            double h0 = x[j] - x[j - 1], h1 = x[j + 1] - x[j];
            A(i, i) = (h0 + h1) / 3.0;
            if (i > 0) A(i, i - 1) = h0 / 6.0;
            if (i + 1 < k) A(i, i + 1) = h1 / 6.0;
            r(i) = (y[j + 1] - y[j]) / h1 - (y[j] - y[j - 1]) / h0;
        }
        Eigen::VectorXd m = A.partialPivLu().solve(r);
        for (Eigen::Index i = 0; i < k; ++i) f.m_[static_cast<std::size_t>(i) + 1] = m(i);
    }
    return f;
}

ScalarFn ScalarFn::preset(const std::string& name)
{
    if (name != "beta1" && name != "beta2") throw model_error("unknown schedule preset '" + name + "'");
    ScalarFn f;
    f.kind_ = Kind::Preset;
    f.name_ = name;
    return f;
}

double ScalarFn::operator()(double s) const
{
    switch (kind_) {
    case Kind::Preset:
        return name_ == "beta1" ? beta1(s) : beta2(s);
    case Kind::Constant:
        return poly_[0];
    case Kind::Coeff: {
        double r = poly_[0] + s * (poly_[1] + s * (poly_[2] + s * poly_[3]));
        for (std::size_t i = 0; i < ta_.size(); ++i) r += ta_[i] * std::tanh(tb_[i] * s);
        return r;
    }
    case Kind::Table: {
        const auto& x = xs_;
        std::size_t j = std::upper_bound(x.begin(), x.end(), s) - x.begin();
        j = std::clamp<std::size_t>(j, 1, x.size() - 1);
        double h = x[j] - x[j - 1];
        double a = (x[j] - s) / h, b = (s - x[j - 1]) / h;
        return a * ys_[j - 1] + b * ys_[j] + ((a * a * a - a) * m_[j - 1] + (b * b * b - b) * m_[j]) * h * h / 6.0;
    }
    }
    return 0.0;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
}

cmat ladder_lowering()
{
    cmat a = cmat::Zero(2, 2);
    a(0, 1) = 1.0;
    return a;
}

RISModel preset_model(const std::string& interaction, const std::string& beta)
{
    const double E0 = 0.8, E = 0.9, mu1 = 1.0;
    cmat a = ladder_lowering();
    cmat ad = a.adjoint();
    RISModel m;
    m.name = interaction + "/" + beta;
    m.dS = m.dE = 2;
    m.hS = E * ad * a;
    m.tau = 0.5;
    m.coupling = 2.0;
    m.schedule.hE = E0 * ad * a;
    if (interaction == "rwa")
        m.schedule.v = mu1 / 2 * (kron(ad, a) + kron(a, ad));
    else if (interaction == "fd")
        m.schedule.v = mu1 / 2 * kron(cmat(a + ad), cmat(a + ad));
    else
        throw model_error("unknown interaction preset '" + interaction + "'");
    m.schedule.beta = ScalarFn::preset(beta);
    return m;
}

void validate(const RISModel& m, int samples)
{
    if (m.dS < 1 || m.dE < 1) throw model_error("dimensions must be positive");
    if (m.hS.rows() != m.dS || !is_hermitian(m.hS)) throw model_error("hS must be a Hermitian dS x dS matrix");
    if (m.schedule.hE.rows() != m.dE || !is_hermitian(m.schedule.hE))
        throw model_error("hE must be a Hermitian dE x dE matrix");
    if (m.schedule.v.rows() != m.dS * m.dE || !is_hermitian(m.schedule.v))
        throw model_error("v must be a Hermitian (dS*dE) square matrix");
    if (!(m.tau > 0)) throw model_error("tau must be positive");
    for (double s : linspace(0, 1, samples)) {
        if (!(m.beta(s) > 0)) throw model_error("beta(s) must be positive on [0,1]");
        cmat Y = m.Y(s), h = m.hE(s);
        if (Y.rows() != m.dE || !is_hermitian(Y)) throw model_error("Y must be a Hermitian dE x dE matrix");
        if (max_abs(cmat(Y * h - h * Y)) > 1e-10) throw model_error("[Y(s), hE(s)] != 0");
    }
}

cmat gibbs_state(const cmat& hE, double beta)
{
    auto e = hermitian_eig(hE);
    double e0 = e.values.minCoeff();
    rvec w = (-beta * (e.values.array() - e0)).exp();
    w /= w.sum();
    return e.vectors * w.cast<cd>().asDiagonal() * e.vectors.adjoint();
}

cmat joint_unitary(const RISModel& m, double s, double tau)
{
    const auto IS = cmat::Identity(m.dS, m.dS), IE = cmat::Identity(m.dE, m.dE);
    cmat H = kron(m.hS, IE) + kron(IS, m.hE(s)) + m.v(s);
    return expm_hermitian<double>(H, cd(0, -tau));
}

cmat joint_unitary(const RISModel& m, double s) { return joint_unitary(m, s, m.tau); }

ProbeBasis probe_basis(const RISModel& m, double s)
{
    cmat h = m.hE(s), Y = m.Y(s);
    auto eh = hermitian_eig(h);
    const Eigen::Index d = m.dE;
    ProbeBasis pb;
    pb.W = cmat(d, d);
    // diagonalise Y inside each degenerate h_E block
    Eigen::Index start = 0;
    while (start < d) {
        Eigen::Index end = start + 1;
        while (end < d && std::abs(eh.values(end) - eh.values(start)) <= 1e-9 * (1 + std::abs(eh.values(start)))) ++end;
        cmat B = eh.vectors.middleCols(start, end - start);
        cmat Yb = B.adjoint() * Y * B;
        Yb = (Yb + Yb.adjoint()) / 2.0;
        auto ey = hermitian_eig(Yb);
        pb.W.middleCols(start, end - start) = B * ey.vectors;
        start = end;
    }
    pb.y.resize(d);
    pb.energy.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        pb.y(i) = (pb.W.col(i).adjoint() * Y * pb.W.col(i))(0, 0).real();
        pb.energy(i) = (pb.W.col(i).adjoint() * h * pb.W.col(i))(0, 0).real();
    }
    double e0 = pb.energy.minCoeff();
    pb.xi = (-m.beta(s) * (pb.energy.array() - e0)).exp();
    pb.xi /= pb.xi.sum();
    return pb;
}

std::vector<KrausTerm> kraus_family(const RISModel& m, double s, double alpha, double tau)
{
    ProbeBasis pb = probe_basis(m, s);
    cmat U = joint_unitary(m, s, tau);
    const Eigen::Index dS = m.dS, dE = m.dE;
    cmat R = kron(cmat::Identity(dS, dS), pb.W);
    cmat Ub = R.adjoint() * U * R;
    std::vector<KrausTerm> out;
    for (int i = 0; i < dE; ++i)
        for (int j = 0; j < dE; ++j) {
            cmat K(dS, dS);
            double w = std::sqrt(pb.xi(i)) * std::exp(alpha * (pb.y(j) - pb.y(i)) / 2);
            for (Eigen::Index p = 0; p < dS; ++p)
                for (Eigen::Index q = 0; q < dS; ++q) K(p, q) = Ub(p * dE + j, q * dE + i) * w;
            out.push_back({i, j, std::move(K), pb.y(i), pb.y(j)});
        }
    return out;
}

namespace {

SuperOperator<double> from_terms(const std::vector<KrausTerm>& ks)
{
    std::vector<cmat> mats;
    mats.reserve(ks.size());
    for (const auto& k : ks) mats.push_back(k.K);
    return from_kraus(std::move(mats));
}

}  // namespace

SuperOperator<double> reduced_map(const RISModel& m, double s)
{
    auto L = from_terms(kraus_family(m, s, 0.0));
    if (!L.tp) throw model_error("reduced map is not trace preserving");
    return L;
}

SuperOperator<double> deformed_map(const RISModel& m, double s, double alpha, double tau)
{
    auto L = from_terms(kraus_family(m, s, alpha, tau));
    L.tp = alpha == 0.0 && L.tp;
    return L;
}

SuperOperator<double> deformed_map(const RISModel& m, double s, double alpha)
{
    return deformed_map(m, s, alpha, m.tau);
}

SuperOperator<double> deformed_map_direct(const RISModel& m, double s, double alpha)
{
    const Eigen::Index dS = m.dS, dE = m.dE;
    cmat U = joint_unitary(m, s);
    cmat xi = gibbs_state(m.hE(s), m.beta(s));
    cmat IS = cmat::Identity(dS, dS);
    cmat Ep = kron(IS, expm_hermitian<double>(m.Y(s), cd(alpha, 0)));
    cmat Em = kron(IS, expm_hermitian<double>(m.Y(s), cd(-alpha, 0)));
    cmat M(dS * dS, dS * dS);
    for (Eigen::Index q = 0; q < dS; ++q)
        for (Eigen::Index p = 0; p < dS; ++p) {
            cmat eta = cmat::Zero(dS, dS);
            eta(p, q) = 1.0;
            cmat J = Ep * U * kron(eta, xi) * Em * U.adjoint();
            M.col(p + dS * q) = vectorize<double>(partial_trace_env(J, dS, dE));
        }
    return from_matrix(std::move(M), dS);
}

cmat deformed_map_alpha_derivative(const RISModel& m, double s, double alpha)
{
    auto ks = kraus_family(m, s, alpha);
    const Eigen::Index d = m.dS;
    cmat D = cmat::Zero(d * d, d * d);
    for (const auto& k : ks) D += (k.yj - k.yi) * kron(cmat(k.K.conjugate()), k.K);
    return D;
}

cmat obstruction_X(const RISModel& m, double s)
{
    auto L = reduced_map(m, s);
    if (!is_irreducible(L).irreducible) throw spectral_error("obstruction_X: L(s) is not irreducible");
    cmat rho = invariant_state(L);
    cmat xi = gibbs_state(m.hE(s), m.beta(s));
    cmat U = joint_unitary(m, s);
    cmat P = kron(rho, xi);
    return U * P * U.adjoint() - P;
}

double tri_symmetry_defect(const RISModel& m, const std::vector<double>& alphas, const std::vector<double>& s_nodes)
{
    double worst = 0;
    for (double s : s_nodes)
        for (double a : alphas) {
            double l1 = spectral_radius(deformed_map(m, s, a).matrix);
            double l2 = spectral_radius(deformed_map(m, s, -1.0 - a).matrix);
            worst = std::max(worst, std::abs(l1 - l2));
        }
    return worst;
}

}  // namespace rislab
