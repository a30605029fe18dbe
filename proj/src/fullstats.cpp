#include "rislab/fullstats.hpp"
#include "rislab/csv.hpp"

#include <functional>
#include <numeric>
#include <random>

namespace rislab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> group_labels(const rvec& vals, std::vector<double>& centres, double tol)
{
    std::vector<int> order(static_cast<std::size_t>(vals.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals(a) < vals(b); });
    std::vector<int> lab(order.size());
    centres.clear();
    for (int idx : order) {
        double v = vals(idx);
        if (centres.empty() || std::abs(v - centres.back()) > tol * (1 + std::abs(v))) centres.push_back(v);
        lab[static_cast<std::size_t>(idx)] = static_cast<int>(centres.size()) - 1;
    }
    return lab;
}

cmat apply_list(const std::vector<cmat>& ks, const cmat& X)
{
    cmat out = cmat::Zero(X.rows(), X.cols());
    for (const auto& k : ks) out += k * X * k.adjoint();
    return out;
}

double tr_real(const cmat& X) { return X.trace().real(); }

}  // namespace

cmat SpectralObservable::matrix() const
{
    cmat A = cmat::Zero(projectors.front().rows(), projectors.front().cols());
    for (std::size_t i = 0; i < values.size(); ++i) A += values[i] * projectors[i];
    return A;
}

SpectralObservable spectral_observable(const cmat& A, double tol)
{
    auto e = hermitian_eig(A);
    SpectralObservable o;
    auto lab = group_labels(e.values, o.values, tol);
    const Eigen::Index d = A.rows();
    o.projectors.assign(o.values.size(), cmat::Zero(d, d));
    for (Eigen::Index i = 0; i < d; ++i)
        o.projectors[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])] +=
            e.vectors.col(i) * e.vectors.col(i).adjoint();
    // use group means as the outcome values
    std::vector<double> sum(o.values.size(), 0.0);
    std::vector<int> cnt(o.values.size(), 0);
    for (Eigen::Index i = 0; i < d; ++i) {
        sum[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])] += e.values(i);
        cnt[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])]++;
    }
    for (std::size_t g = 0; g < sum.size(); ++g) o.values[g] = sum[g] / cnt[g];
    return o;
}

MeasurementSetup MeasurementSetup::entropic(const cmat& rho_i)
{
    return {rho_i, cmat(-logm_pd(rho_i)), std::nullopt};
}

StepOps step_ops(const RISModel& m, double s)
{
    StepOps op;
    op.s = s;
    op.beta = m.beta(s);
    ProbeBasis pb = probe_basis(m, s);
    auto lab = group_labels(pb.y, op.y, 1e-9);
    const std::size_t G = op.y.size();
    op.energy.assign(G, 0.0);
    op.weight.assign(G, 0.0);
    op.dim.assign(G, 0);
    for (Eigen::Index i = 0; i < pb.y.size(); ++i) {
        auto g = static_cast<std::size_t>(lab[static_cast<std::size_t>(i)]);
        op.energy[g] += pb.energy(i);
        op.weight[g] += pb.xi(i);
        op.dim[g]++;
    }
    for (std::size_t g = 0; g < G; ++g) op.energy[g] /= op.dim[g];
    op.fwd.assign(G, std::vector<std::vector<cmat>>(G));
    op.bwd = op.fwd;
    for (const auto& k : kraus_family(m, s, 0.0)) {
        auto I = static_cast<std::size_t>(lab[static_cast<std::size_t>(k.i)]);
        auto J = static_cast<std::size_t>(lab[static_cast<std::size_t>(k.j)]);
        op.fwd[I][J].push_back(k.K);
        // ⟨ψ_i|U†|ψ_j⟩ √ξ_j = K_ij† √(ξ_j/ξ_i)
        op.bwd[I][J].push_back(k.K.adjoint() * std::sqrt(pb.xi(k.j) / pb.xi(k.i)));
    }
    return op;
}

Protocol make_protocol(const MeasurementSetup& setup, const RISModel& m, int T)
{
    if (T < 0) throw fullstats_error("T must be non-negative");
    Protocol p;
    p.model = m;
    p.T = T;
    p.rho_i = setup.rho_i;
    p.Ai = spectral_observable(setup.Ai);
    cvec x = vectorize<double>(setup.rho_i);
    for (int k = 1; k <= T; ++k) {
        double s = double(k) / T;
        p.steps.push_back(step_ops(m, s));
        x = reduced_map(m, s).matrix * x;
    }
    p.rho_f = devectorize<double>(x, m.dS);
    p.rho_f = (p.rho_f + p.rho_f.adjoint()) / 2.0;
    p.Af = spectral_observable(setup.Af ? *setup.Af : cmat(-logm_pd(p.rho_f)));
    return p;
}

double log_forward_prob(const Protocol& p, const Trajectory& t)
{
    const cmat& pi = p.Ai.projectors.at(static_cast<std::size_t>(t.a_i));
    cmat sig = pi * p.rho_i * pi;
    double lp = 0;
    for (int k = 0; k < p.T; ++k) {
        double tr = tr_real(sig);
        if (!(tr > 0)) return kNegInf;
        lp += std::log(tr);
        sig /= tr;
        const auto& op = p.steps[static_cast<std::size_t>(k)];
        sig = apply_list(op.fwd.at(static_cast<std::size_t>(t.i_vec[static_cast<std::size_t>(k)]))
                             .at(static_cast<std::size_t>(t.j_vec[static_cast<std::size_t>(k)])),
                         sig);
    }
    double last = tr_real(cmat(p.Af.projectors.at(static_cast<std::size_t>(t.a_f)) * sig));
    return last > 0 ? lp + std::log(last) : kNegInf;
}

double log_backward_prob(const Protocol& p, const Trajectory& t)
{
    const cmat& pf = p.Af.projectors.at(static_cast<std::size_t>(t.a_f));
    cmat sig = pf * p.rho_f * pf;
    double lp = 0;
    for (int k = p.T - 1; k >= 0; --k) {
        double tr = tr_real(sig);
        if (!(tr > 0)) return kNegInf;
        lp += std::log(tr);
        sig /= tr;
        const auto& op = p.steps[static_cast<std::size_t>(k)];
        sig = apply_list(op.bwd.at(static_cast<std::size_t>(t.i_vec[static_cast<std::size_t>(k)]))
                             .at(static_cast<std::size_t>(t.j_vec[static_cast<std::size_t>(k)])),
                         sig);
    }
    double last = tr_real(cmat(p.Ai.projectors.at(static_cast<std::size_t>(t.a_i)) * sig));
    return last > 0 ? lp + std::log(last) : kNegInf;
}

double forward_prob(const Protocol& p, const Trajectory& t) { return std::exp(log_forward_prob(p, t)); }
double backward_prob(const Protocol& p, const Trajectory& t) { return std::exp(log_backward_prob(p, t)); }

void fill_observables(const Protocol& p, Trajectory& t)
{
    t.delta_a = p.Ai.values[static_cast<std::size_t>(t.a_i)] - p.Af.values[static_cast<std::size_t>(t.a_f)];
    t.delta_y = 0;
    for (int k = 0; k < p.T; ++k) {
        const auto& y = p.steps[static_cast<std::size_t>(k)].y;
        t.delta_y += y[static_cast<std::size_t>(t.j_vec[static_cast<std::size_t>(k)])] -
                     y[static_cast<std::size_t>(t.i_vec[static_cast<std::size_t>(k)])];
    }
}

double entropy_production_rv(const Protocol& p, const Trajectory& t)
{
    double f = log_forward_prob(p, t), b = log_backward_prob(p, t);
    if (!std::isfinite(f) || !std::isfinite(b)) throw fullstats_error("entropy production on a zero-probability trajectory");
    return f - b;
}

bool balance_applicable(const Protocol& p)
{
    auto commutes = [](const cmat& a, const cmat& b) {
        return max_abs(cmat(a * b - b * a)) <= 1e-9 * std::max(1.0, max_abs(a) * max_abs(b));
    };
    if (!commutes(p.rho_i, p.Ai.matrix()) || !commutes(p.rho_f, p.Af.matrix())) return false;
    // ξ_k a function of Y_k: each Y group carries a single energy
    for (const auto& op : p.steps) {
        ProbeBasis pb = probe_basis(p.model, op.s);
        for (Eigen::Index i = 0; i < pb.y.size(); ++i)
            for (Eigen::Index j = 0; j < pb.y.size(); ++j)
                if (std::abs(pb.y(i) - pb.y(j)) <= 1e-9 * (1 + std::abs(pb.y(i))) &&
                    std::abs(pb.energy(i) - pb.energy(j)) > 1e-9 * (1 + std::abs(pb.energy(i))))
                    return false;
    }
    return true;
}

double balance_rhs(const Protocol& p, const Trajectory& t)
{
    const cmat& pi = p.Ai.projectors[static_cast<std::size_t>(t.a_i)];
    const cmat& pf = p.Af.projectors[static_cast<std::size_t>(t.a_f)];
    double r = std::log(tr_real(cmat(pi * p.rho_i)) * tr_real(pf) / (tr_real(cmat(pf * p.rho_f)) * tr_real(pi)));
    for (int k = 0; k < p.T; ++k) {
        const auto& op = p.steps[static_cast<std::size_t>(k)];
        r += op.beta * (op.energy[static_cast<std::size_t>(t.j_vec[static_cast<std::size_t>(k)])] -
                        op.energy[static_cast<std::size_t>(t.i_vec[static_cast<std::size_t>(k)])]);
    }
    return r;
}

double von_neumann_entropy(const cmat& rho)
{
    auto e = hermitian_eig(cmat((rho + rho.adjoint()) / 2.0));
    double s = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        if (e.values(i) > 0) s -= e.values(i) * std::log(e.values(i));
    return s;
}

double relative_entropy(const cmat& eta, const cmat& zeta)
{
    cmat z = (zeta + zeta.adjoint()) / 2.0;
    if (hermitian_eig(z).values.minCoeff() < kFaithfulFloor)
        throw fullstats_error("relative_entropy: reference state is not faithful");
    return -von_neumann_entropy(eta) - (eta * logm_pd(z)).trace().real();
}

double renyi_relative_entropy(const cmat& eta, const cmat& zeta, double alpha)
{
    cmat e = (eta + eta.adjoint()) / 2.0, z = (zeta + zeta.adjoint()) / 2.0;
    return std::log((powm_pd(e, alpha) * powm_pd(z, 1 - alpha)).trace().real());
}

ScalarBalance scalar_balance(const RISModel& m, int T, const cmat& rho_i)
{
    ScalarBalance b;
    cmat rho = rho_i;
    for (int k = 1; k <= T; ++k) {
        double s = double(k) / T;
        double beta = m.beta(s);
        cmat xi = gibbs_state(m.hE(s), beta);
        cmat U = joint_unitary(m, s);
        cmat J = U * kron(rho, xi) * U.adjoint();
        cmat rn = partial_trace_env(J, m.dS, m.dE);
        cmat xf = partial_trace_sys(J, m.dS, m.dE);
        rn = (rn + rn.adjoint()) / 2.0;
        double dS = von_neumann_entropy(rho) - von_neumann_entropy(rn);
        double dQ = (m.hE(s) * xf).trace().real() - (m.hE(s) * xi).trace().real();
        double sig = relative_entropy(J, kron(rn, xi));
        b.dS.push_back(dS);
        b.dQ.push_back(dQ);
        b.sigma.push_back(sig);
        b.beta.push_back(beta);
        b.sigma_tot += sig;
        b.max_identity_defect = std::max(b.max_identity_defect, std::abs(dS + sig - beta * dQ));
        rho = rn;
    }
    return b;
}

std::vector<Trajectory> enumerate_measure(const Protocol& p)
{
    double size = double(p.Ai.values.size()) * double(p.Af.values.size());
    for (const auto& op : p.steps) size *= double(op.y.size()) * double(op.y.size());
    if (size > 1e7) throw fullstats_error("enumerate_measure: trajectory count above 1e7");

    std::vector<Trajectory> out;
    Trajectory t;
    t.i_vec.assign(static_cast<std::size_t>(p.T), 0);
    t.j_vec.assign(static_cast<std::size_t>(p.T), 0);

    // forward probabilities by depth-first contraction
    std::function<void(int, const cmat&)> rec = [&](int k, const cmat& sig) {
        if (k == p.T) {
            for (std::size_t f = 0; f < p.Af.values.size(); ++f) {
                t.a_f = static_cast<int>(f);
                t.pF = std::max(0.0, tr_real(cmat(p.Af.projectors[f] * sig)));
                t.log_pF = t.pF > 0 ? std::log(t.pF) : kNegInf;
                t.log_pB = log_backward_prob(p, t);
                t.pB = std::exp(t.log_pB);
                fill_observables(p, t);
                t.varsigma = (t.pF > 0 && t.pB > 0) ? t.log_pF - t.log_pB : std::numeric_limits<double>::quiet_NaN();
                out.push_back(t);
            }
            return;
        }
        const auto& op = p.steps[static_cast<std::size_t>(k)];
        for (std::size_t I = 0; I < op.y.size(); ++I)
            for (std::size_t J = 0; J < op.y.size(); ++J) {
                t.i_vec[static_cast<std::size_t>(k)] = static_cast<int>(I);
                t.j_vec[static_cast<std::size_t>(k)] = static_cast<int>(J);
                rec(k + 1, apply_list(op.fwd[I][J], sig));
            }
    };
    for (std::size_t a = 0; a < p.Ai.values.size(); ++a) {
        t.a_i = static_cast<int>(a);
        const cmat& pi = p.Ai.projectors[a];
        rec(0, cmat(pi * p.rho_i * pi));
    }
    return out;
}

namespace {

int draw(const std::vector<double>& w, double u)
{
    double tot = 0;
    for (double x : w) tot += std::max(0.0, x);
    double acc = 0, target = u * tot;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += std::max(0.0, w[i]);
        if (target < acc) return static_cast<int>(i);
    }
    for (std::size_t i = w.size(); i-- > 0;)
        if (w[i] > 0) return static_cast<int>(i);
    return 0;
}

}  // namespace

SampleTable sample_trajectories(const Protocol& p, int n, std::uint64_t seed, bool with_backward)
{
    if (n < 1) throw fullstats_error("sample_trajectories: n must be positive");
    SampleTable tab;
    tab.seed = seed;
    tab.rows.resize(static_cast<std::size_t>(n));
    std::vector<double> wa(p.Ai.values.size());
    for (std::size_t a = 0; a < wa.size(); ++a) wa[a] = tr_real(cmat(p.Ai.projectors[a] * p.rho_i));

    for (int traj = 0; traj < n; ++traj) {
        // one stream per trajectory; step k always uses draws 2k+1, 2k+2
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(traj), static_cast<std::uint32_t>(std::uint64_t(traj) >> 32)};
        std::mt19937_64 gen(sq);
        std::uniform_real_distribution<double> U01(0.0, 1.0);

        Trajectory t;
        t.i_vec.resize(static_cast<std::size_t>(p.T));
        t.j_vec.resize(static_cast<std::size_t>(p.T));
        t.a_i = draw(wa, U01(gen));
        const cmat& pi = p.Ai.projectors[static_cast<std::size_t>(t.a_i)];
        cmat sig = pi * p.rho_i * pi;
        double lp = std::log(tr_real(sig));
        sig /= tr_real(sig);
        for (int k = 0; k < p.T; ++k) {
            const auto& op = p.steps[static_cast<std::size_t>(k)];
            int I = draw(op.weight, U01(gen));
            std::vector<cmat> cand;
            std::vector<double> w;
            for (std::size_t J = 0; J < op.y.size(); ++J) {
                cand.push_back(apply_list(op.fwd[static_cast<std::size_t>(I)][J], sig));
                w.push_back(tr_real(cand.back()));
            }
            int J = draw(w, U01(gen));
            t.i_vec[static_cast<std::size_t>(k)] = I;
            t.j_vec[static_cast<std::size_t>(k)] = J;
            double tr = w[static_cast<std::size_t>(J)];
            lp += std::log(tr);
            sig = cand[static_cast<std::size_t>(J)] / tr;
        }
        std::vector<double> wf(p.Af.values.size());
        for (std::size_t f = 0; f < wf.size(); ++f) wf[f] = tr_real(cmat(p.Af.projectors[f] * sig));
        t.a_f = draw(wf, U01(gen));
        lp += std::log(wf[static_cast<std::size_t>(t.a_f)]);
        t.log_pF = lp;
        t.pF = std::exp(lp);
        fill_observables(p, t);
        if (with_backward) {
            t.log_pB = log_backward_prob(p, t);
            t.pB = std::exp(t.log_pB);
            t.varsigma = t.log_pF - t.log_pB;
        } else {
            t.log_pB = t.pB = t.varsigma = std::numeric_limits<double>::quiet_NaN();
        }
        tab.rows[static_cast<std::size_t>(traj)] = std::move(t);
    }
    return tab;
}

void write_samples_csv(std::ostream& os, const std::vector<Trajectory>& rows, bool exact)
{
    std::vector<std::string> head = {"trajectory_id", "a_i", "a_f", "delta_a", "delta_y", "varsigma"};
    if (exact) {
        head.push_back("pF");
        head.push_back("pB");
    }
    csv_row(os, head);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& t = rows[i];
        std::vector<std::string> c = {std::to_string(i), std::to_string(t.a_i), std::to_string(t.a_f),
                                      num(t.delta_a), num(t.delta_y), num(t.varsigma)};
        if (exact) {
            c.push_back(num(t.pF));
            c.push_back(num(t.pB));
        }
        csv_row(os, c);
    }
}

}  // namespace rislab
