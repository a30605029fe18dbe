#include "rislab/adiabatic.hpp"
#include "rislab/config.hpp"
#include "rislab/csv.hpp"
#include "rislab/mgf.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

namespace rislab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex(std::uint64_t v)
{
    static const char* d = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = d[v & 15];
    return out;
}

class Writer {
public:
    explicit Writer(const RunConfig& c) : dir_(c.output.directory), csv_(c.output.csv)
    {
        fs::create_directories(dir_);
    }

    // CSV toggle off: reports and manifest still written
    std::ofstream* csv(const std::string& name)
    {
        if (!csv_) return nullptr;
        return open(name);
    }
    std::ofstream* report(const std::string& name) { return open(name); }

    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    std::ofstream* open(const std::string& name)
    {
        streams_.emplace_back(std::make_unique<std::ofstream>(dir_ / name, std::ios::binary | std::ios::trunc));
        if (!*streams_.back()) throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
        files_.push_back(name);
        return streams_.back().get();
    }

    fs::path dir_;
    bool csv_;
    std::vector<std::string> files_;
    std::vector<std::unique_ptr<std::ofstream>> streams_;
};

void kv(std::ostream& os, const std::string& k, double v) { os << k << " = " << num(v) << '\n'; }

void task_spectrum(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    auto nodes = linspace(0, 1, c.numeric.s_nodes);
    auto* out = w.csv("spectrum.csv");
    if (out) csv_row(*out, {"alpha", "s", "lambda", "z", "subleading_modulus", "peripheral_residual", "irreducible", "primitive"});
    auto* rep = w.report("spectrum_report.txt");
    int zmin = 1 << 20, zmax = 0;
    double worst = 0, gap = 1;
    for (double a : c.numeric.alpha_list)
        for (double s : nodes) {
            auto phi = deformed_map(m, s, a);
            auto phi0 = reduced_map(m, s);
            auto dec = peripheral_decomposition(phi, phi0);
            auto ev = general_eig<double>(phi.matrix);
            std::vector<double> mods;
            for (Eigen::Index i = 0; i < ev.values.size(); ++i) mods.push_back(std::abs(ev.values(i)));
            std::sort(mods.rbegin(), mods.rend());
            double sub = mods.size() > static_cast<std::size_t>(dec.z) ? mods[static_cast<std::size_t>(dec.z)] : 0.0;
            bool irr = is_irreducible(phi0).irreducible;
            bool prim = primitivity_check(phi0);
            zmin = std::min(zmin, dec.z);
            zmax = std::max(zmax, dec.z);
            worst = std::max(worst, dec.residual);
            gap = std::min(gap, 1 - sub / dec.lambda);
            if (out)
                csv_row(*out, {num(a), num(s), num(dec.lambda), std::to_string(dec.z), num(sub), num(dec.residual),
                               irr ? "1" : "0", prim ? "1" : "0"});
        }
    *rep << "model = " << m.name << '\n' << "z_min = " << zmin << "\nz_max = " << zmax << '\n';
    kv(*rep, "max_peripheral_residual", worst);
    kv(*rep, "min_relative_gap", gap);
}

void task_lambda(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    auto nodes = linspace(0, 1, c.numeric.s_nodes);
    if (auto* out = w.csv("beta_curves.csv")) {
        csv_row(*out, {"s", "beta", "beta1", "beta2"});
        for (double s : nodes) csv_row(*out, {num(s), num(m.beta(s)), num(beta1(s)), num(beta2(s))});
    }
    auto curve = lambda_curve(m, alpha_grid(c.numeric), c.numeric.s_nodes);
    if (auto* out = w.csv("lambda.csv")) {
        csv_row(*out, {"alpha", "Lambda", "Lambda_prime"});
        for (std::size_t i = 0; i < curve.alpha.size(); ++i)
            csv_row(*out, {num(curve.alpha[i]), num(curve.Lambda[i]), num(curve.Lambda_prime[i])});
    }
    auto d = lambda_derivatives_at_zero(m, c.numeric.s_nodes);
    auto* rep = w.report("lambda_report.txt");
    *rep << "model = " << m.name << '\n';
    kv(*rep, "Lambda_prime_0", d.lambda_prime);
    kv(*rep, "Lambda_doubleprime_0", d.lambda_doubleprime);
    kv(*rep, "Lambda_prime_0_fd", d.fd_prime);
    kv(*rep, "Lambda_doubleprime_0_fd", d.fd_doubleprime);
    kv(*rep, "max_solve_residual", d.max_solve_residual);
    kv(*rep, "nu_minus", curve.nu_minus);
    kv(*rep, "nu_plus", curve.nu_plus);
}

void task_ldp(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    auto curve = lambda_curve(m, alpha_grid(c.numeric), c.numeric.s_nodes);
    auto xs = interior_x_grid(curve, 81, 0.95);
    if (auto* out = w.csv("lambda_star.csv")) {
        csv_row(*out, {"x", "Lambda_star"});
        for (double x : xs) csv_row(*out, {num(x), num(legendre_transform(curve, x))});
    }
    auto gc = gc_symmetry_defect(curve, interior_x_grid(curve));
    auto* rep = w.report("ldp_report.txt");
    *rep << "model = " << m.name << '\n';
    kv(*rep, "nu_minus", curve.nu_minus);
    kv(*rep, "nu_plus", curve.nu_plus);
    kv(*rep, "max_abs_Lambda(alpha)-Lambda(-1-alpha)", gc.lambda_defect);
    kv(*rep, "max_abs_Lambda*(x)-x-Lambda*(-x)", gc.rate_defect);
    kv(*rep, "max_abs_Lambda*(-x)-x-Lambda*(x)", gc.rate_defect_mirror);
}

void task_simulate(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    const int T = c.numeric.T;
    auto p = make_protocol(MeasurementSetup::entropic(initial_state(c)), m, T);
    auto tab = sample_trajectories(p, c.numeric.n, c.numeric.seed, false);
    std::vector<double> dy;
    for (const auto& t : tab.rows) dy.push_back(t.delta_y);
    auto d = lambda_derivatives_at_zero(m, c.numeric.s_nodes);
    auto lln = lln_check(dy, T, d.lambda_prime);
    auto clt = clt_check(dy, T, d.lambda_prime, d.lambda_doubleprime);
    const std::string tag = std::to_string(T);
    if (auto* out = w.csv("samples_T" + tag + ".csv")) write_samples_csv(*out, tab.rows, false);
    if (auto* out = w.csv("clt_hist_T" + tag + ".csv")) {
        csv_row(*out, {"bin_left", "bin_right", "density", "normal_pdf_at_center"});
        for (const auto& b : clt.histogram) csv_row(*out, {num(b.left), num(b.right), num(b.density), num(b.normal_pdf)});
    }
    auto* rep = w.report("simulate_report.txt");
    *rep << "model = " << m.name << "\nT = " << T << "\nn = " << c.numeric.n << "\nseed = " << c.numeric.seed << '\n';
    kv(*rep, "Lambda_prime_0", d.lambda_prime);
    kv(*rep, "Lambda_doubleprime_0", d.lambda_doubleprime);
    kv(*rep, "mean_delta_y_over_T", lln.mean_rate);
    kv(*rep, "standard_error", lln.standard_error);
    kv(*rep, "deviation_in_se", lln.deviation_in_se);
    *rep << "lln_flagged = " << (lln.flagged ? 1 : 0) << '\n';
    kv(*rep, "ks_distance", clt.ks);
}

void task_adiabatic(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    cmat rho = initial_state(c);
    auto* out = w.csv("adiabatic.csv");
    if (out) csv_row(*out, {"alpha", "T", "k", "residual", "theta"});
    auto* rep = w.report("adiabatic_report.txt");
    *rep << "model = " << m.name << '\n';
    for (double a : c.numeric.alpha_list) {
        std::vector<double> lt, lr;
        for (int T : c.numeric.T_list) {
            auto r = deformed_adiabatic_state(m, a, T, T, rho);
            if (out) csv_row(*out, {num(a), std::to_string(T), std::to_string(T), num(r.residual), num(r.theta)});
            lt.push_back(std::log(double(T)));
            lr.push_back(std::log(std::max(r.residual, 1e-300)));
        }
        if (lt.size() >= 2) {
            double mt = 0, mr = 0;
            for (std::size_t i = 0; i < lt.size(); ++i) mt += lt[i], mr += lr[i];
            mt /= double(lt.size());
            mr /= double(lt.size());
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < lt.size(); ++i) sxy += (lt[i] - mt) * (lr[i] - mr), sxx += (lt[i] - mt) * (lt[i] - mt);
            kv(*rep, "slope_alpha_" + num(a), sxy / sxx);
        }
    }
}

void task_balance(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    const int T = c.numeric.T;
    cmat rho = initial_state(c);
    auto sb = scalar_balance(m, T, rho);
    if (auto* out = w.csv("balance.csv")) {
        csv_row(*out, {"k", "beta", "dS", "dQ", "sigma"});
        for (std::size_t k = 0; k < sb.sigma.size(); ++k)
            csv_row(*out, {std::to_string(k + 1), num(sb.beta[k]), num(sb.dS[k]), num(sb.dQ[k]), num(sb.sigma[k])});
    }
    auto p = make_protocol(MeasurementSetup::entropic(rho), m, T);
    auto* rep = w.report("balance_report.txt");
    *rep << "model = " << m.name << "\nT = " << T << '\n';
    kv(*rep, "sigma_tot", sb.sigma_tot);
    kv(*rep, "max_identity_defect", sb.max_identity_defect);
    double mean = 0;
    std::vector<Trajectory> rows;
    bool exact = std::pow(4.0, T) * double(p.Ai.values.size() * p.Af.values.size()) <= 1e6;
    if (exact) {
        rows = enumerate_measure(p);
        for (const auto& t : rows)
            if (t.pF > 0) mean += t.pF * t.varsigma;
        *rep << "E(varsigma) = " << num(mean) << " ; sigma_tot = " << num(sb.sigma_tot)
             << " ; difference = " << num(mean - sb.sigma_tot) << " (exact enumeration)\n";
    } else {
        rows = sample_trajectories(p, c.numeric.n, c.numeric.seed, true).rows;
        double m2 = 0;
        for (const auto& t : rows) mean += t.varsigma, m2 += t.varsigma * t.varsigma;
        mean /= double(rows.size());
        double se = std::sqrt(std::max(0.0, m2 / double(rows.size()) - mean * mean) / double(rows.size()));
        *rep << "E(varsigma) = " << num(mean) << " ; sigma_tot = " << num(sb.sigma_tot) << " ; standard_error = " << num(se)
             << " (sampled, n = " << rows.size() << ")\n";
    }
    if (auto* out = w.csv("trajectories.csv")) write_samples_csv(*out, rows, exact);
}

void task_x0(const RunConfig& c, Writer& w)
{
    const auto& m = c.model;
    if (!obstruction_vanishes(m)) throw ldp_error("x0: obstruction X(s) does not vanish for this model");
    cmat rho = initial_state(c);
    auto* rep = w.report("x0_report.txt");
    *rep << "model = " << m.name << '\n';
    cmat r0 = invariant_state(reduced_map(m, 0.0));
    if (trace_norm<double>(cmat(rho - r0)) <= 1e-8) {
        auto atoms = x0_support_and_weights(m, rho);
        if (auto* out = w.csv("x0_atoms.csv")) {
            csv_row(*out, {"value", "weight"});
            for (const auto& a : atoms) csv_row(*out, {num(a.value), num(a.weight)});
        }
    } else {
        *rep << "atoms skipped: initial state differs from the invariant state at s = 0\n";
    }
    const std::vector<std::pair<double, double>> grid = {{0.0, 0.0}, {-0.5, 0.0}, {0.3, 0.2}, {0.5, -0.3}, {-0.2, 0.4}};
    auto* out = w.csv("x0_mgf.csv");
    if (out) csv_row(*out, {"T", "alpha1", "alpha2", "mgf_T", "mgf_limit", "abs_error"});
    for (int T : c.numeric.T_list) {
        auto p = make_protocol(MeasurementSetup::entropic(rho), m, T);
        double worst = 0;
        for (auto [a1, a2] : grid) {
            double f = mgf_pair(p, a1, a2), g = limiting_mgf_X0(m, rho, a1, a2);
            worst = std::max(worst, std::abs(f - g));
            if (out) csv_row(*out, {std::to_string(T), num(a1), num(a2), num(f), num(g), num(std::abs(f - g))});
        }
        kv(*rep, "max_mgf_error_T" + std::to_string(T), worst);
        kv(*rep, "sigma_tot_T" + std::to_string(T), scalar_balance(m, T, rho).sigma_tot);
    }
    kv(*rep, "S(rho_i|rho_inv0)", relative_entropy(rho, r0));
}

void write_manifest(const RunConfig& c, Writer& w)
{
    json j = {{"tool", "rislab"},
              {"version", kVersion},
              {"task", c.task},
              {"model", c.model.name},
              {"config_fnv1a64", hex(fnv1a(c.source))},
              {"seed", c.numeric.seed},
              {"defaults",
               {{"s_nodes", 201}, {"alpha_range", {-3.0, 2.0}}, {"alpha_nodes", 101}, {"T_list", {50, 100, 200, 400, 800}}}},
              {"effective",
               {{"s_nodes", c.numeric.s_nodes},
                {"alpha_range", {c.numeric.alpha_min, c.numeric.alpha_max}},
                {"alpha_nodes", c.numeric.alpha_nodes},
                {"T_list", c.numeric.T_list},
                {"T", c.numeric.T},
                {"n", c.numeric.n}}},
              {"files", w.files()}};
    std::ofstream os(w.dir() / "manifest.json", std::ios::binary | std::ios::trunc);
    os << j.dump(2) << '\n';
}

}  // namespace

RunResult run_task(const RunConfig& c)
{
    static const std::map<std::string, std::function<void(const RunConfig&, Writer&)>> table = {
        {"spectrum", task_spectrum}, {"lambda", task_lambda}, {"ldp", task_ldp},     {"simulate", task_simulate},
        {"adiabatic", task_adiabatic}, {"balance", task_balance}, {"x0", task_x0}};
    RunResult r;
    auto it = table.find(c.task);
    if (it == table.end()) {
        r.status = 2;
        r.reason = "error=unknown_task task=" + c.task;
        return r;
    }
    try {
        Writer w(c);
        it->second(c, w);
        write_manifest(c, w);
        r.files = w.files();
        r.files.push_back("manifest.json");
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& ch : msg)
            if (ch == '\n') ch = ' ';
        r.status = 1;
        r.reason = "error=task_failed task=" + c.task + " what=\"" + msg + "\"";
    }
    return r;
}

}  // namespace rislab
