#include "rislab/config.hpp"
#include "rislab/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rislab {

using nlohmann::json;

namespace {

std::string type_name(const json& j)
{
    if (j.is_null()) return "null";
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string \"" + j.get<std::string>() + "\"";
    if (j.is_array()) return "array[" + std::to_string(j.size()) + "]";
    return "object";
}

std::string summary(const std::vector<SchemaError>& e)
{
    std::ostringstream os;
    os << "config: " << e.size() << " error(s)";
    for (const auto& x : e) os << "; " << x.path << ": expected " << x.expected << ", found " << x.found;
    return os.str();
}

struct Reader {
    std::vector<SchemaError> errors;

    void fail(const std::string& path, const std::string& expected, const std::string& found)
    {
        errors.push_back({path, expected, found});
    }

    double number(const json& j, const std::string& path, double fallback)
    {
        if (!j.is_number()) {
            fail(path, "number", type_name(j));
            return fallback;
        }
        return j.get<double>();
    }

    int integer(const json& j, const std::string& path, int fallback)
    {
        if (!j.is_number_integer() && !j.is_number_unsigned()) {
            fail(path, "integer", type_name(j));
            return fallback;
        }
        return j.get<int>();
    }

    std::string string(const json& j, const std::string& path)
    {
        if (!j.is_string()) {
            fail(path, "string", type_name(j));
            return {};
        }
        return j.get<std::string>();
    }

    std::vector<double> numbers(const json& j, const std::string& path)
    {
        std::vector<double> out;
        if (!j.is_array()) {
            fail(path, "array of numbers", type_name(j));
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]", 0));
        return out;
    }

    // nested rows of [re, im] pairs; a bare number is accepted as a real entry
    cmat matrix(const json& j, const std::string& path, Eigen::Index rows)
    {
        if (!j.is_array() || j.size() != static_cast<std::size_t>(rows)) {
            fail(path, std::to_string(rows) + " rows", type_name(j));
            return cmat::Zero(rows, rows);
        }
        cmat M = cmat::Zero(rows, rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const json& row = j[static_cast<std::size_t>(r)];
            std::string rp = path + "[" + std::to_string(r) + "]";
            if (!row.is_array() || row.size() != static_cast<std::size_t>(rows)) {
                fail(rp, std::to_string(rows) + " entries", type_name(row));
                continue;
            }
            for (Eigen::Index c = 0; c < rows; ++c) {
                const json& e = row[static_cast<std::size_t>(c)];
                std::string ep = rp + "[" + std::to_string(c) + "]";
                if (e.is_number())
                    M(r, c) = e.get<double>();
                else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                    M(r, c) = cd(e[0].get<double>(), e[1].get<double>());
                else
                    fail(ep, "[re, im]", type_name(e));
            }
        }
        if (!M.allFinite()) fail(path, "finite entries", "non-finite value");
        return M;
    }

    cmat hermitian(const json& j, const std::string& path, Eigen::Index rows)
    {
        cmat M = matrix(j, path, rows);
        double scale = std::max(max_abs(M), 1e-300);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = r; c < rows; ++c)
                if (std::abs(M(r, c) - std::conj(M(c, r))) > 1e-12 * scale) {
                    fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                         "Hermitian matrix (entry equal to conj of [" + std::to_string(c) + "][" + std::to_string(r) + "])",
                         "mismatch");
                    return M;
                }
        return M;
    }

    ScalarFn scalar_fn(const json& j, const std::string& path)
    {
        if (j.is_string()) {
            std::string n = j.get<std::string>();
            if (n == "beta1" || n == "beta2") return ScalarFn::preset(n);
            fail(path, "\"beta1\" or \"beta2\"", type_name(j));
            return ScalarFn::constant(1);
        }
        if (j.is_number()) return ScalarFn::constant(j.get<double>());
        if (!j.is_object()) {
            fail(path, "schedule object", type_name(j));
            return ScalarFn::constant(1);
        }
        if (j.contains("preset")) return scalar_fn(j["preset"], path + ".preset");
        if (j.contains("constant")) return ScalarFn::constant(number(j["constant"], path + ".constant", 1));
        if (j.contains("coeff")) {
            const json& c = j["coeff"];
            std::array<double, 4> poly{};
            if (c.contains("poly")) {
                auto p = numbers(c["poly"], path + ".coeff.poly");
                if (p.size() > 4) fail(path + ".coeff.poly", "at most 4 coefficients", type_name(c["poly"]));
                for (std::size_t i = 0; i < std::min<std::size_t>(4, p.size()); ++i) poly[i] = p[i];
            }
            std::vector<double> a, b;
            if (c.contains("tanh_a")) a = numbers(c["tanh_a"], path + ".coeff.tanh_a");
            if (c.contains("tanh_b")) b = numbers(c["tanh_b"], path + ".coeff.tanh_b");
            if (a.size() != b.size()) {
                fail(path + ".coeff", "tanh_a and tanh_b of equal length", std::to_string(a.size()) + " vs " + std::to_string(b.size()));
                return ScalarFn::constant(1);
            }
            return ScalarFn::coeff(poly, a, b);
        }
        if (j.contains("table")) {
            const json& t = j["table"];
            auto s = numbers(t.value("s", json()), path + ".table.s");
            auto v = numbers(t.value("values", json()), path + ".table.values");
            bool ok = s.size() >= 2 && s.size() == v.size();
            for (std::size_t i = 1; ok && i < s.size(); ++i) ok = s[i] > s[i - 1];
            if (!ok) {
                fail(path + ".table", ">= 2 increasing nodes with matching values", std::to_string(s.size()) + " nodes");
                return ScalarFn::constant(1);
            }
            return ScalarFn::table(s, v);
        }
        fail(path, "one of preset|constant|coeff|table", "object without a known key");
        return ScalarFn::constant(1);
    }
};

json matrix_json(const cmat& M)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back({M(r, c).real(), M(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

json scalar_json(const ScalarFn& f)
{
    switch (f.kind()) {
    case ScalarFn::Kind::Preset:
        return {{"preset", f.preset_name()}};
    case ScalarFn::Kind::Constant:
        return {{"constant", f.poly()[0]}};
    case ScalarFn::Kind::Coeff:
        return {{"coeff", {{"poly", f.poly()}, {"tanh_a", f.tanh_a()}, {"tanh_b", f.tanh_b()}}}};
    case ScalarFn::Kind::Table:
        return {{"table", {{"s", f.nodes()}, {"values", f.values()}}}};
    }
    return {};
}

}  // namespace

config_error::config_error(std::vector<SchemaError> e) : std::runtime_error(summary(e)), errors(std::move(e)) {}

RunConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error({{"$", "valid JSON", e.what()}});
    }
    Reader rd;
    RunConfig c;
    if (!j.is_object()) throw config_error({{"$", "object", type_name(j)}});

    // model
    if (!j.contains("model") || !j["model"].is_object()) {
        rd.fail("model", "object", j.contains("model") ? type_name(j["model"]) : "missing");
    } else {
        const json& m = j["model"];
        if (m.contains("preset")) {
            std::string p = rd.string(m["preset"], "model.preset");
            std::string b = m.contains("beta") && m["beta"].is_string() ? m["beta"].get<std::string>() : "beta1";
            if (p != "rwa" && p != "fd") rd.fail("model.preset", "\"rwa\" or \"fd\"", type_name(m["preset"]));
            else if (b != "beta1" && b != "beta2") rd.fail("model.beta", "\"beta1\" or \"beta2\"", type_name(m["beta"]));
            else c.model = preset_model(p, b);
            if (m.contains("beta") && !m["beta"].is_string()) c.model.schedule.beta = rd.scalar_fn(m["beta"], "model.beta");
        } else {
            auto& mo = c.model;
            mo.name = m.value("name", "custom");
            if (!m.contains("dims") || !m["dims"].is_array() || m["dims"].size() != 2) {
                rd.fail("model.dims", "[dS, dE]", m.contains("dims") ? type_name(m["dims"]) : "missing");
            } else {
                mo.dS = rd.integer(m["dims"][0], "model.dims[0]", 1);
                mo.dE = rd.integer(m["dims"][1], "model.dims[1]", 1);
                if (mo.dS < 1 || mo.dE < 1 || mo.dS * mo.dE > 64) rd.fail("model.dims", "positive, dS*dE <= 64", "out of range");
            }
            if (rd.errors.empty()) {
                auto need = [&](const char* key) -> const json& {
                    static const json missing;
                    if (!m.contains(key)) {
                        rd.fail(std::string("model.") + key, "present", "missing");
                        return missing;
                    }
                    return m[key];
                };
                mo.hS = rd.hermitian(need("hS"), "model.hS", mo.dS);
                mo.schedule.hE = rd.hermitian(need("hE"), "model.hE", mo.dE);
                mo.schedule.v = rd.hermitian(need("v"), "model.v", mo.dS * mo.dE);
                mo.tau = rd.number(need("tau"), "model.tau", 1);
                if (!(mo.tau > 0)) rd.fail("model.tau", "positive number", std::to_string(mo.tau));
                mo.coupling = m.contains("coupling") ? rd.number(m["coupling"], "model.coupling", 1) : 1.0;
                mo.schedule.beta = m.contains("beta") ? rd.scalar_fn(m["beta"], "model.beta") : ScalarFn::constant(1);
            }
        }
        if (m.contains("v_profile")) c.model.schedule.v_profile = rd.scalar_fn(m["v_profile"], "model.v_profile");
        if (m.contains("Y")) {
            const json& y = m["Y"];
            if (y.is_string()) {
                if (y.get<std::string>() != "beta_hE") rd.fail("model.Y", "\"beta_hE\" or matrix", type_name(y));
            } else if (c.model.dE > 0) {
                c.model.schedule.Y = rd.hermitian(y, "model.Y", c.model.dE);
            }
        }
        if (rd.errors.empty()) {
            try {
                validate(c.model);
            } catch (const model_error& e) {
                rd.fail("model", "valid model", e.what());
            }
        }
    }

    // task
    if (j.contains("task")) {
        const json& t = j["task"];
        std::string name = t.is_object() ? (t.contains("name") ? rd.string(t["name"], "task.name") : "") : rd.string(t, "task");
        if (std::find(kTasks.begin(), kTasks.end(), name) == kTasks.end())
            rd.fail("task", "one of spectrum|lambda|ldp|simulate|adiabatic|balance|x0", "\"" + name + "\"");
        c.task = name;
    }

    // numeric
    if (j.contains("numeric")) {
        const json& n = j["numeric"];
        auto& nu = c.numeric;
        if (!n.is_object()) rd.fail("numeric", "object", type_name(n));
        else {
            if (n.contains("s_nodes")) nu.s_nodes = rd.integer(n["s_nodes"], "numeric.s_nodes", 201);
            if (n.contains("alpha_min")) nu.alpha_min = rd.number(n["alpha_min"], "numeric.alpha_min", -3);
            if (n.contains("alpha_max")) nu.alpha_max = rd.number(n["alpha_max"], "numeric.alpha_max", 2);
            if (n.contains("alpha_nodes")) nu.alpha_nodes = rd.integer(n["alpha_nodes"], "numeric.alpha_nodes", 101);
            if (n.contains("T_list")) {
                nu.T_list.clear();
                for (double v : rd.numbers(n["T_list"], "numeric.T_list")) nu.T_list.push_back(static_cast<int>(v));
            }
            if (n.contains("alpha_list")) nu.alpha_list = rd.numbers(n["alpha_list"], "numeric.alpha_list");
            if (n.contains("T")) nu.T = rd.integer(n["T"], "numeric.T", 400);
            if (n.contains("n")) nu.n = rd.integer(n["n"], "numeric.n", 2000);
            if (n.contains("seed")) {
                if (n["seed"].is_number_unsigned() || (n["seed"].is_number_integer() && n["seed"].get<long long>() >= 0))
                    nu.seed = n["seed"].get<std::uint64_t>();
                else
                    rd.fail("numeric.seed", "non-negative integer", type_name(n["seed"]));
            }
            if (n.contains("rho_i")) {
                const json& r = n["rho_i"];
                if (r.is_string()) {
                    nu.rho_i = r.get<std::string>();
                    if (nu.rho_i != "invariant" && nu.rho_i != "maximally_mixed")
                        rd.fail("numeric.rho_i", "\"invariant\", \"maximally_mixed\" or matrix", type_name(r));
                } else if (c.model.dS > 0) {
                    nu.rho_i = "explicit";
                    nu.rho_i_matrix = rd.hermitian(r, "numeric.rho_i", c.model.dS);
                }
            }
            if (nu.s_nodes < 3) rd.fail("numeric.s_nodes", ">= 3", std::to_string(nu.s_nodes));
            if (nu.alpha_nodes < 2) rd.fail("numeric.alpha_nodes", ">= 2", std::to_string(nu.alpha_nodes));
            if (!(nu.alpha_max > nu.alpha_min)) rd.fail("numeric.alpha_max", "> alpha_min", std::to_string(nu.alpha_max));
            if (nu.n < 1) rd.fail("numeric.n", ">= 1", std::to_string(nu.n));
            if (nu.T < 1) rd.fail("numeric.T", ">= 1", std::to_string(nu.T));
            for (int t : nu.T_list)
                if (t < 1) rd.fail("numeric.T_list", "positive integers", std::to_string(t));
        }
    }

    // output
    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) rd.fail("output", "object", type_name(o));
        else {
            if (o.contains("directory")) c.output.directory = rd.string(o["directory"], "output.directory");
            if (o.contains("csv")) {
                if (o["csv"].is_boolean()) c.output.csv = o["csv"].get<bool>();
                else rd.fail("output.csv", "boolean", type_name(o["csv"]));
            }
        }
    }

    if (!rd.errors.empty()) throw config_error(rd.errors);
    c.source = serialize_config(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error({{"$", "readable file", "cannot open '" + path + "'"}});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c)
{
    const auto& m = c.model;
    json model = {{"name", m.name},
                  {"dims", {m.dS, m.dE}},
                  {"hS", matrix_json(m.hS)},
                  {"hE", matrix_json(m.schedule.hE)},
                  {"v", matrix_json(m.schedule.v)},
                  {"tau", m.tau},
                  {"coupling", m.coupling},
                  {"beta", scalar_json(m.schedule.beta)},
                  {"v_profile", scalar_json(m.schedule.v_profile)}};
    model["Y"] = m.schedule.Y ? matrix_json(*m.schedule.Y) : json("beta_hE");
    const auto& n = c.numeric;
    json numeric = {{"s_nodes", n.s_nodes}, {"alpha_min", n.alpha_min}, {"alpha_max", n.alpha_max},
                    {"alpha_nodes", n.alpha_nodes}, {"T_list", n.T_list}, {"alpha_list", n.alpha_list},
                    {"T", n.T}, {"n", n.n}, {"seed", n.seed}};
    numeric["rho_i"] = n.rho_i == "explicit" ? matrix_json(n.rho_i_matrix) : json(n.rho_i);
    json out = {{"model", model}, {"numeric", numeric},
                {"output", {{"directory", c.output.directory}, {"csv", c.output.csv}}}};
    if (!c.task.empty()) out["task"] = c.task;
    return out.dump(2);
}

std::vector<double> alpha_grid(const NumericSection& n)
{
    auto g = linspace(n.alpha_min, n.alpha_max, n.alpha_nodes);
    for (auto& a : g)
        if (std::abs(a) < 1e-12) a = 0.0;
    return g;
}

cmat initial_state(const RunConfig& c)
{
    const auto& n = c.numeric;
    const auto d = c.model.dS;
    if (n.rho_i == "maximally_mixed") return cmat::Identity(d, d) / double(d);
    if (n.rho_i == "explicit") return n.rho_i_matrix / n.rho_i_matrix.trace().real();
    return invariant_state(reduced_map(c.model, 0.0));
}

}  // namespace rislab
