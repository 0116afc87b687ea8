#include "clrt/systems.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>

#include <json.hpp>

#include "clrt/errors.hpp"

namespace clrt {

namespace {

using Params = std::map<std::string, double>;

// --- tape helpers ----------------------------------------------------------------

// Sum of coef[j] * x_j over the non-zero coefficients of one row.
Expr linear_row(TapeBuilder& tb, const std::vector<Expr>& x, const double* coef, int n) {
    Expr acc = tb.num(0.0);
    for (int j = 0; j < n; ++j) {
        if (coef[j] != 0.0) acc = acc + coef[j] * x[j];
    }
    return acc;
}

// Product of the listed variables (a monomial such as x2*x6*x9 or x3^3).
Expr monomial(TapeBuilder& tb, const std::vector<Expr>& x, const std::vector<int>& vars) {
    std::map<int, int> expo;
    for (int v : vars) expo[v]++;
    Expr acc = tb.num(1.0);
    bool first = true;
    for (auto [v, e] : expo) {
        Expr p = pow(x[v], e);
        acc = first ? p : acc * p;
        first = false;
    }
    return acc;
}

// Partial derivative of a monomial with respect to variable v.
Expr monomial_partial(TapeBuilder& tb, const std::vector<Expr>& x,
                      const std::vector<int>& vars, int v) {
    std::map<int, int> expo;
    for (int m : vars) expo[m]++;
    auto it = expo.find(v);
    if (it == expo.end()) return tb.num(0.0);
    int e = it->second;
    expo[v] -= 1;
    Expr acc = tb.num(static_cast<double>(e));
    for (auto [m, p] : expo) {
        if (p > 0) acc = acc * pow(x[m], p);
    }
    return acc;
}

std::vector<Expr> all_vars(TapeBuilder& tb, int n) {
    std::vector<Expr> x;
    x.reserve(n);
    for (int i = 0; i < n; ++i) x.push_back(tb.var(i));
    return x;
}

// --- individual benchmark builders -------------------------------------------------

OdeSystem make_brusselator(const Params& p) {
    double a = p.at("a"), b = p.at("b");
    OdeSystem sys;
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(a + sqr(x) * y - (b + 1.0) * x);
        tb.output(b * x - sqr(x) * y);
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(2.0 * x * y - (b + 1.0)); // df1/dx
        tb.output(sqr(x));                  // df1/dy
        tb.output(b - 2.0 * x * y);         // df2/dx
        tb.output(-sqr(x));                 // df2/dy
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_inverse_vdp(const Params& p) {
    double mu = p.at("mu");
    OdeSystem sys;
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(-y);
        tb.output(mu * (sqr(x) - 1.0) * y + x);
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(tb.num(0.0));
        tb.output(tb.num(-1.0));
        tb.output(mu * (2.0 * x) * y + 1.0);
        tb.output(mu * (sqr(x) - 1.0));
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_forced_vdp(const Params& p) {
    double mu = p.at("mu"), amp = p.at("amp"), omega = p.at("omega");
    OdeSystem sys;
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(-y);
        tb.output(mu * (sqr(x) - 1.0) * y + x + amp * sin(omega * tb.time()));
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(2);
        Expr x = tb.var(0), y = tb.var(1);
        tb.output(tb.num(0.0));
        tb.output(tb.num(-1.0));
        tb.output(mu * (2.0 * x) * y + 1.0);
        tb.output(mu * (sqr(x) - 1.0));
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_dubins(const Params& p) {
    double v = p.at("v");
    OdeSystem sys;
    {
        TapeBuilder tb(3);
        Expr th = tb.var(2);
        tb.output(v * cos(th));
        tb.output(v * sin(th));
        tb.output(tb.var(0) * sin(tb.time()));
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(3);
        Expr th = tb.var(2);
        Expr zero = tb.num(0.0);
        tb.output(zero);
        tb.output(zero);
        tb.output(-v * sin(th));
        tb.output(zero);
        tb.output(zero);
        tb.output(v * cos(th));
        tb.output(sin(tb.time()));
        tb.output(zero);
        tb.output(zero);
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_cardiac(const Params& p) {
    double t_in = p.at("tau_in"), t_out = p.at("tau_out");
    double t_open = p.at("tau_open"), t_close = p.at("tau_close");
    double vg = p.at("v_gate"), kg = p.at("k_gate");
    OdeSystem sys;
    {
        TapeBuilder tb(2);
        Expr u = tb.var(0), w = tb.var(1);
        Expr gate = 1.0 / (1.0 + exp(kg * (vg - u)));
        tb.output(w * sqr(u) * (1.0 - u) / t_in - u / t_out);
        tb.output(gate * w / t_close + (1.0 - gate) * (1.0 - w) / t_open);
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(2);
        Expr u = tb.var(0), w = tb.var(1);
        Expr gate = 1.0 / (1.0 + exp(kg * (vg - u)));
        Expr dgate = kg * gate * (1.0 - gate);
        tb.output(w * (2.0 * u - 3.0 * sqr(u)) / t_in - 1.0 / t_out);
        tb.output(sqr(u) * (1.0 - u) / t_in);
        tb.output(dgate * w / t_close - dgate * (1.0 - w) / t_open);
        tb.output(gate / t_close - (1.0 - gate) / t_open);
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_robot_arm(const Params& p) {
    double m = p.at("m"), l = p.at("l");
    double kp1 = p.at("kp1"), kp2 = p.at("kp2");
    double kd1 = p.at("kd1"), kd2 = p.at("kd2");
    OdeSystem sys;
    {
        TapeBuilder tb(4);
        auto x = all_vars(tb, 4);
        Expr den = m * sqr(x[1]) + l / 3.0;
        tb.output(x[2]);
        tb.output(x[3]);
        tb.output((-2.0 * m * x[1] * x[2] * x[3] - kp1 * x[0] - kd1 * x[2]) / den +
                  (kp1 * kp1) / den);
        tb.output(x[1] * sqr(x[2]) - kp2 * x[1] / m - kd2 * x[3] / m + kp2 * kp2 / m);
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(4);
        auto x = all_vars(tb, 4);
        Expr zero = tb.num(0.0);
        Expr den = m * sqr(x[1]) + l / 3.0;
        Expr num = -2.0 * m * x[1] * x[2] * x[3] - kp1 * x[0] - kd1 * x[2] + kp1 * kp1;
        tb.output(zero);
        tb.output(zero);
        tb.output(tb.num(1.0));
        tb.output(zero);

        tb.output(zero);
        tb.output(zero);
        tb.output(zero);
        tb.output(tb.num(1.0));

        tb.output(-kp1 / den);
        tb.output((-2.0 * m * x[2] * x[3]) / den - num * (2.0 * m * x[1]) / sqr(den));
        tb.output((-2.0 * m * x[1] * x[3] - kd1) / den);
        tb.output((-2.0 * m * x[1] * x[2]) / den);

        tb.output(zero);
        tb.output(sqr(x[2]) - kp2 / m);
        tb.output(2.0 * x[1] * x[2]);
        tb.output(tb.num(-kd2 / m));
        sys.jac = tb.take();
    }
    return sys;
}

// Shared shape of the biology and poly12 benchmarks: a constant linear part
// plus a short list of scaled monomials per row.
struct MonomialTerm {
    int row;
    double coef;
    std::vector<int> vars;
};

OdeSystem make_poly_system(int n, const std::vector<double>& lin,
                           const std::vector<MonomialTerm>& terms) {
    OdeSystem sys;
    {
        TapeBuilder tb(n);
        auto x = all_vars(tb, n);
        for (int r = 0; r < n; ++r) {
            Expr acc = linear_row(tb, x, lin.data() + r * n, n);
            for (const auto& t : terms) {
                if (t.row == r) acc = acc + t.coef * monomial(tb, x, t.vars);
            }
            tb.output(acc);
        }
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(n);
        auto x = all_vars(tb, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                Expr acc = tb.num(lin[r * n + c]);
                for (const auto& t : terms) {
                    if (t.row != r) continue;
                    if (std::count(t.vars.begin(), t.vars.end(), c) == 0) continue;
                    acc = acc + t.coef * monomial_partial(tb, x, t.vars, c);
                }
                tb.output(acc);
            }
        }
        sys.jac = tb.take();
    }
    return sys;
}

OdeSystem make_biology(const Params&) {
    const int n = 7;
    std::vector<double> lin(n * n, 0.0);
    lin[0 * n + 0] = -0.4;
    lin[1 * n + 0] = 0.4;
    lin[1 * n + 1] = -1.0;
    lin[2 * n + 1] = 1.0;
    lin[5 * n + 6] = 0.5;
    lin[6 * n + 6] = -0.5;
    std::vector<MonomialTerm> terms = {
        {0, 50.0, {2, 3}},  {2, -50.0, {2, 3}}, {3, -50.0, {2, 3}}, {3, 50.0, {4, 5}},
        {4, 50.0, {2, 3}},  {4, -50.0, {4, 5}}, {5, -50.0, {4, 5}}, {6, 50.0, {4, 5}},
    };
    return make_poly_system(n, lin, terms);
}

OdeSystem make_poly12(const Params&) {
    const int n = 12;
    // Row-major linear coefficients.
    const double L[12][12] = {
        {-1.47, -0.574, -0.583, 0.942, 0.714, 1.35, 0.861, 0, 1.51, 0, 1.10, 1.14},
        {0, -0.76, 1.54, -1.63, -0.819, -0.925, -1.06, 0, 0, -0.535, 0.681, 0},
        {1.77, -0.983, -0.766, 0, 0, -0.930, 0, 0, -1.13, -0.998, 1.84, 0.772},
        {-1.37, 1.31, 0.790, -0.572, -1.07, -0.783, 0, -0.938, 2.03, 0, -0.857, 0},
        {-1.04, 0.755, 0, 1.12, -0.538, 0, 0, -0.563, 1.40, 0, -1.32, 0},
        {0, 1.26, 0, 1.11, 0, -0.885, 0, -0.935, 1.05, 0, -1.30, 0},
        {-0.845, 0, 0, 0, 0, 0, -1.67, 0, 1.72, 0.839, -1.25, -0.600},
        {0.583, 0, 0, 1.20, 0.816, 0.599, 0, 0, -0.735, 0, 0, 0},
        {-1.25, 1.04, 0.990, -1.44, -1.44, -1.29, 0, 0, -1.20, -1.16, -3.15, -0.998},
        {0, 1.43, 0.835, 0, 0, 0, 0.545, -0.890, 0, -0.973, 0, 0},
        {0, 0, -2.29, 1.41, 1.43, 0.512, 2.00, -0.801, 2.46, -0.659, -0.833, 1.29},
        {-0.850, 0, -0.919, 0, 0, 0, 0.515, 0, 1.20, 0, -1.25, 0},
    };
    std::vector<double> lin(n * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) lin[r * n + c] = L[r][c];
    }
    std::vector<MonomialTerm> terms = {
        {0, 1.0, {1, 5, 8}},  {1, 1.0, {6, 9, 10}}, {2, 1.0, {2, 2, 2}},
        {3, 1.0, {3, 7, 10}}, {4, 1.0, {0, 1, 4}},  {5, 1.0, {1, 3, 10}},
        {6, 1.0, {0, 6, 10}}, {7, 1.0, {0, 0, 0}},  {8, 1.0, {0, 5, 9}},
        {9, 1.0, {1, 2, 7}},  {10, 1.0, {5, 5, 5}}, {11, 1.0, {0, 8, 10}},
    };
    return make_poly_system(n, lin, terms);
}

// --- registry -----------------------------------------------------------------------

struct BuiltinEntry {
    int dim;
    Params defaults;
    std::function<OdeSystem(const Params&)> build;
    std::vector<double> center;
    double radius;
};

const std::map<std::string, BuiltinEntry>& registry() {
    static const std::map<std::string, BuiltinEntry> reg = {
        {"brusselator",
         {2, {{"a", 1.0}, {"b", 1.5}}, make_brusselator, {1.0, 1.0}, 0.01}},
        {"inverse_vdp", {2, {{"mu", 1.0}}, make_inverse_vdp, {-1.0, -1.0}, 0.01}},
        {"forced_vdp",
         {2,
          {{"mu", 1.0}, {"amp", 1.2}, {"omega", 0.6283}},
          make_forced_vdp,
          {-1.0, -1.0},
          0.01}},
        {"dubins", {3, {{"v", 1.0}}, make_dubins, {0.0, 0.0, 0.7854}, 0.01}},
        {"cardiac",
         {2,
          {{"tau_in", 0.3},
           {"tau_out", 6.0},
           {"tau_open", 20.0},
           {"tau_close", 150.0},
           {"v_gate", 0.1},
           {"k_gate", 100.0}},
          make_cardiac,
          {0.8, 0.5},
          0.001}},
        {"robot_arm",
         {4,
          {{"m", 1.0}, {"l", 3.0}, {"kp1", 2.0}, {"kp2", 1.0}, {"kd1", 2.0}, {"kd2", 1.0}},
          make_robot_arm,
          {1.505, 1.505, 0.005, 0.005},
          0.005}},
        {"biology",
         {7, {}, make_biology, {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}, 0.0001}},
        {"poly12",
         {12,
          {},
          make_poly12,
          {0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01},
          0.0001}},
    };
    return reg;
}

const BuiltinEntry& find_entry(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw UnknownSystem("unknown system: " + name);
    return it->second;
}

} // namespace

OdeSystem builtin(const std::string& name, const std::map<std::string, double>& overrides) {
    const BuiltinEntry& entry = find_entry(name);
    Params params = entry.defaults;
    for (const auto& [key, value] : overrides) {
        auto it = params.find(key);
        if (it == params.end()) {
            throw BadParameter("system " + name + " has no parameter " + key);
        }
        it->second = value;
    }
    OdeSystem sys = entry.build(params);
    sys.name = name;
    sys.dim = entry.dim;
    sys.params = params;
    sys.time_variant = sys.f.uses_time();
    if (static_cast<int>(sys.f.n_outputs()) != sys.dim ||
        static_cast<int>(sys.jac.n_outputs()) != sys.dim * sys.dim) {
        throw BadParameter("system " + name + " has inconsistent tape shapes");
    }
    return sys;
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& [name, entry] : registry()) names.push_back(name);
    return names;
}

InitialSet builtin_initial_set(const std::string& name) {
    const BuiltinEntry& entry = find_entry(name);
    InitialSet init;
    init.center = Eigen::Map<const Eigen::VectorXd>(entry.center.data(), entry.dim);
    init.radius = Eigen::VectorXd::Constant(entry.dim, entry.radius);
    return init;
}

IVector eval_f(const OdeSystem& sys, const Interval& t, const IVector& x) {
    return eval(sys.f, t, x);
}

IMatrix eval_jac(const OdeSystem& sys, const Interval& t, const IVector& x) {
    IVector flat = eval(sys.jac, t, x);
    IMatrix j(sys.dim, sys.dim);
    for (int r = 0; r < sys.dim; ++r) {
        for (int c = 0; c < sys.dim; ++c) j.at(r, c) = flat[r * sys.dim + c];
    }
    return j;
}

Eigen::VectorXd eval_f(const OdeSystem& sys, double t, const Eigen::VectorXd& x) {
    return eval(sys.f, t, x);
}

Eigen::MatrixXd eval_jac(const OdeSystem& sys, double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd flat = eval(sys.jac, t, x);
    Eigen::MatrixXd j(sys.dim, sys.dim);
    for (int r = 0; r < sys.dim; ++r) {
        for (int c = 0; c < sys.dim; ++c) j(r, c) = flat[r * sys.dim + c];
    }
    return j;
}

LoadedSystem load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open system file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("system file " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string()) {
        throw ConfigError("system file " + path + ": missing string field 'name'");
    }
    std::string name = doc["name"].get<std::string>();

    std::map<std::string, double> overrides;
    if (doc.contains("params")) {
        if (!doc["params"].is_object()) {
            throw ConfigError("system file " + path + ": 'params' must be an object");
        }
        for (const auto& [key, value] : doc["params"].items()) {
            if (!value.is_number()) {
                throw ConfigError("system file " + path + ": params." + key +
                                  " must be a number");
            }
            overrides[key] = value.get<double>();
        }
    }

    LoadedSystem ls;
    try {
        ls.system = builtin(name, overrides);
    } catch (const UnknownSystem& e) {
        throw ConfigError(std::string("system file ") + path + ": " + e.what());
    } catch (const BadParameter& e) {
        throw ConfigError(std::string("system file ") + path + ": " + e.what());
    }
    ls.initial = builtin_initial_set(name);

    if (doc.contains("dim") && doc["dim"].get<int>() != ls.system.dim) {
        throw ConfigError("system file " + path + ": dim does not match " + name);
    }
    auto read_vector = [&](const char* field) -> std::optional<Eigen::VectorXd> {
        if (!doc.contains(field)) return std::nullopt;
        const auto& arr = doc[field];
        if (!arr.is_array() || static_cast<int>(arr.size()) != ls.system.dim) {
            throw ConfigError("system file " + path + ": " + field + " must be an array of " +
                              std::to_string(ls.system.dim) + " numbers");
        }
        Eigen::VectorXd v(ls.system.dim);
        for (int i = 0; i < ls.system.dim; ++i) {
            if (!arr[i].is_number()) {
                throw ConfigError("system file " + path + ": " + field +
                                  " must contain numbers");
            }
            v[i] = arr[i].get<double>();
        }
        return v;
    };
    if (auto c = read_vector("initial_center")) ls.initial.center = *c;
    if (auto r = read_vector("initial_radius_per_dim")) {
        if (r->minCoeff() <= 0.0) {
            throw ConfigError("system file " + path + ": initial_radius_per_dim entries must be positive");
        }
        ls.initial.radius = *r;
    }
    return ls;
}

} // namespace clrt
