#include "clrt/report.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "clrt/bloat.hpp"
#include "clrt/errors.hpp"

namespace clrt {

Interval unit_ball_volume(int n) {
    if (n < 0) throw BadParameter("unit_ball_volume needs a nonnegative dimension");
    if (n == 0) return Interval(1.0);
    if (n == 1) return Interval(2.0);
    Interval v = (n % 2 == 0) ? Interval(1.0) : Interval(2.0);
    for (int m = 2 + n % 2; m <= n; m += 2) v = v * two_pi_interval() / Interval(m);
    return v;
}

double segment_volume(const TubeSegment& seg) {
    const Ball& b = seg.continuous;
    int n = b.dim();
    Interval det = verified_det(b.metric.M);
    if (!(det.lo > 0.0))
        throw RankDeficient("segment metric has no certified positive determinant");
    Interval vol = powi(Interval(b.radius), n) * unit_ball_volume(n) / sqrt(det);
    return vol.hi;
}

RunReport make_report(std::string system_name, const ClrtConfig& cfg, RunResult result,
                      double wall_seconds) {
    RunReport rep;
    rep.system = std::move(system_name);
    rep.cfg = cfg;
    rep.cfg.prune_dump = nullptr;  // the report is data, not a live run handle
    rep.result = std::move(result);
    rep.wall_seconds = wall_seconds;

    const auto& segs = rep.result.segments;
    for (const TubeSegment& seg : segs) rep.total_volume += segment_volume(seg);
    if (!segs.empty()) {
        rep.avg_volume = rep.total_volume / static_cast<double>(segs.size());
        Interval growth(1.0);
        for (const TubeSegment& seg : segs) growth = growth * Interval(seg.lambda);
        Interval span = Interval(segs.back().t_hi) - Interval(rep.cfg.t0);
        if (growth.lo > 0.0 && span.lo > 0.0) {
            rep.ftle_upper = (log(growth) / span).hi;
        } else {
            rep.ftle_upper = std::numeric_limits<double>::infinity();
        }
    }
    return rep;
}

std::vector<double> incoming_radii(const RunReport& rep) {
    std::vector<double> in;
    in.reserve(rep.result.segments.size());
    double r = rep.cfg.delta0;
    for (const TubeSegment& seg : rep.result.segments) {
        in.push_back(r);
        r = seg.discrete_end.radius;
    }
    return in;
}

namespace {

int report_dim(const RunReport& rep) {
    if (!rep.result.segments.empty()) return rep.result.segments.front().continuous.dim();
    return static_cast<int>(rep.cfg.x0_box.size());
}

nlohmann::json config_echo(const RunReport& rep) {
    const ClrtConfig& c = rep.cfg;
    nlohmann::json center = nlohmann::json::array();
    for (const Interval& e : c.x0_box.e) center.push_back(0.5 * (e.lo + e.hi));
    return nlohmann::json{
        {"system", rep.system},
        {"params", rep.params},
        {"t0", c.t0},
        {"T", c.T},
        {"k", c.k},
        {"initial_center", center},
        {"initial_radius", c.delta0},
        {"eps_ist", c.eps_ist},
        {"c_delta", c.c_delta},
        {"c_m", c.c_m},
        {"switch_cond_cap",
         std::isfinite(c.switch_cond_cap) ? nlohmann::json(c.switch_cond_cap)
                                          : nlohmann::json(nullptr)},
        {"integrator_order", c.integrator.order},
        {"caps",
         {{"bloat_cap_factor", c.bloat_cap_factor},
          {"eps_sat_rel", c.eps_sat_rel},
          {"prune_max_depth", c.prune_max_depth},
          {"prune_box_budget", c.prune_box_budget},
          {"time_split_weight", c.time_split_weight},
          {"refine_bisections", c.refine_bisections},
          {"keep_outer_trial", c.keep_outer_trial},
          {"estimator_seed", c.estimator_seed},
          {"h_floor_factor", c.h_floor_factor},
          {"width_cap_factor", c.integrator.width_cap_factor},
          {"picard_max_iter", c.integrator.picard_max_iter},
          {"picard_refine", c.integrator.picard_refine}}},
    };
}

nlohmann::json report_json(const RunReport& rep) {
    std::vector<double> in = incoming_radii(rep);
    nlohmann::json segs = nlohmann::json::array();
    for (size_t i = 0; i < rep.result.segments.size(); ++i) {
        const TubeSegment& seg = rep.result.segments[i];
        segs.push_back({{"idx", i},
                        {"t_lo", seg.t_lo},
                        {"t_hi", seg.t_hi},
                        {"h", seg.h},
                        {"lambda", seg.lambda},
                        {"delta_small", in[i]},
                        {"delta_big", seg.continuous.radius},
                        {"volume", segment_volume(seg)}});
    }
    nlohmann::json j{{"system", rep.system},
                     {"status", rep.result.complete ? "complete" : "partial"},
                     {"t_reached", rep.result.t_reached},
                     {"segment_count", rep.result.segments.size()},
                     {"total_volume", rep.total_volume},
                     {"avg_volume", rep.avg_volume},
                     {"ftle_upper", rep.ftle_upper},
                     {"wall_seconds", rep.wall_seconds},
                     {"config", config_echo(rep)},
                     {"segments", std::move(segs)}};
    if (!rep.result.complete) j["abort_reason"] = rep.result.abort_reason;
    return j;
}

} // namespace

void write_segments_csv(const RunReport& rep, std::ostream& os) {
    int n = report_dim(rep);
    os << std::setprecision(17);
    os << "idx,t_lo,t_hi,h,lambda,delta_small,delta_big,volume";
    for (int d = 0; d < n; ++d) os << ",center_mid_" << d;
    for (int d = 0; d < n; ++d) os << ",center_rad_" << d;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) os << ",m_" << r << "_" << c;
    os << "\n";

    std::vector<double> in = incoming_radii(rep);
    for (size_t i = 0; i < rep.result.segments.size(); ++i) {
        const TubeSegment& seg = rep.result.segments[i];
        os << i << ',' << seg.t_lo << ',' << seg.t_hi << ',' << seg.h << ',' << seg.lambda
           << ',' << in[i] << ',' << seg.continuous.radius << ',' << segment_volume(seg);
        for (int d = 0; d < n; ++d) {
            const Interval& e = seg.continuous.center_box.e[d];
            os << ',' << 0.5 * (e.lo + e.hi);
        }
        for (int d = 0; d < n; ++d)
            os << ',' << 0.5 * width(seg.continuous.center_box.e[d]);
        const Mat& m = seg.continuous.metric.M;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) os << ',' << m(r, c);
        os << '\n';
    }
}

void write_report_json(const RunReport& rep, std::ostream& os) {
    os << report_json(rep).dump(2) << '\n';
}

void emit_plot_data(const RunReport& rep, std::pair<int, int> dims, int stride,
                    std::ostream& os) {
    if (stride < 1) throw BadParameter("stride must be positive");
    os << std::setprecision(17) << "segment_idx,point_idx,u,v\n";
    if (rep.result.segments.empty()) return;

    int n = rep.result.segments.front().continuous.dim();
    int di = dims.first, dj = dims.second;
    if (di < 0 || dj < 0 || di >= n || dj >= n || di == dj)
        throw BadDimensionPair("plot dimensions must be two distinct indices below " +
                               std::to_string(n));

    std::vector<int> rest;
    for (int d = 0; d < n; ++d)
        if (d != di && d != dj) rest.push_back(d);

    const int kArc = 64;
    for (size_t idx = 0; idx < rep.result.segments.size();
         idx += static_cast<size_t>(stride)) {
        const Ball& b = rep.result.segments[idx].continuous;
        const Mat& m = b.metric.M;
        Vec c = mid_vec(b.center_box);

        // Schur complement of the eliminated block: the projected ellipse is
        // { p : (p - c_p)^T S (p - c_p) <= radius^2 }.
        Mat s(2, 2);
        s << m(di, di), m(di, dj), m(dj, di), m(dj, dj);
        if (!rest.empty()) {
            int r = static_cast<int>(rest.size());
            Mat mpq(2, r), mqq(r, r);
            for (int a = 0; a < r; ++a) {
                mpq(0, a) = m(di, rest[a]);
                mpq(1, a) = m(dj, rest[a]);
                for (int bq = 0; bq < r; ++bq) mqq(a, bq) = m(rest[a], rest[bq]);
            }
            s -= mpq * mqq.ldlt().solve(mpq.transpose());
        }

        Eigen::SelfAdjointEigenSolver<Mat> es(s);
        Vec ax0 = es.eigenvectors().col(0) * (b.radius / std::sqrt(es.eigenvalues()(0)));
        Vec ax1 = es.eigenvectors().col(1) * (b.radius / std::sqrt(es.eigenvalues()(1)));

        double u0 = 0.0, v0 = 0.0;
        for (int k = 0; k <= kArc; ++k) {
            double u, v;
            if (k == kArc) {
                u = u0;  // close the polyline on the exact first point
                v = v0;
            } else {
                double theta = 2.0 * M_PI * k / kArc;
                u = c(di) + std::cos(theta) * ax0(0) + std::sin(theta) * ax1(0);
                v = c(dj) + std::cos(theta) * ax0(1) + std::sin(theta) * ax1(1);
                if (k == 0) {
                    u0 = u;
                    v0 = v;
                }
            }
            os << idx << ',' << k << ',' << u << ',' << v << '\n';
        }
    }
}

namespace {

namespace fs = std::filesystem;

nlohmann::json parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    return j;
}

double num_field(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigError("missing field: " + field);
    if (!j.at(field).is_number())
        throw ConfigError("field " + field + " must be a number");
    return j.at(field).get<double>();
}

template <typename T>
void opt_num(const nlohmann::json& j, const std::string& field, T& out) {
    if (!j.contains(field) || j.at(field).is_null()) return;
    if (!j.at(field).is_number())
        throw ConfigError("field " + field + " must be a number");
    out = j.at(field).get<T>();
}

OdeSystem resolve_system(const std::string& name, const std::map<std::string, double>& params,
                         const fs::path& config_dir) {
    auto names = builtin_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) {
        try {
            return builtin(name, params);
        } catch (const Error& e) {
            throw ConfigError(std::string("params: ") + e.what());
        }
    }
    fs::path p = name;
    if (!fs::exists(p)) p = config_dir / name;
    if (!fs::exists(p)) throw ConfigError("unknown system: " + name);
    if (!params.empty())
        throw ConfigError("params belong in the system file when system is a path");
    try {
        return load_system_file(p.string()).system;
    } catch (const Error& e) {
        throw ConfigError("system file " + p.string() + ": " + e.what());
    }
}

ClrtConfig config_from_json(const nlohmann::json& j, const OdeSystem& sys) {
    ClrtConfig cfg;
    cfg.t0 = num_field(j, "t0");
    cfg.T = num_field(j, "T");
    if (!j.contains("k")) throw ConfigError("missing field: k");
    if (!j.at("k").is_number_integer()) throw ConfigError("field k must be an integer");
    cfg.k = j.at("k").get<int>();

    if (!j.contains("initial_center")) throw ConfigError("missing field: initial_center");
    const nlohmann::json& jc = j.at("initial_center");
    if (!jc.is_array() || static_cast<int>(jc.size()) != sys.dim)
        throw ConfigError("initial_center must be an array of " + std::to_string(sys.dim) +
                          " numbers");
    cfg.x0_box = IVector(sys.dim);
    for (int d = 0; d < sys.dim; ++d) {
        if (!jc.at(d).is_number())
            throw ConfigError("initial_center must be an array of " +
                              std::to_string(sys.dim) + " numbers");
        cfg.x0_box.e[d] = Interval(jc.at(d).get<double>());
    }
    cfg.delta0 = num_field(j, "initial_radius");
    cfg.M0 = Metric::euclidean(sys.dim);

    opt_num(j, "eps_ist", cfg.eps_ist);
    opt_num(j, "c_delta", cfg.c_delta);
    opt_num(j, "c_m", cfg.c_m);
    opt_num(j, "switch_cond_cap", cfg.switch_cond_cap);
    opt_num(j, "integrator_order", cfg.integrator.order);

    if (j.contains("caps")) {
        const nlohmann::json& caps = j.at("caps");
        if (!caps.is_object()) throw ConfigError("field caps must be an object");
        for (const auto& [key, val] : caps.items()) {
            if (key == "bloat_cap_factor") cfg.bloat_cap_factor = val.get<double>();
            else if (key == "eps_sat_rel") cfg.eps_sat_rel = val.get<double>();
            else if (key == "prune_max_depth") cfg.prune_max_depth = val.get<int>();
            else if (key == "prune_box_budget") cfg.prune_box_budget = val.get<long>();
            else if (key == "time_split_weight") cfg.time_split_weight = val.get<double>();
            else if (key == "refine_bisections") cfg.refine_bisections = val.get<int>();
            else if (key == "keep_outer_trial") cfg.keep_outer_trial = val.get<bool>();
            else if (key == "estimator_seed") cfg.estimator_seed = val.get<unsigned>();
            else if (key == "h_floor_factor") cfg.h_floor_factor = val.get<double>();
            else if (key == "width_cap_factor")
                cfg.integrator.width_cap_factor = val.get<double>();
            else if (key == "picard_max_iter")
                cfg.integrator.picard_max_iter = val.get<int>();
            else if (key == "picard_refine") cfg.integrator.picard_refine = val.get<int>();
            else throw ConfigError("unknown field: caps." + key);
        }
    }
    return cfg;
}

} // namespace

RunReport run_benchmark(const std::string& config_path, const std::string& output_dir,
                        const BenchmarkFlags& flags) {
    nlohmann::json j = parse_config_file(config_path);
    static const char* known[] = {"system",       "params",  "t0",
                                  "T",            "k",       "initial_center",
                                  "initial_radius", "eps_ist", "c_delta",
                                  "c_m",          "switch_cond_cap",
                                  "integrator_order", "caps"};
    for (const auto& [key, val] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown field: " + key);
    }

    if (!j.contains("system")) throw ConfigError("missing field: system");
    if (!j.at("system").is_string()) throw ConfigError("field system must be a string");
    std::string system_name = j.at("system").get<std::string>();

    std::map<std::string, double> params;
    if (j.contains("params")) {
        const nlohmann::json& jp = j.at("params");
        if (!jp.is_object()) throw ConfigError("field params must be an object");
        for (const auto& [key, val] : jp.items()) {
            if (!val.is_number())
                throw ConfigError("field params." + key + " must be a number");
            params[key] = val.get<double>();
        }
    }

    OdeSystem sys =
        resolve_system(system_name, params, fs::path(config_path).parent_path());
    ClrtConfig cfg = config_from_json(j, sys);
    if (flags.estimator_seed) cfg.estimator_seed = *flags.estimator_seed;
    cfg.validate();

    fs::path out_dir(output_dir);
    fs::create_directories(out_dir);
    std::ofstream prune_stream;
    if (flags.dump_prune) {
        prune_stream.open(out_dir / "prune.jsonl");
        cfg.prune_dump = &prune_stream;
    }

    auto t_start = std::chrono::steady_clock::now();
    RunResult res = run(sys, cfg);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    RunReport rep = make_report(system_name, cfg, std::move(res), wall);
    rep.params = sys.params;

    {
        std::ofstream csv(out_dir / "segments.csv");
        write_segments_csv(rep, csv);
    }

    nlohmann::json jr = report_json(rep);
    if (flags.backward_bloat) {
        // Re-certify each segment from both ends: forward from the incoming
        // ball (reproducing the stored radius) and backward from the discrete
        // endpoint, which yields an independent cover of the same window.
        ClrtConfig quiet = cfg;
        quiet.prune_dump = nullptr;
        std::vector<double> in = incoming_radii(rep);
        nlohmann::json arr = nlohmann::json::array();
        for (size_t i = 0; i < rep.result.segments.size(); ++i) {
            const TubeSegment& seg = rep.result.segments[i];
            nlohmann::json row{{"idx", i}};
            try {
                Ball fwd_ball{seg.continuous.center_box, seg.continuous.metric, in[i]};
                row["forward"] =
                    bloat_radius(sys, seg.t_lo, seg.h, fwd_ball, quiet).delta_big;
                row["backward"] = bloat_radius(sys, seg.t_hi, seg.h, seg.discrete_end,
                                               quiet, Direction::Backward)
                                      .delta_big;
            } catch (const Error& e) {
                row["error"] = e.what();
            }
            arr.push_back(std::move(row));
        }
        jr["backward_check"] = std::move(arr);
    }
    {
        std::ofstream js(out_dir / "report.json");
        js << jr.dump(2) << '\n';
    }

    if (flags.plot_dims) {
        std::ofstream plot(out_dir / "plot.csv");
        emit_plot_data(rep, *flags.plot_dims, flags.plot_stride, plot);
    }
    return rep;
}

} // namespace clrt
