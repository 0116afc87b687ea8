#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "clrt/errors.hpp"
#include "clrt/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Tight continuous-time reachtubes for nonlinear ODEs"};
    std::string config_path;
    std::string out_dir = ".";
    std::string plot_dims;
    int stride = 20;
    bool dump_prune = false;
    bool backward = false;
    unsigned seed = 0;

    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--plot", plot_dims,
                   "write plot.csv with the tube projected onto coordinates i,j");
    app.add_option("--stride", stride, "plot every Nth segment")->capture_default_str();
    app.add_flag("--dump-prune", dump_prune,
                 "stream every box the bloating verifier explores to prune.jsonl");
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "override the speed-estimator seed");
    app.add_flag("--backward-bloat", backward,
                 "re-certify each segment backward from its discrete endpoint");
    CLI11_PARSE(app, argc, argv);

    clrt::BenchmarkFlags flags;
    flags.plot_stride = stride;
    flags.dump_prune = dump_prune;
    flags.backward_bloat = backward;
    if (seed_opt->count() > 0) flags.estimator_seed = seed;
    if (!plot_dims.empty()) {
        int di = 0, dj = 0;
        if (std::sscanf(plot_dims.c_str(), "%d,%d", &di, &dj) != 2) {
            std::cerr << "error: --plot expects two indices as i,j\n";
            return 1;
        }
        flags.plot_dims = std::pair<int, int>{di, dj};
    }

    try {
        clrt::RunReport rep = clrt::run_benchmark(config_path, out_dir, flags);
        const clrt::RunResult& res = rep.result;
        std::printf("%s: %zu segments over [%g, %g], total volume %.6g, "
                    "avg %.6g, ftle upper %.6g, %.3f s\n",
                    rep.system.c_str(), res.segments.size(), rep.cfg.t0, res.t_reached,
                    rep.total_volume, rep.avg_volume, rep.ftle_upper, rep.wall_seconds);
        if (!res.complete) {
            std::printf("partial run: %s\n", res.abort_reason.c_str());
            return 2;
        }
        return 0;
    } catch (const clrt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
