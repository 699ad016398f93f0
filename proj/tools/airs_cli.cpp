// Command-line front end: sweep runners, the rate-region tracer, and the
// built-in verification battery. Grid points run data-parallel with
// per-point derived random streams, so output files are reproducible for
// a fixed config and seed.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "airs/airs.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string seed_str;
    int parallel = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Config file (key = value lines)");
    cmd->add_option("--out", f.out_dir, "Output directory");
    cmd->add_option("--seed", f.seed_str, "Run seed (64-bit unsigned)");
    cmd->add_option("--parallel", f.parallel, "Worker threads for grid points");
}

airs::ScenarioConfig resolve(const CommonFlags& f) {
    airs::ScenarioConfig cfg;
    if (!f.config_path.empty()) cfg = airs::load_config(f.config_path);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (const char* env = std::getenv("AIRS_OUT_DIR"); env && f.out_dir.empty())
        cfg.out_dir = env;
    if (!f.seed_str.empty()) cfg.seed = std::stoull(f.seed_str);
    if (f.parallel > 0) cfg.parallel = f.parallel;
    return cfg;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9; v += step) g.push_back(v);
    return g;
}

int finish_sweep(const airs::RunOutput& out) {
    int failed = 0;
    for (const auto& r : out.records)
        if (!r.error.empty()) ++failed;
    std::printf("wrote %s (%zu records, %d failed)\n", out.csv_path.c_str(),
                out.records.size(), failed);
    std::printf("manifest: %s\n", out.manifest_path.c_str());
    return out.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted sum-rate experiments for amplifying-surface links"};
    app.require_subcommand(1);

    CommonFlags f_n, f_eps, f_alloc, f_mua, f_mus, f_rr, f_self;

    auto* cmd_n = app.add_subcommand("single-n-sweep",
                                     "Single-user WSR versus total element count");
    add_common(cmd_n, f_n);
    auto* cmd_eps =
        app.add_subcommand("single-eps-sweep", "Single-user WSR versus downlink weight");
    add_common(cmd_eps, f_eps);
    auto* cmd_alloc = app.add_subcommand(
        "alloc-curve", "Downlink element share versus total element count");
    add_common(cmd_alloc, f_alloc);
    auto* cmd_mua = app.add_subcommand(
        "mu-adaptive", "Multi-user WSR with per-user surface configurations");
    add_common(cmd_mua, f_mua);
    auto* cmd_mus =
        app.add_subcommand("mu-static", "Multi-user WSR with one shared phase vector");
    add_common(cmd_mus, f_mus);
    auto* cmd_rr =
        app.add_subcommand("rate-region", "Uplink/downlink weighted-rate region");
    add_common(cmd_rr, f_rr);
    auto* cmd_self =
        app.add_subcommand("selftest", "Run the built-in verification battery");
    add_common(cmd_self, f_self);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_n->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_n);
            cfg.output_stem = "single_n_sweep";
            cfg.sweep_variable = "n_total";
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = linear_grid(20, 200, 20);
            if (cfg.schemes.empty())
                cfg.schemes = {"distributed-opt", "distributed-fixed", "bs-side",
                               "user-side", "pirs"};
            return finish_sweep(airs::run_sweep(cfg));
        }
        if (cmd_eps->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_eps);
            cfg.output_stem = "single_eps_sweep";
            cfg.sweep_variable = "epsilon";
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = linear_grid(0.0, 1.0, 0.1);
            if (cfg.schemes.empty())
                cfg.schemes = {"distributed-opt", "bs-side", "user-side", "pirs"};
            return finish_sweep(airs::run_sweep(cfg));
        }
        if (cmd_alloc->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_alloc);
            cfg.output_stem = "alloc_curve";
            cfg.sweep_variable = "n_total";
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = linear_grid(20, 200, 20);
            if (cfg.schemes.empty()) cfg.schemes = {"alloc-es", "alloc-opt", "alloc-subopt"};
            return finish_sweep(airs::run_sweep(cfg));
        }
        if (cmd_mua->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_mua);
            cfg.output_stem = "mu_adaptive";
            cfg.sweep_variable = "n_total";
            if (cfg.k_users == 1) cfg.k_users = 4;
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = linear_grid(20, 200, 20);
            if (cfg.schemes.empty())
                cfg.schemes = {"mu-adaptive", "distributed-fixed", "bs-side", "user-side",
                               "pirs"};
            return finish_sweep(airs::run_sweep(cfg));
        }
        if (cmd_mus->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_mus);
            cfg.output_stem = "mu_static";
            cfg.sweep_variable = "n_total";
            if (cfg.k_users == 1) cfg.k_users = 4;
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = {16, 32, 48, 64};
            if (cfg.schemes.empty()) cfg.schemes = {"mu-static", "mu-adaptive"};
            return finish_sweep(airs::run_sweep(cfg));
        }
        if (cmd_rr->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_rr);
            cfg.output_stem = "rate_region";
            cfg.sweep_variable = "epsilon";
            if (cfg.k_users == 1) cfg.k_users = 2;
            if (cfg.n_total == 100) cfg.n_total = 32;
            if (cfg.sweep_grid.empty()) cfg.sweep_grid = linear_grid(0.0, 1.0, 0.1);
            airs::RateRegionOutput out = airs::run_rate_region(cfg);
            int failed = 0;
            for (const auto& r : out.records)
                if (!r.error.empty()) ++failed;
            std::printf("wrote %s (%zu records, %d failed)\n", out.csv_path.c_str(),
                        out.records.size(), failed);
            std::printf("manifest: %s\n", out.manifest_path.c_str());
            return out.all_ok ? 0 : 1;
        }
        if (cmd_self->parsed()) {
            airs::ScenarioConfig cfg = resolve(f_self);
            airs::SelftestOutput out = airs::run_selftest(cfg.out_dir, cfg.seed);
            for (const auto& r : out.records)
                std::printf("[%s] %s (metric %.3g)\n", r.error.empty() ? "PASS" : "FAIL",
                            r.scheme.c_str(), r.wsr_bpshz);
            std::printf("wrote %s\n", out.csv_path.c_str());
            return out.all_ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
