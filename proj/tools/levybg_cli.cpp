// Command-line front end; talks to the library through the C API only.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include "levybg.h"

namespace {

int fail(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, lbg_last_error());
    return 1;
}

struct ModelArgs {
    double mu = 0.0, sigma = 1.0;
    double alpha = 1.3, beta = 0.0, scale = 1.0;
    double nuisance_alpha = 0.0, nuisance_beta = 0.0, nuisance_scale = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mu", mu, "drift per unit time");
        cmd->add_option("--sigma", sigma, "diffusion coefficient");
        cmd->add_option("--alpha", alpha, "stability index of the modeled component")
            ->required();
        cmd->add_option("--beta", beta, "skewness in [-1,1]");
        cmd->add_option("--scale", scale, "multiplier of the standardized component");
        cmd->add_option("--nuisance-alpha", nuisance_alpha, "nuisance stability index");
        cmd->add_option("--nuisance-beta", nuisance_beta, "nuisance skewness");
        cmd->add_option("--nuisance-scale", nuisance_scale, "nuisance multiplier");
    }

    lbg_model* build() const {
        lbg_model* m = lbg_model_new(mu, sigma);
        if (!m) return nullptr;
        if (lbg_model_add_component(m, alpha, beta, scale) != LBG_OK) {
            lbg_model_free(m);
            return nullptr;
        }
        if (nuisance_scale > 0.0 &&
            lbg_model_set_nuisance(m, nuisance_alpha, nuisance_beta, nuisance_scale) !=
                LBG_OK) {
            lbg_model_free(m);
            return nullptr;
        }
        return m;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jump-activity and volatility estimation for Levy-process increments"};
    app.require_subcommand(1);

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "simulate increments and write CSV");
    ModelArgs sim_model;
    sim_model.attach(sim);
    std::size_t sim_n = 23400;
    double sim_h = 1.0 / 23400.0;
    std::uint64_t sim_seed = 1;
    std::string sim_out = "increments.csv";
    sim->add_option("--n", sim_n, "number of increments")->required();
    sim->add_option("--h", sim_h, "time step")->required();
    sim->add_option("--seed", sim_seed, "base seed");
    sim->add_option("--out", sim_out, "output CSV path")->required();

    // estimate ----------------------------------------------------------------
    auto* est = app.add_subcommand("estimate", "estimate theta from an increments CSV");
    std::string est_in, est_out = "estimate.json", est_umode = "practical";
    double est_h = 0.0, est_tau = 0.1;
    est->add_option("--in", est_in, "input CSV (header index,increment)")->required();
    est->add_option("--h", est_h, "time step (default: 1/n, horizon 1)");
    est->add_option("--u", est_umode, "'practical', 'theory', or a number");
    est->add_option("--tau", est_tau, "theory-mode factor");
    est->add_option("--out", est_out, "output JSON path")->required();

    // mc ----------------------------------------------------------------------
    auto* mc = app.add_subcommand("mc", "seeded Monte Carlo experiment");
    ModelArgs mc_model;
    mc_model.attach(mc);
    std::size_t mc_n = 23400;
    double mc_h = 1.0 / 23400.0, mc_tau = 0.1;
    int mc_reps = 100, mc_workers = 0;
    std::uint64_t mc_seed = 1;
    std::string mc_out = "mc_out", mc_umode = "practical";
    std::vector<std::string> mc_estimators = {"gmm", "aj", "trv"};
    mc->add_option("--n", mc_n, "increments per replication")->required();
    mc->add_option("--h", mc_h, "time step")->required();
    mc->add_option("--replications", mc_reps, "replication count");
    mc->add_option("--seed", mc_seed, "base seed");
    mc->add_option("--workers", mc_workers, "worker threads (0: LEVYBG_WORKERS or hardware)");
    mc->add_option("--u-mode", mc_umode, "practical | theory");
    mc->add_option("--tau", mc_tau, "theory-mode factor");
    mc->add_option("--estimators", mc_estimators, "subset of gmm single aj trv");
    mc->add_option("--out-dir", mc_out, "output directory")->required();

    // fisher --------------------------------------------------------------------
    auto* fis = app.add_subcommand("fisher", "rescaled Fisher-block trajectory CSV");
    double f_alpha = 1.3, f_r = 1.0, f_s2 = 1.0, f_hmin = 1e-6;
    std::string f_out = "fisher.csv";
    fis->add_option("--alpha", f_alpha, "stability index")->required();
    fis->add_option("--r", f_r, "symmetric jump factor r")->required();
    fis->add_option("--sigma2", f_s2, "diffusion variance");
    fis->add_option("--h-min", f_hmin, "smallest step of the decade trajectory");
    fis->add_option("--out", f_out, "output CSV path")->required();

    // table1 ----------------------------------------------------------------------
    auto* t1 = app.add_subcommand("table1", "reference-model error grid at desk scale");
    int t1_reps = 500, t1_workers = 0;
    std::uint64_t t1_seed = 1;
    bool t1_fine = false;
    std::string t1_out = "table1_out";
    t1->add_option("--replications", t1_reps, "replications per cell");
    t1->add_option("--workers", t1_workers, "worker threads");
    t1->add_option("--seed", t1_seed, "base seed");
    t1->add_flag("--include-fine", t1_fine,
                 "also run h = 0.2/23400 (many hours at full replications)");
    t1->add_option("--out-dir", t1_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n%s", e.what(), app.help().c_str());
        return 2;
    }

    if (sim->parsed()) {
        lbg_model* m = sim_model.build();
        if (!m) return fail("simulate: invalid model");
        lbg_batch* b = nullptr;
        if (lbg_simulate(m, sim_n, sim_h, sim_seed, &b) != LBG_OK) {
            lbg_model_free(m);
            return fail("simulate");
        }
        const lbg_status st = lbg_batch_write_csv(b, sim_out.c_str());
        lbg_batch_free(b);
        lbg_model_free(m);
        if (st != LBG_OK) return fail("simulate: write");
        std::printf("wrote %zu increments to %s\n", sim_n, sim_out.c_str());
        return 0;
    }

    if (est->parsed()) {
        lbg_batch* b = nullptr;
        if (lbg_batch_read_csv(est_in.c_str(), est_h, &b) != LBG_OK)
            return fail("estimate: read");
        double u = 0.0;
        if (est_umode == "practical") u = 0.0;
        else if (est_umode == "theory") u = lbg_theory_u(lbg_batch_n(b), est_tau);
        else {
            try {
                u = std::stod(est_umode);
            } catch (const std::exception&) {
                lbg_batch_free(b);
                std::fprintf(stderr, "estimate: bad --u value '%s'\n", est_umode.c_str());
                return 2;
            }
        }
        lbg_result* r = nullptr;
        if (lbg_estimate(b, u, &r) != LBG_OK) {
            lbg_batch_free(b);
            return fail("estimate");
        }
        const lbg_status st = lbg_result_write_json(r, est_out.c_str());
        const int converged = lbg_result_converged(r);
        lbg_result_free(r);
        lbg_batch_free(b);
        if (st != LBG_OK) return fail("estimate: write");
        std::printf("estimate written to %s (%s)\n", est_out.c_str(),
                    converged ? "converged" : "NOT converged");
        return converged ? 0 : 1;
    }

    if (mc->parsed()) {
        std::string est_list;
        for (std::size_t i = 0; i < mc_estimators.size(); ++i)
            est_list += (i ? "\",\"" : "\"") + mc_estimators[i] + (i + 1 == mc_estimators.size() ? "\"" : "");
        char cfg[1024];
        std::snprintf(cfg, sizeof cfg,
                      "{\"model\":{\"mu\":%.17g,\"sigma\":%.17g,\"components\":[{\"alpha\":%"
                      ".17g,\"beta\":%.17g,\"scale\":%.17g}]%s},"
                      "\"n\":%zu,\"h\":%.17g,\"replications\":%d,\"seed\":%" PRIu64
                      ",\"workers\":%d,\"u_mode\":\"%s\",\"tau\":%.17g,\"estimators\":[%s]}",
                      mc_model.mu, mc_model.sigma, mc_model.alpha, mc_model.beta,
                      mc_model.scale,
                      mc_model.nuisance_scale > 0.0
                          ? (",\"nuisance\":{\"alpha\":" + std::to_string(mc_model.nuisance_alpha) +
                             ",\"beta\":" + std::to_string(mc_model.nuisance_beta) +
                             ",\"scale\":" + std::to_string(mc_model.nuisance_scale) + "}")
                                .c_str()
                          : "",
                      mc_n, mc_h, mc_reps, mc_seed, mc_workers, mc_umode.c_str(), mc_tau,
                      est_list.c_str());
        if (lbg_run_mc_json(cfg, mc_out.c_str()) != LBG_OK) return fail("mc");
        std::printf("experiment written to %s\n", mc_out.c_str());
        return 0;
    }

    if (fis->parsed()) {
        std::vector<double> hs;
        for (double h = 1e-3; h >= f_hmin * 0.999; h /= 10.0) hs.push_back(h);
        if (hs.empty() || hs.back() > f_hmin * 1.001) hs.push_back(f_hmin);
        if (lbg_fisher_trajectory_csv(f_s2, f_r, f_alpha, hs.data(), hs.size(),
                                      f_out.c_str()) != LBG_OK)
            return fail("fisher");
        std::printf("trajectory written to %s\n", f_out.c_str());
        return 0;
    }

    if (t1->parsed()) {
        if (lbg_table1(t1_out.c_str(), t1_reps, t1_workers, t1_seed, t1_fine ? 1 : 0) !=
            LBG_OK)
            return fail("table1");
        std::printf("table written to %s\n", t1_out.c_str());
        return 0;
    }
    return 2;
}
