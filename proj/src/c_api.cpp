#include "levybg.h"

#include <cstring>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "levybg/fisher.hpp"
#include "levybg/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Exception-to-status translation shared by every entry point.
template <class Fn>
lbg_status guarded(Fn&& fn) {
    try {
        fn();
        return LBG_OK;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return LBG_ERR_ARGUMENT;
    } catch (const std::runtime_error& e) {
        set_error(e.what());
        const std::string what = e.what();
        if (what.find("not identified") != std::string::npos) return LBG_ERR_NOT_IDENTIFIED;
        if (what.find("singular") != std::string::npos ||
            what.find("identifiability") != std::string::npos)
            return LBG_ERR_SINGULAR;
        if (what.find("cannot write") != std::string::npos ||
            what.find("cannot read") != std::string::npos ||
            what.find("expected header") != std::string::npos)
            return LBG_ERR_IO;
        return LBG_ERR_NUMERIC;
    } catch (const std::exception& e) {
        set_error(e.what());
        return LBG_ERR_INTERNAL;
    }
}

}  // namespace

struct lbg_model {
    levybg::SimModelSpec spec;
};

struct lbg_batch {
    levybg::IncrementBatch batch;
};

struct lbg_result {
    levybg::EstimationResult result;
};

extern "C" {

const char* lbg_last_error(void) { return g_last_error.c_str(); }

lbg_model* lbg_model_new(double mu, double sigma) {
    auto* m = new (std::nothrow) lbg_model;
    if (m) {
        m->spec.mu = mu;
        m->spec.sigma = sigma;
        m->spec.components.clear();
    }
    return m;
}

lbg_status lbg_model_add_component(lbg_model* m, double alpha, double beta, double scale) {
    if (!m) {
        set_error("null model");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        levybg::StableSpec s{alpha, beta, scale};
        s.validate();
        m->spec.components.push_back(s);
        m->spec.validate();
    });
}

lbg_status lbg_model_set_nuisance(lbg_model* m, double alpha, double beta, double scale) {
    if (!m) {
        set_error("null model");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        levybg::StableSpec s{alpha, beta, scale};
        s.validate();
        m->spec.nuisance = s;
    });
}

void lbg_model_free(lbg_model* m) { delete m; }

lbg_status lbg_sample_stable(double alpha, double beta, size_t n, uint64_t seed, double* out) {
    if (!out) {
        set_error("null output buffer");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        const auto draws = levybg::sample_standard_stable(alpha, beta, n, seed);
        std::memcpy(out, draws.data(), n * sizeof(double));
    });
}

lbg_status lbg_simulate(const lbg_model* m, size_t n, double h, uint64_t seed,
                        lbg_batch** out) {
    if (!m || !out) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        auto* b = new lbg_batch;
        b->batch = levybg::simulate_increments(m->spec, n, h, seed);
        *out = b;
    });
}

lbg_status lbg_batch_read_csv(const char* path, double h, lbg_batch** out) {
    if (!path || !out) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        auto* b = new lbg_batch;
        b->batch = levybg::read_increments_csv(path, h);
        *out = b;
    });
}

lbg_status lbg_batch_write_csv(const lbg_batch* b, const char* path) {
    if (!b || !path) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] { levybg::write_increments_csv(b->batch, path); });
}

size_t lbg_batch_n(const lbg_batch* b) { return b ? b->batch.n() : 0; }
double lbg_batch_h(const lbg_batch* b) { return b ? b->batch.h : 0.0; }
const double* lbg_batch_values(const lbg_batch* b) {
    return b ? b->batch.values.data() : nullptr;
}
void lbg_batch_free(lbg_batch* b) { delete b; }

double lbg_practical_u(double h) { return levybg::practical_u(h); }
double lbg_theory_u(size_t n, double tau) {
    return levybg::scaling_factor(n, levybg::UMode::Theory, tau).u;
}

lbg_status lbg_estimate(const lbg_batch* b, double u, lbg_result** out) {
    if (!b || !out) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        const double uu = u > 0.0 ? u : levybg::practical_u(b->batch.h);
        auto* r = new lbg_result;
        r->result = levybg::solve_gmm(b->batch, levybg::default_moment_set(), uu);
        *out = r;
    });
}

lbg_status lbg_result_write_json(const lbg_result* r, const char* path) {
    if (!r || !path) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] { levybg::write_estimation_json(r->result, path); });
}

size_t lbg_result_dim(const lbg_result* r) { return r ? r->result.theta_hat.dim() : 0; }

lbg_status lbg_result_theta(const lbg_result* r, double* out) {
    if (!r || !out) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    const auto flat = r->result.theta_hat.flatten();
    std::memcpy(out, flat.data(), flat.size() * sizeof(double));
    return LBG_OK;
}

lbg_status lbg_result_cov(const lbg_result* r, double* out) {
    if (!r || !out) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    const auto& c = r->result.asym_cov;
    if (c.size() == 0) {
        set_error("covariance unavailable (singular A)");
        return LBG_ERR_SINGULAR;
    }
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index k = 0; k < c.cols(); ++k)
            out[i * c.cols() + k] = c(i, k);
    return LBG_OK;
}

lbg_status lbg_result_ci(const lbg_result* r, double* lo, double* hi) {
    if (!r || !lo || !hi) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    if (r->result.ci_lo.size() == 0) {
        set_error("intervals unavailable (singular A)");
        return LBG_ERR_SINGULAR;
    }
    for (Eigen::Index i = 0; i < r->result.ci_lo.size(); ++i) {
        lo[i] = r->result.ci_lo[i];
        hi[i] = r->result.ci_hi[i];
    }
    return LBG_OK;
}

int lbg_result_converged(const lbg_result* r) {
    return r && r->result.diag.converged ? 1 : 0;
}
int lbg_result_boundary_flag(const lbg_result* r) {
    return r && r->result.diag.boundary_flag ? 1 : 0;
}
int lbg_result_singular_flag(const lbg_result* r) {
    return r && r->result.diag.singular_flag ? 1 : 0;
}
void lbg_result_free(lbg_result* r) { delete r; }

lbg_status lbg_fisher_block(double sigma_sq, double r, double alpha, double h,
                            double out_block[4]) {
    if (!out_block) {
        set_error("null output buffer");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        const Eigen::Matrix2d m = levybg::rescaled_fisher_block(sigma_sq, r, alpha, h);
        out_block[0] = m(0, 0);
        out_block[1] = m(0, 1);
        out_block[2] = m(1, 0);
        out_block[3] = m(1, 1);
    });
}

lbg_status lbg_fisher_trajectory_csv(double sigma_sq, double r, double alpha,
                                     const double* h_list, size_t n_h, const char* path) {
    if (!h_list || !path) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        levybg::fisher_trajectory_csv(sigma_sq, r, alpha, {h_list, n_h}, path);
    });
}

lbg_status lbg_run_mc_json(const char* config_json, const char* out_dir) {
    if (!config_json || !out_dir) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        const auto j = nlohmann::json::parse(config_json);
        levybg::ExperimentConfig cfg;
        const auto& jm = j.at("model");
        cfg.model.mu = jm.value("mu", 0.0);
        cfg.model.sigma = jm.value("sigma", 1.0);
        for (const auto& c : jm.at("components"))
            cfg.model.components.push_back(
                {c.at("alpha").get<double>(), c.value("beta", 0.0), c.value("scale", 1.0)});
        if (jm.contains("nuisance")) {
            const auto& nj = jm.at("nuisance");
            cfg.model.nuisance = levybg::StableSpec{
                nj.at("alpha").get<double>(), nj.value("beta", 0.0), nj.value("scale", 1.0)};
        }
        cfg.n = j.at("n").get<std::size_t>();
        cfg.h = j.at("h").get<double>();
        cfg.horizon = j.value("horizon", static_cast<double>(cfg.n) * cfg.h);
        cfg.replications = j.value("replications", 100);
        cfg.base_seed = j.value("seed", std::uint64_t{1});
        cfg.workers = j.value("workers", 0);
        cfg.tau = j.value("tau", 0.1);
        if (j.value("u_mode", std::string("practical")) == std::string("theory"))
            cfg.u_mode = levybg::UMode::Theory;
        if (j.contains("estimators")) {
            cfg.run = {};
            cfg.run.gmm = cfg.run.single = cfg.run.aj = cfg.run.trv = false;
            for (const auto& e : j.at("estimators")) {
                const auto name = e.get<std::string>();
                if (name == "gmm") cfg.run.gmm = true;
                else if (name == "single") cfg.run.single = true;
                else if (name == "aj") cfg.run.aj = true;
                else if (name == "trv") cfg.run.trv = true;
                else throw std::invalid_argument("unknown estimator '" + name + "'");
            }
        }
        const levybg::McReport rep = levybg::run_mc_experiment(cfg);
        levybg::write_mc_outputs(rep, cfg, out_dir);
    });
}

lbg_status lbg_table1(const char* out_dir, int replications, int workers, uint64_t seed,
                      int include_fine) {
    if (!out_dir) {
        set_error("null argument");
        return LBG_ERR_ARGUMENT;
    }
    return guarded([&] {
        levybg::table1_preset(out_dir, replications, workers, seed, include_fine != 0);
    });
}

}  // extern "C"
