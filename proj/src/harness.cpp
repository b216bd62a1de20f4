#include "levybg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "levybg/fisher.hpp"
#include "levybg/rng.hpp"

namespace levybg {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double stddev_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

EstimatorStats abs_error_stats(std::vector<double> errs) {
    EstimatorStats s;
    s.count = errs.size();
    if (errs.empty()) return s;
    for (auto& e : errs) e = std::abs(e);
    std::sort(errs.begin(), errs.end());
    const auto q = [&](double p) {
        const double idx = p * static_cast<double>(errs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, errs.size() - 1);
        const double w = idx - static_cast<double>(lo);
        return (1.0 - w) * errs[lo] + w * errs[hi];
    };
    s.mae = q(0.5);
    s.q25 = q(0.25);
    s.q75 = q(0.75);
    return s;
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate();
    if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    if (n < 2 || !(h > 0.0)) throw std::invalid_argument("config: need n >= 2 and h > 0");
    const double t = static_cast<double>(n) * h;
    if (std::abs(t - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("config: n * h must equal the horizon T within 1e-9");
    if (u_mode == UMode::Theory && !(tau > 0.0))
        throw std::invalid_argument("config: theory u-mode needs tau > 0");
}

int default_worker_count() {
    if (const char* env = std::getenv("LEVYBG_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

McReport run_mc_experiment(const ExperimentConfig& config) {
    config.validate();
    const ThetaParams theta_star =
        config.theta_star ? *config.theta_star : theta_from_model(config.model);
    theta_star.validate();
    const MomentFunctionSet fset = default_moment_set();
    const double u = config.u_mode == UMode::Practical
                         ? practical_u(config.h)
                         : scaling_factor(config.n, UMode::Theory, config.tau).u;

    McReport report;
    report.theta_star = theta_star;
    report.u_used = u;
    report.records.resize(static_cast<std::size_t>(config.replications));

    const auto run_one = [&](int rep) {
        ReplicationRecord rec;
        rec.rep = rep;
        rec.seed = derive_seed(config.base_seed, static_cast<std::uint64_t>(rep));
        try {
            const IncrementBatch batch =
                simulate_increments(config.model, config.n, config.h, rec.seed);
            double sigma_prelim = 0.0;
            for (double x : batch.values) sigma_prelim += x * x;
            sigma_prelim = std::sqrt(sigma_prelim / batch.horizon());

            if (config.run.gmm) {
                const EstimationResult est = solve_gmm(batch, fset, u, config.gmm_opts);
                rec.sigma_sq_hat = est.theta_hat.sigma_sq;
                rec.alpha_hat = est.theta_hat.components[0].alpha;
                rec.r_plus_hat = est.theta_hat.components[0].r_plus;
                rec.r_minus_hat = est.theta_hat.components[0].r_minus;
                rec.iterations = est.diag.iterations;
                rec.residual = est.diag.residual;
                rec.converged = est.diag.converged;
                rec.boundary = est.diag.boundary_flag;
                rec.singular = est.diag.singular_flag;
                rec.ok = est.diag.converged && !est.diag.singular_flag;
            } else {
                rec.ok = true;
            }
            if (config.run.aj) {
                const double base = std::max(sigma_prelim, 1e-8);
                rec.aj_alpha_hat = aj_alpha(batch, ThresholdSpec{4.0 * base, 0.49},
                                            ThresholdSpec{8.0 * base, 0.49});
            }
            if (config.run.trv) {
                rec.trv_sigma_sq_hat =
                    truncated_rv(batch, ThresholdSpec{3.0 * std::max(sigma_prelim, 1e-8), 0.49});
            }
            if (config.run.single) {
                const auto sp = single_param_estimator(batch, fset.functions[1], u, theta_star,
                                                       SingleTarget::Alpha, 0);
                rec.single_alpha_hat = sp.estimate;
                rec.single_alpha_sd = std::sqrt(std::max(sp.asym_variance, 0.0));
            }
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        report.records[static_cast<std::size_t>(rep)] = std::move(rec);
    };

    int workers = config.workers > 0 ? config.workers : default_worker_count();
    workers = std::min<int>(workers, config.replications);
    if (workers <= 1) {
        for (int rep = 0; rep < config.replications; ++rep) run_one(rep);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < config.replications;
                     rep = next.fetch_add(1))
                    run_one(rep);
            });
        for (auto& t : pool) t.join();
    }

    std::size_t failed = 0;
    std::vector<double> gmm_a, gmm_s, gmm_rp, gmm_rm, aj_a, trv_s, single_a;
    const double a_star =
        theta_star.components.empty() ? 0.0 : theta_star.components[0].alpha;
    const double rp_star =
        theta_star.components.empty() ? 0.0 : theta_star.components[0].r_plus;
    const double rm_star =
        theta_star.components.empty() ? 0.0 : theta_star.components[0].r_minus;
    for (const auto& rec : report.records) {
        if (!rec.ok) {
            ++failed;
            continue;
        }
        if (config.run.gmm) {
            gmm_a.push_back(rec.alpha_hat - a_star);
            gmm_s.push_back(rec.sigma_sq_hat - theta_star.sigma_sq);
            gmm_rp.push_back(rec.r_plus_hat - rp_star);
            gmm_rm.push_back(rec.r_minus_hat - rm_star);
        }
        if (config.run.aj) aj_a.push_back(rec.aj_alpha_hat - a_star);
        if (config.run.trv) trv_s.push_back(rec.trv_sigma_sq_hat - theta_star.sigma_sq);
        if (config.run.single) single_a.push_back(rec.single_alpha_hat - a_star);
    }
    report.failure_rate =
        static_cast<double>(failed) / static_cast<double>(config.replications);
    if (config.run.gmm) {
        report.stats["gmm.alpha"] = abs_error_stats(gmm_a);
        report.stats["gmm.sigma_sq"] = abs_error_stats(gmm_s);
        report.stats["gmm.r_plus"] = abs_error_stats(gmm_rp);
        report.stats["gmm.r_minus"] = abs_error_stats(gmm_rm);
    }
    if (config.run.aj) report.stats["aj.alpha"] = abs_error_stats(aj_a);
    if (config.run.trv) report.stats["trv.sigma_sq"] = abs_error_stats(trv_s);
    if (config.run.single) report.stats["single.alpha"] = abs_error_stats(single_a);

    if (report.failure_rate > 0.2) {
        std::string first;
        for (const auto& rec : report.records)
            if (!rec.ok && !rec.error.empty()) {
                first = rec.error;
                break;
            }
        throw std::runtime_error("run_mc_experiment: solver failure rate " +
                                 std::to_string(report.failure_rate) +
                                 " exceeds 20%; first error: " + first);
    }

    // standardized alpha errors against the asymptotic law
    if (config.run.gmm && !theta_star.components.empty() && !gmm_a.empty()) {
        try {
            const Eigen::MatrixXd cov = asymptotic_covariance(theta_star, fset, config.n, u);
            report.theory_alpha_sd = std::sqrt(std::max(cov(1, 1), 0.0));
        } catch (const std::exception&) {
            report.theory_alpha_sd = 0.0;
        }
        if (report.theory_alpha_sd > 0.0) {
            std::vector<double> z;
            z.reserve(gmm_a.size());
            for (double e : gmm_a) z.push_back(e / report.theory_alpha_sd);
            const int nbins = 41;
            report.hist_edges.resize(nbins + 1);
            report.hist_counts.assign(nbins, 0);
            for (int i = 0; i <= nbins; ++i)
                report.hist_edges[static_cast<std::size_t>(i)] =
                    -5.0 + 10.0 * static_cast<double>(i) / nbins;
            for (double v : z) {
                if (v < -5.0 || v >= 5.0) continue;
                const auto b = static_cast<std::size_t>((v + 5.0) / 10.0 * nbins);
                report.hist_counts[std::min(b, static_cast<std::size_t>(nbins - 1))]++;
            }
            std::sort(z.begin(), z.end());
            double ks = 0.0;
            const double m = static_cast<double>(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double cdf = stddev_normal_cdf(z[i]);
                const double lo = static_cast<double>(i) / m;
                const double hi = static_cast<double>(i + 1) / m;
                ks = std::max({ks, std::abs(cdf - lo), std::abs(cdf - hi)});
            }
            report.ks_distance = ks;
        }
    }
    return report;
}

void write_mc_outputs(const McReport& report, const ExperimentConfig& config,
                      const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/records.csv");
        if (!csv) throw std::runtime_error("cannot write " + out_dir + "/records.csv");
        csv << "rep,seed,ok,sigma_sq_hat,alpha_hat,r_plus_hat,r_minus_hat,iterations,"
               "residual,converged,boundary,singular,aj_alpha_hat,trv_sigma_sq_hat,"
               "single_alpha_hat,single_alpha_sd,error\n";
        for (const auto& r : report.records) {
            csv << r.rep << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
                << fmt17(r.sigma_sq_hat) << ',' << fmt17(r.alpha_hat) << ','
                << fmt17(r.r_plus_hat) << ',' << fmt17(r.r_minus_hat) << ',' << r.iterations
                << ',' << fmt17(r.residual) << ',' << (r.converged ? 1 : 0) << ','
                << (r.boundary ? 1 : 0) << ',' << (r.singular ? 1 : 0) << ','
                << fmt17(r.aj_alpha_hat) << ',' << fmt17(r.trv_sigma_sq_hat) << ','
                << fmt17(r.single_alpha_hat) << ',' << fmt17(r.single_alpha_sd) << ','
                << '"' << r.error << '"' << '\n';
        }
    }
    json j;
    j["n"] = config.n;
    j["h"] = config.h;
    j["replications"] = config.replications;
    j["base_seed"] = config.base_seed;
    j["u"] = report.u_used;
    j["failure_rate"] = report.failure_rate;
    j["theta_star"] = report.theta_star.flatten();
    j["theory_alpha_sd"] = report.theory_alpha_sd;
    j["ks_distance"] = report.ks_distance;
    for (const auto& [name, s] : report.stats) {
        j["stats"][name] = {{"mae", s.mae}, {"q25", s.q25}, {"q75", s.q75}, {"count", s.count}};
    }
    j["histogram"]["edges"] = report.hist_edges;
    j["histogram"]["counts"] = report.hist_counts;
    std::ofstream out(out_dir + "/summary.json");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/summary.json");
    out << j.dump(2) << '\n';
}

void write_increments_csv(const IncrementBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "index,increment\n";
    for (std::size_t i = 0; i < batch.values.size(); ++i)
        out << i << ',' << fmt17(batch.values[i]) << '\n';
}

IncrementBatch read_increments_csv(const std::string& path, double h) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,increment", 0) != 0)
        throw std::runtime_error(path + ": expected header 'index,increment'");
    IncrementBatch batch;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        batch.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (batch.values.empty()) throw std::runtime_error(path + ": no increments");
    batch.h = h > 0.0 ? h : 1.0 / static_cast<double>(batch.values.size());
    return batch;
}

void write_estimation_json(const EstimationResult& res, const std::string& path) {
    json j;
    j["theta_hat"]["sigma_sq"] = res.theta_hat.sigma_sq;
    for (const auto& c : res.theta_hat.components)
        j["theta_hat"]["components"].push_back(
            {{"alpha", c.alpha}, {"r_plus", c.r_plus}, {"r_minus", c.r_minus}});
    j["u"] = res.u_used;
    j["n"] = res.n;
    j["h"] = res.h;
    j["iterations"] = res.diag.iterations;
    j["residual"] = res.diag.residual;
    j["jacobian_condition"] = res.diag.jacobian_condition;
    j["converged"] = res.diag.converged;
    j["boundary_flag"] = res.diag.boundary_flag;
    j["singular_flag"] = res.diag.singular_flag;
    j["multistart_spread"] = res.diag.multistart_spread;
    if (res.asym_cov.size() > 0) {
        for (Eigen::Index i = 0; i < res.asym_cov.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(res.asym_cov.cols()));
            for (Eigen::Index k = 0; k < res.asym_cov.cols(); ++k)
                row[static_cast<std::size_t>(k)] = res.asym_cov(i, k);
            j["asym_cov"].push_back(row);
        }
        for (Eigen::Index i = 0; i < res.ci_lo.size(); ++i)
            j["ci"].push_back({res.ci_lo[i], res.ci_hi[i]});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::vector<Table1Row> table1_preset(const std::string& out_dir, int replications,
                                     int workers, std::uint64_t seed, bool include_fine) {
    std::filesystem::create_directories(out_dir);
    std::vector<double> hs = {5.0 / 23400.0, 1.0 / 23400.0};
    if (include_fine) hs.push_back(0.2 / 23400.0);

    std::vector<Table1Row> rows;
    json j;
    for (double alpha : {1.3, 1.7}) {
        for (double h : hs) {
            ExperimentConfig cfg;
            cfg.model.mu = 0.0;
            cfg.model.sigma = 1.0;
            cfg.model.components = {{alpha, -1.0 / 3.0, 1.0}};
            cfg.model.nuisance = StableSpec{0.5, 0.0, 0.1};
            cfg.n = static_cast<std::size_t>(std::llround(1.0 / h));
            cfg.h = 1.0 / static_cast<double>(cfg.n);
            cfg.horizon = 1.0;
            cfg.replications = replications;
            cfg.base_seed = derive_seed(seed, static_cast<std::uint64_t>(rows.size()));
            cfg.workers = workers;
            cfg.run.single = false;
            const McReport rep = run_mc_experiment(cfg);

            Table1Row row;
            row.alpha = alpha;
            row.h = cfg.h;
            row.n = cfg.n;
            row.gmm_alpha = rep.stats.at("gmm.alpha");
            row.gmm_sigma_sq = rep.stats.at("gmm.sigma_sq");
            row.aj_alpha = rep.stats.at("aj.alpha");
            row.trv_sigma_sq = rep.stats.at("trv.sigma_sq");
            row.failure_rate = rep.failure_rate;
            rows.push_back(row);

            char label[64];
            std::snprintf(label, sizeof label, "alpha=%.1f,h=%g", alpha, cfg.h);
            write_mc_outputs(rep, cfg, out_dir + "/" + label);
            j["rows"].push_back({{"alpha", alpha},
                                 {"h", cfg.h},
                                 {"n", cfg.n},
                                 {"gmm_alpha_mae", row.gmm_alpha.mae},
                                 {"gmm_sigma_sq_mae", row.gmm_sigma_sq.mae},
                                 {"aj_alpha_mae", row.aj_alpha.mae},
                                 {"trv_sigma_sq_mae", row.trv_sigma_sq.mae},
                                 {"failure_rate", row.failure_rate}});
        }
    }
    std::ofstream csv(out_dir + "/table1.csv");
    csv << "alpha,h,n,gmm_alpha_mae,gmm_sigma_sq_mae,aj_alpha_mae,trv_sigma_sq_mae,"
           "failure_rate\n";
    for (const auto& r : rows)
        csv << r.alpha << ',' << fmt17(r.h) << ',' << r.n << ',' << fmt17(r.gmm_alpha.mae)
            << ',' << fmt17(r.gmm_sigma_sq.mae) << ',' << fmt17(r.aj_alpha.mae) << ','
            << fmt17(r.trv_sigma_sq.mae) << ',' << fmt17(r.failure_rate) << '\n';
    std::ofstream out(out_dir + "/table1.json");
    out << j.dump(2) << '\n';
    return rows;
}

void fisher_trajectory_csv(double sigma_sq, double r, double alpha,
                           std::span<const double> h_list, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const Eigen::Matrix2d limit = fisher_limit_block(sigma_sq, r, alpha);
    out << "h,m_rr,m_ra,m_aa,det,norm_det,limit_rr,limit_ra,limit_aa\n";
    for (double h : h_list) {
        const Eigen::Matrix2d m = rescaled_fisher_block(sigma_sq, r, alpha, h);
        const double det = m.determinant();
        out << fmt17(h) << ',' << fmt17(m(0, 0)) << ',' << fmt17(m(0, 1)) << ','
            << fmt17(m(1, 1)) << ',' << fmt17(det) << ','
            << fmt17(det / (m(0, 0) * m(1, 1))) << ',' << fmt17(limit(0, 0)) << ','
            << fmt17(limit(0, 1)) << ',' << fmt17(limit(1, 1)) << '\n';
    }
}

}  // namespace levybg
