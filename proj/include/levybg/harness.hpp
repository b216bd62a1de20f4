#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "levybg/baselines.hpp"
#include "levybg/gmm.hpp"

namespace levybg {

struct EstimatorToggles {
    bool gmm = true;
    bool single = false;
    bool aj = true;
    bool trv = true;
};

struct ExperimentConfig {
    SimModelSpec model;
    std::size_t n = 23400;
    double h = 1.0 / 23400.0;
    double horizon = 1.0;  // n h must equal this within 1e-9
    UMode u_mode = UMode::Practical;
    double tau = 0.1;  // theory-mode factor
    int replications = 100;
    std::uint64_t base_seed = 1;
    int workers = 0;  // 0: LEVYBG_WORKERS env var, else hardware
    EstimatorToggles run;
    GmmOptions gmm_opts;
    std::optional<ThetaParams> theta_star;  // defaults to theta_from_model(model)

    void validate() const;
};

struct ReplicationRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    bool ok = false;  // converged, non-singular solve
    double sigma_sq_hat = 0.0, alpha_hat = 0.0, r_plus_hat = 0.0, r_minus_hat = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false, boundary = false, singular = false;
    double aj_alpha_hat = 0.0;
    double trv_sigma_sq_hat = 0.0;
    double single_alpha_hat = 0.0, single_alpha_sd = 0.0;
    std::string error;
};

struct EstimatorStats {
    double mae = 0.0;  // median absolute error
    double q25 = 0.0, q75 = 0.0;
    std::size_t count = 0;
};

struct McReport {
    std::vector<ReplicationRecord> records;
    std::map<std::string, EstimatorStats> stats;
    double failure_rate = 0.0;
    double u_used = 0.0;
    std::vector<double> hist_edges;
    std::vector<std::size_t> hist_counts;  // standardized gmm alpha errors
    double theory_alpha_sd = 0.0;          // asymptotic sd of alpha_hat at theta_star
    double ks_distance = 0.0;              // standardized errors vs N(0,1)
    ThetaParams theta_star;
};

int default_worker_count();

// Seeded, parallel (worker-pool) replications. Per-replication seeds depend
// only on (base_seed, rep index), so worker count never changes results.
// Aborts when more than 20% of solves fail.
McReport run_mc_experiment(const ExperimentConfig& config);

// records.csv + summary.json under out_dir (created if needed).
void write_mc_outputs(const McReport& report, const ExperimentConfig& config,
                      const std::string& out_dir);

void write_increments_csv(const IncrementBatch& batch, const std::string& path);
// h <= 0 reads with the T = 1 convention h = 1/n.
IncrementBatch read_increments_csv(const std::string& path, double h = 0.0);

void write_estimation_json(const EstimationResult& res, const std::string& path);

struct Table1Row {
    double alpha = 0.0;
    double h = 0.0;
    std::size_t n = 0;
    EstimatorStats gmm_alpha, gmm_sigma_sq, aj_alpha, trv_sigma_sq;
    double failure_rate = 0.0;
};

// The reference-model grid (alpha in {1.3, 1.7}, h in {5, 1}/23400, plus
// 0.2/23400 behind include_fine) at the requested replication count.
std::vector<Table1Row> table1_preset(const std::string& out_dir, int replications,
                                     int workers, std::uint64_t seed, bool include_fine);

void fisher_trajectory_csv(double sigma_sq, double r, double alpha,
                           std::span<const double> h_list, const std::string& path);

}  // namespace levybg
