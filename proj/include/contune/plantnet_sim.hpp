#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "contune/jsonio.hpp"

namespace contune {

struct PoolConfig {
  int http = 40;
  int download = 40;
  int extract = 7;
  int simsearch = 40;
  bool operator==(const PoolConfig&) const = default;
};

/// Pipeline stages of one identification request, in execution order.
enum TaskIndex {
  kPreProcess = 0,
  kWaitDownload,
  kDownload,
  kWaitExtract,
  kExtract,
  kProcess,
  kWaitSimsearch,
  kSimsearch,
  kPostProcess,
  kTaskCount
};

const char* task_name(int task);

struct ServiceTimes {
  double pre_process = 0.050;
  double download = 0.055;
  double extract = 0.126;
  double process = 0.180;
  double simsearch = 0.800;
  double post_process = 0.050;
  bool operator==(const ServiceTimes&) const = default;
};

/// CPU load contributed by each task while it runs. Zero-weight tasks do not
/// enter the processor-sharing pool (download is I/O, extract runs on GPU).
struct CpuWeights {
  double pre_process = 1.0;
  double download = 0.0;
  double extract = 0.0;
  double process = 1.0;
  double simsearch = 1.0;
  double post_process = 1.0;
  bool operator==(const CpuWeights&) const = default;
};

struct SimParams {
  int cpu_cores = 40;
  int clients = 80;
  double duration = 1380.0;
  double sample_interval = 10.0;
  ServiceTimes service;
  CpuWeights cpu_weight;
  double gpu_efficiency = 0.93;      // per-inference rate scales by eff^(k-1)
  double gpu_mem_base = 1.5;         // GB
  double gpu_mem_per_thread = 1.0;   // GB per extract slot
  double jitter_cv = 0.1;            // lognormal coefficient of variation
  std::uint64_t seed = 0;
  bool operator==(const SimParams&) const = default;
};

/// Fraction of the run treated as warmup and excluded from aggregates.
inline constexpr double kWarmupFraction = 0.1;

struct SeriesSample {
  double time = 0.0;
  double response_time = 0.0;  // NaN when no request completed in the window
  double cpu_utilization = 0.0;
  double http_busy = 0.0;
  double download_busy = 0.0;
  double extract_busy = 0.0;
  double simsearch_busy = 0.0;
};

struct MetricsReport {
  double response_time_mean = 0.0;
  double response_time_std = 0.0;
  int response_time_samples = 0;  // measurements collected (one per interval,
                                  // full run); aggregates use post-warmup data
  std::array<double, kTaskCount> task_mean{};
  double http_busy = 0.0;
  double download_busy = 0.0;
  double extract_busy = 0.0;
  double simsearch_busy = 0.0;
  double cpu_utilization = 0.0;
  double gpu_mem_gb = 0.0;
  long completed_requests = 0;
  double throughput = 0.0;  // completions per second after warmup
  std::vector<SeriesSample> series;

  std::map<std::string, double> to_map() const;
};

/// Closed-loop event simulation of the identification engine: `clients`
/// users each hold at most one request in flight and reissue immediately on
/// completion. CPU tasks share cpu_cores via processor sharing; concurrent
/// GPU inferences each slow down by gpu_efficiency per extra neighbour.
MetricsReport simulate(const PoolConfig& pools, const SimParams& params);

struct CalibrationTarget {
  PoolConfig pools;
  int clients = 0;
  double response_time = 0.0;
};

struct CalibrationResult {
  SimParams params;
  std::vector<double> residuals;  // relative error per target
  bool converged = false;
  int evaluations = 0;
};

struct CalibrationOptions {
  SimParams start;          // starting point; duration here is the fit horizon
  int max_sweeps = 40;
  double tolerance = 1e-4;  // stop when the summed squared residual gain stalls
};

/// Coordinate-descent fit of the base service times and the GPU efficiency
/// against measured response times. Multiplicative steps keep every time
/// strictly positive. Returns best-found parameters and per-target residuals.
CalibrationResult calibrate(const std::vector<CalibrationTarget>& targets,
                            const CalibrationOptions& options);
CalibrationResult calibrate(const std::vector<CalibrationTarget>& targets);

Json sim_params_to_json(const SimParams& params);
SimParams sim_params_from_json(const Json& node, const std::string& where);

std::string series_to_csv(const MetricsReport& report);

}  // namespace contune
