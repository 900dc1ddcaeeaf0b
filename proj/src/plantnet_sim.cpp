#include "contune/plantnet_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>

#include "contune/error.hpp"
#include "contune/rng.hpp"

namespace contune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kTaskNames[kTaskCount] = {
    "pre_process", "wait_download", "download",  "wait_extract",  "extract",
    "process",     "wait_simsearch", "simsearch", "post_process"};

/// Stages a request moves through, in order. Wait stages hold a queue slot,
/// service stages hold a token and usually a processor.
enum class Stage {
  kWaitHttp,
  kPre,
  kWaitDownload,
  kDownload,
  kWaitExtract,
  kExtract,
  kProcess,
  kWaitSimsearch,
  kSimsearch,
  kPost
};

struct Request {
  int client = 0;
  double issue_time = 0.0;
  double stage_enter = 0.0;
  Stage stage = Stage::kWaitHttp;
  std::array<double, kTaskCount> task_time{};
};

class TokenPool {
 public:
  TokenPool(const char* name, int size) : name_(name), size_(size) {
    if (size < 1) throw Error(std::string("pool '") + name + "' must have size >= 1");
  }

  bool try_acquire() {
    if (in_use_ >= size_) return false;
    ++in_use_;
    return true;
  }

  void release() {
    if (in_use_ <= 0) throw Error(std::string("pool '") + name_ + "' released below zero");
    --in_use_;
  }

  int in_use() const { return in_use_; }
  int size() const { return size_; }
  double busy_fraction() const { return static_cast<double>(in_use_) / size_; }

  std::deque<int> waiting;

 private:
  const char* name_;
  int size_;
  int in_use_ = 0;
};

/// A set of tasks progressing at one shared, state-dependent rate (processor
/// sharing on the CPU; efficiency-scaled concurrency on the GPU). Because all
/// members advance at the same speed, a task entering with `work` units of
/// service completes when the pool's virtual clock reaches entry + work, so
/// completion order is a plain heap property; rate changes only rescale how
/// fast the clock runs.
class SharedPool {
 public:
  struct Entry {
    double vdone = 0.0;
    std::uint64_t seq = 0;
    int request = -1;
    double weight = 0.0;
    bool operator>(const Entry& o) const {
      return vdone != o.vdone ? vdone > o.vdone : seq > o.seq;
    }
  };

  void advance(double t) {
    if (!heap_.empty()) vclock_ += rate_ * (t - t_last_);
    t_last_ = t;
  }

  /// Adds a task; the caller must call update_rate afterwards.
  void add(double t, double work, double weight, int request) {
    advance(t);
    heap_.push(Entry{vclock_ + work, seq_++, request, weight});
    weight_sum_ += weight;
  }

  /// Pops the earliest-finishing task; the caller must call update_rate.
  Entry pop(double t) {
    advance(t);
    Entry top = heap_.top();
    heap_.pop();
    weight_sum_ -= top.weight;
    if (heap_.empty()) weight_sum_ = 0.0;  // clear accumulated rounding
    return top;
  }

  void update_rate(double rate) { rate_ = rate; }

  double next_time() const {
    if (heap_.empty()) return kInf;
    return t_last_ + std::max(0.0, heap_.top().vdone - vclock_) / rate_;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t count() const { return heap_.size(); }
  double weight_sum() const { return weight_sum_; }

 private:
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  double vclock_ = 0.0;
  double t_last_ = 0.0;
  double rate_ = 1.0;
  double weight_sum_ = 0.0;
  std::uint64_t seq_ = 0;
};

struct TimerEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  int request = -1;
  bool operator>(const TimerEvent& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

class Engine {
 public:
  Engine(const PoolConfig& pools, const SimParams& params)
      : params_(params),
        http_("http", pools.http),
        download_("download", pools.download),
        extract_("extract", pools.extract),
        simsearch_("simsearch", pools.simsearch),
        rng_(params.seed),
        gpu_pool_size_(pools.extract) {
    if (params.clients < 1) throw Error("simulate: clients must be >= 1");
    if (params.cpu_cores < 1) throw Error("simulate: cpu_cores must be >= 1");
    if (params.duration <= 0.0) throw Error("simulate: duration must be > 0");
    if (params.sample_interval <= 0.0) throw Error("simulate: sample_interval must be > 0");
    if (!(params.gpu_efficiency > 0.0 && params.gpu_efficiency <= 1.0))
      throw Error("simulate: gpu_efficiency must be in (0, 1]");
    check_time("pre_process", params.service.pre_process);
    check_time("download", params.service.download);
    check_time("extract", params.service.extract);
    check_time("process", params.service.process);
    check_time("simsearch", params.service.simsearch);
    check_time("post_process", params.service.post_process);
    if (params.jitter_cv < 0.0) throw Error("simulate: jitter_cv must be >= 0");
    if (params.jitter_cv > 0.0) {
      jitter_sigma_ = std::sqrt(std::log1p(params.jitter_cv * params.jitter_cv));
      jitter_mu_ = -0.5 * jitter_sigma_ * jitter_sigma_;
    }
    warmup_ = kWarmupFraction * params.duration;
  }

  MetricsReport run() {
    const double t_end = params_.duration;
    const long n_samples = static_cast<long>(std::floor(t_end / params_.sample_interval + 1e-9));
    requests_.reserve(1024);
    for (int c = 0; c < params_.clients; ++c) issue(c);

    long sample_index = 0;
    double warmup_boundary = warmup_ > 0.0 ? warmup_ : kInf;
    for (;;) {
      const double tc = next_completion_time();
      const double ts =
          sample_index < n_samples ? (sample_index + 1) * params_.sample_interval : kInf;
      const double t = std::min({tc, ts, warmup_boundary, t_end});
      if (tc <= t) {
        handle_completion();
        continue;
      }
      if (warmup_boundary <= t) {
        advance_time(warmup_boundary);
        warmup_boundary = kInf;
        continue;
      }
      if (ts <= t) {
        advance_time(ts);
        emit_sample(ts);
        ++sample_index;
        continue;
      }
      advance_time(t_end);
      break;
    }
    return finish();
  }

 private:
  static void check_time(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(std::string("simulate: service time '") + name + "' must be > 0");
  }

  double jittered(double base) {
    if (params_.jitter_cv <= 0.0) return base;
    return base * std::exp(jitter_mu_ + jitter_sigma_ * rng_.normal());
  }

  double cpu_rate() const {
    const double load = cpu_.weight_sum();
    if (load <= params_.cpu_cores) return 1.0;
    return params_.cpu_cores / load;
  }

  double gpu_rate() const {
    if (gpu_.empty()) return 1.0;
    return std::pow(params_.gpu_efficiency, static_cast<double>(gpu_.count()) - 1.0);
  }

  double next_completion_time() const {
    double t = timers_.empty() ? kInf : timers_.top().time;
    t = std::min(t, gpu_.next_time());
    t = std::min(t, cpu_.next_time());
    return t;
  }

  /// Accumulates time-weighted metrics up to t and moves the clock. The
  /// clock never moves backwards; sub-epsilon regressions from float
  /// rounding in pool completion times are ignored.
  void advance_time(double t) {
    const double dt = t - now_;
    if (dt <= 0.0) return;
    {
      const double util =
          std::min(cpu_.weight_sum(), static_cast<double>(params_.cpu_cores)) /
          params_.cpu_cores;
      window_.util += dt * util;
      window_.busy[0] += dt * http_.busy_fraction();
      window_.busy[1] += dt * download_.busy_fraction();
      window_.busy[2] += dt * extract_.busy_fraction();
      window_.busy[3] += dt * simsearch_.busy_fraction();
      if (now_ >= warmup_) {
        agg_.util += dt * util;
        agg_.busy[0] += dt * http_.busy_fraction();
        agg_.busy[1] += dt * download_.busy_fraction();
        agg_.busy[2] += dt * extract_.busy_fraction();
        agg_.busy[3] += dt * simsearch_.busy_fraction();
        agg_time_ += dt;
      }
    }
    now_ = t;
  }

  void handle_completion() {
    const double td = timers_.empty() ? kInf : timers_.top().time;
    const double tg = gpu_.next_time();
    const double tc = cpu_.next_time();
    if (td <= tg && td <= tc) {
      advance_time(td);
      const int r = timers_.top().request;
      timers_.pop();
      service_done(r);
    } else if (tg <= tc) {
      advance_time(tg);
      const int r = gpu_.pop(now_).request;
      gpu_.update_rate(gpu_rate());
      service_done(r);
    } else {
      advance_time(tc);
      const int r = cpu_.pop(now_).request;
      cpu_.update_rate(cpu_rate());
      service_done(r);
    }
  }

  void issue(int client) {
    requests_.push_back(Request{client, now_, now_, Stage::kWaitHttp, {}});
    const int r = static_cast<int>(requests_.size()) - 1;
    if (http_.try_acquire()) {
      begin_service(r, Stage::kPre);
    } else {
      http_.waiting.push_back(r);
    }
  }

  /// Starts the service stage for request r at the current time. The wait
  /// metric of the preceding wait stage, when there is one, is recorded here.
  void begin_service(int r, Stage stage) {
    Request& req = requests_[static_cast<std::size_t>(r)];
    switch (stage) {
      case Stage::kWaitDownload:
      case Stage::kWaitExtract:
      case Stage::kWaitSimsearch:
      case Stage::kWaitHttp:
        throw Error("begin_service: wait stage");
      case Stage::kDownload:
        req.task_time[kWaitDownload] = now_ - req.stage_enter;
        break;
      case Stage::kExtract:
        req.task_time[kWaitExtract] = now_ - req.stage_enter;
        break;
      case Stage::kSimsearch:
        req.task_time[kWaitSimsearch] = now_ - req.stage_enter;
        break;
      default:
        break;
    }
    req.stage = stage;
    req.stage_enter = now_;
    double base = 0.0;
    double weight = 0.0;
    switch (stage) {
      case Stage::kPre:
        base = params_.service.pre_process;
        weight = params_.cpu_weight.pre_process;
        break;
      case Stage::kDownload:
        base = params_.service.download;
        weight = params_.cpu_weight.download;
        break;
      case Stage::kExtract:
        base = params_.service.extract;
        weight = params_.cpu_weight.extract;
        break;
      case Stage::kProcess:
        base = params_.service.process;
        weight = params_.cpu_weight.process;
        break;
      case Stage::kSimsearch:
        base = params_.service.simsearch;
        weight = params_.cpu_weight.simsearch;
        break;
      case Stage::kPost:
        base = params_.service.post_process;
        weight = params_.cpu_weight.post_process;
        break;
      default:
        break;
    }
    const double work = jittered(base);
    if (stage == Stage::kExtract) {
      gpu_.add(now_, work, 1.0, r);
      gpu_.update_rate(gpu_rate());
    } else if (weight > 0.0) {
      cpu_.add(now_, work, weight, r);
      cpu_.update_rate(cpu_rate());
    } else {
      timers_.push(TimerEvent{now_ + work, timer_seq_++, r});
    }
  }

  void enter_wait(int r, Stage wait_stage, TokenPool& pool, Stage service_stage) {
    Request& req = requests_[static_cast<std::size_t>(r)];
    req.stage = wait_stage;
    req.stage_enter = now_;
    if (pool.try_acquire()) {
      begin_service(r, service_stage);
    } else {
      pool.waiting.push_back(r);
    }
  }

  void release_and_grant(TokenPool& pool, Stage service_stage) {
    pool.release();
    if (!pool.waiting.empty() && pool.try_acquire()) {
      const int next = pool.waiting.front();
      pool.waiting.pop_front();
      begin_service(next, service_stage);
    }
  }

  void service_done(int r) {
    Request& req = requests_[static_cast<std::size_t>(r)];
    const double elapsed = now_ - req.stage_enter;
    switch (req.stage) {
      case Stage::kPre:
        req.task_time[kPreProcess] = elapsed;
        enter_wait(r, Stage::kWaitDownload, download_, Stage::kDownload);
        break;
      case Stage::kDownload:
        req.task_time[kDownload] = elapsed;
        release_and_grant(download_, Stage::kDownload);
        enter_wait(r, Stage::kWaitExtract, extract_, Stage::kExtract);
        break;
      case Stage::kExtract:
        req.task_time[kExtract] = elapsed;
        release_and_grant(extract_, Stage::kExtract);
        begin_service(r, Stage::kProcess);
        break;
      case Stage::kProcess:
        req.task_time[kProcess] = elapsed;
        enter_wait(r, Stage::kWaitSimsearch, simsearch_, Stage::kSimsearch);
        break;
      case Stage::kSimsearch:
        req.task_time[kSimsearch] = elapsed;
        release_and_grant(simsearch_, Stage::kSimsearch);
        begin_service(r, Stage::kPost);
        break;
      case Stage::kPost: {
        req.task_time[kPostProcess] = elapsed;
        const int client = req.client;
        complete(r);
        // Token releases can start another waiter's pre-process, and the
        // closed-loop client reissues immediately.
        release_and_grant(http_, Stage::kPre);
        issue(client);
        break;
      }
      default:
        throw Error("service_done: request was not in a service stage");
    }
  }

  void complete(int r) {
    const Request& req = requests_[static_cast<std::size_t>(r)];
    const double response = now_ - req.issue_time;
    window_.resp_sum += response;
    window_.resp_count += 1;
    if (now_ > warmup_) {
      agg_resp_sum_ += response;
      agg_resp_count_ += 1;
      for (int t = 0; t < kTaskCount; ++t)
        agg_task_sum_[static_cast<std::size_t>(t)] += req.task_time[static_cast<std::size_t>(t)];
    }
  }

  void emit_sample(double t) {
    SeriesSample s;
    s.time = t;
    const double dt = params_.sample_interval;
    s.response_time = window_.resp_count > 0
                          ? window_.resp_sum / window_.resp_count
                          : std::numeric_limits<double>::quiet_NaN();
    s.cpu_utilization = window_.util / dt;
    s.http_busy = window_.busy[0] / dt;
    s.download_busy = window_.busy[1] / dt;
    s.extract_busy = window_.busy[2] / dt;
    s.simsearch_busy = window_.busy[3] / dt;
    series_.push_back(s);
    window_ = Window{};
  }

  MetricsReport finish() {
    MetricsReport report;
    report.series = std::move(series_);
    report.response_time_samples = static_cast<int>(report.series.size());
    report.completed_requests = agg_resp_count_;
    const double span = params_.duration - warmup_;
    report.throughput = span > 0.0 ? agg_resp_count_ / span : 0.0;
    if (agg_resp_count_ > 0) {
      report.response_time_mean = agg_resp_sum_ / agg_resp_count_;
      for (int t = 0; t < kTaskCount; ++t)
        report.task_mean[static_cast<std::size_t>(t)] =
            agg_task_sum_[static_cast<std::size_t>(t)] / agg_resp_count_;
    }
    // Spread of the periodic measurements, post-warmup windows only.
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (const SeriesSample& s : report.series) {
      if (s.time <= warmup_ || std::isnan(s.response_time)) continue;
      sum += s.response_time;
      sum_sq += s.response_time * s.response_time;
      ++n;
    }
    if (n > 1) {
      const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
      report.response_time_std = std::sqrt(var);
    }
    if (agg_time_ > 0.0) {
      report.cpu_utilization = agg_.util / agg_time_;
      report.http_busy = agg_.busy[0] / agg_time_;
      report.download_busy = agg_.busy[1] / agg_time_;
      report.extract_busy = agg_.busy[2] / agg_time_;
      report.simsearch_busy = agg_.busy[3] / agg_time_;
    }
    report.gpu_mem_gb = params_.gpu_mem_base + params_.gpu_mem_per_thread * gpu_pool_size_;
    return report;
  }

  struct Window {
    double resp_sum = 0.0;
    long resp_count = 0;
    double util = 0.0;
    std::array<double, 4> busy{};
  };

  SimParams params_;
  TokenPool http_;
  TokenPool download_;
  TokenPool extract_;
  TokenPool simsearch_;
  SharedPool cpu_;
  SharedPool gpu_;
  std::priority_queue<TimerEvent, std::vector<TimerEvent>, std::greater<TimerEvent>> timers_;
  std::vector<Request> requests_;
  Rng rng_;
  std::uint64_t timer_seq_ = 0;
  double now_ = 0.0;
  double warmup_ = 0.0;
  double jitter_mu_ = 0.0;
  double jitter_sigma_ = 0.0;
  int gpu_pool_size_ = 1;

  Window window_;
  struct Aggregate {
    double util = 0.0;
    std::array<double, 4> busy{};
  } agg_;
  double agg_time_ = 0.0;
  double agg_resp_sum_ = 0.0;
  long agg_resp_count_ = 0;
  std::array<double, kTaskCount> agg_task_sum_{};
  std::vector<SeriesSample> series_;
};

}  // namespace

const char* task_name(int task) { return kTaskNames[task]; }

std::map<std::string, double> MetricsReport::to_map() const {
  std::map<std::string, double> m;
  m["response_time_mean"] = response_time_mean;
  m["response_time_std"] = response_time_std;
  m["response_time_samples"] = static_cast<double>(response_time_samples);
  m["throughput"] = throughput;
  m["completed_requests"] = static_cast<double>(completed_requests);
  for (int t = 0; t < kTaskCount; ++t)
    m[std::string(kTaskNames[t]) + "_mean"] = task_mean[static_cast<std::size_t>(t)];
  m["http_busy_fraction"] = http_busy;
  m["download_busy_fraction"] = download_busy;
  m["extract_busy_fraction"] = extract_busy;
  m["simsearch_busy_fraction"] = simsearch_busy;
  m["cpu_utilization"] = cpu_utilization;
  m["gpu_mem_gb"] = gpu_mem_gb;
  return m;
}

MetricsReport simulate(const PoolConfig& pools, const SimParams& params) {
  Engine engine(pools, params);
  return engine.run();
}

namespace {

struct CalibrationVector {
  // Order matters: download first, then the CPU-side times, then the GPU
  // knobs; the descent tries coordinates in this order each sweep.
  std::array<double, 7> v{};

  static CalibrationVector from(const SimParams& p) {
    return {{p.service.download, p.service.pre_process, p.service.process,
             p.service.simsearch, p.service.post_process, p.service.extract,
             p.gpu_efficiency}};
  }

  void apply(SimParams& p) const {
    p.service.download = v[0];
    p.service.pre_process = v[1];
    p.service.process = v[2];
    p.service.simsearch = v[3];
    p.service.post_process = v[4];
    p.service.extract = v[5];
    p.gpu_efficiency = v[6];
  }

  static double clampv(std::size_t i, double x) {
    if (i == 6) return std::clamp(x, 0.5, 1.0);
    return std::clamp(x, 1e-4, 30.0);
  }
};

}  // namespace

CalibrationResult calibrate(const std::vector<CalibrationTarget>& targets,
                            const CalibrationOptions& options) {
  if (targets.empty()) throw Error("calibrate: no targets given");
  for (const CalibrationTarget& t : targets)
    if (!(t.response_time > 0.0)) throw Error("calibrate: target response time must be > 0");

  CalibrationResult result;
  result.params = options.start;

  auto residuals_at = [&](const SimParams& params) {
    std::vector<double> res;
    res.reserve(targets.size());
    for (const CalibrationTarget& t : targets) {
      SimParams p = params;
      p.clients = t.clients;
      const MetricsReport rep = simulate(t.pools, p);
      ++result.evaluations;
      res.push_back((rep.response_time_mean - t.response_time) / t.response_time);
    }
    return res;
  };
  auto loss_of = [](const std::vector<double>& res) {
    double s = 0.0;
    for (double r : res) s += r * r;
    return s;
  };

  CalibrationVector theta = CalibrationVector::from(result.params);
  std::vector<double> best_res = residuals_at(result.params);
  double best_loss = loss_of(best_res);
  double step = 0.25;

  for (int sweep = 0; sweep < options.max_sweeps && best_loss > options.tolerance; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < theta.v.size(); ++i) {
      for (double factor : {1.0 + step, 1.0 / (1.0 + step)}) {
        CalibrationVector trial = theta;
        trial.v[i] = CalibrationVector::clampv(i, trial.v[i] * factor);
        if (trial.v[i] == theta.v[i]) continue;
        SimParams p = result.params;
        trial.apply(p);
        const std::vector<double> res = residuals_at(p);
        const double loss = loss_of(res);
        if (loss < best_loss) {
          best_loss = loss;
          best_res = res;
          theta = trial;
          theta.apply(result.params);
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if (step < 1e-3) break;
    }
  }

  result.residuals = best_res;
  result.converged = best_loss <= options.tolerance || step < 1e-3;
  return result;
}

CalibrationResult calibrate(const std::vector<CalibrationTarget>& targets) {
  CalibrationOptions options;
  options.start.jitter_cv = 0.0;  // fit on deterministic means
  options.start.seed = 0;
  return calibrate(targets, options);
}

Json sim_params_to_json(const SimParams& p) {
  Json doc;
  doc["cpu_cores"] = p.cpu_cores;
  doc["clients"] = p.clients;
  doc["duration"] = p.duration;
  doc["sample_interval"] = p.sample_interval;
  doc["service"] = {{"pre_process", p.service.pre_process},
                    {"download", p.service.download},
                    {"extract", p.service.extract},
                    {"process", p.service.process},
                    {"simsearch", p.service.simsearch},
                    {"post_process", p.service.post_process}};
  doc["cpu_weight"] = {{"pre_process", p.cpu_weight.pre_process},
                       {"download", p.cpu_weight.download},
                       {"extract", p.cpu_weight.extract},
                       {"process", p.cpu_weight.process},
                       {"simsearch", p.cpu_weight.simsearch},
                       {"post_process", p.cpu_weight.post_process}};
  doc["gpu_efficiency"] = p.gpu_efficiency;
  doc["gpu_mem_base"] = p.gpu_mem_base;
  doc["gpu_mem_per_thread"] = p.gpu_mem_per_thread;
  doc["jitter_cv"] = p.jitter_cv;
  return doc;
}

SimParams sim_params_from_json(const Json& node, const std::string& where) {
  expect_keys(node,
              {"cpu_cores", "clients", "duration", "sample_interval", "service", "cpu_weight",
               "gpu_efficiency", "gpu_mem_base", "gpu_mem_per_thread", "jitter_cv"},
              where);
  SimParams p;
  p.cpu_cores = static_cast<int>(get_integer(node, "cpu_cores", p.cpu_cores, where));
  p.clients = static_cast<int>(get_integer(node, "clients", p.clients, where));
  p.duration = get_number(node, "duration", p.duration, where);
  p.sample_interval = get_number(node, "sample_interval", p.sample_interval, where);
  if (node.contains("service")) {
    const Json& s = node.at("service");
    const std::string sw = where + "/service";
    expect_keys(s, {"pre_process", "download", "extract", "process", "simsearch", "post_process"},
                sw);
    p.service.pre_process = get_number(s, "pre_process", p.service.pre_process, sw);
    p.service.download = get_number(s, "download", p.service.download, sw);
    p.service.extract = get_number(s, "extract", p.service.extract, sw);
    p.service.process = get_number(s, "process", p.service.process, sw);
    p.service.simsearch = get_number(s, "simsearch", p.service.simsearch, sw);
    p.service.post_process = get_number(s, "post_process", p.service.post_process, sw);
  }
  if (node.contains("cpu_weight")) {
    const Json& w = node.at("cpu_weight");
    const std::string ww = where + "/cpu_weight";
    expect_keys(w, {"pre_process", "download", "extract", "process", "simsearch", "post_process"},
                ww);
    p.cpu_weight.pre_process = get_number(w, "pre_process", p.cpu_weight.pre_process, ww);
    p.cpu_weight.download = get_number(w, "download", p.cpu_weight.download, ww);
    p.cpu_weight.extract = get_number(w, "extract", p.cpu_weight.extract, ww);
    p.cpu_weight.process = get_number(w, "process", p.cpu_weight.process, ww);
    p.cpu_weight.simsearch = get_number(w, "simsearch", p.cpu_weight.simsearch, ww);
    p.cpu_weight.post_process = get_number(w, "post_process", p.cpu_weight.post_process, ww);
  }
  p.gpu_efficiency = get_number(node, "gpu_efficiency", p.gpu_efficiency, where);
  p.gpu_mem_base = get_number(node, "gpu_mem_base", p.gpu_mem_base, where);
  p.gpu_mem_per_thread = get_number(node, "gpu_mem_per_thread", p.gpu_mem_per_thread, where);
  p.jitter_cv = get_number(node, "jitter_cv", p.jitter_cv, where);
  return p;
}

std::string series_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "timestamp,metric,value\n";
  out.precision(17);
  for (const SeriesSample& s : report.series) {
    out << s.time << ",response_time," << s.response_time << "\n";
    out << s.time << ",cpu_utilization," << s.cpu_utilization << "\n";
    out << s.time << ",http_busy_fraction," << s.http_busy << "\n";
    out << s.time << ",download_busy_fraction," << s.download_busy << "\n";
    out << s.time << ",extract_busy_fraction," << s.extract_busy << "\n";
    out << s.time << ",simsearch_busy_fraction," << s.simsearch_busy << "\n";
  }
  return out.str();
}

}  // namespace contune
