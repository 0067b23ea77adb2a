#include "abq/harness.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#ifdef ABQ_HAVE_OPENMP
#include <omp.h>
#endif

#include "abq/csv.hpp"
#include "abq/envs/baird.hpp"
#include "abq/envs/two_state.hpp"
#include "abq/errors.hpp"
#include "abq/model_io.hpp"
#include "abq/sampling.hpp"

namespace abq {

namespace {

using nlohmann::json;
namespace mc = envs::mountain_car;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> number_or_list(const json& v, const char* key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array() && !v.empty()) {
    for (const json& item : v) out.push_back(item.get<double>());
  } else {
    throw ModelError(std::string("config \"") + key + "\" must be a number or a non-empty list");
  }
  return out;
}

template <typename T>
void read(const json& doc, const char* key, T& into) {
  if (auto it = doc.find(key); it != doc.end()) into = it->get<T>();
}

Variant variant_of(AgentKind agent) {
  switch (agent) {
    case AgentKind::Abq: return Variant::Abq;
    case AgentKind::AbTrace: return Variant::AbTrace;
    case AgentKind::Gq: return Variant::ConstantLambda;
    case AgentKind::TreeBackup: return Variant::TreeBackup;
  }
  return Variant::Abq;
}

// Everything a job reads but never writes.
struct Context {
  const ExperimentConfig& config;
  std::vector<SweepPoint> points;
  std::optional<EvaluationProblem> problem;       // finite tasks
  std::optional<mc::GroundTruth> truth;           // mountain car
  std::optional<PsiPivots> pivots;
  std::vector<std::unique_ptr<MspbeEvaluator>> mspbe;  // per point, MSPBE metric only
  VectorXd initial_weights;
};

class Curve {
 public:
  Curve(long n_points, double window, bool keep) : keep_(keep) {
    const long tail = std::max<long>(1, static_cast<long>(std::ceil(window * static_cast<double>(n_points))));
    window_start_ = n_points - std::min(tail, n_points) + 1;  // index 0 is the initial value
  }

  void add(double value) {
    if (index_ == 0) initial_ = value;
    if (index_ >= window_start_) {
      window_sum_ += value;
      ++window_count_;
    }
    max_ = std::max(max_, value);
    last_ = value;
    ++index_;
    if (keep_) series_.push_back(value);
  }

  void finish(RunResult& out) {
    out.initial = initial_;
    out.final = last_;
    out.max = max_;
    out.window_mean = window_count_ > 0 ? window_sum_ / static_cast<double>(window_count_) : kNaN;
    out.series = std::move(series_);
  }

 private:
  bool keep_;
  long window_start_ = 1;
  long index_ = 0;
  long window_count_ = 0;
  double window_sum_ = 0.0;
  double initial_ = kNaN, last_ = kNaN, max_ = -std::numeric_limits<double>::infinity();
  std::vector<double> series_;
};

RunResult run_job(const Context& ctx, size_t point_index, std::uint64_t seed) {
  const ExperimentConfig& cfg = ctx.config;
  const SweepPoint& point = ctx.points[point_index];
  RunResult out;
  out.point = point;
  out.seed = seed;

  Learner learner(cfg.agent, scheme_for(cfg.agent, point.param, ctx.pivots),
                  LearnerState::initial(ctx.initial_weights, Schedule::constant(point.alpha),
                                        Schedule::constant(point.beta)),
                  cfg.weighting);

  if (ctx.problem) {
    const EvaluationProblem& problem = *ctx.problem;
    auto metric = [&](const VectorXd& w) {
      if (cfg.metric == Metric::Mspbe) return (*ctx.mspbe[point_index])(w);
      return nmse(w, problem.x(), problem.q_pi(), problem.behavior_weights());
    };
    Curve curve(cfg.n_steps / cfg.record_every, cfg.window, cfg.keep_series);
    curve.add(metric(learner.weights()));
    FiniteSampler sampler(problem.task(), seed, problem.behavior_weights());
    try {
      for (long t = 1; t <= cfg.n_steps; ++t) {
        learner.observe(sampler.next());
        if (t % cfg.record_every == 0) curve.add(metric(learner.weights()));
      }
    } catch (const DivergenceError& e) {
      out.diverged_at = e.step();
    }
    curve.finish(out);
  } else {
    const mc::GroundTruth& truth = *ctx.truth;
    const VectorXd ones = VectorXd::Ones(truth.q.size());
    auto metric = [&](const VectorXd& w) { return nmse(w, truth.x, truth.q, ones); };
    Curve curve(cfg.n_episodes, cfg.window, cfg.keep_series);
    curve.add(metric(learner.weights()));
    mc::Sampler sampler(seed);
    try {
      while (sampler.episodes_completed() < cfg.n_episodes) {
        const Transition tr = sampler.next();
        learner.observe(tr);
        if (tr.terminal) curve.add(metric(learner.weights()));
      }
    } catch (const DivergenceError& e) {
      out.diverged_at = e.step();
    }
    curve.finish(out);
  }

  if (out.diverged_at)
    out.summary = kNaN;
  else
    out.summary = cfg.summary == SummaryKind::Final ? out.final : out.window_mean;
  return out;
}

Context make_context(const ExperimentConfig& config) {
  Context ctx{config, sweep_points(config), {}, {}, {}, {}, {}};
  if (config.task == "mountain_car") {
    if (config.agent == AgentKind::TreeBackup)
      throw ModelError("Tree Backup needs tabular features; mountain_car is tile coded");
    if (config.metric == Metric::Mspbe) throw ModelError("mountain_car has no MSPBE; use metric nmse");
    ctx.truth = mc::ground_truth_pairs(config.ground_truth_seed, config.ground_truth);
    ctx.pivots = mc::psi_pivots();
    ctx.initial_weights = VectorXd::Zero(mc::kFeatures);
    return ctx;
  }
  ctx.problem.emplace(make_finite_task(config));
  if (config.agent == AgentKind::TreeBackup && !ctx.problem->features().is_tabular())
    throw ModelError("Tree Backup needs tabular features; task \"" + config.task + "\" is not tabular");
  if (config.agent == AgentKind::Abq) ctx.pivots = psi_pivots(ctx.problem->behavior(), ctx.problem->target());
  ctx.initial_weights = ctx.problem->task().initial_weights;
  if (config.metric == Metric::Mspbe)
    for (const SweepPoint& p : ctx.points)
      ctx.mspbe.push_back(std::make_unique<MspbeEvaluator>(
          *ctx.problem, scheme_for(config.agent, p.param, ctx.pivots), config.projection));
  return ctx;
}

void check_config(const ExperimentConfig& c) {
  if (c.n_runs < 1) throw ModelError("n_runs must be at least 1");
  if (c.n_steps < 1 || c.n_episodes < 1) throw ModelError("n_steps and n_episodes must be positive");
  if (c.record_every < 1) throw ModelError("record_every must be positive");
  if (!(c.window > 0.0 && c.window <= 1.0)) throw ModelError("window must lie in (0, 1]");
  for (double p : c.params)
    if (!(p >= 0.0 && p <= 1.0)) throw ModelError("zeta/lambda sweep values must lie in [0, 1]");
  for (double a : c.alphas)
    if (!(a > 0.0)) throw ModelError("alpha values must be positive");
  for (double b : c.betas)
    if (!(b >= 0.0)) throw ModelError("beta values must be nonnegative");
}

}  // namespace

double nmse(const VectorXd& w, const MatrixXd& x, const VectorXd& q_ref, const VectorXd& weights) {
  if (x.cols() != w.size() || x.rows() != q_ref.size() || weights.size() != q_ref.size())
    throw ModelError("nmse: dimension mismatch");
  const double norm = weights.dot(q_ref.cwiseAbs2());
  if (!(norm > 0.0)) throw ModelError("nmse: reference values have zero norm");
  return weights.dot((x * w - q_ref).cwiseAbs2()) / norm;
}

static ExperimentConfig parse_config_doc(const json& doc) {
  ExperimentConfig c;
  read(doc, "task", c.task);
  read(doc, "model", c.model_path);
  if (c.task == "baird") {
    c.metric = Metric::Mspbe;
    c.summary = SummaryKind::Final;
    c.projection = Projection::PseudoInverse;
  }
  if (auto it = doc.find("random_mdp"); it != doc.end()) {
    read(*it, "seed", c.random_mdp.seed);
    read(*it, "n_states", c.random_mdp.n_states);
    read(*it, "n_actions", c.random_mdp.n_actions);
    read(*it, "n_features", c.random_mdp.n_features);
    read(*it, "discount", c.random_mdp.discount);
    read(*it, "tabular", c.random_mdp.tabular);
  }
  if (auto it = doc.find("ground_truth"); it != doc.end()) {
    read(*it, "seed", c.ground_truth_seed);
    read(*it, "behavior_steps", c.ground_truth.behavior_steps);
    read(*it, "n_pairs", c.ground_truth.n_pairs);
    read(*it, "n_rollouts", c.ground_truth.n_rollouts);
  }

  if (auto it = doc.find("agent"); it != doc.end()) c.agent = parse_agent(it->get<std::string>());
  if (auto it = doc.find("variant"); it != doc.end())
    if (parse_variant(it->get<std::string>()) != variant_of(c.agent))
      throw ModelError("config \"variant\" does not match the agent");
  const char* param_key = c.agent == AgentKind::Gq ? "lambda" : "zeta";
  if (auto it = doc.find(param_key); it != doc.end()) c.params = number_or_list(*it, param_key);
  if (auto it = doc.find("alpha"); it != doc.end()) c.alphas = number_or_list(*it, "alpha");
  if (auto it = doc.find("beta"); it != doc.end()) c.betas = number_or_list(*it, "beta");
  if (auto it = doc.find("weighting"); it != doc.end()) {
    const auto s = it->get<std::string>();
    if (s == "lambda")
      c.weighting = CorrectionWeighting::Lambda;
    else if (s == "nu")
      c.weighting = CorrectionWeighting::Nu;
    else
      throw ModelError("weighting must be \"lambda\" or \"nu\"");
  }

  read(doc, "n_runs", c.n_runs);
  read(doc, "n_steps", c.n_steps);
  read(doc, "n_episodes", c.n_episodes);
  read(doc, "record_every", c.record_every);
  read(doc, "seed", c.seed);
  read(doc, "window", c.window);
  read(doc, "keep_series", c.keep_series);
  if (auto it = doc.find("metric"); it != doc.end()) {
    const auto s = it->get<std::string>();
    if (s == "nmse")
      c.metric = Metric::Nmse;
    else if (s == "mspbe")
      c.metric = Metric::Mspbe;
    else
      throw ModelError("metric must be \"nmse\" or \"mspbe\"");
  }
  if (auto it = doc.find("summary"); it != doc.end()) {
    const auto s = it->get<std::string>();
    if (s == "window")
      c.summary = SummaryKind::WindowMean;
    else if (s == "final")
      c.summary = SummaryKind::Final;
    else
      throw ModelError("summary must be \"window\" or \"final\"");
  }
  if (auto it = doc.find("projection"); it != doc.end()) {
    const auto s = it->get<std::string>();
    if (s == "exact")
      c.projection = Projection::Exact;
    else if (s == "pinv")
      c.projection = Projection::PseudoInverse;
    else
      throw ModelError("projection must be \"exact\" or \"pinv\"");
  }
  check_config(c);
  return c;
}

ExperimentConfig parse_experiment(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("config must be a JSON object");
  try {
    return parse_config_doc(doc);
  } catch (const json::exception& e) {
    throw ModelError(std::string("config has a value of the wrong type: ") + e.what());
  }
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

FiniteTask make_finite_task(const ExperimentConfig& config) {
  if (config.task == "two_state") return envs::two_state();
  if (config.task == "baird") return envs::baird();
  if (config.task == "random_mdp") return envs::random_mdp(config.random_mdp).task;
  if (config.task == "file") return load_task(config.model_path);
  if (config.task == "mountain_car") throw ModelError("mountain_car is not a finite task");
  throw ModelError("unknown task \"" + config.task + "\"");
}

BootstrapScheme scheme_for(AgentKind agent, double param, const std::optional<PsiPivots>& pivots) {
  switch (agent) {
    case AgentKind::Abq:
      if (!pivots) throw ModelError("ABQ needs psi pivots");
      return BootstrapScheme::abq(param, *pivots);
    case AgentKind::AbTrace: return BootstrapScheme::ab_trace(param);
    case AgentKind::Gq: return BootstrapScheme::constant_lambda(param);
    case AgentKind::TreeBackup: return BootstrapScheme::tree_backup(param);
  }
  throw ModelError("unknown agent");
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config) {
  std::vector<SweepPoint> out;
  for (double p : config.params)
    for (double a : config.alphas)
      for (double b : config.betas) out.push_back({p, a, b});
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, Execution execution) {
  check_config(config);
  const Context ctx = make_context(config);
  const size_t n_runs = static_cast<size_t>(config.n_runs);
  const size_t n_jobs = ctx.points.size() * n_runs;

  ExperimentResult result;
  result.runs.resize(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  auto job = [&](size_t j) {
    try {
      result.runs[j] = run_job(ctx, j / n_runs, config.seed + j % n_runs);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  if (execution == Execution::Parallel) {
    const long n = static_cast<long>(n_jobs);
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < n; ++j) job(static_cast<size_t>(j));
  } else {
    for (size_t j = 0; j < n_jobs; ++j) job(j);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (size_t p = 0; p < ctx.points.size(); ++p) {
    SummaryRow row;
    row.point = ctx.points[p];
    row.run_count = config.n_runs;
    std::vector<double> kept;
    for (size_t r = 0; r < n_runs; ++r) {
      const RunResult& run = result.runs[p * n_runs + r];
      if (run.diverged_at)
        ++row.diverged;
      else
        kept.push_back(run.summary);
    }
    row.metric = summarize(kept);
    if (kept.empty()) row.metric.mean = row.metric.se = kNaN;
    result.summary.push_back(row);
  }
  return result;
}

std::string summary_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::string out = "task,agent,zeta_or_lambda,alpha,beta,run_count,diverged,metric_mean,metric_se\n";
  const std::string agent(to_string(config.agent));
  for (const SummaryRow& row : result.summary)
    append_csv_row(out, {config.task, agent, csv_number(row.point.param), csv_number(row.point.alpha),
                         csv_number(row.point.beta), std::to_string(row.run_count), std::to_string(row.diverged),
                         csv_number(row.metric.mean), csv_number(row.metric.se)});
  return out;
}

std::string series_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::string out = "task,agent,zeta_or_lambda,alpha,beta,seed,point,metric\n";
  const std::string agent(to_string(config.agent));
  for (const RunResult& run : result.runs) {
    const std::string prefix = config.task + ',' + agent + ',' + csv_number(run.point.param) + ',' +
                               csv_number(run.point.alpha) + ',' + csv_number(run.point.beta) + ',' +
                               std::to_string(run.seed);
    for (size_t i = 0; i < run.series.size(); ++i)
      append_csv_row(out, {prefix, std::to_string(i), csv_number(run.series[i])});
  }
  return out;
}

}  // namespace abq
