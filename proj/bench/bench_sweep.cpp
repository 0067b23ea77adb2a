// Times the serial reference against the OpenMP path on a learning sweep and
// on the random-MDP bias study, and checks that both produce the same bytes.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "abq/bias_study.hpp"
#include "abq/harness.hpp"

namespace {

template <typename F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);

  abq::ExperimentConfig sweep;
  sweep.task = "two_state";
  sweep.agent = abq::AgentKind::Abq;
  sweep.params = {0.0, 0.5, 1.0};
  sweep.alphas = {0.005, 0.01};
  sweep.betas = {0.001, 0.005};
  sweep.n_runs = 20;
  sweep.n_steps = 10'000;

  std::string serial_csv, parallel_csv;
  const double t_serial = seconds([&] {
    serial_csv = abq::summary_csv(sweep, abq::run_experiment(sweep, abq::Execution::Serial));
  });
  const double t_parallel = seconds([&] {
    parallel_csv = abq::summary_csv(sweep, abq::run_experiment(sweep, abq::Execution::Parallel));
  });
  std::printf("sweep   serial %.3fs  parallel %.3fs  speedup %.2fx  identical %s\n", t_serial, t_parallel,
              t_serial / t_parallel, serial_csv == parallel_csv ? "yes" : "NO");

  abq::BiasStudyConfig study;
  study.n_instances = 8;
  study.spec.seed = 100;
  std::string serial_bias, parallel_bias;
  const double b_serial = seconds([&] {
    serial_bias = abq::bias_study_csv(abq::bias_study(study, abq::Execution::Serial));
  });
  const double b_parallel = seconds([&] {
    parallel_bias = abq::bias_study_csv(abq::bias_study(study, abq::Execution::Parallel));
  });
  std::printf("bias    serial %.3fs  parallel %.3fs  speedup %.2fx  identical %s\n", b_serial, b_parallel,
              b_serial / b_parallel, serial_bias == parallel_bias ? "yes" : "NO");
  return serial_csv == parallel_csv && serial_bias == parallel_bias ? 0 : 1;
}
