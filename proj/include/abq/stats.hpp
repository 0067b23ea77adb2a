#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace abq {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
  size_t n = 0;
};

/// Mean and standard error of independent samples. se is 0 when n < 2.
Estimate summarize(std::span<const double> samples);

double median(std::vector<double> values);

/// Batch-means estimate for a vector-valued, autocorrelated stream: the
/// stream is cut into consecutive batches whose means are treated as
/// independent samples.
class BatchMeans {
 public:
  BatchMeans(Eigen::Index dim, size_t batch_length);

  void add(const Eigen::VectorXd& value);

  size_t completed_batches() const { return batches_.size(); }
  Eigen::VectorXd mean() const;
  Eigen::VectorXd standard_error() const;

 private:
  size_t batch_length_;
  size_t in_batch_ = 0;
  Eigen::VectorXd running_;
  std::vector<Eigen::VectorXd> batches_;
};

}  // namespace abq
