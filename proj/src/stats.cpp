#include "abq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abq {

Estimate summarize(std::span<const double> samples) {
  Estimate out;
  out.n = samples.size();
  if (samples.empty()) return out;
  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double v : samples) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

BatchMeans::BatchMeans(Eigen::Index dim, size_t batch_length)
    : batch_length_(batch_length), running_(Eigen::VectorXd::Zero(dim)) {
  if (batch_length == 0) throw std::invalid_argument("batch length must be positive");
}

void BatchMeans::add(const Eigen::VectorXd& value) {
  running_ += value;
  if (++in_batch_ == batch_length_) {
    batches_.push_back(running_ / static_cast<double>(batch_length_));
    running_.setZero();
    in_batch_ = 0;
  }
}

Eigen::VectorXd BatchMeans::mean() const {
  if (batches_.empty()) throw std::logic_error("no completed batch");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(running_.size());
  for (const auto& b : batches_) sum += b;
  return sum / static_cast<double>(batches_.size());
}

Eigen::VectorXd BatchMeans::standard_error() const {
  if (batches_.size() < 2) throw std::logic_error("need at least two batches");
  const Eigen::VectorXd m = mean();
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(m.size());
  for (const auto& b : batches_) ss += (b - m).cwiseAbs2();
  const double k = static_cast<double>(batches_.size());
  return (ss / (k - 1.0)).cwiseSqrt() / std::sqrt(k);
}

}  // namespace abq
