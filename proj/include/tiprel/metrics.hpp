#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tiprel/linalg.hpp"
#include "tiprel/potentials.hpp"

namespace tiprel {

/// n x d samples. `chains` and `steps` are optional row annotations (empty
/// when not known); when present they have one entry per row.
struct SampleSet {
  RowMatrix samples;
  std::string label;
  std::vector<std::int64_t> chains;
  std::vector<std::int64_t> steps;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(samples.cols()); }
  /// Throws InvalidInput if empty, annotated inconsistently or non-finite.
  void validate() const;
};

SampleSet make_sample_set(RowMatrix samples, std::string label = {});

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct MetricRecord {
  std::int64_t step = 0;
  double time = 0.0;
  std::string metric;
  double value = kMissing;  // NaN is written as an empty field
};

class MetricsSeries {
 public:
  void add(std::int64_t step, double time, std::string metric, double value);
  const std::vector<MetricRecord>& records() const { return records_; }
  /// Values of one metric in insertion order.
  std::vector<MetricRecord> metric(const std::string& name) const;
  /// Last recorded value of `name`; nullopt if never recorded.
  std::optional<double> last(const std::string& name) const;

  void write_csv(std::ostream& out) const;
  void save(const std::string& path) const;
  static MetricsSeries read_csv(std::istream& in);
  static MetricsSeries load(const std::string& path);

 private:
  std::vector<MetricRecord> records_;
};

/// Sorted-coupling 1-D W2 between coordinate `coord` of a and b. With unequal
/// sizes both empirical quantile functions are evaluated at (i - 1/2)/m,
/// m = max(n_a, n_b).
double w2_marginal(const SampleSet& a, const SampleSet& b, std::size_t coord);
double w2_sorted(std::vector<double> x, std::vector<double> y);

struct MarginalW2 {
  std::vector<double> per_coord;
  double average = 0.0;
  double max = 0.0;
  double min = 0.0;
};

MarginalW2 w2_marginals(const SampleSet& a, const SampleSet& b);
double w2_marginal_avg(const SampleSet& a, const SampleSet& b);

/// Exact W2 between the empirical law of x and N(mean, sd^2).
double w2_to_normal(std::vector<double> x, double mean = 0.0, double sd = 1.0);
/// Per-coordinate exact W2 of a to N(0, 1).
MarginalW2 w2_marginals_to_std_normal(const SampleSet& a);

Vector sample_mean(const SampleSet& a);
/// |mean(a) - reference|^2
double mean_error(const SampleSet& a, const Vector& reference_mean);

using Observable = std::function<double(const Vector&)>;
/// x -> cos(g1 x1 + g2 x2)
Observable cosine_observable(double gamma1, double gamma2);
double observable_mean(const SampleSet& a, const Observable& f);
/// |mean_a(f) - reference|; cosine observables need d = 2.
double observable_error(const SampleSet& a, const Observable& f, double reference);

struct AcfResult {
  /// d x (max_lag + 1); NaN where a coordinate has no variance.
  Matrix per_coord;
  /// Mean over the non-degenerate coordinates at each lag.
  Vector average;
};

/// Autocorrelation of an ensemble trajectory. `snapshots[k]` holds the N x d
/// positions after k steps. Every snapshot is projected onto the eigenvectors
/// of the covariance of the last one and, per projected coordinate and lag l,
/// the Pearson correlation of the pairs (value at k, value at k + l) over all
/// chains and all k with k + l < snapshots.size() is reported.
AcfResult acf(const std::vector<RowMatrix>& snapshots, std::size_t max_lag);

/// Unbiased sample covariance. A ridge of 1e-8 * trace / d is added when the
/// estimate is not SPD.
SymMatrix estimate_covariance(const SampleSet& a);
/// Inverse of the sample mean of the Hessian. Throws NotSpd if that mean is
/// not SPD.
SymMatrix estimate_fisher_inverse(const SampleSet& a, const Potential& pot);

}  // namespace tiprel
