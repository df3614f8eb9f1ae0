#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tiprel/metrics.hpp"
#include "tiprel/potentials.hpp"

namespace tiprel {

/// Reads the processed Cleveland heart-disease file: 14 comma-separated
/// columns (13 features, then the 0-4 diagnosis), "?" for missing entries.
/// Rows with a missing entry are dropped, the diagnosis is binarized
/// (> 0 becomes 1) and the prior of heart_prior_variances(13) is attached.
LogisticModel load_heart_csv(const std::string& path);
LogisticModel parse_heart_csv(std::istream& in);

/// Centers each feature column and scales it to unit (population) standard
/// deviation. Labels and prior are untouched. Throws InvalidInput on a
/// constant column.
LogisticModel standardize_features(LogisticModel m);

/// sigma_j^2 spaced linearly from 0.1 (j = 1) to 10 (j = d); {0.1} for d = 1.
Vector heart_prior_variances(std::size_t d);

/// CSV with header `chain,step,dim_0,...,dim_{d-1}`; the step column is
/// omitted when the set has no step annotations and the chain column holds
/// the row index when it has no chain annotations.
void write_samples(const SampleSet& s, std::ostream& out);
void save_samples(const SampleSet& s, const std::string& path);
SampleSet read_samples(std::istream& in);
SampleSet load_samples(const std::string& path);

/// Plain numeric CSV, one matrix row per line, no header.
void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

struct SyntheticLogistic {
  LogisticModel model;
  Vector beta_star;
};

/// Features i.i.d. N(0, 1), beta* ~ N(0, I), labels ~ Bernoulli(sigmoid(beta*^T x)),
/// prior from heart_prior_variances(d).
SyntheticLogistic make_synthetic_logistic(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace tiprel
