#include "tiprel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "tiprel/csv.hpp"
#include "tiprel/errors.hpp"

namespace tiprel {

void SampleSet::validate() const {
  if (samples.rows() == 0 || samples.cols() == 0) throw InvalidInput("empty sample set");
  if (!chains.empty() && chains.size() != size()) {
    throw InvalidInput("sample set: chain ids do not match row count");
  }
  if (!steps.empty() && steps.size() != size()) {
    throw InvalidInput("sample set: steps do not match row count");
  }
  if (!samples.allFinite()) throw InvalidInput("sample set contains non-finite entries");
}

SampleSet make_sample_set(RowMatrix samples, std::string label) {
  SampleSet s;
  s.samples = std::move(samples);
  s.label = std::move(label);
  return s;
}

void MetricsSeries::add(std::int64_t step, double time, std::string metric, double value) {
  records_.push_back({step, time, std::move(metric), value});
}

std::vector<MetricRecord> MetricsSeries::metric(const std::string& name) const {
  std::vector<MetricRecord> out;
  for (const auto& r : records_) {
    if (r.metric == name) out.push_back(r);
  }
  return out;
}

std::optional<double> MetricsSeries::last(const std::string& name) const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->metric == name) return it->value;
  }
  return std::nullopt;
}

void MetricsSeries::write_csv(std::ostream& out) const {
  out << "step,time,metric,value\n";
  for (const auto& r : records_) {
    out << r.step << ',' << csv::format(r.time) << ',' << r.metric << ',' << csv::format(r.value)
        << '\n';
  }
}

void MetricsSeries::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_csv(out);
  if (!out) throw Error("failed writing " + path);
}

MetricsSeries MetricsSeries::read_csv(std::istream& in) {
  std::string line;
  if (!csv::getline(in, line)) throw ParseError("metrics csv: empty input", 0);
  if (line != "step,time,metric,value") throw ParseError("metrics csv: bad header", 1);
  MetricsSeries s;
  std::size_t lineno = 1;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError("metrics csv: expected 4 fields", lineno);
    const double value = csv::trim(f[3]).empty() ? kMissing : csv::parse_double(f[3], lineno);
    s.add(csv::parse_int(f[0], lineno), csv::parse_double(f[1], lineno), std::string(f[2]), value);
  }
  return s;
}

MetricsSeries MetricsSeries::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_csv(in);
}

namespace {

std::vector<double> column(const SampleSet& a, std::size_t coord) {
  const auto& m = a.samples;
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(coord));
  }
  return out;
}

void check_pair(const SampleSet& a, const SampleSet& b) {
  if (a.size() == 0 || b.size() == 0) throw InvalidInput("w2: empty sample set");
  if (a.dim() != b.dim()) throw InvalidInput("w2: dimension mismatch");
}

}  // namespace

double w2_sorted(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw InvalidInput("w2: empty sample set");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double sum = 0.0;
  if (x.size() == y.size()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(x.size()));
  }
  // Empirical quantile F^{-1}(u) = x_(ceil(n u)); at u = (i + 1/2)/m that is
  // 0-based index ceil((2i + 1) n / 2m) - 1 = floor(((2i + 1) n - 1) / 2m).
  const std::size_t m = std::max(x.size(), y.size());
  auto quantile = [m](const std::vector<double>& v, std::size_t i) {
    return v[((2 * i + 1) * v.size() - 1) / (2 * m)];
  };
  for (std::size_t i = 0; i < m; ++i) {
    const double d = quantile(x, i) - quantile(y, i);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(m));
}

double w2_marginal(const SampleSet& a, const SampleSet& b, std::size_t coord) {
  check_pair(a, b);
  if (coord >= a.dim()) throw InvalidInput("w2: coordinate out of range");
  return w2_sorted(column(a, coord), column(b, coord));
}

namespace {

MarginalW2 summarize(std::vector<double> per) {
  MarginalW2 r;
  r.per_coord = std::move(per);
  double sum = 0.0;
  for (double v : r.per_coord) sum += v;
  r.average = sum / static_cast<double>(r.per_coord.size());
  r.max = *std::max_element(r.per_coord.begin(), r.per_coord.end());
  r.min = *std::min_element(r.per_coord.begin(), r.per_coord.end());
  return r;
}

}  // namespace

MarginalW2 w2_marginals(const SampleSet& a, const SampleSet& b) {
  check_pair(a, b);
  std::vector<double> per(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) per[j] = w2_marginal(a, b, j);
  return summarize(std::move(per));
}

double w2_marginal_avg(const SampleSet& a, const SampleSet& b) { return w2_marginals(a, b).average; }

double w2_to_normal(std::vector<double> x, double mean, double sd) {
  if (x.empty()) throw InvalidInput("w2: empty sample set");
  if (!(sd > 0.0)) throw InvalidInput("w2: sd must be positive");
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> normal;
  const std::size_t n = x.size();
  const double w = 1.0 / static_cast<double>(n);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  // On the k-th quantile interval [z_a, z_b] of the standard normal:
  //   int z dPhi = phi(z_a) - phi(z_b),  int z^2 dPhi = [Phi(z) - z phi(z)]_a^b.
  double phi_prev = 0.0;
  double zphi_prev = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double phi_next = 0.0;
    double zphi_next = 0.0;
    if (i + 1 < n) {
      const double z = boost::math::quantile(normal, static_cast<double>(i + 1) * w);
      phi_next = inv_sqrt_2pi * std::exp(-0.5 * z * z);
      zphi_next = z * phi_next;
    }
    const double iz = phi_prev - phi_next;
    const double iz2 = w - (zphi_next - zphi_prev);
    const double iq = mean * w + sd * iz;
    const double iq2 = mean * mean * w + 2.0 * mean * sd * iz + sd * sd * iz2;
    total += x[i] * x[i] * w - 2.0 * x[i] * iq + iq2;
    phi_prev = phi_next;
    zphi_prev = zphi_next;
  }
  return std::sqrt(std::max(total, 0.0));
}

MarginalW2 w2_marginals_to_std_normal(const SampleSet& a) {
  a.validate();
  std::vector<double> per(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) per[j] = w2_to_normal(column(a, j));
  return summarize(std::move(per));
}

Vector sample_mean(const SampleSet& a) {
  if (a.size() == 0) throw InvalidInput("sample_mean: empty sample set");
  return a.samples.colwise().mean().transpose();
}

double mean_error(const SampleSet& a, const Vector& reference_mean) {
  if (static_cast<std::size_t>(reference_mean.size()) != a.dim()) {
    throw InvalidInput("mean_error: dimension mismatch");
  }
  return (sample_mean(a) - reference_mean).squaredNorm();
}

Observable cosine_observable(double gamma1, double gamma2) {
  return [gamma1, gamma2](const Vector& x) {
    if (x.size() != 2) throw InvalidInput("cosine observable needs d = 2");
    return std::cos(gamma1 * x(0) + gamma2 * x(1));
  };
}

double observable_mean(const SampleSet& a, const Observable& f) {
  if (a.size() == 0) throw InvalidInput("observable_mean: empty sample set");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.samples.rows(); ++i) sum += f(a.samples.row(i).transpose());
  return sum / static_cast<double>(a.size());
}

double observable_error(const SampleSet& a, const Observable& f, double reference) {
  return std::abs(observable_mean(a, f) - reference);
}

AcfResult acf(const std::vector<RowMatrix>& snapshots, std::size_t max_lag) {
  if (snapshots.size() <= max_lag) {
    throw InvalidInput("acf: trajectory must be longer than max_lag");
  }
  const RowMatrix& last = snapshots.back();
  const auto n = last.rows();
  const auto d = last.cols();
  if (n < 2) throw InvalidInput("acf: need at least two chains");
  for (const auto& s : snapshots) {
    if (s.rows() != n || s.cols() != d) throw InvalidInput("acf: inconsistent snapshot shapes");
    if (!s.allFinite()) throw InvalidInput("acf: non-finite positions");
  }

  const Matrix basis = sym_eig(estimate_covariance(make_sample_set(last))).vectors;
  const auto steps = static_cast<Eigen::Index>(snapshots.size());
  // series[c](k, i): projected coordinate c of chain i after k steps.
  std::vector<Matrix> series(static_cast<std::size_t>(d), Matrix(steps, n));
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Matrix proj = snapshots[static_cast<std::size_t>(k)] * basis;
    for (Eigen::Index c = 0; c < d; ++c) series[static_cast<std::size_t>(c)].row(k) = proj.col(c).transpose();
  }

  AcfResult out;
  const auto lags = static_cast<Eigen::Index>(max_lag + 1);
  out.per_coord = Matrix::Constant(d, lags, kMissing);
  const auto cells = static_cast<std::int64_t>(d * lags);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    const Eigen::Index c = cell / lags;
    const Eigen::Index lag = cell % lags;
    const Matrix& s = series[static_cast<std::size_t>(c)];
    const auto rows = steps - lag;
    const auto x = s.topRows(rows).array();
    const auto y = s.bottomRows(rows).array();
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x - mx).square().sum();
    const double syy = (y - my).square().sum();
    const double sxy = ((x - mx) * (y - my)).sum();
    const double scale = static_cast<double>(x.size()) * 1e-24;
    if (!(sxx > scale * (x.square().mean() + 1e-300)) ||
        !(syy > scale * (y.square().mean() + 1e-300))) {
      continue;
    }
    out.per_coord(c, lag) = sxy / std::sqrt(sxx * syy);
  }

  out.average = Vector::Constant(lags, kMissing);
  for (Eigen::Index lag = 0; lag < lags; ++lag) {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double v = out.per_coord(c, lag);
      if (std::isnan(v)) continue;
      sum += v;
      ++count;
    }
    if (count > 0) out.average(lag) = sum / count;
  }
  return out;
}

SymMatrix estimate_covariance(const SampleSet& a) {
  if (a.size() < 2) throw InvalidInput("estimate_covariance: need at least two samples");
  if (!a.samples.allFinite()) throw InvalidInput("estimate_covariance: non-finite samples");
  const Matrix centered = a.samples.rowwise() - a.samples.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(a.size() - 1);
  SymMatrix s = SymMatrix::from_upper(cov);
  if (is_spd(sym_eig(s))) return s;
  const double tr = s.trace();
  const double ridge = tr > 0.0 ? 1e-8 * tr / static_cast<double>(a.dim()) : 1e-8;
  return s + SymMatrix::scaled_identity(a.dim(), ridge);
}

SymMatrix estimate_fisher_inverse(const SampleSet& a, const Potential& pot) {
  if (a.size() == 0) throw InvalidInput("estimate_fisher_inverse: empty sample set");
  if (a.dim() != pot.dim()) throw InvalidInput("estimate_fisher_inverse: dimension mismatch");
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(a.dim()), static_cast<Eigen::Index>(a.dim()));
  for (Eigen::Index i = 0; i < a.samples.rows(); ++i) {
    sum += pot.hessian(a.samples.row(i).transpose()).dense();
  }
  return spd_inverse(SymMatrix::from_upper(sum / static_cast<double>(a.size())));
}

}  // namespace tiprel
