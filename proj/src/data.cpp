#include "tiprel/data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tiprel/csv.hpp"
#include "tiprel/errors.hpp"
#include "tiprel/rng.hpp"

namespace tiprel {

LogisticModel standardize_features(LogisticModel m) {
  const auto n = static_cast<double>(m.design.rows());
  for (Eigen::Index j = 0; j < m.design.cols(); ++j) {
    auto col = m.design.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (!(sd > 0.0)) throw InvalidInput("standardize_features: column " + std::to_string(j) + " is constant");
    col /= sd;
  }
  return m;
}

Vector heart_prior_variances(std::size_t d) {
  if (d == 0) throw InvalidInput("prior variances: d must be positive");
  Vector v(static_cast<Eigen::Index>(d));
  if (d == 1) {
    v(0) = 0.1;
    return v;
  }
  const double inc = 9.9 / static_cast<double>(d - 1);
  for (std::size_t j = 0; j < d; ++j) v(static_cast<Eigen::Index>(j)) = 0.1 + static_cast<double>(j) * inc;
  v(static_cast<Eigen::Index>(d - 1)) = 10.0;
  return v;
}

LogisticModel parse_heart_csv(std::istream& in) {
  constexpr std::size_t kCols = 14;
  std::vector<double> values;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (csv::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != kCols) {
      throw ParseError("heart csv: expected 14 columns, got " + std::to_string(fields.size()),
                       lineno);
    }
    bool missing = false;
    for (auto f : fields) missing = missing || csv::trim(f) == "?";
    if (missing) continue;
    for (std::size_t c = 0; c < kCols; ++c) values.push_back(csv::parse_double(fields[c], lineno));
    ++rows;
  }
  if (rows == 0) throw InvalidInput("heart csv: no complete rows");

  LogisticModel m;
  m.design.resize(static_cast<Eigen::Index>(rows), kCols - 1);
  m.labels.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c + 1 < kCols; ++c) {
      m.design(i, static_cast<Eigen::Index>(c)) = values[r * kCols + c];
    }
    m.labels(i) = values[r * kCols + kCols - 1] > 0.0 ? 1.0 : 0.0;
  }
  m.prior_vars = heart_prior_variances(kCols - 1);
  m.validate();
  return m;
}

LogisticModel load_heart_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_heart_csv(in);
}

void write_samples(const SampleSet& s, std::ostream& out) {
  s.validate();
  const bool with_steps = !s.steps.empty();
  out << "chain";
  if (with_steps) out << ",step";
  for (std::size_t j = 0; j < s.dim(); ++j) out << ",dim_" << j;
  out << '\n';
  for (std::size_t r = 0; r < s.size(); ++r) {
    out << (s.chains.empty() ? static_cast<std::int64_t>(r) : s.chains[r]);
    if (with_steps) out << ',' << s.steps[r];
    for (std::size_t j = 0; j < s.dim(); ++j) {
      out << ',' << csv::format(s.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

void save_samples(const SampleSet& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_samples(s, out);
  if (!out) throw Error("failed writing " + path);
}

SampleSet read_samples(std::istream& in) {
  std::string line;
  if (!csv::getline(in, line)) throw ParseError("samples csv: empty input", 0);
  const auto header = csv::split(line);
  if (header.empty() || header[0] != "chain") throw ParseError("samples csv: bad header", 1);
  const bool with_steps = header.size() > 1 && header[1] == "step";
  const std::size_t first = with_steps ? 2 : 1;
  if (header.size() <= first) throw ParseError("samples csv: no dimension columns", 1);
  for (std::size_t c = first; c < header.size(); ++c) {
    if (header[c] != "dim_" + std::to_string(c - first)) {
      throw ParseError("samples csv: bad header column '" + std::string(header[c]) + "'", 1);
    }
  }
  const std::size_t d = header.size() - first;

  SampleSet s;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      throw ParseError("samples csv: expected " + std::to_string(header.size()) + " fields", lineno);
    }
    s.chains.push_back(csv::parse_int(f[0], lineno));
    if (with_steps) s.steps.push_back(csv::parse_int(f[1], lineno));
    for (std::size_t c = first; c < f.size(); ++c) values.push_back(csv::parse_double(f[c], lineno));
  }
  if (s.chains.empty()) throw ParseError("samples csv: no rows", lineno);
  s.samples = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(s.chains.size()),
                                    static_cast<Eigen::Index>(d));
  return s;
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  SampleSet s = read_samples(in);
  s.label = path;
  return s;
}

void save_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path);
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto f : csv::split(line)) row.push_back(csv::parse_double(f, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("matrix csv: ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix csv: empty input", 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

SyntheticLogistic make_synthetic_logistic(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidInput("synthetic logistic: n and d must be positive");
  const CounterRng rng(seed);
  SyntheticLogistic out;
  out.beta_star.resize(static_cast<Eigen::Index>(d));
  rng.normals(Stream::dataset, 0, 0, {out.beta_star.data(), d});
  auto& m = out.model;
  m.design.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  m.labels.resize(static_cast<Eigen::Index>(n));
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    rng.normals(Stream::dataset, 1, i, row);
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < d; ++j) m.design(r, static_cast<Eigen::Index>(j)) = row[j];
    const double p = sigmoid(m.design.row(r).dot(out.beta_star.transpose()));
    m.labels(r) = rng.uniform(Stream::dataset, 2, i, 0) < p ? 1.0 : 0.0;
  }
  m.prior_vars = heart_prior_variances(d);
  return out;
}

}  // namespace tiprel
