#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tiprel {

/// Flat `key = value` text. '#' starts a comment; blank lines are ignored;
/// a repeated key keeps its last value.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);

/// Every knob of an experiment. Lists are comma-separated in text form.
struct ExperimentConfig {
  std::string potential = "rosenbrock";  // rosenbrock | logistic | quadratic
  double rosenbrock_a = 1.0;
  double rosenbrock_b = 100.0;
  std::string logistic_data = "synthetic";  // path to a processed Cleveland file, or "synthetic"
  std::int64_t logistic_n = 300;
  std::int64_t logistic_d = 13;
  std::int64_t logistic_data_seed = 1;
  bool logistic_standardize = false;
  /// d entries (diagonal) or d*d entries (row-major, symmetric).
  std::vector<double> quadratic_precision{1.0, 4.0};
  std::vector<double> quadratic_mean{0.0, 0.0};

  std::string precond = "constant";  // constant | covariance | fisher | curvature | interpolated
  std::string precond_c = "auto";    // number, or auto = 1 / (Lipschitz estimate)
  double precond_epsilon = 1e-3;
  bool precond_clamp = true;
  std::string precond_divergence = "auto";  // auto | analytic | fd
  std::string precond_global = "covariance";  // interpolated: covariance | fisher

  std::string init = "gaussian";  // dirac | gaussian | ground_truth
  std::vector<double> init_point{0.0};  // one value (broadcast) or d values
  std::vector<double> init_mean{0.0};
  double init_std = 1.0;

  std::string schedule = "constant";  // constant | decay
  double schedule_h = 1e-3;
  double schedule_h0 = 1e-2;
  double schedule_gamma = 1.0;

  std::int64_t steps = 1000;
  std::int64_t chains = 1000;
  std::int64_t seed = 0;

  std::string ground_truth = "auto";  // auto | ancestral | exact | mala | file | none
  std::int64_t ground_truth_n = 20000;
  std::string ground_truth_path;

  std::int64_t mala_iters = 2000;
  std::int64_t mala_chains = 1000;
  double mala_target_accept = 0.5;
  std::string mala_init = "laplace";  // laplace | gaussian | dirac
  double mala_h_init = 1e-2;

  std::vector<std::string> metrics{"w2", "mean_error", "diverged"};
  std::string record = "geometric";  // geometric | every | endpoints
  double record_ratio = 1.3;
  std::int64_t record_stride = 1;

  std::vector<double> sweep_h{1e-4, 1e-3, 6e-3, 3e-2, 1e-1};
  std::vector<std::string> sweep_preconds{"constant", "curvature", "interpolated"};
  std::string sweep_metric = "w2_avg";

  std::int64_t acf_max_lag = 100;
  std::vector<std::string> acf_preconds{"constant", "covariance"};

  std::string out = "out";

  /// Applies `kv` on top of the current values. Unknown keys and
  /// unparsable values throw UsageError naming the key.
  void apply(const KeyValues& kv);
  /// Range/enum checks; throws UsageError naming the field. Resolves
  /// ground_truth = auto. A zero step size is only meaningful for frozen
  /// autocorrelation runs.
  void validate(bool allow_zero_step = false);
  /// All keys with their current values, one `key = value` per line, sorted.
  std::string to_text() const;

  static std::vector<std::string> keys();
};

}  // namespace tiprel
