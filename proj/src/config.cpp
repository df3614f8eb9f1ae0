#include "tiprel/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tiprel/csv.hpp"
#include "tiprel/errors.hpp"

namespace tiprel {

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (csv::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("config: expected 'key = value'", lineno);
    const auto key = csv::trim(body.substr(0, eq));
    if (key.empty()) throw ParseError("config: empty key", lineno);
    kv[std::string(key)] = std::string(csv::trim(body.substr(eq + 1)));
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  return parse_key_values(in);
}

namespace {

using Cfg = ExperimentConfig;

struct Field {
  std::function<void(Cfg&, const std::string&)> set;
  std::function<std::string(const Cfg&)> get;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    return csv::parse_double(v, 0);
  } catch (const ParseError&) {
    throw UsageError(key + ": expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    return csv::parse_int(v, 0);
  } catch (const ParseError&) {
    // Accept integral values written in floating-point notation (1e4).
    const double d = to_double(key, v);
    if (std::floor(d) != d || std::abs(d) > 9.0e15) {
      throw UsageError(key + ": expected an integer, got '" + v + "'");
    }
    return static_cast<std::int64_t>(d);
  }
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  if (csv::trim(v).empty()) return out;
  for (auto f : csv::split(v)) out.emplace_back(csv::trim(f));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

Field real(double Cfg::*m) {
  return {nullptr, [m](const Cfg& c) { return csv::format(c.*m); }};
}

Field integer(std::int64_t Cfg::*m) {
  return {nullptr, [m](const Cfg& c) { return std::to_string(c.*m); }};
}

Field flag(bool Cfg::*m) {
  return {nullptr, [m](const Cfg& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field reals(std::vector<double> Cfg::*m) {
  return {nullptr, [m](const Cfg& c) {
            std::vector<std::string> parts;
            for (double x : c.*m) parts.push_back(csv::format(x));
            return join(parts);
          }};
}

Field text(std::string Cfg::*m) {
  return {[m](Cfg& c, const std::string& v) { c.*m = v; }, [m](const Cfg& c) { return c.*m; }};
}

Field words(std::vector<std::string> Cfg::*m) {
  return {[m](Cfg& c, const std::string& v) { c.*m = to_list(v); },
          [m](const Cfg& c) { return join(c.*m); }};
}

// Numeric setters need the key for their error messages, so they are bound
// here rather than in the helpers above.
const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto add_real = [&t](const std::string& key, double Cfg::*m) {
      Field f = real(m);
      f.set = [key, m](Cfg& c, const std::string& v) { c.*m = to_double(key, v); };
      t[key] = f;
    };
    auto add_int = [&t](const std::string& key, std::int64_t Cfg::*m) {
      Field f = integer(m);
      f.set = [key, m](Cfg& c, const std::string& v) { c.*m = to_int(key, v); };
      t[key] = f;
    };
    auto add_flag = [&t](const std::string& key, bool Cfg::*m) {
      Field f = flag(m);
      f.set = [key, m](Cfg& c, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") {
          c.*m = true;
        } else if (v == "false" || v == "0" || v == "no") {
          c.*m = false;
        } else {
          throw UsageError(key + ": expected true or false, got '" + v + "'");
        }
      };
      t[key] = f;
    };
    auto add_reals = [&t](const std::string& key, std::vector<double> Cfg::*m) {
      Field f = reals(m);
      f.set = [key, m](Cfg& c, const std::string& v) {
        std::vector<double> out;
        for (const auto& item : to_list(v)) out.push_back(to_double(key, item));
        c.*m = out;
      };
      t[key] = f;
    };

    add_real("rosenbrock.a", &Cfg::rosenbrock_a);
    add_real("rosenbrock.b", &Cfg::rosenbrock_b);
    add_int("logistic.n", &Cfg::logistic_n);
    add_int("logistic.d", &Cfg::logistic_d);
    add_int("logistic.data_seed", &Cfg::logistic_data_seed);
    add_reals("quadratic.precision", &Cfg::quadratic_precision);
    add_reals("quadratic.mean", &Cfg::quadratic_mean);
    add_real("precond.epsilon", &Cfg::precond_epsilon);
    add_flag("precond.clamp", &Cfg::precond_clamp);
    add_flag("logistic.standardize", &Cfg::logistic_standardize);
    add_reals("init.point", &Cfg::init_point);
    add_reals("init.mean", &Cfg::init_mean);
    add_real("init.std", &Cfg::init_std);
    add_real("schedule.h", &Cfg::schedule_h);
    add_real("schedule.h0", &Cfg::schedule_h0);
    add_real("schedule.gamma", &Cfg::schedule_gamma);
    add_int("steps", &Cfg::steps);
    add_int("chains", &Cfg::chains);
    add_int("seed", &Cfg::seed);
    add_int("ground_truth.n", &Cfg::ground_truth_n);
    add_int("mala.iters", &Cfg::mala_iters);
    add_int("mala.chains", &Cfg::mala_chains);
    add_real("mala.target_accept", &Cfg::mala_target_accept);
    add_real("mala.h_init", &Cfg::mala_h_init);
    add_real("record.ratio", &Cfg::record_ratio);
    add_int("record.stride", &Cfg::record_stride);
    add_reals("sweep.h", &Cfg::sweep_h);
    add_int("acf.max_lag", &Cfg::acf_max_lag);

    t["potential"] = text(&Cfg::potential);
    t["logistic.data"] = text(&Cfg::logistic_data);
    t["precond"] = text(&Cfg::precond);
    t["precond.c"] = text(&Cfg::precond_c);
    t["precond.divergence"] = text(&Cfg::precond_divergence);
    t["precond.global"] = text(&Cfg::precond_global);
    t["init"] = text(&Cfg::init);
    t["schedule"] = text(&Cfg::schedule);
    t["ground_truth"] = text(&Cfg::ground_truth);
    t["ground_truth.path"] = text(&Cfg::ground_truth_path);
    t["mala.init"] = text(&Cfg::mala_init);
    t["metrics"] = words(&Cfg::metrics);
    t["record"] = text(&Cfg::record);
    t["sweep.preconds"] = words(&Cfg::sweep_preconds);
    t["sweep.metric"] = text(&Cfg::sweep_metric);
    t["acf.preconds"] = words(&Cfg::acf_preconds);
    t["out"] = text(&Cfg::out);
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError(key + ": " + what);
}

void one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (v == a) return;
    list += (list.empty() ? "" : ", ") + std::string(a);
  }
  throw UsageError(key + ": '" + v + "' is not one of " + list);
}

void check_precond_name(const std::string& key, const std::string& v) {
  one_of(key, v, {"constant", "covariance", "fisher", "curvature", "interpolated"});
}

}  // namespace

void ExperimentConfig::apply(const KeyValues& kv) {
  const auto& table = fields();
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
    it->second.set(*this, value);
  }
}

void ExperimentConfig::validate(bool allow_zero_step) {
  one_of("potential", potential, {"rosenbrock", "logistic", "quadratic"});
  require(rosenbrock_b > 0.0, "rosenbrock.b", "must be positive");
  require(std::isfinite(rosenbrock_a), "rosenbrock.a", "must be finite");
  require(logistic_n >= 1, "logistic.n", "must be >= 1");
  require(logistic_d >= 1, "logistic.d", "must be >= 1");
  require(!logistic_data.empty(), "logistic.data", "must be a path or 'synthetic'");
  if (potential == "quadratic") {
    const std::size_t d = quadratic_mean.size();
    require(d >= 1, "quadratic.mean", "must not be empty");
    require(quadratic_precision.size() == d || quadratic_precision.size() == d * d,
            "quadratic.precision", "needs d or d*d entries for d = " + std::to_string(d));
  }

  check_precond_name("precond", precond);
  if (precond_c != "auto") {
    const double c = to_double("precond.c", precond_c);
    require(c > 0.0, "precond.c", "must be positive or 'auto'");
  }
  require(precond_epsilon > 0.0, "precond.epsilon", "must be positive");
  one_of("precond.divergence", precond_divergence, {"auto", "analytic", "fd"});
  one_of("precond.global", precond_global, {"covariance", "fisher"});

  one_of("init", init, {"dirac", "gaussian", "ground_truth"});
  require(!init_point.empty(), "init.point", "must not be empty");
  require(!init_mean.empty(), "init.mean", "must not be empty");
  require(init_std > 0.0, "init.std", "must be positive");

  one_of("schedule", schedule, {"constant", "decay"});
  if (schedule == "constant") {
    require(allow_zero_step ? schedule_h >= 0.0 : schedule_h > 0.0, "schedule.h",
            allow_zero_step ? "must be >= 0" : "must be positive");
  } else {
    require(schedule_h0 > 0.0, "schedule.h0", "must be positive");
    require(schedule_gamma > 0.5 && schedule_gamma <= 1.0, "schedule.gamma", "must be in (1/2, 1]");
  }

  require(steps >= 0, "steps", "must be >= 0");
  require(chains >= 1, "chains", "must be >= 1");
  require(seed >= 0, "seed", "must be >= 0");

  one_of("ground_truth", ground_truth, {"auto", "ancestral", "exact", "mala", "file", "none"});
  if (ground_truth == "auto") {
    ground_truth = potential == "rosenbrock" ? "ancestral" : potential == "quadratic" ? "exact" : "mala";
  }
  if (ground_truth == "ancestral") {
    require(potential == "rosenbrock", "ground_truth", "ancestral sampling needs potential = rosenbrock");
  }
  if (ground_truth == "exact") {
    require(potential == "quadratic", "ground_truth", "exact sampling needs potential = quadratic");
  }
  if (ground_truth == "file") require(!ground_truth_path.empty(), "ground_truth.path", "must be set");
  require(ground_truth_n >= 2, "ground_truth.n", "must be >= 2");

  require(mala_iters >= 0, "mala.iters", "must be >= 0");
  require(mala_chains >= 1, "mala.chains", "must be >= 1");
  require(mala_target_accept > 0.0 && mala_target_accept < 1.0, "mala.target_accept",
          "must be in (0, 1)");
  one_of("mala.init", mala_init, {"laplace", "gaussian", "dirac"});
  require(mala_h_init > 0.0, "mala.h_init", "must be positive");

  for (const auto& m : metrics) one_of("metrics", m, {"w2", "mean_error", "cosine", "diverged"});
  one_of("record", record, {"geometric", "every", "endpoints"});
  require(record_ratio > 1.0, "record.ratio", "must be > 1");
  require(record_stride >= 1, "record.stride", "must be >= 1");

  for (double h : sweep_h) require(h > 0.0, "sweep.h", "entries must be positive");
  for (const auto& p : sweep_preconds) check_precond_name("sweep.preconds", p);
  require(!sweep_metric.empty(), "sweep.metric", "must not be empty");
  require(acf_max_lag >= 0, "acf.max_lag", "must be >= 0");
  for (const auto& p : acf_preconds) check_precond_name("acf.preconds", p);
  require(!out.empty(), "out", "must not be empty");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream s;
  for (const auto& [key, field] : fields()) s << key << " = " << field.get(*this) << '\n';
  return s.str();
}

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [key, field] : fields()) out.push_back(key);
  return out;
}

}  // namespace tiprel
