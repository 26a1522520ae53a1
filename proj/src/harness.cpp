#include "rsma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rsma {

namespace {

std::string grouping_token(const Method& m) {
  switch (m.grouping) {
    case GroupingMethod::greedy:
      return m.evaluator == Evaluator::cccp ? "greedy_cccp" : "greedy";
    case GroupingMethod::heuristic:
      return "heuristic";
    case GroupingMethod::random:
      return "random";
    case GroupingMethod::exhaustive:
      return m.evaluator == Evaluator::cccp ? "exhaustive_cccp" : "exhaustive";
  }
  return "";
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad number '" + s + "'");
  }
  return x;
}

int parse_int(const std::string& s) {
  int x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad integer '" + s + "'");
  }
  return x;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

const char* kCsvHeader = "value,method,mean,stderr,n_infeasible,n_fail";

}  // namespace

std::string Method::id() const {
  return grouping_token(*this) + "-" + (solver == SolverKind::cccp ? "cccp" : "lba") + "-" + to_string(mode);
}

Method parse_method(const std::string& id) {
  const auto parts = split(id, '-');
  if (parts.size() != 3) throw std::invalid_argument("method id must be grouping-solver-mode: " + id);
  Method m;
  const std::string& g = parts[0];
  if (g == "greedy" || g == "greedy_lba") {
    m.grouping = GroupingMethod::greedy;
  } else if (g == "greedy_cccp") {
    m.grouping = GroupingMethod::greedy;
    m.evaluator = Evaluator::cccp;
  } else if (g == "heuristic") {
    m.grouping = GroupingMethod::heuristic;
  } else if (g == "random") {
    m.grouping = GroupingMethod::random;
  } else if (g == "exhaustive" || g == "exhaustive_lba") {
    m.grouping = GroupingMethod::exhaustive;
  } else if (g == "exhaustive_cccp") {
    m.grouping = GroupingMethod::exhaustive;
    m.evaluator = Evaluator::cccp;
  } else {
    throw std::invalid_argument("unknown grouping '" + g + "'");
  }
  if (parts[1] == "cccp") {
    m.solver = SolverKind::cccp;
  } else if (parts[1] == "lba") {
    m.solver = SolverKind::lba;
  } else {
    throw std::invalid_argument("unknown solver '" + parts[1] + "'");
  }
  if (parts[2] == "rsma") {
    m.mode = TransmissionMode::rsma;
  } else if (parts[2] == "sdma") {
    m.mode = TransmissionMode::sdma;
  } else {
    throw std::invalid_argument("unknown mode '" + parts[2] + "'");
  }
  return m;
}

std::string to_string(SweptParameter p) {
  switch (p) {
    case SweptParameter::P_max: return "P_max";
    case SweptParameter::K: return "K";
    case SweptParameter::M_t: return "M_t";
    case SweptParameter::sigma_e2: return "sigma_e2";
    case SweptParameter::N_th: return "N_th";
    case SweptParameter::J: return "J";
  }
  return "";
}

SweptParameter parse_parameter(const std::string& name) {
  for (auto p : {SweptParameter::P_max, SweptParameter::K, SweptParameter::M_t, SweptParameter::sigma_e2,
                 SweptParameter::N_th, SweptParameter::J}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown swept parameter '" + name + "'");
}

ScenarioConfig apply_parameter(const ScenarioConfig& config, SweptParameter p, double value) {
  auto as_int = [&]() {
    if (value != std::floor(value) || value < 1 || value > 1e9) {
      throw std::invalid_argument(to_string(p) + " needs a positive integer value");
    }
    return static_cast<int>(value);
  };
  ScenarioConfig c = config;
  switch (p) {
    case SweptParameter::P_max: c.max_total_power_dbm = value; break;
    case SweptParameter::K: c.num_users = as_int(); break;
    case SweptParameter::M_t: c.num_antennas = as_int(); break;
    case SweptParameter::sigma_e2: c.estimation_error_var = value; break;
    case SweptParameter::N_th: c.total_blocklength = as_int(); break;
    case SweptParameter::J: c.num_subcarriers = as_int(); break;
  }
  c.validate();
  return c;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (values.size() > 1) {
    const bool up = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) {
        throw std::invalid_argument("sweep: values must be strictly monotone");
      }
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("sweep: values must be finite");
  }
}

nlohmann::json to_json(const SweepSpec& spec) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : spec.methods) methods.push_back(m.id());
  return {{"parameter", to_string(spec.parameter)},
          {"values", spec.values},
          {"methods", methods},
          {"trials", spec.trials},
          {"master_seed", spec.master_seed}};
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("sweep: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "parameter" && key != "values" && key != "methods" && key != "trials" && key != "master_seed") {
      throw std::invalid_argument("sweep: unknown key '" + key + "'");
    }
  }
  SweepSpec s;
  try {
    s.parameter = parse_parameter(j.at("parameter").get<std::string>());
    s.values = j.at("values").get<std::vector<double>>();
    for (const auto& m : j.at("methods")) s.methods.push_back(parse_method(m.get<std::string>()));
    if (j.contains("trials")) s.trials = j.at("trials").get<int>();
    if (j.contains("master_seed")) s.master_seed = j.at("master_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("sweep: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep file " + path);
  try {
    return sweep_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep: ") + e.what());
  }
}

ChannelRealization trial_realization(const ScenarioConfig& config, std::uint64_t trial_index) {
  auto rp = derive_rng_stream(config, config.resample_positions ? trial_index : 0, kStreamPositions);
  auto rc = derive_rng_stream(config, trial_index, kStreamChannel);
  const auto d = sample_positions(config, rp);
  return sample_channels(config, d, rc);
}

GroupAssignment make_grouping(const ChannelRealization& realization, const ScenarioConfig& config,
                              const Method& method, std::uint64_t trial_index) {
  switch (method.grouping) {
    case GroupingMethod::greedy:
      return greedy_group(realization, config, method.evaluator, method.mode);
    case GroupingMethod::heuristic:
      return heuristic_group(realization, config);
    case GroupingMethod::random: {
      auto rng = derive_rng_stream(config, trial_index, kStreamGrouping);
      return random_group(config.num_users, config.num_subcarriers, rng);
    }
    case GroupingMethod::exhaustive:
      return exhaustive_group(realization, config, method.evaluator, method.mode);
  }
  throw std::logic_error("make_grouping: bad method");
}

TrialRecord run_trial(const ScenarioConfig& config, const Method& method, std::uint64_t trial_index) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = trial_index;
  try {
    const auto r = trial_realization(config, trial_index);
    rec.grouping = make_grouping(r, config, method, trial_index);
    const auto budget = method.solver == SolverKind::lba ? BudgetMode::equal_split : BudgetMode::joint;
    const auto problem = make_problem(r, rec.grouping.groups, config, method.mode, budget);
    const auto s = method.solver == SolverKind::lba ? lba_solve(problem) : cccp_allocate(problem);
    rec.status = s.status;
    rec.iterations = s.iterations;
    rec.message = s.message;
    if (s.feasible()) {
      rec.sum_et = s.sum_et_exact;
      rec.sum_et_bound = s.sum_et_lower_bound;
    }
  } catch (const std::exception& e) {
    rec.status = AllocationStatus::solver_failure;
    rec.message = e.what();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

PointStats aggregate(double value, const std::string& method, const std::vector<TrialRecord>& records) {
  PointStats p;
  p.value = value;
  p.method = method;
  p.n = static_cast<int>(records.size());
  if (records.empty()) return p;
  double sum = 0.0, iters = 0.0, wall = 0.0;
  for (const auto& r : records) {
    sum += r.sum_et;
    iters += r.iterations;
    wall += r.wall_seconds;
    if (r.status == AllocationStatus::infeasible) ++p.n_infeasible;
    if (r.failed()) ++p.n_fail;
  }
  p.mean = sum / p.n;
  p.mean_iterations = iters / p.n;
  p.mean_wall_seconds = wall / p.n;
  if (p.n > 1) {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.sum_et - p.mean) * (r.sum_et - p.mean);
    p.stderr_mean = std::sqrt(ss / (p.n - 1) / p.n);
  }
  return p;
}

int SweepResult::total_failures() const {
  int n = 0;
  for (const auto& p : points) n += p.n_fail;
  return n;
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, int threads, const ProgressFn& progress) {
  spec.validate();
  SweepResult result;
  result.spec = spec;
  ScenarioConfig seeded = base;
  seeded.master_seed = spec.master_seed;
  const std::size_t nv = spec.values.size(), nm = spec.methods.size();
  const std::size_t nt = static_cast<std::size_t>(spec.trials);
  std::vector<ScenarioConfig> configs;
  for (double v : spec.values) configs.push_back(apply_parameter(seeded, spec.parameter, v));
  result.records.assign(nv, std::vector<std::vector<TrialRecord>>(nm, std::vector<TrialRecord>(nt)));

  const std::size_t total = nv * nm * nt;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t v = i / (nm * nt), m = (i / nt) % nm, t = i % nt;
      result.records[v][m][t] = run_trial(configs[v], spec.methods[m], t);
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(total, 1))));
  if (n_threads == 1) {
    // Serial path reports progress per point.
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t t = 0; t < nt; ++t) result.records[v][m][t] = run_trial(configs[v], spec.methods[m], t);
        if (progress) {
          progress(to_string(spec.parameter) + "=" + format_double(spec.values[v]) + " " + spec.methods[m].id() +
                   " done");
        }
      }
    }
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t m = 0; m < nm; ++m) {
      result.points.push_back(aggregate(spec.values[v], spec.methods[m].id(), result.records[v][m]));
    }
  }
  return result;
}

std::string to_csv(const std::vector<PointStats>& points) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : points) {
    out += format_double(p.value) + "," + p.method + "," + format_double(p.mean) + "," +
           format_double(p.stderr_mean) + "," + std::to_string(p.n_infeasible) + "," + std::to_string(p.n_fail) +
           "\n";
  }
  return out;
}

std::vector<PointStats> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("csv: bad header");
  std::vector<PointStats> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw std::invalid_argument("csv: expected 6 fields in '" + line + "'");
    PointStats p;
    p.value = parse_double(f[0]);
    p.method = f[1];
    p.mean = parse_double(f[2]);
    p.stderr_mean = parse_double(f[3]);
    p.n_infeasible = parse_int(f[4]);
    p.n_fail = parse_int(f[5]);
    points.push_back(p);
  }
  return points;
}

void emit_outputs(const SweepResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  const std::string stem = to_string(result.spec.parameter);
  write_file(out_dir / (stem + ".csv"), to_csv(result.points));
  write_file(out_dir / (stem + ".svg"), render_svg(result));

  std::string trials = "value,method,trial,status,sum_et,sum_et_bound,iterations,grouping\n";
  std::string timing = "value,method,mean_iterations,mean_wall_seconds\n";
  for (std::size_t v = 0; v < result.records.size(); ++v) {
    const std::string value = format_double(result.spec.values[v]);
    for (std::size_t m = 0; m < result.records[v].size(); ++m) {
      const std::string id = result.spec.methods[m].id();
      for (const auto& r : result.records[v][m]) {
        // Group lists use ';' between groups and ' ' between users.
        std::string g;
        for (std::size_t j = 0; j < r.grouping.groups.size(); ++j) {
          if (j) g += ';';
          for (std::size_t k = 0; k < r.grouping.groups[j].size(); ++k) {
            if (k) g += ' ';
            g += std::to_string(r.grouping.groups[j][k]);
          }
        }
        trials += value + "," + id + "," + std::to_string(r.trial) + "," + to_string(r.status) + "," +
                  format_double(r.sum_et) + "," + format_double(r.sum_et_bound) + "," +
                  std::to_string(r.iterations) + "," + g + "\n";
      }
    }
  }
  for (const auto& p : result.points) {
    timing += format_double(p.value) + "," + p.method + "," + format_double(p.mean_iterations) + "," +
              format_double(p.mean_wall_seconds) + "\n";
  }
  write_file(out_dir / (stem + "_trials.csv"), trials);
  write_file(out_dir / (stem + "_timing.csv"), timing);
}

double sign_test_p_value(const std::vector<double>& a, const std::vector<double>& b, double tie_tol) {
  if (a.size() != b.size()) throw std::invalid_argument("sign test: size mismatch");
  int wins = 0, n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (std::abs(d) <= tie_tol) continue;
    ++n;
    if (d > 0) ++wins;
  }
  if (n == 0) return 1.0;
  // P(X >= wins), X ~ Binomial(n, 1/2).
  double p = 0.0;
  for (int x = wins; x <= n; ++x) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace rsma
