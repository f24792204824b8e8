#include "aoi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aoi/errors.hpp"
#include "aoi/sim.hpp"

namespace aoi {

double round9(double x) { return std::round(x * 1e9) / 1e9; }

namespace {

const std::vector<PolicyKind> kAllFeasible = {PolicyKind::Whittle, PolicyKind::WhittleLike,
                                              PolicyKind::Myopic, PolicyKind::Greedy,
                                              PolicyKind::RoundRobin};

Fleet identical_fleet(std::size_t m, int k, ChannelParams p) {
  return Fleet{std::vector<ChannelParams>(m, p), k};
}

std::vector<SweepPoint> fig5_points(const ExperimentOptions&) {
  std::vector<SweepPoint> out;
  const ChannelParams first(0.3, 0.8);
  for (int i = 2; i <= 9; ++i) {
    const double beta2 = i / 10.0;
    const ChannelParams second(round9(1.1 - beta2), beta2);
    out.push_back({beta2, Fleet{{first, second}, 1}, {}});
  }
  return out;
}

std::vector<SweepPoint> fig6_points(const ExperimentOptions&) {
  std::vector<SweepPoint> out;
  for (int k : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25}) {
    out.push_back({static_cast<double>(k), identical_fleet(25, k, ChannelParams(0.7, 0.7)), {}});
  }
  return out;
}

std::vector<SweepPoint> fig7_points(const ExperimentOptions&) {
  std::vector<SweepPoint> out;
  for (int m = 2; m <= 20; ++m) {
    out.push_back({static_cast<double>(m), identical_fleet(m, 1, ChannelParams(0.7, 0.7)), {}});
  }
  return out;
}

std::vector<SweepPoint> fig8_points(const ExperimentOptions& options) {
  const ChannelParams groups[3] = {ChannelParams(0.7, 0.7), ChannelParams(0.5, 0.9),
                                   ChannelParams(0.4, 0.8)};
  std::vector<std::int64_t> marks;
  for (std::int64_t decade = 10; decade <= options.horizon; decade *= 10) {
    for (std::int64_t f : {1, 2, 5}) {
      if (decade * f <= options.horizon) marks.push_back(decade * f);
    }
  }
  if (marks.empty() || marks.back() != options.horizon) marks.push_back(options.horizon);
  std::vector<SweepPoint> out;
  for (auto [m, k] : {std::pair{6, 1}, std::pair{30, 5}, std::pair{300, 50}}) {
    Fleet f;
    f.budget = k;
    for (const ChannelParams& g : groups) f.devices.insert(f.devices.end(), m / 3, g);
    out.push_back({static_cast<double>(m), f, marks});
  }
  return out;
}

void say(const ExperimentOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::string table_path(const std::string& dir, const ChannelParams& p, int delta_hat) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "whittle_a%.9g_b%.9g_d%d.csv", p.alpha(), p.beta(), delta_hat);
  return (std::filesystem::path(dir) / buf).string();
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> registry = {
      {"fig5", "M=2, K=1, device 1 (0.3, 0.8), device 2 (1.1 - beta2, beta2); sweep beta2",
       "beta2", kAllFeasible, false, true, fig5_points},
      {"fig6", "M=25, alpha=beta=0.7; sweep K", "K", kAllFeasible, true, false, fig6_points},
      {"fig7", "K=1, alpha=beta=0.7; sweep M", "M", kAllFeasible, true, true, fig7_points},
      {"fig8",
       "three equal groups (0.7, 0.7), (0.5, 0.9), (0.4, 0.8), K/M = 1/6; AoI against T for "
       "M in {6, 30, 300}",
       "T", kAllFeasible, true, false, fig8_points},
  };
  return registry;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const ExperimentPreset& p : presets()) out.push_back(p.name);
  return out;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const ExperimentPreset& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const std::string& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown preset '" + name + "' (known presets: " + known + ")");
}

IndexTableSet whittle_tables(const std::vector<ChannelParams>& devices, int delta_hat,
                             const std::string& table_dir,
                             const std::function<void(const std::string&)>& log) {
  IndexTableSet out;
  for (const ChannelParams& p : devices) {
    if (out.contains(p)) continue;
    const std::string path = table_dir.empty() ? "" : table_path(table_dir, p, delta_hat);
    if (!path.empty() && std::filesystem::exists(path)) {
      std::ifstream in(path);
      auto t = std::make_shared<const IndexTable>(IndexTable::read_csv(in));
      if (t->params() == p && t->delta_hat() == delta_hat && t->kind() == IndexKind::Whittle) {
        if (log) log("loaded Whittle table " + path);
        out.emplace(p, std::move(t));
        continue;
      }
    }
    if (log) log("building Whittle table for " + p.to_string() + " at delta_hat " +
                 std::to_string(delta_hat));
    WhittleSearch s;
    auto t = std::make_shared<const IndexTable>(
        build_index_table(p, delta_hat, s.xi, s.step, IndexKind::Whittle, s));
    if (!path.empty()) {
      std::filesystem::create_directories(table_dir);
      std::ofstream f(path);
      t->write_csv(f);
      if (!f) throw std::runtime_error("cannot write " + path);
    }
    out.emplace(p, std::move(t));
  }
  return out;
}

std::vector<ExperimentRow> run_experiment(const ExperimentPreset& preset,
                                          const ExperimentOptions& options) {
  const std::vector<PolicyKind>& policies =
      options.policies.empty() ? preset.policies : options.policies;
  std::vector<SweepPoint> points = preset.points(options);
  if (!options.only_values.empty()) {
    std::erase_if(points, [&](const SweepPoint& p) {
      return std::none_of(options.only_values.begin(), options.only_values.end(),
                          [&](double v) { return std::fabs(v - p.value) < 1e-9; });
    });
    if (points.empty()) throw std::invalid_argument("no sweep point matches the requested values");
  }

  const bool tables_needed = std::any_of(policies.begin(), policies.end(), needs_whittle_tables);
  IndexTableSet tables;
  if (tables_needed) {
    std::vector<ChannelParams> all;
    for (const SweepPoint& p : points) all.insert(all.end(), p.fleet.devices.begin(), p.fleet.devices.end());
    tables = whittle_tables(all, options.delta_hat, options.table_dir, options.log);
  }

  std::vector<ExperimentRow> rows;
  for (const SweepPoint& point : points) {
    std::optional<double> lower;
    std::optional<double> joint;
    if (preset.lower_bound) {
      lower = find_wstar(point.fleet, options.delta_hat).value;
    }
    if (preset.joint_exact) {
      try {
        joint = solve_joint_exact(point.fleet, options.joint_delta_hat).avg_cost;
      } catch (const StateSpaceTooLarge&) {
        joint.reset();
      }
    }
    std::optional<double> relaxed_charge;
    for (PolicyKind policy : policies) {
      SimConfig c;
      c.devices = point.fleet.devices;
      c.budget = point.fleet.budget;
      c.horizon = options.horizon;
      c.policy = policy;
      c.seed = options.seed;
      c.replications = options.reps;
      c.delta_hat = options.delta_hat;
      c.checkpoints = point.checkpoints;
      c.jobs = options.jobs;
      if (policy == PolicyKind::RelaxedThreshold) {
        if (!relaxed_charge) relaxed_charge = find_wstar(point.fleet, options.delta_hat).w_dagger;
        c.relaxed_charge = *relaxed_charge;
      }
      say(options, preset.name + ": " + preset.sweep_var + "=" + csv_number(point.value) + " " +
                       to_string(policy));
      const SimResult r = run_sim(c, tables_needed ? &tables : nullptr);

      ExperimentRow row;
      row.preset = preset.name;
      row.sweep_var = preset.sweep_var;
      row.policy = policy;
      row.m = point.fleet.size();
      row.k = point.fleet.budget;
      row.reps = options.reps;
      row.lower_bound = lower;
      row.joint_exact = joint;
      if (point.checkpoints.empty()) {
        row.sweep_value = point.value;
        row.horizon = options.horizon;
        row.total_avg_aoi = r.total_avg_aoi;
        row.std_error = r.std_error;
        rows.push_back(row);
      } else {
        for (const Checkpoint& cp : r.checkpoints) {
          row.sweep_value = static_cast<double>(cp.t);
          row.horizon = cp.t;
          row.total_avg_aoi = cp.total_avg_aoi;
          row.std_error = cp.std_error;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << kExperimentCsvHeader << '\n';
  for (const ExperimentRow& r : rows) {
    out << r.preset << ',' << r.sweep_var << ',' << csv_number(r.sweep_value) << ','
        << to_string(r.policy) << ',' << r.m << ',' << r.k << ',' << r.horizon << ',' << r.reps
        << ',' << csv_number(r.total_avg_aoi) << ',' << csv_number(r.std_error) << ','
        << (r.lower_bound ? csv_number(*r.lower_bound) : "") << ','
        << (r.joint_exact ? csv_number(*r.joint_exact) : "") << '\n';
  }
}

std::vector<ExperimentRow> read_experiment_csv(std::istream& in) {
  std::vector<ExperimentRow> rows;
  std::string line;
  auto number = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line == kExperimentCsvHeader) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 12) throw std::invalid_argument("malformed experiment row: " + line);
    ExperimentRow r;
    r.preset = f[0];
    r.sweep_var = f[1];
    r.sweep_value = std::stod(f[2]);
    r.policy = parse_policy_kind(f[3]);
    r.m = std::stoul(f[4]);
    r.k = std::stoi(f[5]);
    r.horizon = std::stoll(f[6]);
    r.reps = std::stoi(f[7]);
    r.total_avg_aoi = std::stod(f[8]);
    r.std_error = number(f[9]);
    if (!f[10].empty()) r.lower_bound = std::stod(f[10]);
    if (!f[11].empty()) r.joint_exact = std::stod(f[11]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace aoi
