// Command-line driver: index tables, single simulations, lower bounds and
// the figure presets.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "aoi/index.hpp"
#include "aoi/lowerbound.hpp"
#include "aoi/sim.hpp"

namespace {

using namespace aoi;

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  fn(f);
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, sep);) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

// "a:b,a:b,..." or M copies of (alpha, beta).
struct FleetSpec {
  std::string devices;
  double alpha = 0.7;
  double beta = 0.7;
  int m = 2;
  int k = 1;

  void add(CLI::App* app) {
    app->add_option("--devices", devices, "explicit channels as alpha:beta,alpha:beta,...");
    app->add_option("--alpha", alpha, "GOOD->GOOD probability of every device")->capture_default_str();
    app->add_option("--beta", beta, "BAD->BAD probability of every device")->capture_default_str();
    app->add_option("-M,--M", m, "number of devices")->capture_default_str();
    app->add_option("-K,--K", k, "devices scheduled per slot")->capture_default_str();
  }

  Fleet fleet() const {
    Fleet f;
    f.budget = k;
    if (!devices.empty()) {
      for (const std::string& d : split(devices, ',')) {
        const auto parts = split(d, ':');
        if (parts.size() != 2) throw std::invalid_argument("device spec must be alpha:beta, got " + d);
        f.devices.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
      }
    } else {
      if (m < 1) throw std::invalid_argument("M must be at least 1");
      f.devices.assign(static_cast<std::size_t>(m), ChannelParams(alpha, beta));
    }
    f.validate();
    return f;
  }
};

std::vector<PolicyKind> parse_policies(const std::string& list) {
  std::vector<PolicyKind> out;
  for (const std::string& p : split(list, ',')) out.push_back(parse_policy_kind(p));
  return out;
}

void log_line(const std::string& msg) { std::cerr << "[aoi] " << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling over partially observable Markov channels"};
  app.require_subcommand(1);
  // Accepted before or after the subcommand. Keys go under a section named
  // after the subcommand, e.g. [simulate] then M = 25.
  app.set_config("--config", "", "INI/TOML key = value configuration file");
  app.fallthrough();

  // index -----------------------------------------------------------------
  auto* idx = app.add_subcommand("index", "dump a Whittle or Whittle-like index table as CSV");
  double ia = 0.7, ib = 0.7, ixi = 1e-3, istep = 1.0;
  int idh = 100;
  std::string ikind = "whittle", iout;
  idx->add_option("--alpha", ia)->capture_default_str();
  idx->add_option("--beta", ib)->capture_default_str();
  idx->add_option("--delta-hat", idh, "AoI truncation bound")->capture_default_str();
  idx->add_option("--kind", ikind, "whittle | whittle_like")->capture_default_str();
  idx->add_option("--xi", ixi, "bisection tolerance")->capture_default_str();
  idx->add_option("--step", istep, "bracket expansion step")->capture_default_str();
  idx->add_option("--out", iout, "output CSV (default stdout)");

  // simulate --------------------------------------------------------------
  auto* simc = app.add_subcommand("simulate", "simulate one policy on one fleet");
  FleetSpec sf;
  sf.add(simc);
  std::string spol = "whittle", sout, straj, stables;
  std::uint64_t sseed = 1;
  long long sT = 100000;
  int sreps = 10, sdh = 100, strunc = 0, sjobs = 1;
  bool sgood = false;
  simc->add_option("--policies,--policy", spol, "comma-separated policies")->capture_default_str();
  simc->add_option("--seed", sseed)->capture_default_str();
  simc->add_option("-T,--T", sT, "horizon in slots")->capture_default_str();
  simc->add_option("--reps", sreps, "replications")->capture_default_str();
  simc->add_option("--delta-hat", sdh, "truncation bound of the Whittle tables")->capture_default_str();
  simc->add_option("--truncate-at", strunc, "simulate the truncated belief MDP with this AoI cap (0: off)");
  simc->add_option("--jobs", sjobs, "worker threads")->capture_default_str();
  simc->add_option("--table-dir", stables, "cache directory for Whittle tables");
  simc->add_option("--trajectory", straj, "write the replication-0 trajectory CSV here");
  simc->add_flag("--always-good", sgood, "force every channel GOOD (test hook)");
  simc->add_option("--out", sout, "output CSV (default stdout)");

  // lowerbound ------------------------------------------------------------
  auto* lb = app.add_subcommand("lowerbound", "Lagrangian lower bound J(W*)");
  FleetSpec lf;
  lf.add(lb);
  int ldh = 100;
  double lxi = 1e-2, lstep = 1.0;
  std::string lout;
  lb->add_option("--delta-hat", ldh)->capture_default_str();
  lb->add_option("--xi", lxi, "ternary search tolerance")->capture_default_str();
  lb->add_option("--step", lstep, "bracket expansion step")->capture_default_str();
  lb->add_option("--out", lout, "output CSV (default stdout)");

  // experiment ------------------------------------------------------------
  auto* ex = app.add_subcommand("experiment", "run a figure preset and write a plot-ready CSV");
  std::string preset, eout, epol, etables, eonly;
  ExperimentOptions eo;
  long long eT = eo.horizon;
  bool list = false;
  ex->add_option("--preset", preset, "fig5 | fig6 | fig7 | fig8");
  ex->add_flag("--list", list, "list presets and exit");
  ex->add_option("--seed", eo.seed)->capture_default_str();
  ex->add_option("--delta-hat", eo.delta_hat, "Whittle table / lower-bound truncation")->capture_default_str();
  ex->add_option("--joint-delta-hat", eo.joint_delta_hat, "joint-MDP oracle truncation")->capture_default_str();
  ex->add_option("--reps", eo.reps)->capture_default_str();
  ex->add_option("-T,--T", eT, "horizon in slots")->capture_default_str();
  ex->add_option("--jobs", eo.jobs, "worker threads")->capture_default_str();
  ex->add_option("--policies", epol, "comma-separated subset of policies");
  ex->add_option("--only", eonly, "comma-separated sweep values to run (fig8: M)");
  ex->add_option("--table-dir", etables, "cache directory for Whittle tables");
  ex->add_option("--out", eout, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (idx->parsed()) {
      const ChannelParams p(ia, ib);
      const IndexTable t = build_index_table(p, idh, ixi, istep, parse_index_kind(ikind));
      emit(iout, [&](std::ostream& o) { t.write_csv(o); });
    } else if (simc->parsed()) {
      const Fleet f = sf.fleet();
      const auto policies = parse_policies(spol);
      IndexTableSet tables;
      if (std::any_of(policies.begin(), policies.end(), needs_whittle_tables)) {
        tables = whittle_tables(f.devices, sdh, stables, log_line);
      }
      std::ostringstream buf;
      bool header = true;
      for (std::size_t i = 0; i < policies.size(); ++i) {
        SimConfig c;
        c.devices = f.devices;
        c.budget = f.budget;
        c.horizon = sT;
        c.policy = policies[i];
        c.seed = sseed;
        c.replications = sreps;
        c.delta_hat = sdh;
        c.truncate_at = strunc;
        c.jobs = sjobs;
        c.channel_override = sgood ? ChannelOverride::AlwaysGood : ChannelOverride::None;
        c.record_trajectory = !straj.empty() && i == 0;
        if (c.policy == PolicyKind::RelaxedThreshold) c.relaxed_charge = find_wstar(f, sdh).w_dagger;
        const SimResult r = run_sim(c, &tables);
        write_sim_csv(buf, c, r, header);
        header = false;
        if (c.record_trajectory) emit(straj, [&](std::ostream& o) { write_trajectory_csv(o, r); });
      }
      emit(sout, [&](std::ostream& o) { o << buf.str(); });
    } else if (lb->parsed()) {
      const Fleet f = lf.fleet();
      WStarSearch s;
      s.xi = lxi;
      s.step = lstep;
      const LowerBoundResult r = find_wstar(f, ldh, s);
      emit(lout, [&](std::ostream& o) {
        o << "M,K,delta_hat,w_dagger,lower_bound\n"
          << f.size() << ',' << f.budget << ',' << ldh << ',' << csv_number(r.w_dagger) << ','
          << csv_number(r.value) << '\n';
      });
    } else if (ex->parsed()) {
      if (list) {
        for (const ExperimentPreset& p : presets()) std::cout << p.name << "\t" << p.description << '\n';
        return 0;
      }
      if (preset.empty()) throw std::invalid_argument("--preset is required (see --list)");
      const ExperimentPreset& p = find_preset(preset);
      eo.horizon = eT;
      eo.table_dir = etables;
      eo.log = log_line;
      if (!epol.empty()) eo.policies = parse_policies(epol);
      for (const std::string& v : split(eonly, ',')) eo.only_values.push_back(std::stod(v));
      const auto rows = run_experiment(p, eo);
      emit(eout, [&](std::ostream& o) { write_experiment_csv(o, rows); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
