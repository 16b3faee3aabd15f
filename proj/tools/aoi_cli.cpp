// aoi: analysis, simulation, and policy optimization for a slotted-ALOHA
// status-update system with energy-harvesting devices.
//
// Every subcommand writes a tab-separated table plus a JSON run manifest
// (all resolved parameters, tool version, seed) next to it; identical
// invocations reproduce both files byte-for-byte.

#include "CLI11.hpp"
#include "json.hpp"

#include "aoi/approx_aoi.hpp"
#include "aoi/exact_aoi.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kExitConfig = 2;
constexpr int kExitStateSpace = 3;

struct ModelOpts {
  int u = 1;
  int e = 1;
  double alpha = 0.1;
  double eta = 0.1;
  std::vector<double> pi;  // defaults to all ones
  std::string mode = "no-capture";
  int slot_length = 100;
  double rate = 0.8;
  double noise_db = std::nan("");
  double noise_linear = std::nan("");
  long long theta = 1000;

  aoi::SystemConfig config() const {
    aoi::SystemConfig c;
    c.device_count = u;
    c.battery_capacity = e;
    c.update_prob = alpha;
    c.harvest_prob = eta;
    c.channel.slot_length = slot_length;
    c.channel.rate = rate;
    if (!std::isnan(noise_db))
      c.channel.noise_power = std::pow(10.0, noise_db / 10.0);
    else if (!std::isnan(noise_linear))
      c.channel.noise_power = noise_linear;
    c.decoding_mode =
        mode == "capture" ? aoi::DecodingMode::Capture : aoi::DecodingMode::NoCapture;
    c.validate();
    return c;
  }

  aoi::TransmissionPolicy policy() const {
    std::vector<double> p = pi.empty() ? std::vector<double>(e, 1.0) : pi;
    if (static_cast<int>(p.size()) != e)
      throw std::invalid_argument("pi: expected " + std::to_string(e) + " entries, got " +
                                  std::to_string(p.size()));
    return aoi::TransmissionPolicy(std::move(p));
  }
};

void add_model_options(CLI::App* cmd, ModelOpts& m) {
  cmd->add_option("--u", m.u, "number of devices U")->capture_default_str();
  cmd->add_option("--e", m.e, "battery capacity E, energy units")->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "per-slot new-reading probability")
      ->capture_default_str();
  cmd->add_option("--eta", m.eta, "per-slot harvest probability")->capture_default_str();
  cmd->add_option("--pi", m.pi, "transmission probabilities pi_1..pi_E (default: all 1)")
      ->delimiter(',');
  cmd->add_option("--mode", m.mode, "decoding mode")
      ->check(CLI::IsMember({"capture", "no-capture"}))
      ->capture_default_str();
  cmd->add_option("--n", m.slot_length, "channel uses per slot")->capture_default_str();
  cmd->add_option("--rate", m.rate, "code rate, bits per channel use")
      ->capture_default_str();
  auto* db = cmd->add_option("--noise-db", m.noise_db, "noise power sigma^2 in dB");
  auto* lin =
      cmd->add_option("--noise-linear", m.noise_linear, "noise power sigma^2, linear");
  db->excludes(lin);
  lin->excludes(db);
  cmd->add_option("--theta", m.theta, "age-violation threshold, slots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string policy_string(const aoi::TransmissionPolicy& p) {
  std::string s;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    if (i) s += ",";
    s += format_double(p.probs[i]);
  }
  return s;
}

/// Rows are built as strings up front so output order never depends on
/// evaluation order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << columns[i] << (i + 1 < columns.size() ? '\t' : '\n');
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        os << row[i] << (i + 1 < row.size() ? '\t' : '\n');
  }
};

std::string resolve_out_path(const std::string& out, const std::string& name) {
  if (!out.empty()) return out;
  const char* dir = std::getenv("AOI_OUT_DIR");
  return std::string(dir && *dir ? dir : ".") + "/" + name + ".tsv";
}

nlohmann::ordered_json manifest_base(const std::string& command, const ModelOpts& m) {
  const aoi::SystemConfig cfg = m.config();
  nlohmann::ordered_json j;
  j["tool"] = "aoi";
  j["version"] = kVersion;
  j["command"] = command;
  j["u"] = m.u;
  j["e"] = m.e;
  j["alpha"] = m.alpha;
  j["eta"] = m.eta;
  j["pi"] = m.policy().probs;
  j["mode"] = m.mode;
  j["slot_length"] = m.slot_length;
  j["rate"] = m.rate;
  j["noise_linear"] = cfg.channel.noise_power;
  j["theta"] = m.theta;
  return j;
}

void write_outputs(const std::string& out_path, const Table& table,
                   const nlohmann::ordered_json& manifest) {
  {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    table.write(f);
  }
  {
    std::ofstream f(out_path + ".manifest.json");
    if (!f) throw std::runtime_error("cannot open manifest file: " + out_path);
    f << manifest.dump(2) << '\n';
  }
  table.write(std::cout);
}

// ---------------------------------------------------------------------------

int run_steady_state(const ModelOpts& m, const std::string& out) {
  const auto cfg = m.config();
  const auto nu =
      aoi::battery_steady_state(aoi::m1_transition_matrix(cfg, m.policy()));
  Table t;
  t.columns = {"level", "nu"};
  for (int b = 0; b <= m.e; ++b)
    t.add_row({std::to_string(b), format_double(nu[b])});
  write_outputs(resolve_out_path(out, "steady-state"), t, manifest_base("steady-state", m));
  return 0;
}

int run_approx(const ModelOpts& m, const std::string& out) {
  const auto metrics = aoi::approx_metrics(m.config(), m.policy(), m.theta);
  Table t;
  t.columns = {"u_alpha", "policy", "avg_aoi_approx", "avp", "throughput",
               "mean_y",  "mean_y2"};
  t.add_row({format_double(m.u * m.alpha), policy_string(m.policy()),
             format_double(metrics.avg_aoi), format_double(metrics.avp),
             format_double(metrics.throughput), format_double(metrics.mean_y),
             format_double(metrics.mean_y2)});
  write_outputs(resolve_out_path(out, "approx"), t, manifest_base("approx", m));
  return 0;
}

int run_exact(const ModelOpts& m, const std::string& out) {
  const auto chain = aoi::build_ancillary_chain(m.config(), m.policy(), {});
  const auto [mean_y, mean_y2] = aoi::inter_refresh_moments_exact(chain);
  Table t;
  t.columns = {"u_alpha", "policy", "avg_aoi_exact", "mean_y", "mean_y2"};
  t.add_row({format_double(m.u * m.alpha), policy_string(m.policy()),
             format_double(1.0 + mean_y2 / (2.0 * mean_y)), format_double(mean_y),
             format_double(mean_y2)});
  write_outputs(resolve_out_path(out, "exact"), t, manifest_base("exact", m));
  return 0;
}

int run_simulate(const ModelOpts& m, const aoi::SimParams& params, const std::string& out) {
  aoi::SimParams p = params;
  p.theta = m.theta;
  const auto r = aoi::simulate(m.config(), m.policy(), p);
  Table t;
  t.columns = {"u_alpha",       "policy",        "avg_aoi",     "avg_aoi_se",
               "avp",           "avp_se",        "throughput",  "throughput_se",
               "mean_refresh",  "mean_refresh_se", "refresh_count", "seed"};
  t.add_row({format_double(m.u * m.alpha), policy_string(m.policy()),
             format_double(r.avg_aoi), format_double(r.avg_aoi_se), format_double(r.avp),
             format_double(r.avp_se), format_double(r.throughput),
             format_double(r.throughput_se), format_double(r.mean_refresh),
             format_double(r.mean_refresh_se), std::to_string(r.refresh_count),
             std::to_string(p.seed)});
  auto manifest = manifest_base("simulate", m);
  manifest["slots"] = p.total_slots;
  manifest["warmup"] = p.warmup_slots;
  manifest["seed"] = p.seed;
  write_outputs(resolve_out_path(out, "simulate"), t, manifest);
  return 0;
}

int run_optimize(const ModelOpts& m, const std::string& metric_name, int restarts,
                 std::uint64_t seed, const std::string& out) {
  const auto cfg = m.config();
  aoi::Objective obj;
  obj.theta = m.theta;
  obj.metric = metric_name == "avp"          ? aoi::Metric::Avp
               : metric_name == "throughput" ? aoi::Metric::Throughput
                                             : aoi::Metric::AvgAoI;
  aoi::OptimizerOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;

  const auto result = aoi::optimize_policy(cfg, obj, opts);

  Table t;
  t.columns = {"policy_kind", "policy", "metric", "objective"};
  t.add_row({"optimized", policy_string(result.policy), metric_name,
             format_double(result.objective_value)});
  for (auto [kind, name] :
       {std::pair{aoi::BaselineKind::FullBatteryOnly, "full-battery-only"},
        std::pair{aoi::BaselineKind::AlwaysTransmit, "always-transmit"}}) {
    const auto policy = aoi::baseline_policy(kind, m.e);
    double value = aoi::evaluate_objective(cfg, policy, obj);
    if (obj.metric == aoi::Metric::Throughput) value = -value;
    t.add_row({name, policy_string(policy), metric_name, format_double(value)});
  }
  auto manifest = manifest_base("optimize", m);
  manifest["metric"] = metric_name;
  manifest["restarts"] = restarts;
  manifest["seed"] = seed;
  manifest["evaluations"] = result.evaluations;
  write_outputs(resolve_out_path(out, "optimize"), t, manifest);
  return 0;
}

struct SweepPoint {
  double avg_aoi_approx = std::nan("");
  double avg_aoi_exact = std::nan("");
  double avp = std::nan("");
  double throughput = std::nan("");
  double sim_mean = std::nan("");
  double sim_stderr = std::nan("");
};

int run_sweep(const ModelOpts& m, const std::vector<double>& u_alpha_grid, bool with_exact,
              bool with_sim, const aoi::SimParams& sim_params, const std::string& out) {
  if (u_alpha_grid.empty()) throw std::invalid_argument("u-alpha: sweep grid is empty");

  // each point is independent; rows are emitted in grid order regardless
  // of completion order
  std::vector<std::future<SweepPoint>> futures;
  for (double u_alpha : u_alpha_grid) {
    futures.push_back(std::async(std::launch::async, [&, u_alpha] {
      ModelOpts point = m;
      point.alpha = u_alpha / m.u;
      const auto cfg = point.config();
      const auto policy = point.policy();

      SweepPoint row;
      const auto metrics = aoi::approx_metrics(cfg, policy, m.theta);
      row.avg_aoi_approx = metrics.avg_aoi;
      row.avp = metrics.avp;
      row.throughput = metrics.throughput;
      if (with_exact) row.avg_aoi_exact = aoi::exact_avg_aoi(cfg, policy);
      if (with_sim) {
        aoi::SimParams p = sim_params;
        p.theta = m.theta;
        const auto r = aoi::simulate(cfg, policy, p);
        row.sim_mean = r.avg_aoi;
        row.sim_stderr = r.avg_aoi_se;
      }
      return row;
    }));
  }

  Table t;
  t.columns = {"u_alpha",    "policy", "avg_aoi_exact", "avg_aoi_approx", "avp",
               "throughput", "sim_mean", "sim_stderr",  "seed"};
  for (std::size_t i = 0; i < futures.size(); ++i) {
    const SweepPoint row = futures[i].get();
    t.add_row({format_double(u_alpha_grid[i]), policy_string(m.policy()),
               format_double(row.avg_aoi_exact), format_double(row.avg_aoi_approx),
               format_double(row.avp), format_double(row.throughput),
               format_double(row.sim_mean), format_double(row.sim_stderr),
               with_sim ? std::to_string(sim_params.seed) : "nan"});
  }
  auto manifest = manifest_base("sweep", m);
  manifest["u_alpha"] = u_alpha_grid;
  manifest["with_exact"] = with_exact;
  manifest["with_sim"] = with_sim;
  if (with_sim) {
    manifest["slots"] = sim_params.total_slots;
    manifest["seed"] = sim_params.seed;
  }
  write_outputs(resolve_out_path(out, "sweep"), t, manifest);
  return 0;
}

/// End-to-end cross-check on the reference scenario: U=30, E=2, eta=0.05,
/// capture decoding, pi=(1,1), noise -20 dB. The approximate and exact
/// average ages must agree within 5% on every grid point.
int run_validate(const std::string& out) {
  ModelOpts m;
  m.u = 30;
  m.e = 2;
  m.eta = 0.05;
  m.mode = "capture";
  m.noise_db = -20.0;
  m.pi = {1.0, 1.0};

  Table t;
  t.columns = {"u_alpha", "avg_aoi_exact", "avg_aoi_approx", "rel_gap", "status"};
  bool ok = true;
  for (double u_alpha : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    m.alpha = u_alpha / m.u;
    const auto cfg = m.config();
    const double exact = aoi::exact_avg_aoi(cfg, m.policy());
    const double approx = aoi::approx_metrics(cfg, m.policy(), m.theta).avg_aoi;
    const double gap = std::abs(exact - approx) / exact;
    const bool pass = gap <= 0.05;
    ok = ok && pass;
    t.add_row({format_double(u_alpha), format_double(exact), format_double(approx),
               format_double(gap), pass ? "ok" : "FAIL"});
  }
  write_outputs(resolve_out_path(out, "validate"), t, manifest_base("validate", m));
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AoI analysis for slotted ALOHA with energy harvesting"};
  app.set_version_flag("--version", std::string("aoi ") + kVersion);
  // key=value file with one [subcommand] section level, given before the
  // subcommand: aoi --config run.ini approx
  app.set_config("--config", "", "read options from a key=value config file");
  app.require_subcommand(1);

  ModelOpts model;
  std::string out;
  std::string metric = "avg-aoi";
  int restarts = 8;
  std::uint64_t opt_seed = 7;
  aoi::SimParams sim_params;
  std::vector<double> u_alpha_grid;
  bool with_exact = false;
  bool with_sim = false;

  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "output table path (default: $AOI_OUT_DIR or .)");
  };

  auto* ss = app.add_subcommand("steady-state", "stationary battery distribution");
  add_model_options(ss, model);
  add_out(ss);

  auto* ex = app.add_subcommand("exact", "exact average age analysis");
  add_model_options(ex, model);
  add_out(ex);

  auto* ap = app.add_subcommand("approx", "phase-type approximate analysis");
  add_model_options(ap, model);
  add_out(ap);

  auto* sim = app.add_subcommand("simulate", "slot-accurate protocol simulation");
  add_model_options(sim, model);
  sim->add_option("--slots", sim_params.total_slots, "simulated slots")
      ->capture_default_str();
  sim->add_option("--warmup", sim_params.warmup_slots, "warm-up slots excluded")
      ->capture_default_str();
  sim->add_option("--seed", sim_params.seed, "simulation seed")->capture_default_str();
  add_out(sim);

  auto* opt = app.add_subcommand("optimize", "policy search over pi in [0,1]^E");
  add_model_options(opt, model);
  opt->add_option("--metric", metric, "objective")
      ->check(CLI::IsMember({"avg-aoi", "avp", "throughput"}))
      ->capture_default_str();
  opt->add_option("--restarts", restarts, "multistart count")->capture_default_str();
  opt->add_option("--seed", opt_seed, "restart seed")->capture_default_str();
  add_out(opt);

  auto* sweep = app.add_subcommand("sweep", "evaluate metrics over a grid of U*alpha");
  add_model_options(sweep, model);
  sweep->add_option("--u-alpha", u_alpha_grid, "U*alpha grid points")
      ->delimiter(',')
      ->required();
  sweep->add_flag("--with-exact", with_exact, "include the exact average age");
  sweep->add_flag("--with-sim", with_sim, "include a simulation column");
  sweep->add_option("--slots", sim_params.total_slots, "simulated slots per point")
      ->capture_default_str();
  sweep->add_option("--seed", sim_params.seed, "simulation seed")->capture_default_str();
  add_out(sweep);

  auto* val =
      app.add_subcommand("validate", "run the approximate-vs-exact cross-check scenario");
  add_out(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (ss->parsed()) return run_steady_state(model, out);
    if (ex->parsed()) return run_exact(model, out);
    if (ap->parsed()) return run_approx(model, out);
    if (sim->parsed()) return run_simulate(model, sim_params, out);
    if (opt->parsed()) return run_optimize(model, metric, restarts, opt_seed, out);
    if (sweep->parsed())
      return run_sweep(model, u_alpha_grid, with_exact, with_sim, sim_params, out);
    if (val->parsed()) return run_validate(out);
  } catch (const aoi::StateSpaceCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStateSpace;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
