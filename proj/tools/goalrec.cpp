// goalrec command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "goalrec/experiment.hpp"
#include "goalrec/geoplanner.hpp"
#include "goalrec/gridmap.hpp"
#include "goalrec/quintic.hpp"
#include "goalrec/recognizer.hpp"
#include "goalrec/rng.hpp"
#include "goalrec/sim.hpp"
#include "goalrec/strips.hpp"
#include "goalrec/viaopt.hpp"

namespace {

using namespace goalrec;

struct Options {
  std::string map, scenario, domain, problem, hypotheses, observations;
  std::string out = "csv";
  std::string output;  // file, stdout when empty
  std::string trace;   // optimizer trace CSV
  int k = 1;
  int count = 8;
  std::uint64_t seed = 0;
  double vmax = 1.0;
  std::vector<double> fractions{0.3, 0.5, 0.7, 1.0};
  bool optimal_only = false;
  bool no_simplify = false;
  int start = 0;
  int goal = 1;
  std::vector<double> from, to;
  std::vector<std::string> inputs;
};

// Writes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

std::vector<gridmap::ScenarioPoint> scenario_for(const Options& o, const gridmap::OccupancyGrid& grid) {
  if (!o.scenario.empty()) return gridmap::load_scenario(o.scenario);
  return gridmap::sample_scenario_points(grid, o.count, o.seed);
}

experiment::ContinuousConfig continuous_config(const Options& o) {
  experiment::ContinuousConfig cfg;
  cfg.k = o.k;
  cfg.seed = o.seed;
  cfg.v_max = o.vmax;
  cfg.simplify = !o.no_simplify;
  return cfg;
}

bool discrete_mode(const Options& o) { return !o.domain.empty() || !o.problem.empty(); }

struct Discrete {
  strips::DomainModel domain;
  strips::GroundProblem problem;
};

Discrete load_discrete(const Options& o) {
  require(o.domain, "--domain");
  require(o.problem, "--problem");
  Discrete d;
  d.domain = strips::parse_domain(strips::read_text_file(o.domain));
  d.problem = strips::parse_problem(strips::read_text_file(o.problem), d.domain);
  return d;
}

void check_out(const Options& o) {
  if (o.out != "csv" && o.out != "json") throw ConfigError("--out must be csv or json");
}

// ---------------------------------------------------------------------------

int cmd_map_info(const Options& o) {
  require(o.map, "--map");
  check_out(o);
  const auto grid = gridmap::load_map(o.map);
  const std::size_t cells = static_cast<std::size_t>(grid.width()) * grid.height();
  Sink sink(o.output);
  if (o.out == "json") {
    nlohmann::ordered_json j;
    j["width"] = grid.width();
    j["height"] = grid.height();
    j["meters_per_cell"] = grid.meters_per_cell();
    j["world_width"] = grid.world_width();
    j["world_height"] = grid.world_height();
    j["obstacles"] = grid.obstacle_count();
    j["free_fraction"] = 1.0 - static_cast<double>(grid.obstacle_count()) / static_cast<double>(cells);
    sink.os() << j.dump(2) << '\n';
  } else {
    char buf[256];
    std::snprintf(buf, sizeof buf, "width,height,meters_per_cell,world_width,world_height,obstacles\n%d,%d,%.6f,%.6f,%.6f,%zu\n",
                  grid.width(), grid.height(), grid.meters_per_cell(), grid.world_width(),
                  grid.world_height(), grid.obstacle_count());
    sink.os() << buf;
  }
  return 0;
}

int cmd_sample_points(const Options& o) {
  require(o.map, "--map");
  const auto grid = gridmap::load_map(o.map);
  const auto pts = gridmap::sample_scenario_points(grid, o.count, o.seed);
  Sink sink(o.output);
  gridmap::write_scenario(sink.os(), pts);
  return 0;
}

int cmd_plan(const Options& o) {
  Sink sink(o.output);
  if (discrete_mode(o)) {
    const Discrete d = load_discrete(o);
    strips::TopkOptions opts;
    opts.optimal_only = o.optimal_only;
    const auto plans = strips::topk_plans(d.problem, d.problem.goal, o.k, opts);
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (plans.size() > 1) sink.os() << "; plan " << i + 1 << '\n';
      strips::write_plan(sink.os(), d.problem, plans[i]);
    }
    return 0;
  }
  require(o.map, "--map");
  const auto grid = gridmap::load_map(o.map);
  gridmap::Point2 a, b;
  if (o.from.size() == 2 && o.to.size() == 2) {
    a = {o.from[0], o.from[1]};
    b = {o.to[0], o.to[1]};
  } else {
    const auto pts = scenario_for(o, grid);
    if (o.start < 0 || o.goal < 0 || static_cast<std::size_t>(std::max(o.start, o.goal)) >= pts.size()) {
      throw ConfigError("--start/--goal out of range");
    }
    a = pts[static_cast<std::size_t>(o.start)].position();
    b = pts[static_cast<std::size_t>(o.goal)].position();
  }
  const auto cfg = continuous_config(o);
  geoplanner::PlannerConfig pcfg = cfg.planner;
  pcfg.rng_seed = o.seed;
  auto path = geoplanner::plan(grid, a, b, pcfg);
  if (cfg.simplify) path = geoplanner::simplify(path, grid, pcfg.clearance, pcfg.step_size);
  geoplanner::write_csv(sink.os(), path);
  return 0;
}

int cmd_bank_build(const Options& o) {
  Sink sink(o.output);
  if (discrete_mode(o)) {
    const Discrete d = load_discrete(o);
    require(o.hypotheses, "--hypotheses");
    const auto goals = strips::parse_hypotheses(strips::read_text_file(o.hypotheses), d.problem);
    if (goals.empty()) throw ConfigError("hypothesis file lists no goals");
    strips::TopkOptions opts;
    opts.optimal_only = o.optimal_only;
    for (std::size_t n = 0; n < goals.size(); ++n) {
      const auto plans = strips::topk_plans(d.problem, goals[n], o.k, opts);
      for (std::size_t i = 0; i < plans.size(); ++i) {
        sink.os() << "; goal g" << n << " plan " << i << '\n';
        strips::write_plan(sink.os(), d.problem, plans[i]);
      }
    }
    return 0;
  }
  require(o.map, "--map");
  const auto grid = gridmap::load_map(o.map);
  const auto pts = scenario_for(o, grid);
  if (o.start < 0 || static_cast<std::size_t>(o.start) >= pts.size()) throw ConfigError("--start out of range");
  const auto cfg = continuous_config(o);
  const auto s = static_cast<std::size_t>(o.start);

  std::vector<std::string> labels;
  std::vector<std::vector<std::vector<quintic::TimedState>>> entries;
  for (std::size_t g = 0; g < pts.size(); ++g) {
    if (g == s) continue;
    labels.push_back("g" + std::to_string(g));
    entries.push_back(experiment::build_goal_entry(grid, pts[s].position(), pts[g].position(), cfg,
                                                   derive_seed(cfg.seed, s, g)));
  }
  if (!o.trace.empty() && pts.size() > 1) {
    // Optimizer trace for the first bank path.
    const std::size_t g = s == 0 ? 1 : 0;
    geoplanner::PlannerConfig pcfg = cfg.planner;
    pcfg.rng_seed = geoplanner::path_seed(derive_seed(cfg.seed, s, g), 0);
    auto path = geoplanner::plan(grid, pts[s].position(), pts[g].position(), pcfg);
    if (cfg.simplify) path = geoplanner::simplify(path, grid, pcfg.clearance, pcfg.step_size);
    viaopt::OptConfig ocfg = cfg.optimizer;
    ocfg.v_max = cfg.v_max;
    ocfg.rng_seed = derive_seed(derive_seed(cfg.seed, s, g), 0, 1);
    std::ofstream tf(o.trace);
    viaopt::write_trace_csv(tf, viaopt::optimize_detailed(path, ocfg).trace);
  }
  experiment::write_bank_csv(sink.os(), recognizer::ContinuousBank(std::move(labels), std::move(entries)),
                             cfg.controller.dt);
  return 0;
}

int cmd_simulate(const Options& o) {
  require(o.map, "--map");
  const auto grid = gridmap::load_map(o.map);
  const auto pts = scenario_for(o, grid);
  if (o.start < 0 || o.goal < 0 || static_cast<std::size_t>(std::max(o.start, o.goal)) >= pts.size()) {
    throw ConfigError("--start/--goal out of range");
  }
  const auto cfg = continuous_config(o);
  const auto stream = experiment::simulate_agent(
      grid, pts[static_cast<std::size_t>(o.start)], pts[static_cast<std::size_t>(o.goal)].position(), cfg,
      derive_seed(cfg.seed, static_cast<std::uint64_t>(o.start), static_cast<std::uint64_t>(o.goal)));
  Sink sink(o.output);
  sim::write_stream_csv(sink.os(), stream);
  return 0;
}

int cmd_recognize(const Options& o) {
  require(o.hypotheses, "--hypotheses");
  require(o.observations, "--observations");
  Sink sink(o.output);
  if (discrete_mode(o)) {
    const Discrete d = load_discrete(o);
    const auto goals = strips::parse_hypotheses(strips::read_text_file(o.hypotheses), d.problem);
    if (goals.empty()) throw ConfigError("hypothesis file lists no goals");
    const auto actions = strips::parse_observations(strips::read_text_file(o.observations), d.problem);
    experiment::DiscreteConfig cfg;
    cfg.k = o.k;
    cfg.optimal_only = o.optimal_only;
    const auto bank = experiment::build_discrete_bank(d.problem, goals, cfg);
    const double fraction = o.fractions.empty() ? 1.0 : o.fractions.back();
    const auto stream = experiment::discrete_observations(d.problem, actions, fraction);
    if (stream.empty()) throw EmptyObservation("no observations in the selected prefix");
    recognizer::Session<strips::GroundState> session(bank);
    std::vector<recognizer::Posterior> history;
    std::vector<long> ts;
    for (const auto& ob : stream) {
      history.push_back(session.update(ob));
      ts.push_back(ob.t);
    }
    recognizer::write_history_csv(sink.os(), bank.goals(), ts, history);
    return 0;
  }
  auto bin = open_input(o.hypotheses);
  auto sin = open_input(o.observations);
  const auto stream = sim::read_stream_csv(sin);
  const auto bank = experiment::read_bank_csv(bin, stream.full.dt);
  const auto obs = stream.test_points();
  recognizer::Session<quintic::TimedState> session(bank);
  std::vector<recognizer::Posterior> history;
  std::vector<long> ts;
  for (const auto& ob : obs) {
    history.push_back(session.update(ob));
    ts.push_back(ob.t);
  }
  recognizer::write_history_csv(sink.os(), bank.goals(), ts, history);
  return 0;
}

void emit_rows(const Options& o, const std::vector<experiment::MetricsRow>& rows,
               const std::vector<std::pair<std::string, std::string>>& meta) {
  Sink sink(o.output);
  if (o.out == "json") {
    experiment::write_rows_json(sink.os(), rows, meta);
  } else {
    experiment::write_rows_csv(sink.os(), rows);
  }
  for (const auto& r : rows) {
    if (r.failed) std::cerr << "failed " << r.problem << ": " << r.error << '\n';
  }
}

int cmd_experiment_continuous(const Options& o) {
  require(o.map, "--map");
  check_out(o);
  const auto grid = gridmap::load_map(o.map);
  const auto pts = scenario_for(o, grid);
  const auto cfg = continuous_config(o);
  const auto rows = experiment::run_continuous_experiment(grid, pts, cfg);
  emit_rows(o, rows,
            {{"mode", "continuous"},
             {"map", o.map},
             {"k", std::to_string(o.k)},
             {"seed", std::to_string(o.seed)},
             {"v_max", std::to_string(o.vmax)},
             {"simplify", cfg.simplify ? "true" : "false"},
             {"ground_truth", "pure-pursuit unicycle controller over an RRT* path"}});
  return 0;
}

int cmd_experiment_discrete(const Options& o) {
  check_out(o);
  require(o.domain, "--domain");
  require(o.problem, "--problem");
  require(o.hypotheses, "--hypotheses");
  require(o.observations, "--observations");
  experiment::DiscreteProblemFiles files;
  files.id = o.problem.substr(o.problem.find_last_of('/') + 1);
  files.domain_text = strips::read_text_file(o.domain);
  files.problem_text = strips::read_text_file(o.problem);
  files.hypotheses_text = strips::read_text_file(o.hypotheses);
  files.observations_text = strips::read_text_file(o.observations);
  experiment::DiscreteConfig cfg;
  cfg.k = o.k;
  cfg.fractions = o.fractions;
  cfg.optimal_only = o.optimal_only;
  const auto rows = experiment::run_discrete_experiment(files, cfg);
  emit_rows(o, rows,
            {{"mode", "discrete"},
             {"domain", o.domain},
             {"k", std::to_string(o.k)},
             {"optimal_only", o.optimal_only ? "true" : "false"}});
  return 0;
}

int cmd_report(const Options& o) {
  check_out(o);
  if (o.inputs.empty()) throw ConfigError("report needs at least one experiment CSV");
  std::vector<experiment::MetricsRow> summary;
  for (const auto& path : o.inputs) {
    auto in = open_input(path);
    summary.push_back(experiment::aggregate(experiment::read_rows_csv(in), path));
  }
  emit_rows(o, summary, {{"mode", "report"}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal recognition with precomputed plan banks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--out", o.out, "Output format: csv or json");
    c->add_option("-o,--output", o.output, "Output file (default stdout)");
    c->add_option("--seed", o.seed, "Random seed");
  };
  auto continuous = [&](CLI::App* c) {
    c->add_option("--map", o.map, "Moving-AI .map file");
    c->add_option("--scenario", o.scenario, "Scenario file (x y theta per line)");
    c->add_option("--points", o.count, "Points to sample when no scenario is given");
    c->add_option("--vmax", o.vmax, "Speed bound (m/s)");
    c->add_option("--k", o.k, "Trajectories per goal");
    c->add_flag("--no-simplify", o.no_simplify, "Keep raw RRT* paths");
  };
  auto discrete = [&](CLI::App* c) {
    c->add_option("--domain", o.domain, "PDDL domain");
    c->add_option("--problem", o.problem, "PDDL problem");
    c->add_option("--hypotheses", o.hypotheses, "Goal hypotheses (discrete) or bank CSV (continuous)");
    c->add_option("--observations", o.observations, "Observed actions (discrete) or stream CSV (continuous)");
    c->add_flag("--optimal-only", o.optimal_only, "Keep only optimal-cost plans");
  };

  auto* map_info = app.add_subcommand("map-info", "Summarize a map");
  common(map_info);
  map_info->add_option("--map", o.map, "Moving-AI .map file")->required();

  auto* sample = app.add_subcommand("sample-points", "Sample scenario points");
  common(sample);
  sample->add_option("--map", o.map, "Moving-AI .map file")->required();
  sample->add_option("--count", o.count, "Number of points");

  auto* plan = app.add_subcommand("plan", "Plan a path (map) or top-k plans (PDDL)");
  common(plan);
  continuous(plan);
  discrete(plan);
  plan->add_option("--start", o.start, "Scenario index of the start");
  plan->add_option("--goal", o.goal, "Scenario index of the goal");
  plan->add_option("--from", o.from, "Start x y")->expected(2);
  plan->add_option("--to", o.to, "Goal x y")->expected(2);

  auto* bank = app.add_subcommand("bank-build", "Precompute the hypothesis bank");
  common(bank);
  continuous(bank);
  discrete(bank);
  bank->add_option("--start", o.start, "Scenario index of the start");
  bank->add_option("--trace", o.trace, "Write an optimizer trace CSV");

  auto* simulate = app.add_subcommand("simulate", "Generate a ground-truth observation stream");
  common(simulate);
  continuous(simulate);
  simulate->add_option("--start", o.start, "Scenario index of the start");
  simulate->add_option("--goal", o.goal, "Scenario index of the goal");

  auto* recognize = app.add_subcommand("recognize", "Online recognition, posterior history CSV");
  common(recognize);
  continuous(recognize);
  discrete(recognize);
  recognize->add_option("--fractions", o.fractions, "Observed prefix (discrete, last value used)")->delimiter(',');

  auto* exp_c = app.add_subcommand("experiment-continuous", "All ordered scenario pairs");
  common(exp_c);
  continuous(exp_c);

  auto* exp_d = app.add_subcommand("experiment-discrete", "One PDDL problem at several fractions");
  common(exp_d);
  discrete(exp_d);
  exp_d->add_option("--k", o.k, "Plans per goal");
  exp_d->add_option("--fractions", o.fractions, "Observation fractions")->delimiter(',');

  auto* report = app.add_subcommand("report", "Aggregate experiment CSVs");
  common(report);
  report->add_option("inputs", o.inputs, "Experiment CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*map_info) return cmd_map_info(o);
    if (*sample) return cmd_sample_points(o);
    if (*plan) return cmd_plan(o);
    if (*bank) return cmd_bank_build(o);
    if (*simulate) return cmd_simulate(o);
    if (*recognize) return cmd_recognize(o);
    if (*exp_c) return cmd_experiment_continuous(o);
    if (*exp_d) return cmd_experiment_discrete(o);
    if (*report) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
