#include "goalrec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "goalrec/instrumentation.hpp"
#include "goalrec/rng.hpp"

namespace goalrec::experiment {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs the update loop `reps` times on fresh sessions. Returns the posteriors
// of the last repetition and the median loop time.
template <typename State>
std::pair<std::vector<recognizer::Posterior>, double> timed_recognition(
    const recognizer::HypothesisBank<State>& bank,
    const std::vector<recognizer::Observation<State>>& stream, int reps) {
  if (stream.empty()) throw EmptyObservation("observation stream is empty");
  std::vector<double> times;
  std::vector<recognizer::Posterior> history;
  for (int r = 0; r < std::max(1, reps); ++r) {
    history.clear();
    recognizer::Session<State> session(bank);
    double total = 0.0;
    for (const auto& o : stream) {
      const auto t0 = Clock::now();
      auto post = session.update(o);
      total += seconds_since(t0);
      history.push_back(std::move(post));
    }
    times.push_back(total);
  }
  return {std::move(history), median(std::move(times))};
}

constexpr std::uint64_t kTruthStream = 0x7275746800000000ULL;

}  // namespace

MetricsRow compute_metrics(const std::vector<recognizer::Posterior>& posteriors,
                           std::size_t true_goal) {
  if (posteriors.empty()) throw PreconditionError("metrics need at least one observation point");
  MetricsRow row;
  for (const auto& post : posteriors) {
    const auto ties = post.tie_set();
    const std::size_t goals = post.probabilities.size();
    const bool hit = std::find(ties.begin(), ties.end(), true_goal) != ties.end();
    const std::size_t false_pos = ties.size() - (hit ? 1 : 0);
    const std::size_t false_neg = hit ? 0 : 1;
    row.ppv += hit ? 1.0 / static_cast<double>(ties.size()) : 0.0;
    row.acc += static_cast<double>(goals - false_pos - false_neg) / static_cast<double>(goals);
    row.spr += static_cast<double>(ties.size());
  }
  const double n = static_cast<double>(posteriors.size());
  row.ppv *= 100.0 / n;
  row.acc *= 100.0 / n;
  row.spr /= n;
  return row;
}

MetricsRow aggregate(const std::vector<MetricsRow>& rows, const std::string& label) {
  MetricsRow out;
  out.problem = label;
  double pc = 0.0;
  std::size_t ok = 0;
  for (const auto& r : rows) {
    if (r.failed) {
      out.failed += 1;
      continue;
    }
    ++ok;
    out.ppv += r.ppv;
    out.acc += r.acc;
    out.spr += r.spr;
    pc += static_cast<double>(r.pc);
    out.online_s += r.online_s;
    out.offline_s += r.offline_s;
  }
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    out.ppv /= n;
    out.acc /= n;
    out.spr /= n;
    out.online_s /= n;
    out.offline_s /= n;
    out.pc = std::lround(pc / n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuous

std::vector<std::vector<quintic::TimedState>> build_goal_entry(
    const gridmap::OccupancyGrid& grid, gridmap::Point2 start, gridmap::Point2 goal,
    const ContinuousConfig& cfg, std::uint64_t seed) {
  geoplanner::PlannerConfig pcfg = cfg.planner;
  pcfg.rng_seed = seed;
  const auto paths = geoplanner::plan_k(grid, start, goal, pcfg, cfg.k);
  std::vector<std::vector<quintic::TimedState>> entry;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    geoplanner::PositionPath path =
        cfg.simplify ? geoplanner::simplify(paths[i], grid, pcfg.clearance, pcfg.step_size) : paths[i];
    if (cfg.via_spacing > 0.0) path = geoplanner::densify(path, cfg.via_spacing);
    if (path.waypoints.size() < 2) {
      entry.push_back({{path.waypoints.front().x, path.waypoints.front().y, 0.0, 0.0, 0}});
      continue;
    }
    viaopt::OptConfig ocfg = cfg.optimizer;
    ocfg.v_max = cfg.v_max;
    ocfg.rng_seed = derive_seed(seed, i, 1);
    const auto via = viaopt::optimize(path, ocfg);
    entry.push_back(quintic::synthesize(via, cfg.controller.dt).samples);
  }
  return entry;
}

sim::ObservationStream simulate_agent(const gridmap::OccupancyGrid& grid,
                                      const gridmap::ScenarioPoint& start,
                                      gridmap::Point2 goal, const ContinuousConfig& cfg,
                                      std::uint64_t seed) {
  geoplanner::PlannerConfig pcfg = cfg.truth_planner;
  pcfg.rng_seed = seed;
  geoplanner::PositionPath path = geoplanner::plan(grid, start.position(), goal, pcfg);
  if (cfg.simplify) path = geoplanner::simplify(path, grid, pcfg.clearance, pcfg.step_size);
  sim::ControllerConfig ccfg = cfg.controller;
  ccfg.v_max = cfg.v_max;
  return sim::follow_path(grid, path, start.theta, ccfg);
}

MetricsRow run_continuous_problem(const gridmap::OccupancyGrid& grid,
                                  const std::vector<gridmap::ScenarioPoint>& points,
                                  std::size_t start, std::size_t goal,
                                  const ContinuousConfig& cfg, ContinuousProblem* detail) {
  MetricsRow row;
  row.problem = "s" + std::to_string(start) + "-g" + std::to_string(goal);
  std::optional<std::uint64_t> bank_before;
  try {
    if (cfg.k < 1) throw ConfigError("k must be at least 1");
    std::vector<std::size_t> goal_ids;
    std::size_t true_goal = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == start) continue;
      if (j == goal) true_goal = goal_ids.size();
      goal_ids.push_back(j);
    }

    const sim::ObservationStream stream =
        simulate_agent(grid, points[start], points[goal].position(), cfg,
                       derive_seed(cfg.seed ^ kTruthStream, start, goal));

    // Offline: only bank construction counts toward PC and offline time.
    const auto t0 = Clock::now();
    bank_before = PlannerCalls::count();
    std::vector<std::string> labels;
    std::vector<std::vector<std::vector<quintic::TimedState>>> entries;
    for (std::size_t n = 0; n < goal_ids.size(); ++n) {
      labels.push_back("g" + std::to_string(goal_ids[n]));
      entries.push_back(build_goal_entry(grid, points[start].position(),
                                         points[goal_ids[n]].position(), cfg,
                                         derive_seed(cfg.seed, start, goal_ids[n])));
    }
    recognizer::ContinuousBank bank(std::move(labels), std::move(entries));
    row.pc = static_cast<long>(PlannerCalls::count() - *bank_before);
    row.offline_s = seconds_since(t0);

    const std::uint64_t online_before = PlannerCalls::count();
    auto [posteriors, online] = timed_recognition(bank, stream.test_points(), cfg.timing_repetitions);
    row.online_pc = static_cast<long>(PlannerCalls::count() - online_before);
    row.online_s = online;

    const MetricsRow m = compute_metrics(posteriors, true_goal);
    row.ppv = m.ppv;
    row.acc = m.acc;
    row.spr = m.spr;
    if (detail != nullptr) {
      detail->start = start;
      detail->goal = goal;
      detail->goal_ids = std::move(goal_ids);
      detail->true_goal = true_goal;
      detail->stream = stream;
      detail->posteriors = std::move(posteriors);
      detail->bank = std::move(bank);
    }
  } catch (const std::exception& e) {
    row.failed = 1;
    row.error = e.what();
    if (bank_before && row.pc == 0) row.pc = static_cast<long>(PlannerCalls::count() - *bank_before);
  }
  return row;
}

std::vector<MetricsRow> run_continuous_experiment(
    const gridmap::OccupancyGrid& grid, const std::vector<gridmap::ScenarioPoint>& points,
    const ContinuousConfig& cfg, std::vector<ContinuousProblem>* details) {
  if (points.size() < 2) throw ConfigError("need at least two scenario points");
  if (cfg.k < 1) throw ConfigError("k must be at least 1");
  std::vector<MetricsRow> rows;
  for (std::size_t s = 0; s < points.size(); ++s) {
    for (std::size_t g = 0; g < points.size(); ++g) {
      if (s == g) continue;
      ContinuousProblem detail;
      rows.push_back(run_continuous_problem(grid, points, s, g, cfg, details ? &detail : nullptr));
      if (details != nullptr) details->push_back(std::move(detail));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Discrete

recognizer::DiscreteBank build_discrete_bank(const strips::GroundProblem& problem,
                                             const std::vector<strips::GroundState>& goals,
                                             const DiscreteConfig& cfg) {
  strips::TopkOptions opts = cfg.topk;
  opts.optimal_only = cfg.optimal_only;
  std::vector<std::string> labels;
  std::vector<std::vector<strips::StateTrajectory>> entries;
  for (std::size_t n = 0; n < goals.size(); ++n) {
    labels.push_back("g" + std::to_string(n));
    std::vector<strips::StateTrajectory> trajs;
    for (const auto& plan : strips::topk_plans(problem, goals[n], cfg.k, opts)) {
      trajs.push_back(strips::rollout(problem, plan));
    }
    entries.push_back(std::move(trajs));
  }
  return recognizer::DiscreteBank(std::move(labels), std::move(entries));
}

std::vector<recognizer::Observation<strips::GroundState>> discrete_observations(
    const strips::GroundProblem& problem, const std::vector<int>& actions, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("fractions must lie in (0, 1]");
  const auto m = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(actions.size()) - 1e-9));
  const auto states = strips::observed_states(
      problem, std::span<const int>(actions.data(), std::min(m, actions.size())));
  std::vector<recognizer::Observation<strips::GroundState>> out;
  for (std::size_t j = 0; j < states.size(); ++j) out.push_back({states[j], static_cast<long>(j + 1)});
  return out;
}

std::vector<MetricsRow> run_discrete_experiment(const DiscreteProblemFiles& files,
                                                const DiscreteConfig& cfg) {
  std::vector<MetricsRow> rows;
  auto label = [&](double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "@%.2f", f);
    return files.id + buf;
  };
  for (double f : cfg.fractions) {
    if (!(f > 0.0) || f > 1.0) throw ConfigError("fractions must lie in (0, 1]");
  }
  if (cfg.k < 1) throw ConfigError("k must be at least 1");

  strips::GroundProblem problem;
  std::vector<strips::GroundState> goals;
  std::vector<int> actions;
  std::size_t true_goal = 0;
  recognizer::DiscreteBank bank;
  long pc = 0;
  double offline = 0.0;
  try {
    const strips::DomainModel domain = strips::parse_domain(files.domain_text);
    problem = strips::parse_problem(files.problem_text, domain);
    goals = strips::parse_hypotheses(files.hypotheses_text, problem);
    if (goals.empty()) throw ConfigError("hypothesis file lists no goals");
    actions = strips::parse_observations(files.observations_text, problem);

    auto it = std::find(goals.begin(), goals.end(), problem.goal);
    if (it != goals.end()) {
      true_goal = static_cast<std::size_t>(it - goals.begin());
    } else {
      const auto states = strips::observed_states(problem, actions);
      const strips::GroundState& last = states.empty() ? problem.init : states.back();
      std::vector<std::size_t> sat;
      for (std::size_t n = 0; n < goals.size(); ++n) {
        if (strips::satisfies(last, goals[n])) sat.push_back(n);
      }
      if (sat.size() != 1) throw ConfigError("cannot identify the true goal among the hypotheses");
      true_goal = sat.front();
    }

    const auto t0 = Clock::now();
    const std::uint64_t before = PlannerCalls::count();
    bank = build_discrete_bank(problem, goals, cfg);
    pc = static_cast<long>(PlannerCalls::count() - before);
    offline = seconds_since(t0);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    for (double f : cfg.fractions) {
      MetricsRow row;
      row.problem = label(f);
      row.failed = 1;
      row.error = e.what();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  for (double f : cfg.fractions) {
    MetricsRow row;
    row.problem = label(f);
    row.pc = pc;
    row.offline_s = offline;
    try {
      const auto stream = discrete_observations(problem, actions, f);
      const std::uint64_t before = PlannerCalls::count();
      auto [posteriors, online] = timed_recognition(bank, stream, cfg.timing_repetitions);
      row.online_pc = static_cast<long>(PlannerCalls::count() - before);
      row.online_s = online;
      const MetricsRow m = compute_metrics({posteriors.back()}, true_goal);
      row.ppv = m.ppv;
      row.acc = m.acc;
      row.spr = m.spr;
    } catch (const std::exception& e) {
      row.failed = 1;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Output

void write_bank_csv(std::ostream& os, const recognizer::ContinuousBank& bank, double dt) {
  os << "goal,traj,t,x,y,vx,vy\n";
  char buf[200];
  for (std::size_t n = 0; n < bank.size(); ++n) {
    const auto& trajs = bank.trajectories(n);
    for (std::size_t j = 0; j < trajs.size(); ++j) {
      for (const auto& s : trajs[j]) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.17g,%.17g,%.17g,%.17g\n",
                      bank.goals()[n].c_str(), j, static_cast<double>(s.t) * dt, s.x, s.y, s.vx, s.vy);
        os << buf;
      }
    }
  }
}

recognizer::ContinuousBank read_bank_csv(std::istream& is, double dt) {
  std::string line;
  if (!std::getline(is, line) || line != "goal,traj,t,x,y,vx,vy") {
    throw ParseError("expected header goal,traj,t,x,y,vx,vy", 1);
  }
  std::vector<std::string> goals;
  std::vector<std::vector<std::vector<quintic::TimedState>>> entries;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 7 columns", line_no);
    const std::string goal = line.substr(0, comma);
    unsigned long traj = 0;
    double t = 0, x = 0, y = 0, vx = 0, vy = 0;
    if (std::sscanf(line.c_str() + comma + 1, "%lu,%lf,%lf,%lf,%lf,%lf", &traj, &t, &x, &y, &vx, &vy) != 6) {
      throw ParseError("expected 7 columns", line_no);
    }
    if (goals.empty() || goals.back() != goal) {
      if (std::find(goals.begin(), goals.end(), goal) != goals.end()) {
        throw ParseError("rows of goal " + goal + " are not contiguous", line_no);
      }
      goals.push_back(goal);
      entries.emplace_back();
    }
    auto& entry = entries.back();
    if (traj == entry.size()) entry.emplace_back();
    if (traj + 1 != entry.size()) throw ParseError("trajectory index out of order", line_no);
    entry.back().push_back({x, y, vx, vy, std::lround(t / dt)});
  }
  if (goals.empty()) throw ParseError("bank has no rows", line_no);
  return recognizer::ContinuousBank(std::move(goals), std::move(entries));
}

void write_rows_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "problem,ppv,acc,spr,pc,online_s,offline_s,failed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%ld,%.6e,%.6e,%d\n", r.problem.c_str(),
                  r.ppv, r.acc, r.spr, r.pc, r.online_s, r.offline_s, r.failed);
    os << buf;
  }
}

void write_rows_json(std::ostream& os, const std::vector<MetricsRow>& rows,
                     const std::vector<std::pair<std::string, std::string>>& metadata) {
  nlohmann::ordered_json doc;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metadata) doc["metadata"][k] = v;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["problem"] = r.problem;
    j["ppv"] = r.ppv;
    j["acc"] = r.acc;
    j["spr"] = r.spr;
    j["pc"] = r.pc;
    j["online_s"] = r.online_s;
    j["offline_s"] = r.offline_s;
    j["failed"] = r.failed;
    j["online_pc"] = r.online_pc;
    if (!r.error.empty()) j["error"] = r.error;
    doc["rows"].push_back(std::move(j));
  }
  os << doc.dump(2) << '\n';
}

std::vector<MetricsRow> read_rows_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("problem,ppv,acc,spr,pc,online_s,offline_s,failed", 0) != 0) {
    throw ParseError("missing experiment CSV header", 1);
  }
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ParseError("expected 8 columns", line_no);
    MetricsRow r;
    try {
      r.problem = f[0];
      r.ppv = std::stod(f[1]);
      r.acc = std::stod(f[2]);
      r.spr = std::stod(f[3]);
      r.pc = std::stol(f[4]);
      r.online_s = std::stod(f[5]);
      r.offline_s = std::stod(f[6]);
      r.failed = std::stoi(f[7]);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace goalrec::experiment
