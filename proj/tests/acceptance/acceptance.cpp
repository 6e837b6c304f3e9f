// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <algorithm>
#include <array>
#include <bitset>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../common/plan_oracle.hpp"
#include "goalrec/experiment.hpp"
#include "goalrec/instrumentation.hpp"
#include "goalrec/quintic.hpp"
#include "goalrec/recognizer.hpp"
#include "goalrec/strips.hpp"

using namespace goalrec;

namespace {

std::string g_data;  // tests/data
std::string g_cli;   // goalrec executable

std::string data(const std::string& name) { return g_data + "/" + name; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Shared continuous run: 8 sampled points on the light map, k = 1.
struct ContinuousRun {
  std::vector<experiment::MetricsRow> rows;
  std::vector<experiment::ContinuousProblem> details;
  gridmap::OccupancyGrid grid = gridmap::load_map(data("light.map"));
  experiment::ContinuousConfig cfg;
};

ContinuousRun& continuous_run() {
  static ContinuousRun run = [] {
    ContinuousRun r;
    r.cfg.k = 1;
    r.cfg.seed = 1;
    const auto pts = gridmap::sample_scenario_points(r.grid, 8, 1);
    r.rows = experiment::run_continuous_experiment(r.grid, pts, r.cfg, &r.details);
    return r;
  }();
  return run;
}

Outcome planner_calls() {
  const auto& run = continuous_run();
  bool ok = run.rows.size() == 56;
  long bad = 0, failed = 0, online = 0;
  for (const auto& r : run.rows) {
    if (r.failed) ++failed;
    if (r.pc != 7) ++bad;
    online += r.online_pc;
  }
  ok = ok && bad == 0 && failed == 0 && online == 0;
  return {ok, fmt("%.0f problems, %.0f with PC != 7, %.0f failed, online PC total %.0f",
                  static_cast<double>(run.rows.size()), static_cast<double>(bad),
                  static_cast<double>(failed), static_cast<double>(online))};
}

Outcome online_speed() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<std::string> goals;
  std::vector<std::vector<std::vector<quintic::TimedState>>> trajs(7);
  for (int g = 0; g < 7; ++g) {
    goals.push_back("g" + std::to_string(g));
    for (int j = 0; j < 20; ++j) {
      std::vector<quintic::TimedState> tr;
      for (long i = 0; i < 1200; ++i) tr.push_back({u(rng), u(rng), 0, 0, i});
      trajs[g].push_back(std::move(tr));
    }
  }
  const recognizer::ContinuousBank bank(goals, trajs);
  double worst = 0.0, total = 0.0;
  int updates = 0;
  for (int rep = 0; rep < 20; ++rep) {
    recognizer::Session<quintic::TimedState> s(bank);
    for (long t = 100; t < 1200; t += 170) {
      const quintic::TimedState obs{u(rng), u(rng), 0, 0, t};
      const auto t0 = std::chrono::steady_clock::now();
      const auto post = s.update({obs, t});
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (post.probabilities.size() != 7) return {false, "bad posterior size"};
      worst = std::max(worst, dt);
      total += dt;
      ++updates;
    }
  }
  return {worst < 0.010, fmt("slowest of %.0f updates %.3e s, mean %.3e s (gate 1e-2 s)",
                             static_cast<double>(updates), worst, total / updates)};
}

Outcome quintic_suite() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-10, 10), vel(-2, 2), acc(-5, 5), dur(0.1, 10), unit(0.01, 0.99);
  double worst_res = 0.0, worst_fd = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const quintic::ViaPoint a{pos(rng), pos(rng), vel(rng), vel(rng), acc(rng), acc(rng), dur(rng)};
    const quintic::ViaPoint b{pos(rng), pos(rng), vel(rng), vel(rng), acc(rng), acc(rng), 0.0};
    const auto seg = quintic::segment_coeffs(a, b);
    const auto s0 = quintic::eval_segment(seg, 0.0);
    const auto s1 = quintic::eval_segment(seg, a.td);
    // Residuals relative to the magnitude of the boundary value.
    auto rel = [](double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); };
    for (double r : {rel(s0.x, a.x), rel(s0.y, a.y), rel(s0.vx, a.vx), rel(s0.vy, a.vy), rel(s0.ax, a.ax),
                     rel(s0.ay, a.ay), rel(s1.x, b.x), rel(s1.y, b.y), rel(s1.vx, b.vx), rel(s1.vy, b.vy),
                     rel(s1.ax, b.ax), rel(s1.ay, b.ay)}) {
      worst_res = std::max(worst_res, r);
    }
    if (i < 1000) {
      // Five-point central difference with a step scaled to the segment, so
      // the truncation error stays far below the tolerance on short segments.
      const double h = 1e-3 * a.td;
      const double t = std::clamp(unit(rng) * a.td, 2 * h, a.td - 2 * h);
      const auto m2 = quintic::eval_segment(seg, t - 2 * h), m1 = quintic::eval_segment(seg, t - h);
      const auto p1 = quintic::eval_segment(seg, t + h), p2 = quintic::eval_segment(seg, t + 2 * h);
      const auto c = quintic::eval_segment(seg, t);
      auto d = [h](double fm2, double fm1, double fp1, double fp2) {
        return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
      };
      for (double e : {d(m2.x, m1.x, p1.x, p2.x) - c.vx, d(m2.y, m1.y, p1.y, p2.y) - c.vy,
                       d(m2.vx, m1.vx, p1.vx, p2.vx) - c.ax, d(m2.vy, m1.vy, p1.vy, p2.vy) - c.ay}) {
        worst_fd = std::max(worst_fd, std::abs(e));
      }
    }
  }
  const auto c = quintic::axis_coeffs(0, 0, 0, 1, 0, 0, 1);
  const std::array<double, 6> want{0, 0, 0, 10, -15, 6};
  double coeff_err = 0.0;
  for (int i = 0; i < 6; ++i) coeff_err = std::max(coeff_err, std::abs(c[i] - want[i]));
  const bool ok = worst_res < 1e-8 && worst_fd < 1e-6 && coeff_err < 1e-12;
  return {ok, fmt("max residual %.2e, max finite-difference gap %.2e, rest-to-rest coefficient error %.1e",
                  worst_res, worst_fd, coeff_err)};
}

Outcome inference_arithmetic() {
  const double l1 = recognizer::likelihood_from_mean(1.0);
  const recognizer::ContinuousBank worked({"g1", "g2"}, {{{{0, 0, 0, 0, 0}}}, {{{1, 0, 0, 0, 0}}}});
  recognizer::Session<quintic::TimedState> s(worked);
  const auto post = s.update({{0, 0, 0, 0, 0}, 0});
  const double perr = std::max(std::abs(post.probabilities[0] - 0.6127), std::abs(post.probabilities[1] - 0.3873));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  for (int stream = 0; stream < 1000; ++stream) {
    const int goals = 2 + stream % 6, k = 1 + stream % 4;
    std::vector<std::string> labels;
    std::vector<std::vector<std::vector<quintic::TimedState>>> trajs(goals);
    for (int g = 0; g < goals; ++g) {
      labels.push_back("g" + std::to_string(g));
      for (int j = 0; j < k; ++j) {
        const long n = 5 + static_cast<long>(rng() % 60);
        std::vector<quintic::TimedState> tr;
        for (long i = 0; i < n; ++i) tr.push_back({u(rng), u(rng), 0, 0, i});
        trajs[g].push_back(std::move(tr));
      }
    }
    const recognizer::ContinuousBank bank(labels, trajs);
    recognizer::Session<quintic::TimedState> session(bank);
    std::vector<recognizer::Observation<quintic::TimedState>> obs;
    long t = 0;
    for (int i = 0; i < 6; ++i) {
      t += 1 + static_cast<long>(rng() % 12);
      obs.push_back({{u(rng), u(rng), 0, 0, t}, t});
      const auto inc = session.update(obs.back());
      const auto bat = recognizer::batch_posterior<quintic::TimedState>(bank, obs);
      for (int g = 0; g < goals; ++g) worst = std::max(worst, std::abs(inc.probabilities[g] - bat.probabilities[g]));
    }
  }
  const bool ok = std::abs(l1 - 0.632121) <= 1e-6 && perr <= 1e-4 && worst <= 1e-12;
  return {ok, fmt("L(1) = %.7f, worked posterior (%.5f, %.5f), incremental vs batch max gap %.2e", l1,
                  post.probabilities[0], post.probabilities[1], worst)};
}

std::size_t reachable_states(const strips::GroundProblem& p) {
  std::vector<strips::GroundState> seen{p.init}, queue{p.init};
  std::sort(seen.begin(), seen.end());
  std::vector<strips::GroundState> all{p.init};
  std::size_t head = 0;
  std::vector<strips::GroundState> visited{p.init};
  while (head < visited.size()) {
    const auto s = visited[head++];
    for (int a : strips::applicable_actions(p, s)) {
      auto n = strips::apply(s, p.actions[a]);
      if (std::find(visited.begin(), visited.end(), n) == visited.end()) visited.push_back(std::move(n));
    }
  }
  return visited.size();
}

Outcome discrete_oracle() {
  int checks = 0, mismatches = 0, invalid = 0;
  std::size_t largest = 0;
  for (const std::string name : {"blocksworld", "grid", "gripper"}) {
    const auto dom = strips::parse_domain(strips::read_text_file(data("pddl/" + name + "-domain.pddl")));
    const auto p = strips::parse_problem(strips::read_text_file(data("pddl/" + name + "-problem.pddl")), dom);
    largest = std::max(largest, reachable_states(p));
    auto goals = strips::parse_hypotheses(strips::read_text_file(data("pddl/" + name + "-hyps.txt")), p);
    goals.push_back(p.goal);
    for (const auto& goal : goals) {
      for (int k : {1, 2, 5}) {
        const auto plans = strips::topk_plans(p, goal, k);
        std::vector<std::size_t> costs;
        for (const auto& pl : plans) {
          costs.push_back(pl.cost());
          try {
            if (!strips::satisfies(strips::rollout(p, pl).back(), goal)) ++invalid;
          } catch (const Error&) {
            ++invalid;
          }
        }
        ++checks;
        if (costs != oracle::cheapest_costs(p, goal, k)) ++mismatches;
      }
    }
  }
  const bool ok = mismatches == 0 && invalid == 0 && largest <= 100000;
  return {ok, fmt("3 domains, %.0f (goal, k) cases, %.0f cost mismatches, %.0f invalid plans, largest state space %.0f",
                  checks, mismatches, invalid, static_cast<double>(largest))};
}

Outcome symmetric_difference() {
  std::mt19937_64 rng(6);
  int wrong = 0;
  for (int i = 0; i < 10000; ++i) {
    std::bitset<128> a, b;
    strips::GroundState sa, sb;
    const double pa = (rng() % 100) / 100.0, pb = (rng() % 100) / 100.0;
    std::uniform_real_distribution<double> u(0, 1);
    for (int f = 0; f < 128; ++f) {
      if (u(rng) < pa) a.set(f), sa.push_back(f);
      if (u(rng) < pb) b.set(f), sb.push_back(f);
    }
    const double want = std::sqrt(static_cast<double>((a ^ b).count()));
    if (recognizer::euclid_discrete(sa, sb) != want) ++wrong;
  }
  return {wrong == 0, fmt("10000 pairs, %.0f mismatches", wrong)};
}

// Side of the central block a trajectory passes: -1 low y, +1 high y.
int corridor(const std::vector<quintic::TimedState>& tr) {
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    if ((tr[i].x - 5.0) * (tr[i + 1].x - 5.0) <= 0.0) return tr[i].y < 5.0 ? -1 : 1;
  }
  return 0;
}

Outcome multi_solution() {
  const auto grid = gridmap::load_map(data("two_corridor.map"));
  const auto pts = gridmap::load_scenario(data("two_corridor.scen"));
  double ppv1 = 0.0, ppv5 = 0.0;
  int opposite = 0, failed = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    experiment::ContinuousConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.k = 1;
    experiment::ContinuousProblem d1;
    const auto r1 = experiment::run_continuous_problem(grid, pts, 0, 1, cfg, &d1);
    cfg.k = 5;
    const auto r5 = experiment::run_continuous_problem(grid, pts, 0, 1, cfg);
    if (r1.failed || r5.failed) {
      ++failed;
      continue;
    }
    ppv1 += r1.ppv;
    ppv5 += r5.ppv;
    const int agent = corridor(d1.stream.full.samples);
    const int bank = corridor(d1.bank.trajectories(d1.true_goal)[0]);
    if (agent != bank) ++opposite;
  }
  const int ok_runs = seeds - failed;
  if (ok_runs == 0) return {false, "every run failed"};
  ppv1 /= ok_runs;
  ppv5 /= ok_runs;
  const double rate = 100.0 * opposite / ok_runs;
  const bool ok = failed == 0 && rate >= 25.0 && ppv5 >= ppv1 + 10.0;
  return {ok, fmt("PPV k=1 %.1f, k=5 %.1f, opposite-corridor rate %.0f%%, failed %.0f", ppv1, ppv5, rate, failed)};
}

Outcome convergence() {
  const auto grid = gridmap::load_map(data("light.map"));
  int rising = 0, correct = 0, failed = 0;
  const int problems = 20;
  for (int s = 1; s <= problems; ++s) {
    experiment::ContinuousConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(100 + s);
    const auto pts = gridmap::sample_scenario_points(grid, 8, cfg.seed);
    experiment::ContinuousProblem d;
    const auto row = experiment::run_continuous_problem(grid, pts, 0, 1, cfg, &d);
    if (row.failed) {
      ++failed;
      continue;
    }
    const double first = d.posteriors.front().probabilities[d.true_goal];
    const double last = d.posteriors.back().probabilities[d.true_goal];
    if (last > first) ++rising;
    if (d.posteriors.back().argmax == d.true_goal) ++correct;
  }
  const double rise = 100.0 * rising / problems, acc = 100.0 * correct / problems;
  const bool ok = rise >= 90.0 && acc >= 80.0;
  return {ok, fmt("P(true | o6) > P(true | o1) in %.0f%%, final argmax correct in %.0f%%, failed %.0f", rise, acc,
                  failed)};
}

Outcome simulator_constraints() {
  const auto& run = continuous_run();
  const auto& ctl = run.cfg.controller;
  int speed = 0, clearance = 0, spacing = 0;
  for (const auto& d : run.details) {
    const auto& xs = d.stream.full.samples;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (std::hypot(xs[i + 1].x - xs[i].x, xs[i + 1].y - xs[i].y) / ctl.dt > ctl.v_max + 1e-6) ++speed;
    }
    for (const auto& p : xs) {
      if (run.grid.wall_distance(p.x, p.y) < ctl.wall_lim - 1e-6) ++clearance;
    }
    const double tf = d.stream.tf();
    for (std::size_t i = 0; i < d.stream.test_indices.size(); ++i) {
      const double t = static_cast<double>(d.stream.test_indices[i]) * ctl.dt;
      if (std::abs(t - static_cast<double>(i + 1) * tf / 7.0) > ctl.dt + 1e-9) ++spacing;
    }
  }
  const bool ok = !run.details.empty() && speed == 0 && clearance == 0 && spacing == 0;
  return {ok, fmt("%.0f streams, violations: speed %.0f, clearance %.0f, test-point spacing %.0f",
                  static_cast<double>(run.details.size()), speed, clearance, spacing)};
}

std::string masked_csv(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() == 8) cells[5] = cells[6] = "*";
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

Outcome determinism() {
  const std::string base = g_cli + " experiment-continuous --map " + data("light.map") + " --seed 7 --k 1 --out csv";
  const std::string a = "acceptance_run_a.csv", b = "acceptance_run_b.csv";
  if (std::system((base + " -o " + a).c_str()) != 0 || std::system((base + " -o " + b).c_str()) != 0) {
    return {false, "CLI run failed"};
  }
  const auto ma = masked_csv(a), mb = masked_csv(b);
  const auto lines = std::count(ma.begin(), ma.end(), '\n');
  return {!ma.empty() && ma == mb, fmt("two CLI runs, %.0f lines each, identical with timing masked: ",
                                       static_cast<double>(lines)) +
                                       (ma == mb ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: goalrec_acceptance <tests/data dir> <goalrec cli>\n");
    return 2;
  }
  g_data = argv[1];
  g_cli = argv[2];
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"planner-call invariant", planner_calls},
      {"online update speed", online_speed},
      {"quintic correctness", quintic_suite},
      {"inference arithmetic", inference_arithmetic},
      {"discrete oracle equivalence", discrete_oracle},
      {"symmetric-difference brute force", symmetric_difference},
      {"multi-solution benefit", multi_solution},
      {"convergence", convergence},
      {"simulator constraints", simulator_constraints},
      {"determinism", determinism},
  };
  const char* only = std::getenv("GOALREC_ACCEPTANCE_ONLY");
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && std::to_string(i + 1) != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%s; %.1f s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
