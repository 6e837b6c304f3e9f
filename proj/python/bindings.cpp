#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "goalrec/error.hpp"
#include "goalrec/experiment.hpp"
#include "goalrec/geoplanner.hpp"
#include "goalrec/gridmap.hpp"
#include "goalrec/instrumentation.hpp"
#include "goalrec/quintic.hpp"
#include "goalrec/recognizer.hpp"
#include "goalrec/sim.hpp"
#include "goalrec/strips.hpp"
#include "goalrec/viaopt.hpp"

namespace py = pybind11;
using namespace goalrec;

namespace {

using recognizer::ContinuousBank;
using recognizer::DiscreteBank;
using recognizer::GroundState;
using recognizer::TimedState;

template <typename State>
std::vector<recognizer::Observation<State>> to_observations(const std::vector<State>& states,
                                                            const std::vector<long>& times) {
  if (states.size() != times.size()) throw PreconditionError("states and times differ in length");
  std::vector<recognizer::Observation<State>> out;
  for (std::size_t i = 0; i < states.size(); ++i) out.push_back({states[i], times[i]});
  return out;
}

template <typename Bank>
void bind_bank(py::module_& m, const char* name) {
  using State = typename Bank::Sequence::value_type;
  py::class_<Bank>(m, name)
      .def(py::init<std::vector<std::string>, std::vector<std::vector<std::vector<State>>>>(),
           py::arg("goals"), py::arg("trajectories"))
      .def(py::init<std::vector<std::string>, std::vector<std::vector<std::vector<State>>>,
                    std::vector<double>>(),
           py::arg("goals"), py::arg("trajectories"), py::arg("priors"))
      .def_property_readonly("goals", &Bank::goals)
      .def_property_readonly("priors", &Bank::priors)
      .def("__len__", &Bank::size)
      .def("trajectories", &Bank::trajectories, py::arg("goal"));
}

template <typename State>
void bind_session(py::module_& m, const char* name) {
  using Bank = recognizer::HypothesisBank<State>;
  using S = recognizer::Session<State>;
  py::class_<S>(m, name)
      .def(py::init<const Bank&>(), py::arg("bank"), py::keep_alive<1, 2>())
      .def("update",
           [](S& s, const State& state, long t) { return s.update({state, t}); },
           py::arg("state"), py::arg("t"))
      .def_property_readonly("observations", &S::observations);
  m.def(
      "batch_posterior",
      [](const Bank& bank, const std::vector<State>& states, const std::vector<long>& times) {
        const auto obs = to_observations(states, times);
        return recognizer::batch_posterior<State>(bank, obs);
      },
      py::arg("bank"), py::arg("states"), py::arg("times"));
  m.def(
      "recognize",
      [](const Bank& bank, const std::vector<State>& states, const std::vector<long>& times) {
        const auto obs = to_observations(states, times);
        return recognizer::recognize<State>(bank, obs);
      },
      py::arg("bank"), py::arg("states"), py::arg("times"));
}

}  // namespace

PYBIND11_MODULE(_goalrec, m) {
  m.doc() = "Goal recognition from precomputed plan banks";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<BoundsError>(m, "BoundsError", error.ptr());
  py::register_exception<InfeasibleScenario>(m, "InfeasibleScenario", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception<PlanningTimeout>(m, "PlanningTimeout", error.ptr());
  py::register_exception<DegenerateSegment>(m, "DegenerateSegment", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<EmptyObservation>(m, "EmptyObservation", error.ptr());
  py::register_exception<OrderingError>(m, "OrderingError", error.ptr());
  py::register_exception<UnsupportedFeature>(m, "UnsupportedFeature", error.ptr());
  py::register_exception<TypeError>(m, "PddlTypeError", error.ptr());
  py::register_exception<InapplicableAction>(m, "InapplicableAction", error.ptr());
  py::register_exception<Unsolvable>(m, "Unsolvable", error.ptr());
  py::register_exception<ControllerTimeout>(m, "ControllerTimeout", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  m.def("planner_calls", &PlannerCalls::count);

  // gridmap
  py::class_<gridmap::Point2>(m, "Point2")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &gridmap::Point2::x)
      .def_readwrite("y", &gridmap::Point2::y)
      .def("__repr__", [](const gridmap::Point2& p) {
        return "Point2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
      });
  py::class_<gridmap::OccupancyGrid>(m, "OccupancyGrid")
      .def_property_readonly("width", &gridmap::OccupancyGrid::width)
      .def_property_readonly("height", &gridmap::OccupancyGrid::height)
      .def_property_readonly("meters_per_cell", &gridmap::OccupancyGrid::meters_per_cell)
      .def_property_readonly("world_width", &gridmap::OccupancyGrid::world_width)
      .def_property_readonly("world_height", &gridmap::OccupancyGrid::world_height)
      .def("obstacle_count", &gridmap::OccupancyGrid::obstacle_count)
      .def("passable", &gridmap::OccupancyGrid::passable, py::arg("row"), py::arg("col"))
      .def("is_free", &gridmap::OccupancyGrid::is_free, py::arg("x"), py::arg("y"))
      .def("wall_distance", py::overload_cast<double, double>(&gridmap::OccupancyGrid::wall_distance, py::const_),
           py::arg("x"), py::arg("y"))
      .def("to_map_text", &gridmap::OccupancyGrid::to_map_text);
  m.def("parse_map", [](const std::string& text) { return gridmap::parse_map(text); }, py::arg("text"));
  m.def("load_map", &gridmap::load_map, py::arg("path"));
  py::class_<gridmap::ScenarioPoint>(m, "ScenarioPoint")
      .def(py::init([](double x, double y, double theta) { return gridmap::ScenarioPoint{x, y, theta}; }),
           py::arg("x"), py::arg("y"), py::arg("theta") = 0.0)
      .def_readwrite("x", &gridmap::ScenarioPoint::x)
      .def_readwrite("y", &gridmap::ScenarioPoint::y)
      .def_readwrite("theta", &gridmap::ScenarioPoint::theta)
      .def("position", &gridmap::ScenarioPoint::position);
  m.def("sample_scenario_points", &gridmap::sample_scenario_points, py::arg("grid"), py::arg("count"),
        py::arg("seed"));
  m.def("parse_scenario", [](const std::string& text) { return gridmap::parse_scenario(text); },
        py::arg("text"));

  // geoplanner
  py::class_<geoplanner::PositionPath>(m, "PositionPath")
      .def(py::init<>())
      .def_readwrite("waypoints", &geoplanner::PositionPath::waypoints)
      .def_readwrite("cost", &geoplanner::PositionPath::cost);
  py::class_<geoplanner::PlannerConfig>(m, "PlannerConfig")
      .def(py::init<>())
      .def_readwrite("time_limit", &geoplanner::PlannerConfig::time_limit)
      .def_readwrite("clearance", &geoplanner::PlannerConfig::clearance)
      .def_readwrite("step_size", &geoplanner::PlannerConfig::step_size)
      .def_readwrite("goal_bias", &geoplanner::PlannerConfig::goal_bias)
      .def_readwrite("rewire_radius_factor", &geoplanner::PlannerConfig::rewire_radius_factor)
      .def_readwrite("rng_seed", &geoplanner::PlannerConfig::rng_seed)
      .def_readwrite("iteration_budget", &geoplanner::PlannerConfig::iteration_budget);
  m.def("plan", &geoplanner::plan, py::arg("grid"), py::arg("start"), py::arg("goal"), py::arg("config"));
  m.def("plan_k", &geoplanner::plan_k, py::arg("grid"), py::arg("start"), py::arg("goal"),
        py::arg("config"), py::arg("k"));
  m.def("simplify", &geoplanner::simplify, py::arg("path"), py::arg("grid"), py::arg("clearance"),
        py::arg("step_size") = 0.5);
  m.def("densify", &geoplanner::densify, py::arg("path"), py::arg("max_spacing"));
  m.def("segment_free", &geoplanner::segment_free, py::arg("grid"), py::arg("a"), py::arg("b"),
        py::arg("clearance"), py::arg("step_size"));

  // quintic
  py::class_<quintic::ViaPoint>(m, "ViaPoint")
      .def(py::init([](double x, double y, double vx, double vy, double ax, double ay, double td) {
             return quintic::ViaPoint{x, y, vx, vy, ax, ay, td};
           }),
           py::arg("x"), py::arg("y"), py::arg("vx") = 0.0, py::arg("vy") = 0.0, py::arg("ax") = 0.0,
           py::arg("ay") = 0.0, py::arg("td") = 0.0)
      .def_readwrite("x", &quintic::ViaPoint::x)
      .def_readwrite("y", &quintic::ViaPoint::y)
      .def_readwrite("vx", &quintic::ViaPoint::vx)
      .def_readwrite("vy", &quintic::ViaPoint::vy)
      .def_readwrite("ax", &quintic::ViaPoint::ax)
      .def_readwrite("ay", &quintic::ViaPoint::ay)
      .def_readwrite("td", &quintic::ViaPoint::td);
  py::class_<TimedState>(m, "TimedState")
      .def(py::init([](double x, double y, double vx, double vy, long t) {
             return TimedState{x, y, vx, vy, t};
           }),
           py::arg("x"), py::arg("y"), py::arg("vx") = 0.0, py::arg("vy") = 0.0, py::arg("t") = 0)
      .def_readwrite("x", &TimedState::x)
      .def_readwrite("y", &TimedState::y)
      .def_readwrite("vx", &TimedState::vx)
      .def_readwrite("vy", &TimedState::vy)
      .def_readwrite("t", &TimedState::t);
  py::class_<quintic::Trajectory>(m, "Trajectory")
      .def_readonly("samples", &quintic::Trajectory::samples)
      .def_readonly("dt", &quintic::Trajectory::dt)
      .def("duration", &quintic::Trajectory::duration);
  m.def(
      "synthesize",
      [](const std::vector<quintic::ViaPoint>& via, double dt) { return quintic::synthesize(via, dt); },
      py::arg("via"), py::arg("dt") = quintic::kStandardDt);
  m.def("axis_coeffs", &quintic::axis_coeffs, py::arg("p0"), py::arg("v0"), py::arg("a0"), py::arg("p1"),
        py::arg("v1"), py::arg("a1"), py::arg("td"));

  // viaopt
  py::class_<viaopt::OptConfig>(m, "OptConfig")
      .def(py::init<>())
      .def_readwrite("v_max", &viaopt::OptConfig::v_max)
      .def_readwrite("penalty_weight", &viaopt::OptConfig::penalty_weight)
      .def_readwrite("max_iters", &viaopt::OptConfig::max_iters)
      .def_readwrite("tolerance", &viaopt::OptConfig::tolerance)
      .def_readwrite("rng_seed", &viaopt::OptConfig::rng_seed)
      .def_readwrite("random_restarts", &viaopt::OptConfig::random_restarts);
  py::class_<viaopt::OptResult>(m, "OptResult")
      .def_readonly("via", &viaopt::OptResult::via)
      .def_readonly("duration", &viaopt::OptResult::duration)
      .def_readonly("penalized_cost", &viaopt::OptResult::penalized_cost)
      .def_readonly("violation", &viaopt::OptResult::violation)
      .def_readonly("iterations", &viaopt::OptResult::iterations);
  m.def("optimize", &viaopt::optimize_detailed, py::arg("path"), py::arg("config") = viaopt::OptConfig{});
  m.def(
      "penalized_cost",
      [](const std::vector<quintic::ViaPoint>& via, double v_max, double weight) {
        return viaopt::penalized_cost(via, v_max, weight);
      },
      py::arg("via"), py::arg("v_max"), py::arg("weight"));

  // recognizer
  m.def("likelihood_from_mean", &recognizer::likelihood_from_mean, py::arg("mean_distance"));
  m.def("euclid_continuous", &recognizer::euclid_continuous, py::arg("a"), py::arg("b"));
  m.def("euclid_discrete", &recognizer::euclid_discrete, py::arg("a"), py::arg("b"));
  py::class_<recognizer::Posterior>(m, "Posterior")
      .def_readonly("probabilities", &recognizer::Posterior::probabilities)
      .def_readonly("likelihoods", &recognizer::Posterior::likelihoods)
      .def_readonly("argmax", &recognizer::Posterior::argmax)
      .def_readonly("spread", &recognizer::Posterior::spread)
      .def("tie_set", &recognizer::Posterior::tie_set);
  m.def(
      "make_posterior",
      [](std::vector<double> likelihoods, const std::vector<double>& priors) {
        return recognizer::make_posterior(std::move(likelihoods), priors);
      },
      py::arg("likelihoods"), py::arg("priors"));
  bind_bank<ContinuousBank>(m, "ContinuousBank");
  bind_bank<DiscreteBank>(m, "DiscreteBank");
  bind_session<TimedState>(m, "ContinuousSession");
  bind_session<GroundState>(m, "DiscreteSession");

  // strips
  py::class_<strips::DomainModel>(m, "DomainModel").def_readonly("name", &strips::DomainModel::name);
  py::class_<strips::GroundProblem>(m, "GroundProblem")
      .def_readonly("name", &strips::GroundProblem::name)
      .def_readonly("facts", &strips::GroundProblem::facts)
      .def_readonly("init", &strips::GroundProblem::init)
      .def_readonly("goal", &strips::GroundProblem::goal)
      .def_property_readonly("action_names",
                             [](const strips::GroundProblem& p) {
                               std::vector<std::string> out;
                               for (const auto& a : p.actions) out.push_back(a.name);
                               return out;
                             })
      .def("fact_id", &strips::GroundProblem::fact_id)
      .def("action_id", &strips::GroundProblem::action_id)
      .def("state_string", &strips::GroundProblem::state_string);
  m.def("parse_domain", [](const std::string& text) { return strips::parse_domain(text); }, py::arg("text"));
  m.def(
      "parse_problem",
      [](const std::string& text, const strips::DomainModel& d) { return strips::parse_problem(text, d); },
      py::arg("text"), py::arg("domain"));
  m.def(
      "topk_plans",
      [](const strips::GroundProblem& p, const GroundState& goal, int k, bool optimal_only) {
        strips::TopkOptions opts;
        opts.optimal_only = optimal_only;
        std::vector<std::vector<int>> out;
        for (const auto& plan : strips::topk_plans(p, goal, k, opts)) out.push_back(plan.actions);
        return out;
      },
      py::arg("problem"), py::arg("goal"), py::arg("k"), py::arg("optimal_only") = false);
  m.def(
      "rollout",
      [](const strips::GroundProblem& p, const std::vector<int>& actions) {
        return strips::rollout(p, strips::Plan{actions});
      },
      py::arg("problem"), py::arg("actions"));
  m.def("satisfies", &strips::satisfies, py::arg("state"), py::arg("goal"));
  m.def(
      "parse_hypotheses",
      [](const std::string& text, const strips::GroundProblem& p) { return strips::parse_hypotheses(text, p); },
      py::arg("text"), py::arg("problem"));
  m.def(
      "parse_observations",
      [](const std::string& text, const strips::GroundProblem& p) {
        return strips::parse_observations(text, p);
      },
      py::arg("text"), py::arg("problem"));

  // sim
  py::class_<sim::ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("v_max", &sim::ControllerConfig::v_max)
      .def_readwrite("omega_lim", &sim::ControllerConfig::omega_lim)
      .def_readwrite("dt", &sim::ControllerConfig::dt)
      .def_readwrite("goal_tolerance", &sim::ControllerConfig::goal_tolerance)
      .def_readwrite("lookahead", &sim::ControllerConfig::lookahead)
      .def_readwrite("wall_lim", &sim::ControllerConfig::wall_lim);
  py::class_<sim::ObservationStream>(m, "ObservationStream")
      .def_readonly("full", &sim::ObservationStream::full)
      .def_readonly("test_indices", &sim::ObservationStream::test_indices)
      .def("tf", &sim::ObservationStream::tf);
  m.def("follow_path", &sim::follow_path, py::arg("grid"), py::arg("path"), py::arg("theta0"),
        py::arg("config") = sim::ControllerConfig{});

  // experiments
  py::class_<experiment::MetricsRow>(m, "MetricsRow")
      .def_readonly("problem", &experiment::MetricsRow::problem)
      .def_readonly("ppv", &experiment::MetricsRow::ppv)
      .def_readonly("acc", &experiment::MetricsRow::acc)
      .def_readonly("spr", &experiment::MetricsRow::spr)
      .def_readonly("pc", &experiment::MetricsRow::pc)
      .def_readonly("online_s", &experiment::MetricsRow::online_s)
      .def_readonly("offline_s", &experiment::MetricsRow::offline_s)
      .def_readonly("failed", &experiment::MetricsRow::failed)
      .def_readonly("error", &experiment::MetricsRow::error);
  m.def("compute_metrics", &experiment::compute_metrics, py::arg("posteriors"), py::arg("true_goal"));
  m.def(
      "run_continuous_problem",
      [](const gridmap::OccupancyGrid& grid, const std::vector<gridmap::ScenarioPoint>& points,
         std::size_t start, std::size_t goal, int k, std::uint64_t seed) {
        experiment::ContinuousConfig cfg;
        cfg.k = k;
        cfg.seed = seed;
        return experiment::run_continuous_problem(grid, points, start, goal, cfg);
      },
      py::arg("grid"), py::arg("points"), py::arg("start"), py::arg("goal"), py::arg("k") = 1,
      py::arg("seed") = 0);
  m.def(
      "run_discrete_experiment",
      [](const std::string& id, const std::string& domain, const std::string& problem,
         const std::string& hypotheses, const std::string& observations, int k, bool optimal_only) {
        experiment::DiscreteConfig cfg;
        cfg.k = k;
        cfg.optimal_only = optimal_only;
        return experiment::run_discrete_experiment({id, domain, problem, hypotheses, observations}, cfg);
      },
      py::arg("id"), py::arg("domain"), py::arg("problem"), py::arg("hypotheses"), py::arg("observations"),
      py::arg("k") = 1, py::arg("optimal_only") = false);
  m.def(
      "rows_to_csv",
      [](const std::vector<experiment::MetricsRow>& rows) {
        std::ostringstream os;
        experiment::write_rows_csv(os, rows);
        return os.str();
      },
      py::arg("rows"));
}
