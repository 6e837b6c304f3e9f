import math
import os
import sys

import pytest

import goalrec as gr

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def read(name):
    with open(os.path.join(DATA, name)) as f:
        return f.read()


def test_likelihood_of_unit_distance():
    assert gr.likelihood_from_mean(1.0) == pytest.approx(0.632121, abs=1e-6)


def test_posterior_normalizes_and_breaks_ties_low():
    post = gr.make_posterior([0.5, 0.5, 0.25], [1 / 3, 1 / 3, 1 / 3])
    assert sum(post.probabilities) == pytest.approx(1.0)
    assert post.argmax == 0
    assert post.tie_set() == [0, 1]


def test_map_and_distance_field():
    grid = gr.load_map(os.path.join(DATA, "light.map"))
    assert (grid.width, grid.height) == (32, 32)
    assert grid.wall_distance(1.0, 1.0) > 0.0
    with pytest.raises(gr.BoundsError):
        grid.wall_distance(-1.0, 1.0)
    with pytest.raises(gr.DimensionError):
        gr.parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n")
    with pytest.raises(gr.ParseError):
        gr.parse_map("type octile\nheight x\nwidth 2\nmap\n..\n..\n")


def test_plan_optimize_follow():
    grid = gr.load_map(os.path.join(DATA, "free.map"))
    cfg = gr.PlannerConfig()
    cfg.iteration_budget = 500
    cfg.rng_seed = 3
    path = gr.plan(grid, gr.Point2(1.0, 1.0), gr.Point2(4.0, 3.0), cfg)
    assert path.cost >= math.hypot(3.0, 2.0) - 1e-9
    res = gr.optimize(gr.simplify(path, grid, 0.01))
    assert res.violation <= 1e-3
    traj = gr.synthesize(res.via)
    assert traj.duration() == pytest.approx(res.duration, abs=0.11)
    stream = gr.follow_path(grid, path, 0.0)
    assert len(stream.test_indices) == 6


def test_continuous_session_matches_batch():
    a = [gr.TimedState(0.1 * i, 0.0, 1.0, 0.0, i) for i in range(20)]
    b = [gr.TimedState(0.0, 0.1 * i, 0.0, 1.0, i) for i in range(20)]
    bank = gr.ContinuousBank(["east", "north"], [[a], [b]])
    sess = gr.ContinuousSession(bank)
    obs = [gr.TimedState(0.1 * i, 0.01, 1.0, 0.0, i) for i in (2, 5, 9)]
    for o in obs:
        post = sess.update(o, o.t)
    batch = gr.batch_posterior(bank, obs, [o.t for o in obs])
    assert post.probabilities == pytest.approx(batch.probabilities, abs=1e-12)
    assert gr.recognize(bank, obs, [o.t for o in obs]) == "east"
    with pytest.raises(gr.OrderingError):
        sess.update(obs[0], 9)


def test_strips_topk_and_experiment():
    domain = gr.parse_domain(read("pddl/blocksworld-domain.pddl"))
    problem = gr.parse_problem(read("pddl/blocksworld-problem.pddl"), domain)
    plans = gr.topk_plans(problem, problem.goal, 2)
    assert len(plans) == 2 and len(plans[0]) <= len(plans[1])
    assert gr.satisfies(gr.rollout(problem, plans[0])[-1], problem.goal)
    rows = gr.run_discrete_experiment(
        "bw",
        read("pddl/blocksworld-domain.pddl"),
        read("pddl/blocksworld-problem.pddl"),
        read("pddl/blocksworld-hyps.txt"),
        read("pddl/blocksworld-obs.txt"),
    )
    assert [r.problem for r in rows] == ["bw@0.30", "bw@0.50", "bw@0.70", "bw@1.00"]
    assert all(r.failed == 0 for r in rows)
    assert gr.rows_to_csv(rows).splitlines()[0] == "problem,ppv,acc,spr,pc,online_s,offline_s,failed"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
