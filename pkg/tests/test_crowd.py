"""Crowd dynamics tests: routes, constraints, the velocity LP, stepping."""

from collections import deque

import numpy as np
import pytest

from citywalk.crowd import (
    AgentKind,
    compute_orca_constraints,
    CrowdAgent,
    CrowdConfig,
    CrowdField,
    feasible,
    HalfPlane,
    sample_routes,
    solve_velocity,
    step_crowd,
)
from citywalk.crowd.field import _batched_lp
from citywalk.errors import NoRouteAvailable
from citywalk.urbangen import CellLabel, generate_scene, rasterize_occupancy, SceneSpec, TaskKind

from conftest import open_grid


def bfs_connected(labels, start_cell, goal_cell, ok_value):
    """Independent BFS oracle for grid connectivity."""
    ny, nx = labels.shape
    ok = labels == ok_value
    if not (ok[start_cell] and ok[goal_cell]):
        return False
    seen = np.zeros_like(ok)
    seen[start_cell] = True
    dq = deque([start_cell])
    while dq:
        r, c = dq.popleft()
        if (r, c) == goal_cell:
            return True
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < ny and 0 <= cc < nx and ok[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                dq.append((rr, cc))
    return False


# -- routes ---------------------------------------------------------------------

def test_sample_routes_count_zero():
    assert sample_routes(open_grid(), 0, seed=1) == []


def test_sample_routes_on_walkable_and_connected(cache):
    spec = SceneSpec(seed=8, extent_m=(12.0, 12.0), task_kind=TaskKind.NAV_STATIC)
    occ = rasterize_occupancy(generate_scene(spec))
    routes = sample_routes(occ, 5, seed=3)
    assert len(routes) == 5
    for start, goal in routes:
        sc = occ.cell_of(*start)
        gc = occ.cell_of(*goal)
        assert occ.labels[sc] == int(CellLabel.WALKABLE)
        assert occ.labels[gc] == int(CellLabel.WALKABLE)
        assert bfs_connected(occ.labels, sc, gc, int(CellLabel.WALKABLE))


def test_sample_routes_start_separation():
    occ = open_grid(8.0)
    routes = sample_routes(occ, 6, seed=9)
    starts = [s for s, _ in routes]
    for i in range(len(starts)):
        for j in range(i + 1, len(starts)):
            assert np.hypot(*(starts[i] - starts[j])) >= 0.6 - 1e-9


def test_sample_routes_impossible_raises():
    occ = open_grid(2.0)
    occ.labels[:] = int(CellLabel.OBSTACLE)
    with pytest.raises(NoRouteAvailable):
        sample_routes(occ, 2, seed=0)


# -- constraints ------------------------------------------------------------------

def _agent(idx, pos, vel=(0.0, 0.0), goal=(0.0, 0.0)):
    return CrowdAgent(id=idx, position=np.asarray(pos, float),
                      velocity=np.asarray(vel, float), radius=0.3,
                      preferred_speed=1.0, goal=np.asarray(goal, float))


def test_no_neighbors_no_constraints():
    cfg = CrowdConfig()
    a = _agent(0, (0, 0))
    b = _agent(1, (10, 10))  # beyond neighbor_distance
    assert compute_orca_constraints(a, [b], [], cfg) == []


def test_overlapping_agents_push_apart():
    cfg = CrowdConfig()
    a = _agent(0, (0.0, 0.0))
    b = _agent(1, (0.4, 0.0))  # within r1 + r2 = 0.6
    cons = compute_orca_constraints(a, [b], [], cfg)
    assert len(cons) == 1
    normal = cons[0].normal
    assert normal[0] == pytest.approx(-1.0, abs=1e-9)
    assert normal[1] == pytest.approx(0.0, abs=1e-9)


def test_head_on_constraints_are_point_reflections():
    cfg = CrowdConfig()
    a = _agent(0, (0.0, 0.0), vel=(1.0, 0.0))
    b = _agent(1, (4.0, 0.0), vel=(-1.0, 0.0))
    ca = compute_orca_constraints(a, [b], [], cfg)[0]
    cb = compute_orca_constraints(b, [a], [], cfg)[0]
    # point reflection of relative coordinates: normals negate, the points
    # mirror through the velocity-pair midpoint
    assert np.allclose(ca.normal, -cb.normal, atol=1e-12)
    mid = (a.velocity + b.velocity) / 2.0
    assert np.allclose(ca.point - mid, -(cb.point - mid), atol=1e-12)


def test_agent_in_own_neighbors_rejected():
    cfg = CrowdConfig()
    a = _agent(0, (0, 0))
    with pytest.raises(ValueError):
        compute_orca_constraints(a, [a], [], cfg)


# -- LP ---------------------------------------------------------------------------

def test_lp_unconstrained_projects_preferred():
    v = solve_velocity(np.array([3.0, 0.0]), [], 2.0)
    assert np.allclose(v, [2.0, 0.0])
    v = solve_velocity(np.array([0.5, 0.5]), [], 2.0)
    assert np.allclose(v, [0.5, 0.5])


def test_lp_zero_preferred_feasible_origin():
    cons = [HalfPlane(point=np.array([-1.0, 0.0]), normal=np.array([1.0, 0.0]))]
    v = solve_velocity(np.zeros(2), cons, 2.0)
    assert np.allclose(v, [0.0, 0.0], atol=1e-12)


def _scan_oracle(cons, pref, max_speed, n=400):
    g = np.linspace(-max_speed, max_speed, n)
    X, Y = np.meshgrid(g, g)
    ok = X ** 2 + Y ** 2 <= max_speed ** 2
    for hp in cons:
        ok &= ((X - hp.point[0]) * hp.normal[0] + (Y - hp.point[1]) * hp.normal[1]) >= 0
    if not ok.any():
        return None
    d2 = (X - pref[0]) ** 2 + (Y - pref[1]) ** 2
    d2[~ok] = np.inf
    i = np.unravel_index(np.argmin(d2), d2.shape)
    return np.array([X[i], Y[i]])


def test_lp_matches_grid_scan_oracle(rng):
    max_speed = 2.0
    pitch = 2 * max_speed / 399
    checked = 0
    for _ in range(120):
        n_c = int(rng.integers(0, 7))
        cons = [HalfPlane(point=rng.uniform(-1.5, 1.5, 2),
                          normal=_unit(rng.uniform(-1, 1, 2)))
                for _ in range(n_c)]
        pref = rng.uniform(-3, 3, 2)
        oracle = _scan_oracle(cons, pref, max_speed)
        if oracle is None:
            continue
        checked += 1
        v = solve_velocity(pref, cons, max_speed)
        assert feasible(cons, v, tol=1e-9)
        # optimal against every scanned candidate; the scan itself can be
        # worse than the LP only by its own quantization
        assert np.hypot(*(v - pref)) <= np.hypot(*(oracle - pref)) + 1e-9
        assert np.hypot(*(oracle - pref)) - np.hypot(*(v - pref)) <= 5 * pitch
    assert checked >= 60


def _unit(v):
    return v / np.hypot(*v)


def test_lp_infeasible_fallback_minimizes_violation(rng):
    # two opposing half-planes with a gap the disc cannot satisfy
    cons = [
        HalfPlane(point=np.array([0.0, 1.0]), normal=np.array([0.0, 1.0])),
        HalfPlane(point=np.array([0.0, -1.0]), normal=np.array([0.0, -1.0])),
    ]
    v = solve_velocity(np.array([0.0, 0.0]), cons, 2.0)
    # least-violation point sits midway between the two boundaries
    assert abs(v[1]) < 1e-6


def test_vectorized_lp_matches_scalar(rng):
    cfg = CrowdConfig()
    occ = open_grid(15.0)
    for _ in range(10):
        A = 10
        agents = []
        for a in range(A):
            while True:
                p = rng.uniform(2, 8, 2)
                if all(np.hypot(*(p - o.position)) > 0.62 for o in agents):
                    break
            agents.append(CrowdAgent(id=a, position=p, velocity=rng.uniform(-1.2, 1.2, 2),
                                     radius=0.3, preferred_speed=1.2,
                                     goal=rng.uniform(2, 13, 2)))
        field = CrowdField([occ], cfg, env_seeds=[0], resample_goals=False)
        field.set_agents([agents])
        act = field.active.copy()
        field._refresh_guidance(0, 1, act)
        pref = field._preferred_velocities(0, 1, act).reshape(A, 2)
        pts, nms, val = field._build_constraints(0, 1, act, None, None, 0.35)
        vec = _batched_lp(pts, nms, val, pref, field.max_speed.reshape(-1),
                          act.reshape(-1))
        for a in range(A):
            others = [o for o in agents if o.id != a]
            cons = compute_orca_constraints(agents[a], others, [], cfg)
            v_scalar = solve_velocity(pref[a], cons, agents[a].max_speed)
            assert np.hypot(*(vec[a] - v_scalar)) < 1e-9


# -- stepping ---------------------------------------------------------------------

def test_step_crowd_empty():
    assert step_crowd([], None, open_grid(), CrowdConfig()) == []


def test_single_agent_free_space_advances():
    occ = open_grid(15.0)
    cfg = CrowdConfig(dt=0.1)
    agent = CrowdAgent(id=0, position=np.array([2.0, 5.0]), velocity=np.zeros(2),
                       radius=0.3, preferred_speed=1.0, goal=np.array([12.0, 5.0]))
    agents = [agent]
    for k in range(5):
        agents = step_crowd(agents, None, occ, cfg, resample_goals=False)
        assert agents[0].position[0] == pytest.approx(2.0 + 0.1 * (k + 1), abs=1e-6)
        assert agents[0].position[1] == pytest.approx(5.0, abs=1e-9)


def test_head_on_pair_mirrors_and_passes():
    occ = open_grid(30.0)
    cfg = CrowdConfig()
    a = CrowdAgent(id=0, position=np.array([10.0, 15.0]), velocity=np.array([1.0, 0.0]),
                   radius=0.3, preferred_speed=1.0, goal=np.array([20.0, 15.0]))
    b = CrowdAgent(id=1, position=np.array([20.0, 15.0]), velocity=np.array([-1.0, 0.0]),
                   radius=0.3, preferred_speed=1.0, goal=np.array([10.0, 15.0]))
    agents = [a, b]
    center = np.array([15.0, 15.0])
    passed = False
    min_dist = np.inf
    for _ in range(500):
        agents = step_crowd(agents, None, occ, cfg, resample_goals=False)
        pa, pb = agents[0].position, agents[1].position
        va, vb = agents[0].velocity, agents[1].velocity
        assert np.abs((pa - center) + (pb - center)).max() < 1e-9
        assert np.abs(va + vb).max() < 1e-9
        min_dist = min(min_dist, float(np.hypot(*(pa - pb))))
        if pa[0] > pb[0] + 0.3:
            passed = True
            break
    assert passed, "head-on pair deadlocked"
    assert min_dist >= 0.6 - 1e-9


def test_robot_constraint_shrinks_feasible_region(rng):
    cfg = CrowdConfig()
    agent = _agent(0, (0.0, 0.0), vel=(1.0, 0.0))
    other = _agent(1, (2.0, 0.5), vel=(-0.5, 0.0))
    without = compute_orca_constraints(agent, [other], [], cfg)
    with_robot = compute_orca_constraints(agent, [other], [], cfg,
                                          robot=((1.5, -0.8), (0.0, 0.0), 0.35))
    assert len(with_robot) == len(without) + 1
    g = np.linspace(-2, 2, 120)
    X, Y = np.meshgrid(g, g)
    disc = X ** 2 + Y ** 2 <= 4.0

    def region(cons):
        ok = disc.copy()
        for hp in cons:
            ok &= ((X - hp.point[0]) * hp.normal[0] + (Y - hp.point[1]) * hp.normal[1]) >= 0
        return ok

    r_with = region(with_robot)
    r_without = region(without)
    assert (r_with <= r_without).all()
    assert r_with.sum() < r_without.sum()


def test_two_phase_determinism_across_workers():
    occ = open_grid(20.0)
    cfg = CrowdConfig()
    rng = np.random.default_rng(5)

    def build():
        field = CrowdField([occ] * 6, cfg, env_seeds=list(range(6)))
        lists = []
        for e in range(6):
            r = np.random.default_rng(e)
            lst = []
            for a in range(12):
                while True:
                    p = r.uniform(2, 18, 2)
                    if all(np.hypot(*(p - o.position)) > 0.9 for o in lst):
                        break
                lst.append(CrowdAgent(id=a, position=p, velocity=np.zeros(2), radius=0.3,
                                      preferred_speed=1.0, goal=r.uniform(2, 18, 2)))
            lists.append(lst)
        field.set_agents(lists)
        return field

    f1 = build()
    f2 = build()
    for _ in range(50):
        f1.step(workers=1)
        f2.step(workers=3)
    assert np.array_equal(f1.pos, f2.pos)
    assert np.array_equal(f1.vel, f2.vel)


def test_trace_export_ndjson():
    import io
    import json

    from citywalk.crowd import CrowdConfig, CrowdField, write_trace

    occ = open_grid(8.0)
    cfg = CrowdConfig()
    field = CrowdField([occ, occ], cfg, env_seeds=[0, 1])
    field.set_agents([[_agent(0, (2, 2), goal=(6, 6))],
                      [_agent(0, (3, 3), goal=(5, 5)), _agent(1, (6, 2), goal=(2, 6))]])
    field.step()
    buf = io.StringIO()
    write_trace(field.trace_records(tick=1), buf)
    lines = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(lines) == 3
    assert all(set(l) == {"tick", "env", "id", "x", "y", "vx", "vy"} for l in lines)
    assert {l["env"] for l in lines} == {0, 1}
