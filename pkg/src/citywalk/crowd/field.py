"""Batched crowd stepping across environments.

All agents of all environments advance through one set of array ops:
constraints are built from the pre-step state (two-phase update), the
velocity LP runs lane-parallel, and commits are per-environment. Every
operation is elementwise or reduces along the last axis only, so results
for an environment are bit-identical whether it is stepped alone or
inside any batch, and independent of the worker split.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..urbangen.types import CellLabel
from .orca import HalfPlane, _solve_least_violation
from .types import CrowdConfig

_EPS = 1e-12
_GOAL_REACH_M = 0.3
_WAYPOINT_REACH_M = 0.5
_STRAY_LIMIT_M = 1.0
_STALL_BIAS_RAD = 0.6  # clockwise bias of the stall retry


class CrowdField:
    """State of up to A agents in each of E environments."""

    def __init__(self, occupancies, config: CrowdConfig, env_seeds,
                 resample_goals: bool = True):
        self.config = config
        self.occupancies = list(occupancies)
        self.E = len(self.occupancies)
        self.A = 0
        self.resample_goals = resample_goals
        self.rngs = [np.random.Generator(np.random.PCG64(s)) for s in env_seeds]
        self._alloc(0)
        self._walk_cells = []
        self._passable = []
        self._nearest_obs = []
        for occ in self.occupancies:
            self._prepare_env(occ)
        self.paths = [[] for _ in range(self.E)]  # per env: list of per-agent paths
        self.last_gap_by_env = np.full(self.E, np.inf)
        self._has_obstacles = any(m is not None for m in self._nearest_obs)

    def _alloc(self, n_agents):
        E, A = self.E, n_agents
        self.A = A
        self.pos = np.zeros((E, A, 2))
        self.vel = np.zeros((E, A, 2))
        self.goal = np.zeros((E, A, 2))
        self.radius = np.full((E, A), 0.3)
        self.pref_speed = np.full((E, A), 1.0)
        self.max_speed = np.full((E, A), 2.0)
        self.kind = np.zeros((E, A), dtype=np.int8)
        self.active = np.zeros((E, A), dtype=bool)
        self.waypoint = np.zeros((E, A, 2))

    def _prepare_env(self, occ):
        labels = occ.labels
        walk = labels == int(CellLabel.WALKABLE)
        rows, cols = np.nonzero(walk)
        res = occ.resolution
        self._walk_cells.append(np.stack([(cols + 0.5) * res, (rows + 0.5) * res], axis=1))
        self._passable.append(labels != int(CellLabel.OBSTACLE))
        self._nearest_obs.append(_nearest_obstacle_map(labels))

    # -- population -----------------------------------------------------

    def set_agents(self, agent_lists):
        """Install per-env CrowdAgent lists (ragged; padded internally)."""
        n = max((len(lst) for lst in agent_lists), default=0)
        self._alloc(n)
        for e, lst in enumerate(agent_lists):
            self.paths[e] = [None] * self.A
            for a, ag in enumerate(lst):
                self.pos[e, a] = ag.position
                self.vel[e, a] = ag.velocity
                self.goal[e, a] = ag.goal
                self.radius[e, a] = ag.radius
                self.pref_speed[e, a] = ag.preferred_speed
                self.max_speed[e, a] = ag.max_speed
                self.kind[e, a] = int(ag.kind)
                self.active[e, a] = True
                self.waypoint[e, a] = ag.goal

    # -- stepping ---------------------------------------------------------

    def step(self, robot_pos=None, robot_vel=None, robot_radius=0.35,
             env_mask=None, workers: int = 1):
        """Advance all (masked) environments by one tick.

        The worker split is over contiguous env ranges; per-env results do
        not depend on it.
        """
        if self.A == 0 or self.E == 0:
            return
        act = self.active.copy()
        if env_mask is not None:
            act &= np.asarray(env_mask, dtype=bool)[:, None]
        if not act.any():
            return
        rp = None if robot_pos is None else np.asarray(robot_pos, dtype=np.float64).reshape(self.E, 2)
        rv = None if robot_vel is None else np.asarray(robot_vel, dtype=np.float64).reshape(self.E, 2)

        workers = max(1, min(workers, self.E))
        if workers == 1:
            self._step_range(0, self.E, act, rp, rv, robot_radius)
            return
        bounds = np.linspace(0, self.E, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(self._step_range, int(bounds[k]), int(bounds[k + 1]),
                            act, rp, rv, robot_radius)
                for k in range(workers) if bounds[k + 1] > bounds[k]
            ]
            for f in futs:
                f.result()

    def _step_range(self, e0, e1, act_full, robot_pos, robot_vel, robot_radius):
        cfg = self.config
        act = act_full[e0:e1]
        pos = self.pos[e0:e1]
        vel = self.vel[e0:e1]

        self._refresh_guidance(e0, e1, act)
        pref = self._preferred_velocities(e0, e1, act)

        points, normals, valid = self._build_constraints(
            e0, e1, act, robot_pos, robot_vel, robot_radius)
        max_speed = self.max_speed[e0:e1].reshape(-1)
        new_vel = _batched_lp(points, normals, valid, pref, max_speed, act.reshape(-1))

        # right-hand rule against symmetric stalls: an agent that wanted to
        # move but was solved to (near) rest retries with its preferred
        # velocity rotated clockwise; rotation commutes with point
        # reflection, so mirror-symmetric pairs stay exact mirrors while
        # both sidestep to their own right and pass
        speed_new = np.sqrt((new_vel ** 2).sum(-1))
        want = np.sqrt((pref ** 2).sum(-1))
        stalled = act.reshape(-1) & (speed_new < 0.2 * want) & (want > 1e-6)
        rows = np.flatnonzero(stalled)
        if rows.size:
            c, s = np.cos(_STALL_BIAS_RAD), np.sin(_STALL_BIAS_RAD)
            pref_r = np.stack([c * pref[rows, 0] + s * pref[rows, 1],
                               -s * pref[rows, 0] + c * pref[rows, 1]], axis=-1)
            retry = _batched_lp(points[rows], normals[rows], valid[rows], pref_r,
                                max_speed[rows], np.ones(rows.size, dtype=bool))
            new_vel[rows] = retry

        new_vel = new_vel.reshape(e1 - e0, self.A, 2)
        new_vel[~act] = vel[~act]

        new_pos = pos + new_vel * cfg.dt
        blocked = self._blocked_cells(e0, e1, new_pos)
        commit = act & ~blocked
        pos[commit] = new_pos[commit]
        vel[act] = new_vel[act]
        vel[act & blocked] = 0.0

        if self.resample_goals:
            self._resample_reached(e0, e1, act)

    def _refresh_guidance(self, e0, e1, act):
        """Recompute grid paths for agents that strayed or lack one.

        Obstacle-free environments always have line of sight, so their
        guidance reduces to waypoint = goal without per-agent work.
        """
        for e in range(e0, e1):
            if self._nearest_obs[e] is None:
                sel = act[e - e0]
                self.waypoint[e][sel] = self.goal[e][sel]
                continue
            self._refresh_guidance_env(e, act[e - e0])

    def _refresh_guidance_env(self, e, act_e):
        from ..paths import astar_path

        occ = self.occupancies[e]
        res = occ.resolution
        passable = self._passable[e]
        for a in range(self.A):
            if not act_e[a]:
                continue
            path = self.paths[e][a]
            if path is not None and len(path) > 0:
                wp = path[0]
                d_wp = float(np.hypot(wp[0] - self.pos[e, a, 0], wp[1] - self.pos[e, a, 1]))
                if d_wp < _WAYPOINT_REACH_M and len(path) > 1:
                    path.pop(0)
                stray = _distance_to_polyline(self.pos[e, a], path)
                if stray <= _STRAY_LIMIT_M:
                    self.waypoint[e, a] = path[0]
                    continue
            # need a fresh path
            if _line_of_sight(passable, self.pos[e, a], self.goal[e, a], res):
                self.paths[e][a] = [tuple(self.goal[e, a])]
                self.waypoint[e, a] = self.goal[e, a]
                continue
            start = _cell_of(self.pos[e, a], res, passable.shape)
            end = _cell_of(self.goal[e, a], res, passable.shape)
            cells = astar_path(passable, start, end, res)
            if cells is None or len(cells) < 2:
                self.paths[e][a] = [tuple(self.goal[e, a])]
                self.waypoint[e, a] = self.goal[e, a]
                continue
            pts = [((c + 0.5) * res, (r + 0.5) * res) for r, c in cells[1:]]
            pts.append(tuple(self.goal[e, a]))
            self.paths[e][a] = pts
            self.waypoint[e, a] = pts[0]

    def _preferred_velocities(self, e0, e1, act):
        pos = self.pos[e0:e1]
        goal = self.goal[e0:e1]
        speed = self.pref_speed[e0:e1]
        to_wp = self.waypoint[e0:e1] - pos
        dist = np.sqrt((to_wp ** 2).sum(-1))
        safe = np.maximum(dist, _EPS)
        pref = to_wp / safe[..., None] * speed[..., None]
        # slow down onto the final goal to avoid orbiting
        to_goal = np.sqrt(((goal - pos) ** 2).sum(-1))
        scale = np.minimum(1.0, to_goal / np.maximum(speed * self.config.dt * 4, _EPS))
        pref = pref * scale[..., None]
        pref[~act] = 0.0
        return pref.reshape(-1, 2)

    def _build_constraints(self, e0, e1, act, robot_pos, robot_vel, robot_radius):
        cfg = self.config
        E = e1 - e0
        A = self.A
        pos = self.pos[e0:e1]
        vel = self.vel[e0:e1]
        radius = self.radius[e0:e1]
        K = min(cfg.max_neighbors, max(A - 1, 0))
        use_robot = robot_pos is not None
        use_static = self._has_obstacles
        N = E * A

        nb = None
        if K > 0:
            # pairwise squared distances via a float32 Gram matrix: the
            # selection keys only pick and order neighbors, the constraint
            # math below uses the exact float64 state
            p32 = pos.astype(np.float32)
            sq = (p32 ** 2).sum(-1)
            d2 = sq[:, :, None] + sq[:, None, :] - 2.0 * (p32 @ p32.transpose(0, 2, 1))
            inf32 = np.float32(np.inf)
            d2 += np.where(act, np.float32(0), inf32)[:, None, :]
            d2 += np.where(act, np.float32(0), inf32)[:, :, None]
            idx_diag = np.arange(A)
            d2[:, idx_diag, idx_diag] = inf32
            in_range = d2 < np.float32(cfg.neighbor_distance ** 2)
            # no row needs more lanes than its in-range neighbor count
            K = min(K, int(in_range.sum(-1).max(initial=0)))
            if K > 0:
                d2_key = np.where(in_range, d2, inf32)
                order = np.argsort(d2_key, axis=-1, kind="stable")[..., :K]  # (E, A, K)
                key_sorted = np.take_along_axis(d2_key, order, axis=-1)
                nb_valid = np.isfinite(key_sorted)

                idx_e = np.arange(E)[:, None, None]
                nb_pos = pos[idx_e, order]  # (E, A, K, 2)
                nb_vel = vel[idx_e, order]
                nb_rad = radius[idx_e, order]

                # per-env nearest separation gap (diagnostics, ~free here)
                d_near = np.sqrt(((nb_pos[:, :, 0, :] - pos) ** 2).sum(-1))
                gap = np.where(nb_valid[:, :, 0], d_near - (radius + nb_rad[:, :, 0]), np.inf)
                self.last_gap_by_env[e0:e1] = gap.min(axis=1)

                rel_pos = nb_pos - pos[:, :, None, :]
                rel_vel = vel[:, :, None, :] - nb_vel
                rr = radius[:, :, None] + nb_rad + cfg.safety_margin
                # the VO math runs on valid lanes only
                flat_idx = np.flatnonzero(nb_valid.reshape(-1))
                v_self = np.broadcast_to(vel[:, :, None, :], rel_pos.shape)
                pt_c, nm_c = _vo_halfplane(
                    rel_pos.reshape(-1, 2)[flat_idx], rel_vel.reshape(-1, 2)[flat_idx],
                    rr.reshape(-1)[flat_idx], cfg.time_horizon, cfg.dt,
                    v_self.reshape(-1, 2)[flat_idx], 0.5)
                pt = np.zeros((N * K, 2))
                nm = np.zeros((N * K, 2))
                nm[:, 0] = 1.0
                pt[flat_idx] = pt_c
                nm[flat_idx] = nm_c
                nb = (pt, nm, nb_valid)

        L = K + int(use_robot) + int(use_static)
        points = np.zeros((N, max(L, 1), 2))
        normals = np.zeros((N, max(L, 1), 2))
        normals[..., 0] = 1.0
        valid = np.zeros((N, max(L, 1)), dtype=bool)
        if nb is not None:
            pt, nm, nb_valid = nb
            points[:, :K] = pt.reshape(N, K, 2)
            normals[:, :K] = nm.reshape(N, K, 2)
            valid[:, :K] = nb_valid.reshape(N, K)
        del nb

        lane = K
        if use_robot:
            rp = robot_pos[e0:e1].reshape(E, 1, 2)
            rv = (np.zeros((E, 1, 2)) if robot_vel is None
                  else robot_vel[e0:e1].reshape(E, 1, 2))
            rel_pos = rp - pos
            d2 = (rel_pos ** 2).sum(-1)
            ok = act & (d2 < cfg.neighbor_distance ** 2)
            rr = radius + robot_radius + cfg.safety_margin
            pt, nm = _vo_halfplane(rel_pos[:, :, None, :], (vel - rv)[:, :, None, :],
                                   rr[:, :, None], cfg.obstacle_time_horizon, cfg.dt,
                                   vel[:, :, None, :], 1.0)
            points[:, lane] = pt.reshape(N, 2)
            normals[:, lane] = nm.reshape(N, 2)
            valid[:, lane] = ok.reshape(N)
            lane += 1

        if use_static:
            obs_pt = np.zeros((E, A, 2))
            obs_ok = np.zeros((E, A), dtype=bool)
            for e in range(e0, e1):
                near = self._nearest_obs[e]
                if near is None:
                    continue
                occ = self.occupancies[e]
                res = occ.resolution
                ny, nx = occ.labels.shape
                k = e - e0
                rr_i = np.clip((pos[k, :, 1] / res).astype(np.int64), 0, ny - 1)
                cc_i = np.clip((pos[k, :, 0] / res).astype(np.int64), 0, nx - 1)
                flat = near[rr_i, cc_i]
                has = flat >= 0
                orow, ocol = np.divmod(np.maximum(flat, 0), nx)
                obs_pt[k, :, 0] = (ocol + 0.5) * res
                obs_pt[k, :, 1] = (orow + 0.5) * res
                obs_ok[k] = has & act[k]
            rel_pos = obs_pt - pos
            d2 = (rel_pos ** 2).sum(-1)
            obs_ok &= d2 < cfg.neighbor_distance ** 2
            margin = 0.5 * np.sqrt(2.0) * self.occupancies[0].resolution
            rr = radius + margin + cfg.safety_margin
            pt, nm = _vo_halfplane(rel_pos[:, :, None, :], vel[:, :, None, :],
                                   rr[:, :, None], cfg.obstacle_time_horizon, cfg.dt,
                                   vel[:, :, None, :], 1.0)
            points[:, lane] = pt.reshape(N, 2)
            normals[:, lane] = nm.reshape(N, 2)
            valid[:, lane] = obs_ok.reshape(N)

        return points, normals, valid

    def _blocked_cells(self, e0, e1, new_pos):
        E = e1 - e0
        blocked = np.zeros((E, self.A), dtype=bool)
        for e in range(e0, e1):
            occ = self.occupancies[e]
            res = occ.resolution
            ny, nx = occ.labels.shape
            k = e - e0
            x = new_pos[k, :, 0]
            y = new_pos[k, :, 1]
            out = (x < 0) | (y < 0) | (x >= nx * res) | (y >= ny * res)
            rr = np.clip((y / res).astype(np.int64), 0, ny - 1)
            cc = np.clip((x / res).astype(np.int64), 0, nx - 1)
            blocked[k] = out | ~self._passable[e][rr, cc]
        return blocked

    def _resample_reached(self, e0, e1, act):
        pos = self.pos[e0:e1]
        goal = self.goal[e0:e1]
        d2 = ((goal - pos) ** 2).sum(-1)
        hit = act & (d2 < _GOAL_REACH_M ** 2)
        if not hit.any():
            return
        for k in np.flatnonzero(hit.any(axis=1)):
            e = e0 + int(k)
            cells = self._walk_cells[e]
            for a in np.flatnonzero(hit[k]):
                pick = int(self.rngs[e].integers(len(cells)))
                self.goal[e, a] = cells[pick]
                self.paths[e][a] = None

    def set_env_agents(self, e: int, agents):
        """Replace one environment's population; grows A if needed."""
        if len(agents) > self.A:
            lists = [self.agents_of(k) for k in range(self.E)]
            lists[e] = agents
            self.set_agents(lists)
            return
        self.active[e, :] = False
        self.paths[e] = [None] * self.A
        for a, ag in enumerate(agents):
            self.pos[e, a] = ag.position
            self.vel[e, a] = ag.velocity
            self.goal[e, a] = ag.goal
            self.radius[e, a] = ag.radius
            self.pref_speed[e, a] = ag.preferred_speed
            self.max_speed[e, a] = ag.max_speed
            self.kind[e, a] = int(ag.kind)
            self.active[e, a] = True
            self.waypoint[e, a] = ag.goal

    def replace_env(self, e: int, occupancy):
        """Swap one environment's grid (scene resample)."""
        self.occupancies[e] = occupancy
        labels = occupancy.labels
        walk = labels == int(CellLabel.WALKABLE)
        rows, cols = np.nonzero(walk)
        res = occupancy.resolution
        self._walk_cells[e] = np.stack([(cols + 0.5) * res, (rows + 0.5) * res], axis=1)
        self._passable[e] = labels != int(CellLabel.OBSTACLE)
        self._nearest_obs[e] = _nearest_obstacle_map(labels)
        self._has_obstacles = any(m is not None for m in self._nearest_obs)

    # -- export -----------------------------------------------------------

    def agents_of(self, e: int):
        """Materialize CrowdAgent objects for one environment."""
        from .types import AgentKind, CrowdAgent

        out = []
        for a in range(self.A):
            if not self.active[e, a]:
                continue
            out.append(CrowdAgent(
                id=a, position=self.pos[e, a].copy(), velocity=self.vel[e, a].copy(),
                radius=float(self.radius[e, a]), preferred_speed=float(self.pref_speed[e, a]),
                goal=self.goal[e, a].copy(), kind=AgentKind(int(self.kind[e, a])),
            ))
        return out

    def trace_records(self, tick: int):
        recs = []
        for e in range(self.E):
            for a in range(self.A):
                if not self.active[e, a]:
                    continue
                recs.append({
                    "tick": int(tick), "env": int(e), "id": int(a),
                    "x": float(self.pos[e, a, 0]), "y": float(self.pos[e, a, 1]),
                    "vx": float(self.vel[e, a, 0]), "vy": float(self.vel[e, a, 1]),
                })
        return recs


# -- vectorized half-plane construction (mirrors orca.orca_halfplane) --------

def _vo_halfplane(rel_pos, rel_vel, rr, horizon, dt, v_self, share):
    with np.errstate(invalid="ignore", divide="ignore"):
        dist_sq = (rel_pos ** 2).sum(-1)
        r_sq = rr ** 2
        colliding = dist_sq <= r_sq

        w = rel_vel - rel_pos / horizon
        w_len_sq = (w ** 2).sum(-1)
        dot1 = (w * rel_pos).sum(-1)
        cutoff = (dot1 < 0.0) & (dot1 * dot1 > r_sq * w_len_sq)

        w_len = np.sqrt(w_len_sq)
        unit_w = w / np.maximum(w_len, _EPS)[..., None]
        u_cut = (rr / horizon - w_len)[..., None] * unit_w
        n_cut = unit_w

        leg = np.sqrt(np.maximum(dist_sq - r_sq, 0.0))
        det = rel_pos[..., 0] * w[..., 1] - rel_pos[..., 1] * w[..., 0]
        left = det > 0.0
        safe_d2 = np.maximum(dist_sq, _EPS)
        sign = np.where(left, 1.0, -1.0)
        # leg direction with the radius term flipped by side
        ld = np.stack([
            (rel_pos[..., 0] * leg - sign * rel_pos[..., 1] * rr),
            (sign * rel_pos[..., 0] * rr + rel_pos[..., 1] * leg),
        ], axis=-1) / safe_d2[..., None]
        n_leg = np.stack([-sign * ld[..., 1], sign * ld[..., 0]], axis=-1)
        dot2 = (rel_vel * ld).sum(-1)
        u_leg = dot2[..., None] * ld - rel_vel

        w_c = rel_vel - rel_pos / dt
        wc_len = np.sqrt((w_c ** 2).sum(-1))
        dist = np.sqrt(dist_sq)
        push = -rel_pos / np.maximum(dist, _EPS)[..., None]
        unit_c = np.where((wc_len > _EPS)[..., None], w_c / np.maximum(wc_len, _EPS)[..., None],
                          push)
        degenerate = (wc_len <= _EPS) & (dist <= _EPS)
        unit_c = np.where(degenerate[..., None],
                          np.broadcast_to(np.array([1.0, 0.0]), unit_c.shape), unit_c)
        u_col = (rr / dt - wc_len)[..., None] * unit_c
        n_col = unit_c

        u = np.where(colliding[..., None], u_col,
                     np.where(cutoff[..., None], u_cut, u_leg))
        nrm = np.where(colliding[..., None], n_col,
                       np.where(cutoff[..., None], n_cut, n_leg))
        point = v_self + share * u
    return point, nrm


# -- batched incremental LP ---------------------------------------------------

def _batched_lp(points, normals, valid, pref, max_speed, lane_active):
    """Row-parallel analogue of orca.solve_velocity.

    points/normals: (N, L, 2); valid: (N, L); pref: (N, 2); max_speed: (N,).
    The inner 1D solve runs on the compressed set of violating rows.
    Rows whose half-planes turn out infeasible fall back to the scalar
    least-violation solve.
    """
    N, L = valid.shape
    pref_norm = np.sqrt((pref ** 2).sum(-1))
    over = pref_norm > max_speed
    scale = np.where(over, max_speed / np.maximum(pref_norm, _EPS), 1.0)
    result = pref * scale[:, None]
    fail = np.full(N, -1, dtype=np.int64)
    open_rows = lane_active.copy()

    for i in range(L):
        vcol = valid[:, i] & open_rows
        if not vcol.any():
            continue
        p_i = points[:, i]
        n_i = normals[:, i]
        violated = vcol & (((result - p_i) * n_i).sum(-1) < -_EPS)
        rows = np.flatnonzero(violated)
        if rows.size == 0:
            continue
        # compressed 1D solve on constraint i's boundary
        p = points[rows]      # (V, L, 2)
        nm = normals[rows]
        va = valid[rows]
        pi = p[:, i]
        ni = nm[:, i]
        d = np.stack([-ni[:, 1], ni[:, 0]], axis=-1)
        ms = max_speed[rows]
        dot_pd = (pi * d).sum(-1)
        disc = dot_pd * dot_pd + ms * ms - (pi * pi).sum(-1)
        bad = disc < 0.0
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_left = -dot_pd - sq
        t_right = -dot_pd + sq
        for j in range(i):
            ok_j = va[:, j]
            if not ok_j.any():
                continue
            n_j = nm[:, j]
            denom = (d * n_j).sum(-1)
            numer = ((p[:, j] - pi) * n_j).sum(-1)
            parallel = np.abs(denom) < _EPS
            bad |= ok_j & parallel & (numer > _EPS)
            t = numer / np.where(parallel, 1.0, denom)
            t_left = np.where(ok_j & ~parallel & (denom > 0.0), np.maximum(t_left, t), t_left)
            t_right = np.where(ok_j & ~parallel & (denom <= 0.0), np.minimum(t_right, t), t_right)
        bad |= t_left > t_right
        t_best = np.clip(((pref[rows] - pi) * d).sum(-1), t_left, t_right)
        new = pi + t_best[:, None] * d
        good = ~bad
        result[rows[good]] = new[good]
        fail[rows[bad]] = i
        open_rows[rows[bad]] = False

    for row in np.flatnonzero(fail >= 0):
        lanes = np.flatnonzero(valid[row])
        cons = [HalfPlane(point=points[row, k].copy(), normal=normals[row, k].copy())
                for k in lanes]
        begin = int(np.searchsorted(lanes, fail[row]))
        result[row] = _solve_least_violation(cons, begin, float(max_speed[row]), result[row])
    return result


# -- helpers -------------------------------------------------------------------

def _nearest_obstacle_map(labels):
    """Flat index of the BFS-nearest obstacle cell, or -1; None if no obstacles."""
    from collections import deque

    ny, nx = labels.shape
    obs = labels == int(CellLabel.OBSTACLE)
    if not obs.any():
        return None
    near = np.full((ny, nx), -1, dtype=np.int64)
    rows, cols = np.nonzero(obs)
    dq = deque()
    for r, c in zip(rows.tolist(), cols.tolist()):
        near[r, c] = r * nx + c
        dq.append((r, c))
    while dq:
        r, c = dq.popleft()
        src = near[r, c]
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < ny and 0 <= cc < nx and near[rr, cc] < 0:
                near[rr, cc] = src
                dq.append((rr, cc))
    return near


def _cell_of(p, res, shape):
    ny, nx = shape
    return (int(np.clip(p[1] / res, 0, ny - 1)), int(np.clip(p[0] / res, 0, nx - 1)))


def _line_of_sight(passable, a, b, res):
    ny, nx = passable.shape
    d = float(np.hypot(b[0] - a[0], b[1] - a[1]))
    n = max(2, int(2.0 * d / res) + 2)  # half-cell sampling
    ts = np.linspace(0.0, 1.0, n)
    xs = a[0] + (b[0] - a[0]) * ts
    ys = a[1] + (b[1] - a[1]) * ts
    rr = np.clip((ys / res).astype(np.int64), 0, ny - 1)
    cc = np.clip((xs / res).astype(np.int64), 0, nx - 1)
    return bool(passable[rr, cc].all())


def _distance_to_polyline(p, pts) -> float:
    best = np.inf
    prev = p if len(pts) == 0 else np.asarray(pts[0], dtype=np.float64)
    best = min(best, float(np.hypot(prev[0] - p[0], prev[1] - p[1])))
    for k in range(1, len(pts)):
        a = np.asarray(pts[k - 1], dtype=np.float64)
        b = np.asarray(pts[k], dtype=np.float64)
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom < _EPS else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
        q = a + t * ab
        best = min(best, float(np.hypot(q[0] - p[0], q[1] - p[1])))
    return best
