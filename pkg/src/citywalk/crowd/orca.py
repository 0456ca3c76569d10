"""Reciprocal collision avoidance: half-plane construction and the
velocity-space LP.

Each neighbor induces one permitted half-plane derived from the velocity
obstacle truncated at the time horizon. Crowd agents split avoidance
responsibility evenly; against the robot and static geometry the agent
takes full responsibility. solve_velocity picks the feasible velocity in
the speed disc closest to the preferred one, falling back to a least-
violation solve when the half-planes have empty intersection.
"""

import numpy as np

from .types import CrowdAgent, CrowdConfig, HalfPlane

_EPS = 1e-12


def _norm(v):
    return float(np.hypot(v[0], v[1]))


def orca_halfplane(rel_pos, rel_vel, combined_radius, horizon, dt, v_self,
                   share: float) -> HalfPlane:
    """One permitted half-plane for an agent moving at v_self.

    rel_pos: other minus self position; rel_vel: self minus other velocity.
    share is the responsibility fraction (0.5 reciprocal, 1.0 full).
    """
    dist_sq = rel_pos[0] ** 2 + rel_pos[1] ** 2
    r_sq = combined_radius ** 2

    if dist_sq > r_sq:
        # velocity obstacle truncated at `horizon`
        w = rel_vel - rel_pos / horizon
        w_len_sq = w[0] ** 2 + w[1] ** 2
        dot1 = w @ rel_pos
        if dot1 < 0.0 and dot1 * dot1 > r_sq * w_len_sq:
            # project on the cutoff circle
            w_len = np.sqrt(w_len_sq)
            unit_w = w / w_len
            u = (combined_radius / horizon - w_len) * unit_w
            normal = unit_w
        else:
            # project on the nearer cone leg
            leg = np.sqrt(max(dist_sq - r_sq, 0.0))
            if rel_pos[0] * w[1] - rel_pos[1] * w[0] > 0.0:
                # left leg: cone interior lies to its right
                ld = np.array([
                    rel_pos[0] * leg - rel_pos[1] * combined_radius,
                    rel_pos[0] * combined_radius + rel_pos[1] * leg,
                ]) / dist_sq
                normal = np.array([-ld[1], ld[0]])
            else:
                ld = np.array([
                    rel_pos[0] * leg + rel_pos[1] * combined_radius,
                    -rel_pos[0] * combined_radius + rel_pos[1] * leg,
                ]) / dist_sq
                normal = np.array([ld[1], -ld[0]])
            dot2 = rel_vel @ ld
            u = dot2 * ld - rel_vel
    else:
        # already colliding: push apart within one step
        w = rel_vel - rel_pos / dt
        w_len = _norm(w)
        if w_len < _EPS:
            unit_w = -rel_pos / max(np.sqrt(dist_sq), _EPS)
        else:
            unit_w = w / w_len
        u = (combined_radius / dt - w_len) * unit_w
        normal = unit_w

    return HalfPlane(point=v_self + share * u, normal=normal)


def compute_orca_constraints(agent: CrowdAgent, neighbors, static_segments,
                             config: CrowdConfig, robot=None) -> list:
    """Half-planes for one agent against crowd neighbors, segments, and
    optionally the robot (position, velocity, radius) with full
    responsibility."""
    pos = agent.position
    constraints = []

    in_range = []
    for other in neighbors:
        if other is agent:
            raise ValueError("agent must not be in its own neighbor list")
        d2 = float(((other.position - pos) ** 2).sum())
        if d2 < config.neighbor_distance ** 2:
            in_range.append((d2, other.id, other))
    in_range.sort(key=lambda t: (t[0], t[1]))
    for _, _, other in in_range[: config.max_neighbors]:
        constraints.append(orca_halfplane(
            other.position - pos, agent.velocity - other.velocity,
            agent.radius + other.radius + config.safety_margin,
            config.time_horizon, config.dt, agent.velocity, share=0.5,
        ))

    if robot is not None:
        r_pos, r_vel, r_radius = robot
        r_pos = np.asarray(r_pos, dtype=np.float64)
        if float(((r_pos - pos) ** 2).sum()) < config.neighbor_distance ** 2:
            constraints.append(orca_halfplane(
                r_pos - pos, agent.velocity - np.asarray(r_vel, dtype=np.float64),
                agent.radius + r_radius + config.safety_margin,
                config.obstacle_time_horizon, config.dt, agent.velocity, share=1.0,
            ))

    for seg in static_segments:
        a, b = np.asarray(seg[0], dtype=np.float64), np.asarray(seg[1], dtype=np.float64)
        closest = _closest_point_on_segment(a, b, pos)
        if float(((closest - pos) ** 2).sum()) < config.neighbor_distance ** 2:
            constraints.append(orca_halfplane(
                closest - pos, agent.velocity.copy(),
                agent.radius + config.safety_margin,
                config.obstacle_time_horizon, config.dt, agent.velocity, share=1.0,
            ))
    return constraints


def _closest_point_on_segment(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom < _EPS:
        return a
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return a + t * ab


def solve_velocity(preferred, constraints, max_speed: float):
    """Closest point of the speed disc to `preferred` satisfying all
    half-planes; least-violation fallback when infeasible."""
    if max_speed <= 0:
        raise ValueError("max_speed must be > 0")
    preferred = np.asarray(preferred, dtype=np.float64)
    pref_norm = _norm(preferred)
    if pref_norm > max_speed:
        result = preferred * (max_speed / pref_norm)
    else:
        result = preferred.copy()

    fail_at = -1
    for i, hp in enumerate(constraints):
        if float((result - hp.point) @ hp.normal) < -_EPS:
            new = _solve_on_line(constraints, i, max_speed, preferred, dir_opt=False)
            if new is None:
                fail_at = i
                break
            result = new
    if fail_at < 0:
        return result
    return _solve_least_violation(constraints, fail_at, max_speed, result)


def _solve_on_line(constraints, i, max_speed, opt, dir_opt):
    """1D solve along constraint i's boundary subject to constraints < i."""
    hp = constraints[i]
    direction = np.array([-hp.normal[1], hp.normal[0]])
    point = hp.point
    # intersect with the speed disc
    dot_pd = float(point @ direction)
    disc = dot_pd * dot_pd + max_speed ** 2 - float(point @ point)
    if disc < 0.0:
        return None
    sq = np.sqrt(disc)
    t_left, t_right = -dot_pd - sq, -dot_pd + sq

    for j in range(i):
        hj = constraints[j]
        denom = float(direction @ hj.normal)
        numer = float((hj.point - point) @ hj.normal)
        if abs(denom) < _EPS:
            if numer > _EPS:
                return None  # parallel and fully outside j
            continue
        t = numer / denom
        if denom > 0.0:
            t_left = max(t_left, t)
        else:
            t_right = min(t_right, t)
        if t_left > t_right:
            return None

    if dir_opt:
        # optimize in the direction `opt` (used by the fallback)
        t_best = t_right if float(opt @ direction) > 0.0 else t_left
    else:
        t_best = float(np.clip((opt - point) @ direction, t_left, t_right))
    return point + t_best * direction


def _violation(hp, v) -> float:
    return -float((v - hp.point) @ hp.normal)


def _solve_least_violation(constraints, begin, max_speed, result):
    """3D-lifted fallback: minimize the largest constraint violation.

    Processing constraint i, the candidate set is restricted to points
    where every earlier constraint is violated no more than i; the
    boundary of "equally violated as i" has normal unit(n_j - n_i) and
    passes through the intersection of the two original boundaries.
    """
    distance = 0.0  # current worst violation
    for i in range(begin, len(constraints)):
        hp = constraints[i]
        if _violation(hp, result) <= distance + _EPS:
            continue
        proj = []
        for j in range(i):
            hj = constraints[j]
            det = float(hp.normal[0] * hj.normal[1] - hp.normal[1] * hj.normal[0])
            diff = hj.normal - hp.normal
            if abs(det) < _EPS:
                if float(hp.normal @ hj.normal) > 0.0:
                    continue  # same direction: j never dominates i
                mid = 0.5 * (hp.point + hj.point)
            else:
                d_i = np.array([-hp.normal[1], hp.normal[0]])
                t = float((hj.point - hp.point) @ hj.normal) / float(d_i @ hj.normal)
                mid = hp.point + t * d_i
            nrm = _norm(diff)
            if nrm < _EPS:
                continue
            proj.append(HalfPlane(point=mid, normal=diff / nrm))
        new = _lp2_toward(proj, max_speed, hp.normal)
        if new is not None:
            result = new
        distance = _violation(hp, result)
    return result


def _lp2_toward(constraints, max_speed, opt_dir):
    """LP over the disc maximizing motion along opt_dir (direction mode)."""
    result = opt_dir * (max_speed / max(_norm(opt_dir), _EPS))
    for i, hp in enumerate(constraints):
        if float((result - hp.point) @ hp.normal) < -_EPS:
            new = _solve_on_line(constraints, i, max_speed, opt_dir, dir_opt=True)
            if new is None:
                return None  # only reachable through accumulated float error
            result = new
    return result


def feasible(constraints, v, tol: float = 1e-9) -> bool:
    return all(hp.satisfied(v, tol) for hp in constraints)
