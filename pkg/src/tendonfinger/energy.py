"""
Brute-force equilibrium by total-potential-energy minimization.

Independent cross-check for the fixed-point static solver: the total
potential (link gravity + elastic energy of every tendon + external-load
potential) is minimized over the three joint angles with a coarse grid
search followed by shrink-by-4 local refinement.

Tendon stretch model: the actuating tendon's routed length changes by
R1 * (theta_hat_1 - theta_1) relative to the prescribed displacement;
each coupling tendon spans two adjacent guide cylinders, so it stretches
only on the differential motion R_i * d_i - R_{i-1} * d_{i-1} with
d_i = theta_hat_i - theta_i. Extension-group stretches are the mirror
image. A slack tendon (negative stretch) stores no energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryMinimum, TendonFingerError
from .model import (
    THETA1_MAX,
    THETA1_MIN,
    Configuration,
    ExternalLoad,
    FingerGeometry,
    TendonGroup,
    chain_points,
    coupling_angles,
    cumulative_angles,
)
from .statics import (
    StaticSolution,
    coupling_rest_lengths,
    group_specs,
    net_external_moments,
    solve_static,
    wrap_angles,
    wrap_moment,
)

DEFAULT_GRID = 21
DEFAULT_REFINE_ROUNDS = 6
SEARCH_HALF_WIDTH = 0.5  # radians per axis around the nominal pose


@dataclass(frozen=True)
class EnergyLandscapeSample:
    """Potential energy at one joint-angle triple, split by source."""

    theta: tuple[float, float, float]
    gravity_pe: float
    elastic_pe: float
    load_pe: float

    @property
    def total(self) -> float:
        return self.gravity_pe + self.elastic_pe + self.load_pe


@dataclass(frozen=True)
class EquilibriumResult:
    theta: tuple[float, float, float]
    fingertip: tuple[float, float]
    energy: float
    evaluations: int
    rounds: int


class _PotentialModel:
    """Precomputed quantities for fast batched potential evaluation."""

    def __init__(self, geom: FingerGeometry, specs, load: ExternalLoad, q: float):
        self.geom = geom
        self.load = load
        self.q = q
        self.lengths = np.asarray(geom.link_lengths)
        self.radii = np.asarray(geom.guide_radii)
        self.masses = np.asarray(geom.link_masses)
        self.fracs = np.asarray(geom.com_fractions)
        self.g = geom.gravity_accel
        self.theta_hat = np.asarray(coupling_angles(q, geom).theta)

        lt2, lt3 = coupling_rest_lengths(geom)
        self.k_flex = self._group_stiffness(specs, TendonGroup.FLEXION, lt2, lt3)
        self.k_ext = self._group_stiffness(specs, TendonGroup.EXTENSION, lt2, lt3)

        self.force = np.asarray(load.force)
        if load.application_point is None:
            self.attach_local = None
        else:
            # Resolve the fixed base-frame point into the distal-link frame
            # at the nominal pose; it then rides with the link.
            nominal = Configuration(q=q, theta=tuple(self.theta_hat))
            pts = chain_points(nominal, geom)
            phi3 = float(cumulative_angles(nominal.theta)[2])
            rel = np.asarray(load.application_point) - pts[2]
            c, s = math.cos(-phi3), math.sin(-phi3)
            self.attach_local = np.array(
                [c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]]
            )

    @staticmethod
    def _group_stiffness(specs, group, lt2, lt3) -> np.ndarray:
        trio = group_specs(specs, group)
        rests = (trio[0].rest_length, lt2, lt3)
        return np.array([t.axial_stiffness / r for t, r in zip(trio, rests)])

    def stretches(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Unclamped flexion- and extension-side stretches, shape (N, 3)."""
        rd = (self.theta_hat[None, :] - thetas) * self.radii[None, :]
        flex = np.empty_like(rd)
        flex[:, 0] = rd[:, 0]
        flex[:, 1] = rd[:, 1] - rd[:, 0]
        flex[:, 2] = rd[:, 2] - rd[:, 1]
        return flex, -flex

    def components(self, thetas: np.ndarray):
        """Gravity, elastic and load potentials for (N, 3) angle triples."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        phi = np.cumsum(thetas, axis=1)
        sin_phi = np.sin(phi)
        cos_phi = np.cos(phi)

        y_ends = np.cumsum(self.lengths[None, :] * sin_phi, axis=1)
        y_starts = np.concatenate(
            (np.zeros((thetas.shape[0], 1)), y_ends[:, :2]), axis=1
        )
        y_com = y_starts + self.fracs[None, :] * self.lengths[None, :] * sin_phi
        gravity = self.g * np.sum(self.masses[None, :] * y_com, axis=1)

        flex, ext = self.stretches(thetas)
        elastic = 0.5 * np.sum(
            self.k_flex[None, :] * np.clip(flex, 0.0, None) ** 2
            + self.k_ext[None, :] * np.clip(ext, 0.0, None) ** 2,
            axis=1,
        )

        x_tip = np.sum(self.lengths[None, :] * cos_phi, axis=1)
        y_tip = y_ends[:, 2]
        if self.attach_local is None:
            px, py = x_tip, y_tip
        else:
            x_j3 = np.sum(self.lengths[None, :2] * cos_phi[:, :2], axis=1)
            y_j3 = y_ends[:, 1]
            c3, s3 = cos_phi[:, 2], sin_phi[:, 2]
            ax, ay = self.attach_local
            px = x_j3 + c3 * ax - s3 * ay
            py = y_j3 + s3 * ax + c3 * ay
        load_pe = (
            -(self.force[0] * px + self.force[1] * py)
            - self.load.moment * np.sum(thetas, axis=1)
        )
        return gravity, elastic, load_pe

    def total(self, thetas: np.ndarray) -> np.ndarray:
        g, e, l = self.components(thetas)
        return g + e + l


def total_potential(
    theta, geom: FingerGeometry, specs, load: ExternalLoad, q: float
) -> EnergyLandscapeSample:
    """Potential energy of one joint-angle triple (range-checked)."""
    theta = tuple(float(t) for t in theta)
    Configuration(q=q, theta=theta)  # raises RangeExceeded outside limits
    model = _PotentialModel(geom, specs, load, q)
    g, e, l = model.components(np.asarray(theta)[None, :])
    return EnergyLandscapeSample(
        theta=theta, gravity_pe=float(g[0]), elastic_pe=float(e[0]),
        load_pe=float(l[0]),
    )


def potential_gradient(
    theta, geom: FingerGeometry, specs, load: ExternalLoad, q: float
) -> np.ndarray:
    """Analytic d(total potential)/d(theta), shape (3,).

    At a slack/taut transition the one-sided derivative of the taut side
    is returned (the clamped stretch contributes zero when slack).
    """
    theta = np.asarray(theta, dtype=float)
    model = _PotentialModel(geom, specs, load, q)
    phi = np.cumsum(theta)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    L, R = model.lengths, model.radii

    flex, ext = model.stretches(theta[None, :])
    t_flex = model.k_flex * np.clip(flex[0], 0.0, None)
    t_ext = model.k_ext * np.clip(ext[0], 0.0, None)
    # d(stretch_i)/d(theta_k): actuating tendon -R1 on joint 1; coupling
    # tendon i couples joints i-1 (+R_{i-1}) and i (-R_i). Extension side
    # is the negative.
    dflex = np.array([
        [-R[0], 0.0, 0.0],
        [R[0], -R[1], 0.0],
        [0.0, R[1], -R[2]],
    ])
    grad_elastic = t_flex @ dflex + t_ext @ (-dflex)

    grad_gravity = np.zeros(3)
    for k in range(3):
        acc = 0.0
        for i in range(3):
            # d(y_com_i)/d(theta_k)
            d = 0.0
            for j in range(k, i):
                d += L[j] * cos_phi[j]
            if i >= k:
                d += model.fracs[i] * L[i] * cos_phi[i]
            acc += model.masses[i] * model.g * d
        grad_gravity[k] = acc

    if model.attach_local is None:
        dpx = np.array([-np.sum(L[k:] * sin_phi[k:]) for k in range(3)])
        dpy = np.array([np.sum(L[k:] * cos_phi[k:]) for k in range(3)])
    else:
        ax, ay = model.attach_local
        rot_dx = -sin_phi[2] * ax - cos_phi[2] * ay
        rot_dy = cos_phi[2] * ax - sin_phi[2] * ay
        dpx = np.array(
            [-np.sum(L[k:2] * sin_phi[k:2]) + rot_dx for k in range(3)]
        )
        dpy = np.array(
            [np.sum(L[k:2] * cos_phi[k:2]) + rot_dy for k in range(3)]
        )
    grad_load = -(model.force[0] * dpx + model.force[1] * dpy) - load.moment

    return grad_elastic + grad_gravity + grad_load


def find_equilibrium(
    geom: FingerGeometry,
    specs,
    load: ExternalLoad,
    q: float,
    grid: int = DEFAULT_GRID,
    refine_rounds: int = DEFAULT_REFINE_ROUNDS,
) -> EquilibriumResult:
    """Grid search plus shrink-by-4 refinement over the joint angles.

    The search box spans +-0.5 rad per axis around the nominal coupled
    pose (the first axis clipped to the joint-1 range). The argmin of a
    grid pass is the first minimal sample in lexicographic index order.
    Raises BoundaryMinimum when the final minimizer sits on the initial
    box surface, which means the box should be widened.
    """
    if grid < 11:
        raise ValueError("grid must be >= 11 samples per axis")
    if refine_rounds < 0:
        raise ValueError("refine_rounds must be >= 0")

    model = _PotentialModel(geom, specs, load, q)
    center = model.theta_hat.copy()
    lo0 = center - SEARCH_HALF_WIDTH
    hi0 = center + SEARCH_HALF_WIDTH
    lo0[0] = max(lo0[0], THETA1_MIN)
    hi0[0] = min(hi0[0], THETA1_MAX)

    def evaluate_box(lo, hi):
        axes = [np.linspace(lo[k], hi[k], grid) for k in range(3)]
        mesh = np.meshgrid(*axes, indexing="ij")
        thetas = np.column_stack([m.ravel() for m in mesh])
        energies = model.total(thetas)
        best = int(np.argmin(energies))
        return thetas[best], float(energies[best]), thetas.shape[0]

    best_theta, best_energy, n_eval = evaluate_box(lo0, hi0)
    evaluations = n_eval

    half = (hi0 - lo0) / 2.0
    for _ in range(refine_rounds):
        half = half / 4.0
        lo = np.maximum(best_theta - half, lo0)
        hi = np.minimum(best_theta + half, hi0)
        theta_r, energy_r, n_eval = evaluate_box(lo, hi)
        evaluations += n_eval
        if energy_r < best_energy:
            best_theta, best_energy = theta_r, energy_r

    edge_tol = (hi0 - lo0) / (2.0 * (grid - 1))
    on_edge = np.any(
        (np.abs(best_theta - lo0) <= edge_tol)
        | (np.abs(best_theta - hi0) <= edge_tol)
    )
    if on_edge:
        raise BoundaryMinimum(
            f"energy minimum {tuple(best_theta)} lies on the search-box boundary"
        )

    cfg = Configuration(q=q, theta=tuple(best_theta))
    tip = chain_points(cfg, geom)[3]
    return EquilibriumResult(
        theta=tuple(float(t) for t in best_theta),
        fingertip=(float(tip[0]), float(tip[1])),
        energy=best_energy,
        evaluations=evaluations,
        rounds=refine_rounds,
    )


def balance_residuals(
    theta,
    geom: FingerGeometry,
    specs,
    load: ExternalLoad,
    q: float,
    group: TendonGroup,
) -> dict:
    """Moment-balance residuals (N m) at an arbitrary pose.

    Tensions are taken from Hooke's law applied to the pose's tendon
    stretches, then substituted into both tension formulations. A zero
    residual triple means the pose satisfies that formulation exactly.
    """
    theta = tuple(float(t) for t in theta)
    cfg = Configuration(q=q, theta=theta)
    moments = net_external_moments(cfg, geom, load)
    sign = 1.0 if group is TendonGroup.FLEXION else -1.0

    model = _PotentialModel(geom, specs, load, q)
    flex, ext = model.stretches(np.asarray(theta)[None, :])
    if group is TendonGroup.FLEXION:
        tensions = model.k_flex * np.clip(flex[0], 0.0, None)
    else:
        tensions = model.k_ext * np.clip(ext[0], 0.0, None)

    radii = np.asarray(geom.guide_radii)
    t_next = np.append(tensions[1:], 0.0)
    tangent = moments + sign * radii * (tensions - t_next)

    lengths = geom.link_lengths
    try:
        wrap = wrap_angles(cfg, geom)
        wrap_int = [
            moments[0] + sign * (tensions[0] * radii[0] + tensions[1] * radii[1]
                                 - wrap_moment(tensions[1], lengths[1],
                                               theta[1], wrap.alpha2)),
            moments[1] + sign * (tensions[1] * radii[1] + tensions[2] * radii[2]
                                 - wrap_moment(tensions[2], lengths[2],
                                               theta[2], wrap.alpha3)),
            moments[2] + sign * tensions[2] * radii[2],
        ]
    except TendonFingerError:
        wrap_int = None

    return {
        "tensions_n": [float(t) for t in tensions],
        "tangent_nm": [float(r) for r in tangent],
        "wrap_integral_nm": None if wrap_int is None
        else [float(r) for r in wrap_int],
    }


def random_tip_load_cases(
    n: int,
    seed: int,
    geom: FingerGeometry,
    payload_range: tuple[float, float] = (0.2, 3.0),
    cone_half_angle_deg: float = 60.0,
) -> list[dict]:
    """Randomized fingertip loads: payload-scaled forces pointing into a
    downward cone so a single tendon group can always hold them."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        payload = float(rng.uniform(*payload_range))
        angle = math.radians(-90.0 + float(
            rng.uniform(-cone_half_angle_deg, cone_half_angle_deg)
        ))
        magnitude = payload * geom.gravity_accel
        force = (magnitude * math.cos(angle), magnitude * math.sin(angle))
        cases.append({
            "payload_kg": payload,
            "direction_deg": math.degrees(angle),
            "load": ExternalLoad(force=force, moment=0.0),
        })
    return cases


def _solution_summary(sol: StaticSolution) -> dict:
    return {
        "theta_rad": list(sol.configuration.theta),
        "fingertip_m": list(sol.fingertip.position),
        "deflection_y_m": sol.deflection_y,
        "iterations": sol.iterations,
        "tensions_n": list(sol.tensions.as_tuple()),
    }


def equilibrium_report(
    geom: FingerGeometry,
    specs,
    q: float,
    cases,
    *,
    threshold: float = 1e-6,
    max_iterations: int = 100,
    grid: int = DEFAULT_GRID,
    refine_rounds: int = DEFAULT_REFINE_ROUNDS,
    literal_probe_payload: float | None = 3.0,
) -> dict:
    """Fixed-point vs energy-minimization comparison over load cases.

    Emits one entry per case with both equilibria, the fingertip gap and
    the balance residuals of both tension formulations at the energy
    pose. When `literal_probe_payload` is set, the wrap-integral solver
    is additionally run on that tip payload and its outcome recorded,
    documenting how far the literal formulation strays.
    """
    total_len = geom.total_length
    entries = []
    worst = 0.0
    for case in cases:
        load = case["load"]
        entry = {k: v for k, v in case.items() if k != "load"}
        entry["force_n"] = list(load.force)
        entry["moment_nm"] = load.moment
        entry["q_m"] = q
        try:
            sol = solve_static(
                q, geom, specs, load,
                threshold=threshold, max_iterations=max_iterations,
            )
        except TendonFingerError as exc:
            entry["fixed_point"] = {"error": f"{exc.__class__.__name__}: {exc}"}
            entries.append(entry)
            continue
        entry["fixed_point"] = _solution_summary(sol)

        try:
            eq = find_equilibrium(geom, specs, load, q,
                                  grid=grid, refine_rounds=refine_rounds)
        except TendonFingerError as exc:
            entry["energy_search"] = {"error": f"{exc.__class__.__name__}: {exc}"}
            entries.append(entry)
            continue
        model = _PotentialModel(geom, specs, load, q)
        energy_at_fp = float(model.total(
            np.asarray(sol.configuration.theta)[None, :]
        )[0])
        entry["energy_search"] = {
            "theta_rad": list(eq.theta),
            "fingertip_m": list(eq.fingertip),
            "energy_j": eq.energy,
            "energy_at_fixed_point_j": energy_at_fp,
            "evaluations": eq.evaluations,
        }
        delta = math.hypot(
            sol.fingertip.position[0] - eq.fingertip[0],
            sol.fingertip.position[1] - eq.fingertip[1],
        )
        entry["fingertip_delta_mm"] = delta * 1e3
        entry["delta_fraction_of_length"] = delta / total_len
        entry["balance_residuals_at_energy_pose"] = balance_residuals(
            eq.theta, geom, specs, load, q, sol.tensions.active_group
        )
        worst = max(worst, delta / total_len)
        entries.append(entry)

    report = {
        "cases": entries,
        "summary": {
            "max_delta_fraction_of_length": worst,
            "tolerance_fraction": 0.01,
            "within_tolerance": worst <= 0.01,
        },
    }

    if literal_probe_payload is not None:
        probe_load = ExternalLoad.tip_payload(
            literal_probe_payload, geom.gravity_accel
        )
        probe: dict = {"payload_kg": literal_probe_payload}
        try:
            lit = solve_static(
                q, geom, specs, probe_load,
                threshold=threshold, max_iterations=max_iterations,
                model="wrap-integral",
            )
            probe["status"] = "converged"
            probe["solution"] = _solution_summary(lit)
        except TendonFingerError as exc:
            probe["status"] = f"{exc.__class__.__name__}"
            probe["detail"] = str(exc)
            trace = getattr(exc, "trace", None)
            if trace:
                probe["last_iterations"] = [
                    {
                        "iteration": rec.index,
                        "fingertip_y_m": rec.fingertip_y,
                        "tensions_n": list(rec.tensions),
                        "residual_m": rec.residual,
                    }
                    for rec in trace[-3:]
                ]
        report["wrap_integral_probe"] = probe

    return report
