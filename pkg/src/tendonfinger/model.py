"""
Core data model and kinematics of a synchronously coupled tendon finger.

Three rigid links form a planar chain. A single actuating tendon
displacement q drives all joints through guide cylinders of radius R_i
mounted at each joint, so the relative joint angles are coupled as
theta_i = q / R_i.

Conventions (used everywhere in this package):
  x axis : along the straight finger (q = 0 pose), base joint at origin
  y axis : up; gravity acts along -y
  angles : counter-clockwise positive; the flexion tendon group pulls
           joints toward positive theta, the extension group toward
           negative theta
  units  : SI internally (meters, kilograms, newtons, radians); config
           documents may declare mm/g, converted once at parse time
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeExceeded

THETA1_MIN = -math.pi / 2
THETA1_MAX = math.pi / 2

_TOL = 1e-12


class TendonGroup(enum.Enum):
    FLEXION = "flexion"
    EXTENSION = "extension"


@dataclass(frozen=True)
class FingerGeometry:
    """Static description of the finger: links, guide radii, masses.

    Lengths may be zero (degenerate links are allowed for workspace
    sweeps); the wrap-geometry feasibility conditions R1+R2 < L1 and
    R2+R3 < L2 are enforced where the statics actually needs them.
    """

    link_lengths: tuple[float, float, float]
    guide_radii: tuple[float, float, float]
    link_masses: tuple[float, float, float] = (0.0, 0.0, 0.0)
    com_fractions: tuple[float, float, float] = (0.5, 0.5, 0.5)
    gravity_accel: float = 9.81

    def __post_init__(self):
        for name, triple in (
            ("link_lengths", self.link_lengths),
            ("guide_radii", self.guide_radii),
            ("link_masses", self.link_masses),
            ("com_fractions", self.com_fractions),
        ):
            if len(triple) != 3:
                raise ValueError(f"{name} must have exactly 3 entries")
            if not all(math.isfinite(v) for v in triple):
                raise ValueError(f"{name} contains a non-finite value")
        if any(v < 0.0 for v in self.link_lengths):
            raise ValueError("link lengths must be >= 0")
        if any(v <= 0.0 for v in self.guide_radii):
            raise ValueError("guide radii must be > 0")
        if any(v < 0.0 for v in self.link_masses):
            raise ValueError("link masses must be >= 0")
        if any(not 0.0 <= v <= 1.0 for v in self.com_fractions):
            raise ValueError("com fractions must lie in [0, 1]")
        if not math.isfinite(self.gravity_accel) or self.gravity_accel < 0.0:
            raise ValueError("gravity_accel must be finite and >= 0")

    @property
    def total_length(self) -> float:
        return float(sum(self.link_lengths))

    def wrap_feasible(self) -> bool:
        """True when both tendon wrap circles clear their link spans."""
        r1, r2, r3 = self.guide_radii
        l1, l2, _ = self.link_lengths
        return (r1 + r2) < l1 and (r2 + r3) < l2


@dataclass(frozen=True)
class TendonSpec:
    """Elastic and routing properties of one tendon."""

    youngs_modulus: float
    cross_section_area: float
    rest_length: float
    group: TendonGroup
    index: int

    def __post_init__(self):
        if self.youngs_modulus <= 0.0:
            raise ValueError("youngs_modulus must be > 0")
        if self.cross_section_area <= 0.0:
            raise ValueError("cross_section_area must be > 0")
        if self.rest_length <= 0.0:
            raise ValueError("rest_length must be > 0")
        if self.index not in (1, 2, 3):
            raise ValueError("tendon index must be 1, 2 or 3")

    @property
    def axial_stiffness(self) -> float:
        """E*A, newtons per unit strain."""
        return self.youngs_modulus * self.cross_section_area


@dataclass(frozen=True)
class Configuration:
    """Actuating displacement q plus the three joint angles.

    Only theta_1 is range-limited; elasticity-corrected configurations
    need not satisfy the rigid coupling theta_i = q / R_i.
    """

    q: float
    theta: tuple[float, float, float]

    def __post_init__(self):
        if len(self.theta) != 3:
            raise ValueError("theta must have exactly 3 entries")
        if not all(math.isfinite(v) for v in self.theta):
            raise ValueError("theta contains a non-finite value")
        t1 = self.theta[0]
        if t1 < THETA1_MIN - _TOL or t1 > THETA1_MAX + _TOL:
            raise RangeExceeded(
                f"theta_1 = {t1:.6f} rad outside [{THETA1_MIN:.6f}, {THETA1_MAX:.6f}]"
            )


@dataclass(frozen=True)
class ExternalLoad:
    """Planar force, out-of-plane moment and where the force acts.

    application_point None means the fingertip; otherwise a fixed point
    given in the base frame (treated as attached to the distal link).
    """

    force: tuple[float, float] = (0.0, 0.0)
    moment: float = 0.0
    application_point: tuple[float, float] | None = None

    def __post_init__(self):
        vals = [*self.force, self.moment]
        if self.application_point is not None:
            vals.extend(self.application_point)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("load components must be finite")

    @staticmethod
    def tip_payload(mass_kg: float, gravity_accel: float = 9.81) -> "ExternalLoad":
        """Hanging mass at the fingertip."""
        return ExternalLoad(force=(0.0, -mass_kg * gravity_accel), moment=0.0)


@dataclass(frozen=True)
class FingertipState:
    """Fingertip position plus the chain of link end points."""

    position: tuple[float, float]
    joint_positions: tuple[tuple[float, float], ...]


def coupling_angles(q: float, geom: FingerGeometry) -> Configuration:
    """Rigid-tendon joint angles for displacement q: theta_i = q / R_i."""
    theta = tuple(q / r for r in geom.guide_radii)
    return Configuration(q=q, theta=theta)


def cumulative_angles(theta) -> np.ndarray:
    """Absolute link angles: angle of link i is theta_1 + ... + theta_i."""
    return np.cumsum(np.asarray(theta, dtype=float))


def chain_points(config: Configuration, geom: FingerGeometry) -> np.ndarray:
    """Joint origins and fingertip, shape (4, 2): [J1, J2, J3, tip]."""
    phi = cumulative_angles(config.theta)
    steps = np.column_stack(
        (np.asarray(geom.link_lengths) * np.cos(phi),
         np.asarray(geom.link_lengths) * np.sin(phi))
    )
    pts = np.zeros((4, 2))
    pts[1:] = np.cumsum(steps, axis=0)
    return pts


def com_points(config: Configuration, geom: FingerGeometry) -> np.ndarray:
    """Center-of-mass position of each link, shape (3, 2)."""
    phi = cumulative_angles(config.theta)
    pts = chain_points(config, geom)
    frac = np.asarray(geom.com_fractions)
    lengths = np.asarray(geom.link_lengths)
    offsets = np.column_stack(
        (frac * lengths * np.cos(phi), frac * lengths * np.sin(phi))
    )
    return pts[:3] + offsets


def forward_kinematics(config: Configuration, geom: FingerGeometry) -> FingertipState:
    """Fingertip and link end points for a configuration.

    x = sum_i L_i cos(theta_1 + ... + theta_i), same with sin for y.
    """
    pts = chain_points(config, geom)
    tip = (float(pts[3, 0]), float(pts[3, 1]))
    reach = geom.total_length
    if math.hypot(*tip) > reach + 1e-9:
        raise ValueError("fingertip left the reachable disk (numerical fault)")
    joints = tuple((float(p[0]), float(p[1])) for p in pts[1:])
    return FingertipState(position=tip, joint_positions=joints)


def fingertip_from_displacement(q: float, geom: FingerGeometry) -> FingertipState:
    """Fingertip for displacement q; identical to the two-step pipeline."""
    return forward_kinematics(coupling_angles(q, geom), geom)


def jacobian(q: float, geom: FingerGeometry) -> np.ndarray:
    """d(fingertip)/dq of the coupled chain, shape (2,).

    The absolute angle of link i is q * C_i with C_i = sum_{j<=i} 1/R_j,
    so d x/d q = -sum_i L_i C_i sin(q C_i) and d y/d q the cosine form.
    """
    coupling_angles(q, geom)  # range check only
    lengths = np.asarray(geom.link_lengths)
    rates = np.cumsum(1.0 / np.asarray(geom.guide_radii))
    phi = q * rates
    dx = -np.sum(lengths * rates * np.sin(phi))
    dy = np.sum(lengths * rates * np.cos(phi))
    return np.array([dx, dy])
