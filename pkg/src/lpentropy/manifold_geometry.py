"""Geodesic bubbles on model manifolds and their small-scale expansions.

A bubble is a cut-off, rescaled copy of the Euclidean extremal profile
planted at a point of a round sphere or a flat torus:

    u_eps(r) = eta(r) * eps^{-n/p} * u0(r / eps),

with r the geodesic distance and eta a C^1 cutoff.  As eps -> 0 the mass,
entropy, and gradient integrals admit expansions whose eps^2 coefficients
are controlled by the scalar curvature R:

    mass    = 1 - (R/(6n)) J1 eps^2 + O(eps^4)
    entropy = I1 - n ln(eps) + (R/6) J1 eps^2 ln(eps) - (R/(6n)) J3 eps^2 + ...
    grad    = eps^{-p} ( I2 - (R/(6n)) J2 eps^2 + O(eps^4) )

where I1, I2 are the flat entropy and gradient integrals of u0 and the
J's are its second moments.  `fit_expansion` recovers the curvature
coefficients numerically and compares them with those closed forms;
`lower_bound_witness` uses the same bubbles to exhibit violations of an
entropy inequality whose leading constant A is below the sharp one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import trapezoid

from .constants import entropy_best_constant
from .errors import AccuracyNotMet, DomainError
from .profiles import ExtremalSpec, extremal_integrals, extremal_spec, plogp
from .special_fn import sphere_area

__all__ = [
    "ManifoldModel",
    "geodesic_density",
    "BubbleSpec",
    "BubbleIntegrals",
    "bubble_integrals",
    "ExpansionReport",
    "fit_expansion",
    "WitnessReport",
    "lower_bound_witness",
]

_MIN_NODES_PER_DECADE = 50


@dataclass(frozen=True)
class ManifoldModel:
    """Round sphere of a given radius or flat cubic torus of a given side."""

    kind: str
    dimension: int
    scale: float

    def __post_init__(self):
        if self.kind not in ("sphere", "torus"):
            raise DomainError(f"unknown manifold kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.dimension}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be positive and finite, got {self.scale}")

    @classmethod
    def sphere(cls, dimension: int, radius: float = 1.0) -> "ManifoldModel":
        return cls(kind="sphere", dimension=dimension, scale=radius)

    @classmethod
    def torus(cls, dimension: int, side: float = 1.0) -> "ManifoldModel":
        return cls(kind="torus", dimension=dimension, scale=side)

    @property
    def scalar_curvature(self) -> float:
        n = self.dimension
        if self.kind == "sphere":
            return n * (n - 1) / self.scale**2
        return 0.0

    @property
    def volume(self) -> float:
        n = self.dimension
        if self.kind == "sphere":
            return sphere_area(n + 1) * self.scale**n
        return self.scale**n

    @property
    def injectivity_radius(self) -> float:
        if self.kind == "sphere":
            return math.pi * self.scale
        return self.scale / 2.0


def geodesic_density(model: ManifoldModel, r) -> np.ndarray:
    """Jacobian of the exponential map: geodesic sphere area = area(S^{n-1}) r^{n-1} * density.

    Only valid strictly inside the injectivity radius.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= model.injectivity_radius * (1 + 1e-12)):
        raise DomainError(
            f"geodesic radius must lie in [0, {model.injectivity_radius:.6g})"
        )
    if model.kind == "torus":
        return np.ones_like(r)
    x = r / model.scale
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, (np.sin(safe) / safe) ** (model.dimension - 1), 1.0)


@dataclass(frozen=True)
class BubbleSpec:
    """A rescaled extremal profile cut off inside a geodesic ball."""

    model: ManifoldModel
    base: ExtremalSpec
    delta: float
    eps: float

    def __post_init__(self):
        if self.base.n != self.model.dimension:
            raise DomainError(
                f"base profile dimension {self.base.n} does not match "
                f"manifold dimension {self.model.dimension}"
            )
        inj = self.model.injectivity_radius
        if not 0 < 2 * self.eps < self.delta < inj:
            raise DomainError(
                f"need 0 < 2*eps < delta < injectivity radius {inj:.6g}, "
                f"got eps={self.eps}, delta={self.delta}"
            )


def _cutoff(r: np.ndarray, delta: float) -> np.ndarray:
    """C^1 cubic cutoff: 1 on [0, delta/2], 0 at delta, monotone between."""
    s = np.clip((r - delta / 2.0) / (delta / 2.0), 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def _cutoff_derivative(r: np.ndarray, delta: float) -> np.ndarray:
    s = (r - delta / 2.0) / (delta / 2.0)
    inside = (s > 0.0) & (s < 1.0)
    out = np.zeros_like(r)
    out[inside] = -6.0 * s[inside] * (1.0 - s[inside]) / (delta / 2.0)
    return out


@dataclass(frozen=True)
class BubbleIntegrals:
    """Mass, entropy, and gradient integrals of one bubble, with error estimates."""

    mass_p: float
    entropy: float
    grad_p: float
    eps: float
    errors: dict

    def as_dict(self) -> dict:
        return {
            "mass_p": self.mass_p,
            "entropy": self.entropy,
            "grad_p": self.grad_p,
            "eps": self.eps,
            "errors": dict(self.errors),
        }


def _bubble_quadrature(spec: BubbleSpec, n_nodes: int) -> tuple:
    n = spec.model.dimension
    p = spec.base.p
    r_lo = spec.eps * 1e-7
    grid = np.geomspace(r_lo, spec.delta, n_nodes)
    area = sphere_area(n) * grid ** (n - 1) * geodesic_density(spec.model, grid)

    eta = _cutoff(grid, spec.delta)
    core = spec.base.value(grid / spec.eps)
    u = eta * spec.eps ** (-n / p) * core
    du = (
        _cutoff_derivative(grid, spec.delta) * core
        + eta * spec.base.derivative(grid / spec.eps) / spec.eps
    ) * spec.eps ** (-n / p)

    f_mass = area * u**p
    f_ent = area * plogp(u, p)
    f_grad = area * np.abs(du) ** p
    # trapezoid in r plus the analytically-known head [0, r_lo], where the
    # integrands behave like their r=0 values times r^{n-1}
    head = area[0] * grid[0] / n
    mass = float(trapezoid(f_mass, grid)) + head * u[0] ** p
    ent = float(trapezoid(f_ent, grid)) + head * plogp(np.array([u[0]]), p)[0]
    grad = float(trapezoid(f_grad, grid)) + head * abs(du[0]) ** p
    return mass, ent, grad


def bubble_integrals(spec: BubbleSpec, n_nodes: int = 200_000,
                     error_estimate: bool = True) -> BubbleIntegrals:
    """Mass, entropy, and gradient-energy integrals of the bubble.

    Uses a geometric grid from eps*1e-7 to delta; at least 50 nodes per
    decade are required.  When error_estimate is set, each integral is
    recomputed at half resolution and the difference is reported as a
    per-integral error estimate (the quadrature is second order, so this
    overestimates the fine-grid error by roughly a factor 3).
    """
    decades = math.log10(spec.delta / (spec.eps * 1e-7))
    if n_nodes < _MIN_NODES_PER_DECADE * decades:
        raise AccuracyNotMet(
            f"grid of {n_nodes} nodes under-resolves {decades:.1f} decades; "
            f"need at least {int(_MIN_NODES_PER_DECADE * decades) + 1}"
        )
    mass, ent, grad = _bubble_quadrature(spec, n_nodes)
    errors = {}
    if error_estimate:
        m2, e2, g2 = _bubble_quadrature(spec, n_nodes // 2)
        errors = {
            "mass_p": abs(mass - m2),
            "entropy": abs(ent - e2),
            "grad_p": abs(grad - g2),
        }
    return BubbleIntegrals(mass_p=mass, entropy=ent, grad_p=grad, eps=spec.eps, errors=errors)


def _wls(x: np.ndarray, y: np.ndarray, sigma: np.ndarray) -> tuple:
    """Weighted least squares; returns (coefficients, standard errors)."""
    sigma = np.where(sigma > 0, sigma, np.max(sigma[sigma > 0], initial=1e-300))
    w = 1.0 / sigma
    a = x * w[:, None]
    b = y * w
    coef, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    resid = a @ coef - b
    dof = max(len(y) - x.shape[1], 1)
    scale = max(float(resid @ resid) / dof, 1.0)
    cov = np.linalg.inv(a.T @ a) * scale
    return coef, np.sqrt(np.diag(cov))


@dataclass(frozen=True)
class ExpansionReport:
    """Fitted curvature coefficients of the bubble expansions vs closed forms."""

    fits: dict
    rows: tuple
    eps_window: tuple
    reference: dict
    warnings: tuple

    def as_dict(self) -> dict:
        return {
            "fits": {k: dict(v) for k, v in self.fits.items()},
            "rows": [dict(r) for r in self.rows],
            "eps_window": list(self.eps_window),
            "reference": dict(self.reference),
            "warnings": list(self.warnings),
        }


def fit_expansion(model: ManifoldModel, p: float, b: float, delta: float,
                  eps_grid, n_nodes: int = 200_000) -> ExpansionReport:
    """Fit the eps^2 coefficients of the bubble expansions and compare.

    The mass and gradient series are fit as y = c2 eps^2 + c4 eps^4; the
    entropy series as y = c_log eps^2 ln(eps) + c2 eps^2 + c4 eps^4 ln(eps).
    Fits are weighted by per-point quadrature error estimates.  Targets:

        mass c2 = -(R/(6n)) J1      grad c2 = -(R/(6n)) J2
        entropy c_log = (R/6) J1    entropy c2 = -(R/(6n)) J3
    """
    n = model.dimension
    base = extremal_spec(n, p, b)
    eps_arr = np.sort(np.asarray(list(eps_grid), dtype=float))
    if len(eps_arr) < 4:
        raise DomainError("need at least 4 epsilon values to fit the expansions")
    warnings = []
    if eps_arr[-1] / eps_arr[0] < math.sqrt(10.0):
        warnings.append(
            "epsilon window spans less than half a decade; "
            "fitted coefficients are poorly separated"
        )

    flat = extremal_integrals(n, p, b)
    i1, i2 = flat.entropy, flat.grad_energy
    j1, j2, j3 = flat.mass_moment2, flat.grad_moment2, flat.entropy_moment2
    curv = model.scalar_curvature
    targets = {
        "mass_c2": -(curv / (6 * n)) * j1,
        "grad_c2": -(curv / (6 * n)) * j2,
        "entropy_clog": (curv / 6) * j1,
        "entropy_c2": -(curv / (6 * n)) * j3,
    }

    rows = []
    for e in eps_arr:
        spec = BubbleSpec(model=model, base=base, delta=delta, eps=float(e))
        bi = bubble_integrals(spec, n_nodes=n_nodes, error_estimate=True)
        rows.append(
            {
                "eps": float(e),
                "mass_p": bi.mass_p,
                "entropy": bi.entropy,
                "grad_p": bi.grad_p,
                **{f"err_{k}": v for k, v in bi.errors.items()},
            }
        )

    eps2 = eps_arr**2
    ln_e = np.log(eps_arr)
    y_mass = np.array([r["mass_p"] for r in rows]) - 1.0
    y_grad = np.array([r["grad_p"] for r in rows]) * eps_arr**p - i2
    y_ent = np.array([r["entropy"] for r in rows]) - i1 + n * ln_e
    sig_mass = np.array([r["err_mass_p"] for r in rows])
    sig_grad = np.array([r["err_grad_p"] for r in rows]) * eps_arr**p
    sig_ent = np.array([r["err_entropy"] for r in rows])

    fits = {}
    design2 = np.column_stack([eps2, eps2**2])
    for name, y, sig in (("mass", y_mass, sig_mass), ("grad", y_grad, sig_grad)):
        coef, err = _wls(design2, y, sig)
        target = targets[f"{name}_c2"]
        fits[name] = {
            "c2": float(coef[0]),
            "c2_stderr": float(err[0]),
            "c4": float(coef[1]),
            "target_c2": target,
            "rel_dev_c2": abs(coef[0] - target) / abs(target) if target != 0 else abs(coef[0]),
        }
    design3 = np.column_stack([eps2 * ln_e, eps2, eps2**2 * ln_e])
    coef, err = _wls(design3, y_ent, sig_ent)
    fits["entropy"] = {
        "clog": float(coef[0]),
        "clog_stderr": float(err[0]),
        "c2": float(coef[1]),
        "c2_stderr": float(err[1]),
        "target_clog": targets["entropy_clog"],
        "target_c2": targets["entropy_c2"],
        "rel_dev_clog": (
            abs(coef[0] - targets["entropy_clog"]) / abs(targets["entropy_clog"])
            if targets["entropy_clog"] != 0 else abs(coef[0])
        ),
        "rel_dev_c2": (
            abs(coef[1] - targets["entropy_c2"]) / abs(targets["entropy_c2"])
            if targets["entropy_c2"] != 0 else abs(coef[1])
        ),
    }

    return ExpansionReport(
        fits=fits,
        rows=tuple(rows),
        eps_window=(float(eps_arr[0]), float(eps_arr[-1])),
        reference={"entropy": i1, "grad": i2, "j1": j1, "j2": j2, "j3": j3,
                   "scalar_curvature": curv},
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class WitnessReport:
    """Bubble scan showing whether a candidate entropy inequality fails."""

    violated: bool
    eps_star: float
    margin: float
    asymptote: float
    rows: tuple

    def as_dict(self) -> dict:
        return {
            "violated": self.violated,
            "eps_star": self.eps_star,
            "margin": self.margin,
            "asymptote": self.asymptote,
            "rows": [dict(r) for r in self.rows],
        }


def lower_bound_witness(model: ManifoldModel, p: float, a_const: float, b_const: float,
                        eps_grid, b: float = 1.0, delta: float = None,
                        n_nodes: int = 200_000) -> WitnessReport:
    """Test the candidate manifold entropy inequality with constants (A, B).

    For each bubble the normalized form of the inequality reads

        Ent(u)/m + (n/p - 1) ln(m)  <=  (n/p) ln( A grad + B m ),

    with m, Ent, grad the bubble integrals.  margin = LHS - RHS, so a
    positive margin is a violation.  If A is below the sharp constant the
    margin tends to (n/p) ln(sharp/A) > 0 as eps -> 0; eps_star is the
    largest grid epsilon that already violates (nan if none does).
    """
    n = model.dimension
    if not 1 < p < n:
        raise DomainError(f"require 1 < p < n, got p={p}, n={n}")
    if a_const <= 0 or b_const < 0:
        raise DomainError("need A > 0 and B >= 0")
    if delta is None:
        delta = 0.5 * model.injectivity_radius
    base = extremal_spec(n, p, b)
    eps_arr = np.sort(np.asarray(list(eps_grid), dtype=float))[::-1]
    rows = []
    eps_star = math.nan
    for e in eps_arr:
        spec = BubbleSpec(model=model, base=base, delta=delta, eps=float(e))
        bi = bubble_integrals(spec, n_nodes=n_nodes, error_estimate=False)
        lhs = bi.entropy / bi.mass_p + (n / p - 1.0) * math.log(bi.mass_p)
        rhs = (n / p) * math.log(a_const * bi.grad_p + b_const * bi.mass_p)
        margin = lhs - rhs
        if margin > 0 and math.isnan(eps_star):
            eps_star = float(e)
        rows.append({"eps": float(e), "lhs": lhs, "rhs": rhs, "margin": margin})
    sharp = entropy_best_constant(n, p)
    return WitnessReport(
        violated=not math.isnan(eps_star),
        eps_star=eps_star,
        margin=rows[-1]["margin"],
        asymptote=(n / p) * math.log(sharp / a_const),
        rows=tuple(rows),
    )
