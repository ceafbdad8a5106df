"""Locating, refining, and tracing zero-energy degeneracy manifolds.

Chirality pins every studied degeneracy to E = 0, but the Lieb flat band
makes the smallest singular value of H(k) vanish identically, so the
detector used here is the magnitude of the lowest characteristic-polynomial
coefficient that is not structurally zero:

* Lieb (N = 3, odd chirality):  |c_1| = |PQ + RS|
* semimetal (N = 4):            |c_0| = |det Q| |det R|

Both are smooth functions of k whose zero set is exactly the set of
E = 0 degeneracies of raised multiplicity, and both are cheap closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import DegeneracyReport, classify_point, degeneracy_label
from .matkit import TolerancePolicy, spectral_norm
from .models import (
    HodsmSpec,
    LiebSpec,
    arccot,
    bloch_matrix,
    hodsm_pauli_coeffs,
    lieb_case,
    lieb_pqrs,
)

__all__ = [
    "ScanGrid",
    "DegeneracyCandidate",
    "ExpectedDegeneracy",
    "ManifoldSample",
    "bz_scan",
    "refine_degeneracy",
    "analytic_degeneracies",
    "trace_ring",
    "detector",
    "min_abs_energy",
    "canonical_k",
]

REFINE_TOL = 1e-12  # on the normalized detector
REFINE_MAX_ITER = 100


@dataclass(frozen=True)
class ScanGrid:
    """Uniform sampling of the zone, half-open per axis to avoid wrap duplicates."""

    dims: int
    resolution: int | tuple[int, ...] = 128
    ranges: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.dims not in (2, 3):
            raise ValueError("dims must be 2 or 3")
        res = self.resolution
        if isinstance(res, int):
            res = (res,) * self.dims
        if len(res) != self.dims or any(r < 8 for r in res):
            raise ValueError("need a resolution of at least 8 per axis")
        object.__setattr__(self, "resolution", tuple(res))
        ranges = self.ranges or ((-math.pi, math.pi),) * self.dims
        if len(ranges) != self.dims:
            raise ValueError("one range per axis required")
        object.__setattr__(self, "ranges", tuple((float(a), float(b)) for a, b in ranges))

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(a, b, r, endpoint=False)
            for (a, b), r in zip(self.ranges, self.resolution)
        ]

    def cell_diagonal(self) -> float:
        return math.sqrt(
            sum(((b - a) / r) ** 2 for (a, b), r in zip(self.ranges, self.resolution))
        )


@dataclass
class DegeneracyCandidate:
    k: tuple[float, ...]
    min_abs_energy: float
    refined: bool
    report: DegeneracyReport | None = None


@dataclass(frozen=True)
class ExpectedDegeneracy:
    """Closed-form degeneracy location with the expected fingerprint attached."""

    k: tuple[float, ...]
    alpha: int
    gamma: int
    partials: tuple[int, ...]

    @property
    def label(self) -> str:
        return degeneracy_label(self.alpha, self.gamma)


@dataclass
class ManifoldSample:
    k: tuple[float, float]
    report: DegeneracyReport


def canonical_k(k) -> tuple[float, ...]:
    """Map momentum components into the principal zone (-pi, pi]."""
    return tuple(math.pi - ((math.pi - float(c)) % (2 * math.pi)) for c in k)


def _structural_zeros(model) -> int:
    # chiral odd dimension forces one eigenvalue pinned at zero (the flat band)
    return 1 if isinstance(model, LiebSpec) else 0


def _model_scale(model) -> float:
    pts = np.linspace(-math.pi, math.pi, 7, endpoint=False)
    worst = 0.0
    if isinstance(model, LiebSpec):
        for kx in pts:
            for ky in pts:
                worst = max(worst, spectral_norm(bloch_matrix(model, (kx, ky))))
    else:
        for kx in pts:
            for ky in pts:
                for kz in pts:
                    worst = max(worst, spectral_norm(bloch_matrix(model, (kx, ky, kz))))
    return 1.0 + worst


def _detector_complex(model, k) -> complex:
    if isinstance(model, LiebSpec):
        p, q, r, s = lieb_pqrs(model, k)
        return p * q + r * s
    qc, rc = hodsm_pauli_coeffs(model, k)
    det_q = qc[0] ** 2 - qc[1] ** 2 - qc[2] ** 2 - qc[3] ** 2
    det_r = rc[0] ** 2 - rc[1] ** 2 - rc[2] ** 2 - rc[3] ** 2
    return complex(det_q * det_r)


def _detector_degree(model) -> int:
    return 2 if isinstance(model, LiebSpec) else 4


def detector(model, k, scale: float | None = None) -> float:
    """Normalized degeneracy detector; vanishes exactly on the E = 0 manifold."""
    scale = scale or _model_scale(model)
    return abs(_detector_complex(model, k)) / scale ** _detector_degree(model)


def _detector_grid(model, axes: list[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    if isinstance(model, LiebSpec):
        kx, ky = mesh
        if model.variant == "general":
            vals = np.empty(kx.shape, dtype=complex)
            for idx in np.ndindex(kx.shape):
                vals[idx] = _detector_complex(model, (kx[idx], ky[idx]))
            return np.abs(vals)
        if model.variant == "reciprocal":
            p = np.exp(1j * ky) - np.exp(1j * model.phi)
            q = np.exp(-1j * ky) - np.exp(1j * model.phi)
            r = np.exp(-1j * kx) - np.exp(1j * model.psi)
            s = np.exp(1j * kx) - np.exp(1j * model.psi)
        else:
            eps = model.epsilon or 0.0
            pp = qq = rr = ss = 1.0 + 0j
            if model.variant == "nh-symmetric":
                pp = qq = 1 + 1j * eps
                rr = ss = 1 - 1j * eps
            elif model.variant == "minimal-fep":
                pp = 1 + 1j * eps
                ss = 1 - 1j * eps
            p = pp + np.exp(1j * ky)
            q = qq + np.exp(-1j * ky)
            r = rr + np.exp(-1j * kx)
            s = ss + np.exp(1j * kx)
        return np.abs(p * q + r * s)
    kx, ky, kz = mesh
    tz = model.t + 0.5 * model.s * np.cos(kz)
    p0 = tz + model.s * np.cos(kx)
    p1 = 1j * model.s * np.sin(ky)
    p2 = 1j * (tz + model.s * np.cos(ky))
    p3 = 1j * model.s * np.sin(kx)
    q0, q1, q2, q3 = p0.copy(), p1.copy(), p2.copy(), p3.copy()
    r0, r1, r2, r3 = p0.conj(), p1.conj(), p2.conj(), p3.conj()
    eps = model.epsilon
    if model.variant == 1:
        q1 = q1 + eps / 2
        q2 = q2 - 1j * eps / 2
        r1 = r1 - eps / 2
        r2 = r2 - 1j * eps / 2
    elif model.variant == 2:
        q0 = q0 + eps / 2
        q3 = q3 + eps / 2
        r1 = r1 - eps / 2
        r2 = r2 - 1j * eps / 2
    elif model.variant == 3:
        q3 = q3 - eps
    elif model.variant == 4:
        q0 = q0 + eps / 2
        q1 = q1 - eps / 2
        q2 = q2 + 1j * eps / 2
        q3 = q3 + eps / 2
    det_q = q0**2 - q1**2 - q2**2 - q3**2
    det_r = r0**2 - r1**2 - r2**2 - r3**2
    return np.abs(det_q * det_r)


def min_abs_energy(model, k) -> float:
    """Smallest |E| over the dispersive bands (flat-band zeros excluded)."""
    ev = np.sort(np.abs(np.linalg.eigvals(bloch_matrix(model, k))))
    return float(ev[_structural_zeros(model)])


def refine_degeneracy(
    model,
    k0,
    policy: TolerancePolicy | None = None,
    scale: float | None = None,
) -> DegeneracyCandidate:
    """Damped Gauss-Newton descent of the detector from the starting momentum.

    The complex detector gives two real residuals; in three dimensions the
    system is underdetermined and the minimum-norm step is taken, which
    converges to the nearest point of the degeneracy manifold.  Convergence
    means the normalized detector falls below 1e-12; otherwise the candidate
    is returned with ``refined=False`` after 100 iterations.
    """
    policy = policy or TolerancePolicy()
    scale = scale or _model_scale(model)
    norm_pow = scale ** _detector_degree(model)
    k = np.asarray([float(c) for c in k0], dtype=float)

    def residual(kk) -> np.ndarray:
        g = _detector_complex(model, kk) / norm_pow
        return np.array([g.real, g.imag])

    r = residual(k)
    step_h = 1e-6
    for _ in range(REFINE_MAX_ITER):
        if np.linalg.norm(r) <= REFINE_TOL:
            break
        jac = np.empty((2, k.size))
        for j in range(k.size):
            dk = np.zeros_like(k)
            dk[j] = step_h
            jac[:, j] = (residual(k + dk) - residual(k - dk)) / (2 * step_h)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        damp = 1.0
        for _ in range(30):
            k_new = k + damp * step
            r_new = residual(k_new)
            if np.linalg.norm(r_new) < np.linalg.norm(r):
                k, r = k_new, r_new
                break
            damp /= 2
        else:
            break

    refined = bool(np.linalg.norm(residual(k)) <= REFINE_TOL)
    kc = canonical_k(k)
    return DegeneracyCandidate(
        k=kc, min_abs_energy=min_abs_energy(model, kc), refined=refined
    )


def _periodic_distance(a, b) -> float:
    return math.sqrt(
        sum((math.pi - abs(abs(x - y) % (2 * math.pi) - math.pi)) ** 2 for x, y in zip(a, b))
    )


def bz_scan(
    model,
    grid: ScanGrid | None = None,
    policy: TolerancePolicy | None = None,
    *,
    classify: bool = False,
) -> list[DegeneracyCandidate]:
    """Grid-scan the zone for E = 0 degeneracies and refine every local minimum.

    Kept candidates are refined, have their smallest dispersive |E| below
    ten cluster radii, and are deduplicated within one grid-cell diagonal
    (periodic metric).  The result is sorted lexicographically by k.
    """
    policy = policy or TolerancePolicy()
    dims = 2 if isinstance(model, LiebSpec) else 3
    grid = grid or ScanGrid(dims=dims)
    if grid.dims != dims:
        raise ValueError(f"grid dims {grid.dims} do not match the model ({dims})")
    scale = _model_scale(model)

    axes = grid.axes()
    vals = _detector_grid(model, axes)
    is_min = np.ones(vals.shape, dtype=bool)
    for axis in range(dims):
        for shift in (1, -1):
            is_min &= vals <= np.roll(vals, shift, axis=axis)
    seeds = np.argwhere(is_min)
    if len(seeds) > 5000:
        order = np.argsort(vals[is_min])[:5000]
        seeds = seeds[order]

    kept: list[DegeneracyCandidate] = []
    energy_cut = 10 * policy.cluster_radius(scale - 1.0)
    radius = grid.cell_diagonal()
    for idx in seeds:
        k0 = tuple(axes[d][idx[d]] for d in range(dims))
        cand = refine_degeneracy(model, k0, policy, scale=scale)
        if not cand.refined or cand.min_abs_energy > energy_cut:
            continue
        if any(_periodic_distance(cand.k, other.k) < radius for other in kept):
            continue
        kept.append(cand)

    kept.sort(key=lambda c: c.k)
    if classify:
        for cand in kept:
            cand.report = classify_point(
                bloch_matrix(model, cand.k), 0.0, policy, k_point=cand.k
            )
    return kept


def _expected_from_case(model: LiebSpec, k) -> ExpectedDegeneracy:
    case, degen = lieb_case(*lieb_pqrs(model, k))
    if not degen:
        raise ValueError(f"momentum {k} is not on the degeneracy set")
    partials = {"CASE1": (3,), "CASE2": (2, 1), "CASE3": (1, 1, 1)}[case]
    return ExpectedDegeneracy(
        k=canonical_k(k), alpha=3, gamma=len(partials), partials=partials
    )


def analytic_degeneracies(model) -> list[ExpectedDegeneracy]:
    """The closed-form degeneracy catalog of the named model variants.

    For the reciprocal Lieb model with equal angles only the two isolated
    FEPs are listed; the rest of the exceptional ring/lines is a continuum
    handled by ``trace_ring``.
    """
    if isinstance(model, LiebSpec):
        if model.variant == "hermitian":
            return [
                ExpectedDegeneracy(
                    k=(math.pi, math.pi), alpha=3, gamma=3, partials=(1, 1, 1)
                )
            ]
        if model.variant == "nh-symmetric":
            eps = model.epsilon
            if not 0 < abs(eps) < 2:
                raise ValueError("nh-symmetric catalog needs 0 < |eps| < 2")
            k0 = math.acos(eps**2 / 2 - 1)
            return [
                _expected_from_case(model, (mu * k0, nu * k0))
                for mu in (1, -1)
                for nu in (1, -1)
            ]
        if model.variant == "minimal-fep":
            eps = model.epsilon
            if eps == 0:
                raise ValueError("minimal-fep catalog needs eps != 0")
            kappa = 2 * arccot(eps / 2)
            return [
                _expected_from_case(model, (math.pi, math.pi)),
                _expected_from_case(model, (kappa, -kappa)),
            ]
        if model.variant == "reciprocal":
            phi, psi = model.phi, model.psi
            if math.isclose(math.sin(phi), 0.0, abs_tol=1e-12) or math.isclose(
                math.sin(psi), 0.0, abs_tol=1e-12
            ):
                raise ValueError("reciprocal catalog needs phi, psi != 0 (mod pi)")
            if math.isclose(
                math.cos(phi - psi), 1.0, abs_tol=1e-12
            ):  # phi == psi (mod 2 pi): ring or lines, isolated FEPs only
                return [
                    _expected_from_case(model, (phi, phi)),
                    _expected_from_case(model, (-phi, -phi)),
                ]
            return [
                _expected_from_case(model, (sx * psi, sy * phi))
                for sx in (1, -1)
                for sy in (1, -1)
            ]
        raise ValueError("no analytic catalog for lieb:general")

    spec: HodsmSpec = model
    eps = spec.epsilon
    out: list[ExpectedDegeneracy] = []

    def on_axis(kz: float, alpha: int, gamma: int, partials) -> ExpectedDegeneracy:
        return ExpectedDegeneracy(
            k=canonical_k((0.0, 0.0, kz)), alpha=alpha, gamma=gamma, partials=tuple(partials)
        )

    if spec.variant == 0:
        for base, shift in ((-2 - 2 * spec.t / spec.s, 0.0), (2 - 2 * spec.t / spec.s, math.pi)):
            if abs(base) <= 1:
                kz = math.acos(base)
                for sgn in (1, -1):
                    out.append(
                        ExpectedDegeneracy(
                            k=canonical_k((shift, shift, sgn * kz)),
                            alpha=4,
                            gamma=4,
                            partials=(1, 1, 1, 1),
                        )
                    )
        return out

    if not (spec.s == 1.0 and spec.t == -1.0):
        raise ValueError("non-Hermitian catalog assumes the s = -t = 1 normalization")
    if eps == 0:
        raise ValueError("non-Hermitian catalog needs eps != 0")

    if spec.variant == 1:
        out += [on_axis(sgn * math.pi / 2, 2, 2, (1, 1)) for sgn in (1, -1)]
        if abs(eps) < 1:
            for c in (abs(eps), -abs(eps)):
                kz = math.acos(c)
                out += [on_axis(sgn * kz, 4, 1, (4,)) for sgn in (1, -1)]
    elif spec.variant == 2:
        out += [on_axis(sgn * math.pi / 2, 4, 2, (3, 1)) for sgn in (1, -1)]
        if abs(eps) < 1:
            kz = math.acos(-eps)
            out += [on_axis(sgn * kz, 4, 2, (3, 1)) for sgn in (1, -1)]
    elif spec.variant == 3:
        out += [on_axis(sgn * math.pi / 2, 4, 2, (2, 2)) for sgn in (1, -1)]
        if abs(eps) * math.sqrt(2) < 1:
            for c in (math.sqrt(2) * eps, -math.sqrt(2) * eps):
                kz = math.acos(c)
                out += [on_axis(sgn * kz, 2, 1, (2,)) for sgn in (1, -1)]
    else:
        out += [on_axis(sgn * math.pi / 2, 4, 3, (2, 1, 1)) for sgn in (1, -1)]
        if abs(2 * eps) < 1:
            kz = math.acos(-2 * eps)
            out += [on_axis(sgn * kz, 2, 1, (2,)) for sgn in (1, -1)]

    dedup: list[ExpectedDegeneracy] = []
    for e in out:
        if not any(_periodic_distance(e.k, d.k) < 1e-9 for d in dedup):
            dedup.append(e)
    dedup.sort(key=lambda e: e.k)
    return dedup


def trace_ring(
    model: LiebSpec,
    samples: int,
    policy: TolerancePolicy | None = None,
) -> list[ManifoldSample]:
    """Classify uniformly spread samples of the exceptional ring (or lines).

    The manifold cos kx + cos ky = 2 cos(phi) of the equal-angle reciprocal
    model is parameterized by a uniform kx ladder with both ky branches; the
    ladder points nearest to the two analytic FEP momenta are snapped onto
    them exactly, so those special points are always among the samples.
    """
    policy = policy or TolerancePolicy()
    if model.variant != "reciprocal":
        raise ValueError("trace_ring needs the reciprocal variant")
    if not math.isclose(math.cos(model.phi - model.psi), 1.0, abs_tol=1e-12):
        raise ValueError("trace_ring needs the phi == psi configuration")
    if samples < 8:
        raise ValueError("need at least 8 samples")
    c = math.cos(model.phi)
    if abs(2 * c) > 2:
        raise ValueError("empty manifold")  # unreachable, guarded anyway

    # valid kx domain: |2c - cos kx| <= 1.  For c >= 0 it is one interval
    # through kx = 0; for c < 0 it wraps through kx = pi; at c = 0 both
    # bounds are trivial and the domain is the full circle.
    m = (samples + 1) // 2  # two branch samples per ladder point
    lo, hi = max(-1.0, 2 * c - 1), min(1.0, 2 * c + 1)
    if lo <= -1.0 and hi >= 1.0:
        ladder = np.linspace(-math.pi, math.pi, m, endpoint=False)
    elif hi >= 1.0:
        kmax = math.acos(lo)
        ladder = -kmax + (np.arange(m) + 0.5) * (2 * kmax / m)
    else:
        kmin = math.acos(hi)
        width = math.pi - kmin
        ladder = kmin + (np.arange(m) + 0.5) * (2 * width / m)
        ladder = np.where(ladder > math.pi, ladder - 2 * math.pi, ladder)

    ladder = ladder.copy()
    phi_c = canonical_k((model.phi,))[0]
    snapped: list[int] = []
    for special in (phi_c, -phi_c):
        dist = np.abs(ladder - special)
        dist[snapped] = np.inf
        j = int(np.argmin(dist))
        ladder[j] = special
        snapped.append(j)

    out: list[ManifoldSample] = []
    for kx in ladder:
        cy = min(1.0, max(-1.0, 2 * c - math.cos(kx)))
        ky = math.acos(cy)
        for branch in (ky, -ky):
            k = (float(kx), float(branch))
            report = classify_point(bloch_matrix(model, k), 0.0, policy, k_point=k)
            out.append(ManifoldSample(k=k, report=report))
            if len(out) == samples:
                return out
    return out
