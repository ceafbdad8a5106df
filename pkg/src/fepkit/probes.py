"""Numerical experiments: response exponents, hinge spectra, decay rates, symmetries.

The resolvent trace P(E) = tr(G^dag G) diverges like |E - E_i|**(-2 ell) at a
degeneracy of maximal partial multiplicity ell, and a generic perturbation of
strength eps displaces the eigenvalues by ~ (eps xi)**(1/ell); both exponents
are extracted here by log-log fits that stay independent of the modal
machinery (direct inversion, direct diagonalization).

Hinge-state probes diagonalize the open-boundary Hamiltonian and summarize
its four lowest states by their Gram overlap rank and per-unit-cell
intensity maps; the atomistic probe classifies the exact zero modes of the
decoupled-corner parameter point; decay fits compare per-cell hinge-state
amplitude ratios against the double-semi-infinite values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components as sparse_connected_components

from .classify import DegeneracyReport, classify_point
from .matkit import TolerancePolicy
from .models import (
    HingeGeometry,
    HodsmSpec,
    LiebSpec,
    bloch_matrix,
    cell_index,
    hinge_hamiltonian,
    symmetry_operator,
)

__all__ = [
    "ExponentFit",
    "HingeReport",
    "DecayFit",
    "SymmetryCheckResult",
    "lineshape_exponent",
    "splitting_exponent",
    "hinge_report",
    "atomistic_classify",
    "symmetry_check",
    "decay_rate_fit",
    "SYMMETRY_KINDS",
]


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares power-law fit on a log-log window."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    mean_slope: float | None = None  # mean-over-directions law, reported not asserted


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def lineshape_exponent(
    h,
    energy: complex,
    ell: int,
    window: tuple[float, float] = (1e-3, 1e-2),
    points: int = 20,
    policy: TolerancePolicy | None = None,
) -> ExponentFit:
    """Fit log tr(G^dag G) against log |E - E_i| on a ray near the degeneracy.

    The ray leaves the degeneracy at 45 degrees to the direction of the
    nearest other eigenvalue, avoiding accidental pole alignment; the window
    must stay an order of magnitude inside the distance to that pole.  The
    expected slope is -2 ell.
    """
    policy = policy or TolerancePolicy()
    m = np.asarray(h, dtype=complex)
    energy = complex(energy)
    if window[0] >= window[1] or window[0] <= 0:
        raise ValueError("window must satisfy 0 < min < max")

    w = np.linalg.eigvals(m)
    radius = policy.cluster_radius(float(np.linalg.norm(m, 2)))
    others = w[np.abs(w - energy) > radius]
    if others.size:
        nearest = others[np.argmin(np.abs(others - energy))]
        if abs(nearest - energy) < 10 * window[1]:
            raise ValueError(
                f"window max {window[1]} collides with eigenvalue at distance "
                f"{abs(nearest - energy):.3e}"
            )
        direction = (nearest - energy) / abs(nearest - energy) * np.exp(1j * math.pi / 4)
    else:
        direction = np.exp(1j * math.pi / 4)

    radii = np.geomspace(window[0], window[1], points)
    eye = np.eye(m.shape[0])
    p_vals = np.array(
        [
            np.linalg.norm(np.linalg.inv((energy + r * direction) * eye - m), "fro") ** 2
            for r in radii
        ]
    )
    slope, intercept, r2 = _loglog_fit(radii, p_vals)
    return ExponentFit(slope=slope, intercept=intercept, r_squared=r2, window=window)


def splitting_exponent(
    h,
    energy: complex,
    ell: int,
    directions: int = 16,
    ladder: np.ndarray | None = None,
    policy: TolerancePolicy | None = None,
    rng: np.random.Generator | None = None,
) -> ExponentFit:
    """Fit the maximal eigenvalue displacement against perturbation strength.

    For each strength the degenerate multiplet of the perturbed matrix is the
    set of eigenvalues closest to the degeneracy, and the displacement is
    maximized over random unit-Frobenius perturbation directions with
    independent complex-normal entries.  The expected slope is 1 / ell.
    """
    policy = policy or TolerancePolicy()
    m = np.asarray(h, dtype=complex)
    energy = complex(energy)
    ladder = np.geomspace(1e-8, 1e-4, 9) if ladder is None else np.asarray(ladder, float)
    rng = rng or np.random.default_rng(7)

    w = np.linalg.eigvals(m)
    radius = policy.cluster_radius(float(np.linalg.norm(m, 2)))
    close = np.abs(w - energy) <= radius
    alpha = int(np.count_nonzero(close))
    if alpha == 0:
        raise ValueError(f"E = {energy} is not an eigenvalue within the cluster radius")
    others = w[~close]
    guard = float(np.min(np.abs(others - energy))) if others.size else math.inf

    n = m.shape[0]
    perturbations = []
    for _ in range(directions):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        perturbations.append(g / np.linalg.norm(g, "fro"))

    disp_max = np.empty(ladder.size)
    disp_mean = np.empty(ladder.size)
    for i, strength in enumerate(ladder):
        per_dir = []
        for wmat in perturbations:
            ev = np.linalg.eigvals(m + strength * wmat)
            split = np.sort(np.abs(ev - energy))[:alpha]
            per_dir.append(split.max())
        disp_max[i] = max(per_dir)
        disp_mean[i] = float(np.mean(per_dir))
        if disp_max[i] > 0.5 * guard:
            raise ValueError(
                f"ladder strength {strength:.2e} reaches the eigenvalue-collision scale"
            )

    slope, intercept, r2 = _loglog_fit(ladder, disp_max)
    mean_slope, _, _ = _loglog_fit(ladder, disp_mean)
    return ExponentFit(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        window=(float(ladder[0]), float(ladder[-1])),
        mean_slope=mean_slope,
    )


# ---------------------------------------------------------------------------
# Hinge-state reports


@dataclass
class HingeReport:
    """Spectrum and low-energy structure of one open-boundary system."""

    kz: float
    eigenvalues: np.ndarray  # sorted by (re, im)
    low_set: tuple[int, int, int, int]  # indices of the four smallest |E|
    gap_ratio: float  # |E_5| / |E_4| in the |E| ordering
    gram: np.ndarray  # 4x4 matrix of |<u_i, u_j>|
    gram_rank: int
    intensity_maps: np.ndarray  # (4, nx, ny), each summing to one


def hinge_report(
    spec: HodsmSpec,
    geom: HingeGeometry,
    policy: TolerancePolicy | None = None,
    *,
    gram_threshold: float = 0.1,
    eigensolver_cap: int = 4096,
) -> HingeReport:
    """Diagonalize the open system and summarize its four lowest states.

    ``gram_threshold`` is the singular-value cutoff (dimensionless overlap
    scale) deciding how many of the four unit-normalized right states are
    effectively independent; 0.1 separates near-parallel from near-orthogonal
    pairs by an order of magnitude at the sizes used here.
    """
    policy = policy or TolerancePolicy()
    n = geom.sites
    if n > eigensolver_cap:
        raise ValueError(f"{n} sites exceed the eigensolver cap {eigensolver_cap}")
    h = hinge_hamiltonian(spec, geom)
    if spec.variant == 0:
        w, u = np.linalg.eigh(h)
        w = w.astype(complex)
    else:
        w, u = np.linalg.eig(h)

    order = np.lexsort((w.imag, w.real))
    w, u = w[order], u[:, order]
    by_abs = np.argsort(np.abs(w), kind="stable")
    low = tuple(int(i) for i in by_abs[:4])
    gap_ratio = float(np.abs(w[by_abs[4]]) / max(np.abs(w[by_abs[3]]), 1e-300))

    states = u[:, list(low)]
    states = states / np.linalg.norm(states, axis=0, keepdims=True)
    gram = np.abs(states.conj().T @ states)
    s = np.linalg.svd(gram, compute_uv=False)
    gram_rank = int(np.count_nonzero(s > max(gram_threshold, policy.rank_rel * s[0])))

    intensity = np.abs(states) ** 2  # (n, 4)
    maps = intensity.T.reshape(4, geom.nx, geom.ny, 4).sum(axis=3)
    return HingeReport(
        kz=geom.kz,
        eigenvalues=w,
        low_set=low,
        gap_ratio=gap_ratio,
        gram=gram,
        gram_rank=gram_rank,
        intensity_maps=maps,
    )


def atomistic_classify(
    spec: HodsmSpec,
    policy: TolerancePolicy | None = None,
    *,
    cells: int = 3,
) -> DegeneracyReport:
    """Classify the exact zero modes of the decoupled-corner parameter point.

    Requires ``s cos kz = -2 t`` so the reduced intracell Hamiltonian loses
    its Hermitian part; the momentum is chosen as kz = arccos(-2t/s).  The
    open system spans ``cells x cells`` unit cells and is classified at E = 0
    through the rank-of-powers oracle (integer-exact partial multiplicities).
    """
    policy = policy or TolerancePolicy()
    ratio = -2.0 * spec.t / spec.s
    if abs(ratio) > 1.0:
        raise ValueError(
            f"atomistic limit needs |2t/s| <= 1 so that s cos kz = -2t is solvable; "
            f"got 2t/s = {-ratio}"
        )
    geom = HingeGeometry(nx=cells, ny=cells, kz=math.acos(ratio))
    h = hinge_hamiltonian(spec, geom)
    return classify_point(h, 0.0, policy, method="weyr")


# ---------------------------------------------------------------------------
# Symmetry checks

SYMMETRY_KINDS = (
    "chiral",
    "rotation-c4",
    "kramers",
    "sum-rule-ba",
    "sum-rule-cd",
    "reflection",
    "transposition",
)


@dataclass(frozen=True)
class SymmetryCheckResult:
    kind: str
    passed: bool
    max_violation: float
    witness: str


def _sublattice_block(h: np.ndarray, row_site: int, col_site: int) -> np.ndarray:
    return h[row_site::4, col_site::4]


def symmetry_check(
    spec,
    kind: str,
    geom: HingeGeometry | None = None,
    policy: TolerancePolicy | None = None,
    rng: np.random.Generator | None = None,
) -> SymmetryCheckResult:
    """Test one defining symmetry identity and report the worst violation.

    Bloch-level kinds (``chiral``, ``rotation-c4``) sample random momenta;
    the open-system kinds need a geometry.  ``kramers`` is a spectral check:
    every eigenvalue of the open system must appear with even multiplicity
    within the cluster radius.  Identities pass at ``1e-10`` of the natural
    scale of the compared quantity.
    """
    policy = policy or TolerancePolicy()
    rng = rng or np.random.default_rng(11)

    if kind == "chiral":
        dims = 2 if isinstance(spec, LiebSpec) else 3
        x = symmetry_operator("chiral-lieb" if dims == 2 else "chiral-dsm").matrix
        worst, at, scale = 0.0, "", 1.0
        for _ in range(100):
            k = rng.uniform(-math.pi, math.pi, size=dims)
            h = bloch_matrix(spec, k)
            scale = max(scale, 1.0 + float(np.max(np.abs(h))))
            v = float(np.max(np.abs(x @ h @ x + h)))
            if v > worst:
                worst, at = v, f"k = {tuple(round(c, 4) for c in k)}"
        return SymmetryCheckResult(kind, worst <= 1e-10 * scale, worst, at)

    if kind == "rotation-c4":
        if isinstance(spec, LiebSpec):
            raise ValueError("rotation-c4 applies to the semimetal lattice")
        c4 = symmetry_operator("rotation-c4").matrix
        worst, at = 0.0, ""
        for _ in range(100):
            kx, ky, kz = rng.uniform(-math.pi, math.pi, size=3)
            lhs = c4 @ bloch_matrix(spec, (kx, ky, kz)) @ np.linalg.inv(c4)
            rhs = bloch_matrix(spec, (ky, -kx, kz))
            v = float(np.max(np.abs(lhs - rhs)))
            if v > worst:
                worst, at = v, f"k = ({kx:.4f}, {ky:.4f}, {kz:.4f})"
        return SymmetryCheckResult(kind, worst <= 1e-10 * 10.0, worst, at)

    if geom is None:
        raise ValueError(f"symmetry kind {kind!r} needs an open-system geometry")
    if isinstance(spec, LiebSpec):
        raise ValueError("open-system symmetry checks apply to the semimetal lattice")
    h = hinge_hamiltonian(spec, geom)
    scale = 1.0 + float(np.linalg.norm(h, np.inf))

    if kind == "kramers":
        w = np.linalg.eigvalsh(h).astype(complex) if spec.variant == 0 else np.linalg.eigvals(h)
        radius = policy.cluster_radius(scale - 1.0)
        # single-linkage clusters of the spectrum at the cluster radius
        adjacency = np.abs(w[:, None] - w[None, :]) <= radius
        n_comp, labels = sparse_connected_components(adjacency)
        sizes = np.bincount(labels, minlength=n_comp)
        odd = [int(s) for s in sizes if s % 2]
        return SymmetryCheckResult(
            kind,
            not odd,
            float(len(odd)),
            f"{len(odd)} odd-multiplicity clusters of {n_comp}" if odd else "all even",
        )

    if kind in ("sum-rule-ba", "sum-rule-cd"):
        h2 = h @ h
        row, col = (1, 0) if kind == "sum-rule-ba" else (2, 3)
        block = _sublattice_block(h2, row, col)
        worst = float(np.max(np.abs(block)))
        idx = np.unravel_index(np.argmax(np.abs(block)), block.shape)
        return SymmetryCheckResult(
            kind, worst <= 1e-10 * scale**2, worst, f"(H^2) block entry {idx}"
        )

    r_op = symmetry_operator("generalized-reflection", geom).matrix
    if kind == "reflection":
        delta = r_op @ h @ r_op.T - h
    elif kind == "transposition":
        delta = r_op @ h.T @ r_op.T - h
    else:
        raise ValueError(f"unknown symmetry kind {kind!r}")
    worst = float(np.max(np.abs(delta)))
    idx = np.unravel_index(np.argmax(np.abs(delta)), delta.shape)
    return SymmetryCheckResult(kind, worst <= 1e-10 * scale, worst, f"entry {idx}")


# ---------------------------------------------------------------------------
# Decay-rate fits


@dataclass(frozen=True)
class DecayFit:
    """Exponential fit of a hinge-state amplitude profile along one axis."""

    ratio: float  # per-cell amplitude ratio
    r_squared: float
    corner: str
    axis: str
    cells: tuple[int, int]  # fitted cell-index window (distance from corner)


_CORNER_SITE = {"A": 0, "B": 1, "C": 2, "D": 3}


def _corner_cell(geom: HingeGeometry, corner: str) -> tuple[int, int]:
    return {
        "B": (1, 1),
        "D": (geom.nx, 1),
        "C": (1, geom.ny),
        "A": (geom.nx, geom.ny),
    }[corner]


def decay_rate_fit(
    spec: HodsmSpec,
    geom: HingeGeometry,
    corner: str,
    axis: str,
    policy: TolerancePolicy | None = None,
) -> DecayFit:
    """Fit the per-cell amplitude ratio of the hinge state at one corner.

    The state is the near-zero right eigenstate with the largest weight on
    the requested corner site (shift-invert Arnoldi around E = 0); its
    amplitude on the corner's own sublattice is fitted exponentially along
    the requested axis, walking inward from the corner.
    """
    policy = policy or TolerancePolicy()
    if corner not in _CORNER_SITE:
        raise ValueError("corner must be one of A, B, C, D")
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    length = geom.nx if axis == "x" else geom.ny
    if length < 30:
        raise ValueError(f"need at least 30 cells along the fitted axis, got {length}")

    h = hinge_hamiltonian(spec, geom)
    k_low = 6
    try:
        w, u = spla.eigs(sp.csc_matrix(h), k=k_low, sigma=0.0)
    except RuntimeError:  # exactly singular at sigma = 0
        w, u = spla.eigs(sp.csc_matrix(h), k=k_low, sigma=1e-6 * 1j)

    site = _CORNER_SITE[corner]
    cx, cy = _corner_cell(geom, corner)
    corner_index = 4 * cell_index(geom, cx, cy) + site
    u = u / np.linalg.norm(u, axis=0, keepdims=True)
    weights = np.abs(u[corner_index, :])
    best = int(np.argmax(weights))
    state = u[:, best]
    if weights[best] ** 2 < 1e-3:
        raise ValueError(f"no hinge state localized at corner {corner}")

    # amplitude on the corner's sublattice, walking inward from the corner
    steps = range(length)
    profile = np.empty(length)
    for d in steps:
        if axis == "x":
            x = cx + d if cx == 1 else cx - d
            y = cy
        else:
            x = cx
            y = cy + d if cy == 1 else cy - d
        profile[d] = abs(state[4 * cell_index(geom, x, y) + site])

    # avoid the corner cell itself and the far half where other corners leak in
    start, stop = 2, max(6, length // 2 - 2)
    window = profile[start:stop]
    if np.any(window <= 0):
        raise ValueError("amplitude profile vanished inside the fit window")
    d = np.arange(start, stop, dtype=float)
    ly = np.log(window)
    slope, intercept = np.polyfit(d, ly, 1)
    pred = slope * d + intercept
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - float(np.sum((ly - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        ratio=float(np.exp(slope)),
        r_squared=r2,
        corner=corner,
        axis=axis,
        cells=(start, stop),
    )
