"""Lattice model catalog: Lieb variants, Dirac-semimetal variants, hinge systems.

Lieb lattice (3 sites A, B, C per cell): the Bloch matrix always has the
chain structure

    [[0, P, 0],
     [Q, 0, R],
     [0, S, 0]]

with P, Q, R, S functions of k, so every variant is specified by those four
symbols.  Chirality pins all dispersive-band degeneracies to E = 0 and keeps
one flat band there.

Dirac semimetal (4 sites A, B, C, D per cell, stacked quadrupole planes with
pi-flux plaquettes): block off-diagonal Bloch matrices

    [[0, Q(k)],
     [R(k), 0]]

with the 2x2 blocks expanded in Pauli matrices.  Variant 0 is the Hermitian
parent; variants 1..4 add one fixed non-Hermitian intracell coupling pattern
of strength epsilon each.

The open-boundary (hinge) Hamiltonian keeps x and y finite with kz a good
momentum; unit cells are indexed row-major in (x, y) with site order
(A, B, C, D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .matkit import TolerancePolicy

__all__ = [
    "LiebSpec",
    "HodsmSpec",
    "HingeGeometry",
    "SymmetryOp",
    "MODEL_IDS",
    "model_from_id",
    "lieb_pqrs",
    "lieb_bloch",
    "lieb_case",
    "hodsm_pauli_coeffs",
    "hodsm_bloch",
    "hodsm_h_eps",
    "hodsm_closed_dispersion",
    "hinge_hamiltonian",
    "cell_index",
    "symmetry_operator",
    "arccot",
]

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

LIEB_VARIANTS = ("hermitian", "nh-symmetric", "minimal-fep", "reciprocal", "general")

#: CLI-facing model identifiers (bit-exact strings)
MODEL_IDS = (
    "lieb:hermitian",
    "lieb:nh-symmetric",
    "lieb:minimal-fep",
    "lieb:reciprocal",
    "hodsm:h",
    "hodsm:nh1",
    "hodsm:nh2",
    "hodsm:nh3",
    "hodsm:nh4",
)


def arccot(x: float) -> float:
    """Principal-branch arccotangent with range (0, pi)."""
    return math.pi / 2 - math.atan(x)


@dataclass(frozen=True)
class LiebSpec:
    """One Lieb-lattice variant with exactly its own parameters set.

    hermitian      - uniform couplings, no parameters
    nh-symmetric   - chirality- and reciprocity-preserving gain/loss epsilon
    minimal-fep    - reciprocity-breaking epsilon (hosts the minimal FEP)
    reciprocal     - phase-offset couplings with angles phi, psi
    general        - caller-supplied (P, Q, R, S)(k)
    """

    variant: str
    epsilon: float | None = None
    phi: float | None = None
    psi: float | None = None
    pqrs: Callable[[np.ndarray], tuple[complex, complex, complex, complex]] | None = None

    def __post_init__(self):
        if self.variant not in LIEB_VARIANTS:
            raise ValueError(f"unknown Lieb variant {self.variant!r}")
        needs = {
            "hermitian": (),
            "nh-symmetric": ("epsilon",),
            "minimal-fep": ("epsilon",),
            "reciprocal": ("phi", "psi"),
            "general": ("pqrs",),
        }[self.variant]
        for name in ("epsilon", "phi", "psi", "pqrs"):
            value = getattr(self, name)
            if name in needs and value is None:
                raise ValueError(f"Lieb variant {self.variant!r} requires {name}")
            if name not in needs and value is not None:
                raise ValueError(f"Lieb variant {self.variant!r} does not take {name}")

    @property
    def dims(self) -> int:
        return 2


def lieb_pqrs(spec: LiebSpec, k) -> tuple[complex, complex, complex, complex]:
    """The four off-diagonal symbols (P, Q, R, S) at momentum k = (kx, ky)."""
    kx, ky = float(k[0]), float(k[1])
    if spec.variant == "general":
        return spec.pqrs(np.array([kx, ky]))
    if spec.variant == "reciprocal":
        ephi = np.exp(1j * spec.phi)
        epsi = np.exp(1j * spec.psi)
        return (
            np.exp(1j * ky) - ephi,
            np.exp(-1j * ky) - ephi,
            np.exp(-1j * kx) - epsi,
            np.exp(1j * kx) - epsi,
        )
    eps = spec.epsilon or 0.0
    p = q = r = s = 1.0 + 0j
    if spec.variant == "nh-symmetric":
        p = q = 1 + 1j * eps
        r = s = 1 - 1j * eps
    elif spec.variant == "minimal-fep":
        p = 1 + 1j * eps
        s = 1 - 1j * eps
    return (
        p + np.exp(1j * ky),
        q + np.exp(-1j * ky),
        r + np.exp(-1j * kx),
        s + np.exp(1j * kx),
    )


def lieb_bloch(spec: LiebSpec, k) -> np.ndarray:
    """3x3 Bloch matrix of the requested variant (zero diagonal, chain pattern)."""
    p, q, r, s = lieb_pqrs(spec, k)
    return np.array(
        [[0, p, 0], [q, 0, r], [0, s, 0]],
        dtype=complex,
    )


def lieb_case(
    p: complex,
    q: complex,
    r: complex,
    s: complex,
    policy: TolerancePolicy | None = None,
) -> tuple[str, bool]:
    """Case label of the symbol pattern plus the E = 0 degeneracy flag.

    CASE1: neither (P, S) nor (Q, R) vanish simultaneously.
    CASE2: one of those pairs vanishes but not all four symbols.
    CASE3: all four symbols vanish (the Hermitian-style triple point).
    The degeneracy flag marks PQ + RS = 0, i.e. algebraic multiplicity 3 of
    the zero eigenvalue; in CASE2/CASE3 it holds automatically.
    """
    policy = policy or TolerancePolicy()
    scale = 1.0 + max(abs(p), abs(q), abs(r), abs(s))
    tol = policy.ck_rel * scale

    def zero(z: complex) -> bool:
        return abs(z) <= tol

    degenerate = abs(p * q + r * s) <= policy.ck_rel * scale**2
    ps_gone = zero(p) and zero(s)
    qr_gone = zero(q) and zero(r)
    if not ps_gone and not qr_gone:
        return "CASE1", degenerate
    if ps_gone and qr_gone:
        return "CASE3", True
    return "CASE2", True


# ---------------------------------------------------------------------------
# Dirac semimetal


@dataclass(frozen=True)
class HodsmSpec:
    """Dirac-semimetal variant 0 (Hermitian) or 1..4 (non-Hermitian).

    ``t`` and ``s`` are the intracell and intercell couplings of the parent
    quadrupole planes; the interplane criss-cross coupling is fixed at s/4.
    ``epsilon`` is the strength of the added non-Hermitian couplings and is
    ignored for variant 0.
    """

    variant: int
    t: float = -1.0
    s: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.variant not in range(5):
            raise ValueError(f"unknown hodsm variant {self.variant}")
        if self.s == 0:
            raise ValueError("intercell coupling s must be nonzero")

    @property
    def dims(self) -> int:
        return 3


def _parent_coeffs(spec: HodsmSpec, kx: float, ky: float, kz: float) -> np.ndarray:
    t, s = spec.t, spec.s
    tz = t + 0.5 * s * math.cos(kz)
    return np.array(
        [
            tz + s * math.cos(kx),
            1j * s * math.sin(ky),
            1j * (tz + s * math.cos(ky)),
            1j * s * math.sin(kx),
        ],
        dtype=complex,
    )


def hodsm_pauli_coeffs(spec: HodsmSpec, k) -> tuple[np.ndarray, np.ndarray]:
    """Pauli expansion coefficients (q_0..q_3, r_0..r_3) of the Bloch blocks."""
    kx, ky, kz = (float(c) for c in k)
    p = _parent_coeffs(spec, kx, ky, kz)
    q = p.copy()
    r = p.conj()
    eps = spec.epsilon
    if spec.variant == 1:
        q[1] += eps / 2
        q[2] += -1j * eps / 2
        r[1] += -eps / 2
        r[2] += -1j * eps / 2
    elif spec.variant == 2:
        q[0] += eps / 2
        q[3] += eps / 2
        r[1] += -eps / 2
        r[2] += -1j * eps / 2
    elif spec.variant == 3:
        q[3] += -eps
    elif spec.variant == 4:
        q[0] += eps / 2
        q[1] += -eps / 2
        q[2] += 1j * eps / 2
        q[3] += eps / 2
    return q, r


def hodsm_bloch(spec: HodsmSpec, k) -> np.ndarray:
    """4x4 Bloch matrix [[0, Q], [R, 0]] in the (A, B, C, D) site basis."""
    qc, rc = hodsm_pauli_coeffs(spec, k)
    q = sum(qc[i] * SIGMA[i] for i in range(4))
    r = sum(rc[i] * SIGMA[i] for i in range(4))
    h = np.zeros((4, 4), dtype=complex)
    h[:2, 2:] = q
    h[2:, :2] = r
    return h


def hodsm_h_eps(variant: int, epsilon: float) -> np.ndarray:
    """The constant non-Hermitian addition of variant 1..4 (zero for variant 0)."""
    h = np.zeros((4, 4), dtype=complex)
    e = epsilon
    if variant == 1:
        h[1, 2], h[2, 1] = e, -e
    elif variant == 2:
        h[0, 2], h[2, 1] = e, -e
    elif variant == 3:
        h[0, 2], h[1, 3] = -e, e
    elif variant == 4:
        h[0, 2], h[1, 2] = e, -e
    return h


def hodsm_closed_dispersion(spec: HodsmSpec, kz: float) -> np.ndarray:
    """The four closed-form branch energies on the kx = ky = 0 line.

    Valid only in the s = -t = 1 normalization in which the closed forms are
    written; other parameters are rejected.  Returned sorted by (re, im) and
    matching the eigenvalues of the Bloch matrix as a multiset.
    """
    if not (spec.s == 1.0 and spec.t == -1.0):
        raise ValueError("closed-form dispersions assume the s = -t = 1 normalization")
    c = math.cos(kz)
    eps = spec.epsilon
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    if spec.variant == 0:
        e = abs(c) * inv_sqrt2
        vals = [e, e, -e, -e]
    elif spec.variant == 1:
        inner = complex(eps**2 - c**2)
        branches = [
            complex(c**2 - eps**2) + sgn * eps * np.sqrt(inner) for sgn in (+1, -1)
        ]
        vals = []
        for b in branches:
            root = inv_sqrt2 * np.sqrt(b)
            vals.extend([root, -root])
    elif spec.variant == 2:
        root = inv_sqrt2 * np.sqrt(complex(c * (eps + c)))
        vals = [root, root, -root, -root]
    elif spec.variant == 3:
        vals = []
        for sgn in (+1, -1):
            root = inv_sqrt2 * np.sqrt(complex(c)) * np.sqrt(complex(c + sgn * math.sqrt(2) * eps))
            vals.extend([root, -root])
    else:
        vals = []
        for extra in (2 * eps * c, 0.0):
            root = inv_sqrt2 * np.sqrt(complex(c**2 + extra))
            vals.extend([root, -root])
    arr = np.asarray(vals, dtype=complex)
    return arr[np.lexsort((arr.imag, arr.real))]


# ---------------------------------------------------------------------------
# Open boundaries


@dataclass(frozen=True)
class HingeGeometry:
    """Finite extent in x and y (unit cells) at fixed momentum kz."""

    nx: int
    ny: int
    kz: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("nx and ny must be at least 1")

    @property
    def sites(self) -> int:
        return 4 * self.nx * self.ny


def cell_index(geom: HingeGeometry, x: int, y: int) -> int:
    """Row-major cell index for 1-based cell coordinates (x, y)."""
    if not (1 <= x <= geom.nx and 1 <= y <= geom.ny):
        raise ValueError(f"cell ({x}, {y}) outside {geom.nx} x {geom.ny} lattice")
    return (x - 1) * geom.ny + (y - 1)


# intracell coupling pattern multiplying (t + s/2 cos kz)
_INTRACELL = np.array(
    [[0, 0, 1, 1], [0, 0, -1, 1], [1, -1, 0, 0], [1, 1, 0, 0]], dtype=complex
)


def _intercell_blocks(s: float) -> tuple[np.ndarray, np.ndarray]:
    sx = s * np.array(
        [[0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0]], dtype=complex
    )
    sy = s * np.array(
        [[0, 0, 0, 1], [0, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 0]], dtype=complex
    )
    return sx, sy


def hinge_hamiltonian(spec: HodsmSpec, geom: HingeGeometry) -> np.ndarray:
    """Open-boundary Hamiltonian of dimension 4 * nx * ny.

    Diagonal blocks are the reduced intracell Hamiltonian
    ``(t + s/2 cos kz) * M + h_eps``; neighboring cells couple through the
    fixed blocks s_x, s_y and their adjoints.  Non-Hermiticity enters only
    through the intracell addition, so variant 0 is exactly Hermitian.
    """
    n = geom.sites
    tz = spec.t + 0.5 * spec.s * math.cos(geom.kz)
    h0 = tz * _INTRACELL + hodsm_h_eps(spec.variant, spec.epsilon)
    sx, sy = _intercell_blocks(spec.s)

    h = np.zeros((n, n), dtype=complex)

    def put(ci: int, cj: int, block: np.ndarray) -> None:
        h[4 * ci : 4 * ci + 4, 4 * cj : 4 * cj + 4] += block

    for x in range(1, geom.nx + 1):
        for y in range(1, geom.ny + 1):
            c = cell_index(geom, x, y)
            put(c, c, h0)
            if x < geom.nx:
                cx = cell_index(geom, x + 1, y)
                put(c, cx, sx)
                put(cx, c, sx.conj().T)
            if y < geom.ny:
                cy = cell_index(geom, x, y + 1)
                put(c, cy, sy)
                put(cy, c, sy.conj().T)
    return h


# ---------------------------------------------------------------------------
# Symmetry operators


@dataclass(frozen=True)
class SymmetryOp:
    """A named symmetry representation matrix (Bloch cell or full open system)."""

    kind: str
    matrix: np.ndarray


def _corner_permutation(geom: HingeGeometry) -> np.ndarray:
    """Antidiagonal lattice reflection combined with the A <-> B site swap."""
    if geom.nx != geom.ny:
        raise ValueError("antidiagonal reflection needs nx == ny")
    n = geom.sites
    perm = np.zeros((n, n), dtype=complex)
    site_map = {0: 1, 1: 0, 2: 2, 3: 3}  # A <-> B, C and D fixed
    for x in range(1, geom.nx + 1):
        for y in range(1, geom.ny + 1):
            c = cell_index(geom, x, y)
            c2 = cell_index(geom, geom.nx + 1 - y, geom.ny + 1 - x)
            for site, site2 in site_map.items():
                perm[4 * c2 + site2, 4 * c + site] = 1.0
    return perm


def _c_sublattice_gauge(geom: HingeGeometry) -> np.ndarray:
    diag = np.ones(geom.sites)
    diag[2::4] = -1.0
    return np.diag(diag).astype(complex)


def symmetry_operator(kind: str, geom: HingeGeometry | None = None) -> SymmetryOp:
    """Construct a catalog symmetry operator.

    ``chiral-lieb`` and ``chiral-dsm`` are the Bloch-cell involutions that
    anticommute with the respective Bloch matrices; ``rotation-c4`` is the
    fourfold rotation of the quadrupole cell (squaring to -1 on the pi-flux
    lattice); ``generalized-reflection`` and ``sublattice-gauge`` act on the
    full open system and need a geometry.
    """
    if kind == "chiral-lieb":
        return SymmetryOp(kind, np.diag([1.0, -1.0, 1.0]).astype(complex))
    if kind == "chiral-dsm":
        return SymmetryOp(kind, np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex))
    if kind == "rotation-c4":
        c4 = np.zeros((4, 4), dtype=complex)
        c4[:2, 2:] = np.eye(2)
        c4[2:, :2] = -1j * SIGMA[2]
        return SymmetryOp(kind, c4)
    if geom is None:
        raise ValueError(f"symmetry kind {kind!r} needs an open-system geometry")
    if kind == "sublattice-gauge":
        return SymmetryOp(kind, _c_sublattice_gauge(geom))
    if kind == "generalized-reflection":
        return SymmetryOp(kind, _c_sublattice_gauge(geom) @ _corner_permutation(geom))
    raise ValueError(f"unknown symmetry kind {kind!r}")


# ---------------------------------------------------------------------------
# Model registry


def model_from_id(model_id: str, **params) -> LiebSpec | HodsmSpec:
    """Build a catalog model from its CLI identifier.

    Recognized parameters: ``eps`` (non-Hermitian strength), ``t``, ``s``
    (couplings), ``phi``, ``psi`` (reciprocal-variant angles).  Unused
    parameters for the given identifier are rejected.
    """
    if model_id not in MODEL_IDS:
        raise ValueError(f"unknown model id {model_id!r}")
    family, _, tag = model_id.partition(":")
    allowed = {
        "lieb:hermitian": set(),
        "lieb:nh-symmetric": {"eps"},
        "lieb:minimal-fep": {"eps"},
        "lieb:reciprocal": {"phi", "psi"},
    }
    if family == "lieb":
        extra = set(params) - allowed[model_id]
        if extra:
            raise ValueError(f"model {model_id!r} does not take {sorted(extra)}")
        if tag == "hermitian":
            return LiebSpec("hermitian")
        if tag == "nh-symmetric":
            return LiebSpec("nh-symmetric", epsilon=params.get("eps", 1.0))
        if tag == "minimal-fep":
            return LiebSpec("minimal-fep", epsilon=params.get("eps", 1.0))
        return LiebSpec(
            "reciprocal",
            phi=params.get("phi", math.pi / 2),
            psi=params.get("psi", math.pi / 2),
        )
    extra = set(params) - {"eps", "t", "s"}
    if extra:
        raise ValueError(f"model {model_id!r} does not take {sorted(extra)}")
    variant = 0 if tag == "h" else int(tag[2:])
    if variant == 0 and "eps" in params:
        raise ValueError("hodsm:h is Hermitian and does not take eps")
    return HodsmSpec(
        variant,
        t=params.get("t", -1.0),
        s=params.get("s", 1.0),
        epsilon=params.get("eps", 0.0),
    )


def bloch_matrix(spec: LiebSpec | HodsmSpec, k) -> np.ndarray:
    """Dispatch to the right Bloch constructor for either lattice family."""
    if isinstance(spec, LiebSpec):
        return lieb_bloch(spec, k)
    return hodsm_bloch(spec, k)
