"""Faddeev-LeVerrier modal expansion of the adjugate matrix.

For an N x N matrix ``H`` and a reference energy ``shift``, the shifted
matrix ``A = H - shift * I`` generates a sequence of modes ``B_{N-1} = I``,
``B_{k-1} = A B_k - (tr(A B_k) / (N - k)) I`` together with the coefficients
``c_k = -tr(A B_k) / (N - k)`` of the shifted characteristic polynomial
``q(lam) = sum_k c_k lam**k = det(lam * I - A)``.  The resolvent is then the
ratio ``G(E) = sum_k (E - shift)**k B_k / q(E - shift)``, and the modes at a
degenerate eigenvalue carry its complete multiplicity structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkit import TolerancePolicy, as_square_matrix, spectral_norm

__all__ = [
    "ModeSequence",
    "ResponseStrengths",
    "ResonanceError",
    "FLV_DIMENSION_GUARD",
    "flv_modes",
    "greens_modal",
    "response_strengths",
]

# The recursion accumulates error like ||A||**N; beyond this dimension it is
# refused unless forced, and classification falls back to the rank-of-powers
# oracle instead.
FLV_DIMENSION_GUARD = 64


class ResonanceError(ValueError):
    """Raised when the modal resolvent is evaluated at (numerically) an eigenvalue."""


@dataclass(frozen=True)
class ModeSequence:
    """Modes ``B_0 .. B_{N-1}`` and coefficients ``c_0 .. c_N`` at one shift."""

    shift: complex
    modes: tuple[np.ndarray, ...]
    coeffs: np.ndarray
    source_norm: float

    @property
    def n(self) -> int:
        return len(self.modes)

    def mode(self, k: int) -> np.ndarray:
        """``B_k``, with the convention ``B_k = 0`` for k < 0."""
        if k < 0:
            return np.zeros_like(self.modes[0])
        return self.modes[k]

    def source(self) -> np.ndarray:
        """Reconstruct ``A = H - shift * I`` from the stored modes."""
        if self.n == 1:
            # B_0 = I and A = -c_0 * I for a 1x1 system
            return -self.coeffs[0] * self.modes[0]
        return self.modes[self.n - 2] - self.coeffs[self.n - 1] * np.eye(self.n)

    # B_k and c_k are polynomials of degree N-1-k and N-k in A, so vanishing
    # thresholds must carry that power of a per-degree magnitude.  The norm
    # of A badly overestimates that magnitude for non-normal input (||A^m||
    # can grow far slower than ||A||^m), so the scale is calibrated from the
    # computed sequence itself and floored at one (O(1) model-energy units).

    @property
    def mode_scale(self) -> float:
        """Per-degree magnitude scale of the mode sequence."""
        s = 1.0
        for j in range(self.n - 1):
            top = float(np.max(np.abs(self.modes[j])))
            if top > 0.0:
                s = max(s, top ** (1.0 / (self.n - 1 - j)))
        return s

    @property
    def coeff_scale(self) -> float:
        """Per-degree magnitude scale of the characteristic coefficients."""
        s = 1.0
        for k in range(self.n):
            c = abs(self.coeffs[k])
            if c > 0.0:
                s = max(s, c ** (1.0 / (self.n - k)))
        return s

    def mode_vanishes(self, k: int, ck_rel: float = 1e-9) -> bool:
        """Scale-aware zero test for the mode B_k."""
        if k < 0:
            return True
        bound = ck_rel * self.mode_scale ** (self.n - 1 - k)
        return float(np.max(np.abs(self.modes[k]))) <= bound

    def coeff_vanishes(self, k: int, ck_rel: float = 1e-9) -> bool:
        """Scale-aware zero test for the coefficient c_k (equivalently C_k)."""
        if k < 0 or k >= self.n:
            return False
        bound = ck_rel * self.coeff_scale ** (self.n - k)
        return abs(self.coeffs[k]) <= bound


def flv_modes(h, shift: complex = 0.0, *, force: bool = False) -> ModeSequence:
    """Run the division-free recursion for all modes and coefficients.

    Modes are always computed for the full index range: the recursion costs
    O(N^4) total, and only small model matrices ever take this path (for
    dimensions above FLV_DIMENSION_GUARD pass ``force=True``, or use the
    rank-of-powers oracle which is what classification does).
    """
    m = as_square_matrix(h)
    n = m.shape[0]
    if n > FLV_DIMENSION_GUARD and not force:
        raise ValueError(
            f"dimension {n} exceeds the FLV stability guard ({FLV_DIMENSION_GUARD}); "
            "pass force=True or classify via the rank-of-powers oracle"
        )
    a = m - complex(shift) * np.eye(n)

    modes: list[np.ndarray] = [np.zeros((0, 0))] * n
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1.0
    b = np.eye(n, dtype=complex)
    modes[n - 1] = b
    for k in range(n - 1, -1, -1):
        ab = a @ b
        c = -np.trace(ab) / (n - k)
        coeffs[k] = c
        if k > 0:
            b = ab + c * np.eye(n)
            modes[k - 1] = b

    return ModeSequence(
        shift=complex(shift),
        modes=tuple(modes),
        coeffs=coeffs,
        source_norm=spectral_norm(a),
    )


def greens_modal(modes: ModeSequence, energy: complex) -> np.ndarray:
    """Evaluate the resolvent G(E) from the modal expansion.

    Agrees with direct inversion of ``E I - H`` wherever both exist; raises
    ResonanceError when the characteristic denominator falls below
    ``1e-12 * (1 + |E - shift|)**N`` (E is numerically an eigenvalue).
    """
    lam = complex(energy) - modes.shift
    n = modes.n
    powers = lam ** np.arange(n + 1)
    denom = np.dot(modes.coeffs, powers)
    if abs(denom) <= 1e-12 * (1.0 + abs(lam)) ** n:
        raise ResonanceError(
            f"at resonance: |q(E - shift)| = {abs(denom):.3e} with E = {energy}"
        )
    num = np.zeros_like(modes.modes[0])
    for k in range(n):
        num = num + powers[k] * modes.modes[k]
    return num / denom


@dataclass(frozen=True)
class ResponseStrengths:
    """Physical (eta) and spectral (xi) response strengths at a degeneracy.

    Both derive from the first nonvanishing mode ``B_{alpha - ell}``:
    ``eta**2 = tr(B^dag B) / |c_alpha|**2`` and ``xi**2 = ||B||_2**2 /
    |c_alpha|**2``.  The two coincide when that mode has rank one.
    """

    eta: float
    xi: float
    ell: int


def response_strengths(
    modes: ModeSequence,
    alpha: int,
    ell: int,
    policy: TolerancePolicy | None = None,
) -> ResponseStrengths:
    """Response strengths of a degeneracy with multiplicities (alpha, ell).

    The modes must have been computed with the shift at the degenerate
    eigenvalue; the vanishing pattern ``B_k = 0`` for ``k < alpha - ell`` is
    checked and inconsistent (alpha, ell) pairs are rejected.
    """
    policy = policy or TolerancePolicy()
    n = modes.n
    if not (1 <= ell <= alpha <= n):
        raise ValueError(f"need 1 <= ell <= alpha <= {n}, got ell={ell} alpha={alpha}")
    c_alpha = modes.coeffs[alpha]
    if alpha < n and modes.coeff_vanishes(alpha, policy.ck_rel):
        raise ValueError(
            f"|c_alpha| = {abs(c_alpha):.3e} is below threshold; "
            "alpha does not match the vanishing pattern of the coefficients"
        )
    for k in range(alpha - ell):
        if not modes.mode_vanishes(k, policy.ck_rel):
            raise ValueError(
                f"mode B_{k} does not vanish although k < alpha - ell = {alpha - ell}; "
                "inconsistent (alpha, ell)"
            )
    if modes.mode_vanishes(alpha - ell, policy.ck_rel):
        raise ValueError(
            f"leading mode B_{alpha - ell} vanishes; ell = {ell} overstates the "
            "maximal partial multiplicity"
        )
    lead = modes.mode(alpha - ell)
    eta = float(np.linalg.norm(lead, "fro")) / abs(c_alpha)
    xi = spectral_norm(lead) / abs(c_alpha)
    return ResponseStrengths(eta=eta, xi=xi, ell=ell)
