"""Dense complex linear-algebra kernel.

Everything downstream (decomposition, planning, device simulation) is built
on a handful of primitives: the Hermitian matrix exponential, the operator
norm, the phase-invariant gate fidelity, the analytic eigenvalues of the
uniform tridiagonal coupling matrix, and Haar-random unitary sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Entrywise tolerance for accepting a matrix as Hermitian.
HERMITICITY_ATOL = 1e-12
#: Operator-norm tolerance for accepting a matrix as unitary.
UNITARITY_ATOL = 1e-10

_TWO_PI = 2.0 * np.pi
_TWO_PI_LD = np.longdouble(2.0) * np.longdouble(np.pi)


def as_square_matrix(matrix, what: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex ndarray, raising ValueError otherwise."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite entries")
    return a


def operator_norm(matrix) -> float:
    """Largest singular value (spectral norm)."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"operator norm needs a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return float(np.linalg.norm(a, 2))


def unitarity_defect(matrix) -> float:
    """Operator-norm distance of U†U from the identity."""
    u = as_square_matrix(matrix)
    return operator_norm(u.conj().T @ u - np.eye(u.shape[0]))


def require_unitary(matrix, atol: float = UNITARITY_ATOL, what: str = "matrix") -> np.ndarray:
    u = as_square_matrix(matrix, what)
    defect = unitarity_defect(u)
    if defect > atol:
        raise ValueError(f"{what} is not unitary: ||U^dag U - I|| = {defect:.3e} > {atol:g}")
    return u


def _reduced_phases(eigenvalues: np.ndarray, scale: float, offset: float = 0.0) -> np.ndarray:
    """eigenvalue*scale + offset, reduced mod 2*pi in extended precision.

    The exponential only depends on the phase mod 2*pi; products like
    beta*L reach 1e5 rad and beyond, where forming them in float64 loses
    the digits that matter after reduction.
    """
    prod = eigenvalues.astype(np.longdouble) * np.longdouble(scale) + np.longdouble(offset)
    return np.mod(prod, _TWO_PI_LD).astype(float)


def expm_hermitian(hamiltonian, scale: float = 1.0) -> np.ndarray:
    """Unitary e^{-i H scale} of a Hermitian matrix via eigendecomposition.

    The mean diagonal is split off as an exact global phase before
    diagonalizing: waveguide Hamiltonians carry a ~1e7 m^-1 identity
    offset that would otherwise dominate the eigensolver's error budget.
    """
    h = as_square_matrix(hamiltonian, "hamiltonian")
    defect = float(np.max(np.abs(h - h.conj().T)))
    if defect > HERMITICITY_ATOL:
        raise ValueError(
            f"matrix is not Hermitian: max |H - H^dag| = {defect:.3e} > {HERMITICITY_ATOL:g}"
        )
    if not np.isfinite(scale):
        raise ValueError("scale must be finite")
    d = h.shape[0]
    mu = float(np.trace(h).real) / d
    w, v = np.linalg.eigh(h - mu * np.eye(d))
    base = float(np.mod(np.longdouble(mu) * np.longdouble(scale), _TWO_PI_LD))
    phases = _reduced_phases(w, scale, base)
    return (v * np.exp(-1j * phases)) @ v.conj().T


def fidelity(u, u_target) -> float:
    """Phase-invariant gate fidelity |tr(U† U_T)|^2 / d^2, in [0, 1]."""
    a = require_unitary(u, atol=1e-8, what="U")
    b = require_unitary(u_target, atol=1e-8, what="U_target")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a.shape[0]
    t = np.trace(a.conj().T @ b)
    return float(min(1.0, (abs(t) / d) ** 2))


@dataclass(frozen=True)
class FidelityReport:
    """Fidelity, infidelity and the operator-norm error of U against a target."""

    fidelity: float
    infidelity: float
    operator_norm_error: float

    def __post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity out of [0, 1]: {self.fidelity!r}")
        if self.infidelity != 1.0 - self.fidelity:
            raise ValueError("infidelity must equal 1 - fidelity exactly")
        if self.operator_norm_error < 0.0:
            raise ValueError("operator-norm error must be non-negative")

    @classmethod
    def compare(cls, u, u_target) -> "FidelityReport":
        f = fidelity(u, u_target)
        err = operator_norm(np.asarray(u, dtype=complex) - np.asarray(u_target, dtype=complex))
        return cls(fidelity=f, infidelity=1.0 - f, operator_norm_error=err)


def toeplitz_eigenvalues(d: int) -> np.ndarray:
    """Eigenvalues -2 cos(j pi/(d+1)), j = 1..d, of the 0-diagonal/1-offdiagonal
    tridiagonal Toeplitz matrix, sorted ascending.

    Built antisymmetrically so that lambda_j == -lambda_{d+1-j} holds exactly
    (the middle eigenvalue of odd d is exactly 0.0, which the Diophantine
    solver relies on).
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    j = np.arange(1, d // 2 + 1)
    lower = -2.0 * np.cos(j * np.pi / (d + 1))
    middle = [0.0] if d % 2 else []
    return np.concatenate([lower, middle, -lower[::-1]])


def toeplitz_eigenvectors(d: int) -> np.ndarray:
    """Orthonormal sine-basis eigenvectors, column j paired with toeplitz_eigenvalues(d)[j]."""
    m = np.arange(1, d + 1)
    k = d + 1 - np.arange(1, d + 1)
    return np.sqrt(2.0 / (d + 1)) * np.sin(np.outer(m, k) * np.pi / (d + 1))


def haar_random_unitary(d: int, seed: int) -> np.ndarray:
    """Haar-random d x d unitary: QR of a complex Ginibre matrix, with each
    column of Q divided by the phase of the matching R diagonal entry.
    Deterministic per (d, seed)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q / (diag / np.abs(diag))


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """One chip section: d propagation constants, d-1 couplings, a length.

    All entries are strictly positive (forward propagation; waveguides are
    never erased). Units are m^-1 for the matrix entries and m for the length.
    """

    betas: np.ndarray
    couplings: np.ndarray
    length: float

    def __post_init__(self):
        betas = np.array(self.betas, dtype=float)
        couplings = np.array(self.couplings, dtype=float)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas must be a non-empty 1-d array")
        if couplings.shape != (betas.size - 1,):
            raise ValueError(
                f"expected {betas.size - 1} couplings for {betas.size} modes, "
                f"got {couplings.shape}"
            )
        if not (np.all(np.isfinite(betas)) and np.all(np.isfinite(couplings))):
            raise ValueError("non-finite Hamiltonian entries")
        if np.any(betas <= 0.0):
            raise ValueError("propagation constants must be strictly positive")
        if couplings.size and np.any(couplings <= 0.0):
            raise ValueError("couplings must be strictly positive")
        if not (np.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"section length must be positive, got {self.length!r}")
        betas.flags.writeable = False
        couplings.flags.writeable = False
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "length", float(self.length))

    @property
    def dimension(self) -> int:
        return self.betas.size

    def is_uniform(self) -> bool:
        """True when all betas agree and all couplings agree (Toeplitz form)."""
        return bool(
            np.all(self.betas == self.betas[0])
            and (self.couplings.size == 0 or np.all(self.couplings == self.couplings[0]))
        )

    def to_matrix(self) -> np.ndarray:
        h = np.diag(self.betas).astype(complex)
        if self.couplings.size:
            i = np.arange(self.dimension - 1)
            h[i, i + 1] = self.couplings
            h[i + 1, i] = self.couplings
        return h

    def unitary(self, length: float | None = None) -> np.ndarray:
        """Section evolution e^{-i H z}.

        Uniform sections use the analytic sine-basis eigensystem with the
        phase products formed in extended precision; recurrence sections have
        lengths of 1e7 m and more, where the generic eigensolver path would
        shed accuracy.
        """
        z = self.length if length is None else float(length)
        d = self.dimension
        if self.is_uniform() and d > 1:
            lam = toeplitz_eigenvalues(d)
            s = toeplitz_eigenvectors(d)
            prod = (
                np.longdouble(self.couplings[0]) * lam.astype(np.longdouble) * np.longdouble(z)
                + np.longdouble(self.betas[0]) * np.longdouble(z)
            )
            phases = np.mod(prod, _TWO_PI_LD).astype(float)
            return (s * np.exp(-1j * phases)) @ s.T
        return expm_hermitian(self.to_matrix(), z)
