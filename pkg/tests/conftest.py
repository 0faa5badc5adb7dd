"""Shared independent oracles for the test suite.

These deliberately avoid the library's own code paths: the Taylor expm uses
scaling-and-squaring on the series, the norm oracle is power iteration, the
LLL checker re-derives the Gram-Schmidt data in exact rational arithmetic.
"""

from fractions import Fraction

import numpy as np
import pytest


def taylor_expm(h, scale: float, terms: int = 60) -> np.ndarray:
    """e^{-i h scale} by scaled-and-squared Taylor series."""
    a = -1j * np.asarray(h, dtype=complex) * scale
    norm = np.linalg.norm(a, 2)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300) / 0.5)))) if norm > 0.5 else 0
    a = a / (2**squarings)
    term = np.eye(a.shape[0], dtype=complex)
    total = term.copy()
    for n in range(1, terms + 1):
        term = term @ a / n
        total = total + term
    for _ in range(squarings):
        total = total @ total
    return total


def power_iteration_norm(m, iterations: int = 500, seed: int = 0) -> float:
    """Largest singular value via power iteration on M^dag M."""
    m = np.asarray(m, dtype=complex)
    rng = np.random.default_rng(seed)
    g = m.conj().T @ m
    v = rng.standard_normal(m.shape[1]) + 1j * rng.standard_normal(m.shape[1])
    v = v / np.linalg.norm(v)
    for _ in range(iterations):
        v = g @ v
        v = v / np.linalg.norm(v)
    return float(np.sqrt(np.real(np.vdot(v, g @ v))))


def exact_gram_schmidt(rows):
    """Gram-Schmidt over Fractions: returns (mu, squared norms of b*)."""
    rows = [[Fraction(x) for x in r] for r in rows]
    n = len(rows)
    ortho = [list(r) for r in rows]
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = []
    for i in range(n):
        for j in range(i):
            denom = norms[j]
            num = sum(a * b for a, b in zip(rows[i], ortho[j]))
            mu[i][j] = num / denom
            ortho[i] = [a - mu[i][j] * b for a, b in zip(ortho[i], ortho[j])]
        norms.append(sum(a * a for a in ortho[i]))
    return mu, norms


def assert_lll_reduced(rows, delta=Fraction(3, 4)):
    """Exact size-reduction and Lovasz checks."""
    mu, norms = exact_gram_schmidt(rows)
    n = len(rows)
    for i in range(n):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2), f"size reduction fails at ({i},{j})"
    for k in range(1, n):
        lhs = norms[k]
        rhs = (Fraction(delta) - mu[k][k - 1] ** 2) * norms[k - 1]
        assert lhs >= rhs, f"Lovasz condition fails at k={k}"


def gram_determinant(rows) -> int:
    """det of the Gram matrix over exact integers (Bareiss on Fractions)."""
    rows = [[int(x) for x in r] for r in rows]
    n = len(rows)
    g = [[sum(a * b for a, b in zip(rows[i], rows[j])) for j in range(n)] for i in range(n)]
    mat = [[Fraction(x) for x in row] for row in g]
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if pivot_row is None:
            return 0
        if pivot_row != col:
            mat[col], mat[pivot_row] = mat[pivot_row], mat[col]
            det = -det
        pivot = mat[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = mat[r][col] / pivot
            mat[r] = [a - factor * b for a, b in zip(mat[r], mat[col])]
    assert det.denominator == 1
    return int(det)


def in_lattice(vector, basis) -> bool:
    """Exact membership test for a full-rank square integer basis."""
    basis = [[Fraction(x) for x in row] for row in basis]
    n = len(basis)
    # solve c @ basis = vector over Fractions (Gaussian elimination on rows)
    aug = [list(row) + [Fraction(0)] * n for row in basis]
    for i in range(n):
        aug[i][n + i] = Fraction(1)
    # bring basis rows to echelon form, tracking the transform
    mat = [row[:] for row in aug]
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, n) if mat[i][c] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        pivots.append(c)
        for i in range(n):
            if i != r and mat[i][c] != 0:
                f = mat[i][c] / mat[r][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
    if r < n:
        raise ValueError("basis not full rank")
    target = [Fraction(x) for x in vector]
    coeffs = [Fraction(0)] * n
    residual = target[:]
    for row_idx, c in enumerate(pivots):
        f = residual[c] / mat[row_idx][c]
        coeffs_row = mat[row_idx][n:]
        residual = [a - f * b for a, b in zip(residual, mat[row_idx][:n])]
        coeffs = [a + f * b for a, b in zip(coeffs, coeffs_row)]
    if any(x != 0 for x in residual):
        return False
    return all(c.denominator == 1 for c in coeffs)


def brute_force_diophantine(lambdas, eps: float, q_max: int = 10**6):
    """Smallest q <= q_max with max_j |lambda_j q - round(lambda_j q)| <= eps."""
    lam = np.asarray(lambdas, dtype=float)
    for q in range(1, q_max + 1):
        x = lam * q
        if np.max(np.abs(x - np.round(x))) <= eps:
            return q
    return None


@pytest.fixture(scope="session")
def pauli_x():
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@pytest.fixture(scope="session")
def hadamard_matrix():
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
