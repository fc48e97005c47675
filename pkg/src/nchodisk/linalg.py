"""Dense complex linear algebra on small matrices plus the root-finding
kernels used by every other module.

Matrices are plain ``numpy.ndarray`` objects with complex128 entries.
Polynomial coefficients are ascending: ``coeffs[k]`` multiplies ``z**k``.
"""

from __future__ import annotations

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import ContractViolation, DegeneratePencil

__all__ = [
    "as_matrix",
    "is_hermitian",
    "is_positive_definite",
    "is_unitary",
    "adjugate_and_det",
    "poly_roots",
    "eigen_hermitian",
    "eigen_general_small",
    "characteristic_polynomial",
    "hermitian_sqrt",
    "hermitian_inv_sqrt",
]

_MAX_DIM = 8


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ContractViolation(f"expected a matrix, got array of ndim {a.ndim}")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ContractViolation("matrix entries must be finite")
    return a


def _square(m, max_dim=None) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {a.shape}")
    if max_dim is not None and a.shape[0] > max_dim:
        raise ContractViolation(f"dimension {a.shape[0]} exceeds supported cap {max_dim}")
    return a


def is_hermitian(m, tol: float = 1e-10) -> bool:
    a = _square(m)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    return float(np.max(np.abs(a - a.conj().T))) <= tol * scale


def is_positive_definite(m, tol: float = 1e-10) -> bool:
    a = _square(m)
    if not is_hermitian(a, tol):
        return False
    w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return float(w[0]) > tol * max(1.0, float(np.max(np.abs(a))))


def is_unitary(m, tol: float = 1e-10) -> bool:
    a = _square(m)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))) <= tol


def _det_small(a: np.ndarray) -> complex:
    # closed-form determinants up to 3x3, first-row cofactors above
    n = a.shape[0]
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if n == 3:
        return complex(
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * _det_small(minor)
    return complex(total)


def _adjugate_cofactor(a: np.ndarray, det_fn) -> np.ndarray:
    n = a.shape[0]
    adj = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * det_fn(minor)
    return adj


def adjugate_and_det(m) -> tuple[np.ndarray, complex]:
    """Adjugate matrix and determinant, with M @ adj == det * I up to round-off.

    Cofactor expansion for dimension <= 4, LU-backed (det * inv) above that
    with a cofactor fallback when M is numerically singular.
    """
    a = _square(m, max_dim=_MAX_DIM)
    n = a.shape[0]
    if n == 1:
        return np.array([[1.0 + 0.0j]]), complex(a[0, 0])
    if n <= 4:
        adj = _adjugate_cofactor(a, _det_small)
        # determinant from the same cofactors keeps M @ adj = det * I consistent
        det = complex(np.dot(a[0, :], adj[:, 0]))
        return adj, det
    det = complex(np.linalg.det(a))
    scale = float(np.max(np.abs(a))) or 1.0
    if abs(det) > 1e-12 * scale**n:
        return det * np.linalg.inv(a), det
    adj = _adjugate_cofactor(a, lambda x: complex(np.linalg.det(x)))
    return adj, det


def _aberth(coeffs: np.ndarray) -> np.ndarray:
    # simultaneous iteration for all roots of a polynomial with nonzero
    # constant and leading coefficients; deterministic starting circle
    n = len(coeffs) - 1
    if n == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    dcoeffs = npoly.polyder(coeffs)
    radius = float(abs(coeffs[0] / coeffs[n])) ** (1.0 / n)
    radius = min(max(radius, 1e-3), 1e3)
    k = np.arange(n)
    z = radius * np.exp(2j * np.pi * (k / n + 0.3819660112501051))
    for _ in range(200):
        pv = npoly.polyval(z, coeffs)
        dv = npoly.polyval(z, dcoeffs)
        dv = np.where(np.abs(dv) < 1e-300, 1e-300, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        corr = w / denom
        z = z - corr
        if np.all(np.abs(corr) <= 1e-14 * (1.0 + np.abs(z))):
            break
    # Newton polish, accepted only while it reduces |p|
    for _ in range(4):
        pv = npoly.polyval(z, coeffs)
        dv = npoly.polyval(z, dcoeffs)
        dv = np.where(np.abs(dv) < 1e-300, 1e-300, dv)
        z_new = z - pv / dv
        better = np.abs(npoly.polyval(z_new, coeffs)) <= np.abs(pv)
        z = np.where(better, z_new, z)
    return z


def poly_roots(coeffs, tol: float = 1e-8) -> list[tuple[complex, int]]:
    """All complex roots of an ascending-coefficient polynomial.

    Returns (root, multiplicity) pairs sorted by (re, im); roots closer than
    tol * max(1, |root|) are merged into one entry.  Raises DegeneratePencil
    for the zero polynomial.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0:
        raise DegeneratePencil("empty coefficient list")
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        raise DegeneratePencil("zero polynomial has no well-defined roots")
    deg = c.size - 1
    while deg > 0 and abs(c[deg]) <= 1e-14 * scale:
        deg -= 1
    c = c[: deg + 1]
    if deg == 0:
        return []
    nzero = 0
    while nzero < deg and abs(c[nzero]) <= 1e-14 * scale:
        nzero += 1
    core = c[nzero:]
    roots = _aberth(core) if len(core) > 1 else np.empty(0, dtype=complex)
    allroots = np.concatenate([np.zeros(nzero, dtype=complex), roots])
    order = np.lexsort((allroots.imag, allroots.real))
    allroots = allroots[order]
    clusters: list[list[complex]] = []
    for r in allroots:
        for cl in clusters:
            center = sum(cl) / len(cl)
            if abs(r - center) <= tol * max(1.0, abs(center)):
                cl.append(r)
                break
        else:
            clusters.append([r])
    merged = [(complex(sum(cl) / len(cl)), len(cl)) for cl in clusters]
    merged.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return merged


def eigen_hermitian(m, tol: float = 1e-10, vectors: bool = False):
    """Ascending real eigenvalues of a Hermitian matrix (LAPACK backed)."""
    a = _square(m)
    if not is_hermitian(a, tol):
        raise ContractViolation("matrix is not Hermitian within tolerance")
    h = 0.5 * (a + a.conj().T)
    if vectors:
        w, v = np.linalg.eigh(h)
        return w, v
    return np.linalg.eigvalsh(h)


def characteristic_polynomial(m) -> np.ndarray:
    """Ascending coefficients of det(z I - M) via the Faddeev-LeVerrier recursion."""
    a = _square(m, max_dim=_MAX_DIM)
    n = a.shape[0]
    coeffs_desc = np.zeros(n + 1, dtype=complex)
    coeffs_desc[0] = 1.0
    mk = np.array(a, dtype=complex)
    for k in range(1, n + 1):
        ck = -np.trace(mk) / k
        coeffs_desc[k] = ck
        if k < n:
            mk = a @ (mk + ck * np.eye(n))
    return coeffs_desc[::-1].copy()


def eigen_general_small(m) -> np.ndarray:
    """Eigenvalues of a small square matrix via roots of its characteristic
    polynomial, sorted by (re, im); multiplicities expanded."""
    a = _square(m, max_dim=_MAX_DIM)
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return np.zeros(a.shape[0], dtype=complex)
    # scaling keeps the root-merge tolerance meaningful for tiny/huge matrices
    coeffs = characteristic_polynomial(a / scale)
    roots = poly_roots(coeffs, tol=1e-10)
    vals = np.array(
        [r for r, mult in roots for _ in range(mult)], dtype=complex
    ) * scale
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def hermitian_sqrt(m, tol: float = 1e-10) -> np.ndarray:
    """Unique positive-definite square root of a positive-definite matrix."""
    a = _square(m)
    if not is_positive_definite(a, tol):
        raise ContractViolation("matrix is not positive definite")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (v * np.sqrt(w)) @ v.conj().T


def hermitian_inv_sqrt(m, tol: float = 1e-10) -> np.ndarray:
    a = _square(m)
    if not is_positive_definite(a, tol):
        raise ContractViolation("matrix is not positive definite")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (v / np.sqrt(w)) @ v.conj().T
