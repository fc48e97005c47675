"""Spectra by two independent routes: Hermitian block-tridiagonal
truncation in the weighted-disk basis, and a connection determinant built
by series transport of the holomorphic solution frame between the
singular points.  Also: radial mode functions, eigenfunction profiles,
and the large-mu confluence sweep against the Rabi truncation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .covariance import Su11Element, transform_problem
from .errors import (
    ContinuationError,
    ContractViolation,
    ConvergenceError,
    NotAnEigenvalueError,
    PositivityError,
    RefinementError,
    ResonanceError,
)
from .fuchsian import build_fuchsian
from .heun import RabiParameters
from .linalg import eigen_hermitian
from .pencil import NchoProblem, decompose_pencil

__all__ = [
    "TruncatedOperator",
    "SpectrumResult",
    "RefineResult",
    "ProfileResult",
    "SweepResult",
    "build_truncated",
    "spectrum_truncated",
    "connection_determinant",
    "connection_polarizations",
    "refine_eigenvalue",
    "spectrum_connection",
    "laguerre_mode",
    "eigenfunction_profile",
    "rabi_truncated_spectrum",
    "confluence_sweep",
]

_MAX_DENSE = 6000  # dense eigh working-set cap on p * M


def _norm_sq(mu: float, count: int) -> np.ndarray:
    """Squared basis norms m! / (mu)_m for m < count."""
    out = np.empty(count)
    out[0] = 1.0
    for m in range(1, count):
        out[m] = out[m - 1] * m / (mu + m - 1.0)
    return out


@dataclass(eq=False)
class TruncatedOperator:
    """Symmetrized truncation of the ladder operator, shifted by -2 C0 so the
    eigenproblem is standard Hermitian.

    Diagonal blocks are A (2m + mu); the blocks coupling modes m and m+1
    carry 2 B sqrt((m+1)(m+mu)), with B on the sub-diagonal side as dictated
    by the ladder action on monomials."""

    order: int
    mu: float
    problem: NchoProblem
    matrix: np.ndarray

    def diag_block(self, m: int) -> np.ndarray:
        return self.problem.A * (2 * m + self.mu)

    def coupling_block(self, m: int) -> np.ndarray:
        return 2.0 * self.problem.B * math.sqrt((m + 1) * (m + self.mu))


def build_truncated(problem: NchoProblem, order: int) -> TruncatedOperator:
    if order < 8:
        raise ContractViolation("truncation order must be at least 8")
    if not problem.has_standard_lam():
        raise ContractViolation("truncation requires the standard spectral family C0 + (lam/2) I")
    p, mu = problem.p, problem.mu
    n = p * order
    h = np.zeros((n, n), dtype=complex)
    for m in range(order):
        sl = slice(m * p, (m + 1) * p)
        h[sl, sl] = problem.A * (2 * m + mu) - 2.0 * problem.C0
        if m + 1 < order:
            sl1 = slice((m + 1) * p, (m + 2) * p)
            coup = 2.0 * problem.B * math.sqrt((m + 1) * (m + mu))
            h[sl1, sl] = coup
            h[sl, sl1] = coup.conj().T
    h = 0.5 * (h + h.conj().T)
    return TruncatedOperator(order=order, mu=mu, problem=problem, matrix=h)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    method: str
    convergence: np.ndarray
    orders: tuple[int, int]


def spectrum_truncated(
    problem: NchoProblem,
    count: int,
    tol: float = 1e-10,
    start_order: int = 64,
    max_order: int = 8192,
) -> SpectrumResult:
    """Lowest eigenvalues by doubling the truncation order until they settle."""
    if count < 1:
        raise ContractViolation("count must be at least 1")
    order = max(start_order, 8, -(-count // problem.p))
    prev = None
    last_change = float("nan")
    while True:
        if problem.p * order > _MAX_DENSE or order > max_order:
            raise ConvergenceError(
                f"eigenvalues did not settle to {tol:g} by order {order // 2} "
                f"(last change {last_change:g})"
            )
        vals = eigen_hermitian(build_truncated(problem, order).matrix)[:count]
        if prev is not None:
            change = np.abs(vals - prev)
            last_change = float(np.max(change))
            if last_change < tol:
                return SpectrumResult(
                    eigenvalues=vals,
                    method="truncation",
                    convergence=change,
                    orders=(order // 2, order),
                )
        prev = vals
        order *= 2


# ---------------------------------------------------------------------------
# connection determinant


def _taylor_step(poles, residues, f, z0, target, order=30):
    """One Taylor step of df/dz = sum_j R_j/(z - a_j) f from z0 toward target.

    Returns (new_z, new_f).  Step length obeys 0.4x the distance to the
    nearest singularity; the tail of the order-30 series is checked and the
    step halved if it is not negligible."""
    dist = min(abs(z0 - al) for al in poles)
    if dist <= 0:
        raise ContinuationError("transport hit a singular point")
    remaining = target - z0
    h_len = min(abs(remaining), 0.4 * dist)
    direction = remaining / abs(remaining)
    p = f.shape[0]
    # Taylor coefficients of the coefficient matrix at z0:
    # M_k = sum_j R_j (-1)^k / (z0 - a_j)^{k+1}
    invs = np.array([1.0 / (z0 - al) for al in poles])
    powers = (-1.0) ** np.arange(order) * invs[:, None] ** (np.arange(order) + 1)
    mk = np.einsum("jk,jab->kab", powers, np.asarray(residues))
    while True:
        h = h_len * direction
        coeffs = np.empty((order + 1, p), dtype=complex)
        coeffs[0] = f
        for n in range(order):
            acc = np.einsum("kab,kb->a", mk[: n + 1], coeffs[n::-1][: n + 1])
            coeffs[n + 1] = acc / (n + 1)
        val = coeffs[order].copy()
        for n in range(order - 1, -1, -1):
            val = val * h + coeffs[n]
        tail = float(np.linalg.norm(coeffs[order])) * abs(h) ** order
        if tail <= 1e-12 * max(1.0, float(np.linalg.norm(val))):
            return z0 + h, val
        h_len *= 0.5
        if h_len < 1e-14 * max(1.0, abs(z0)):
            raise ContinuationError("step size underflow during transport")


def _transport(poles, residues, f, z0, z1, order=30, max_steps=5000):
    z, val = z0, f
    for _ in range(max_steps):
        if z == z1:
            return val
        z, val = _taylor_step(poles, residues, val, z, z1, order=order)
    raise ContinuationError("too many transport steps")


def _phase_fixed(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v)))
    return v / (v[i] / abs(v[i]))


def connection_polarizations(problem: NchoProblem) -> list[NchoProblem]:
    """Möbius configurations the connection determinant can run in, one per
    inner pencil pole.  Polarization 0 is the canonical one."""
    if problem.p > 2:
        raise ContractViolation("connection method supports p <= 2")
    dec = decompose_pencil(problem)
    for al in dec.poles:
        if abs(abs(al) - 1.0) < 1e-6:
            raise PositivityError(f"pencil pole {al} sits on the unit circle")
    inner = [al for al in dec.poles if al != 0 and abs(al) < 1.0]
    if not inner:
        raise ContinuationError(
            "no inner connection pole; the problem is ladder-diagonal, use truncation"
        )
    key = lambda z: (round(abs(z), 12), np.angle(z))
    inner.sort(key=key)
    if problem.p == 1:
        return [problem]
    if dec.zero_is_pole and len(inner) == 1:
        swap = Su11Element.sending_to_zero(inner[0])
        return [problem, transform_problem(swap, problem)]
    if len(inner) == 2:
        return [
            transform_problem(Su11Element.sending_to_zero(beta), problem) for beta in inner
        ]
    raise ContinuationError("unsupported pole configuration for the connection method")


def _connection_t(problem: NchoProblem, lam: complex) -> complex:
    system = build_fuchsian(problem, lam)
    poles = system.singular_points
    residues = system.residues
    p = problem.p
    inner = [(al, j) for j, al in enumerate(poles) if al != 0 and abs(al) < 1.0]
    if len(inner) != 1:
        raise ContinuationError("connection evaluation expects exactly one inner pole")
    alpha, j_alpha = inner[0]
    r_alpha = residues[j_alpha]

    if 0.0 in poles:
        r0 = residues[poles.index(0.0)]
    else:
        r0 = np.zeros((p, p), dtype=complex)
    w0, v0 = np.linalg.eig(r0)
    order0 = np.argsort(np.abs(w0))
    if p > 1 and abs(w0[order0[1]]) <= 1e-10 * max(1.0, float(np.max(np.abs(w0)))):
        raise ContinuationError("exponent-zero frame is not one-dimensional at this lambda")
    c0 = _phase_fixed(v0[:, order0[0]])
    rho0 = w0[order0[-1]]

    nonzero = [(al, r) for al, r in zip(poles, residues) if al != 0]
    radius0 = min(abs(al) for al, _ in nonzero)
    z_start = 0.35 * alpha
    ratio = abs(z_start) / radius0

    # Frobenius series at the origin for the exponent-zero solution
    hmax = 420
    hk = np.empty((hmax, p, p), dtype=complex)
    for j, (al, r) in enumerate(nonzero):
        inv = 1.0 / al
        pw = inv
        for k in range(hmax):
            contrib = -r * pw
            if j == 0:
                hk[k] = contrib
            else:
                hk[k] += contrib
            pw *= inv
    coeffs = [c0.astype(complex)]
    val = c0.astype(complex).copy()
    zpow = 1.0 + 0.0j
    quiet = 0
    for n in range(1, hmax):
        rhs = np.zeros(p, dtype=complex)
        for l in range(n):
            rhs += hk[n - 1 - l] @ coeffs[l]
        gap = min(abs(n - wv) for wv in w0)
        if gap <= 1e-9 * max(1.0, float(np.max(np.abs(w0)))):
            raise ResonanceError(
                f"exponent at the origin within {gap:.2e} of a positive integer"
            )
        cn = np.linalg.solve(n * np.eye(p) - r0, rhs)
        coeffs.append(cn)
        zpow *= z_start
        term = cn * zpow
        val += term
        if float(np.linalg.norm(term)) <= 1e-16 * max(1.0, float(np.linalg.norm(val))):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    else:
        if ratio > 0.9:
            raise ContinuationError("series at the origin converges too slowly")

    d_alpha = min(abs(alpha - al) for al in poles if al != alpha)
    r_match = 0.35 * d_alpha
    z_match = alpha * (1.0 - r_match / abs(alpha))
    f_match = _transport(poles, residues, val, z_start, z_match)

    theta0 = np.angle(z_match - alpha)
    arcs = 12
    f_loop = f_match
    z_cur = z_match
    for k in range(1, arcs + 1):
        z_next = z_match if k == arcs else alpha + r_match * np.exp(
            1j * (theta0 + 2.0 * np.pi * k / arcs)
        )
        f_loop = _transport(poles, residues, f_loop, z_cur, z_next)
        z_cur = z_next

    wa, va = np.linalg.eig(r_alpha)
    ia = int(np.argmax(np.abs(wa)))
    rho = wa[ia]
    d0 = _phase_fixed(va[:, ia])
    deficit = complex(d0.conj() @ (f_loop - f_match))
    denom = np.exp(rho * np.log(r_match))
    scale = max(float(np.linalg.norm(f_match)), 1e-100)
    t = np.exp(-1j * np.pi * rho) * deficit / (2j * denom * scale)
    return complex(t)


def connection_determinant(problem: NchoProblem, lam: complex, polarization: int = 0) -> complex:
    """Scalar whose zeros along the real axis are eigenvalues.

    The exponent-zero solution frame at the origin is transported to the
    inner pencil pole and once around it; T is the single-valuedness
    deficit, normalized so that for one-dimensional frames it equals
    sin(pi * rho(lam)) times a smooth nonvanishing factor (real on the real
    axis for real-matrix problems).  Eigenfunctions whose exponent at the
    origin is a positive integer are visible in the other polarization; see
    connection_polarizations."""
    configs = connection_polarizations(problem)
    if not 0 <= polarization < len(configs):
        raise ContractViolation(f"polarization must be in range 0..{len(configs) - 1}")
    return _connection_t(configs[polarization], lam)


@dataclass
class RefineResult:
    value: float
    residual: float
    polarization: int


def _refine_in_config(config: NchoProblem, seed: float, tol: float) -> tuple[float, float]:
    def t_of(lam):
        return _connection_t(config, lam)

    t_seed = t_of(seed)
    if abs(t_seed) < tol:
        return float(seed), abs(t_seed)
    delta = max(1e-7, 1e-7 * abs(seed))
    width_cap = max(0.5, 0.05 * abs(seed))
    while delta <= width_cap:
        t_lo, t_hi = t_of(seed - delta), t_of(seed + delta)
        slope = (t_hi - t_lo) / (2.0 * delta)
        if abs(slope) < 1e-14:
            delta *= 4.0
            continue
        u = np.conj(slope) / abs(slope)
        f_lo, f_hi = float((u * t_lo).real), float((u * t_hi).real)
        if f_lo == 0.0:
            return float(seed - delta), abs(t_lo)
        if f_hi == 0.0:
            return float(seed + delta), abs(t_hi)
        if np.sign(f_lo) != np.sign(f_hi):
            root = brentq(
                lambda lam: float((u * t_of(lam)).real),
                seed - delta,
                seed + delta,
                xtol=1e-13,
                rtol=8.9e-16,
            )
            return float(root), abs(t_of(root))
        delta *= 4.0
    raise RefinementError(f"no sign change of T in a bracket around seed {seed}")


def refine_eigenvalue(problem: NchoProblem, seed: float, tol: float = 1e-10) -> RefineResult:
    """Bracketed root refinement of the connection determinant near a seed
    (seeds come from truncation).  Tries each polarization in turn."""
    configs = connection_polarizations(problem)
    failures = []
    for idx, config in enumerate(configs):
        try:
            value, residual = _refine_in_config(config, seed, tol)
            return RefineResult(value=value, residual=residual, polarization=idx)
        except (RefinementError, ResonanceError, ContinuationError) as exc:
            failures.append(f"polarization {idx}: {exc}")
    raise RefinementError("; ".join(failures))


def spectrum_connection(
    problem: NchoProblem, count: int, tol: float = 1e-10, seed_tol: float = 1e-9
) -> SpectrumResult:
    seeds = spectrum_truncated(problem, count, tol=seed_tol)
    values = []
    residuals = []
    for s in seeds.eigenvalues:
        r = refine_eigenvalue(problem, float(s), tol=tol)
        values.append(r.value)
        residuals.append(r.residual)
    return SpectrumResult(
        eigenvalues=np.array(values),
        method="connection",
        convergence=np.array(residuals),
        orders=seeds.orders,
    )


# ---------------------------------------------------------------------------
# radial modes and profiles


def laguerre_mode(m: int, mu: float, t, weighted: bool = True):
    """Radial mode l_m(t) = i^m (m!/(mu)_m) L_m^{(mu-1)}(2t) e^{-t}, via the
    ascending three-term recurrence of the Laguerre factor.  With
    weighted=False the e^{-t} factor is dropped (useful under quadrature
    weights)."""
    if m < 0 or mu <= 0:
        raise ContractViolation("need m >= 0 and mu > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ContractViolation("t must be positive")
    x = 2.0 * t_arr
    a = mu - 1.0
    lk_prev = np.ones_like(x)
    if m == 0:
        lag = lk_prev
    else:
        lk = 1.0 + a - x
        for k in range(1, m):
            lk, lk_prev = ((2 * k + 1 + a - x) * lk - (k + a) * lk_prev) / (k + 1), lk
        lag = lk
    factor = (1j**m) * _norm_sq(mu, m + 1)[m]
    out = factor * lag
    if weighted:
        out = out * np.exp(-t_arr)
    return out if out.shape else complex(out)


@dataclass
class ProfileResult:
    t: np.ndarray
    values: np.ndarray  # shape (len(t), p)
    coefficients: np.ndarray  # shape (order, p), monomial coefficients u_m
    tail: np.ndarray  # |u_m| per mode
    eigenvalue: float
    order: int


def eigenfunction_profile(
    problem: NchoProblem,
    lam: float,
    t_grid,
    tol: float = 1e-10,
    match_tol: float = 1e-6,
) -> ProfileResult:
    """Radial profile of the eigenfunction at (or near) lam: coefficients
    u_m recovered from the truncated eigenvector through the basis norms,
    then summed against the radial modes on t_grid."""
    t_arr = np.asarray(t_grid, dtype=float)
    if np.any(t_arr <= 0):
        raise ContractViolation("t grid must be positive")
    p, mu = problem.p, problem.mu
    order = 64
    prev = None
    while True:
        if p * order > _MAX_DENSE:
            raise ConvergenceError("profile did not converge within the order cap")
        vals, vecs = eigen_hermitian(build_truncated(problem, order).matrix, vectors=True)
        i = int(np.argmin(np.abs(vals - lam)))
        if prev is not None and abs(vals[i] - prev) < tol:
            break
        prev = vals[i]
        order *= 2
    if abs(vals[i] - lam) > match_tol * max(1.0, abs(lam)):
        raise NotAnEigenvalueError(
            f"{lam} is not within {match_tol:g} of a truncated eigenvalue "
            f"(nearest {vals[i]})"
        )
    vec = vecs[:, i]
    j = int(np.argmax(np.abs(vec)))
    vec = vec / (vec[j] / abs(vec[j]))
    u = vec.reshape(order, p) / np.sqrt(_norm_sq(mu, order))[:, None]

    # ascending recurrence over all grid points at once
    x = 2.0 * t_arr
    a = mu - 1.0
    weight = np.exp(-t_arr)
    norms = _norm_sq(mu, order)
    values = np.zeros((t_arr.size, p), dtype=complex)
    lk_prev = np.ones_like(x)
    lk = 1.0 + a - x
    for m in range(order):
        if m == 0:
            lag = lk_prev
        elif m == 1:
            lag = lk
        else:
            lk, lk_prev = ((2 * (m - 1) + 1 + a - x) * lk - (m - 1 + a) * lk_prev) / m, lk
            lag = lk
        mode = (1j**m) * norms[m] * lag * weight
        values += mode[:, None] * u[m][None, :]
    return ProfileResult(
        t=t_arr,
        values=values,
        coefficients=u,
        tail=np.linalg.norm(u, axis=1),
        eigenvalue=float(vals[i]),
        order=order,
    )


# ---------------------------------------------------------------------------
# confluence sweep

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _rabi_matrix(rabi: RabiParameters, order: int) -> np.ndarray:
    n = 2 * order
    h = np.zeros((n, n), dtype=complex)
    diag_part = rabi.Delta * _SIGMA3 + rabi.eps_bias * _SIGMA1
    for m in range(order):
        sl = slice(2 * m, 2 * m + 2)
        h[sl, sl] = rabi.omega * m * np.eye(2) + diag_part
        if m + 1 < order:
            sl1 = slice(2 * (m + 1), 2 * (m + 1) + 2)
            coup = rabi.g_coupling * math.sqrt(m + 1) * _SIGMA1
            h[sl1, sl] = coup
            h[sl, sl1] = coup.conj().T
    return h


def rabi_truncated_spectrum(rabi: RabiParameters, count: int, tol: float = 1e-10) -> np.ndarray:
    order = max(64, count)
    prev = None
    while True:
        if 2 * order > _MAX_DENSE:
            raise ConvergenceError("Rabi truncation did not converge within the order cap")
        vals = eigen_hermitian(_rabi_matrix(rabi, order))[:count]
        if prev is not None and float(np.max(np.abs(vals - prev))) < tol:
            return vals
        prev = vals
        order *= 2


@dataclass
class SweepResult:
    mu_values: list[float]
    deviations: list[float]
    rabi_eigenvalues: np.ndarray


def confluence_sweep(
    rabi: RabiParameters, mu_list, count: int = 5, tol: float = 1e-9
) -> SweepResult:
    """For each mu, compare the scaled oscillator spectrum (coupling
    g/sqrt(mu), energy shift mu/2) with the Rabi truncation; the maximum
    absolute deviation per mu decays like 1/mu."""
    mu_values = [float(m) for m in mu_list]
    if any(b >= a for a, b in zip(mu_values[1:], mu_values[:-1])):
        raise ContractViolation("mu values must be strictly increasing")
    if count < 1:
        raise ContractViolation("count must be at least 1")
    rabi_vals = rabi_truncated_spectrum(rabi, count, tol=tol)
    eye = np.eye(2, dtype=complex)
    deviations = []
    for mu in mu_values:
        b = (rabi.g_coupling / math.sqrt(mu)) * _SIGMA1
        c0 = -rabi.Delta * _SIGMA3 - rabi.eps_bias * _SIGMA1 + 0.5 * mu * rabi.omega * eye
        prob = NchoProblem(p=2, mu=mu, A=rabi.omega * eye, B=b, C0=c0)
        vals = spectrum_truncated(prob, count, tol=tol).eigenvalues / 2.0
        deviations.append(float(np.max(np.abs(vals - rabi_vals))))
    return SweepResult(mu_values=mu_values, deviations=deviations, rabi_eigenvalues=rabi_vals)
