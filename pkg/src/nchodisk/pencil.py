"""Problem data, quadratic matrix-pencil partial fractions, and the
machine checks for the residue identities and the circle positivity
condition.

The pencil is Q(z) = B z^2 + A z + B' (B' the conjugate transpose).  Its
inverse has only simple poles for admissible problems, and the residue
matrices drive the whole reduction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import ContractViolation, DegeneratePencil, SimplePoleViolation
from .linalg import adjugate_and_det, as_matrix, is_hermitian, poly_roots

__all__ = [
    "NchoProblem",
    "PencilDecomposition",
    "IdentityCheck",
    "IdentityReport",
    "PositivityCertificate",
    "mu_from_harmonic",
    "ab_from_a123",
    "a123_from_ab",
    "decompose_pencil",
    "decompose_quadratic_pencil",
    "verify_pencil_identities",
    "positivity_margin",
]

_HTOL = 1e-10


def mu_from_harmonic(n: int, k: int) -> float:
    """Radial weight for the degree-k harmonic sector in n variables."""
    if n < 1 or k < 0:
        raise ContractViolation("need n >= 1 and k >= 0")
    return k + n / 2.0


def ab_from_a123(A1, A2, A3) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) from the Hermitian coefficient triple: A = A1 + A3,
    B = (-i A1 + A2 + i A3) / 2."""
    a1, a2, a3 = as_matrix(A1), as_matrix(A2), as_matrix(A3)
    for name, m in (("A1", a1), ("A2", a2), ("A3", a3)):
        if not is_hermitian(m, _HTOL):
            raise ContractViolation(f"{name} must be Hermitian")
    if not (a1.shape == a2.shape == a3.shape):
        raise ContractViolation("A1, A2, A3 must share one shape")
    return a1 + a3, 0.5 * (-1j * a1 + a2 + 1j * a3)


def a123_from_ab(A, B) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of ab_from_a123; round-trips to 1e-12."""
    a, b = as_matrix(A), as_matrix(B)
    if not is_hermitian(a, _HTOL):
        raise ContractViolation("A must be Hermitian")
    skew = b - b.conj().T
    a1 = 0.5 * (a + 1j * skew)
    a2 = b + b.conj().T
    a3 = 0.5 * (a - 1j * skew)
    return a1, a2, a3


@dataclass(eq=False)
class NchoProblem:
    """Matrix data of one oscillator problem.

    The spectral family is C(lam) = C0 + lam * lam_coeff, with lam_coeff
    defaulting to I/2 so the truncated problem is a standard Hermitian
    eigenproblem.  Standardization steps that renormalize A carry the
    lambda dependence along in lam_coeff.
    """

    p: int
    mu: float
    A: np.ndarray
    B: np.ndarray
    C0: np.ndarray
    lam_coeff: np.ndarray | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ContractViolation("p must be a positive integer")
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ContractViolation("mu must be positive and finite")
        self.A = as_matrix(self.A)
        self.B = as_matrix(self.B)
        self.C0 = as_matrix(self.C0)
        shape = (self.p, self.p)
        for name, m in (("A", self.A), ("B", self.B), ("C0", self.C0)):
            if m.shape != shape:
                raise ContractViolation(f"{name} must be {self.p}x{self.p}")
        if not is_hermitian(self.A, _HTOL):
            raise ContractViolation("A must be Hermitian")
        if not is_hermitian(self.C0, _HTOL):
            raise ContractViolation("C0 must be Hermitian")
        if self.lam_coeff is None:
            self.lam_coeff = 0.5 * np.eye(self.p, dtype=complex)
        else:
            self.lam_coeff = as_matrix(self.lam_coeff)
            if self.lam_coeff.shape != shape:
                raise ContractViolation("lam_coeff must be p x p")
            if not is_hermitian(self.lam_coeff, _HTOL):
                raise ContractViolation("lam_coeff must be Hermitian")

    def c_matrix(self, lam: complex) -> np.ndarray:
        return self.C0 + lam * self.lam_coeff

    def has_standard_lam(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.lam_coeff - 0.5 * np.eye(self.p)))) <= tol

    def with_matrices(self, A=None, B=None, C0=None, lam_coeff=None) -> "NchoProblem":
        return replace(
            self,
            A=self.A if A is None else A,
            B=self.B if B is None else B,
            C0=self.C0 if C0 is None else C0,
            lam_coeff=self.lam_coeff if lam_coeff is None else lam_coeff,
        )


@dataclass(eq=False)
class PencilDecomposition:
    """Partial fraction data of Q(z)^-1 = sum_j P_j / (z - alpha_j)."""

    det_coeffs: np.ndarray
    poles: list[complex]
    residues: list[np.ndarray]
    zero_is_pole: bool
    detb_zero: bool
    reconstruction_residual: float
    sample_points: np.ndarray = field(repr=False, default=None)

    @property
    def degree(self) -> int:
        return len(self.det_coeffs) - 1


def _pencil_value(A, B, Bh, z):
    return B * z * z + A * z + Bh


def _seed_from(*arrays) -> int:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.round(np.asarray(a, dtype=complex), 12)).tobytes())
    return int.from_bytes(h.digest()[:8], "little")


def _contour_residue(a, b, bh, alpha, mult, poles, npts=64):
    others = [al for al in poles if al != alpha]
    gap = min((abs(alpha - al) for al in others), default=1.0)
    radius = min(0.05 * max(1.0, abs(alpha)), 0.25 * gap)
    k = np.arange(npts)
    ring = radius * np.exp(2j * np.pi * k / npts)
    vals = np.array([np.linalg.inv(_pencil_value(a, b, bh, alpha + w)) for w in ring])
    c_m1 = np.mean(vals * ring[:, None, None], axis=0)
    scale = max(1.0, float(np.max(np.abs(c_m1))))
    for order in range(2, mult + 1):
        c_mk = np.mean(vals * (ring[:, None, None] ** order), axis=0)
        if float(np.max(np.abs(c_mk))) > 1e-8 * scale * radius ** (order - 1):
            raise SimplePoleViolation(
                f"pole of the inverse at {alpha} has order >= {order}; "
                "the reduction assumes order-1 poles"
            )
    return c_m1


def decompose_quadratic_pencil(A, B, tol: float = 1e-8, seed=None) -> PencilDecomposition:
    """Partial fraction decomposition of (B z^2 + A z + B')^{-1}.

    Determinant coefficients come from evaluation at 2p+1 roots of unity and
    interpolation.  Every pole of the inverse must have order 1
    (SimplePoleViolation otherwise); residues at simple determinant roots
    are adj(Q(alpha)) / (det Q)'(alpha), repeated roots are certified and
    resolved through contour Laurent coefficients.
    """
    a, b = as_matrix(A), as_matrix(B)
    p = a.shape[0]
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ContractViolation("A and B must be square matrices of one size")
    bh = b.conj().T
    npts = 2 * p + 1
    nodes = np.exp(2j * np.pi * np.arange(npts) / npts)
    vals = np.array([np.linalg.det(_pencil_value(a, b, bh, z)) for z in nodes])
    vander = nodes[:, None] ** np.arange(npts)[None, :]
    coeffs = np.linalg.solve(vander, vals)
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        raise DegeneratePencil("pencil determinant vanishes identically")
    coeffs[np.abs(coeffs) <= 1e-12 * scale] = 0.0

    _, detb = adjugate_and_det(b)
    bnorm = max(1.0, float(np.max(np.abs(b))))
    detb_zero = abs(detb) <= 1e-10 * bnorm**p
    if detb_zero:
        # det Q(0) = conj(det B) and the leading coefficient is det B; pin both
        coeffs[0] = 0.0
        coeffs[-1] = 0.0
        if not np.any(np.abs(coeffs) > 0):
            raise DegeneratePencil("pencil determinant vanishes identically")

    root_list = poly_roots(coeffs, tol=tol)
    poles = [r for r, _ in root_list]
    zero_is_pole = any(r == 0 for r in poles)

    dcoeffs = npoly.polyder(coeffs)
    residues = []
    for alpha, mult in root_list:
        if mult == 1:
            adj, _ = adjugate_and_det(_pencil_value(a, b, bh, alpha))
            dval = npoly.polyval(alpha, dcoeffs)
            if abs(dval) <= 1e-14 * max(1.0, scale):
                raise SimplePoleViolation(f"determinant derivative vanishes at pole {alpha}")
            residues.append(adj / dval)
        else:
            # a repeated determinant root can still be an order-1 pole of the
            # inverse (higher-dimensional kernel); certify via the Laurent
            # coefficients on a contour and reject genuine higher-order poles
            residues.append(_contour_residue(a, b, bh, alpha, mult, poles))

    rng = np.random.default_rng(_seed_from(a, b) if seed is None else seed)
    samples = []
    residual = 0.0
    eye = np.eye(p)
    while len(samples) < 16:
        z = rng.uniform(0.2, 2.5) * np.exp(2j * np.pi * rng.uniform())
        if any(abs(z - al) < 0.1 for al in poles):
            continue
        samples.append(z)
        recon = sum(pj / (z - al) for al, pj in zip(poles, residues))
        residual = max(residual, float(np.max(np.abs(recon @ _pencil_value(a, b, bh, z) - eye))))
    return PencilDecomposition(
        det_coeffs=coeffs,
        poles=poles,
        residues=residues,
        zero_is_pole=zero_is_pole,
        detb_zero=detb_zero,
        reconstruction_residual=residual,
        sample_points=np.array(samples),
    )


def decompose_pencil(problem: NchoProblem, tol: float = 1e-8, seed=None) -> PencilDecomposition:
    return decompose_quadratic_pencil(problem.A, problem.B, tol=tol, seed=seed)


@dataclass
class IdentityCheck:
    name: str
    applicable: bool
    passed: bool
    residual: float


@dataclass
class IdentityReport:
    checks: list[IdentityCheck]
    all_passed: bool

    def residual(self, name: str) -> float:
        for c in self.checks:
            if c.name == name:
                return c.residual
        raise KeyError(name)


def _rank_and_kernel(m: np.ndarray, scale: float, rel_tol: float = 1e-8) -> tuple[int, int]:
    # scale is an external magnitude: entries below rel_tol * scale count as zero
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(s > rel_tol * max(scale, 1e-300)))
    return rank, m.shape[0] - rank


def verify_pencil_identities(
    dec: PencilDecomposition, problem: NchoProblem, tol: float = 1e-9
) -> IdentityReport:
    """Evaluate the six structural identities of the partial fraction data.

    Items: pole pairing across the unit circle, residue conjugation plus the
    absence of a polynomial part, the two residue-sum branches (det B != 0
    and det B = 0), the rank bound against ker Q(alpha), and the projector
    identity P (2 alpha B + A) P = P.
    """
    a, b = problem.A, problem.B
    bh = b.conj().T
    p = problem.p
    eye = np.eye(p)
    poles, residues = dec.poles, dec.residues

    checks: list[IdentityCheck] = []

    # 1: alpha <-> 1/conj(alpha) pairing
    res1 = 0.0
    pair_index: dict[int, int] = {}
    for i, al in enumerate(poles):
        if al == 0:
            continue
        target = 1.0 / np.conj(al)
        dists = [abs(target - other) / max(1.0, abs(target)) for other in poles]
        j = int(np.argmin(dists))
        pair_index[i] = j
        res1 = max(res1, float(dists[j]))
    checks.append(IdentityCheck("pole_pairing", True, res1 <= max(tol, 1e-8), res1))

    # 2: P at 1/conj(alpha) equals -P(alpha)^dagger, and no polynomial part
    res2 = dec.reconstruction_residual
    for i, j in pair_index.items():
        diff = residues[j] + residues[i].conj().T
        res2 = max(res2, float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(residues[i])))))
    checks.append(IdentityCheck("residue_conjugation", True, res2 <= max(tol, 1e-8), res2))

    sum_p = sum(residues) if residues else np.zeros((p, p), dtype=complex)
    sum_pb = sum(pj @ b for pj in residues) if residues else np.zeros((p, p), dtype=complex)
    sum_apb = (
        sum(al * pj @ b for al, pj in zip(poles, residues))
        if residues
        else np.zeros((p, p), dtype=complex)
    )

    if not dec.detb_zero:
        res3 = max(float(np.max(np.abs(sum_p))), float(np.max(np.abs(sum_apb - eye))))
        checks.append(IdentityCheck("sums_invertible_b", True, res3 <= tol, res3))
        checks.append(IdentityCheck("sums_singular_b", False, True, 0.0))
    else:
        zero_idx = poles.index(0.0)
        p0h = residues[zero_idx].conj().T
        res4 = max(
            float(np.max(np.abs(sum_p - p0h))),
            float(np.max(np.abs(sum_pb))),
            float(np.max(np.abs(sum_apb - (eye - p0h @ a)))),
        )
        checks.append(IdentityCheck("sums_invertible_b", False, True, 0.0))
        checks.append(IdentityCheck("sums_singular_b", True, res4 <= tol, res4))

    # 5: rank P(alpha) <= dim ker Q(alpha)
    anorm = float(np.max(np.abs(a)))
    bnorm = float(np.max(np.abs(b)))
    worst_excess = 0
    for al, pj in zip(poles, residues):
        q_at = _pencil_value(a, b, bh, al)
        qscale = max(1.0, bnorm * abs(al) ** 2 + anorm * abs(al) + bnorm)
        rank_p, _ = _rank_and_kernel(pj, float(np.max(np.abs(pj))))
        _, ker_q = _rank_and_kernel(q_at, qscale)
        worst_excess = max(worst_excess, rank_p - ker_q)
    checks.append(IdentityCheck("rank_bound", True, worst_excess <= 0, float(max(0, worst_excess))))

    # 6: P (2 alpha B + A) P = P
    res6 = 0.0
    for al, pj in zip(poles, residues):
        lhs = pj @ (2.0 * al * b + a) @ pj
        res6 = max(res6, float(np.max(np.abs(lhs - pj))) / max(1.0, float(np.max(np.abs(pj)))))
    checks.append(IdentityCheck("projector_identity", True, res6 <= tol, res6))

    return IdentityReport(checks=checks, all_passed=all(c.passed for c in checks))


@dataclass
class PositivityCertificate:
    margin: float
    argmin_phi: float
    lipschitz_bound: float
    certified_margin: float
    grid_size: int

    @property
    def certified(self) -> bool:
        return self.certified_margin > 0.0


def positivity_margin(problem: NchoProblem, grid_size: int = 256) -> PositivityCertificate:
    """Minimum over the unit circle grid of the least eigenvalue of
    B z + A + B' conj(z).

    The Lipschitz correction 2 pi |B| / grid_size turns the grid minimum
    into a conservative certificate valid on all of the circle.
    """
    if grid_size < 64:
        raise ContractViolation("grid_size must be at least 64")
    a, b = problem.A, problem.B
    bh = b.conj().T
    phis = 2.0 * np.pi * np.arange(grid_size) / grid_size
    best = np.inf
    best_phi = 0.0
    for phi in phis:
        z = np.exp(1j * phi)
        w = np.linalg.eigvalsh(b * z + a + bh * np.conj(z))
        if w[0] < best:
            best = float(w[0])
            best_phi = float(phi)
    bnorm = float(np.linalg.norm(b, 2))
    lip = 2.0 * np.pi * bnorm / grid_size
    return PositivityCertificate(
        margin=best,
        argmin_phi=best_phi,
        lipschitz_bound=lip,
        certified_margin=best - lip,
        grid_size=grid_size,
    )
