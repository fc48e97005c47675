"""First-order Fuchsian system attached to a problem at a fixed spectral
value: residue matrices, characteristic exponents, and the behaviour of
the system under disk automorphisms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import INFINITY, Su11Element, is_infinity, mobius_apply, transform_problem
from .errors import ContractViolation
from .linalg import eigen_general_small
from .pencil import NchoProblem, PencilDecomposition, decompose_pencil

__all__ = [
    "FuchsianSystem",
    "PoleExponents",
    "build_fuchsian",
    "residue_at_infinity_formula",
    "exponents_at",
    "transform_fuchsian",
]


@dataclass(eq=False)
class FuchsianSystem:
    """df/dz = sum_j R_j / (z - alpha_j) f, with R_infinity = -sum_j R_j."""

    mu: float
    lam: complex
    singular_points: list[complex]
    residues: list[np.ndarray]
    residue_at_infinity: np.ndarray
    detb_zero: bool
    problem: NchoProblem | None = None
    decomposition: PencilDecomposition | None = None

    @property
    def p(self) -> int:
        return self.residue_at_infinity.shape[0]

    def pole_index(self, point: complex, tol: float = 1e-8) -> int:
        for j, al in enumerate(self.singular_points):
            if abs(al - point) <= tol * max(1.0, abs(point)):
                return j
        raise KeyError(f"no singular point near {point}")


def build_fuchsian(problem: NchoProblem, lam: complex) -> FuchsianSystem:
    """Residues R_j = P_j (-mu (alpha_j B + A/2) + C(lam))."""
    dec = decompose_pencil(problem)
    c = problem.c_matrix(lam)
    mu = problem.mu
    residues = [
        pj @ (-mu * (al * problem.B + 0.5 * problem.A) + c)
        for al, pj in zip(dec.poles, dec.residues)
    ]
    r_inf = -sum(residues) if residues else np.zeros((problem.p, problem.p), dtype=complex)
    return FuchsianSystem(
        mu=mu,
        lam=lam,
        singular_points=list(dec.poles),
        residues=residues,
        residue_at_infinity=r_inf,
        detb_zero=dec.detb_zero,
        problem=problem,
        decomposition=dec,
    )


def residue_at_infinity_formula(system: FuchsianSystem) -> np.ndarray:
    """Closed form for the residue at infinity: mu I when det B != 0, and
    mu I - P0' (mu A / 2 + C) when det B = 0."""
    if system.problem is None or system.decomposition is None:
        raise ContractViolation("system lacks its source problem")
    prob, dec = system.problem, system.decomposition
    eye = np.eye(prob.p)
    if not dec.detb_zero:
        return prob.mu * eye
    zero_idx = dec.poles.index(0.0)
    p0h = dec.residues[zero_idx].conj().T
    c = prob.c_matrix(system.lam)
    return prob.mu * eye - p0h @ (0.5 * prob.mu * prob.A + c)


@dataclass
class PoleExponents:
    values: np.ndarray
    residue_rank: int
    kernel_dim: int
    rank_bound_ok: bool
    shift_residual: float


def exponents_at(system: FuchsianSystem, j: int, rel_tol: float = 1e-8) -> PoleExponents:
    """Characteristic exponents at pole j (eigenvalues of R_j), together
    with the rank bound against ker Q(alpha_j) and the residual of the
    -mu/2 shift of R_j restricted to the image of P_j."""
    r = system.residues[j]
    vals = eigen_general_small(r)
    prob, dec = system.problem, system.decomposition
    if prob is None or dec is None:
        raise ContractViolation("system lacks its source problem")
    al = system.singular_points[j]
    pj = dec.residues[j]
    q_at = prob.B * al * al + prob.A * al + prob.B.conj().T

    anorm = float(np.max(np.abs(prob.A)))
    bnorm = float(np.max(np.abs(prob.B)))
    qscale = max(1.0, bnorm * abs(al) ** 2 + anorm * abs(al) + bnorm)
    s_q = np.linalg.svd(q_at, compute_uv=False)
    ker_dim = int(np.sum(s_q <= rel_tol * qscale))
    u, s_p, _ = np.linalg.svd(pj)
    rank_p = 0 if s_p[0] == 0 else int(np.sum(s_p > rel_tol * s_p[0]))

    # restriction of R to im(P) equals P C restricted minus mu/2
    shift_residual = 0.0
    if rank_p > 0:
        v = u[:, :rank_p]
        c = prob.c_matrix(system.lam)
        lhs = v.conj().T @ r @ v
        rhs = v.conj().T @ (pj @ c) @ v - 0.5 * prob.mu * np.eye(rank_p)
        shift_residual = float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(lhs))))

    rscale = max(float(np.max(np.abs(r))), 1e-300)
    s_r = np.linalg.svd(r, compute_uv=False)
    rank_r = int(np.sum(s_r > rel_tol * rscale))
    return PoleExponents(
        values=vals,
        residue_rank=rank_r,
        kernel_dim=ker_dim,
        rank_bound_ok=rank_r <= ker_dim,
        shift_residual=shift_residual,
    )


def transform_fuchsian(
    g: Su11Element, system: FuchsianSystem, problem: NchoProblem | None = None
) -> FuchsianSystem:
    """Push the system forward along a disk automorphism.

    Finite poles move by the Möbius rule with their residues unchanged; a
    pole sent to infinity folds into the residue at infinity; the image of
    infinity (when finite) acquires the residue -(sum_j R_j + mu I)."""
    prob = problem if problem is not None else system.problem
    mu = system.mu
    eye = np.eye(system.p)
    moved: list[tuple[complex, np.ndarray]] = []
    for al, r in zip(system.singular_points, system.residues):
        image = mobius_apply(g, al)
        if is_infinity(image):
            continue
        moved.append((complex(image), r))
    g_inf = mobius_apply(g, INFINITY)
    total = sum(system.residues) if system.residues else np.zeros_like(eye)
    extra = -(total + mu * eye)
    scale = max(1.0, float(np.max(np.abs(total))))
    if not is_infinity(g_inf) and float(np.max(np.abs(extra))) > 1e-12 * scale:
        moved.append((complex(g_inf), extra))
    moved.sort(key=lambda pr: (pr[0].real, pr[0].imag))
    points = [pt for pt, _ in moved]
    residues = [r for _, r in moved]
    r_inf = -sum(residues) if residues else np.zeros_like(eye)
    new_problem = transform_problem(g, prob) if prob is not None else None
    return FuchsianSystem(
        mu=mu,
        lam=system.lam,
        singular_points=points,
        residues=residues,
        residue_at_infinity=r_inf,
        detb_zero=new_problem is not None and decompose_pencil(new_problem).detb_zero,
        problem=new_problem,
        decomposition=decompose_pencil(new_problem) if new_problem is not None else None,
    )
