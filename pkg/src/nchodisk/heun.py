"""Scalar second-order reduction for p = 2 problems in standard form:
Heun-type parameters, exponent tables, closed forms for the classical
two-level oscillator family, and the large-mu confluence to (asymmetric)
Rabi / Jaynes-Cummings data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import INFINITY
from .errors import ContractViolation, PositivityError
from .linalg import adjugate_and_det, as_matrix
from .pencil import NchoProblem

__all__ = [
    "HeunParameters",
    "RabiParameters",
    "RabiClassification",
    "ConfluentHeunData",
    "ClosedFormHeunData",
    "QuantizationReport",
    "heun_like_parameters",
    "heun_equation_4pt",
    "standard_ncho_problem",
    "beta_gamma_closed_forms",
    "confluent_limit_params",
    "confluence_residuals",
    "rabi_jc_map",
    "quantization_check",
    "apparent_singularity_residual",
]


@dataclass
class HeunParameters:
    """Scalar-equation data for a standard-form p = 2 problem at fixed lambda.

    n_singularities is 5 (generic, with an apparent point at epsilon) or 4
    (the B = B' branch, plain Heun).  scheme maps each singularity label to
    its pair of characteristic exponents.
    """

    alpha: complex
    kappa0: complex
    kappa1: complex
    mu: float
    lam: complex
    q1: complex
    epsilon: complex | None
    q2: complex | None
    n_singularities: int
    scheme: dict[str, tuple[complex, complex]]
    singular_locations: dict[str, complex]
    coalescent: bool = False

    def fuchs_sum(self) -> complex:
        return sum(e for pair in self.scheme.values() for e in pair)

    def coefficient_p(self, z: complex) -> complex:
        """First-order coefficient of f'' + p f' + q f = 0."""
        mu = self.mu
        al = self.alpha
        if self.n_singularities == 4:
            out = 1.0 / al
            return (
                (-self.kappa0 + mu / 2) / z
                + (1 - self.kappa1 + mu / 2) / (z - al)
                + (1 + self.kappa1 + mu / 2) / (z - out)
            )
        if self.coalescent:
            raise ContractViolation("coalescent case has no closed coefficient form")
        out = 1.0 / np.conj(al)
        return (
            (-self.kappa0 + mu / 2) / z
            + (1 - self.kappa1 + mu / 2) / (z - al)
            + (1 + np.conj(self.kappa1) + mu / 2) / (z - out)
            - 1.0 / (z - self.epsilon)
        )

    def coefficient_q(self, z: complex) -> complex:
        """Zero-order coefficient of f'' + p f' + q f = 0."""
        mu = self.mu
        al = self.alpha
        if self.n_singularities == 4:
            out = 1.0 / al
            return (mu * (1 - self.kappa0 + mu / 2) * z + self.q1) / (z * (z - al) * (z - out))
        if self.coalescent:
            raise ContractViolation("coalescent case has no closed coefficient form")
        out = 1.0 / np.conj(al)
        den2 = (z - al) * (z - out)
        return (
            mu * (-np.conj(self.kappa0) + mu / 2) / den2
            + self.q1 / (z * den2)
            + self.q2 / (den2 * (z - self.epsilon))
        )


def _check_standard_form(problem: NchoProblem, tol: float) -> None:
    if problem.p != 2:
        raise ContractViolation("scalar reduction is defined for p = 2")
    if float(np.max(np.abs(problem.A - np.eye(2)))) > tol:
        raise ContractViolation("standard form requires A = I")
    if float(np.max(np.abs(problem.B[1, :]))) > tol * max(1.0, float(np.max(np.abs(problem.B)))):
        raise ContractViolation("standard form requires a zero bottom row in B")
    b1, b2 = problem.B[0, 0], problem.B[0, 1]
    if abs(b1) <= tol:
        raise ContractViolation("standard form requires b1 != 0")
    if 2.0 * abs(b1) + abs(b2) ** 2 >= 1.0:
        raise ContractViolation("standard form requires 2|b1| + |b2|^2 < 1")


def _kappa0(problem: NchoProblem, c: np.ndarray) -> complex:
    adj_bh, _ = adjugate_and_det(problem.B.conj().T)
    adj_a, _ = adjugate_and_det(problem.A)
    return complex(np.trace(adj_bh @ c) / np.trace(adj_a @ problem.B.conj().T))


def _kappa1(problem: NchoProblem, c: np.ndarray, alpha: complex, outer: complex) -> complex:
    g = problem.B * alpha + problem.A + problem.B.conj().T / alpha
    adj_g, _ = adjugate_and_det(g)
    adj_a, _ = adjugate_and_det(problem.A)
    return complex(np.trace(adj_g @ c) / ((alpha - outer) * np.trace(adj_a @ problem.B)))


def _q1(problem: NchoProblem, c: np.ndarray) -> complex:
    adj_a, _ = adjugate_and_det(problem.A)
    _, det_shift = adjugate_and_det(c - 0.5 * problem.mu * problem.A)
    return complex(det_shift / np.trace(adj_a @ problem.B))


def heun_like_parameters(problem: NchoProblem, lam: complex, tol: float = 1e-8) -> HeunParameters:
    """Parameters of the single second-order equation equivalent to the
    standard-form system at the given lambda.

    Degrades to the 4-point Heun data when b2 = 0; reports the coalescent
    case (c3 = -mu/2 with b2 != 0) with epsilon and q2 omitted.
    """
    _check_standard_form(problem, tol)
    b1, b2 = problem.B[0, 0], problem.B[0, 1]
    if abs(b2) <= 1e-10 * max(1.0, abs(b1)):
        return heun_equation_4pt(problem, lam, tol=tol)
    mu = problem.mu
    c = problem.c_matrix(lam)
    c3 = c[1, 1]

    disc = (1.0 - abs(b2) ** 2) ** 2 - 4.0 * abs(b1) ** 2
    root = math.sqrt(disc)
    alpha = (-(1.0 - abs(b2) ** 2) + root) / (2.0 * b1)
    alt = (-(1.0 - abs(b2) ** 2) - root) / (2.0 * b1)
    if abs(alpha) > abs(alt):
        alpha = alt
    outer = 1.0 / np.conj(alpha)

    kappa0 = _kappa0(problem, c)
    kappa1 = _kappa1(problem, c, alpha, outer)
    q1 = _q1(problem, c)

    coalescent = abs(c3 + mu / 2) <= 1e-10 * max(1.0, abs(c3))
    if coalescent:
        epsilon = None
        q2 = None
    else:
        c1, c2, c21 = c[0, 0], c[0, 1], c[1, 0]
        epsilon = complex(c2 / (b2 * (c3 + mu / 2)))
        q2 = complex(
            (
                mu * (b2 * (c1 - mu / 2) - b1 * c2)
                + b2 * ((c1 - mu / 2) * (c3 - mu / 2) - c2 * c21)
            )
            / (b1 * b2 * (c3 + mu / 2))
        )

    scheme = {
        "zero": (0.0 + 0.0j, 1.0 + kappa0 - mu / 2),
        "inner": (0.0 + 0.0j, kappa1 - mu / 2),
        "outer": (0.0 + 0.0j, -np.conj(kappa1) - mu / 2),
        "infinity": (complex(mu), -np.conj(kappa0) + mu / 2),
    }
    locations = {"zero": 0.0 + 0.0j, "inner": alpha, "outer": outer, "infinity": INFINITY}
    if not coalescent:
        scheme["apparent"] = (0.0 + 0.0j, 2.0 + 0.0j)
        locations["apparent"] = epsilon
    return HeunParameters(
        alpha=complex(alpha),
        kappa0=kappa0,
        kappa1=kappa1,
        mu=mu,
        lam=complex(lam),
        q1=q1,
        epsilon=epsilon,
        q2=q2,
        n_singularities=5,
        scheme=scheme,
        singular_locations=locations,
        coalescent=coalescent,
    )


def heun_equation_4pt(problem: NchoProblem, lam: complex, tol: float = 1e-8) -> HeunParameters:
    """Plain Heun data for the B = B' branch (b2 = 0, b1 real)."""
    _check_standard_form(problem, tol)
    b1, b2 = problem.B[0, 0], problem.B[0, 1]
    if abs(b2) > 1e-10 * max(1.0, abs(b1)):
        raise ContractViolation("b2 != 0: use heun_like_parameters")
    if abs(b1.imag) > 1e-8 * max(1.0, abs(b1)):
        raise ContractViolation("4-point branch requires real b1 (rotate the problem first)")
    b1r = float(b1.real)
    mu = problem.mu
    c = problem.c_matrix(lam)

    root = math.sqrt(1.0 - 4.0 * b1r * b1r)
    alpha = (-1.0 + root) / (2.0 * b1r)
    alt = (-1.0 - root) / (2.0 * b1r)
    if abs(alpha) > abs(alt):
        alpha = alt
    outer = 1.0 / alpha

    kappa0 = _kappa0(problem, c)
    kappa1 = _kappa1(problem, c, alpha, outer)
    q1 = _q1(problem, c)

    scheme = {
        "zero": (0.0 + 0.0j, 1.0 + kappa0 - mu / 2),
        "inner": (0.0 + 0.0j, kappa1 - mu / 2),
        "outer": (0.0 + 0.0j, -kappa1 - mu / 2),
        "infinity": (complex(mu), 1.0 - kappa0 + mu / 2),
    }
    locations = {
        "zero": 0.0 + 0.0j,
        "inner": complex(alpha),
        "outer": complex(outer),
        "infinity": INFINITY,
    }
    return HeunParameters(
        alpha=complex(alpha),
        kappa0=kappa0,
        kappa1=kappa1,
        mu=mu,
        lam=complex(lam),
        q1=q1,
        epsilon=None,
        q2=None,
        n_singularities=4,
        scheme=scheme,
        singular_locations=locations,
    )


def apparent_singularity_residual(params: HeunParameters) -> float:
    """No-log solvability residual of the exponent-0 Frobenius series at the
    apparent point; zero means trivial local monodromy."""
    if params.n_singularities != 5 or params.epsilon is None:
        raise ContractViolation("apparent point exists only in the 5-point case")
    mu, al, eps = params.mu, params.alpha, params.epsilon
    outer = 1.0 / np.conj(al)
    # residues of p at the other three singular points
    p_res = {
        0.0 + 0.0j: -params.kappa0 + mu / 2,
        al: 1.0 - params.kappa1 + mu / 2,
        outer: 1.0 + np.conj(params.kappa1) + mu / 2,
    }
    p1 = sum(a / (eps - s) for s, a in p_res.items())
    d_in, d_out = eps - al, eps - outer
    q_apparent = params.q2 / (d_in * d_out)
    q_analytic_at_eps = (
        mu * (-np.conj(params.kappa0) + mu / 2) / (d_in * d_out)
        + params.q1 / (eps * d_in * d_out)
    )
    dg = -params.q2 * (d_in + d_out) / (d_in * d_in * d_out * d_out)
    q2_taylor = q_analytic_at_eps + dg
    # series f = 1 + c1 w + ...; the order-2 equation is resonant and its
    # right-hand side must vanish for a log-free (hence single-valued) local basis
    c1 = q_apparent
    resid = (p1 + q_apparent) * c1 + q2_taylor
    scale = max(1.0, abs(p1), abs(q_apparent), abs(q2_taylor))
    return float(abs(resid)) / scale


def standard_ncho_problem(beta: float, gamma: float, eta: float, mu: float) -> NchoProblem:
    """The classical two-level oscillator family: A = diag(beta, gamma),
    skew coupling B, and an eta-shift in C0."""
    if beta <= 0 or gamma <= 0:
        raise PositivityError("beta and gamma must be positive")
    if eta != 0.0 and beta * gamma <= 1.0:
        raise PositivityError("eta-shifted family needs beta * gamma > 1")
    s = math.sqrt(max(beta * gamma - 1.0, 0.0))
    a = np.diag([beta, gamma]).astype(complex)
    b = 0.5 * np.array([[0.0, 1j], [-1j, 0.0]])
    c0 = eta * s * np.array([[0.0, 1j], [-1j, 0.0]])
    return NchoProblem(p=2, mu=mu, A=a, B=b, C0=c0)


@dataclass
class ClosedFormHeunData:
    alpha: float
    kappa_plus: float
    kappa_minus: float
    q_plus: float
    q_minus: float


def beta_gamma_closed_forms(
    beta: float, gamma: float, eta: float, lam: float, mu: float
) -> ClosedFormHeunData:
    """Closed-form Heun data for the beta-gamma family (positivity requires
    beta * gamma > 1)."""
    if beta <= 0 or gamma <= 0 or beta * gamma <= 1.0:
        raise PositivityError("closed forms require beta, gamma > 0 and beta * gamma > 1")
    bg = beta * gamma
    alpha = 1.0 / math.sqrt(bg)
    kap = 0.25 * lam * (beta + gamma) / math.sqrt(bg * (bg - 1.0))
    kappa_plus = kap + eta
    kappa_minus = kap - eta
    common = (
        0.25 * lam * lam
        - lam * mu * math.sqrt(bg) * (beta + gamma) / (4.0 * math.sqrt(bg - 1.0))
        + 0.25 * mu * mu * (bg + 1.0)
        - eta * eta * (bg - 1.0)
    )
    q_plus = -(common - eta * mu) / math.sqrt(bg)
    q_minus = -(common + eta * mu) / math.sqrt(bg)
    return ClosedFormHeunData(alpha, kappa_plus, kappa_minus, q_plus, q_minus)


@dataclass
class ConfluentHeunData:
    kappa_t_plus: float
    kappa_t_minus: float
    q_t_plus: float
    q_t_minus: float


def confluent_limit_params(
    g_tilde: float, lambda_tilde: float, Delta: float, eps_bias: float
) -> ConfluentHeunData:
    """Confluent limit of the Heun data as mu -> infinity with the scaled
    coupling held fixed."""
    base = lambda_tilde + g_tilde**2
    kp = base - eps_bias
    km = base + eps_bias
    qcore = base * (lambda_tilde - 3.0 * g_tilde**2) - eps_bias**2 - Delta**2
    qp = qcore + 4.0 * g_tilde**2 * eps_bias
    qm = qcore - 4.0 * g_tilde**2 * eps_bias
    return ConfluentHeunData(kp, km, qp, qm)


def _finite_mu_kappa_q(g_tilde, lambda_tilde, Delta, eps_bias, mu):
    g = g_tilde / math.sqrt(mu)
    lam_p = lambda_tilde + mu / 2.0
    root = math.sqrt(1.0 - 4.0 * g * g)
    kappa = {
        +1: (lam_p - eps_bias) / root,
        -1: (lam_p + eps_bias) / root,
    }
    q = {}
    for sign in (+1, -1):
        inner = (
            lam_p * lam_p
            - lam_p * mu / root
            + 0.25 * mu * mu * (1.0 + 4.0 * g * g)
            + sign * 4.0 * g * g * mu * eps_bias / root
            - eps_bias**2
            - Delta**2
        )
        q[sign] = -inner / (2.0 * g)
    return kappa, q


def confluence_residuals(
    g_tilde: float, lambda_tilde: float, Delta: float, eps_bias: float, mu: float
) -> dict[str, float]:
    """Finite-mu deviation from the confluent limit; both entries are
    O(1/mu) and halve as mu doubles."""
    if g_tilde == 0.0:
        raise ContractViolation("residual scaling needs a nonzero coupling")
    lim = confluent_limit_params(g_tilde, lambda_tilde, Delta, eps_bias)
    kappa, q = _finite_mu_kappa_q(g_tilde, lambda_tilde, Delta, eps_bias, mu)
    factor = 2.0 * g_tilde / math.sqrt(mu)
    return {
        "kappa_plus": abs(kappa[+1] - lim.kappa_t_plus - mu / 2.0),
        "kappa_minus": abs(kappa[-1] - lim.kappa_t_minus - mu / 2.0),
        "q_plus": abs(q[+1] * factor + lim.q_t_plus),
        "q_minus": abs(q[-1] * factor + lim.q_t_minus),
    }


@dataclass
class RabiParameters:
    omega: float
    g_coupling: float
    Delta: float
    eps_bias: float
    lam: float = 0.0


@dataclass
class RabiClassification:
    kind: str  # "asymmetric-rabi" | "jaynes-cummings" | "generic"
    params: RabiParameters | None


def rabi_jc_map(A_t, B_t, C_t, tol: float = 1e-10) -> RabiClassification:
    """Recognize confluent-limit data as asymmetric Rabi or Jaynes-Cummings."""
    a, b, c = as_matrix(A_t), as_matrix(B_t), as_matrix(C_t)
    if a.shape != (2, 2) or b.shape != (2, 2) or c.shape != (2, 2):
        raise ContractViolation("classification expects 2x2 matrices")
    scale_a = max(1.0, float(np.max(np.abs(a))))
    off = max(abs(a[0, 1]), abs(a[1, 0]))
    if off > tol * scale_a or abs(a[0, 0] - a[1, 1]) > tol * scale_a or abs(a[0, 0].imag) > tol:
        raise ContractViolation("A must be a real multiple of the identity")
    omega = float(a[0, 0].real)

    def real_or_none(z):
        z = complex(z)
        return z.real if abs(z.imag) <= tol * max(1.0, abs(z)) else None

    lam = real_or_none(0.5 * (c[0, 0] + c[1, 1]))
    delta = real_or_none(0.5 * (c[1, 1] - c[0, 0]))
    scale_b = max(1.0, float(np.max(np.abs(b))))

    # lowering-operator coupling with diagonal C: Jaynes-Cummings
    if (
        max(abs(b[0, 0]), abs(b[0, 1]), abs(b[1, 1])) <= tol * scale_b
        and abs(b[1, 0]) > tol
        and abs(c[0, 1]) <= tol
        and abs(c[1, 0]) <= tol
        and lam is not None
        and delta is not None
    ):
        g = real_or_none(b[1, 0])
        if g is not None:
            return RabiClassification(
                "jaynes-cummings", RabiParameters(omega, g, delta, 0.0, lam)
            )

    # symmetric coupling with a symmetric bias: asymmetric Rabi
    if (
        max(abs(b[0, 0]), abs(b[1, 1])) <= tol * scale_b
        and abs(b[0, 1] - b[1, 0]) <= tol * scale_b
        and abs(b[0, 1]) > tol
        and lam is not None
        and delta is not None
        and abs(c[0, 1] - c[1, 0]) <= tol * max(1.0, abs(c[0, 1]))
    ):
        g = real_or_none(b[0, 1])
        eps = real_or_none(-c[0, 1])
        if g is not None and eps is not None:
            return RabiClassification(
                "asymmetric-rabi", RabiParameters(omega, g, delta, eps, lam)
            )

    return RabiClassification("generic", None)


@dataclass
class QuantizationReport:
    values: tuple[complex, complex]
    nearest: tuple[int, int]
    distances: tuple[float, float]
    passed: bool
    note: str


def quantization_check(params: HeunParameters, tol: float = 1e-8) -> QuantizationReport:
    """Necessary integrality condition for a two-dimensional solution space:
    1 + kappa0 - mu/2 and kappa1 - mu/2 must be positive integers.  The
    condition is not sufficient (logarithmic solutions may obstruct)."""
    v0 = 1.0 + params.kappa0 - params.mu / 2.0
    v1 = params.kappa1 - params.mu / 2.0
    out_nearest = []
    out_dist = []
    for v in (v0, v1):
        n = max(1, int(round(float(np.real(v)))))
        out_nearest.append(n)
        out_dist.append(float(abs(v - n)))
    passed = all(d <= tol for d in out_dist)
    return QuantizationReport(
        values=(complex(v0), complex(v1)),
        nearest=(out_nearest[0], out_nearest[1]),
        distances=(out_dist[0], out_dist[1]),
        passed=passed,
        note="necessary, not sufficient: logarithmic solutions may still obstruct",
    )
