"""Shared helpers: seeded random problem generators and independent
oracles used across the test modules."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from nchodisk import NchoProblem, decompose_pencil, positivity_margin

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def random_hermitian(rng, p, scale=1.0):
    w = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return scale * 0.5 * (w + w.conj().T)


def random_problem(rng, p, mu=None, min_pole_gap=0.05):
    """Random problem with positive circle margin and well-separated simple
    poles; resamples (deterministically) until both hold."""
    mu = float(mu) if mu is not None else float(rng.uniform(0.4, 2.5))
    for _ in range(200):
        a = np.eye(p) + 0.25 * random_hermitian(rng, p)
        amin = float(np.linalg.eigvalsh(a)[0])
        if amin <= 0.2:
            continue
        b = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
        b *= 0.3 * amin / (2.0 * np.linalg.norm(b, 2))
        c0 = 0.4 * random_hermitian(rng, p)
        prob = NchoProblem(p=p, mu=mu, A=a, B=b, C0=c0)
        if positivity_margin(prob, 64).margin <= 0.05:
            continue
        try:
            dec = decompose_pencil(prob)
        except Exception:
            continue
        poles = dec.poles
        gaps = [
            abs(poles[i] - poles[j])
            for i in range(len(poles))
            for j in range(i + 1, len(poles))
        ]
        if gaps and min(gaps) < min_pole_gap:
            continue
        return prob
    raise RuntimeError("random problem generation failed to satisfy constraints")


def scalar_closed_eigenvalue(a, b, c0, mu, m):
    """Exact eigenvalues of the scalar (p = 1) problem with real b < a/2:
    sqrt(a^2 - 4 b^2) (2m + mu) - 2 c0."""
    return math.sqrt(a * a - 4.0 * b * b) * (2 * m + mu) - 2.0 * c0


def eliminated_scalar_coefficients(problem, lam, z):
    """Independent route to the scalar ODE coefficients: eliminate the second
    component from the 2x2 first-order system numerically.

    Returns (p(z), q(z)) with f1'' + p f1' + q f1 = 0."""
    a_m, b_m = problem.A, problem.B
    bh = b_m.conj().T
    c = problem.c_matrix(lam)
    q_z = b_m * z * z + a_m * z + bh
    n_z = -problem.mu * (b_m * z + 0.5 * a_m) + c
    m = np.linalg.solve(q_z, n_z)
    qp = 2.0 * b_m * z + a_m
    mp = np.linalg.solve(q_z, -problem.mu * b_m - qp @ m)
    big_p = m[0, 0] + m[1, 1] + mp[0, 1] / m[0, 1]
    big_r = m[0, 1] * m[1, 0] - m[0, 0] * m[1, 1] + mp[0, 0] - m[0, 0] * mp[0, 1] / m[0, 1]
    return -big_p, -big_r


def laurent_coefficients(fn, center, radius, orders, npts=64):
    """Laurent coefficients of a scalar function around a point by trapezoid
    quadrature on a circle; orders is an iterable of integer indices."""
    k = np.arange(npts)
    zs = center + radius * np.exp(2j * np.pi * k / npts)
    vals = np.array([fn(z) for z in zs])
    out = {}
    for n in orders:
        out[n] = complex(
            np.mean(vals * (radius * np.exp(2j * np.pi * k / npts)) ** (-n))
        )
    return out
