"""Entropic and divergence functionals, plus the closed-form finite-size terms.

Conventions: every entropic quantity is reported in bits (log base 2) unless
a ``nats`` switch says otherwise; the chi-squared divergence is base-free.
Spectral floors follow the package policy: sigma-eigenvalues below
SPECTRAL_FLOOR are clipped (with a count) inside logarithms, and support
violations are reported through an infinite DivergenceValue rather than an
exception, so callers can distinguish "legitimately infinite" from a numeric
failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from covertqkd.fockcore import (
    DensityOperator,
    DimensionMismatchError,
    displacement_log_kernel,
    fidelity,
)

SPECTRAL_FLOOR = 1e-30
SUPPORT_EIGENVALUE = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class DivergenceValue:
    """Divergence result with the number of floor-clipped eigenvalues."""

    value: float
    floor_clips: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def __float__(self) -> float:
        return self.value


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Entropy -tr(rho log2 rho) in bits, with 0 log 0 = 0."""
    w = np.linalg.eigvalsh(rho.matrix)
    if w.min() < -1e-9:
        raise ValueError(f"eigenvalue {w.min():.3e} below tolerance")
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def _support_violation(wr, vr, sigma_matrix, rho_matrix, ws, vs) -> bool:
    """Support rule supp(rho) within supp(sigma), within tolerances.

    Two tests: every rho-eigenvector above SUPPORT_EIGENVALUE must have
    sigma-expectation above SPECTRAL_FLOOR, and the total rho mass on the
    sigma-eigendirections below the spectral floor must stay under 1e-12
    (this second clause catches partially supported states whose dominant
    eigenvector still overlaps sigma).
    """
    significant = wr > SUPPORT_EIGENVALUE
    if np.any(significant):
        vecs = vr[:, significant]
        expect = np.real(np.einsum("ij,jk,ki->i", vecs.conj().T, sigma_matrix, vecs))
        if np.any(expect <= SPECTRAL_FLOOR):
            return True
    null = ws < SPECTRAL_FLOOR
    if np.any(null):
        vecs = vs[:, null]
        mass = float(np.real(np.einsum("ij,jk,ki->", vecs.conj().T, rho_matrix, vecs)))
        if mass > 1e-12:
            return True
    return False


def relative_entropy(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """Quantum relative entropy D(rho || sigma) in bits.

    Support rule: every rho-eigenvector with eigenvalue above 1e-12 must have
    sigma-expectation above 1e-30, otherwise the result is the infinite
    signal.  sigma-eigenvalues below the spectral floor are clipped with a
    recorded count.
    """
    if rho.cutoffs != sigma.cutoffs:
        raise DimensionMismatchError("relative_entropy on mismatched cutoffs")
    wr, vr = np.linalg.eigh(rho.matrix)
    ws, vs = np.linalg.eigh(sigma.matrix)
    if _support_violation(wr, vr, sigma.matrix, rho.matrix, ws, vs):
        return DivergenceValue(math.inf)
    wr = np.clip(wr, 0.0, None)
    clips = int(np.sum(ws < SPECTRAL_FLOOR))
    ws = np.clip(ws, SPECTRAL_FLOOR, None)
    pos = wr > 0.0
    ent = float(np.sum(wr[pos] * np.log2(wr[pos])))
    overlap = np.abs(vr.conj().T @ vs) ** 2
    cross = float(np.sum(wr[:, None] * overlap * np.log2(ws)[None, :]))
    value = ent - cross
    if math.isnan(value):
        raise ValueError("relative entropy produced NaN")
    return DivergenceValue(value, clips)


def chi2_divergence(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """Chi-squared divergence tr(rho^2 sigma^-1) - 1 (dimensionless, base-free).

    sigma is pseudo-inverted on its numerically resolvable support; rho mass
    outside that support triggers the infinite signal by the same rule as
    relative_entropy.
    """
    if rho.cutoffs != sigma.cutoffs:
        raise DimensionMismatchError("chi2_divergence on mismatched cutoffs")
    wr, vr = np.linalg.eigh(rho.matrix)
    ws, vs = np.linalg.eigh(sigma.matrix)
    if _support_violation(wr, vr, sigma.matrix, rho.matrix, ws, vs):
        return DivergenceValue(math.inf)
    # numerically resolvable support of sigma: relative machine floor
    floor = max(SPECTRAL_FLOOR, float(ws.max()) * len(ws) * np.finfo(float).eps)
    keep = ws > floor
    clips = int(np.sum(~keep))
    inv = np.zeros_like(ws)
    inv[keep] = 1.0 / ws[keep]
    rho2_in_sigma_basis = np.real(
        np.einsum("ij,ji->i", vs.conj().T @ rho.matrix, rho.matrix @ vs)
    )
    value = float(np.sum(rho2_in_sigma_basis * inv)) - 1.0
    if math.isnan(value):
        raise ValueError("chi2 divergence produced NaN")
    return DivergenceValue(value, clips)


def _displaced_thermal_chi2_log_terms(beta: complex, nbar: float, cutoff: int) -> np.ndarray:
    """Per-Fock-level log terms of tr(rho^2 sigma^-1) for the displaced-thermal pair.

    Entry j is ln(<j| rho^2 |j> / q_j) with rho = D(beta) th(nbar) D^dag and
    sigma = th(nbar).  The thermal sum over the rho eigenlevel n is truncated
    where its relative contribution falls below 1e-24 (the tail is bounded by
    y^n / n! with y = |beta|^2), keeping the evaluation linear in the cutoff.
    All terms are positive, so partial sums are monotone in the cutoff.
    """
    y = abs(beta) ** 2
    s = nbar / (1.0 + nbar)
    n_eff = 1
    bound = 1.0
    while bound >= 1e-24 and n_eff < cutoff:
        bound *= y / n_eff
        n_eff += 1
    n_eff = min(cutoff, n_eff + 2)
    logq = math.log1p(-s) + np.arange(cutoff) * math.log(s)
    kern = displacement_log_kernel(beta, cutoff, n_count=n_eff)
    # ln <j| rho^2 |j> = logsumexp_n (2 ln p_n + ln |<j|D|n>|^2)
    inner = 2.0 * logq[None, :n_eff] + kern
    mx = inner.max(axis=1, keepdims=True)
    log_rho2_diag = mx[:, 0] + np.log(np.sum(np.exp(inner - mx), axis=1))
    return log_rho2_diag - logq


def displaced_thermal_log1p_chi2(beta: complex, nbar: float, cutoff: int) -> float:
    """ln(1 + chi2) between D(beta) th(nbar) D^dag and th(nbar).

    Partial sum of the infinite-dimensional tr(rho^2 sigma^-1) over the first
    ``cutoff`` Fock levels, computed entirely in the log domain through the
    displaced-Fock overlap kernel.  This is the numerically trustworthy path
    for divergences far beyond what dense linear algebra (or a float at all)
    can represent.  The two argument orders coincide for this pair (the
    photon-number weights of both states are the same thermal sequence),
    which the generic evaluator confirms at desk scale.
    """
    if nbar == 0:
        return 0.0 if beta == 0 else math.inf
    if beta == 0:
        return 0.0
    terms = _displaced_thermal_chi2_log_terms(beta, nbar, cutoff)
    mx = float(terms.max())
    return mx + float(np.log(np.sum(np.exp(terms - mx))))


def displaced_thermal_chi2(beta: complex, nbar: float, cutoff: int) -> float:
    """Chi-squared divergence between D(beta) th(nbar) D^dag and th(nbar).

    Returns +inf when the value exceeds the float range; callers that need
    the magnitude there should use ``displaced_thermal_log1p_chi2``.
    """
    log1p = displaced_thermal_log1p_chi2(beta, nbar, cutoff)
    if log1p > 700.0:
        return math.inf
    return math.expm1(log1p)


def displaced_thermal_chi2_table(
    beta: complex,
    nbar: float,
    start: int = 8,
    step: int = 8,
    max_cutoff: int = 32768,
    rel_tol: float = 1e-4,
) -> tuple[list[tuple[int, float, float]], bool]:
    """Cutoff-convergence table for the displaced-thermal chi-squared.

    Returns (rows, converged) with rows (cutoff, chi2, ln(1+chi2)); chi2 is
    +inf where unrepresentable.  The terms are cutoff-independent, so rows
    are prefix sums sampled on the linear grid; convergence is declared once
    the successive relative change of 1 + chi2 (exactly expm1 of the
    ln(1+chi2) increment, equal to the relative change of chi2 itself
    whenever chi2 >> 1) drops below ``rel_tol``.
    """
    if nbar == 0 or beta == 0:
        value = 0.0 if (beta == 0 or nbar > 0) else math.inf
        log1p = 0.0 if value == 0.0 else math.inf
        return [(start, value, log1p)], True
    # estimate where the term series peaks to size the first evaluation
    s = nbar / (1.0 + nbar)
    exponent = abs(beta) ** 2 * (1.0 - s * s) / s
    current = max(start + step, int(exponent + 12.0 * math.sqrt(exponent)) + 64)
    current = min(current, max_cutoff)
    while True:
        terms = _displaced_thermal_chi2_log_terms(beta, nbar, current)
        prefix = np.logaddexp.accumulate(terms)
        rows: list[tuple[int, float, float]] = []
        converged = False
        previous = None
        for cut in range(start, current + 1, step):
            log1p = float(prefix[cut - 1])
            value = math.expm1(log1p) if log1p <= 700.0 else math.inf
            rows.append((cut, value, log1p))
            if previous is not None and math.expm1(log1p - previous) < rel_tol:
                converged = True
                break
            previous = log1p
        if converged or current >= max_cutoff:
            return rows, converged
        current = min(max_cutoff, 2 * current)


def displaced_thermal_relative_entropy(delta_beta: complex, nbar: float) -> float:
    """Exact D(D(b) th(nbar) D^dag || th(nbar)) in bits, untruncated.

    Both states share the thermal spectrum p_n, so tr(rho log rho) telescopes
    to log2(1-s) + nbar log2(s), and the cross term uses the photon-moment
    identity sum_j |<j|D(b)|n>|^2 j = n + |b|^2, giving
    log2(1-s) + (nbar + |b|^2) log2(s).  The difference is
    -|b|^2 log2(s) = |b|^2 log2(1 + 1/nbar), which sidesteps every floating
    floor the generic spectral path needs for near-pure states.
    """
    y = abs(delta_beta) ** 2
    if y == 0.0:
        return 0.0
    if nbar <= 0.0:
        return math.inf
    return y * math.log2(1.0 + 1.0 / nbar)


def c_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Fidelity-based metric sqrt(1 - F); satisfies the triangle inequality."""
    return math.sqrt(max(0.0, 1.0 - fidelity(rho, sigma)))


def binary_entropy(p: float) -> float:
    """Binary entropy in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy argument {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def finite_size_term(alphabet_log: float, blocks: float, eps: float, nats: bool = False) -> float:
    """Finite-block correction (2 alphabet_log + 3) sqrt((log(1/eps) + 1) / blocks)."""
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    log_inv = math.log(1.0 / eps) if nats else math.log2(1.0 / eps)
    return (2.0 * alphabet_log + 3.0) * math.sqrt((log_inv + 1.0) / blocks)


def aleph(x: float, y: float) -> float:
    """Fidelity threshold function; strictly decreasing in x for x > 0.

    aleph(x, y) = 1 - t - 2 sqrt(t) x - x^2 with t = (2 sqrt(1-y) x + x^2)/y.
    Can return negative values; y = 0 is undefined.
    """
    if y <= 0.0 or y > 1.0:
        raise ValueError(f"aleph fidelity argument {y} outside (0, 1]")
    if x < 0.0:
        raise ValueError(f"aleph first argument {x} negative")
    t = (2.0 * math.sqrt(1.0 - y) * x + x * x) / y
    return 1.0 - t - 2.0 * math.sqrt(t) * x - x * x
