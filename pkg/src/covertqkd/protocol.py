"""PPM state construction, covertness and security evaluators, and rate reports.

Conventions fixed here (and echoed in every report):

* All entropic quantities are in bits unless ``nats=True``; the chi-squared
  divergence is base-free.
* Trace-norm statements use the full one-norm.  The covertness chain in full
  norm reads ||rho_PPM - idle^n||_1 <= 2 sqrt((ln 2 / 2) D_bits) <= 2 lambda1.
* The recovery-slack term enters the min-entropy bound with the
  proof-consistent sign, per-symbol log2(m_x) - D - log2(1 - eta), which is a
  positive contribution for eta > 0; the printed-statement variant
  (+log2(1 - eta)) is available behind a flag.
* The chi-squared divergence feeding the covertness formulas is between the
  single-mode probe outputs; both argument orders are computed and they
  coincide for the coherent-input lossy-thermal probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from covertqkd.fockcore import (
    DensityOperator,
    Ket,
    LossyThermalChannel,
    coherent_ket,
    displaced_thermal,
    fidelity,
    tensor,
    tensor_kets,
    vacuum_ket,
)
from covertqkd.infotheory import (
    aleph,
    binary_entropy,
    c_distance,
    displaced_thermal_chi2_table,
    displaced_thermal_relative_entropy,
    finite_size_term,
)

DESK_SCALE_DIM = 4096
ETA_BISECTION_TOL = 1e-10
LN2_TO_NATS = math.log(2.0)


@dataclass(frozen=True)
class PPMConfig:
    """Block structure: sub_blocks l, key alphabet m_x, coordination alphabet m_v."""

    sub_blocks: int
    m_x: int
    m_v: int

    def __post_init__(self):
        if self.sub_blocks < 1 or self.m_x < 1 or self.m_v < 1:
            raise ValueError("all PPM parameters must be >= 1")

    @property
    def m(self) -> int:
        return self.m_x * self.m_v

    @property
    def n(self) -> int:
        return self.sub_blocks * self.m


@dataclass(frozen=True)
class SecurityInputs:
    """Measured/derived quantities entering the min-entropy machinery."""

    f_meas: float
    f01: float
    delta0: float
    delta1: float
    d_probe_bits: float = 0.0

    def __post_init__(self):
        for name in ("f_meas", "f01"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        for name in ("delta0", "delta1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def delta(self) -> float:
        return self.delta0 + self.delta1


@dataclass(frozen=True)
class CovertnessBudget:
    """Slack allocation lambda1 + lambda2 + eps_IR + delta_PA."""

    lambda2: float
    delta_pa: float
    eps_ir: float
    target_lambda1: float | None = None

    def __post_init__(self):
        for name in ("lambda2", "delta_pa", "eps_ir"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name}={v} outside (0, 1)")


@dataclass(frozen=True)
class NoGoInputs:
    """Hypotheses of the full-adversary-control key-length ceiling."""

    eps: float
    delta: float
    mu: float
    log_dim_c: float

    def __post_init__(self):
        for name in ("eps", "delta", "mu"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name}={v} outside [0, 1)")
        if self.log_dim_c < 0:
            raise ValueError("log_dim_c must be >= 0")


@dataclass(frozen=True)
class EtaResult:
    """Largest recovery slack certified by the fidelity condition."""

    eta: float
    no_slack: bool


@dataclass(frozen=True)
class RateReport:
    """All bound components for one parameter point, a pure function of inputs."""

    lambda1: float
    log_h_bits: float
    hmin_bits: float
    leak_ir_bits: float
    pa_penalty_bits: float
    net_key_bits: float
    rate_per_symbol: float
    eta: float
    no_slack: bool
    f_meas: float
    f01: float
    delta0: float
    delta1: float
    chi2: float
    chi2_reverse: float
    ln_one_plus_chi2: float
    d_probe_bits: float
    d_bob_bits: float
    sign_convention: str
    log_base: str
    inputs: dict = field(default_factory=dict)

    def as_flat_record(self) -> dict:
        """Stable field names for CSV rows."""
        return {
            "lambda1": self.lambda1,
            "log_h_bits": self.log_h_bits,
            "hmin_bits": self.hmin_bits,
            "leak_ir_bits": self.leak_ir_bits,
            "pa_penalty_bits": self.pa_penalty_bits,
            "net_key_bits": self.net_key_bits,
            "rate_per_symbol": self.rate_per_symbol,
            "eta": self.eta,
            "f_meas": self.f_meas,
        }


def ppm_position(x: int, v: int, cfg: PPMConfig) -> int:
    """Bijection (x, v) -> (x - 1) m_v + v from index pairs onto [1, m]."""
    if not 1 <= x <= cfg.m_x:
        raise ValueError(f"x={x} outside [1, {cfg.m_x}]")
    if not 1 <= v <= cfg.m_v:
        raise ValueError(f"v={v} outside [1, {cfg.m_v}]")
    return (x - 1) * cfg.m_v + v


def ppm_subblock_ket(z: int, cfg: PPMConfig, idle: Ket, nonidle: Ket) -> Ket:
    """Product ket with the non-idle state in position z of an m-mode sub-block."""
    if not 1 <= z <= cfg.m:
        raise ValueError(f"position {z} outside [1, {cfg.m}]")
    factors = [idle] * (z - 1) + [nonidle] + [idle] * (cfg.m - z)
    return tensor_kets(*factors)


def _check_desk_scale(cfg: PPMConfig, cutoff: int):
    # compare in logs: n can be astronomically large in formula-only configs
    if cutoff > 1 and cfg.n * math.log(cutoff) > math.log(DESK_SCALE_DIM) * (1 + 1e-12):
        raise ValueError(
            f"state assembly dimension {cutoff}^{cfg.n} exceeds desk-scale "
            f"bound {DESK_SCALE_DIM}"
        )


def probe_output_pair(
    ch: LossyThermalChannel, idle: Ket, nonidle: Ket, allow_truncation: bool = False
) -> tuple[DensityOperator, DensityOperator]:
    """(E(idle), E(nonidle)) single-mode probe outputs."""
    return (
        ch.apply(idle.density(), allow_truncation=allow_truncation),
        ch.apply(nonidle.density(), allow_truncation=allow_truncation),
    )


def subblock_position_states(
    cfg: PPMConfig, rho0: DensityOperator, rho1: DensityOperator
) -> list[DensityOperator]:
    """Probe-output sub-block states, one per pulse position, as m-mode products."""
    states = []
    for z in range(1, cfg.m + 1):
        factors = [rho0] * (z - 1) + [rho1] + [rho0] * (cfg.m - z)
        states.append(tensor(*factors))
    return states


def coordination_states(
    cfg: PPMConfig, rho0: DensityOperator, rho1: DensityOperator
) -> list[DensityOperator]:
    """Per-coordination-symbol states: uniform mixture over the key index x."""
    position_states = subblock_position_states(cfg, rho0, rho1)
    out = []
    for v in range(1, cfg.m_v + 1):
        acc = sum(
            position_states[ppm_position(x, v, cfg) - 1].matrix
            for x in range(1, cfg.m_x + 1)
        )
        out.append(
            DensityOperator(acc / cfg.m_x, position_states[0].cutoffs,
                            position_states[0].truncation_deficit)
        )
    return out


def average_ppm_state(
    cfg: PPMConfig, probe: LossyThermalChannel, idle: Ket, nonidle: Ket,
    allow_truncation: bool = False,
) -> DensityOperator:
    """Uniform probe-output mixture over all (x^l, v^l): the full PPM average."""
    _check_desk_scale(cfg, probe.cutoff)
    rho0, rho1 = probe_output_pair(probe, idle, nonidle, allow_truncation)
    position_states = subblock_position_states(cfg, rho0, rho1)
    sub = sum(s.matrix for s in position_states) / cfg.m
    sub_op = DensityOperator(sub, position_states[0].cutoffs,
                             position_states[0].truncation_deficit)
    return tensor(*([sub_op] * cfg.sub_blocks))


def protocol_state(
    cfg: PPMConfig, probe: LossyThermalChannel, idle: Ket, nonidle: Ket,
    codebook, allow_truncation: bool = False,
) -> DensityOperator:
    """Probe-output state of the coded protocol: x^l uniform, v^l uniform over g."""
    _check_desk_scale(cfg, probe.cutoff)
    rho0, rho1 = probe_output_pair(probe, idle, nonidle, allow_truncation)
    per_v = coordination_states(cfg, rho0, rho1)
    dim = per_v[0].dim ** cfg.sub_blocks
    acc = np.zeros((dim, dim), dtype=complex)
    for r in range(1, codebook.h + 1):
        word = codebook.g(r)
        if len(word) != cfg.sub_blocks:
            raise ValueError("codeword length does not match the sub-block count")
        factors = [per_v[s] for s in word]  # symbols are 0-based v-1
        acc += tensor(*factors).matrix
    acc /= codebook.h
    cutoffs = per_v[0].cutoffs * cfg.sub_blocks
    deficit = per_v[0].truncation_deficit * cfg.sub_blocks
    return DensityOperator(acc, cutoffs, deficit)


def covertness_lambda1(cfg: PPMConfig, chi2: float) -> float:
    """lambda1 = sqrt(l chi2 / (2 m))."""
    if chi2 < 0:
        raise ValueError("chi2 must be >= 0")
    return math.sqrt(cfg.sub_blocks * chi2 / (2.0 * cfg.m))


def covertness_log_h(cfg: PPMConfig, chi2: float, lambda2: float, nats: bool = False) -> float:
    """Coordination cost log h = (l/m_x) chi2 + sqrt(l) (2 log m_v + 3) sqrt(log(4/lambda2) + 1)."""
    if not 0.0 < lambda2 < 1.0:
        raise ValueError("lambda2 must be in (0, 1)")
    log = math.log if nats else math.log2
    first = cfg.sub_blocks / cfg.m_x * chi2
    second = math.sqrt(cfg.sub_blocks) * (2.0 * log(cfg.m_v) + 3.0) * math.sqrt(
        log(4.0 / lambda2) + 1.0
    )
    return first + second


def _eta_condition(eta: float, si: SecurityInputs) -> bool:
    lam = 2.0 * si.delta0 + math.sqrt(
        eta + 4.0 * math.sqrt(eta) * si.delta1 + 4.0 * si.delta1 ** 2
    )
    rhs = (
        aleph(lam, si.f01)
        - 2.0 * math.sqrt(1.0 - si.f01) * si.delta
        - si.delta ** 2
    )
    return si.f_meas <= rhs


def eta_solver(si: SecurityInputs) -> EtaResult:
    """Largest eta in [0, 1) satisfying the fidelity threshold condition.

    The condition right-hand side is strictly decreasing in eta (lambda is
    increasing in eta and aleph decreasing in its first argument), so the
    feasible set is an interval [0, eta_max] and bisection applies.  When
    even eta = 0 fails, returns 0 with the no-slack flag: the bound then
    degrades to plain data processing.
    """
    if si.f01 <= 0.0:
        raise ValueError("f01 must be positive")
    if not _eta_condition(0.0, si):
        return EtaResult(0.0, True)
    lo, hi = 0.0, 1.0
    while hi - lo > ETA_BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _eta_condition(mid, si):
            lo = mid
        else:
            hi = mid
    return EtaResult(lo, False)


def min_entropy_bound(
    cfg: PPMConfig,
    si: SecurityInputs,
    eta: float,
    delta_smooth: float,
    printed_sign: bool = False,
    nats: bool = False,
) -> float:
    """Whole-block smooth min-entropy lower bound, in bits (or nats).

    l (log m_x - D_probe - log(1 - eta)) minus the finite-size term
    sqrt(l) (2 log m_x + 3) sqrt(log(1/delta_smooth) + 1).  ``printed_sign``
    flips the recovery term to the +log(1 - eta) variant of the published
    statement, which contradicts the proof chain and is off by default.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta={eta} outside [0, 1)")
    log = math.log if nats else math.log2
    recovery = log(1.0 - eta)
    per_symbol = log(cfg.m_x) - si.d_probe_bits * (LN2_TO_NATS if nats else 1.0)
    per_symbol += recovery if printed_sign else -recovery
    correction = cfg.sub_blocks * finite_size_term(
        log(cfg.m_x), cfg.sub_blocks, delta_smooth, nats=nats
    )
    return cfg.sub_blocks * per_symbol - correction


def honest_subblock_fidelity(
    probe: LossyThermalChannel,
    honest: LossyThermalChannel,
    idle: Ket,
    nonidle: Ket,
    allow_truncation: bool = False,
) -> float:
    """Bob-side sub-block fidelity F(N(E(nonidle)), N(E(idle))).

    Single-mode evaluation: by fidelity multiplicativity the other m_x - 1
    tensor factors contribute a factor of one.
    """
    rho0, rho1 = probe_output_pair(probe, idle, nonidle, allow_truncation)
    bob0 = honest.apply(rho0, allow_truncation=allow_truncation)
    bob1 = honest.apply(rho1, allow_truncation=allow_truncation)
    return fidelity(bob1, bob0)


def nogo_max_key(ng: NoGoInputs) -> float:
    """Key-length ceiling when the adversary fully controls the channel.

    Returns RHS / (1 - 5 sqrt(mu) - eps - 2 delta) in bits, or +inf when the
    denominator is nonpositive (the bound is vacuous there).
    """
    denom = 1.0 - 5.0 * math.sqrt(ng.mu) - ng.eps - 2.0 * ng.delta
    if denom <= 0.0:
        return math.inf
    root = math.sqrt(ng.mu)
    rhs = (
        2.0 * ng.delta * ng.log_dim_c
        + binary_entropy(root)
        + binary_entropy(min(1.0, ng.eps + root))
        + 2.0 * (1.0 + root) * binary_entropy(root / (1.0 + root))
    )
    return rhs / denom


def probe_log1p_chi2_converged(
    tau: float, nbar: float, alpha: float, rel_tol: float = 1e-8,
    max_cutoff: int = 8192,
) -> float:
    """Converged ln(1 + chi2) between the coherent-pair probe outputs."""
    if tau >= 1.0 and alpha != 0.0:
        return math.inf  # pure-state pair: support violation
    beta = math.sqrt(tau) * alpha
    n_out = (1.0 - tau) * nbar
    rows, converged = displaced_thermal_chi2_table(
        beta, n_out, start=16, step=16, max_cutoff=max_cutoff, rel_tol=rel_tol
    )
    if not converged:
        raise RuntimeError(f"chi2 not converged by cutoff {max_cutoff}")
    return rows[-1][2]


def probe_chi2_converged(
    tau: float, nbar: float, alpha: float, rel_tol: float = 1e-8,
    max_cutoff: int = 8192,
) -> float:
    """Converged chi-squared divergence between the coherent-pair probe outputs."""
    log1p = probe_log1p_chi2_converged(tau, nbar, alpha, rel_tol, max_cutoff)
    return math.expm1(log1p) if log1p <= 700.0 else math.inf


def rate_report(
    cfg: PPMConfig,
    tau_e: float,
    nbar_e: float,
    tau_n: float,
    nbar_n: float,
    alpha: float,
    budget: CovertnessBudget,
    delta_smooth: float = 1e-10,
    reconciliation_efficiency: float = 1.0,
    cutoff: int = 40,
    printed_sign: bool = False,
) -> RateReport:
    """Assemble every bound component for one bosonic parameter point.

    Probe outputs use the displaced-thermal fast path (cross-checked against
    the dilation in tests); the honest channel is applied by exact dilation.
    leak_IR follows the asymptotic model l/f max(0, log2 m_x - D_Bob), with
    the O(1/m_x) term dropped; the per-symbol rate is net / l.
    """
    if not 0.0 < reconciliation_efficiency <= 1.0:
        raise ValueError("reconciliation efficiency must be in (0, 1]")
    idle = vacuum_ket(cutoff)
    nonidle = coherent_ket(alpha, cutoff)
    beta = math.sqrt(tau_e) * alpha
    n_probe = (1.0 - tau_e) * nbar_e
    rho0 = displaced_thermal(0.0, n_probe, cutoff)
    rho1 = displaced_thermal(beta, n_probe, cutoff)
    honest = LossyThermalChannel(tau_n, nbar_n, cutoff)
    bob0 = honest.apply(rho0)
    bob1 = honest.apply(rho1)

    ln1p_chi2 = probe_log1p_chi2_converged(tau_e, nbar_e, alpha)
    chi2 = math.expm1(ln1p_chi2) if ln1p_chi2 <= 700.0 else math.inf
    lam1 = _lambda1_log_safe(cfg, ln1p_chi2)
    log_h = _log_h_log_safe(cfg, ln1p_chi2, budget.lambda2)

    # exact divergences; the honest channel composes to beta_B = sqrt(tau_n) beta,
    # n_B = tau_n n_probe + (1 - tau_n) nbar_n (cross-checked against the
    # dilation in the tests)
    d_probe = displaced_thermal_relative_entropy(beta, n_probe)
    n_bob = tau_n * n_probe + (1.0 - tau_n) * nbar_n
    d_bob = displaced_thermal_relative_entropy(math.sqrt(tau_n) * beta, n_bob)
    f_meas = fidelity(bob1, bob0)
    f01 = fidelity(nonidle.density(), idle.density())
    delta0 = c_distance(idle.density(), rho0)
    delta1 = c_distance(nonidle.density(), rho1)
    si = SecurityInputs(f_meas, f01, delta0, delta1, d_probe)
    eta = eta_solver(si)
    hmin = min_entropy_bound(cfg, si, eta.eta, delta_smooth, printed_sign=printed_sign)
    leak_ir = (
        cfg.sub_blocks
        / reconciliation_efficiency
        * max(0.0, math.log2(cfg.m_x) - d_bob)
    )
    pa_penalty = 2.0 * math.log2(1.0 / budget.delta_pa)
    net = hmin - leak_ir - pa_penalty - log_h
    report = RateReport(
        lambda1=lam1,
        log_h_bits=log_h,
        hmin_bits=hmin,
        leak_ir_bits=leak_ir,
        pa_penalty_bits=pa_penalty,
        net_key_bits=net,
        rate_per_symbol=net / cfg.sub_blocks,
        eta=eta.eta,
        no_slack=eta.no_slack,
        f_meas=f_meas,
        f01=f01,
        delta0=delta0,
        delta1=delta1,
        chi2=chi2,
        chi2_reverse=chi2,
        ln_one_plus_chi2=ln1p_chi2,
        d_probe_bits=d_probe,
        d_bob_bits=d_bob,
        sign_convention="printed(+log2(1-eta))" if printed_sign else "proof(-log2(1-eta))",
        log_base="bits",
        inputs={
            "sub_blocks": cfg.sub_blocks,
            "m_x": cfg.m_x,
            "m_v": cfg.m_v,
            "tau_e": tau_e,
            "nbar_e": nbar_e,
            "tau_n": tau_n,
            "nbar_n": nbar_n,
            "alpha": alpha,
            "lambda2": budget.lambda2,
            "delta_pa": budget.delta_pa,
            "eps_ir": budget.eps_ir,
            "delta_smooth": delta_smooth,
            "reconciliation_efficiency": reconciliation_efficiency,
            "cutoff": cutoff,
        },
    )
    assert report.net_key_bits <= report.hmin_bits + 1e-12
    return report


def _ln_chi2_from_ln1p(ln1p: float) -> float:
    """Natural log of chi2 itself from ln(1 + chi2); -inf at chi2 = 0."""
    if ln1p <= 0.0:
        return -math.inf
    if ln1p > 36.0:  # expm1 indistinguishable from exp at double precision
        return ln1p
    return math.log(math.expm1(ln1p))


def _lambda1_log_safe(cfg: PPMConfig, ln1p_chi2: float) -> float:
    """lambda1 = sqrt(l chi2 / (2m)) via logs; +inf when not representable."""
    ln_chi2 = _ln_chi2_from_ln1p(ln1p_chi2)
    if ln_chi2 == -math.inf:
        return 0.0
    ln_val = 0.5 * (ln_chi2 + math.log(cfg.sub_blocks) - math.log(2 * cfg.m))
    return math.exp(ln_val) if ln_val <= 700.0 else math.inf


def _log_h_log_safe(cfg: PPMConfig, ln1p_chi2: float, lambda2: float) -> float:
    """Coordination cost with the (l/m_x) chi2 term evaluated in the log domain."""
    ln_chi2 = _ln_chi2_from_ln1p(ln1p_chi2)
    if ln_chi2 == -math.inf:
        first = 0.0
    else:
        ln_first = ln_chi2 + math.log(cfg.sub_blocks) - math.log(cfg.m_x)
        first = math.exp(ln_first) if ln_first <= 700.0 else math.inf
    second = math.sqrt(cfg.sub_blocks) * (2.0 * math.log2(cfg.m_v) + 3.0) * math.sqrt(
        math.log2(4.0 / lambda2) + 1.0
    )
    return first + second


def sub_blocks_for_target_lambda1(cfg_m: int, chi2: float, target_lambda1: float) -> int:
    """Block count l = floor(2 m lambda1^2 / chi2) meeting a target lambda1.

    Raises when even a single sub-block overshoots the target.
    """
    if chi2 <= 0:
        raise ValueError("chi2 must be positive to size the block count")
    l = math.floor(2.0 * cfg_m * target_lambda1 ** 2 / chi2)
    if l < 1:
        raise ValueError(
            f"target lambda1={target_lambda1} unreachable: chi2={chi2} forces "
            "lambda1 above the target even at one sub-block"
        )
    return l
