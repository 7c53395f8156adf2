"""End-to-end discrete-log solver: quantum stage, classical rounding and
inversion, and the retry loop.

Two quantum-stage backends exist. The state-vector backend runs the actual
circuit on the simulator; it never reads the instance's hidden exponent.
The analytic backend samples the latent branch index s and then draws the
two counting-register outcomes from the closed-form distributions; it is
distribution-identical to the circuit (the test suites check this exactly)
and scales past the dense-vector qubit cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import phase, statevec
from .bits import BitString
from .numtheory import (
    ProblemInstance,
    ceil_log2,
    ceil_log2_ratio,
    mod_inverse,
    mod_pow,
    to_fraction,
)
from .resources import ResourceReport, communication_qubits, single_node_qubits

MODES = ("statevector", "analytic")


@dataclass(frozen=True)
class ShorConfig:
    """Solver parameters; t is derived, never free."""

    epsilon: Fraction
    t: int
    max_retries: int = 64
    mode: str = "statevector"

    @classmethod
    def for_instance(
        cls,
        instance: ProblemInstance,
        epsilon: Fraction | float | str,
        max_retries: int = 64,
        mode: str = "statevector",
    ) -> "ShorConfig":
        eps = to_fraction(epsilon)
        if not 0 < eps < 1:
            raise ValueError(f"epsilon must be in (0,1), got {eps}")
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if max_retries < 1:
            raise ValueError(f"max_retries must be >= 1, got {max_retries}")
        t = counting_width(instance.r, eps)
        return cls(epsilon=eps, t=t, max_retries=max_retries, mode=mode)


def counting_width(r: int, epsilon: Fraction) -> int:
    """t = ceil(log2 r + 1) + ceil(log2(2 + 1/epsilon)), computed exactly."""
    p, q = epsilon.numerator, epsilon.denominator
    return ceil_log2(2 * r) + ceil_log2_ratio(2 * p + q, p)


@dataclass(frozen=True)
class RunRecord:
    """One end-to-end solve: measurements, rounding, verdict, accounting."""

    m_a: BitString
    m_b: BitString
    mhat_a: int
    mhat_b: int
    g_hat: int | None
    retries: int
    success: bool
    mode: str
    seed: int | None = None
    latent_s: int | None = None
    node_measurements: tuple[tuple[BitString, BitString], ...] | None = None
    comm_qubits: int = 0
    correct_fallback: bool = False
    resources: ResourceReport | None = None

    def to_json_dict(self) -> dict:
        record = {
            "m_a": str(self.m_a),
            "m_b": str(self.m_b),
            "mhat_a": self.mhat_a,
            "mhat_b": self.mhat_b,
            "g_hat": self.g_hat,
            "retries": self.retries,
            "success": self.success,
            "mode": self.mode,
            "seed": self.seed,
        }
        if self.latent_s is not None:
            record["latent_s"] = self.latent_s
        if self.node_measurements is not None:
            record["node_measurements"] = [
                {"m_a": str(ma), "m_b": str(mb)} for ma, mb in self.node_measurements
            ]
            record["comm_qubits"] = self.comm_qubits
            record["correct_fallback"] = self.correct_fallback
        if self.resources is not None:
            record["resources"] = self.resources.to_json_dict()
        return record


def build_stage_state(instance: ProblemInstance, t: int) -> statevec.QuantumState:
    """The pre-measurement state of the two-counting-register circuit."""
    required = 2 * t + instance.L
    if required > statevec.MAX_QUBITS:
        raise statevec.QubitBudgetError(
            f"circuit needs {required} qubits (cap {statevec.MAX_QUBITS}); use analytic mode"
        )
    layout = statevec.RegisterLayout((("a", t), ("b", t), ("work", instance.L)))
    state = statevec.init_basis(layout, {"work": 1})
    state = statevec.hadamard_layer(state, "a")
    state = statevec.hadamard_layer(state, "b")
    state = statevec.controlled_modmul_power(state, "a", "work", instance.a, 0, instance.N)
    state = statevec.controlled_modmul_power(state, "b", "work", instance.b, 0, instance.N)
    state = statevec.inverse_qft(state, "a")
    state = statevec.inverse_qft(state, "b")
    return state


@lru_cache(maxsize=8)
def statevector_joint_distribution(instance: ProblemInstance, t: int) -> np.ndarray:
    """Exact joint law of the two full counting-register measurements.

    Flat index = m_a * 2^t + m_b. Cached so trial batches can reuse the
    pre-measurement amplitudes instead of rebuilding the circuit per draw.
    """
    state = build_stage_state(instance, t)
    joint = statevec.joint_distribution(state, ["a", "b"])
    joint.setflags(write=False)
    return joint


@lru_cache(maxsize=8)
def _statevector_joint_cdf(instance: ProblemInstance, t: int) -> np.ndarray:
    cdf = np.cumsum(statevector_joint_distribution(instance, t))
    cdf.setflags(write=False)
    return cdf


def quantum_stage_statevector(
    instance: ProblemInstance, config: ShorConfig, rng: np.random.Generator
) -> tuple[BitString, BitString]:
    """Run the circuit once and measure both counting registers in full."""
    state = build_stage_state(instance, config.t)
    out_a, state = statevec.measure_register(state, "a", rng)
    out_b, _ = statevec.measure_register(state, "b", rng)
    return out_a.bits, out_b.bits


@lru_cache(maxsize=32)
def eigenphase_dlog(instance: ProblemInstance) -> int:
    """Recover the exponent linking the two multiplication maps from their
    shared eigenvector, without touching the instance's stored answer.

    Applying multiplication-by-b to the s = 1 eigenvector scales it by
    exp(2 pi i g / r); the angle is read off one non-zero component and
    snapped to the nearest multiple of 1/r.
    """
    vec = phase.build_eigenstate(phase.EigenstateSpec(instance, 1))
    permuted = np.zeros_like(vec)
    for x in range(instance.N):
        permuted[(instance.b * x) % instance.N] = vec[x]
    idx = int(np.argmax(np.abs(vec)))
    ratio = permuted[idx] / vec[idx]
    angle = math.atan2(ratio.imag, ratio.real) / (2.0 * math.pi)
    g = round(angle * instance.r) % instance.r
    if abs(angle * instance.r - round(angle * instance.r)) > 1e-6:
        raise AssertionError(f"eigenphase {angle} is not a multiple of 1/{instance.r}")
    return g


def _branch_exponent(instance: ProblemInstance) -> int:
    if instance.hidden_g is not None:
        return instance.hidden_g
    return eigenphase_dlog(instance)


def quantum_stage_analytic(
    instance: ProblemInstance, config: ShorConfig, rng: np.random.Generator
) -> tuple[BitString, BitString, int]:
    """Sample (m_a, m_b) from the closed-form joint law; returns latent s.

    The branch index s is uniform and, conditioned on it, the two
    measurements are independent with phases s/r and (s g mod r)/r. This is
    exactly the joint law of the circuit backend.
    """
    r = instance.r
    s = int(rng.integers(r))
    g = _branch_exponent(instance)
    dist_a = phase.phase_outcome_distribution(Fraction(s, r), config.t)
    dist_b = phase.phase_outcome_distribution(Fraction((s * g) % r, r), config.t)
    m_a = statevec.sample_outcome(rng, dist_a)
    m_b = statevec.sample_outcome(rng, dist_b)
    return BitString(config.t, m_a), BitString(config.t, m_b), s


def round_scaled(m: BitString, r: int) -> int:
    """round(value * r / 2^width) with exact half-up integer rounding."""
    width = m.width
    return (2 * m.value * r + (1 << width)) >> (width + 1)


@dataclass(frozen=True)
class PostprocessResult:
    mhat_a: int
    mhat_b: int
    g_hat: int | None


def postprocess_detail(
    m_a: BitString, m_b: BitString, instance: ProblemInstance
) -> PostprocessResult:
    """Round both measurements, invert, and verify the candidate exponent.

    The zero test on the rounded a-measurement is taken mod r: an outcome
    just below full scale rounds to exactly r, which is the wrap-around
    alias of the unusable s = 0 branch.
    """
    r = instance.r
    mhat_a = round_scaled(m_a, r)
    mhat_b = round_scaled(m_b, r)
    v = mhat_a % r
    if v == 0:
        return PostprocessResult(mhat_a, mhat_b, None)
    g_hat = (mod_inverse(v, r) * mhat_b) % r
    if mod_pow(instance.a, g_hat, instance.N) != instance.b % instance.N:
        return PostprocessResult(mhat_a, mhat_b, None)
    return PostprocessResult(mhat_a, mhat_b, g_hat)


def postprocess(m_a: BitString, m_b: BitString, instance: ProblemInstance) -> int | None:
    return postprocess_detail(m_a, m_b, instance).g_hat


def solve(
    instance: ProblemInstance,
    config: ShorConfig,
    rng: np.random.Generator,
    reuse_state: bool = True,
) -> RunRecord:
    """Quantum stage plus post-processing, retried up to max_retries attempts.

    With reuse_state (the default) the state-vector backend draws outcomes
    from the cached exact measurement law of the pre-measurement state,
    which is distribution-identical to re-running the circuit per attempt.
    """
    latent_s = None
    attempts = 0
    detail = None
    m_a = m_b = None
    success = False
    while attempts < config.max_retries:
        attempts += 1
        if config.mode == "analytic":
            m_a, m_b, latent_s = quantum_stage_analytic(instance, config, rng)
        elif reuse_state:
            cdf = _statevector_joint_cdf(instance, config.t)
            flat = statevec.sample_cdf(rng, cdf)
            m_a = BitString(config.t, flat >> config.t)
            m_b = BitString(config.t, flat & ((1 << config.t) - 1))
        else:
            m_a, m_b = quantum_stage_statevector(instance, config, rng)
        detail = postprocess_detail(m_a, m_b, instance)
        if detail.g_hat is not None:
            success = True
            break
    simulated = 2 * config.t + instance.L if config.mode == "statevector" else 0
    report = ResourceReport(
        qubits_single_node_alg2=single_node_qubits(instance.r, instance.L, config.epsilon),
        qubits_per_node_alg4=None,
        comm_qubits=communication_qubits(1, instance.L),
        simulated_qubits_actual=simulated,
    )
    assert detail is not None and m_a is not None and m_b is not None
    return RunRecord(
        m_a=m_a,
        m_b=m_b,
        mhat_a=detail.mhat_a,
        mhat_b=detail.mhat_b,
        g_hat=detail.g_hat,
        retries=attempts - 1,
        success=success,
        mode=config.mode,
        latent_s=latent_s,
        resources=report,
    )


def analytic_joint_distribution(instance: ProblemInstance, t: int) -> np.ndarray:
    """Closed-form joint law of (m_a, m_b): the branch-averaged product.

    Flat index = m_a * 2^t + m_b, matching the state-vector joint.
    """
    r = instance.r
    g = _branch_exponent(instance)
    size = 1 << t
    joint = np.zeros(size * size)
    for s in range(r):
        dist_a = phase.phase_outcome_distribution(Fraction(s, r), t)
        dist_b = phase.phase_outcome_distribution(Fraction((s * g) % r, r), t)
        joint += np.kron(dist_a, dist_b)
    return joint / r


def single_shot_success_mass(
    instance: ProblemInstance, epsilon: Fraction | float | str
) -> float:
    """Exact one-attempt success probability, by deterministic summation.

    For each branch s the rounded values are classified mod r, and the
    success of every (class_a, class_b) pair is decided by actually
    verifying the exponent it would produce, so no assumption about which
    outcomes succeed leaks in.
    """
    eps = to_fraction(epsilon)
    t = counting_width(instance.r, eps)
    r = instance.r
    g = _branch_exponent(instance)
    size = 1 << t
    outcomes = np.arange(size, dtype=np.int64)
    classes = ((2 * outcomes * r + size) >> (t + 1)) % r

    success_table = np.zeros((r, r), dtype=bool)
    for va in range(1, r):
        inv = mod_inverse(va, r)
        for vb in range(r):
            g_hat = (inv * vb) % r
            success_table[va, vb] = mod_pow(instance.a, g_hat, instance.N) == instance.b

    total = 0.0
    for s in range(r):
        dist_a = phase.phase_outcome_distribution(Fraction(s, r), t)
        dist_b = phase.phase_outcome_distribution(Fraction((s * g) % r, r), t)
        mass_a = np.bincount(classes, weights=dist_a, minlength=r)
        mass_b = np.bincount(classes, weights=dist_b, minlength=r)
        total += float(mass_a @ success_table @ mass_b)
    return total / r
