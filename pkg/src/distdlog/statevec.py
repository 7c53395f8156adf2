"""Dense complex state-vector simulator over named, fixed-width registers.

Basis convention: registers appear in declaration order, most significant
first, and within a register the first qubit is the most significant bit.
All index arithmetic follows from that single rule, so marginals and
permutations reduce to reshapes and integer shifts.

Operations are pure: each returns a fresh QuantumState and re-checks the
unit-norm invariant. A state is never mutated after construction, which
makes independent trials safe to run concurrently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import IO, Iterable, Mapping

import numpy as np

from .bits import BitString

MAX_QUBITS = 24
_NORM_TOL = 1e-12


class LayoutError(ValueError):
    pass


class QubitBudgetError(LayoutError):
    """The requested register layout exceeds the dense-vector qubit cap."""


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered (name, width) register declarations."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "registers", tuple((str(n), int(w)) for n, w in self.registers))
        names = [n for n, _ in self.registers]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate register names in {names}")
        if any(w < 1 for _, w in self.registers):
            raise LayoutError("register widths must be >= 1")
        if self.total_width > MAX_QUBITS:
            raise QubitBudgetError(
                f"layout needs {self.total_width} qubits, cap is {MAX_QUBITS}"
            )

    @property
    def total_width(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    def width_of(self, name: str) -> int:
        for n, w in self.registers:
            if n == name:
                return w
        raise LayoutError(f"unknown register {name!r}")

    def start_of(self, name: str) -> int:
        """Number of qubits preceding the register (from the MSB side)."""
        offset = 0
        for n, w in self.registers:
            if n == name:
                return offset
            offset += w
        raise LayoutError(f"unknown register {name!r}")

    def right_shift_of(self, name: str) -> int:
        """Bit shift that brings the register value to the low bits of an index."""
        return self.total_width - self.start_of(name) - self.width_of(name)

    def axis_shape(self) -> tuple[int, ...]:
        return tuple(1 << w for _, w in self.registers)


class QuantumState:
    """An amplitude vector over a register layout."""

    __slots__ = ("layout", "amps")

    def __init__(self, layout: RegisterLayout, amps: np.ndarray, check: bool = True):
        amps = np.asarray(amps, dtype=np.complex128)
        expected = 1 << layout.total_width
        if amps.shape != (expected,):
            raise LayoutError(f"amplitude vector has shape {amps.shape}, expected ({expected},)")
        if check:
            norm2 = float(np.sum(amps.real**2 + amps.imag**2))
            if abs(norm2 - 1.0) > _NORM_TOL:
                raise LayoutError(f"state norm**2 = {norm2!r} drifted beyond {_NORM_TOL}")
        self.layout = layout
        self.amps = amps

    def probabilities(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2

    def tensor(self) -> np.ndarray:
        """The amplitude vector reshaped to one axis per register."""
        return self.amps.reshape(self.layout.axis_shape())

    def dump_csv(self, stream: IO[str]) -> None:
        """Debug dump as (basis index, re, im) rows; not a stable format."""
        writer = csv.writer(stream)
        writer.writerow(["basis_index", "re", "im"])
        for i, amp in enumerate(self.amps):
            writer.writerow([i, repr(float(amp.real)), repr(float(amp.imag))])


def init_basis(layout: RegisterLayout, assignments: Mapping[str, int] | None = None) -> QuantumState:
    """The computational basis state with the given register values.

    Unassigned registers default to 0.
    """
    assignments = dict(assignments or {})
    index = 0
    for name, value in assignments.items():
        width = layout.width_of(name)
        if not 0 <= value < (1 << width):
            raise LayoutError(f"value {value} does not fit register {name!r} of width {width}")
        index |= value << layout.right_shift_of(name)
    amps = np.zeros(1 << layout.total_width, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(layout, amps)


def init_product(
    layout: RegisterLayout, factors: Mapping[str, "int | np.ndarray"] | None = None
) -> QuantumState:
    """Tensor-product state from per-register basis values or amplitude vectors.

    Vector factors must be unit norm to 1e-9; they are renormalised exactly
    before the product is formed.
    """
    factors = dict(factors or {})
    parts = []
    for name, width in layout.registers:
        factor = factors.pop(name, 0)
        if isinstance(factor, (int, np.integer)):
            if not 0 <= factor < (1 << width):
                raise LayoutError(f"value {factor} does not fit register {name!r}")
            vec = np.zeros(1 << width, dtype=np.complex128)
            vec[factor] = 1.0
        else:
            vec = np.asarray(factor, dtype=np.complex128)
            if vec.shape != (1 << width,):
                raise LayoutError(f"factor for {name!r} has shape {vec.shape}")
            norm = math.sqrt(float(np.sum(vec.real**2 + vec.imag**2)))
            if abs(norm - 1.0) > 1e-9:
                raise LayoutError(f"factor for {name!r} has norm {norm}")
            vec = vec / norm
        parts.append(vec)
    if factors:
        raise LayoutError(f"unknown registers in factors: {sorted(factors)}")
    amps = reduce(np.kron, parts)
    return QuantumState(layout, amps)


def hadamard_layer(state: QuantumState, register: str) -> QuantumState:
    """Apply a Hadamard to every qubit of the register."""
    layout = state.layout
    n = layout.total_width
    start = layout.start_of(register)
    amps = state.amps.copy()
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for q in range(start, start + layout.width_of(register)):
        view = amps.reshape(1 << q, 2, 1 << (n - q - 1))
        top = view[:, 0, :].copy()
        bottom = view[:, 1, :].copy()
        view[:, 0, :] = (top + bottom) * inv_sqrt2
        view[:, 1, :] = (top - bottom) * inv_sqrt2
    return QuantumState(layout, amps)


@lru_cache(maxsize=64)
def _modmul_destinations(
    registers: tuple[tuple[str, int], ...],
    control: str,
    work: str,
    base: int,
    power_exponent: int,
    N: int,
) -> np.ndarray:
    """Destination index per basis index for a controlled modular multiply.

    Basis |j>_control |x>_work maps to |j>|c^j * x mod N> with
    c = base^(2^power_exponent) mod N; work values >= N are fixed points so
    the map stays a permutation of the whole index space.
    """
    layout = RegisterLayout(registers)
    t = layout.width_of(control)
    w = layout.width_of(work)
    if (1 << w) < N:
        raise LayoutError(f"work register of width {w} cannot hold residues mod {N}")
    c = pow(base, 1 << power_exponent, N)
    powers = np.empty(1 << t, dtype=np.int64)
    acc = 1
    for j in range(1 << t):
        powers[j] = acc
        acc = (acc * c) % N
    xs = np.arange(1 << w, dtype=np.int64)
    in_range = xs < N
    table = np.where(in_range[None, :], (powers[:, None] * xs[None, :]) % N, xs[None, :])
    idx = np.arange(1 << layout.total_width, dtype=np.int64)
    cshift = layout.right_shift_of(control)
    wshift = layout.right_shift_of(work)
    j = (idx >> cshift) & ((1 << t) - 1)
    x = (idx >> wshift) & ((1 << w) - 1)
    dest = idx + ((table[j, x] - x) << wshift)
    dest.setflags(write=False)
    return dest


def controlled_modmul_power(
    state: QuantumState,
    control: str,
    work: str,
    base: int,
    power_exponent: int,
    N: int,
) -> QuantumState:
    """Controlled modular multiplication: |j>|x> -> |j> |c^j x mod N>.

    The exponent j is the full value of the control register and
    c = base^(2^power_exponent) mod N. Registers not named are untouched,
    which is what makes the same call serve both the two-register and the
    bystander-register controlled forms.
    """
    if N < 2:
        raise ValueError(f"modulus must be >= 2, got {N}")
    if math.gcd(base, N) != 1:
        raise ValueError(
            f"base {base} is not a unit mod {N}: multiplication is not a permutation"
        )
    if power_exponent < 0:
        raise ValueError(f"power exponent must be >= 0, got {power_exponent}")
    dest = _modmul_destinations(
        state.layout.registers, control, work, base % N, power_exponent, N
    )
    amps = np.empty_like(state.amps)
    amps[dest] = state.amps
    return QuantumState(state.layout, amps)


def inverse_qft(state: QuantumState, register: str) -> QuantumState:
    """Exact inverse Fourier transform on one register's factor.

    Implemented as a radix-2 butterfly (FFT) along the register axis; this
    is numerically exact to ~1e-15 and much faster than a dense matrix.
    """
    return _fourier(state, register, inverse=True)


def forward_qft(state: QuantumState, register: str) -> QuantumState:
    return _fourier(state, register, inverse=False)


def _fourier(state: QuantumState, register: str, inverse: bool) -> QuantumState:
    layout = state.layout
    start = layout.start_of(register)
    width = layout.width_of(register)
    dim = 1 << width
    cube = state.amps.reshape(1 << start, dim, -1)
    if inverse:
        out = np.fft.fft(cube, axis=1) / math.sqrt(dim)
    else:
        out = np.fft.ifft(cube, axis=1) * math.sqrt(dim)
    return QuantumState(layout, np.ascontiguousarray(out.reshape(-1)))


@dataclass(frozen=True)
class MeasurementOutcome:
    bits: BitString
    probability: float


def marginal_distribution(state: QuantumState, register: str, prefix_width: int) -> np.ndarray:
    """Exact outcome distribution of the first prefix_width qubits of a register."""
    layout = state.layout
    width = layout.width_of(register)
    if not 1 <= prefix_width <= width:
        raise LayoutError(f"prefix width {prefix_width} outside 1..{width}")
    start = layout.start_of(register)
    cube = state.probabilities().reshape(1 << start, 1 << prefix_width, -1)
    return cube.sum(axis=(0, 2))


def joint_distribution(state: QuantumState, registers: Iterable[str]) -> np.ndarray:
    """Exact joint distribution of whole registers, in the order given.

    The result is a flat vector indexed by the concatenated register values
    (first name most significant).
    """
    names = list(registers)
    layout = state.layout
    order = [layout.names.index(n) for n in names]
    rest = [i for i in range(len(layout.names)) if i not in order]
    probs = state.probabilities().reshape(layout.axis_shape())
    moved = np.transpose(probs, order + rest)
    selected = 1
    for n in names:
        selected <<= layout.width_of(n)
    return moved.reshape(selected, -1).sum(axis=1)


def sample_outcome(rng: np.random.Generator, probabilities: np.ndarray) -> int:
    """Draw an index from a probability vector (normalising float drift)."""
    cdf = np.cumsum(probabilities)
    return sample_cdf(rng, cdf)


def sample_cdf(rng: np.random.Generator, cdf: np.ndarray) -> int:
    total = cdf[-1]
    u = rng.random() * total
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


def measure_prefix(
    state: QuantumState, register: str, prefix_width: int, rng: np.random.Generator
) -> tuple[MeasurementOutcome, QuantumState]:
    """Measure the first prefix_width qubits of a register.

    Returns the outcome with its pre-measurement probability and the
    collapsed, renormalised state.
    """
    layout = state.layout
    marginal = marginal_distribution(state, register, prefix_width)
    outcome = sample_outcome(rng, marginal)
    p = float(marginal[outcome])
    if p < 1e-15:
        raise LayoutError(f"sampled outcome {outcome} has no support (p = {p!r})")
    start = layout.start_of(register)
    cube = state.amps.reshape(1 << start, 1 << prefix_width, -1)
    collapsed = np.zeros_like(cube)
    collapsed[:, outcome, :] = cube[:, outcome, :] / math.sqrt(p)
    new_state = QuantumState(layout, collapsed.reshape(-1))
    return MeasurementOutcome(BitString(prefix_width, outcome), p), new_state


def measure_register(
    state: QuantumState, register: str, rng: np.random.Generator
) -> tuple[MeasurementOutcome, QuantumState]:
    """Measure every qubit of a register."""
    return measure_prefix(state, register, state.layout.width_of(register), rng)


def register_vector(state: QuantumState, target: str, fixed: Mapping[str, int]) -> np.ndarray:
    """Amplitude vector of one register once every other register is fixed
    to a basis value (e.g. after those registers were fully measured).

    The extracted vector is renormalised; its mass before normalisation must
    be essentially all of the state.
    """
    layout = state.layout
    expected = set(layout.names) - {target}
    if set(fixed) != expected:
        raise LayoutError(f"fixed registers {sorted(fixed)} != required {sorted(expected)}")
    indexer: list[object] = []
    for name, width in layout.registers:
        if name == target:
            indexer.append(slice(None))
        else:
            value = fixed[name]
            if not 0 <= value < (1 << width):
                raise LayoutError(f"value {value} does not fit register {name!r}")
            indexer.append(value)
    vec = np.ascontiguousarray(state.tensor()[tuple(indexer)])
    norm2 = float(np.sum(vec.real**2 + vec.imag**2))
    if norm2 < 1.0 - 1e-9:
        raise LayoutError(f"fixed assignment carries only mass {norm2}, state is not collapsed")
    return vec / math.sqrt(norm2)
