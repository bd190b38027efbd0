"""Bipartite quantum-correlation detection via conditional-state quantumness.

A bipartite state rho_AB carries quantum correlations detectable on the B
side when two local measurement outcomes on A steer B into noncommuting
conditional states: Q(rho_B|1, rho_B|2) > 0 for some pair of measurement
elements on A. States of the classical-on-B form

    sum_i p_i rho_i (x) |b_i><b_i|      ({|b_i>} orthonormal)

never trigger the witness: every conditional B state is diagonal in the
{|b_i>} basis, so all pairs commute. Product states are the special case
with one term.

The witness value for a given element pair is computed by
:func:`correlation_witness`; :func:`maximize_witness` searches rank-1
projective pairs on A (coarse scan plus simplex refinement) and reports a
verdict. Two small exactly solvable states, :func:`epr_state` and
:func:`separable_example_state`, have closed-form witness values under the
real projector family of :func:`projector_pair`:

    EPR pair:          Q = sin^2(2 phi), maximal value 1 at phi = pi/4
    separable mixture: Q = sin^2(2 phi) / 16, maximal value 1/16

The second state is separable yet quantum correlated, which is the point
of a discord-style detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .qcore import (
    ATOL_STRUCT,
    DensityMatrix,
    LayoutError,
    as_operator,
    pure_state,
    tensor_product,
)
from .witness import quantumness

__all__ = [
    "PROB_FLOOR",
    "BipartiteState",
    "PovmElement",
    "MeasurementAngles",
    "ConditionalState",
    "CqSpec",
    "OptimizerConfig",
    "DiscordReport",
    "ZeroProbabilityError",
    "conditional_state",
    "projector_pair",
    "epr_state",
    "separable_example_state",
    "build_cq_state",
    "correlation_witness",
    "maximize_witness",
]

# Conditioning on an outcome at or below this probability is undefined.
PROB_FLOOR = 1e-12


class ZeroProbabilityError(ValueError):
    """Conditioning on a measurement outcome of (numerically) zero probability."""

    def __init__(self, which: str, probability: float):
        self.which = which
        self.probability = probability
        super().__init__(
            f"{which} measurement element has outcome probability "
            f"{probability:.3e} <= {PROB_FLOOR}; conditional state undefined"
        )


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density matrix on A (x) B with the split recorded explicitly.

    Row/column index factors as (a, b) in C order, matching
    :func:`qcore.tensor_product`.
    """

    state: DensityMatrix
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise LayoutError("subsystem dimensions must be positive")
        if self.dim_a * self.dim_b != self.state.dim:
            raise LayoutError(
                f"dim_a * dim_b = {self.dim_a * self.dim_b} does not match "
                f"total dim {self.state.dim}"
            )


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Measurement element on subsystem A: Hermitian, positive semidefinite."""

    op: np.ndarray

    def __post_init__(self):
        m = as_operator(self.op)
        if np.max(np.abs(m - m.conj().T)) > ATOL_STRUCT:
            raise ValueError("measurement element must be Hermitian within 1e-10")
        low = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0)[0])
        if low < -ATOL_STRUCT:
            raise ValueError(
                f"measurement element must be PSD within 1e-10 (min eigenvalue {low})"
            )
        object.__setattr__(self, "op", m)

    @property
    def dim(self) -> int:
        return self.op.shape[0]


@dataclass(frozen=True)
class MeasurementAngles:
    """Angles (theta, phi) of the real-amplitude projector family.

    theta orients the first vector, phi is the angle between the two
    vectors. Periodic; no range restriction.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("angles must be finite")


@dataclass(frozen=True, eq=False)
class ConditionalState:
    """B state conditioned on an A outcome, with the outcome probability.

    ``state`` is None exactly when the probability is at or below
    PROB_FLOOR and the conditional state is undefined.
    """

    probability: float
    state: DensityMatrix | None

    def __post_init__(self):
        p = float(self.probability)
        if p < -ATOL_STRUCT or p > 1.0 + ATOL_STRUCT:
            raise ValueError(f"outcome probability {p} outside [0, 1]")
        p = min(max(p, 0.0), 1.0)
        object.__setattr__(self, "probability", p)
        if (self.state is None) != (p <= PROB_FLOOR):
            raise ValueError(
                "state must be present iff probability exceeds the floor"
            )


@dataclass(frozen=True, eq=False)
class CqSpec:
    """Ingredients of a classical-on-B state sum_i p_i rho_i (x) |b_i><b_i|.

    probs: mixture weights, nonnegative, summing to 1 within 1e-10.
    a_states: the A-side states rho_i, one per term, equal dims.
    b_basis: pairwise-orthonormal kets of B, one per term.
    """

    probs: tuple[float, ...]
    a_states: tuple[DensityMatrix, ...]
    b_basis: tuple[np.ndarray, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        basis = tuple(
            np.array(b, dtype=np.complex128).reshape(-1) for b in self.b_basis
        )
        for b in basis:
            b.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "a_states", tuple(self.a_states))
        object.__setattr__(self, "b_basis", basis)
        n = len(probs)
        if n == 0 or len(self.a_states) != n or len(basis) != n:
            raise ValueError("probs, a_states and b_basis must have equal nonzero length")
        if min(probs) < -ATOL_STRUCT or abs(sum(probs) - 1.0) > ATOL_STRUCT:
            raise ValueError("probs must be nonnegative and sum to 1 within 1e-10")
        if len({s.dim for s in self.a_states}) != 1:
            raise LayoutError("a_states must share one dimension")
        dim_b = len(basis[0])
        if any(len(b) != dim_b for b in basis):
            raise LayoutError("b_basis kets must share one dimension")
        if n > dim_b:
            raise LayoutError(f"{n} orthonormal kets cannot fit in dim {dim_b}")
        gram = np.array([[bi.conj() @ bj for bj in basis] for bi in basis])
        if np.max(np.abs(gram - np.eye(n))) > ATOL_STRUCT:
            raise ValueError("b_basis must be orthonormal within 1e-10")


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings for :func:`maximize_witness`.

    ``max_evals`` budgets the refinement stage (split across starts); the
    scan stage is governed by ``grid_points`` per parameter axis, falling
    back to ``scan_cap`` seeded random points when the full grid would
    exceed the cap. ``threshold`` separates the two verdicts.
    """

    grid_points: int = 12
    starts: int = 5
    tol: float = 1e-10
    max_evals: int = 2000
    seed: int = 0
    threshold: float = 1e-8
    scan_cap: int = 50000

    def __post_init__(self):
        if self.grid_points < 2 or self.starts < 1 or self.max_evals < 1:
            raise ValueError("grid_points >= 2, starts >= 1, max_evals >= 1 required")
        if self.tol <= 0.0 or self.threshold <= 0.0 or self.scan_cap < 1:
            raise ValueError("tol, threshold and scan_cap must be positive")


@dataclass(frozen=True, eq=False)
class DiscordReport:
    """Outcome of a witness maximization.

    best_params is the winning parameter vector of the search family;
    best_kets are the corresponding measurement vectors on A. trace lists
    (parameters, q) for the scan optimum and each refinement start's
    optimum, in deterministic order. best_q never exceeds the largest
    objective value actually evaluated.
    """

    best_q: float
    best_params: tuple[float, ...]
    best_kets: tuple[np.ndarray, np.ndarray]
    evaluations: int
    trace: tuple[tuple[tuple[float, ...], float], ...]
    verdict: str
    threshold: float = field(repr=False, default=1e-8)

    def __post_init__(self):
        if self.best_q < 0.0:
            raise ValueError("best_q must be nonnegative")
        if self.verdict not in ("quantum_correlated", "no_violation_found"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        expected = (
            "quantum_correlated" if self.best_q > self.threshold else "no_violation_found"
        )
        if self.verdict != expected:
            raise ValueError("verdict inconsistent with best_q and threshold")
        for k in self.best_kets:
            k.setflags(write=False)


def conditional_state(rho: BipartiteState, e: PovmElement) -> ConditionalState:
    """B state after measuring element ``e`` on A: Tr_A[(E (x) I) rho] / p.

    p = Tr[(E (x) I) rho]. At or below PROB_FLOOR the conditional state is
    undefined and the result carries ``state=None``.
    """
    if e.dim != rho.dim_a:
        raise LayoutError(f"element dim {e.dim} does not match dim_a {rho.dim_a}")
    da, db = rho.dim_a, rho.dim_b
    rho4 = rho.state.matrix.reshape(da, db, da, db)
    reduced = np.einsum("ab,bjak->jk", e.op, rho4)
    p = float(np.trace(reduced).real)
    if p <= PROB_FLOOR:
        return ConditionalState(probability=max(p, 0.0), state=None)
    return ConditionalState(probability=p, state=DensityMatrix(reduced / p))


def projector_pair(angles: MeasurementAngles) -> tuple[PovmElement, PovmElement]:
    """Rank-1 qubit projectors onto the real-amplitude vector family.

    psi1 = cos(theta)|0> + sin(theta)|1>,
    psi1_perp = sin(theta)|0> - cos(theta)|1>,
    psi2 = cos(phi) psi1 + sin(phi) psi1_perp.

    phi = 0 collapses the pair to twice the same projector.
    """
    psi1 = np.array([math.cos(angles.theta), math.sin(angles.theta)])
    perp = np.array([math.sin(angles.theta), -math.cos(angles.theta)])
    psi2 = math.cos(angles.phi) * psi1 + math.sin(angles.phi) * perp
    return PovmElement(np.outer(psi1, psi1)), PovmElement(np.outer(psi2, psi2))


def epr_state() -> BipartiteState:
    """Maximally entangled two-qubit state (|00> + |11>) / sqrt(2)."""
    ket = np.zeros(4)
    ket[0] = ket[3] = 1.0 / math.sqrt(2.0)
    return BipartiteState(pure_state(ket), 2, 2)


def separable_example_state() -> BipartiteState:
    """Equal mixture of |0>|+>, |1>|->, |+>|1>, |->|0> (products of qubits).

    Separable by construction, yet the conditional-state witness reaches
    1/16 on it: a zero-entanglement state with quantum correlations.
    """
    zero = np.array([1.0, 0.0])
    one = np.array([0.0, 1.0])
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    terms = ((zero, plus), (one, minus), (plus, one), (minus, zero))
    total = np.zeros((4, 4), dtype=np.complex128)
    for a, b in terms:
        total += 0.25 * tensor_product(np.outer(a, a.conj()), np.outer(b, b.conj()))
    return BipartiteState(DensityMatrix(total), 2, 2)


def build_cq_state(spec: CqSpec) -> BipartiteState:
    """Assemble sum_i p_i rho_i (x) |b_i><b_i| from a validated spec.

    Under any measurement on A the conditional B states of the result are
    diagonal in ``b_basis``, hence pairwise commuting: the witness stays
    at zero for every element pair.
    """
    da = spec.a_states[0].dim
    db = len(spec.b_basis[0])
    total = np.zeros((da * db, da * db), dtype=np.complex128)
    for p, rho_i, ket in zip(spec.probs, spec.a_states, spec.b_basis):
        total += p * tensor_product(rho_i.matrix, np.outer(ket, ket.conj()))
    return BipartiteState(DensityMatrix(total), da, db)


def correlation_witness(
    rho: BipartiteState, e1: PovmElement, e2: PovmElement
) -> float:
    """Quantumness of the two conditional B states steered by e1 and e2.

    Symmetric in (e1, e2); zero when e1 = e2. Conditioning on an outcome
    with probability at or below PROB_FLOOR raises ZeroProbabilityError.
    """
    cond1 = conditional_state(rho, e1)
    if cond1.state is None:
        raise ZeroProbabilityError("first", cond1.probability)
    cond2 = conditional_state(rho, e2)
    if cond2.state is None:
        raise ZeroProbabilityError("second", cond2.probability)
    return quantumness(cond1.state, cond2.state).q_value


def _qubit_kets(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pair of qubit kets from (theta, beta1, phi, beta2).

    The real family of :func:`projector_pair` extended with one azimuthal
    phase per vector, covering the full Bloch sphere for each ket. beta1 =
    beta2 = 0 reduces to the real family.
    """
    theta, beta1, phi, beta2 = (float(t) for t in x)
    e1 = complex(math.cos(beta1), math.sin(beta1))
    psi1 = np.array([math.cos(theta), e1 * math.sin(theta)], dtype=np.complex128)
    perp = np.array([math.sin(theta), -e1 * math.cos(theta)], dtype=np.complex128)
    e2 = complex(math.cos(beta2), math.sin(beta2))
    psi2 = math.cos(phi) * psi1 + e2 * math.sin(phi) * perp
    return psi1, psi2


def _hyperspherical_ket(params: np.ndarray, dim: int) -> np.ndarray:
    """Unit ket in C^dim from dim-1 polar angles and dim-1 phases.

    Component 0 is real and nonnegative for polar angles in [0, pi/2], so
    every ray is reachable up to global phase.
    """
    polars = params[: dim - 1]
    amps = np.empty(dim)
    running = 1.0
    for k, chi in enumerate(polars):
        amps[k] = running * math.cos(chi)
        running *= math.sin(chi)
    amps[dim - 1] = running
    ket = amps.astype(np.complex128)
    ket[1:] *= np.exp(1j * np.asarray(params[dim - 1 :], dtype=np.float64))
    return ket


def _scan_points(axes_span, config: OptimizerConfig) -> np.ndarray:
    """Full product grid when it fits in scan_cap, else seeded random scan.

    axes_span is a (low, high, periodic) triple per parameter: periodic
    axes exclude the right endpoint from the grid.
    """
    g = config.grid_points
    n_axes = len(axes_span)
    if g**n_axes <= config.scan_cap:
        axes = [
            np.linspace(lo, hi, g, endpoint=not periodic)
            for lo, hi, periodic in axes_span
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(config.seed)
    lows = np.array([a[0] for a in axes_span])
    highs = np.array([a[1] for a in axes_span])
    return rng.uniform(lows, highs, size=(config.scan_cap, n_axes))


def maximize_witness(
    rho: BipartiteState, config: OptimizerConfig | None = None
) -> DiscordReport:
    """Maximize the conditional-state witness over rank-1 projectors on A.

    Qubit A searches (theta, beta1, phi, beta2), the real projector family
    with an azimuthal phase per vector; larger A parametrizes each
    measurement ket by polar and phase angles (2 dim_a - 2 parameters per
    ket). Coarse scan, then Nelder-Mead refinement from the best distinct
    scan points, sequentially in start order; deterministic for a given
    config. Zero-probability parameter points score 0 instead of raising.
    """
    if config is None:
        config = OptimizerConfig()
    da, db = rho.dim_a, rho.dim_b
    if da < 2:
        raise LayoutError("measured subsystem must have dim_a >= 2")
    rho4 = rho.state.matrix.reshape(da, db, da, db)

    if da == 2:
        kets_of = _qubit_kets
        axes_span = [
            (0.0, math.pi / 2.0, False),
            (0.0, 2.0 * math.pi, True),
            (0.0, math.pi / 2.0, False),
            (0.0, 2.0 * math.pi, True),
        ]
    else:
        half = 2 * da - 2

        def kets_of(x):
            return (
                _hyperspherical_ket(x[:half], da),
                _hyperspherical_ket(x[half:], da),
            )

        per_ket = [(0.0, math.pi / 2.0, False)] * (da - 1) + [
            (0.0, 2.0 * math.pi, True)
        ] * (da - 1)
        axes_span = per_ket * 2

    evaluations = 0
    best_q = -1.0
    best_x: np.ndarray | None = None

    def objective(x: np.ndarray) -> float:
        nonlocal evaluations, best_q, best_x
        evaluations += 1
        psi1, psi2 = kets_of(x)
        r1 = np.einsum("a,ajck,c->jk", psi1.conj(), rho4, psi1)
        p1 = float(np.trace(r1).real)
        if p1 <= PROB_FLOOR:
            return 0.0
        r2 = np.einsum("a,ajck,c->jk", psi2.conj(), rho4, psi2)
        p2 = float(np.trace(r2).real)
        if p2 <= PROB_FLOOR:
            return 0.0
        prod = (r1 / p1) @ (r2 / p2)
        v1 = float(np.sum(np.abs(prod) ** 2))
        v2 = float(np.einsum("ij,ji", prod, prod).real)
        q = max(4.0 * (v1 - v2), 0.0)
        if q > best_q:
            best_q = q
            best_x = np.array(x, dtype=np.float64)
        return q

    points = _scan_points(axes_span, config)
    values = np.array([objective(p) for p in points])
    trace: list[tuple[tuple[float, ...], float]] = []
    scan_best = int(np.argmax(values))
    trace.append((tuple(points[scan_best]), float(values[scan_best])))

    order = np.argsort(values)[::-1]
    starts: list[np.ndarray] = []
    seen: set[tuple[float, ...]] = set()
    for idx in order:
        key = tuple(points[idx])
        if key in seen:
            continue
        seen.add(key)
        starts.append(points[idx])
        if len(starts) == config.starts:
            break

    maxfev = max(config.max_evals // len(starts), 8)
    for x0 in starts:
        res = minimize(
            lambda x: -objective(x),
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": maxfev,
                "fatol": config.tol,
                "xatol": config.tol,
                "disp": False,
            },
        )
        trace.append((tuple(np.asarray(res.x, dtype=np.float64)), float(-res.fun)))

    assert best_x is not None
    psi1, psi2 = kets_of(best_x)
    verdict = "quantum_correlated" if best_q > config.threshold else "no_violation_found"
    return DiscordReport(
        best_q=best_q,
        best_params=tuple(float(t) for t in best_x),
        best_kets=(psi1, psi2),
        evaluations=evaluations,
        trace=tuple(trace),
        verdict=verdict,
        threshold=config.threshold,
    )
