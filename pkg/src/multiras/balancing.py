"""Proportional balancing of tensors against prescribed margin totals.

The classical RAS procedure rescales a nonnegative matrix until its row
and column sums match prescribed totals. The engine here runs the same
multiplicative update in any number of dimensions: one sweep adjusts the
fibers along every dimension in turn so their sums hit that dimension's
margin target, and sweeps repeat until a termination rule fires. On
feasible strictly positive problems the iterates converge to the unique
nonnegative tensor that satisfies every margin while preserving the
cross-product ratio structure of the start tensor (equivalently, its
KL-projection onto the margin constraints). Zero cells are preserved:
multiplicative updates never create or destroy support.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from ._backend import kernels as _default_kernels
from .errors import (
    DimensionError,
    IncompatibleMarginsError,
    NonPositiveCellError,
    ShapeMismatchError,
    ZeroFiberPositiveMarginError,
)
from .metrics import frobenius_distance
from .tensor import MarginSet, Tensor


class TerminationMode(Enum):
    """Which stopping rule(s) may end the iteration.

    ``max_iterations`` is always a hard cap; the mode selects the
    convergence rule checked after each full sweep. ANY checks both the
    step-size rule and the margin-residual rule.
    """

    ITERATIONS = "iterations"
    DELTA = "delta"
    MARGIN_RESIDUAL = "margin-residual"
    ANY = "any"


class TerminationReason(Enum):
    MAX_ITERATIONS = "max-iterations"
    DELTA_BELOW_THRESHOLD = "delta-below-threshold"
    MARGIN_RESIDUAL_BELOW_THRESHOLD = "margin-residual-below-threshold"


@dataclass(frozen=True)
class OrderPolicy:
    """The order in which dimensions are adjusted within one sweep.

    The converged solution does not depend on the order; individual
    iterates do. ``random`` reshuffles each sweep with its own seeded
    generator, so results stay reproducible.
    """

    kind: str  # "ascending" | "custom" | "random"
    order: tuple[int, ...] | None = None
    seed: int | None = None

    @classmethod
    def fixed_ascending(cls):
        return cls("ascending")

    @classmethod
    def fixed_custom(cls, order: Sequence[int]):
        return cls("custom", tuple(int(d) for d in order))

    @classmethod
    def random_per_iteration(cls, seed: int = 0):
        return cls("random", None, int(seed))

    def validate(self, ndim: int):
        if self.kind not in ("ascending", "custom", "random"):
            raise ValueError(f"unknown order policy kind {self.kind!r}")
        if self.kind == "custom":
            if self.order is None or sorted(self.order) != list(range(ndim)):
                raise ValueError(
                    f"custom order {self.order} is not a permutation of 0..{ndim - 1}"
                )
        if self.kind == "random" and self.seed is None:
            raise ValueError("random order policy requires a seed")

    def orders(self, ndim: int) -> Iterator[tuple[int, ...]]:
        """Infinite stream of per-sweep dimension orders."""
        if self.kind == "ascending":
            fixed = tuple(range(ndim))
            while True:
                yield fixed
        elif self.kind == "custom":
            while True:
                yield self.order
        else:
            rng = np.random.default_rng(self.seed)
            while True:
                yield tuple(int(d) for d in rng.permutation(ndim))


@dataclass(frozen=True)
class BalanceConfig:
    """Algorithm controls.

    ``delta_threshold`` (step size between consecutive sweeps) and
    ``margin_threshold`` (quadratic margin mismatch) are absolute; a zero
    threshold disables that rule. ``compatibility_rtol`` scales with the
    margins' grand total to give the absolute tolerance of the up-front
    pairwise compatibility check.
    """

    max_iterations: int = 10_000
    delta_threshold: float = 0.0
    margin_threshold: float = 1e-8
    order_policy: OrderPolicy = field(default_factory=OrderPolicy.fixed_ascending)
    termination_mode: TerminationMode = TerminationMode.ANY
    compatibility_rtol: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.delta_threshold < 0 or self.margin_threshold < 0:
            raise ValueError("thresholds must be >= 0")
        if self.compatibility_rtol < 0:
            raise ValueError("compatibility_rtol must be >= 0")
        # "at least one active stopping rule": a mode that relies on a single
        # convergence rule needs a positive threshold for it.
        if self.termination_mode == TerminationMode.DELTA and self.delta_threshold <= 0:
            raise ValueError("termination on delta requires delta_threshold > 0")
        if (
            self.termination_mode == TerminationMode.MARGIN_RESIDUAL
            and self.margin_threshold <= 0
        ):
            raise ValueError("termination on margin residual requires margin_threshold > 0")


@dataclass
class BalanceResult:
    """Solution plus convergence diagnostics of one balancing run."""

    solution: Tensor
    iterations_run: int
    final_delta: float
    final_margin_residual: float
    termination_reason: TerminationReason
    converged: bool


@dataclass(frozen=True)
class MarginViolation:
    """One failed pairwise margin-consistency condition.

    Summing margin ``dim_b``'s target over dimension ``dim_a`` must agree
    with summing margin ``dim_a``'s target over dimension ``dim_b`` at
    every remaining multi-index.
    """

    dim_a: int
    dim_b: int
    index: tuple[int, ...]
    lhs: float
    rhs: float

    def __str__(self):
        return (
            f"dims ({self.dim_a},{self.dim_b}) at index {self.index}: "
            f"{self.lhs:g} != {self.rhs:g}"
        )


def check_margin_compatibility(margins: MarginSet, tolerance: float):
    """All pairwise consistency violations of a margin set, worst case empty.

    For every dimension pair d < e the target for sums over d and the
    target for sums over e must agree on their common sub-totals within
    ``tolerance`` (absolute). Violations are data, not errors.
    """
    violations = []
    ndim = len(margins)
    for d in range(ndim):
        for e in range(d + 1, ndim):
            # margin e lacks dimension e, so parent dim d sits at axis d;
            # margin d lacks dimension d, so parent dim e sits at axis e-1.
            lhs = margins[e].values.sum(axis=d)
            rhs = margins[d].values.sum(axis=e - 1)
            if lhs.shape != rhs.shape:
                raise ShapeMismatchError(
                    f"margins {d} and {e} reduce to shapes {lhs.shape} vs {rhs.shape}"
                )
            mismatch = np.abs(lhs - rhs) > tolerance
            for index in np.argwhere(mismatch):
                key = tuple(int(i) for i in index)
                violations.append(
                    MarginViolation(d, e, key, float(lhs[key]), float(rhs[key]))
                )
    return violations


def delta_metric(x_t: Tensor, x_prev: Tensor) -> float:
    """Frobenius distance between consecutive iterates (the step-size rule)."""
    return frobenius_distance(x_t, x_prev)


def margin_residual(x: Tensor, margins: MarginSet) -> float:
    """Quadratic mismatch between the tensor's margins and the targets.

    Square root of the sum, over every dimension and every margin cell, of
    the squared difference between the achieved and the target totals.
    """
    margins.validate_against(x)
    return _margin_residual_arrays(x.values, [m.values for m in margins])


def adjust_dimension(x: Tensor, u_d: Tensor, d: int) -> Tensor:
    """One proportional adjustment: rescale fibers along ``d`` to hit ``u_d``.

    Every fiber with a positive sum is multiplied by target/current, which
    makes the margin over ``d`` equal ``u_d`` up to rounding. All-zero
    fibers stay zero when their target is zero and raise
    :class:`ZeroFiberPositiveMarginError` otherwise.
    """
    if not 0 <= d < x.ndim:
        raise DimensionError(
            f"dimension index {d} out of range for a {x.ndim}-dimensional tensor"
        )
    expected = x.shape[:d] + x.shape[d + 1 :]
    if u_d.shape != expected:
        raise ShapeMismatchError(
            f"margin target has shape {u_d.shape}, expected {expected}"
        )
    values = x.values.copy()
    _scale_dimension(values, np.ascontiguousarray(u_d.values), d, _default_kernels)
    return x.with_values(values)


def balance(m: Tensor, margins: MarginSet, config: BalanceConfig | None = None) -> BalanceResult:
    """Balance ``m`` against ``margins`` by iterative proportional fitting.

    Margins are checked for pairwise compatibility up front
    (:class:`IncompatibleMarginsError` on failure: incompatible targets
    make the iteration cycle forever). A run that hits the iteration cap
    with the margin residual still above threshold comes back as a result
    flagged ``converged=False`` rather than an exception, so diagnostics
    and the near-solution survive. Infeasible zero structure raises
    :class:`ZeroFiberPositiveMarginError` as soon as it is detected.
    """
    if config is None:
        config = BalanceConfig()
    margins.validate_against(m)
    config.order_policy.validate(m.ndim)

    tolerance = config.compatibility_rtol * margins.grand_total()
    violations = check_margin_compatibility(margins, tolerance)
    if violations:
        raise IncompatibleMarginsError(violations, tolerance)

    x = m.values.copy()
    targets = [np.ascontiguousarray(t.values) for t in margins]
    x, iterations, delta, residual, reason = _run_iterations(
        x, targets, config, _default_kernels
    )

    converged = (
        reason != TerminationReason.MAX_ITERATIONS
        or residual < config.margin_threshold
    )
    return BalanceResult(
        solution=m.with_values(x),
        iterations_run=iterations,
        final_delta=delta,
        final_margin_residual=residual,
        termination_reason=reason,
        converged=converged,
    )


def classical_ras(
    m: Tensor, row_totals, col_totals, config: BalanceConfig | None = None
) -> BalanceResult:
    """Classical 2-D RAS: balance a matrix to given row and column totals.

    Definitional wrapper: builds the two-margin set (column totals are the
    sums over dimension 0, row totals the sums over dimension 1) and runs
    the same engine, so results are identical to :func:`balance`.
    """
    if m.ndim != 2:
        raise DimensionError(f"classical RAS needs a 2-dimensional tensor, got {m.ndim}")
    rows = np.asarray(getattr(row_totals, "values", row_totals), dtype=np.float64)
    cols = np.asarray(getattr(col_totals, "values", col_totals), dtype=np.float64)
    if rows.shape != (m.shape[0],):
        raise ShapeMismatchError(f"row totals have shape {rows.shape}, expected ({m.shape[0]},)")
    if cols.shape != (m.shape[1],):
        raise ShapeMismatchError(f"column totals have shape {cols.shape}, expected ({m.shape[1]},)")
    margins = MarginSet(
        [
            Tensor(cols, (m.dim_names[1],), (m.labels[1],)),
            Tensor(rows, (m.dim_names[0],), (m.labels[0],)),
        ],
        parent_dim_names=m.dim_names,
        parent_shape=m.shape,
    )
    return balance(m, margins, config)


# -- structure conservation ------------------------------------------------


@dataclass(frozen=True)
class RatioFamily:
    """Index family probing one multiplicative cross-product ratio.

    ``indices[k]`` picks L entries from dimension k and ``perms[k]``
    permutes positions 0..L-1. Cell l of the numerator product is
    ``(indices[0][l], ..., indices[D-1][l])``; the denominator applies
    each dimension's permutation first. For D=2 with one dimension
    permuted by a swap (L=2) this is the classical 2x2 cross-ratio.

    Fiber rescaling along dimension d multiplies every cell by a factor
    depending on all coordinates except d, so the product ratio survives
    balancing exactly when, for every d, numerator and denominator agree
    on the multiset of cell projections with coordinate d removed
    (:meth:`conserves_product_ratio`). At D=2 every family of this shape
    qualifies; in higher dimensions the alternating-box families built by
    :func:`box_family` are the canonical conserved probes, while
    arbitrary permutations generally break the pairing between
    dimensions. The check itself evaluates any family, so other readings
    of the conservation property stay testable.
    """

    indices: tuple[tuple[int, ...], ...]
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        ndim = len(self.indices)
        if ndim == 0:
            raise DimensionError("a ratio family needs at least one dimension")
        length = len(self.indices[0])
        if len(self.perms) != ndim:
            raise DimensionError("one permutation per dimension required")
        for k in range(ndim):
            if len(self.indices[k]) != length:
                raise DimensionError(
                    f"index tuple for dimension {k} must have length {length}"
                )
            if sorted(self.perms[k]) != list(range(length)):
                raise DimensionError(
                    f"perms[{k}]={self.perms[k]} is not a permutation of 0..{length - 1}"
                )

    @property
    def ndim(self):
        return len(self.indices)

    @property
    def length(self):
        """Number of cells in the numerator (and in the denominator)."""
        return len(self.indices[0])

    def numerator_cells(self):
        return [
            tuple(self.indices[k][l] for k in range(self.ndim))
            for l in range(self.length)
        ]

    def denominator_cells(self):
        return [
            tuple(self.indices[k][self.perms[k][l]] for k in range(self.ndim))
            for l in range(self.length)
        ]

    def conserves_product_ratio(self):
        """Whether per-dimension fiber scalings leave this family's ratio fixed."""
        num = self.numerator_cells()
        den = self.denominator_cells()
        for d in range(self.ndim):
            num_proj = sorted(cell[:d] + cell[d + 1 :] for cell in num)
            den_proj = sorted(cell[:d] + cell[d + 1 :] for cell in den)
            if num_proj != den_proj:
                return False
        return True


@dataclass(frozen=True)
class RatioViolation:
    family: RatioFamily
    m_ratio: float
    x_ratio: float

    def __str__(self):
        return f"ratio {self.m_ratio:g} vs {self.x_ratio:g} for family {self.family}"


def box_family(corner_pairs) -> RatioFamily:
    """Alternating 2x...x2 box family over one index pair per dimension.

    The box's 2^D cells split by coordinate parity: even-parity cells form
    the numerator, odd-parity cells the denominator. This is the D-way
    interaction probe, the canonical ratio that per-dimension fiber
    scalings cannot move; at D=2 it reduces to the classical cross-ratio.
    """
    corner_pairs = tuple((int(a), int(b)) for a, b in corner_pairs)
    ndim = len(corner_pairs)
    even, odd = [], []
    for bits in itertools.product((0, 1), repeat=ndim):
        cell = tuple(corner_pairs[k][bits[k]] for k in range(ndim))
        (even if sum(bits) % 2 == 0 else odd).append(cell)
    indices = tuple(tuple(cell[k] for cell in even) for k in range(ndim))
    perms = []
    for k in range(ndim):
        available = list(indices[k])
        used = [False] * len(available)
        perm = []
        for cell in odd:
            for pos, value in enumerate(available):
                if not used[pos] and value == cell[k]:
                    used[pos] = True
                    perm.append(pos)
                    break
        perms.append(tuple(perm))
    return RatioFamily(indices, tuple(perms))


def all_cross_ratio_families(n_rows: int, n_cols: int):
    """Every 2x2 cross-ratio family of an ``n_rows`` x ``n_cols`` matrix."""
    families = []
    for i1 in range(n_rows):
        for i2 in range(i1 + 1, n_rows):
            for j1 in range(n_cols):
                for j2 in range(j1 + 1, n_cols):
                    families.append(box_family(((i1, i2), (j1, j2))))
    return families


def sample_ratio_families(shape: Sequence[int], count: int, seed: int = 0):
    """Random alternating-box families for the given shape (deterministic in seed).

    Every dimension needs at least two indices; the sampled families all
    satisfy :meth:`RatioFamily.conserves_product_ratio`.
    """
    shape = tuple(int(n) for n in shape)
    if any(n < 2 for n in shape):
        raise DimensionError(f"box families need size >= 2 per dimension, got {shape}")
    rng = np.random.default_rng(seed)
    families = []
    for _ in range(count):
        pairs = []
        for n in shape:
            a, b = rng.choice(n, size=2, replace=False)
            pairs.append((int(a), int(b)))
        families.append(box_family(pairs))
    return families


def structure_conservation_check(
    m: Tensor, x: Tensor, samples: Sequence[RatioFamily], tolerance: float
):
    """Compare cross-product ratios of ``m`` and ``x`` over sampled families.

    Returns the families whose ratios disagree; empty means the
    multiplicative structure of ``m`` survives in ``x`` at every sampled
    family. Ratios are compared within ``tolerance`` relative to
    max(1, |ratio|). All sampled cells must be strictly positive.
    """
    if m.shape != x.shape:
        raise ShapeMismatchError(f"shape mismatch: {m.shape} vs {x.shape}")
    violations = []
    for family in samples:
        if family.ndim != m.ndim:
            raise DimensionError(
                f"family has {family.ndim} dimensions, tensor has {m.ndim}"
            )
        num_cells = family.numerator_cells()
        den_cells = family.denominator_cells()
        for cells in (num_cells, den_cells):
            for cell in cells:
                for mv, name in ((m, "m"), (x, "x")):
                    if mv.get(cell) <= 0.0:
                        raise NonPositiveCellError(
                            f"sampled cell {cell} of {name} is not strictly positive"
                        )
        m_ratio = _product(m, num_cells) / _product(m, den_cells)
        x_ratio = _product(x, num_cells) / _product(x, den_cells)
        scale = max(1.0, abs(m_ratio), abs(x_ratio))
        if abs(m_ratio - x_ratio) > tolerance * scale:
            violations.append(RatioViolation(family, m_ratio, x_ratio))
    return violations


def _product(t: Tensor, cells):
    out = 1.0
    for cell in cells:
        out *= t.get(cell)
    return out


# -- engine internals --------------------------------------------------------


def _margin_residual_arrays(x: np.ndarray, targets) -> float:
    total = 0.0
    for d, u in enumerate(targets):
        diff = x.sum(axis=d) - u
        total += float((diff * diff).sum())
    return math.sqrt(total)


def _scale_dimension(x: np.ndarray, target: np.ndarray, d: int, kernels, scratch=None):
    """In-place proportional adjustment of dimension ``d`` of ``x``."""
    before = math.prod(x.shape[:d])
    after = math.prod(x.shape[d + 1 :])
    view = x.reshape(before, x.shape[d], after)
    target2 = target.reshape(before, after)
    if scratch is None or scratch.shape[0] < after:
        scratch = np.empty(after, dtype=np.float64)
    bad = kernels.scale_fibers(view, target2, scratch)
    if bad >= 0:
        index = np.unravel_index(bad, target.shape) if target.shape else ()
        raise ZeroFiberPositiveMarginError(
            d, tuple(int(i) for i in index), float(target2.flat[bad])
        )


def _run_iterations(x: np.ndarray, targets, config: BalanceConfig, kernels):
    """Run balancing sweeps on raw arrays until a termination rule fires."""
    ndim = x.ndim
    mode = config.termination_mode
    orders = config.order_policy.orders(ndim)
    scratch = np.empty(max(math.prod(x.shape[d + 1 :]) for d in range(ndim)))

    delta = math.inf
    residual = math.inf
    iterations = 0
    reason = TerminationReason.MAX_ITERATIONS
    for t in range(1, config.max_iterations + 1):
        prev = x.copy()
        for d in next(orders):
            _scale_dimension(x, targets[d], d, kernels, scratch)
        iterations = t
        delta = float(np.sqrt(((x - prev) ** 2).sum()))
        residual = _margin_residual_arrays(x, targets)
        if (
            mode in (TerminationMode.MARGIN_RESIDUAL, TerminationMode.ANY)
            and residual < config.margin_threshold
        ):
            reason = TerminationReason.MARGIN_RESIDUAL_BELOW_THRESHOLD
            break
        if (
            mode in (TerminationMode.DELTA, TerminationMode.ANY)
            and delta < config.delta_threshold
        ):
            reason = TerminationReason.DELTA_BELOW_THRESHOLD
            break
    return x, iterations, delta, residual, reason
