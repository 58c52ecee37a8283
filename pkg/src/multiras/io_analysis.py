"""Square industry-by-industry accounting tables and the linear demand model.

An IOTable couples the intermediate-consumption flow matrix with its
border vectors and enforces the accounting identities on construction:
row totals u1 close against final demand v1 into total resources p, and
column totals u2 close against value added v2 into the same p. Technical
coefficients normalize flow columns by the receiving industry's total;
the total-requirements matrix inverts (I - A); and total resources are
predicted from final demand as L @ v1.

Two coefficient denominators are supported. The conventional one divides
by total resources p, which is the mode under which p = L @ v1 holds
exactly. The alternative divides by the intermediate row totals u1;
useful for replicating sources that define coefficients that way, but the
prediction identity is then only approximate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    IdentityViolationError,
    ShapeMismatchError,
    SingularMatrixError,
    ZeroDenominatorError,
)
from .tensor import Tensor

IDENTITY_RTOL = 1e-9

RCOND_THRESHOLD = 1e-12

DENOMINATORS = ("resources", "output")


class SpectralConditionWarning(UserWarning):
    """A row or column sum of the coefficient matrix is >= 1."""


def _identity_ok(lhs, rhs, rtol=IDENTITY_RTOL):
    return abs(lhs - rhs) <= rtol * max(1.0, abs(lhs), abs(rhs))


def _as_vector(v, n, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (n,):
        raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected ({n},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass
class IOTable:
    """Flow matrix plus border vectors, validated against the identities.

    ``flows[i, j]`` is the flow from industry i to industry j; ``u1``/
    ``u2`` are its row/column totals, ``v1`` final demand, ``v2`` value
    added and ``p`` total resources.
    """

    flows: Tensor
    u1: np.ndarray
    u2: np.ndarray
    p: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        if self.flows.ndim != 2 or self.flows.shape[0] != self.flows.shape[1]:
            raise DimensionError(f"flows must be square, got shape {self.flows.shape}")
        n = self.flows.shape[0]
        self.u1 = _as_vector(self.u1, n, "u1")
        self.u2 = _as_vector(self.u2, n, "u2")
        self.p = _as_vector(self.p, n, "p")
        self.v1 = _as_vector(self.v1, n, "v1")
        self.v2 = _as_vector(self.v2, n, "v2")

        row_sums = self.flows.values.sum(axis=1)
        col_sums = self.flows.values.sum(axis=0)
        for i in range(n):
            if not _identity_ok(self.u1[i], row_sums[i]):
                raise IdentityViolationError(
                    "u1[i] = sum_j flows[i,j]", i, self.u1[i], row_sums[i]
                )
            if not _identity_ok(self.p[i], self.u1[i] + self.v1[i]):
                raise IdentityViolationError(
                    "p[i] = u1[i] + v1[i]", i, self.p[i], self.u1[i] + self.v1[i]
                )
            if not _identity_ok(self.u2[i], col_sums[i]):
                raise IdentityViolationError(
                    "u2[j] = sum_i flows[i,j]", i, self.u2[i], col_sums[i]
                )
            if not _identity_ok(self.p[i], self.u2[i] + self.v2[i]):
                raise IdentityViolationError(
                    "p[j] = u2[j] + v2[j]", i, self.p[i], self.u2[i] + self.v2[i]
                )

    @classmethod
    def from_flows(cls, flows, final_demand):
        """Derive the border vectors from a flow matrix and final demand.

        Row/column totals come from the flows, total resources close the
        output identity and value added closes the input identity, so the
        result is consistent by construction.
        """
        if not isinstance(flows, Tensor):
            flows = Tensor(flows, ("from_industry", "to_industry"))
        if flows.ndim != 2 or flows.shape[0] != flows.shape[1]:
            raise DimensionError(f"flows must be square, got shape {flows.shape}")
        n = flows.shape[0]
        v1 = _as_vector(final_demand, n, "final_demand")
        u1 = flows.values.sum(axis=1)
        u2 = flows.values.sum(axis=0)
        p = u1 + v1
        v2 = p - u2
        return cls(flows, u1, u2, p, v1, v2)

    @property
    def n(self):
        return self.flows.shape[0]


@dataclass(frozen=True)
class CoefficientMatrix:
    """Dimensionless technical coefficients plus the denominator convention."""

    values: Tensor
    denominator: str


def technical_coefficients(table: IOTable, denominator: str = "resources") -> CoefficientMatrix:
    """Normalize each flow column by the receiving industry's total.

    ``denominator="resources"`` divides column j by total resources p_j
    (the convention the Leontief prediction identity presumes);
    ``"output"`` divides by the intermediate row total u1_j. A zero
    denominator is tolerated only for an industry with an all-zero flow
    column, whose coefficient column is then zero.
    """
    if denominator not in DENOMINATORS:
        raise ValueError(f"denominator must be one of {DENOMINATORS}")
    denom = table.p if denominator == "resources" else table.u1
    flows = table.flows.values
    dead = denom == 0.0
    if dead.any():
        for j in np.flatnonzero(dead):
            if flows[:, j].any():
                raise ZeroDenominatorError(
                    f"industry {j} has zero {denominator} total but nonzero inflows"
                )
    a = np.divide(
        flows, denom[None, :], out=np.zeros_like(flows), where=~dead[None, :]
    )
    return CoefficientMatrix(table.flows.with_values(a), denominator)


def leontief_inverse(a) -> np.ndarray:
    """Total requirements matrix L = (I - A)^-1 via a stable linear solve.

    Accepts a CoefficientMatrix, a Tensor or a plain square array. Raises
    :class:`SingularMatrixError` when the reciprocal condition estimate of
    (I - A) falls below 1e-12; warns when a row or column sum of A reaches
    1, since the inverse then loses its total-requirements reading.
    """
    if isinstance(a, CoefficientMatrix):
        a = a.values
    arr = np.asarray(getattr(a, "values", a), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"coefficient matrix must be square, got {arr.shape}")
    if arr.size and (arr.sum(axis=1).max() >= 1.0 or arr.sum(axis=0).max() >= 1.0):
        warnings.warn(
            "a row or column sum of the coefficient matrix is >= 1; "
            "(I - A) may be near-singular and the inverse loses its "
            "total-requirements interpretation",
            SpectralConditionWarning,
            stacklevel=2,
        )
    n = arr.shape[0]
    im_a = np.eye(n) - arr
    cond = np.linalg.cond(im_a)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_THRESHOLD:
        raise SingularMatrixError(
            f"(I - A) is singular or ill-conditioned (rcond ~ {0.0 if not np.isfinite(cond) else 1.0 / cond:.2e})"
        )
    return np.linalg.solve(im_a, np.eye(n))


def predict_resources(l, v1) -> np.ndarray:
    """Total resources implied by final demand: the product L @ v1."""
    l_arr = np.asarray(getattr(l, "values", l), dtype=np.float64)
    v_arr = np.asarray(getattr(v1, "values", v1), dtype=np.float64)
    if l_arr.ndim != 2 or v_arr.ndim != 1 or l_arr.shape[1] != v_arr.shape[0]:
        raise ShapeMismatchError(
            f"cannot multiply {l_arr.shape} matrix by {v_arr.shape} vector"
        )
    return l_arr @ v_arr
