"""Dense nonnegative tensors with named dimensions and margin extraction.

Everything downstream (the balancing engine, the metrics, the file
formats) shares this one array type: a dense row-major float64 tensor
whose dimensions carry names and string labels. Names and labels are
metadata for reports and file headers; dimension identity is positional.
Values are checked to be finite and nonnegative at construction, and
:meth:`Tensor.set` enforces the same invariant on mutation.
"""

from __future__ import annotations

import operator
from typing import Sequence

import numpy as np

from .errors import DimensionError, NegativeValueError, ShapeMismatchError


def _default_labels(shape):
    return tuple(tuple(str(i) for i in range(n)) for n in shape)


class Tensor:
    """A D-dimensional array of nonnegative reals with named dimensions."""

    __slots__ = ("_values", "_names", "_labels")

    def __init__(self, values, dim_names=None, labels=None):
        arr = np.array(values, dtype=np.float64, order="C", copy=True)
        if any(n < 1 for n in arr.shape):
            raise DimensionError("every dimension must have size >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor values must be finite")
        if arr.size and float(arr.min()) < 0.0:
            raise NegativeValueError("tensor values must be nonnegative")

        if dim_names is None:
            names = tuple(f"dim{i}" for i in range(arr.ndim))
        else:
            names = tuple(str(n) for n in dim_names)
        if len(names) != arr.ndim:
            raise DimensionError(
                f"got {len(names)} dimension names for a {arr.ndim}-dimensional tensor"
            )
        if len(set(names)) != len(names):
            raise DimensionError(f"dimension names must be unique, got {names}")

        if labels is None:
            labs = _default_labels(arr.shape)
        else:
            labs = tuple(tuple(str(v) for v in axis) for axis in labels)
            if len(labs) != arr.ndim:
                raise DimensionError("one label sequence per dimension required")
            for d, axis in enumerate(labs):
                if len(axis) != arr.shape[d]:
                    raise DimensionError(
                        f"dimension {d} has size {arr.shape[d]} but {len(axis)} labels"
                    )
                if len(set(axis)) != len(axis):
                    raise DimensionError(f"labels along dimension {d} must be unique")

        self._values = arr
        self._names = names
        self._labels = labs

    @classmethod
    def from_flat(cls, dims, flat, labels=None):
        """Build a tensor from ``dims`` = [(name, size), ...] and a row-major flat array."""
        dims = [(str(name), int(size)) for name, size in dims]
        shape = tuple(size for _, size in dims)
        arr = np.asarray(flat, dtype=np.float64)
        if arr.ndim != 1 or arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ShapeMismatchError(
                f"flat array of length {arr.size} does not fill shape {shape}"
            )
        return cls(arr.reshape(shape), [name for name, _ in dims], labels)

    # -- metadata ---------------------------------------------------------

    @property
    def values(self):
        """Read-only view of the underlying float64 array."""
        view = self._values.view()
        view.flags.writeable = False
        return view

    @property
    def shape(self):
        return self._values.shape

    @property
    def ndim(self):
        return self._values.ndim

    @property
    def size(self):
        return self._values.size

    @property
    def dim_names(self):
        return self._names

    @property
    def labels(self):
        return self._labels

    @property
    def dims(self):
        """Ordered (name, size) pairs."""
        return tuple(zip(self._names, self._values.shape))

    # -- element access ---------------------------------------------------

    def _check_index(self, index):
        index = tuple(index)
        if len(index) != self.ndim:
            raise DimensionError(
                f"index {index} has {len(index)} components, tensor has {self.ndim} dimensions"
            )
        out = []
        for d, (i, n) in enumerate(zip(index, self.shape)):
            try:
                i = operator.index(i)
            except TypeError:
                raise DimensionError(f"index component {i!r} is not an integer") from None
            if not 0 <= i < n:
                raise DimensionError(
                    f"index {index} out of bounds: component {d} must be in [0, {n})"
                )
            out.append(i)
        return tuple(out)

    def get(self, index):
        return float(self._values[self._check_index(index)])

    def set(self, index, value):
        value = float(value)
        if not np.isfinite(value):
            raise ValueError("tensor values must be finite")
        if value < 0.0:
            raise NegativeValueError(f"cannot set negative value {value!r}")
        self._values[self._check_index(index)] = value

    def __getitem__(self, index):
        return self.get(index if isinstance(index, tuple) else (index,))

    # -- operations -------------------------------------------------------

    def margin(self, d):
        """Sum over dimension ``d``: the (D-1)-dimensional partial totals."""
        if not 0 <= d < self.ndim:
            raise DimensionError(
                f"dimension index {d} out of range for a {self.ndim}-dimensional tensor"
            )
        summed = self._values.sum(axis=d)
        names = self._names[:d] + self._names[d + 1 :]
        labels = self._labels[:d] + self._labels[d + 1 :]
        return Tensor(summed, names, labels)

    def total(self):
        """Grand total of all entries."""
        return float(self._values.sum())

    def copy(self):
        return Tensor(self._values, self._names, self._labels)

    def with_values(self, values):
        """Same dimension metadata, new values (validated)."""
        return Tensor(values, self._names, self._labels)

    def __repr__(self):
        dims = ", ".join(f"{n}:{s}" for n, s in self.dims) or "scalar"
        return f"Tensor({dims}, total={self.total():g})"


class MarginSet:
    """One margin target per dimension of a parent tensor.

    Entry ``d`` is a tensor over the parent dimensions with dimension
    ``d`` removed (order preserved): the prescribed totals for sums over
    ``d``. Parent shape and names are inferred from the margins when
    possible (D >= 2) and cross-checked against every entry.
    """

    __slots__ = ("_margins", "_parent_names", "_parent_shape")

    def __init__(self, margins: Sequence[Tensor], parent_dim_names=None, parent_shape=None):
        margins = tuple(margins)
        if not margins:
            raise DimensionError("a margin set needs at least one margin")
        ndim = len(margins)
        for d, m in enumerate(margins):
            if not isinstance(m, Tensor):
                raise TypeError(f"margin {d} must be a Tensor, got {type(m).__name__}")
            if m.ndim != ndim - 1:
                raise DimensionError(
                    f"margin {d} must have {ndim - 1} dimensions, got {m.ndim}"
                )

        if parent_shape is None and ndim >= 2:
            parent_shape = (margins[1].shape[0],) + margins[0].shape
        if parent_shape is not None:
            parent_shape = tuple(int(n) for n in parent_shape)
            if len(parent_shape) != ndim:
                raise DimensionError(
                    f"parent shape {parent_shape} does not have {ndim} dimensions"
                )
            for d, m in enumerate(margins):
                expected = parent_shape[:d] + parent_shape[d + 1 :]
                if m.shape != expected:
                    raise ShapeMismatchError(
                        f"margin {d} has shape {m.shape}, expected {expected} "
                        f"(parent shape {parent_shape} without dimension {d})"
                    )

        if parent_dim_names is None and ndim >= 2:
            parent_dim_names = (margins[1].dim_names[0],) + margins[0].dim_names
        if parent_dim_names is not None:
            parent_dim_names = tuple(str(n) for n in parent_dim_names)
            if len(parent_dim_names) != ndim:
                raise DimensionError("one parent dimension name per margin required")

        self._margins = margins
        self._parent_names = parent_dim_names
        self._parent_shape = parent_shape

    @classmethod
    def from_tensor(cls, t: Tensor):
        """The margins of ``t`` itself (always mutually compatible)."""
        return cls([t.margin(d) for d in range(t.ndim)], t.dim_names, t.shape)

    @property
    def margins(self):
        return self._margins

    @property
    def parent_dim_names(self):
        return self._parent_names

    @property
    def parent_shape(self):
        return self._parent_shape

    def __len__(self):
        return len(self._margins)

    def __iter__(self):
        return iter(self._margins)

    def __getitem__(self, d):
        return self._margins[d]

    def grand_total(self):
        """Largest margin total; the scale the compatibility tolerance is relative to."""
        return max(m.total() for m in self._margins)

    def validate_against(self, t: Tensor):
        """Check shape agreement with a parent tensor (names are metadata only)."""
        if len(self._margins) != t.ndim:
            raise DimensionError(
                f"{len(self._margins)} margins for a {t.ndim}-dimensional tensor"
            )
        if self._parent_shape is not None and self._parent_shape != t.shape:
            raise ShapeMismatchError(
                f"margins describe parent shape {self._parent_shape}, tensor has {t.shape}"
            )
        for d, m in enumerate(self._margins):
            expected = t.shape[:d] + t.shape[d + 1 :]
            if m.shape != expected:
                raise ShapeMismatchError(
                    f"margin {d} has shape {m.shape}, expected {expected}"
                )

    def __repr__(self):
        shape = self._parent_shape if self._parent_shape is not None else "?"
        return f"MarginSet(parent_shape={shape}, D={len(self._margins)})"
