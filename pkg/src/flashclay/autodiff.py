"""Forward-mode automatic differentiation on numpy arrays.

A :class:`DualArray` carries a value array of shape ``S`` together with a
dense derivative array of shape ``S + (n,)``, where ``n`` is the number of
seed directions.  Arithmetic, the elementary functions used by the plant
model (``exp``, ``log``, ``sqrt``, ``abs``, ``power``), reductions and
indexing all propagate the derivative exactly, so residual code written in
plain numpy style evaluates either on floats or on duals.

Branching constructs must go through the module-level :func:`where`,
:func:`concatenate` and :func:`stack` helpers, which dispatch on the
argument types.  Plain ``numpy`` arrays and scalars act as constants with
zero derivative.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DualArray",
    "seed",
    "value",
    "derivative",
    "where",
    "concatenate",
    "stack",
    "clip",
]


def _as_dual_parts(obj, n_dir):
    """Return (value, derivative) of obj, lifting constants to zero slope."""
    if isinstance(obj, DualArray):
        return obj.val, obj.der
    val = np.asarray(obj, dtype=float)
    return val, np.zeros(val.shape + (n_dir,))


class DualArray:
    """Array of dual numbers: value plus dense Jacobian rows."""

    __slots__ = ("val", "der")
    # Outrank ndarray so mixed expressions like ndarray * dual come here.
    __array_priority__ = 200.0

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)
        if self.der.shape[: self.val.ndim] != self.val.shape:
            raise ValueError(
                f"derivative shape {self.der.shape} does not extend "
                f"value shape {self.val.shape}"
            )

    # ------------------------------------------------------------------
    # basic protocol
    # ------------------------------------------------------------------
    @property
    def n_dir(self):
        return self.der.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    @property
    def size(self):
        return self.val.size

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"DualArray(val={self.val!r}, n_dir={self.n_dir})"

    def __getitem__(self, key):
        return DualArray(self.val[key], self.der[key])

    def __iter__(self):
        for i in range(len(self.val)):
            yield self[i]

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return DualArray(
            self.val.reshape(shape), self.der.reshape(shape + (self.n_dir,))
        )

    def sum(self, axis=None):
        if axis is None:
            return DualArray(
                self.val.sum(), self.der.reshape(-1, self.n_dir).sum(axis=0)
            )
        axis = axis % self.val.ndim
        return DualArray(self.val.sum(axis=axis), self.der.sum(axis=axis))

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def __neg__(self):
        return DualArray(-self.val, -self.der)

    def __pos__(self):
        return self

    def __add__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        return DualArray(self.val + bv, self.der + bd)

    __radd__ = __add__

    def __sub__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        return DualArray(self.val - bv, self.der - bd)

    def __rsub__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        return DualArray(bv - self.val, bd - self.der)

    def __mul__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        return DualArray(
            self.val * bv,
            self.der * bv[..., None] + bd * self.val[..., None],
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        inv = 1.0 / bv
        val = self.val * inv
        return DualArray(val, (self.der - bd * val[..., None]) * inv[..., None])

    def __rtruediv__(self, other):
        bv, bd = _as_dual_parts(other, self.n_dir)
        inv = 1.0 / self.val
        val = bv * inv
        return DualArray(val, (bd - self.der * val[..., None]) * inv[..., None])

    def __pow__(self, other):
        if isinstance(other, DualArray):
            # a**b = exp(b log a); requires a > 0
            val = self.val**other.val
            der = val[..., None] * (
                other.der * np.log(self.val)[..., None]
                + other.val[..., None] * self.der / self.val[..., None]
            )
            return DualArray(val, der)
        p = np.asarray(other, dtype=float)
        val = self.val**p
        return DualArray(val, (p * self.val ** (p - 1.0))[..., None] * self.der)

    def __rpow__(self, other):
        base = np.asarray(other, dtype=float)
        val = base**self.val
        return DualArray(val, (val * np.log(base))[..., None] * self.der)

    # comparisons act on values and return plain boolean arrays
    def __lt__(self, other):
        return self.val < value(other)

    def __le__(self, other):
        return self.val <= value(other)

    def __gt__(self, other):
        return self.val > value(other)

    def __ge__(self, other):
        return self.val >= value(other)

    def __eq__(self, other):  # noqa: D105 - value comparison, like ndarray
        return self.val == value(other)

    def __ne__(self, other):
        return self.val != value(other)

    __hash__ = None

    def __float__(self):
        return float(self.val)

    # ------------------------------------------------------------------
    # numpy ufunc interception
    # ------------------------------------------------------------------
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if kwargs.get("out") is not None:
            return NotImplemented
        if method == "reduce" and ufunc is np.add:
            (arg,) = inputs
            return arg.sum(axis=kwargs.get("axis"))
        if method != "__call__":
            return NotImplemented
        handler = _UFUNC_TABLE.get(ufunc)
        if handler is None:
            raise TypeError(
                f"ufunc {ufunc.__name__!r} is not supported on DualArray"
            )
        return handler(*inputs)


def _h_add(a, b):
    return a + b if isinstance(a, DualArray) else b + a


def _h_subtract(a, b):
    if isinstance(a, DualArray):
        return a - b
    return b.__rsub__(a)


def _h_multiply(a, b):
    return a * b if isinstance(a, DualArray) else b * a


def _h_divide(a, b):
    if isinstance(a, DualArray):
        return a / b
    return b.__rtruediv__(a)


def _h_power(a, b):
    if isinstance(a, DualArray):
        return a**b
    return b.__rpow__(a)


def _h_negative(a):
    return -a


def _h_exp(a):
    val = np.exp(a.val)
    return DualArray(val, val[..., None] * a.der)


def _h_log(a):
    return DualArray(np.log(a.val), a.der / a.val[..., None])


def _h_sqrt(a):
    val = np.sqrt(a.val)
    return DualArray(val, a.der / (2.0 * val)[..., None])


def _h_square(a):
    return a * a

def _h_reciprocal(a):
    return 1.0 / a


def _h_absolute(a):
    s = np.sign(a.val)
    return DualArray(np.abs(a.val), s[..., None] * a.der)


def _h_maximum(a, b):
    return where(value(a) >= value(b), a, b)


def _h_minimum(a, b):
    return where(value(a) <= value(b), a, b)


def _cmp(op):
    def h(a, b):
        return op(value(a), value(b))

    return h


_UFUNC_TABLE = {
    np.add: _h_add,
    np.subtract: _h_subtract,
    np.multiply: _h_multiply,
    np.true_divide: _h_divide,
    np.divide: _h_divide,
    np.power: _h_power,
    np.float_power: _h_power,
    np.negative: _h_negative,
    np.positive: lambda a: a,
    np.exp: _h_exp,
    np.log: _h_log,
    np.sqrt: _h_sqrt,
    np.square: _h_square,
    np.reciprocal: _h_reciprocal,
    np.absolute: _h_absolute,
    np.fabs: _h_absolute,
    np.maximum: _h_maximum,
    np.minimum: _h_minimum,
    np.less: _cmp(np.less),
    np.less_equal: _cmp(np.less_equal),
    np.greater: _cmp(np.greater),
    np.greater_equal: _cmp(np.greater_equal),
    np.equal: _cmp(np.equal),
    np.not_equal: _cmp(np.not_equal),
}


# ----------------------------------------------------------------------
# module-level helpers
# ----------------------------------------------------------------------
def seed(x):
    """Lift a 1-D array to a DualArray seeded with the identity."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("seed expects a 1-D state vector")
    return DualArray(x.copy(), np.eye(x.size))


def value(obj):
    """Value part of a dual, or the argument itself for plain inputs."""
    if isinstance(obj, DualArray):
        return obj.val
    return obj


def derivative(obj, n_dir=None):
    """Derivative part; constants yield zeros (n_dir must then be given)."""
    if isinstance(obj, DualArray):
        return obj.der
    if n_dir is None:
        raise ValueError("n_dir required to lift a constant")
    val = np.asarray(obj, dtype=float)
    return np.zeros(val.shape + (n_dir,))


def _find_n_dir(args):
    for a in args:
        if isinstance(a, DualArray):
            return a.n_dir
    return None


def where(cond, a, b):
    """Branch on a boolean (plain) condition, propagating derivatives."""
    cond = np.asarray(value(cond))
    n = _find_n_dir((a, b))
    if n is None:
        return np.where(cond, a, b)
    av, ad = _as_dual_parts(a, n)
    bv, bd = _as_dual_parts(b, n)
    val = np.where(cond, av, bv)
    der = np.where(cond[..., None], ad, bd)
    # broadcast derivative up to the value shape if operands were scalars
    if der.shape[:-1] != val.shape:
        der = np.broadcast_to(der, val.shape + (n,))
    return DualArray(val, der)


def clip(x, lo, hi):
    """Clamp with flat derivative outside [lo, hi]."""
    return where(x < lo, lo, where(x > hi, hi, x))


def concatenate(parts, axis=0):
    parts = [p for p in parts]
    n = _find_n_dir(parts)
    if n is None:
        return np.concatenate([np.atleast_1d(p) for p in parts], axis=axis)
    vals, ders = [], []
    for p in parts:
        v, d = _as_dual_parts(p, n)
        v = np.atleast_1d(v)
        d = d.reshape(v.shape + (n,))
        vals.append(v)
        ders.append(d)
    axis = axis % vals[0].ndim
    return DualArray(
        np.concatenate(vals, axis=axis), np.concatenate(ders, axis=axis)
    )


def stack(parts, axis=0):
    parts = list(parts)
    n = _find_n_dir(parts)
    if n is None:
        return np.stack(parts, axis=axis)
    vals, ders = [], []
    for p in parts:
        v, d = _as_dual_parts(p, n)
        vals.append(np.asarray(v, dtype=float))
        ders.append(d)
    axis = axis % (np.ndim(vals[0]) + 1)
    return DualArray(np.stack(vals, axis=axis), np.stack(ders, axis=axis))
