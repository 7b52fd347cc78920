import numpy as np

from ..errors import ContractError, DegenerateInputError, DimensionError, \
    NumericError
from .tensor import ComputeTape, Tensor, as_tensor

NORM_EPS = 1e-12

OPS = {}


def register(kind):
    """
    Registers a forward function returning (value, rule), where rule maps the
    output gradient to a tuple holding one gradient (or None) per input.
    """

    def decorator(func):
        OPS[kind] = func
        return func

    return decorator


def _require_2d(kind, *arrays):
    for a in arrays:
        if a.ndim != 2:
            raise DimensionError("%s expects 2-d operands, got shape %s" %
                                 (kind, a.shape))


def _require_same_shape(kind, a, b):
    if a.shape != b.shape:
        raise DimensionError("%s: shape mismatch %s vs %s" %
                             (kind, a.shape, b.shape))


@register('matmul')
def _matmul(a, b):
    _require_2d('matmul', a, b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError("matmul: shape mismatch %s @ %s" %
                             (a.shape, b.shape))
    return a @ b, lambda g: (g @ b.T, a.T @ g)


@register('add')
def _add(a, b):
    if a.ndim == 2 and b.shape == (1, a.shape[1]) and a.shape[0] != 1:
        # row operand broadcast over all rows (bias)
        return a + b, lambda g: (g, g.sum(axis=0, keepdims=True))
    _require_same_shape('add', a, b)
    return a + b, lambda g: (g, g)


@register('sub')
def _sub(a, b):
    _require_same_shape('sub', a, b)
    return a - b, lambda g: (g, -g)


@register('mul')
def _mul(a, b):
    _require_same_shape('mul', a, b)
    return a * b, lambda g: (g * b, g * a)


@register('scale')
def _scale(a, factor=1.0):
    return a * factor, lambda g: (g * factor,)


@register('relu')
def _relu(a):
    active = a > 0
    return np.where(active, a, 0.0), lambda g: (g * active,)


@register('leaky_relu')
def _leaky_relu(a, slope=0.2):
    factor = np.where(a > 0, 1.0, slope)
    return a * factor, lambda g: (g * factor,)


@register('exp')
def _exp(a):
    with np.errstate(over='ignore'):
        y = np.exp(a)
    return y, lambda g: (g * y,)


@register('log')
def _log(a):
    if np.any(a <= 0):
        raise DegenerateInputError("log of non-positive value")
    return np.log(a), lambda g: (g / a,)


@register('sum')
def _sum(a):
    return np.array(a.sum()), lambda g: (np.full_like(a, g),)


@register('mean_rows')
def _mean_rows(a):
    _require_2d('mean_rows', a)
    n = a.shape[0]
    return (a.mean(axis=0, keepdims=True),
            lambda g: (np.repeat(g / n, n, axis=0),))


@register('l2_normalize_rows')
def _l2_normalize_rows(a):
    _require_2d('l2_normalize_rows', a)
    norms = np.sqrt((a * a).sum(axis=1, keepdims=True))
    if np.any(norms <= NORM_EPS):
        raise DegenerateInputError("l2_normalize_rows: row with norm <= %g" %
                                   NORM_EPS)
    y = a / norms

    def rule(g):
        return ((g - y * (g * y).sum(axis=1, keepdims=True)) / norms,)

    return y, rule


@register('softmax_rows')
def _softmax_rows(a):
    _require_2d('softmax_rows', a)
    e = np.exp(a - a.max(axis=1, keepdims=True))
    y = e / e.sum(axis=1, keepdims=True)
    return y, lambda g: (y * (g - (g * y).sum(axis=1, keepdims=True)),)


@register('log_softmax_rows')
def _log_softmax_rows(a):
    _require_2d('log_softmax_rows', a)
    z = a - a.max(axis=1, keepdims=True)
    e = np.exp(z)
    total = e.sum(axis=1, keepdims=True)
    y = z - np.log(total)
    p = e / total
    return y, lambda g: (g - p * g.sum(axis=1, keepdims=True),)


@register('transpose')
def _transpose(a):
    _require_2d('transpose', a)
    return a.T.copy(), lambda g: (g.T,)


def _concat(kind, axis, arrays):
    _require_2d(kind, *arrays)
    other = 1 - axis
    if len(set(a.shape[other] for a in arrays)) != 1:
        raise DimensionError("%s: operands disagree on axis %d: %s" %
                             (kind, other, [a.shape for a in arrays]))
    cuts = np.cumsum([a.shape[axis] for a in arrays])[:-1]
    return (np.concatenate(arrays, axis=axis),
            lambda g: tuple(np.split(g, cuts, axis=axis)))


@register('concat_cols')
def _concat_cols(*arrays):
    return _concat('concat_cols', 1, arrays)


@register('concat_rows')
def _concat_rows(*arrays):
    return _concat('concat_rows', 0, arrays)


@register('gather_rows')
def _gather_rows(a, index=()):
    _require_2d('gather_rows', a)
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= a.shape[0]):
        raise DimensionError("gather_rows: index out of range for %d rows" %
                             a.shape[0])

    def rule(g):
        out = np.zeros_like(a)
        np.add.at(out, index, g)
        return (out,)

    return a[index], rule


def op_apply(kind, *inputs, **attrs):
    """
    Applies the operation kind to the input tensors. The result is recorded
    on the active ComputeTape when any input requires a gradient.

    :param kind:   One of the registered operation names (see OPS)
    :param inputs: Tensors (or array-likes, taken as constants)
    :param attrs:  Operation attributes, e.g. factor for scale
    :returns:      The output Tensor
    """
    func = OPS.get(kind)
    if func is None:
        raise ContractError("Unknown operation kind %s" % kind)
    inputs = tuple(as_tensor(x) for x in inputs)
    value, rule = func(*[t.data for t in inputs], **attrs)
    value = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(value)):
        raise NumericError("%s produced non-finite values" % kind)

    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor._wrap(value, requires_grad)
    tape = ComputeTape.current()
    if tape is not None and requires_grad:
        tape.record(kind, inputs, out, rule)
    return out


def matmul(a, b):
    return op_apply('matmul', a, b)


def add(a, b):
    return op_apply('add', a, b)


def sub(a, b):
    return op_apply('sub', a, b)


def mul(a, b):
    return op_apply('mul', a, b)


def scale(a, factor):
    return op_apply('scale', a, factor=factor)


def relu(a):
    return op_apply('relu', a)


def leaky_relu(a, slope=0.2):
    return op_apply('leaky_relu', a, slope=slope)


def exp(a):
    return op_apply('exp', a)


def log(a):
    return op_apply('log', a)


def sum_all(a):
    return op_apply('sum', a)


def mean_rows(a):
    return op_apply('mean_rows', a)


def l2_normalize_rows(a):
    return op_apply('l2_normalize_rows', a)


def softmax_rows(a):
    return op_apply('softmax_rows', a)


def log_softmax_rows(a):
    return op_apply('log_softmax_rows', a)


def transpose(a):
    return op_apply('transpose', a)


def concat_cols(*tensors):
    return op_apply('concat_cols', *tensors)


def concat_rows(*tensors):
    return op_apply('concat_rows', *tensors)


def gather_rows(a, index):
    return op_apply('gather_rows', a, index=index)
