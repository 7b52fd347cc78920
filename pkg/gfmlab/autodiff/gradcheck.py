import logging

import numpy as np

from ..errors import NumericError
from .tensor import ComputeTape, backward

log = logging.getLogger('gfmlab.autodiff')


def _value(loss):
    value = float(np.asarray(loss.data).reshape(-1)[0])
    if not np.isfinite(value):
        raise NumericError("gradient_check: forward value is not finite")
    return value


def gradient_check(forward_fn, params, h=1e-5, tol=None):
    """
    Compares the analytic gradient of forward_fn with central finite
    differences.

    :param forward_fn: Deterministic callable without arguments returning a
                       scalar Tensor computed from params
    :param params:     The requires_grad Tensors to check
    :param h:          Finite-difference step
    :param tol:        If set, a warning naming the worst parameter is logged
                       when the error exceeds it
    :returns:          max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
    """
    with ComputeTape() as tape:
        loss = forward_fn()
    _value(loss)
    backward(tape, loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else np.array(p.grad)
                for p in params]

    worst, worst_name = 0.0, None
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        grad = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = _value(forward_fn())
            flat[i] = orig - h
            f_minus = _value(forward_fn())
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            err = abs(grad[i] - numeric) / max(abs(grad[i]), abs(numeric), 1e-8)
            if err > worst:
                worst, worst_name = err, '%s[%d]' % (p.name or 'param', i)

    if tol is not None and worst > tol:
        log.warning("Gradient check failed: relative error %.3g at %s" %
                    (worst, worst_name))
    return worst
