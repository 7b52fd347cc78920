import numpy as np

from ..errors import OptimizerError


def adamw_step(params, grads, state, lr, weight_decay, beta1=0.9,
               beta2=0.999, eps=1e-8, names=None):
    """
    One AdamW update with decoupled weight decay and bias-corrected moments.

    :param params: list of numpy arrays, updated in place
    :param grads:  list of gradients of the same shapes
    :param state:  dict with keys step, m, v; empty on the first call
    :param names:  optional parameter names for error messages
    :returns:      (params, state)
    """
    if not state:
        state['step'] = 0
        state['m'] = [np.zeros_like(p) for p in params]
        state['v'] = [np.zeros_like(p) for p in params]
    grads = [np.zeros_like(p) if g is None else np.asarray(g)
             for p, g in zip(params, grads)]
    for i, (p, g) in enumerate(zip(params, grads)):
        if g.shape != p.shape or state['m'][i].shape != p.shape:
            raise OptimizerError("Shape mismatch for parameter %s" %
                                 (names[i] if names else i))
        if not np.all(np.isfinite(g)):
            raise OptimizerError("Non-finite gradient for parameter %s" %
                                 (names[i] if names else i))
    state['step'] += 1
    t = state['step']
    for i, (p, g) in enumerate(zip(params, grads)):
        p -= lr * weight_decay * p
        m = state['m'][i] = beta1 * state['m'][i] + (1.0 - beta1) * g
        v = state['v'][i] = beta2 * state['v'][i] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


class AdamW(object):
    """
    AdamW over a list of requires_grad Tensors
    """

    def __init__(self, parameters, lr=1e-4, weight_decay=1e-5,
                 betas=(0.9, 0.999), eps=1e-8):
        self.parameters = list(parameters)
        self.lr = lr
        self.weight_decay = weight_decay
        self.betas = betas
        self.eps = eps
        self.state = {}

    def step(self):
        adamw_step([p.data for p in self.parameters],
                   [p.grad for p in self.parameters], self.state, self.lr,
                   self.weight_decay, self.betas[0], self.betas[1], self.eps,
                   names=[p.name for p in self.parameters])

    def zero_grad(self):
        for p in self.parameters:
            p.zero_grad()
