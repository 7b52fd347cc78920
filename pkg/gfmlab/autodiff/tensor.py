import threading

import numpy as np

from ..errors import ContractError


class Tensor(object):
    """
    Dense 64-bit tensor that can take part in reverse-mode differentiation.

    :ivar data:          numpy float64 array holding the values (row-major)
    :ivar requires_grad: whether gradients are tracked for this tensor
    :ivar grad:          gradient buffer of identical shape, set by backward()
    :ivar name:          optional name, used in error messages
    """

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.name = name
        self._entry = None

    @classmethod
    def _wrap(cls, array, requires_grad):
        t = cls.__new__(cls)
        t.data = array
        t.requires_grad = requires_grad
        t.grad = None
        t.name = None
        t._entry = None
        return t

    @property
    def shape(self):
        return tuple(self.data.shape)

    @property
    def is_leaf(self):
        return self._entry is None

    def item(self):
        if self.data.size != 1:
            raise ContractError("item() requested on tensor of shape %s" %
                                (self.shape,))
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def detach(self):
        return Tensor(self.data, requires_grad=False, name=self.name)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        name = ", name=%s" % self.name if self.name else ""
        req = ", requires_grad=True" if self.requires_grad else ""
        return "Tensor(shape=%s%s%s)" % (self.shape, req, name)


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


class TapeEntry(object):
    __slots__ = ('kind', 'inputs', 'output', 'rule')

    def __init__(self, kind, inputs, output, rule):
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.rule = rule


class ComputeTape(object):
    """
    Ordered record of the operations of one forward pass.

    Operations are recorded on the innermost active tape of the calling
    thread, i.e.::

        with ComputeTape() as tape:
            loss = forward()
        backward(tape, loss)
    """

    _local = threading.local()

    def __init__(self):
        self.entries = []

    @classmethod
    def _stack(cls):
        stack = getattr(cls._local, 'stack', None)
        if stack is None:
            stack = cls._local.stack = []
        return stack

    @classmethod
    def current(cls):
        stack = cls._stack()
        return stack[-1] if stack else None

    def __enter__(self):
        ComputeTape._stack().append(self)
        return self

    def __exit__(self, *args):
        ComputeTape._stack().remove(self)

    def record(self, kind, inputs, output, rule):
        entry = TapeEntry(kind, inputs, output, rule)
        self.entries.append(entry)
        output._entry = entry
        return entry

    def leaves(self):
        """
        The requires_grad leaf tensors consumed by this tape, in first-use order
        """
        seen = {}
        for entry in self.entries:
            for t in entry.inputs:
                if t.requires_grad and t._entry is None and id(t) not in seen:
                    seen[id(t)] = t
        return list(seen.values())

    def __len__(self):
        return len(self.entries)


def backward(tape, loss):
    """
    Populates .grad of every requires_grad leaf recorded on the tape with the
    derivative of loss. Leaves not reachable from loss get a zero gradient.

    :param tape: The ComputeTape holding the forward pass
    :param loss: A scalar Tensor produced on that tape
    """
    if loss.data.size != 1:
        raise ContractError("backward() needs a scalar loss, got shape %s" %
                            (loss.shape,))

    grads = {id(loss): np.ones_like(loss.data)}
    for entry in reversed(tape.entries):
        g = grads.pop(id(entry.output), None)
        if g is None:
            continue
        for t, gi in zip(entry.inputs, entry.rule(g)):
            if gi is None or not t.requires_grad:
                continue
            key = id(t)
            grads[key] = grads[key] + gi if key in grads else gi

    for leaf in tape.leaves():
        g = grads.get(id(leaf))
        leaf.grad = (np.array(g, dtype=np.float64).reshape(leaf.data.shape)
                     if g is not None else np.zeros_like(leaf.data))
