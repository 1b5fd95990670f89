"""Small dense feed-forward networks trained with Adam, in plain numpy.

All weights and biases live in one flat float64 buffer (and so do their
gradients), which keeps the optimizer step to a handful of vector
operations regardless of depth.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedLoss
from .resampling import rng_from_seed

ACTIVATIONS = ("relu", "none", "sigmoid")
LOSSES = ("mse", "bce")


@dataclass(frozen=True)
class MlpSpec:
    layers: tuple
    activations: tuple
    loss: str = "mse"
    learning_rate: float = 1e-4
    epochs: int = 300
    batch_size: int = 10
    seed: int = 0

    def __post_init__(self):
        layers = tuple(tuple(int(d) for d in pair) for pair in self.layers)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "activations", tuple(self.activations))
        if not layers or len(layers) != len(self.activations):
            raise ValueError("need one activation per layer")
        for (_, n_out), (n_in, _) in zip(layers, layers[1:]):
            if n_out != n_in:
                raise ValueError(f"layer sizes do not chain: {layers}")
        if any(a not in ACTIVATIONS for a in self.activations):
            raise ValueError(f"activations must be among {ACTIVATIONS}")
        if "sigmoid" in self.activations[:-1]:
            raise ValueError("sigmoid is only supported on the output layer")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.loss == "bce" and self.activations[-1] != "sigmoid":
            raise ValueError("bce loss needs a sigmoid output layer")
        if self.loss == "mse" and self.activations[-1] == "sigmoid":
            raise ValueError("mse loss expects a linear output layer")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size and learning_rate must be positive")

    @property
    def n_inputs(self):
        return self.layers[0][0]

    @property
    def n_params(self):
        return sum(i * o + o for i, o in self.layers)


TECATOR_LAYERS = ((100, 150), (150, 200), (200, 150), (150, 100), (100, 50), (50, 1))
HEART_LAYERS = ((17, 34), (34, 68), (68, 68), (68, 68), (68, 34), (34, 1))


def tecator_spec(**kw):
    """Regression network used for the NIR spectra (5 ReLU layers, linear output)."""
    kw.setdefault("learning_rate", 1e-4)
    return MlpSpec(layers=TECATOR_LAYERS, activations=("relu",) * 5 + ("none",),
                   loss="mse", **kw)


def heart_spec(**kw):
    """Binary classifier for the heart data (5 ReLU layers, sigmoid output)."""
    kw.setdefault("learning_rate", 1e-6)
    return MlpSpec(layers=HEART_LAYERS, activations=("relu",) * 5 + ("sigmoid",),
                   loss="bce", **kw)


class Mlp:
    def __init__(self, spec, params=None):
        self.spec = spec
        self.params = np.zeros(spec.n_params) if params is None else params
        self.grad = np.zeros_like(self.params)
        self.weights, self.biases = self._views(self.params)
        self.dweights, self.dbiases = self._views(self.grad)

    def _views(self, flat):
        ws, bs = [], []
        pos = 0
        for n_in, n_out in self.spec.layers:
            ws.append(flat[pos:pos + n_in * n_out].reshape(n_in, n_out))
            pos += n_in * n_out
            bs.append(flat[pos:pos + n_out])
            pos += n_out
        return ws, bs

    @classmethod
    def init(cls, spec, rng):
        """Uniform weights and biases in +-1/sqrt(fan_in)."""
        net = cls(spec)
        for W, b in zip(net.weights, net.biases):
            bound = 1.0 / np.sqrt(W.shape[0])
            W[...] = rng.uniform(-bound, bound, size=W.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)
        return net

    def _forward(self, X):
        acts = [X]
        h = X
        for W, b, act in zip(self.weights, self.biases, self.spec.activations):
            h = h @ W + b
            # a sigmoid output is folded into the loss, so logits are kept
            if act == "relu":
                h = np.maximum(h, 0.0)
            acts.append(h)
        return acts

    def predict(self, X):
        out = self._forward(np.asarray(X, dtype=np.float64))[-1][:, 0]
        if self.spec.activations[-1] == "sigmoid":
            out = _sigmoid(out)
        return out

    def loss_and_grad(self, X, y):
        """Mean loss over the batch, gradients left in ``self.grad``."""
        acts = self._forward(X)
        out = acts[-1][:, 0]
        n = X.shape[0]
        if self.spec.loss == "mse":
            diff = out - y
            loss = float(diff @ diff) / n
            delta = (2.0 / n) * diff[:, None]
        else:
            loss = float(np.mean(np.logaddexp(0.0, out) - y * out))
            delta = ((_sigmoid(out) - y) / n)[:, None]
        for i in range(len(self.weights) - 1, -1, -1):
            self.dweights[i][...] = acts[i].T @ delta
            self.dbiases[i][...] = delta.sum(axis=0)
            if i:
                delta = delta @ self.weights[i].T
                if self.spec.activations[i - 1] == "relu":
                    delta *= acts[i] > 0
        return loss

    def loss(self, X, y):
        out = self._forward(np.asarray(X, dtype=np.float64))[-1][:, 0]
        if self.spec.loss == "mse":
            return float(np.mean((out - y) ** 2))
        return float(np.mean(np.logaddexp(0.0, out) - y * out))


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)
    _buf: np.ndarray = field(default=None, repr=False)

    def step(self, params, grad):
        """theta -= lr * mhat / (sqrt(vhat) + eps), computed in place."""
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
            self._buf = np.empty_like(params)
        self.t += 1
        m, v, buf = self.m, self.v, self._buf
        m *= self.beta1
        np.multiply(grad, 1 - self.beta1, out=buf)
        m += buf
        v *= self.beta2
        np.multiply(grad, grad, out=buf)
        buf *= 1 - self.beta2
        v += buf
        np.divide(v, 1 - self.beta2 ** self.t, out=buf)
        np.sqrt(buf, out=buf)
        buf += self.eps
        np.divide(m, buf, out=buf)
        buf *= self.lr / (1 - self.beta1 ** self.t)
        params -= buf


@dataclass
class TrainResult:
    model: Mlp
    losses: list
    metrics: dict = field(default_factory=dict)


def mlp_train(spec, X, y):
    """Train a fresh network on (X, y) with mini-batch Adam.

    Rows are reshuffled every epoch, the last batch may be short. The run
    is fully determined by ``spec.seed``. Raises DivergedLoss if an epoch
    ends with a non-finite loss.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[1] != spec.n_inputs:
        raise ValueError(f"expected {spec.n_inputs} input columns, got shape {X.shape}")
    if y.shape[0] != X.shape[0]:
        raise ValueError("X and y have different numbers of rows")
    rng = rng_from_seed(spec.seed)
    net = Mlp.init(spec, rng)
    opt = Adam(lr=spec.learning_rate)
    n = X.shape[0]
    bs = spec.batch_size
    losses = []
    # overflow shows up as a non-finite epoch loss, reported below
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(spec.epochs):
            _epoch(net, opt, X, y, rng.permutation(n), bs, losses, epoch)
    return TrainResult(model=net, losses=losses)


def _epoch(net, opt, X, y, order, bs, losses, epoch):
    n = X.shape[0]
    total = 0.0
    for start in range(0, n, bs):
        idx = order[start:start + bs]
        total += net.loss_and_grad(X[idx], y[idx]) * idx.size
        opt.step(net.params, net.grad)
    epoch_loss = total / n
    if not np.isfinite(epoch_loss) or not np.all(np.isfinite(net.params)):
        raise DivergedLoss(epoch + 1)
    losses.append(epoch_loss)


def evaluate(model, X, y, task="regression", y_offset=0.0):
    """Test-set metrics.

    Regression: RMSEP and R^2, with `y_offset` (the training mean removed
    from the response) added back to the predictions. Classification:
    accuracy with a 0.5 threshold on the sigmoid output.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    pred = model.predict(X) if hasattr(model, "predict") else np.asarray(model, float)
    if task == "regression":
        pred = pred + y_offset
        sse = float(np.sum((y - pred) ** 2))
        sst = float(np.sum((y - y.mean()) ** 2))
        return {"rmsep": float(np.sqrt(sse / y.size)),
                "r2": 1.0 - sse / sst if sst > 0 else float("nan")}
    if task == "classification":
        return {"accuracy": float(np.mean((pred >= 0.5) == (y >= 0.5)))}
    raise ValueError(f"unknown task {task!r}")
