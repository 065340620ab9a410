"""Feed-forward networks trained by exact backprop and Nadam.

Layers compute y = W z + b followed by an elementwise activation; weights are
stored as (out_width, in_width) arrays and batches as (n, width) with one row
per sample.  Two output heads map network outputs to states: a Bloch head
(coefficients, possibly non-positive) and a factor head (always a valid
density matrix).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .qcore import cholesky_from_vector, cholesky_to_state, from_bloch

ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass(frozen=True)
class LayerSpec:
    width: int
    activation: str = "relu"

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"layer width must be positive, got {self.width}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}, expected one of {ACTIVATIONS}")


def mlp_layers(hidden, out_width):
    """ReLU hidden layers of the given widths, then a tanh output layer."""
    specs = [LayerSpec(w, "relu") for w in hidden]
    specs.append(LayerSpec(out_width, "tanh"))
    return specs


@dataclass
class MlpParams:
    """Per-layer weights W[k] (out, in), biases b[k] (out,), activation names."""

    weights: list
    biases: list
    activations: list

    @property
    def in_width(self):
        return self.weights[0].shape[1]

    @property
    def out_width(self):
        return self.weights[-1].shape[0]

    def copy(self):
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )


def init_params(in_width, layers, rng):
    """Seeded uniform init: He-style fan-in limits for ReLU layers, combined
    fan-in/fan-out limits for tanh and identity layers; biases start at zero."""
    if in_width < 1:
        raise ValueError(f"input width must be positive, got {in_width}")
    if not layers:
        raise ValueError("need at least one layer")
    weights, biases, acts = [], [], []
    prev = in_width
    for spec in layers:
        if spec.activation == "relu":
            limit = np.sqrt(6.0 / prev)
        else:
            limit = np.sqrt(6.0 / (prev + spec.width))
        weights.append(rng.uniform(-limit, limit, size=(spec.width, prev)))
        biases.append(np.zeros(spec.width))
        acts.append(spec.activation)
        prev = spec.width
    return MlpParams(weights, biases, acts)


def _activate(name, y):
    if name == "relu":
        return np.maximum(y, 0.0)
    if name == "tanh":
        return np.tanh(y)
    return y


def forward(params, x):
    """Network output for one input vector or a batch of rows."""
    z = np.asarray(x, dtype=float)
    single = z.ndim == 1
    if single:
        z = z[None, :]
    if z.shape[1] != params.in_width:
        raise ValueError(f"expected input width {params.in_width}, got {z.shape[1]}")
    for w, b, act in zip(params.weights, params.biases, params.activations):
        z = _activate(act, z @ w.T + b)
    return z[0] if single else z


def mse_loss(pred, target):
    """Mean over the batch of the summed squared component error."""
    p = np.atleast_2d(np.asarray(pred, dtype=float))
    t = np.atleast_2d(np.asarray(target, dtype=float))
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    return float(np.mean(np.sum((t - p) ** 2, axis=1)))


def backward(params, x, target):
    """Exact gradient of mse_loss(forward(params, x), target).

    Returns (weight gradients, bias gradients) matching params.  The ReLU
    subgradient at zero is taken as zero.  Gradients average over the batch,
    so duplicating every sample leaves them unchanged.
    """
    z = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.atleast_2d(np.asarray(target, dtype=float))
    if z.shape[1] != params.in_width:
        raise ValueError(f"expected input width {params.in_width}, got {z.shape[1]}")
    if t.shape != (z.shape[0], params.out_width):
        raise ValueError(f"expected targets of shape {(z.shape[0], params.out_width)}, got {t.shape}")
    n_layers = len(params.weights)
    zs = [z]
    ys = []
    for w, b, act in zip(params.weights, params.biases, params.activations):
        y = zs[-1] @ w.T + b
        ys.append(y)
        zs.append(_activate(act, y))
    delta = 2.0 * (zs[-1] - t) / z.shape[0]
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    for k in reversed(range(n_layers)):
        act = params.activations[k]
        if act == "tanh":
            delta = delta * (1.0 - zs[k + 1] ** 2)
        elif act == "relu":
            delta = delta * (ys[k] > 0.0)
        grad_w[k] = delta.T @ zs[k]
        grad_b[k] = delta.sum(axis=0)
        if k:
            delta = delta @ params.weights[k]
    return grad_w, grad_b


@dataclass
class TrainConfig:
    """Nadam hyperparameters and the training protocol knobs."""

    learning_rate: float = 0.001
    mu: float = 0.9
    nu: float = 0.999
    eps: float = 1e-7
    batches_per_epoch: int = 100
    max_epochs: int = 500
    patience: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        for name in ("batches_per_epoch", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class NadamState:
    """First and second moment accumulators, step count, and the running
    product of momentum factors."""

    m_w: list
    m_b: list
    n_w: list
    n_b: list
    t: int = 0
    mu_product: float = 1.0


def nadam_state(params):
    return NadamState(
        m_w=[np.zeros_like(w) for w in params.weights],
        m_b=[np.zeros_like(b) for b in params.biases],
        n_w=[np.zeros_like(w) for w in params.weights],
        n_b=[np.zeros_like(b) for b in params.biases],
    )


def _nadam_update(value, grad, m, n, state, config):
    g_hat = grad / (1.0 - state.mu_product)
    m *= config.mu
    m += (1.0 - config.mu) * grad
    n *= config.nu
    n += (1.0 - config.nu) * grad * grad
    m_hat = m / (1.0 - state.mu_product * config.mu)
    n_hat = n / (1.0 - config.nu ** state.t)
    m_bar = (1.0 - config.mu) * g_hat + config.mu * m_hat
    value -= config.learning_rate * m_bar / (np.sqrt(n_hat) + config.eps)


def nadam_step(params, grads, state, config):
    """One Nadam update over every weight and bias tensor, in place.

    The gradient and first moment are bias-corrected with the running
    product of momentum factors (through the current and the next step
    respectively), blended, and scaled by the corrected second moment.
    """
    grad_w, grad_b = grads
    state.t += 1
    state.mu_product *= config.mu
    for k in range(len(params.weights)):
        _nadam_update(params.weights[k], grad_w[k], state.m_w[k], state.n_w[k], state, config)
        _nadam_update(params.biases[k], grad_b[k], state.m_b[k], state.n_b[k], state, config)
    return params, state


class EarlyStopper:
    """Track the best validation loss; stop after `patience` epochs without
    a new best."""

    def __init__(self, patience):
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0

    def update(self, epoch, loss):
        """Record this epoch's loss; return True when training should stop."""
        if loss < self.best:
            self.best = loss
            self.best_epoch = epoch
            return False
        return epoch - self.best_epoch >= self.patience


@dataclass
class TrainingHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = np.inf
    stopped_early: bool = False


def train(layers, train_data, val_data, config):
    """Mini-batch Nadam training with per-epoch validation tracking.

    train_data and val_data are (inputs, targets) pairs of row-major arrays.
    Rows are reshuffled every epoch with the seeded generator and split into
    config.batches_per_epoch batches.  Returns the parameters of the best
    validation epoch together with the loss history.  Raises
    FloatingPointError if a loss stops being finite.
    """
    x_train = np.asarray(train_data[0], dtype=float)
    y_train = np.asarray(train_data[1], dtype=float)
    x_val = np.asarray(val_data[0], dtype=float)
    y_val = np.asarray(val_data[1], dtype=float)
    if x_train.shape[0] == 0:
        raise ValueError("training dataset is empty")
    if x_val.shape[0] == 0:
        raise ValueError("validation dataset is empty")
    rng = np.random.default_rng(config.seed)
    params = init_params(x_train.shape[1], layers, rng)
    state = nadam_state(params)
    stopper = EarlyStopper(config.patience)
    history = TrainingHistory()
    best_params = params.copy()
    n = x_train.shape[0]
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        for chunk in np.array_split(order, min(config.batches_per_epoch, n)):
            if chunk.size == 0:
                continue
            grads = backward(params, x_train[chunk], y_train[chunk])
            nadam_step(params, grads, state, config)
        tl = mse_loss(forward(params, x_train), y_train)
        vl = mse_loss(forward(params, x_val), y_val)
        if not (np.isfinite(tl) and np.isfinite(vl)):
            raise FloatingPointError(f"loss diverged at epoch {epoch}: train={tl} val={vl}")
        history.train_loss.append(tl)
        history.val_loss.append(vl)
        stop = stopper.update(epoch, vl)
        if stopper.best_epoch == epoch:
            best_params = params.copy()
        if stop:
            history.stopped_early = True
            break
    history.best_epoch = stopper.best_epoch
    history.best_val_loss = float(stopper.best)
    return best_params, history


def predict_state_bloch(params, basis, f):
    """Hermitian estimate from the Bloch head; may fail positivity."""
    fv = np.asarray(getattr(f, "values", f), dtype=float)
    return from_bloch(forward(params, fv), basis)


def predict_state_cholesky(params, f):
    """Density-matrix estimate from the factor head.

    Network outputs are packed as a lower-triangular factor; diagonals take
    their absolute value so the factor is canonical, and the state is the
    normalized Gram matrix, positive by construction.
    """
    fv = np.asarray(getattr(f, "values", f), dtype=float)
    v = np.array(forward(params, fv), dtype=float)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"output width {v.size} is not a square")
    v[:d] = np.abs(v[:d])
    if not np.any(v):
        warnings.warn("all-zero factor; falling back to the maximally mixed state")
        return np.eye(d, dtype=complex) / d
    return cholesky_to_state(cholesky_from_vector(v, d))
