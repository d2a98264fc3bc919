"""Parallel graph-convolution model with a trainable graph-ranking layer.

The model runs M branches over the same node features X, one branch per
affinity graph.  Each branch is two graph-convolution layers

    H1 = relu(A_hat @ X @ Theta0)        logits_m = A_hat @ H1 @ Theta1

(no bias terms, no nonlinearity on the second layer).  A ranking layer
fuses the branch logits with scalar weights,

    Z = sum_m omega_m * logits_m         Y_hat = softmax_rows(Z)

so the learned magnitude of each omega_m expresses how much its graph
contributes to the prediction.  Backward passes are hand-derived; the
softmax/cross-entropy pair collapses to (Y_hat - Y) / L on labeled rows.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParameterError, ShapeError
from .linalg import SparseSymMatrix, as_dense, relu, softmax_rows, spmm

__all__ = [
    "ModelParams",
    "Gradients",
    "BranchCache",
    "ForwardCache",
    "init_params",
    "branch_forward",
    "rank_combine",
    "forward",
    "backward",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass
class ModelParams:
    """Per-branch layer weights plus the ranking weights.

    ``theta0[m]`` maps d -> h, ``theta1[m]`` maps h -> K, and ``omega`` has
    one scalar per branch.  Mutated in place by the optimizer.
    """

    theta0: list
    theta1: list
    omega: np.ndarray

    def __post_init__(self):
        if len(self.theta0) != len(self.theta1) or len(self.theta0) != len(self.omega):
            raise ShapeError("theta lists and omega must have one entry per branch")
        if len(self.theta0) < 1:
            raise ParameterError("model needs at least one branch")
        self.omega = np.asarray(self.omega, dtype=np.float64)

    @property
    def n_branches(self):
        return len(self.theta0)

    @property
    def d_in(self):
        return self.theta0[0].shape[0]

    @property
    def hidden(self):
        return self.theta0[0].shape[1]

    @property
    def n_classes(self):
        return self.theta1[0].shape[1]

    def copy(self):
        return ModelParams(
            theta0=[t.copy() for t in self.theta0],
            theta1=[t.copy() for t in self.theta1],
            omega=self.omega.copy(),
        )

    def tensors(self):
        """(name, array) pairs over every trainable tensor, fixed order."""
        for m, t in enumerate(self.theta0):
            yield f"theta0[{m}]", t
        for m, t in enumerate(self.theta1):
            yield f"theta1[{m}]", t
        yield "omega", self.omega


@dataclass
class Gradients:
    """Same layout as ModelParams; produced by :func:`backward`."""

    theta0: list
    theta1: list
    omega: np.ndarray

    def tensors(self):
        for m, t in enumerate(self.theta0):
            yield f"theta0[{m}]", t
        for m, t in enumerate(self.theta1):
            yield f"theta1[{m}]", t
        yield "omega", self.omega


@dataclass
class BranchCache:
    """Intermediates of one branch, retained for the backward pass."""

    dropped_input: np.ndarray    # X with the layer-1 dropout mask applied
    propagated0: np.ndarray      # A_hat @ dropped_input
    preact: np.ndarray           # propagated0 @ theta0
    hidden: np.ndarray           # relu(preact)
    dropped_hidden: np.ndarray   # hidden with the layer-2 dropout mask applied
    propagated1: np.ndarray      # A_hat @ dropped_hidden
    logits: np.ndarray           # propagated1 @ theta1
    mask0: np.ndarray | None
    mask1: np.ndarray | None


@dataclass
class ForwardCache:
    """Everything the backward pass needs from one forward evaluation."""

    branches: list
    graphs: list
    fused: np.ndarray            # Z
    probs: np.ndarray            # softmax_rows(Z)
    params: ModelParams = field(repr=False)


def init_params(d, h, k, m, seed):
    """Glorot-uniform layer weights; ranking weights start uniform at 1/M."""
    if min(d, h, k, m) < 1:
        raise ParameterError(f"dimensions must be >= 1, got d={d}, h={h}, k={k}, m={m}")
    rng = np.random.default_rng(seed)
    theta0, theta1 = [], []
    for _ in range(m):
        bound0 = np.sqrt(6.0 / (d + h))
        theta0.append(rng.uniform(-bound0, bound0, size=(d, h)))
        bound1 = np.sqrt(6.0 / (h + k))
        theta1.append(rng.uniform(-bound1, bound1, size=(h, k)))
    omega = np.full(m, 1.0 / m)
    return ModelParams(theta0=theta0, theta1=theta1, omega=omega)


def _dropout_mask(rng, shape, p):
    """Inverted-scaling dropout mask: entries are 0 or 1/(1-p)."""
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)


def branch_forward(x, a_hat, theta0, theta1, dropout=None):
    """One branch: two graph convolutions over a single normalized operator.

    ``dropout`` is either None (evaluation) or a pair of pre-scaled masks
    applied to the inputs of layer 1 and layer 2 respectively.
    """
    x = as_dense(x, "features")
    if not isinstance(a_hat, SparseSymMatrix):
        raise ShapeError("branch_forward expects a SparseSymMatrix operator")
    if a_hat.dim != x.shape[0]:
        raise ShapeError(f"operator dim {a_hat.dim} does not match {x.shape[0]} subjects")
    if x.shape[1] != theta0.shape[0]:
        raise ShapeError(f"features {x.shape} do not match layer-1 weights {theta0.shape}")
    if theta0.shape[1] != theta1.shape[0]:
        raise ShapeError(f"layer weights {theta0.shape} and {theta1.shape} do not chain")

    mask0 = mask1 = None
    dropped_input = x
    if dropout is not None:
        mask0, mask1 = dropout
        dropped_input = x * mask0
    propagated0 = spmm(a_hat, dropped_input)
    preact = propagated0 @ theta0
    hidden = relu(preact)
    dropped_hidden = hidden if mask1 is None else hidden * mask1
    propagated1 = spmm(a_hat, dropped_hidden)
    logits = propagated1 @ theta1
    cache = BranchCache(
        dropped_input=dropped_input,
        propagated0=propagated0,
        preact=preact,
        hidden=hidden,
        dropped_hidden=dropped_hidden,
        propagated1=propagated1,
        logits=logits,
        mask0=mask0,
        mask1=mask1,
    )
    return cache, logits


def rank_combine(branch_logits, omega):
    """Weighted sum of branch logits followed by a row softmax."""
    omega = np.asarray(omega, dtype=np.float64)
    if len(branch_logits) != len(omega):
        raise ShapeError(f"{len(branch_logits)} branch outputs but {len(omega)} ranking weights")
    if not branch_logits:
        raise ParameterError("rank_combine needs at least one branch")
    shape = branch_logits[0].shape
    for logits in branch_logits[1:]:
        if logits.shape != shape:
            raise ShapeError(f"branch logits disagree in shape: {shape} vs {logits.shape}")
    fused = np.zeros(shape)
    for weight, logits in zip(omega, branch_logits):  # fixed branch order
        fused += weight * logits
    return fused, softmax_rows(fused)


def forward(x, graphs, params, dropout_seed=None, dropout_p=0.3):
    """Full model evaluation over all branches.

    With ``dropout_seed=None`` the pass is deterministic (evaluation
    mode); otherwise per-branch masks are drawn from a generator seeded
    with ``dropout_seed`` and applied to each layer's input.
    """
    x = as_dense(x, "features")
    if len(graphs) != params.n_branches:
        raise ShapeError(f"{len(graphs)} graphs for {params.n_branches} branches")
    rng = None
    if dropout_seed is not None and dropout_p > 0.0:
        if not 0.0 <= dropout_p < 1.0:
            raise ParameterError(f"dropout rate must lie in [0, 1), got {dropout_p}")
        rng = np.random.default_rng(dropout_seed)

    branches = []
    branch_logits = []
    for m in range(params.n_branches):
        dropout = None
        if rng is not None:
            dropout = (
                _dropout_mask(rng, x.shape, dropout_p),
                _dropout_mask(rng, (x.shape[0], params.hidden), dropout_p),
            )
        cache, logits = branch_forward(x, graphs[m], params.theta0[m], params.theta1[m], dropout)
        branches.append(cache)
        branch_logits.append(logits)
    fused, probs = rank_combine(branch_logits, params.omega)
    return ForwardCache(branches=branches, graphs=list(graphs), fused=fused, probs=probs, params=params)


def backward(cache, y, labeled_mask, params, l2_lambda=0.0):
    """Analytic gradients of the masked cross-entropy plus L2 penalty.

    Unlabeled rows contribute nothing; the loss is normalized by the
    labeled count.  The L2 penalty ``l2_lambda * sum ||Theta||_F^2``
    affects layer weights only, never the ranking weights.
    """
    y = as_dense(y, "labels")
    labeled_mask = np.asarray(labeled_mask, dtype=bool)
    if cache.params.n_branches != params.n_branches:
        raise ConsistencyError("cache and params disagree on branch count")
    for m in range(params.n_branches):
        if cache.branches[m].preact.shape[1] != params.theta0[m].shape[1]:
            raise ConsistencyError("cache does not match these layer weights")
    if y.shape != cache.probs.shape:
        raise ShapeError(f"labels {y.shape} do not match predictions {cache.probs.shape}")
    if labeled_mask.shape != (y.shape[0],):
        raise ShapeError(f"mask shape {labeled_mask.shape} does not match {y.shape[0]} subjects")

    n_labeled = int(labeled_mask.sum())
    grad_fused = np.zeros_like(cache.probs)
    if n_labeled > 0:
        grad_fused[labeled_mask] = (cache.probs[labeled_mask] - y[labeled_mask]) / n_labeled

    grad_theta0, grad_theta1 = [], []
    grad_omega = np.zeros_like(params.omega)
    for m in range(params.n_branches):
        br = cache.branches[m]
        a_hat = cache.graphs[m]
        grad_omega[m] = np.sum(grad_fused * br.logits)

        grad_logits = params.omega[m] * grad_fused
        g_t1 = br.propagated1.T @ grad_logits + 2.0 * l2_lambda * params.theta1[m]
        grad_prop1 = grad_logits @ params.theta1[m].T
        grad_dropped_hidden = spmm(a_hat, grad_prop1)  # A_hat is symmetric
        grad_hidden = grad_dropped_hidden if br.mask1 is None else grad_dropped_hidden * br.mask1
        grad_preact = grad_hidden * (br.preact > 0)
        g_t0 = br.propagated0.T @ grad_preact + 2.0 * l2_lambda * params.theta0[m]
        grad_theta0.append(g_t0)
        grad_theta1.append(g_t1)

    return Gradients(theta0=grad_theta0, theta1=grad_theta1, omega=grad_omega)


def save_checkpoint(params, seed, path):
    """Write a self-describing .npz checkpoint; reload is bit-exact."""
    arrays = {
        "n_branches": np.asarray(params.n_branches),
        "omega": params.omega,
        "seed": np.asarray(int(seed)),
    }
    for m in range(params.n_branches):
        arrays[f"theta0_{m}"] = params.theta0[m]
        arrays[f"theta1_{m}"] = params.theta1[m]
    np.savez(path, **arrays)


def load_checkpoint(path):
    """Read a checkpoint written by :func:`save_checkpoint`.

    Returns ``(params, seed)``.
    """
    with np.load(path) as archive:
        m = int(archive["n_branches"])
        params = ModelParams(
            theta0=[archive[f"theta0_{i}"] for i in range(m)],
            theta1=[archive[f"theta1_{i}"] for i in range(m)],
            omega=archive["omega"],
        )
        seed = int(archive["seed"])
    return params, seed
