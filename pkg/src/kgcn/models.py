"""Forward and backward passes for the three architectures.

Architectures
-------------
vanilla_gcn        H_{l+1} = f(L H_l W_l),           logits = L (H_n W_out)
snowball           H_{l+1} = f(L [H_0..H_l] W_l),    C = g([H_0..H_n] W_n),
                   logits = L^p C W_C
truncated_krylov   H_{l+1} = f([H_l, L H_l, ..., L^{m-1} H_l] W_l),
                   C = g(H_n W_n),  logits = L^p C W_C

Softmax is fused into the loss; every forward returns pre-softmax logits
plus a tape holding the intermediates needed for exact reverse-mode
gradients. Inverted dropout is applied to each layer's input concatenation
during training (and, configurably, to the classifier input); masks are
replayed from the tape in the backward pass.

Layer inputs are handled as lists of column blocks. A block is either a
dense float64 array or a scipy CSR matrix; CSR blocks are constants (the
input features and their diffusion powers), so no gradient ever flows into
a sparse block. Constant dense blocks under very strong dropout are dropped
by sampling the kept entries directly (geometric skips), which turns the
layer product into a cheap sparse-dense multiply without changing the
dropout distribution.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import NotLinear, ShapeError
from .krylov import block_krylov_matrix
from .linalg import ACTIVATIONS, SparseMatrix, activation, activation_grad, spmm

__all__ = [
    "ModelSpec",
    "ModelParams",
    "ForwardTape",
    "forward",
    "forward_vanilla",
    "forward_snowball",
    "forward_truncated_krylov",
    "backward",
    "collapse_linear_snowball",
    "init_params",
    "save_params",
    "load_params",
    "flatten_params",
    "unflatten_params",
]

ARCHS = ("vanilla_gcn", "snowball", "truncated_krylov")

# dropout on a constant dense block switches to sparse selection below this
# keep probability; a diffusion power block stays sparse below this fill
SPARSE_SELECT_KEEP = 0.15
DENSIFY_FILL = 0.25


# --------------------------------------------------------------------------
# specification and parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    arch: str
    input_dim: int
    widths: tuple[int, ...]
    n_classes: int
    n_blocks: int = 1
    f_act: str = "tanh"
    g_act: str = "identity"
    p: int = 0
    classifier_width: int | None = None
    identity_classifier: bool = False
    dropout: float = 0.0
    classifier_dropout: bool = True

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.arch not in ARCHS:
            raise ShapeError(f"unknown arch {self.arch!r}")
        if self.p not in (0, 1):
            raise ShapeError(f"p must be 0 or 1, got {self.p}")
        if self.f_act not in ACTIVATIONS or self.g_act not in ACTIVATIONS:
            raise ShapeError("unknown activation kind")
        if any(w <= 0 for w in self.widths) or self.input_dim <= 0:
            raise ShapeError("widths must be positive")
        if self.n_classes <= 0:
            raise ShapeError("n_classes must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ShapeError(f"dropout must be in [0,1), got {self.dropout}")
        if self.arch == "truncated_krylov" and self.n_blocks < 1:
            raise ShapeError("truncated_krylov requires n_blocks >= 1")
        if self.arch != "vanilla_gcn" and not self.identity_classifier:
            if self.classifier_width is None or self.classifier_width <= 0:
                raise ShapeError("classifier_width required without identity classifier")

    @property
    def depth(self) -> int:
        return len(self.widths)

    @property
    def all_widths(self) -> tuple[int, ...]:
        return (self.input_dim,) + self.widths

    def concat_width(self, l: int) -> int:
        """Input width of snowball layer l: sum of F_0..F_l."""
        return sum(self.all_widths[: l + 1])

    @property
    def classifier_input_width(self) -> int:
        if self.arch == "snowball":
            return sum(self.all_widths)
        return self.all_widths[-1]

    @property
    def effective_classifier_width(self) -> int:
        if self.arch == "vanilla_gcn" or self.identity_classifier:
            return self.classifier_input_width
        return int(self.classifier_width)

    def hidden_weight_shape(self, l: int) -> tuple[int, int]:
        out = self.widths[l]
        if self.arch == "vanilla_gcn":
            return (self.all_widths[l], out)
        if self.arch == "snowball":
            return (self.concat_width(l), out)
        return (self.n_blocks * self.all_widths[l], out)


@dataclass
class ModelParams:
    """Weights as plain float64 arrays.

    classifier_in is W_n (None for vanilla nets and identity classifiers);
    classifier_out is W_C (for vanilla nets, the final output weight).
    """

    hidden_weights: list[np.ndarray]
    classifier_in: np.ndarray | None
    classifier_out: np.ndarray

    def entries(self):
        for l, w in enumerate(self.hidden_weights):
            yield f"hidden_{l}", w
        if self.classifier_in is not None:
            yield "classifier_in", self.classifier_in
        yield "classifier_out", self.classifier_out

    def copy(self) -> "ModelParams":
        return ModelParams(
            [w.copy() for w in self.hidden_weights],
            None if self.classifier_in is None else self.classifier_in.copy(),
            self.classifier_out.copy(),
        )

    def zeros_like(self) -> "ModelParams":
        return ModelParams(
            [np.zeros_like(w) for w in self.hidden_weights],
            None if self.classifier_in is None else np.zeros_like(self.classifier_in),
            np.zeros_like(self.classifier_out),
        )


def init_params(spec: ModelSpec, scheme: str = "glorot_uniform", seed: int = 0,
                sigma: float = 1.0) -> ModelParams:
    """Deterministic initialization; weights drawn in a fixed order."""
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(shape):
        if scheme == "glorot_uniform":
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            return rng.uniform(-bound, bound, size=shape)
        if scheme == "normal":
            return sigma * rng.standard_normal(shape)
        raise ShapeError(f"unknown init scheme {scheme!r}")

    hidden = [draw(spec.hidden_weight_shape(l)) for l in range(spec.depth)]
    cls_in = None
    if spec.arch != "vanilla_gcn" and not spec.identity_classifier:
        cls_in = draw((spec.classifier_input_width, spec.classifier_width))
    cls_out = draw((spec.effective_classifier_width, spec.n_classes))
    return ModelParams(hidden, cls_in, cls_out)


# --------------------------------------------------------------------------
# block helpers
# --------------------------------------------------------------------------


def _as_block(x):
    if isinstance(x, SparseMatrix):
        return x.to_scipy()
    if scipy.sparse.issparse(x):
        return x.tocsr()
    return np.asarray(x, dtype=np.float64)


def _block_cols(b) -> int:
    return int(b.shape[1])


def _cat_matmul(blocks, w: np.ndarray) -> np.ndarray:
    total = sum(_block_cols(b) for b in blocks)
    if total != w.shape[0]:
        raise ShapeError(f"concat width {total} != weight rows {w.shape[0]}")
    out = None
    r0 = 0
    for b in blocks:
        r1 = r0 + _block_cols(b)
        piece = b @ w[r0:r1]
        piece = np.asarray(piece)
        out = piece if out is None else out + piece
        r0 = r1
    return out


def _sample_kept_flat(rng: np.random.Generator, size: int, keep: float) -> np.ndarray:
    """Flat indices of i.i.d. Bernoulli(keep) successes, via geometric skips."""
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    out = []
    pos = -1
    chunk = max(int(size * keep * 1.2) + 16, 64)
    while True:
        gaps = rng.geometric(keep, size=chunk)
        steps = np.cumsum(gaps, dtype=np.int64) + pos
        inside = steps[steps < size]
        out.append(inside)
        if inside.size < steps.size:
            break
        pos = int(steps[-1])
    return np.concatenate(out)


def _drop_block(b, rate: float, rng, needs_grad: bool):
    """Inverted dropout on one block.

    Returns (dropped, mask_kind, mask). mask_kind 'none' means pass-through,
    'dense' carries a boolean mask for the backward pass, 'const' marks a
    constant block whose dropped form needs no gradient path.
    """
    if rng is None or rate == 0.0:
        return b, "none", None
    keep = 1.0 - rate
    if scipy.sparse.issparse(b):
        m = rng.random(b.data.size) < keep
        dropped = b.copy()
        dropped.data = np.where(m, dropped.data / keep, 0.0)
        return dropped, "const", None
    if not needs_grad and keep < SPARSE_SELECT_KEEP:
        n, c = b.shape
        flat = _sample_kept_flat(rng, n * c, keep)
        rows = flat // c
        cols = flat - rows * c
        vals = b[rows, cols] / keep
        dropped = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, c))
        return dropped, "const", None
    m = rng.random(b.shape) < keep
    dropped = np.where(m, b / keep, 0.0)
    return dropped, "dense", m


def _drop_blocks(blocks, rate, rng, needs_grad):
    dropped, kinds, masks = [], [], []
    for b, g in zip(blocks, needs_grad):
        d, k, m = _drop_block(b, rate, rng, g)
        dropped.append(d)
        kinds.append(k)
        masks.append(m)
    return dropped, kinds, masks


def _mask_backward(d_tilde: np.ndarray, kind: str, mask, keep: float) -> np.ndarray:
    if kind == "none":
        return d_tilde
    if kind == "dense":
        return np.where(mask, d_tilde / keep, 0.0)
    raise ShapeError("gradient requested through a constant block")


def _power_blocks(op: SparseMatrix, base, m: int):
    """[B, L B, ..., L^{m-1} B]; sparse powers densify once fill grows."""
    blocks = [base]
    sp = op.to_scipy()
    for _ in range(m - 1):
        prev = blocks[-1]
        if scipy.sparse.issparse(prev):
            nxt = (sp @ prev).tocsr()
            if nxt.nnz > DENSIFY_FILL * nxt.shape[0] * nxt.shape[1]:
                nxt = nxt.toarray()
        else:
            nxt = spmm(op, prev)
        blocks.append(nxt)
    return blocks


# --------------------------------------------------------------------------
# tape
# --------------------------------------------------------------------------


@dataclass
class _LayerRecord:
    dropped: list
    mask_kinds: list
    masks: list
    hidden_indices: list  # per block: source hidden index, or None if constant
    preact: np.ndarray
    spmm_after: bool  # True when the layer computes f(L (U W)) rather than f(U W)
    base_hidden: int | None = None  # truncated layers: hidden the powers derive from


@dataclass
class _HeadRecord:
    dropped: list
    mask_kinds: list
    masks: list
    hidden_indices: list
    preact: np.ndarray | None  # W_n pre-activation; None for identity head
    post: np.ndarray | None  # C = g(preact); None for identity head
    p_eff: int


@dataclass
class ForwardTape:
    """Every intermediate needed for exact reverse-mode gradients."""

    spec: ModelSpec
    operator: SparseMatrix
    hiddens: list
    layers: list
    head: _HeadRecord
    logits: np.ndarray
    training: bool


# --------------------------------------------------------------------------
# forward passes
# --------------------------------------------------------------------------


def _classifier_head(op, blocks, needs_grad, hidden_indices, params, spec, rng):
    rate = spec.dropout if spec.classifier_dropout else 0.0
    dropped, kinds, masks = _drop_blocks(blocks, rate, rng, needs_grad)
    p_eff = 1 if spec.arch == "vanilla_gcn" else spec.p
    if spec.arch == "vanilla_gcn" or spec.identity_classifier:
        v = _cat_matmul(dropped, params.classifier_out)
        preact = post = None
    else:
        preact = _cat_matmul(dropped, params.classifier_in)
        post = activation(preact, spec.g_act)
        v = post @ params.classifier_out
    logits = spmm(op, v) if p_eff else v
    rec = _HeadRecord(dropped, kinds, masks, hidden_indices, preact, post, p_eff)
    return logits, rec


def _forward_impl(op: SparseMatrix, x, params: ModelParams, spec: ModelSpec, rng):
    x = _as_block(x)
    if x.shape[0] != op.rows:
        raise ShapeError(f"features have {x.shape[0]} rows, operator {op.rows}")
    if x.shape[1] != spec.input_dim:
        raise ShapeError(f"features have {x.shape[1]} cols, spec.input_dim={spec.input_dim}")
    hiddens = [x]
    records = []
    for l in range(spec.depth):
        w = params.hidden_weights[l]
        if w.shape != spec.hidden_weight_shape(l):
            raise ShapeError(
                f"layer {l} weight {w.shape} != {spec.hidden_weight_shape(l)}"
            )
        if spec.arch == "snowball":
            blocks = hiddens[: l + 1]
            grads = [i > 0 for i in range(l + 1)]
            idxs = [i if i > 0 else None for i in range(l + 1)]
            base = None
        elif spec.arch == "vanilla_gcn":
            blocks = [hiddens[l]]
            grads = [l > 0]
            idxs = [l if l > 0 else None]
            base = None
        else:
            blocks = _power_blocks(op, hiddens[l], spec.n_blocks)
            grads = [l > 0] * spec.n_blocks
            idxs = [None] * spec.n_blocks
            base = l if l > 0 else None
        dropped, kinds, masks = _drop_blocks(blocks, spec.dropout, rng, grads)
        v = _cat_matmul(dropped, w)
        if spec.arch == "truncated_krylov":
            preact = v
            spmm_after = False
        else:
            preact = spmm(op, v)
            spmm_after = True
        h = activation(preact, spec.f_act)
        records.append(
            _LayerRecord(dropped, kinds, masks, idxs, preact, spmm_after, base)
        )
        hiddens.append(h)

    if spec.arch == "snowball":
        head_blocks = hiddens
        head_grads = [i > 0 for i in range(len(hiddens))]
        head_idxs = [i if i > 0 else None for i in range(len(hiddens))]
    else:
        n = spec.depth
        head_blocks = [hiddens[n]]
        head_grads = [n > 0]
        head_idxs = [n if n > 0 else None]
    logits, head = _classifier_head(
        op, head_blocks, head_grads, head_idxs, params, spec, rng
    )
    tape = ForwardTape(spec, op, hiddens, records, head, logits, rng is not None)
    return logits, tape


def _unwrap_operator(op) -> SparseMatrix:
    # accept a DiffusionOperator without importing graph (avoids a cycle)
    inner = getattr(op, "matrix", op)
    if not isinstance(inner, SparseMatrix):
        raise ShapeError("operator must be a SparseMatrix or DiffusionOperator")
    return inner


def forward(op, x, params: ModelParams, spec: ModelSpec, rng=None):
    """Dispatch on spec.arch; rng=None means evaluation mode (no dropout)."""
    return _forward_impl(_unwrap_operator(op), x, params, spec, rng)


def forward_snowball(op, x, params, spec: ModelSpec, rng=None):
    if spec.arch != "snowball":
        raise ShapeError("spec.arch must be 'snowball'")
    return forward(op, x, params, spec, rng)


def forward_truncated_krylov(op, x, params, spec: ModelSpec, rng=None):
    if spec.arch != "truncated_krylov":
        raise ShapeError("spec.arch must be 'truncated_krylov'")
    return forward(op, x, params, spec, rng)


def forward_vanilla(op, x, params, depth: int, act: str, rng=None,
                    dropout: float = 0.0, classifier_dropout: bool = True):
    """Plain deep GCN: logits = L f(... L f(L X W_0) W_1 ...) W_out."""
    if len(params.hidden_weights) != depth:
        raise ShapeError(f"expected {depth} hidden weights, got {len(params.hidden_weights)}")
    op_m = _unwrap_operator(op)
    x_b = _as_block(x)
    widths = tuple(w.shape[1] for w in params.hidden_weights)
    spec = ModelSpec(
        arch="vanilla_gcn",
        input_dim=x_b.shape[1],
        widths=widths,
        n_classes=params.classifier_out.shape[1],
        f_act=act,
        p=1,
        dropout=dropout,
        classifier_dropout=classifier_dropout,
    )
    return _forward_impl(op_m, x_b, params, spec, rng)


# --------------------------------------------------------------------------
# backward pass
# --------------------------------------------------------------------------


def _block_row_ranges(blocks):
    r0 = 0
    for b in blocks:
        r1 = r0 + _block_cols(b)
        yield b, r0, r1
        r0 = r1


def backward(tape: ForwardTape, params: ModelParams, spec: ModelSpec,
             grad_logits: np.ndarray) -> ModelParams:
    """Gradients of a scalar loss w.r.t. every weight, masks replayed from tape."""
    op = tape.operator
    keep = 1.0 - spec.dropout
    grads = params.zeros_like()
    d_hidden = [None] * len(tape.hiddens)

    def accumulate(idx, val):
        if d_hidden[idx] is None:
            d_hidden[idx] = val
        else:
            d_hidden[idx] = d_hidden[idx] + val

    # head
    head = tape.head
    g = np.asarray(grad_logits, dtype=np.float64)
    if g.shape != tape.logits.shape:
        raise ShapeError("grad_logits shape mismatch")
    if head.p_eff:
        g = spmm(op, g)
    if head.preact is None:
        w_c = params.classifier_out
        for i, (b, r0, r1) in enumerate(_block_row_ranges(head.dropped)):
            grads.classifier_out[r0:r1] = np.asarray(b.T @ g)
            if head.hidden_indices[i] is not None:
                d_t = g @ w_c[r0:r1].T
                accumulate(
                    head.hidden_indices[i],
                    _mask_backward(d_t, head.mask_kinds[i], head.masks[i], keep),
                )
    else:
        grads.classifier_out = head.post.T @ g
        d_post = g @ params.classifier_out.T
        d_pre = d_post * activation_grad(head.preact, spec.g_act)
        w_n = params.classifier_in
        for i, (b, r0, r1) in enumerate(_block_row_ranges(head.dropped)):
            grads.classifier_in[r0:r1] = np.asarray(b.T @ d_pre)
            if head.hidden_indices[i] is not None:
                d_t = d_pre @ w_n[r0:r1].T
                accumulate(
                    head.hidden_indices[i],
                    _mask_backward(d_t, head.mask_kinds[i], head.masks[i], keep),
                )

    # hidden layers, top down
    for l in reversed(range(spec.depth)):
        rec = tape.layers[l]
        d_h = d_hidden[l + 1]
        if d_h is None:
            d_h = np.zeros_like(rec.preact)
        d_pre = d_h * activation_grad(rec.preact, spec.f_act)
        d_v = spmm(op, d_pre) if rec.spmm_after else d_pre
        w = params.hidden_weights[l]
        d_w = grads.hidden_weights[l]
        if spec.arch == "truncated_krylov":
            d_base = None
            for i, (b, r0, r1) in enumerate(
                reversed(list(_block_row_ranges(rec.dropped)))
            ):
                d_w[r0:r1] = np.asarray(b.T @ d_v)
                if rec.base_hidden is not None:
                    d_t = d_v @ w[r0:r1].T
                    d_u = _mask_backward(
                        d_t,
                        rec.mask_kinds[spec.n_blocks - 1 - i],
                        rec.masks[spec.n_blocks - 1 - i],
                        keep,
                    )
                    d_base = d_u if d_base is None else spmm(op, d_base) + d_u
            if rec.base_hidden is not None:
                accumulate(rec.base_hidden, d_base)
        else:
            for i, (b, r0, r1) in enumerate(_block_row_ranges(rec.dropped)):
                d_w[r0:r1] = np.asarray(b.T @ d_v)
                if rec.hidden_indices[i] is not None:
                    d_t = d_v @ w[r0:r1].T
                    accumulate(
                        rec.hidden_indices[i],
                        _mask_backward(d_t, rec.mask_kinds[i], rec.masks[i], keep),
                    )
    return grads


# --------------------------------------------------------------------------
# linear-snowball collapse
# --------------------------------------------------------------------------


def collapse_linear_snowball(params: ModelParams, op, x, spec: ModelSpec):
    """Fold a linear snowball net into one block Krylov product.

    For identity activations the stacked hidden blocks satisfy
    [H_0, ..., H_n] = K_{n+1}(L, X) T where T is assembled from the
    row-blocks of the layer weights: writing W_l = [W_l^(0); ...; W_l^(l)]
    (one row-block per stacked input), the coefficient of L^{j+1} X in
    H_{l+1} is the sum over i >= j of (coefficient of L^j X in H_i) W_l^(i).
    Returns (K, W_eq) with W_eq = T W_n, so that the snowball logits equal
    L^p K W_eq W_C.
    """
    if spec.arch != "snowball":
        raise NotLinear("collapse requires the snowball architecture")
    if spec.f_act != "identity":
        raise NotLinear("collapse requires f = identity")
    if not spec.identity_classifier and spec.g_act != "identity":
        raise NotLinear("collapse requires g = identity")
    op = _unwrap_operator(op)
    x = _as_block(x)
    if scipy.sparse.issparse(x):
        x = x.toarray()
    n = spec.depth
    f0 = spec.input_dim
    widths = spec.all_widths

    # coef[l][j] holds the F0 x F_l coefficient of L^j X inside H_l
    coef: list[dict[int, np.ndarray]] = [{0: np.eye(f0)}]
    for l in range(n):
        w = params.hidden_weights[l]
        splits = np.cumsum(widths[: l + 1])[:-1]
        row_blocks = np.vsplit(w, splits)
        nxt: dict[int, np.ndarray] = {}
        for j in range(l + 1):
            acc = None
            for i in range(j, l + 1):
                if j in coef[i]:
                    term = coef[i][j] @ row_blocks[i]
                    acc = term if acc is None else acc + term
            if acc is not None:
                nxt[j + 1] = acc
        coef.append(nxt)

    total = sum(widths)
    t = np.zeros(((n + 1) * f0, total))
    c0 = 0
    for l in range(n + 1):
        c1 = c0 + widths[l]
        for j, a in coef[l].items():
            t[j * f0 : (j + 1) * f0, c0:c1] = a
        c0 = c1

    w_eq = t if params.classifier_in is None else t @ params.classifier_in
    k = block_krylov_matrix(op, x, n + 1)
    return k, w_eq


# --------------------------------------------------------------------------
# parameter vector helpers (optimizers, finite differences)
# --------------------------------------------------------------------------


def flatten_params(params: ModelParams) -> np.ndarray:
    return np.concatenate([w.ravel() for _, w in params.entries()])


def unflatten_params(vec: np.ndarray, template: ModelParams) -> ModelParams:
    out = template.zeros_like()
    pos = 0
    arrays = []
    for _, w in template.entries():
        arrays.append(vec[pos : pos + w.size].reshape(w.shape).astype(np.float64))
        pos += w.size
    if pos != vec.size:
        raise ShapeError("parameter vector length mismatch")
    it = iter(arrays)
    out.hidden_weights = [next(it) for _ in template.hidden_weights]
    out.classifier_in = next(it) if template.classifier_in is not None else None
    out.classifier_out = next(it)
    return out


# --------------------------------------------------------------------------
# checkpoint I/O: u64 header length, JSON header with shapes, then the
# weight blobs as little-endian float64, row-major, in header order
# --------------------------------------------------------------------------


def save_params(path, params: ModelParams) -> None:
    entries = [
        {"name": name, "rows": int(w.shape[0]), "cols": int(w.shape[1])}
        for name, w in params.entries()
    ]
    header = json.dumps({"entries": entries}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for _, w in params.entries():
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())


def load_params(path) -> ModelParams:
    with open(path, "rb") as fh:
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        hidden = []
        cls_in = None
        cls_out = None
        for entry in header["entries"]:
            count = entry["rows"] * entry["cols"]
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise ShapeError(f"checkpoint truncated at {entry['name']}")
            w = np.frombuffer(raw, dtype="<f8").reshape(entry["rows"], entry["cols"])
            w = w.astype(np.float64)
            if entry["name"].startswith("hidden_"):
                hidden.append(w)
            elif entry["name"] == "classifier_in":
                cls_in = w
            elif entry["name"] == "classifier_out":
                cls_out = w
            else:
                raise ShapeError(f"unknown checkpoint entry {entry['name']!r}")
    if cls_out is None:
        raise ShapeError("checkpoint missing classifier_out")
    return ModelParams(hidden, cls_in, cls_out)


def extract_features(op, x, params: ModelParams, spec: ModelSpec) -> np.ndarray:
    """Final extracted features C (the classifier input), evaluation mode."""
    _, tape = forward(op, x, params, spec, rng=None)
    head = tape.head
    if head.post is not None:
        return head.post
    parts = [
        b.toarray() if scipy.sparse.issparse(b) else np.asarray(b)
        for b in head.dropped
    ]
    return np.hstack(parts)
