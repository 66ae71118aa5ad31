"""
Character-level LSTM language model, written directly against numpy.

One LSTM layer feeds a dense softmax layer that predicts the next character.
Every sequence is wrapped in START ... END tokens, so the model assigns a
likelihood to the whole string including its length. Training uses exact
backpropagation through time, RMSprop, inverted dropout on the LSTM output,
global-norm gradient clipping and early stopping on a validation split.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_softmax

from .errors import ConfigError, DimensionError, TrainingError, VocabularyError
from .logging_setup import get_logger
from .textformat import LineReader, format_array

logger = get_logger("charlm")

UNKNOWN_CHAR = "?"
UNKNOWN_INDEX, START_INDEX, END_INDEX = 0, 1, 2
RESERVED_COUNT = 3
MAX_SEQUENCE_CHARS = 253

GATES = ("i", "f", "o", "g")
PARAM_NAMES = (
    [f"W_{gate}" for gate in GATES]
    + [f"U_{gate}" for gate in GATES]
    + [f"b_{gate}" for gate in GATES]
    + ["W_y", "b_y"]
)

INIT_SCALE = 0.08
FORGET_BIAS = 1.0
SCORE_BATCH_SIZE = 256

CHARLM_HEADER = "DGA-CHARLM v1"


@dataclass(frozen=True)
class CharVocab:
    """Reserved symbols ``?``, START, END at 0, 1, 2; then sorted corpus characters."""

    chars: Tuple[str, ...]
    char_to_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars) or UNKNOWN_CHAR in self.chars:
            raise VocabularyError("vocabulary characters must be distinct and exclude '?'")
        mapping = {UNKNOWN_CHAR: UNKNOWN_INDEX}
        mapping.update({ch: RESERVED_COUNT + i for i, ch in enumerate(self.chars)})
        object.__setattr__(self, "char_to_index", mapping)

    @property
    def size(self) -> int:
        return len(self.chars) + RESERVED_COUNT


def build_vocab(corpus: Sequence[str]) -> CharVocab:
    """Sorted distinct characters of the corpus plus the three reserved symbols."""
    if not corpus:
        raise VocabularyError("cannot build a vocabulary from an empty corpus")
    chars = set()
    for s in corpus:
        chars.update(s)
    chars.discard(UNKNOWN_CHAR)
    return CharVocab(tuple(sorted(chars)))


def encode(s: str, vocab: CharVocab) -> np.ndarray:
    """``[START] + character indices + [END]``; unknown characters map to ``?``."""
    lookup = vocab.char_to_index
    indices = [START_INDEX] + [lookup.get(ch, UNKNOWN_INDEX) for ch in s] + [END_INDEX]
    return np.array(indices, dtype=np.int64)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    hidden_size: int = 64
    dropout_rate: float = 0.2
    learning_rate: float = 1e-3
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    batch_size: int = 64
    early_stopping_patience: int = 5
    validation_fraction: float = 0.1
    grad_clip: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.hidden_size < 1:
            raise ConfigError("hidden_size must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must be in [0, 1)")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must be in (0, 1)")
        if self.learning_rate <= 0 or self.rmsprop_epsilon <= 0:
            raise ConfigError("learning_rate and rmsprop_epsilon must be positive")
        if not 0.0 <= self.rmsprop_decay < 1.0:
            raise ConfigError("rmsprop_decay must be in [0, 1)")
        if self.batch_size < 1 or self.early_stopping_patience < 1:
            raise ConfigError("batch_size and early_stopping_patience must be >= 1")
        if self.grad_clip <= 0:
            raise ConfigError("grad_clip must be positive")


def param_shapes(vocab_size: int, hidden_size: int) -> Dict[str, Tuple[int, ...]]:
    H, V = hidden_size, vocab_size
    shapes = {}
    for gate in GATES:
        shapes[f"W_{gate}"] = (H, V)
        shapes[f"U_{gate}"] = (H, H)
        shapes[f"b_{gate}"] = (H,)
    shapes["W_y"] = (V, H)
    shapes["b_y"] = (V,)
    return shapes


@dataclass(eq=False)
class LstmLangModel:
    """Vocabulary, hidden size and the named parameter arrays of one model."""

    vocab: CharVocab
    hidden_size: int
    params: Dict[str, np.ndarray]

    def __post_init__(self):
        for name, shape in self.param_shapes().items():
            if name not in self.params:
                raise DimensionError(f"missing parameter {name}")
            if self.params[name].shape != shape:
                raise DimensionError(
                    f"{name} has shape {self.params[name].shape}, expected {shape}"
                )

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return param_shapes(self.vocab.size, self.hidden_size)

    @classmethod
    def zeros(cls, vocab: CharVocab, hidden_size: int) -> "LstmLangModel":
        """All-zero parameters: every step predicts the uniform distribution."""
        shapes = param_shapes(vocab.size, hidden_size)
        return cls(vocab, hidden_size, {name: np.zeros(shapes[name]) for name in PARAM_NAMES})

    @classmethod
    def initialize(
        cls, vocab: CharVocab, hidden_size: int, rng: np.random.Generator
    ) -> "LstmLangModel":
        """Uniform(-0.08, 0.08) weights, zero biases except the forget gate at +1."""
        model = cls.zeros(vocab, hidden_size)
        for name in PARAM_NAMES:
            if not name.startswith("b_"):
                shape = model.params[name].shape
                model.params[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        model.params["b_f"] = np.full(hidden_size, FORGET_BIAS)
        return model

    def copy(self) -> "LstmLangModel":
        return LstmLangModel(
            self.vocab, self.hidden_size, {k: v.copy() for k, v in self.params.items()}
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values())


class Batch(NamedTuple):
    """Padded inputs/targets (B, T) and a 0/1 mask of real target positions."""

    inputs: np.ndarray
    targets: np.ndarray
    mask: np.ndarray


def make_batch(sequences: Sequence[np.ndarray]) -> Batch:
    """Pad encoded sequences; padding positions carry mask 0 and index 0."""
    steps = max(len(seq) for seq in sequences) - 1
    B = len(sequences)
    inputs = np.zeros((B, steps), dtype=np.int64)
    targets = np.zeros((B, steps), dtype=np.int64)
    mask = np.zeros((B, steps))
    for row, seq in enumerate(sequences):
        n = len(seq) - 1
        inputs[row, :n] = seq[:-1]
        targets[row, :n] = seq[1:]
        mask[row, :n] = 1.0
    return Batch(inputs, targets, mask)


class _StepCache(NamedTuple):
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray
    h_out: np.ndarray


def _stacked(params: Dict[str, np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    W = np.concatenate([params[f"W_{gate}"] for gate in GATES])
    U = np.concatenate([params[f"U_{gate}"] for gate in GATES])
    b = np.concatenate([params[f"b_{gate}"] for gate in GATES])
    return W, U, b


def _run(
    model: LstmLangModel,
    inputs: np.ndarray,
    dropout_mask: Optional[np.ndarray] = None,
    keep_cache: bool = False,
) -> Tuple[np.ndarray, List[_StepCache]]:
    """Log-probabilities (T, B, V) for a padded input batch."""
    W, U, b = _stacked(model.params)
    W_y, b_y = model.params["W_y"], model.params["b_y"]
    H = model.hidden_size
    B, T = inputs.shape

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    log_probs = np.empty((T, B, model.vocab.size))
    cache: List[_StepCache] = []
    for t in range(T):
        x = inputs[:, t]
        z = W[:, x].T + h @ U.T + b
        i = expit(z[:, :H])
        f = expit(z[:, H : 2 * H])
        o = expit(z[:, 2 * H : 3 * H])
        g = np.tanh(z[:, 3 * H :])
        h_prev, c_prev = h, c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        h_out = h * dropout_mask[t] if dropout_mask is not None else h
        log_probs[t] = log_softmax(h_out @ W_y.T + b_y, axis=1)
        if keep_cache:
            cache.append(_StepCache(x, h_prev, c_prev, i, f, o, g, tanh_c, h_out))
    return log_probs, cache


def _check_indices(model: LstmLangModel, seq: np.ndarray) -> None:
    if seq.size and (seq.min() < 0 or seq.max() >= model.vocab.size):
        raise VocabularyError(f"index out of range for vocabulary of size {model.vocab.size}")


def forward(model: LstmLangModel, seq: Sequence[int]) -> np.ndarray:
    """
    Next-character distributions, shape (len(seq) - 1, V).

    Row t is the model's distribution for seq[t + 1] given seq[0..t], starting
    from zero hidden and cell state.
    """
    seq = np.asarray(seq, dtype=np.int64)
    _check_indices(model, seq)
    if len(seq) < 2:
        return np.empty((0, model.vocab.size))
    log_probs, _ = _run(model, seq[None, :-1])
    return np.exp(log_probs[:, 0, :])


def sequence_log_likelihood(model: LstmLangModel, s: str) -> float:
    """ln p(s) including the END prediction; always <= 0."""
    seq = encode(s, model.vocab)
    log_probs, _ = _run(model, seq[None, :-1])
    return math.fsum(float(log_probs[t, 0, seq[t + 1]]) for t in range(len(seq) - 1))


def score_strings(
    model: LstmLangModel, strings: Sequence[str], batch_size: int = SCORE_BATCH_SIZE
) -> np.ndarray:
    """Batched ``sequence_log_likelihood`` over many strings."""
    out = np.empty(len(strings))
    for start in range(0, len(strings), batch_size):
        chunk = [encode(s, model.vocab) for s in strings[start : start + batch_size]]
        batch = make_batch(chunk)
        log_probs, _ = _run(model, batch.inputs)
        picked = np.take_along_axis(
            log_probs, batch.targets.T[:, :, None], axis=2
        )[:, :, 0].T
        out[start : start + len(chunk)] = np.sum(picked * batch.mask, axis=1)
    return out


def loss_and_gradient(
    model: LstmLangModel, batch: Batch, dropout_mask: Optional[np.ndarray] = None
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Masked mean cross-entropy over target positions and its exact gradient."""
    grads = {name: np.zeros_like(value) for name, value in model.params.items()}
    count = batch.mask.sum()
    if count == 0:
        return 0.0, grads

    log_probs, cache = _run(model, batch.inputs, dropout_mask, keep_cache=True)
    B, T = batch.inputs.shape
    H = model.hidden_size
    rows = np.arange(B)
    weights = batch.mask / count

    picked = log_probs[np.arange(T)[:, None], rows[None, :], batch.targets.T]
    loss = float(-np.sum(picked * weights.T))

    _, U, _ = _stacked(model.params)
    W_y = model.params["W_y"]
    dW_T = np.zeros((model.vocab.size, 4 * H))
    dU = np.zeros((4 * H, H))
    db = np.zeros(4 * H)
    dW_y = grads["W_y"]
    db_y = grads["b_y"]
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))

    for t in reversed(range(T)):
        step = cache[t]
        dlogits = np.exp(log_probs[t])
        dlogits[rows, batch.targets[:, t]] -= 1.0
        dlogits *= weights[:, t][:, None]

        dW_y += dlogits.T @ step.h_out
        db_y += dlogits.sum(axis=0)

        dh = dlogits @ W_y
        if dropout_mask is not None:
            dh *= dropout_mask[t]
        dh += dh_next

        do = dh * step.tanh_c
        dc = dh * step.o * (1.0 - step.tanh_c**2) + dc_next
        di = dc * step.g
        dg = dc * step.i
        df = dc * step.c_prev
        dz = np.concatenate(
            [
                di * step.i * (1.0 - step.i),
                df * step.f * (1.0 - step.f),
                do * step.o * (1.0 - step.o),
                dg * (1.0 - step.g**2),
            ],
            axis=1,
        )

        np.add.at(dW_T, step.x, dz)
        dU += dz.T @ step.h_prev
        db += dz.sum(axis=0)
        dh_next = dz @ U
        dc_next = dc * step.f

    dW = dW_T.T
    for k, gate in enumerate(GATES):
        rows_k = slice(k * H, (k + 1) * H)
        grads[f"W_{gate}"] = dW[rows_k].copy()
        grads[f"U_{gate}"] = dU[rows_k].copy()
        grads[f"b_{gate}"] = db[rows_k].copy()
    return loss, grads


def gradient(
    model: LstmLangModel, batch: Batch, dropout_mask: Optional[np.ndarray] = None
) -> Dict[str, np.ndarray]:
    """Exact gradient of the masked mean cross-entropy of ``batch``."""
    return loss_and_gradient(model, batch, dropout_mask)[1]


def batch_loss(model: LstmLangModel, batch: Batch) -> float:
    """Masked mean cross-entropy of ``batch`` with dropout off."""
    count = batch.mask.sum()
    if count == 0:
        return 0.0
    log_probs, _ = _run(model, batch.inputs)
    T, B = batch.inputs.shape[1], batch.inputs.shape[0]
    picked = log_probs[np.arange(T)[:, None], np.arange(B)[None, :], batch.targets.T]
    return float(-np.sum(picked * batch.mask.T) / count)


def mean_cross_entropy(
    model: LstmLangModel, sequences: Sequence[np.ndarray], batch_size: int = SCORE_BATCH_SIZE
) -> float:
    """Average per-character cross-entropy over encoded sequences."""
    total, count = 0.0, 0.0
    for start in range(0, len(sequences), batch_size):
        batch = make_batch(sequences[start : start + batch_size])
        n = batch.mask.sum()
        total += batch_loss(model, batch) * n
        count += n
    return total / count if count else 0.0


def clip_gradients(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """Scale ``grads`` in place so their global L2 norm is at most ``max_norm``."""
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class TrainingHistory:
    train_losses: List[float] = field(default_factory=list)
    validation_losses: List[float] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def epochs_run(self) -> int:
        return len(self.train_losses)

    @property
    def best_validation_loss(self) -> float:
        if not self.validation_losses:
            return float("nan")
        return self.validation_losses[self.best_epoch - 1]


def _split(n: int, fraction: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(n)
    if n < 2:
        return order, order
    n_val = min(max(1, int(round(n * fraction))), n - 1)
    return order[n_val:], order[:n_val]


def train_with_history(
    corpus: Sequence[str],
    config: TrainConfig,
    vocab: Optional[CharVocab] = None,
    name: str = "charlm",
) -> Tuple[LstmLangModel, TrainingHistory]:
    """
    Fit a model on ``corpus`` and return the parameters with the best
    validation loss together with the per-epoch losses.
    """
    if not corpus:
        raise TrainingError("cannot train on an empty corpus")
    too_long = [s for s in corpus if len(s) > MAX_SEQUENCE_CHARS]
    if too_long:
        raise DimensionError(
            f"{len(too_long)} training strings exceed {MAX_SEQUENCE_CHARS} characters"
        )
    vocab = vocab or build_vocab(corpus)

    rng = np.random.default_rng(config.seed)
    model = LstmLangModel.initialize(vocab, config.hidden_size, rng)
    sequences = [encode(s, vocab) for s in corpus]
    train_idx, val_idx = _split(len(sequences), config.validation_fraction, rng)
    val_sequences = [sequences[k] for k in val_idx]

    cache = {k: np.zeros_like(v) for k, v in model.params.items()}
    history = TrainingHistory()
    best = model.copy()
    best_loss = math.inf
    stale = 0
    keep = 1.0 - config.dropout_rate

    logger.info(
        f"Training {name}: {len(train_idx)} train / {len(val_idx)} validation strings, "
        f"V={vocab.size}, H={config.hidden_size}"
    )
    for epoch in range(1, config.epochs + 1):
        order = train_idx[rng.permutation(len(train_idx))]
        total, count = 0.0, 0.0
        for start in range(0, len(order), config.batch_size):
            batch = make_batch([sequences[k] for k in order[start : start + config.batch_size]])
            dropout_mask = None
            if config.dropout_rate > 0:
                shape = (batch.inputs.shape[1], batch.inputs.shape[0], config.hidden_size)
                dropout_mask = (rng.random(shape) < keep) / keep

            loss, grads = loss_and_gradient(model, batch, dropout_mask)
            if not math.isfinite(loss):
                logger.error(f"{name}: loss diverged at epoch {epoch}")
                raise TrainingError("non-finite training loss", epoch)
            clip_gradients(grads, config.grad_clip)

            for key, grad in grads.items():
                cache[key] *= config.rmsprop_decay
                cache[key] += (1.0 - config.rmsprop_decay) * grad * grad
                model.params[key] -= (
                    config.learning_rate * grad / (np.sqrt(cache[key]) + config.rmsprop_epsilon)
                )
            n = batch.mask.sum()
            total += loss * n
            count += n

        train_loss = total / count if count else 0.0
        val_loss = mean_cross_entropy(model, val_sequences)
        if not (math.isfinite(val_loss) and model.is_finite()):
            logger.error(f"{name}: validation loss diverged at epoch {epoch}")
            raise TrainingError("non-finite validation loss", epoch)

        history.train_losses.append(train_loss)
        history.validation_losses.append(val_loss)
        logger.info(f"{name} epoch {epoch}: train {train_loss:.4f}, validation {val_loss:.4f}")

        if val_loss < best_loss:
            best_loss, best, stale = val_loss, model.copy(), 0
            history.best_epoch = epoch
        else:
            stale += 1
            if stale >= config.early_stopping_patience:
                logger.info(f"{name}: early stopping after epoch {epoch}")
                break

    return best, history


def train(
    corpus: Sequence[str], config: TrainConfig, vocab: Optional[CharVocab] = None
) -> LstmLangModel:
    """Fit a model on ``corpus``; see ``train_with_history``."""
    return train_with_history(corpus, config, vocab)[0]


def model_to_lines(model: LstmLangModel) -> List[str]:
    codepoints = " ".join(str(ord(ch)) for ch in model.vocab.chars)
    lines = [
        CHARLM_HEADER,
        f"vocab {len(model.vocab.chars)} {codepoints}".rstrip(),
        f"hidden_size {model.hidden_size}",
    ]
    for name in PARAM_NAMES:
        lines.extend(format_array(name, model.params[name]))
    lines.append("end")
    return lines


def model_from_lines(reader: LineReader) -> LstmLangModel:
    reader.expect(CHARLM_HEADER)
    fields = reader.keyword("vocab")
    try:
        n_chars = int(fields[0])
        chars = tuple(chr(int(cp)) for cp in fields[1:])
    except (IndexError, ValueError):
        raise reader.error("malformed vocab line") from None
    if len(chars) != n_chars:
        raise reader.error(f"vocab declares {n_chars} characters, lists {len(chars)}")
    try:
        vocab = CharVocab(chars)
    except VocabularyError as exc:
        raise reader.error(str(exc)) from None

    hidden_size = reader.int_field("hidden_size")
    if hidden_size < 1:
        raise reader.error("hidden_size must be >= 1")
    shapes = param_shapes(vocab.size, hidden_size)
    params = {name: reader.array(name, shapes[name]) for name in PARAM_NAMES}
    reader.expect("end")
    return LstmLangModel(vocab, hidden_size, params)
