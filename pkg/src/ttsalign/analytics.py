"""Speaker-count estimation and gender classification over voice embeddings.

Embeddings are 256-dimensional vectors computed by an external speaker
network and ingested from text files; this module never touches audio.
Gender uses an RBF-kernel SVM (gamma=0.01, C=100) trained with simplified
sequential minimal optimization; speaker counts use greedy leader
clustering on cosine similarity, which is deterministic given input order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmbeddingError
from .segmenter import Segment

logger = logging.getLogger(__name__)

EMBEDDING_DIM = 256

MALE, FEMALE = "male", "female"
_LABEL_SIGN = {MALE: 1.0, FEMALE: -1.0}


@dataclass(frozen=True)
class Embedding:
    vector: np.ndarray
    source_id: str
    index: int

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        object.__setattr__(self, "vector", vec)
        if vec.shape != (EMBEDDING_DIM,):
            raise EmbeddingError(f"embedding must have {EMBEDDING_DIM} dims, got {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise EmbeddingError("embedding contains non-finite values")
        if not np.any(vec):
            raise EmbeddingError("embedding has zero norm")


def load_embeddings(path: str | Path) -> list[Embedding]:
    """Read `source_id<TAB>index<TAB>256 space-separated floats` lines."""
    path = Path(path)
    out: list[Embedding] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise EmbeddingError(f"{path}: line {lineno}: expected 3 tab-separated fields")
        source_id, index_str, vec_str = fields
        try:
            index = int(index_str)
            values = np.array([float(v) for v in vec_str.split()], dtype=np.float64)
        except ValueError as exc:
            raise EmbeddingError(f"{path}: line {lineno}: {exc}") from exc
        if values.shape != (EMBEDDING_DIM,):
            raise EmbeddingError(
                f"{path}: line {lineno}: expected {EMBEDDING_DIM} floats, got {len(values)}"
            )
        if not np.all(np.isfinite(values)):
            raise EmbeddingError(f"{path}: line {lineno}: non-finite value")
        out.append(Embedding(values, source_id, index))
    return out


def save_embeddings(embeddings: list[Embedding], path: str | Path) -> None:
    lines = [
        "\t".join(
            [e.source_id, str(e.index), " ".join(repr(float(v)) for v in e.vector)]
        )
        for e in embeddings
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise EmbeddingError(f"kernel dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, dim)
    alphas: np.ndarray  # signed by label: alpha_i * y_i
    bias: float
    gamma: float = 0.01
    C: float = 100.0
    objective_history: list[float] = field(default_factory=list, repr=False)

    def decision_value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        sq = np.sum((self.support_vectors - x) ** 2, axis=1)
        return float(np.dot(self.alphas, np.exp(-self.gamma * sq)) + self.bias)


def _kernel_matrix(x: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.sum(x ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    return np.exp(-gamma * np.maximum(d2, 0.0))


def dual_objective(kernel: np.ndarray, y: np.ndarray, alphas: np.ndarray) -> float:
    """SVM dual: sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ kernel @ ay)


def train_svm(
    X: np.ndarray | list[Embedding],
    y: list[str] | np.ndarray,
    gamma: float = 0.01,
    C: float = 100.0,
    tol: float = 1e-3,
    max_quiet_passes: int = 10,
    seed: int = 0,
) -> SvmModel:
    """Simplified SMO: random-partner pairwise updates until a full pass
    changes nothing for `max_quiet_passes` consecutive passes.

    Labels are the strings "male"/"female"; both classes must be present.
    The per-pass dual objective is recorded on the returned model.
    """
    if isinstance(X, list) and X and isinstance(X[0], Embedding):
        X = np.stack([e.vector for e in X])
    X = np.asarray(X, dtype=np.float64)
    labels = list(y)
    unknown = sorted(set(labels) - set(_LABEL_SIGN))
    if unknown:
        raise EmbeddingError(f"unknown labels: {unknown}")
    signs = np.array([_LABEL_SIGN[v] for v in labels])
    if len(set(labels)) < 2:
        raise EmbeddingError("training data must contain both classes")
    n = len(X)
    if n < 2 or len(signs) != n:
        raise EmbeddingError("need at least 2 samples and matching label count")

    K = _kernel_matrix(X, gamma)
    alphas = np.zeros(n)
    b = 0.0
    rng = np.random.default_rng(seed)
    history: list[float] = []

    def f(i: int) -> float:
        return float(np.dot(alphas * signs, K[:, i]) + b)

    quiet = 0
    while quiet < max_quiet_passes:
        changed = 0
        for i in range(n):
            e_i = f(i) - signs[i]
            if (signs[i] * e_i < -tol and alphas[i] < C) or (
                signs[i] * e_i > tol and alphas[i] > 0
            ):
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                e_j = f(j) - signs[j]
                a_i_old, a_j_old = alphas[i], alphas[j]
                if signs[i] != signs[j]:
                    low = max(0.0, a_j_old - a_i_old)
                    high = min(C, C + a_j_old - a_i_old)
                else:
                    low = max(0.0, a_i_old + a_j_old - C)
                    high = min(C, a_i_old + a_j_old)
                if low == high:
                    continue
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0:
                    continue
                a_j = a_j_old - signs[j] * (e_i - e_j) / eta
                a_j = min(high, max(low, a_j))
                if abs(a_j - a_j_old) < 1e-5:
                    continue
                a_i = a_i_old + signs[i] * signs[j] * (a_j_old - a_j)
                alphas[i], alphas[j] = a_i, a_j
                b1 = b - e_i - signs[i] * (a_i - a_i_old) * K[i, i] \
                    - signs[j] * (a_j - a_j_old) * K[i, j]
                b2 = b - e_j - signs[i] * (a_i - a_i_old) * K[i, j] \
                    - signs[j] * (a_j - a_j_old) * K[j, j]
                if 0 < a_i < C:
                    b = b1
                elif 0 < a_j < C:
                    b = b2
                else:
                    b = (b1 + b2) / 2.0
                changed += 1
        history.append(dual_objective(K, signs, alphas))
        quiet = quiet + 1 if changed == 0 else 0

    keep = alphas > 1e-12
    return SvmModel(
        support_vectors=X[keep].copy(),
        alphas=(alphas * signs)[keep],
        bias=float(b),
        gamma=gamma,
        C=C,
        objective_history=history,
    )


def predict(model: SvmModel, x: np.ndarray | Embedding) -> str:
    """Label by the sign of the decision value; ties go to male (+1 side)."""
    if isinstance(x, Embedding):
        x = x.vector
    return MALE if model.decision_value(x) >= 0 else FEMALE


def gender_hours(
    segments: list[Segment], predictions: dict[tuple[str, int], str]
) -> tuple[float, float]:
    """(male_hours, female_hours) summed over kept segments."""
    male_s = 0.0
    female_s = 0.0
    for seg in segments:
        if seg.status != "kept":
            continue
        key = (seg.source_id, seg.fragment_index)
        if key not in predictions:
            raise EmbeddingError(f"no gender prediction for segment {key}")
        if predictions[key] == MALE:
            male_s += seg.duration
        else:
            female_s += seg.duration
    return male_s / 3600.0, female_s / 3600.0


def estimate_speakers(
    embeddings: list[Embedding], cos_threshold: float = 0.75
) -> tuple[int, list[int]]:
    """Greedy leader clustering on cosine similarity.

    Each embedding joins the first existing cluster whose centroid matches
    at cos >= threshold, else founds a new one. Centroids are running means
    of unit-normalized members, re-normalized after every update.
    """
    if not embeddings:
        raise EmbeddingError("need at least one embedding")
    sums: list[np.ndarray] = []
    counts: list[int] = []
    centroids: list[np.ndarray] = []
    assignments: list[int] = []
    for emb in embeddings:
        unit = emb.vector / np.linalg.norm(emb.vector)
        chosen = -1
        for c, centroid in enumerate(centroids):
            if float(np.dot(unit, centroid)) >= cos_threshold:
                chosen = c
                break
        if chosen < 0:
            sums.append(unit.copy())
            counts.append(1)
            centroids.append(unit.copy())
            assignments.append(len(centroids) - 1)
        else:
            sums[chosen] += unit
            counts[chosen] += 1
            mean = sums[chosen] / counts[chosen]
            norm = np.linalg.norm(mean)
            centroids[chosen] = mean / norm if norm > 0 else mean
            assignments.append(chosen)
    return len(centroids), assignments


def save_model(model: SvmModel, path: str | Path) -> None:
    """Text format: `gamma C bias` line, then `alpha v1 ... v256` per vector."""
    lines = [f"{float(model.gamma)!r} {float(model.C)!r} {float(model.bias)!r}"]
    for alpha, vec in zip(model.alphas, model.support_vectors):
        lines.append(" ".join([repr(float(alpha))] + [repr(float(v)) for v in vec]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SvmModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmbeddingError(f"{path}: empty model file")
    try:
        gamma, C, bias = (float(v) for v in lines[0].split())
    except ValueError as exc:
        raise EmbeddingError(f"{path}: line 1: {exc}") from exc
    alphas: list[float] = []
    vectors: list[np.ndarray] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        values = line.split()
        if len(values) != EMBEDDING_DIM + 1:
            raise EmbeddingError(
                f"{path}: line {lineno}: expected {EMBEDDING_DIM + 1} floats, got {len(values)}"
            )
        try:
            alphas.append(float(values[0]))
            vectors.append(np.array([float(v) for v in values[1:]], dtype=np.float64))
        except ValueError as exc:
            raise EmbeddingError(f"{path}: line {lineno}: {exc}") from exc
    if not vectors:
        raise EmbeddingError(f"{path}: model has no support vectors")
    return SvmModel(
        support_vectors=np.stack(vectors),
        alphas=np.array(alphas),
        bias=bias,
        gamma=gamma,
        C=C,
    )
