"""RBF-kernel SVM trained by sequential minimal optimization.

Binary machines solve the standard dual

    max  sum(a) - 0.5 * sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

by repeatedly optimizing the maximal violating pair of multipliers
analytically (two-variable subproblems) until the violating-pair gap drops
to tol, which bounds every KKT residual by tol under the final bias (the
average margin-exact bias over unbounded support vectors).  Pair steps are
budgeted at 10*n passes of n steps each; exceeding the budget raises
ConvergenceError with diagnostics.

Multiclass is one-vs-one (91 machines for 14 classes) with majority voting;
vote ties break by summed |decision| and then the lowest class id.  Grid
search runs stratified k-fold cross-validation over (C, gamma) and prefers
smaller C, then smaller gamma, on ties.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field

import numpy as np

# Grid from the practical-guide convention: coarse powers of two.
DEFAULT_C_VALUES = (2.0**-1, 2.0**1, 2.0**3, 2.0**5, 2.0**7)
DEFAULT_GAMMA_VALUES = (2.0**-9, 2.0**-7, 2.0**-5, 2.0**-3, 2.0**-1)

SVM_FORMAT = "hwr-svm/1"

_STEP_EPS = 1e-8       # curvature/objective margin below which a direction is flat
_SV_EPS = 1e-12        # alpha > this counts as a support vector


class TrainingError(RuntimeError):
    """Base class for SVM training failures."""


class ConvergenceError(TrainingError):
    """SMO exceeded its pass cap without satisfying the KKT conditions."""


class DegenerateDataError(TrainingError):
    """Training data admits no separating information (zero margin)."""


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"vector shapes differ: {x.shape} vs {y.shape}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    diff = x - y
    return float(np.exp(-gamma * (diff @ diff)))


def kernel_matrix(
    A: np.ndarray,
    B: np.ndarray,
    kernel: str = "rbf",
    gamma: float = 1.0,
    degree: int = 3,
    coef0: float = 0.0,
) -> np.ndarray:
    """Gram matrix K[i, j] = k(A[i], B[j]) for the four classic kernels."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"feature dims differ: {A.shape[1]} vs {B.shape[1]}")
    if kernel == "rbf":
        if gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {gamma}")
        sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == "linear":
        return A @ B.T
    if kernel == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    if kernel == "sigmoid":
        return np.tanh(gamma * (A @ B.T) + coef0)
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass
class BinarySvm:
    support_vectors: np.ndarray  # (s, m)
    dual_coef: np.ndarray        # (s,), alpha_i * y_i
    bias: float
    c: float
    gamma: float
    kernel: str = "rbf"
    degree: int = 3
    coef0: float = 0.0
    passes: int = 0              # SMO pair-step count, diagnostic only

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        K = kernel_matrix(self.support_vectors, X, self.kernel, self.gamma,
                          self.degree, self.coef0)
        return self.dual_coef @ K + self.bias


class _Smo:
    """State for one binary subproblem; K is the precomputed Gram matrix.

    Pair selection is the maximal-violating-pair rule: with lambda_i =
    y_i - raw_i (the bias that would put point i exactly on its margin),
    KKT holds within tol iff max(lambda over I_up) - min(lambda over I_low)
    <= tol, where I_up/I_low are the index sets whose multipliers can still
    move the functional margin up/down.  Selecting the argmax/argmin pair
    keeps every step bias-free and guarantees progress, which avoids the
    bias see-saw a single running threshold is prone to.
    """

    def __init__(self, K: np.ndarray, y: np.ndarray, c: float, tol: float):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = float(c)
        self.tol = float(tol)
        self.n = len(y)
        self.alphas = np.zeros(self.n)
        self.raw = np.zeros(self.n)  # sum_j alpha_j y_j K[i, j], no bias
        self.b = 0.0
        self._snap = 1e-12 * max(1.0, self.C)

    def _step(self, i1: int, i2: int) -> bool:
        """Jointly optimize the pair (i1, i2); returns False on no movement."""
        a1o, a2o = self.alphas[i1], self.alphas[i2]
        y1, y2 = self.y[i1], self.y[i2]
        s = y1 * y2
        if s > 0:
            L, H = max(0.0, a1o + a2o - self.C), min(self.C, a1o + a2o)
        else:
            L, H = max(0.0, a2o - a1o), min(self.C, self.C + a2o - a1o)
        if H <= L:
            return False
        k11, k22, k12 = self.K[i1, i1], self.K[i2, i2], self.K[i1, i2]
        eta = k11 + k22 - 2.0 * k12
        g1 = self.raw[i1] - y1
        g2 = self.raw[i2] - y2
        if eta > _STEP_EPS:
            a2 = a2o + y2 * (g1 - g2) / eta
            a2 = min(max(a2, L), H)
        else:
            # flat or concave direction: pick the better segment endpoint
            f1 = y1 * g1 - a1o * k11 - s * a2o * k12
            f2 = y2 * g2 - s * a1o * k12 - a2o * k22
            L1 = a1o + s * (a2o - L)
            H1 = a1o + s * (a2o - H)
            psi_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            psi_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if psi_l < psi_h - _STEP_EPS:
                a2 = L
            elif psi_h < psi_l - _STEP_EPS:
                a2 = H
            else:
                return False
        if a2 - a2o == 0.0:
            return False
        a1 = a1o + s * (a2o - a2)
        # snap to the box so bound states stay exact
        if a1 < self._snap:
            a2 += s * a1
            a1 = 0.0
        elif a1 > self.C - self._snap:
            a2 += s * (a1 - self.C)
            a1 = self.C
        if a2 < self._snap:
            a2 = 0.0
        elif a2 > self.C - self._snap:
            a2 = self.C
        d1 = y1 * (a1 - a1o)
        d2 = y2 * (a2 - a2o)
        if d1 == 0.0 and d2 == 0.0:
            return False
        self.raw += d1 * self.K[i1] + d2 * self.K[i2]
        self.alphas[i1] = a1
        self.alphas[i2] = a2
        return True

    def _select(self) -> tuple[int, int, float]:
        """Maximal violating pair and the current violation gap."""
        lam = self.y - self.raw
        pos = self.y > 0
        movable_up = self.alphas < self.C
        movable_dn = self.alphas > 0.0
        up = (pos & movable_up) | (~pos & movable_dn)
        low = (pos & movable_dn) | (~pos & movable_up)
        if not up.any() or not low.any():
            return -1, -1, -np.inf
        lam_up = np.where(up, lam, -np.inf)
        lam_low = np.where(low, lam, np.inf)
        i = int(np.argmax(lam_up))
        j = int(np.argmin(lam_low))
        return i, j, float(lam_up[i] - lam_low[j])

    def solve(self, max_iter: int) -> int:
        iterations = 0
        while True:
            i, j, gap = self._select()
            if gap <= self.tol:
                break
            iterations += 1
            if iterations > max_iter:
                raise ConvergenceError(
                    f"SMO did not converge within {max_iter} pair steps "
                    f"(n={self.n}, C={self.C}): KKT gap {gap:.3e} > tol {self.tol:.0e}"
                )
            if not self._step(i, j):
                raise ConvergenceError(
                    f"SMO stalled after {iterations} pair steps "
                    f"(n={self.n}, C={self.C}): KKT gap {gap:.3e} > tol {self.tol:.0e} "
                    f"but pair ({i}, {j}) admits no progress"
                )
        # bias: average the margin-exact bias over unbounded support vectors,
        # falling back to the midpoint of the feasible interval
        lam = self.y - self.raw
        free = (self.alphas > 0.0) & (self.alphas < self.C)
        if free.any():
            self.b = float(lam[free].mean())
        else:
            i, j, _ = self._select()
            if i < 0:
                self.b = 0.0
            else:
                self.b = 0.5 * float(lam[i] + lam[j])
        return iterations


def smo_train(
    X: np.ndarray,
    y: np.ndarray,
    c: float,
    gamma: float = 1.0,
    tol: float = 1e-3,
    kernel: str = "rbf",
    degree: int = 3,
    coef0: float = 0.0,
    max_passes: int | None = None,
) -> BinarySvm:
    """Train one binary machine on labels in {-1, +1}.

    One "pass" budgets n pair steps; the default cap of 10*n passes therefore
    allows 10*n^2 pair optimizations before ConvergenceError.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"labels have shape {y.shape}, expected ({X.shape[0]},)")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if X.shape[0] < 2 or len(np.unique(y)) < 2:
        raise TrainingError("training needs at least 2 samples covering both classes")
    if c <= 0:
        raise ValueError(f"C must be > 0, got {c}")
    n = X.shape[0]
    K = kernel_matrix(X, X, kernel, gamma, degree, coef0)
    solver = _Smo(K, y, c, tol)
    iterations = solver.solve((max_passes if max_passes is not None else 10 * n) * n)
    decision = solver.raw + solver.b
    if float(decision.max() - decision.min()) < 1e-9:
        raise DegenerateDataError(
            "decision function is constant over the training data (zero margin); "
            "inputs carry no separating information"
        )
    sv = solver.alphas > _SV_EPS
    return BinarySvm(
        support_vectors=X[sv].copy(),
        dual_coef=(solver.alphas * y)[sv],
        bias=solver.b,
        c=float(c),
        gamma=float(gamma),
        kernel=kernel,
        degree=degree,
        coef0=coef0,
        passes=iterations,
    )


def dual_objective(machine_alphas: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """Value of the SVM dual at the given multipliers."""
    a = np.asarray(machine_alphas, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(a.sum() - 0.5 * (a * y) @ K @ (a * y))


@dataclass
class SvmModel:
    classes: list[int]
    machines: dict[tuple[int, int], BinarySvm]
    c: float
    gamma: float
    kernel: str = "rbf"

    def predict(self, x: np.ndarray) -> int:
        return ovo_predict(self, x)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.zeros((X.shape[0], len(self.classes)))
        magnitude = np.zeros_like(votes)
        index = {cls: i for i, cls in enumerate(self.classes)}
        for (a, b), machine in self.machines.items():
            f = machine.decision(X)
            wins_a = f > 0.0
            ia, ib = index[a], index[b]
            votes[wins_a, ia] += 1
            votes[~wins_a, ib] += 1
            magnitude[wins_a, ia] += np.abs(f[wins_a])
            magnitude[~wins_a, ib] += np.abs(f[~wins_a])
        # ranking: votes, then summed |decision|, then lowest class id
        out = np.empty(X.shape[0], dtype=np.intp)
        for i in range(X.shape[0]):
            best = min(
                range(len(self.classes)),
                key=lambda j: (-votes[i, j], -magnitude[i, j], self.classes[j]),
            )
            out[i] = self.classes[best]
        return out

    def save(self, path: str | os.PathLike) -> None:
        doc = {
            "format": SVM_FORMAT,
            "classes": list(self.classes),
            "c": self.c,
            "gamma": self.gamma,
            "kernel": self.kernel,
            "machines": [
                {
                    "pair": [a, b],
                    "support_vectors": m.support_vectors.ravel().tolist(),
                    "n_support": int(m.support_vectors.shape[0]),
                    "dim": int(m.support_vectors.shape[1]),
                    "dual_coef": m.dual_coef.tolist(),
                    "bias": m.bias,
                }
                for (a, b), m in sorted(self.machines.items())
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SvmModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != SVM_FORMAT:
            raise ValueError(f"not an SVM model file: format {doc.get('format')!r}")
        machines = {}
        for rec in doc["machines"]:
            a, b = rec["pair"]
            machines[(a, b)] = BinarySvm(
                support_vectors=np.array(rec["support_vectors"], dtype=np.float64).reshape(
                    rec["n_support"], rec["dim"]
                ),
                dual_coef=np.array(rec["dual_coef"], dtype=np.float64),
                bias=float(rec["bias"]),
                c=float(doc["c"]),
                gamma=float(doc["gamma"]),
                kernel=doc["kernel"],
            )
        return cls(
            classes=[int(c) for c in doc["classes"]],
            machines=machines,
            c=float(doc["c"]),
            gamma=float(doc["gamma"]),
            kernel=doc["kernel"],
        )


def ovo_train(
    X: np.ndarray,
    labels: np.ndarray,
    c: float,
    gamma: float,
    tol: float = 1e-3,
    kernel: str = "rbf",
    classes: list[int] | None = None,
) -> SvmModel:
    """One binary machine per unordered class pair.

    Within pair (a, b), a < b, class a maps to +1, so decision > 0 votes a.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape[0] != X.shape[0]:
        raise ValueError(f"{labels.shape[0]} labels for {X.shape[0]} samples")
    present, counts = np.unique(labels, return_counts=True)
    if classes is None:
        classes = [int(v) for v in present]
        if (counts < 2).any():
            thin = present[counts < 2].tolist()
            raise ValueError(f"classes {thin} have fewer than 2 samples")
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    machines: dict[tuple[int, int], BinarySvm] = {}
    for a, b in itertools.combinations(sorted(classes), 2):
        mask = (labels == a) | (labels == b)
        for cls in (a, b):
            if not np.any(labels == cls):
                raise TrainingError(f"pair ({a}, {b}): class {cls} has no samples")
        y = np.where(labels[mask] == a, 1.0, -1.0)
        machines[(a, b)] = smo_train(X[mask], y, c, gamma, tol, kernel)
    return SvmModel(classes=sorted(classes), machines=machines, c=float(c),
                    gamma=float(gamma), kernel=kernel)


def ovo_predict(model: SvmModel, x: np.ndarray) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a single feature vector, got shape {x.shape}")
    return int(model.predict_batch(x[None, :])[0])


@dataclass
class GridSpec:
    c_values: tuple[float, ...] = DEFAULT_C_VALUES
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_VALUES
    folds: int = 3

    def __post_init__(self) -> None:
        if not self.c_values or not self.gamma_values:
            raise ValueError("candidate lists must be nonempty")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")


DEFAULT_GRID = GridSpec()


@dataclass
class GridSearchResult:
    c: float
    gamma: float
    accuracy: float
    table: list[tuple[float, float, float]] = field(default_factory=list)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified k-fold assignment (shuffle within class)."""
    labels = np.asarray(labels, dtype=np.intp)
    if k < 2:
        raise ValueError(f"folds must be >= 2, got {k}")
    present, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        thin = present[counts < k].tolist()
        raise ValueError(
            f"stratification infeasible: classes {thin} have fewer than {k} samples"
        )
    gen = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in present:
        idx = np.nonzero(labels == cls)[0]
        gen.shuffle(idx)
        for j, i in enumerate(idx):
            folds[j % k].append(int(i))
    return [np.sort(np.array(f, dtype=np.intp)) for f in folds]


def grid_search(
    X: np.ndarray,
    labels: np.ndarray,
    spec: GridSpec = DEFAULT_GRID,
    seed: int = 0,
    tol: float = 1e-3,
    kernel: str = "rbf",
) -> GridSearchResult:
    """Cross-validated accuracy for every (C, gamma) cell; returns the argmax.

    Accuracy is pooled over folds (total correct / total samples).  Cells
    whose machines fail to train (degenerate folds) score 0 rather than
    aborting the sweep.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.intp)
    folds = stratified_folds(labels, spec.folds, seed)
    n = labels.shape[0]
    all_idx = np.arange(n)
    best: tuple[float, float, float] | None = None
    table: list[tuple[float, float, float]] = []
    for c in sorted(spec.c_values):
        for gamma in sorted(spec.gamma_values):
            correct = 0
            try:
                for held in folds:
                    train_idx = np.setdiff1d(all_idx, held)
                    model = ovo_train(X[train_idx], labels[train_idx], c, gamma,
                                      tol=tol, kernel=kernel)
                    correct += int((model.predict_batch(X[held]) == labels[held]).sum())
                accuracy = correct / n
            except TrainingError:
                accuracy = 0.0
            table.append((c, gamma, accuracy))
            if best is None or accuracy > best[2]:
                best = (c, gamma, accuracy)
    return GridSearchResult(c=best[0], gamma=best[1], accuracy=best[2], table=table)
