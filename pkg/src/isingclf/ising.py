"""Ising problems: representation, energy evaluation, and the reduction of
softmax classification to a quadratic spin objective.

A trained classifier with K classes and M features keeps one weight vector
per non-reference class; the reference class is the highest class index and
carries no weights. Stacking the K-1 weight vectors gives N = M*(K-1) spins.
The training loss (negative log-likelihood of the softmax model) expanded to
second order around zero weights is a quadratic form in the weights, which
is exactly an Ising energy: per-class linear terms plus within-class and
between-class feature couplings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import CapacityError, DegenerateProblemError

#: Largest complete problem graph accepted by default; mirrors the size
#: limit of the annealing hardware the formulation was designed around.
DEFAULT_CAPACITY = 66


@dataclass(frozen=True)
class ClassBlockLayout:
    """Bijection between spin index and (class block k, feature m).

    Spins are laid out block-major: spin(k, m) = k * n_features + m for
    k in [0, n_classes-1) and m in [0, n_features).
    """

    n_classes: int
    n_features: int

    @property
    def n_spins(self) -> int:
        return self.n_features * (self.n_classes - 1)

    def spin_index(self, class_block: int, feature: int) -> int:
        if not (0 <= class_block < self.n_classes - 1):
            raise IndexError(f"class block {class_block} out of range")
        if not (0 <= feature < self.n_features):
            raise IndexError(f"feature {feature} out of range")
        return class_block * self.n_features + feature

    def block_of(self, spin: int) -> tuple[int, int]:
        if not (0 <= spin < self.n_spins):
            raise IndexError(f"spin {spin} out of range")
        return divmod(spin, self.n_features)

    def weights_to_spins(self, weights: np.ndarray) -> np.ndarray:
        """Flatten a (K-1, M) weight matrix into a spin-ordered vector."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.n_classes - 1, self.n_features):
            raise ValueError(
                f"weights must be {(self.n_classes - 1, self.n_features)}, got {w.shape}"
            )
        return w.reshape(-1)

    def spins_to_weights(self, vector: np.ndarray) -> np.ndarray:
        """Reshape a spin-ordered vector into the (K-1, M) weight matrix."""
        v = np.asarray(vector, dtype=np.float64)
        if v.shape != (self.n_spins,):
            raise ValueError(f"vector must have length {self.n_spins}, got {v.shape}")
        return v.reshape(self.n_classes - 1, self.n_features)


@dataclass(frozen=True)
class IsingProblem:
    """Local fields ``h`` and symmetric couplings ``J`` over N spins.

    Energy of a spin assignment s in {-1,+1}^N:

        E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + sum_i J_ii

    The diagonal of J contributes a constant for +-1 spins and is retained
    because it matters when the same coefficients are evaluated at
    real-valued (ensemble-averaged) weights, where it enters as J_ii w_i^2.
    """

    fields: np.ndarray
    couplings: np.ndarray
    layout: ClassBlockLayout | None = None

    def __post_init__(self):
        h = np.asarray(self.fields, dtype=np.float64)
        j = np.asarray(self.couplings, dtype=np.float64)
        if h.ndim != 1:
            raise ValueError("fields must be a vector")
        n = h.shape[0]
        if j.shape != (n, n):
            raise ValueError(f"couplings must be {n}x{n}, got {j.shape}")
        if not (np.isfinite(h).all() and np.isfinite(j).all()):
            raise ValueError("fields/couplings contain NaN or Inf")
        if not np.array_equal(j, j.T):
            # Upper triangle is authoritative; symmetrize exact mirrors only.
            if np.allclose(j, j.T, rtol=1e-12, atol=0.0):
                j = np.triu(j) + np.triu(j, 1).T
            else:
                raise ValueError("couplings matrix is not symmetric")
        h = h.copy()
        j = j.copy()
        h.flags.writeable = False
        j.flags.writeable = False
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "couplings", j)
        if self.layout is not None and self.layout.n_spins != n:
            raise ValueError("layout size does not match n_spins")

    @property
    def n_spins(self) -> int:
        return self.fields.shape[0]

    def couplings_offdiag(self) -> np.ndarray:
        out = self.couplings.copy()
        np.fill_diagonal(out, 0.0)
        return out

    def diagonal_offset(self) -> float:
        """sum_i J_ii, the constant energy offset for +-1 spins."""
        return float(np.trace(self.couplings))


@dataclass
class SpinConfiguration:
    """A +-1 assignment to every spin, with its energy cached once known."""

    spins: np.ndarray
    energy: float | None = None

    def __post_init__(self):
        s = np.asarray(self.spins, dtype=np.int8)
        if s.ndim != 1:
            raise ValueError("spins must be a vector")
        if not np.isin(s, (-1, 1)).all():
            raise ValueError("every spin must be exactly -1 or +1")
        self.spins = s

    def __len__(self) -> int:
        return self.spins.shape[0]


@dataclass(frozen=True)
class BuildIntermediates:
    """Per-class linear vectors and the two feature-coupling matrices that
    assemble into the classification Ising problem.

    ``mean_term`` is the dataset-mean linear contribution shared by every
    class block; it is distinct from the assembled per-spin fields.
    ``intra_coupling`` equals (K-1) * ``inter_coupling`` elementwise.
    """

    b_vectors: np.ndarray
    mean_term: np.ndarray
    intra_coupling: np.ndarray
    inter_coupling: np.ndarray


def energy(problem: IsingProblem, config: SpinConfiguration | np.ndarray) -> float:
    """Ising energy of one spin configuration (see :class:`IsingProblem`)."""
    spins = config.spins if isinstance(config, SpinConfiguration) else np.asarray(config)
    if spins.shape != (problem.n_spins,):
        raise ValueError(
            f"configuration has {spins.shape} spins, problem has {problem.n_spins}"
        )
    return float(energy_batch(problem, spins.astype(np.float64)[None, :])[0])


def energy_batch(problem: IsingProblem, spins: np.ndarray) -> np.ndarray:
    """Energies of a (n_configs, N) batch of +-1 rows."""
    s = np.asarray(spins, dtype=np.float64)
    off = problem.couplings_offdiag()
    pair = 0.5 * np.einsum("ci,ci->c", s @ off, s)
    return s @ problem.fields + pair + problem.diagonal_offset()


def energy_real(problem: IsingProblem, weights: np.ndarray) -> float:
    """The problem's quadratic form at real-valued weights in [-1, 1]^N.

    Identical to :func:`energy` when the weights are +-1; at fractional
    weights the coupling diagonal enters as J_ii w_i^2, so shrinking a
    weight toward zero can genuinely lower the objective.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (problem.n_spins,):
        raise ValueError(f"weights must have length {problem.n_spins}, got {w.shape}")
    if not np.isfinite(w).all():
        raise ValueError("weights contain NaN or Inf")
    if (np.abs(w) > 1.0 + 1e-12).any():
        raise ValueError("weights must lie in [-1, 1]")
    off = problem.couplings_offdiag()
    diag = np.diag(problem.couplings)
    return float(problem.fields @ w + 0.5 * w @ off @ w + diag @ (w * w))


def build_multiclass_problem(
    data: LabeledDataset, capacity: int | None = DEFAULT_CAPACITY
) -> tuple[IsingProblem, ClassBlockLayout, BuildIntermediates]:
    """Reduce softmax classification on ``data`` to an Ising problem.

    The spin vector concatenates one weight block per class 0..K-2; class
    K-1 is the reference and has no block. With x_i the feature rows and
    y_i the labels, the assembled energy evaluated at weights W equals the
    second-order expansion of the classification loss around W = 0 (up to
    the constant N*log K):

        linear (block k) :  -sum_{y_i=k} x_i  +  (1/K) sum_i x_i
        within block     :  +J1,  J1 = (K-1)/(2K^2) sum_i x_i x_i^T
        between blocks   :  -J2,  J2 =     1/(2K^2) sum_i x_i x_i^T

    ``capacity`` bounds M*(K-1); pass None to disable the check (software
    solvers have no graph-size restriction).
    """
    x = data.features
    y = data.labels
    k = data.n_classes
    m = data.n_features
    if k < 2:
        raise DegenerateProblemError("need at least two classes to build a problem")
    layout = ClassBlockLayout(n_classes=k, n_features=m)
    n = layout.n_spins
    if capacity is not None and n > capacity:
        raise CapacityError(
            f"M*(K-1) = {m}*{k - 1} = {n} exceeds the capacity limit {capacity}"
        )

    b_vectors = np.stack([-x[y == c].sum(axis=0) for c in range(k - 1)])
    mean_term = x.sum(axis=0) / k
    second_moment = x.T @ x
    intra = ((k - 1) / (2.0 * k * k)) * second_moment
    inter = (1.0 / (2.0 * k * k)) * second_moment

    fields = (b_vectors + mean_term).reshape(n)
    # Quadratic-form matrix Q over the full spin vector: +intra within each
    # block, -inter between blocks. The pairwise couplings J follow from
    # w^T Q w = sum_i Q_ii w_i^2 + 2 sum_{i<j} Q_ij w_i w_j.
    quad = np.kron(np.eye(k - 1), intra) - np.kron(1.0 - np.eye(k - 1), inter)
    couplings = 2.0 * quad
    np.fill_diagonal(couplings, np.diag(quad))

    problem = IsingProblem(fields=fields, couplings=couplings, layout=layout)
    intermediates = BuildIntermediates(
        b_vectors=b_vectors,
        mean_term=mean_term,
        intra_coupling=intra,
        inter_coupling=inter,
    )
    return problem, layout, intermediates


def build_binomial_problem(
    data: LabeledDataset, capacity: int | None = DEFAULT_CAPACITY
) -> tuple[IsingProblem, ClassBlockLayout, BuildIntermediates]:
    """Two-class entry point: a single weight block and no between-block
    couplings. Identical to :func:`build_multiclass_problem` at K = 2."""
    if data.n_classes != 2:
        raise ValueError(f"binomial builder requires exactly 2 classes, got {data.n_classes}")
    return build_multiclass_problem(data, capacity=capacity)


def scale_to_unit(problem: IsingProblem) -> IsingProblem:
    """Rescale so every field and coupling lies in [-1, 1].

    Divides by the largest absolute coefficient; positive scaling preserves
    the energy ordering of configurations, so the minimizer is unchanged.
    """
    scale = max(
        float(np.abs(problem.fields).max(initial=0.0)),
        float(np.abs(problem.couplings).max(initial=0.0)),
    )
    if scale == 0.0:
        raise DegenerateProblemError("cannot scale an all-zero problem")
    return IsingProblem(
        fields=problem.fields / scale,
        couplings=problem.couplings / scale,
        layout=problem.layout,
    )


def class_logits(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-class logits [w_0.x, ..., w_{K-2}.x, 0] for rows of ``x``."""
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    xx = np.atleast_2d(np.asarray(x, dtype=np.float64))
    z = xx @ w.T
    return np.concatenate([z, np.zeros((xx.shape[0], 1))], axis=1)


def exact_nll(weights: np.ndarray, data: LabeledDataset) -> float:
    """Exact negative log-likelihood of the softmax model at ``weights``.

    ``weights`` is (K-1, M); the reference class K-1 contributes a fixed
    zero logit. Computed with log-sum-exp stabilization.
    """
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    if w.shape != (data.n_classes - 1, data.n_features):
        raise ValueError(
            f"weights must be {(data.n_classes - 1, data.n_features)}, got {w.shape}"
        )
    z = class_logits(w, data.features)
    zmax = z.max(axis=1, keepdims=True)
    log_norm = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    chosen = z[np.arange(data.n_samples), data.labels]
    return float((log_norm - chosen).sum())
