"""Fit/predict API over the four named model variants.

Variants pair a regularization mode with a default kernel:

====================  ==============  ===============
variant               L1 sparsity     default kernel
====================  ==============  ===============
klr                   no              rbf
l1-rklr               yes             rbf
iklr                  no              tl1
l1-riklr              yes             tl1
====================  ==============  ===============

The kernel default is overridable; the sparsity pairing is not (non-L1
variants require lambda1 = 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .kernels import Dataset, KernelSpec, gram_matrix, kernel_rows
from .objective import DcObjective, sigmoid
from .solver import SolveTrace, SolverConfig, pla_fit
from .spectral import decompose_gram

VARIANTS = ("klr", "l1-rklr", "iklr", "l1-riklr")
L1_VARIANTS = ("l1-rklr", "l1-riklr")

# Coefficients at or below this magnitude count as pruned.
SPARSITY_THRESHOLD = 1e-10

MODEL_SCHEMA = "iklogit-model"
MODEL_SCHEMA_VERSION = 1

# Probabilities are clipped into the open interval (0, 1).
_P_LO = np.finfo(np.float64).tiny
_P_HI = 1.0 - 2.0**-53


@dataclass
class ModelSpec:
    """Everything needed to train one model.

    ``kernel=None`` selects the variant's default: rbf(sigma=1) for the
    PSD variants, tl1 with eta resolved to 0.7*d at fit time for the
    indefinite ones.
    """

    variant: str
    lam: float
    lam1: float = 0.0
    kernel: KernelSpec | None = None
    tau: float = 1e-6
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        self.variant = str(self.variant).lower()
        if self.variant not in VARIANTS:
            raise InputError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InputError(f"lambda must be positive, got {self.lam}")
        if not (np.isfinite(self.lam1) and self.lam1 >= 0):
            raise InputError(f"lambda1 must be non-negative, got {self.lam1}")
        if self.lam1 != 0.0 and not self.is_l1:
            raise InputError(
                f"variant {self.variant!r} does not take an L1 term; "
                "set lambda1 = 0 or use an l1- variant"
            )
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise InputError(f"tau must be positive, got {self.tau}")

    @property
    def is_l1(self) -> bool:
        return self.variant in L1_VARIANTS

    def effective_kernel(self, d: int) -> KernelSpec:
        """The configured kernel, or the variant default, resolved for d."""
        if self.kernel is not None:
            return self.kernel.resolve(d)
        if self.variant in ("klr", "l1-rklr"):
            return KernelSpec.rbf(1.0)
        return KernelSpec.tl1().resolve(d)


@dataclass(eq=False)
class FittedModel:
    """Trained coefficients plus everything prediction needs.

    ``trace`` is None for models loaded from disk.
    """

    alpha: np.ndarray
    train_features: np.ndarray
    kernel: KernelSpec
    variant: str
    lam: float
    lam1: float
    tau: float
    sparsity_threshold: float = SPARSITY_THRESHOLD
    trace: SolveTrace | None = None

    def __post_init__(self) -> None:
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.train_features = np.asarray(self.train_features, dtype=np.float64)
        if self.alpha.ndim != 1 or not np.all(np.isfinite(self.alpha)):
            raise InputError("alpha must be a finite 1-D vector")
        if self.train_features.shape[0] != self.alpha.shape[0]:
            raise InputError(
                "alpha length must equal the retained training size: "
                f"{self.alpha.shape[0]} vs {self.train_features.shape[0]}"
            )
        if not (np.isfinite(self.sparsity_threshold) and self.sparsity_threshold >= 0):
            raise InputError("sparsity_threshold must be >= 0")

    @property
    def support(self) -> np.ndarray:
        """Indices of active coefficients: |alpha_i| > sparsity_threshold."""
        return np.flatnonzero(np.abs(self.alpha) > self.sparsity_threshold)

    def scores(self, test_features: np.ndarray) -> np.ndarray:
        """Decision scores K_z alpha for each test row."""
        rows = kernel_rows(self.kernel, self.train_features, test_features)
        return rows @ self.alpha


def fit(spec: ModelSpec, train: Dataset) -> FittedModel:
    """Train one model: Gram, positive decomposition, then the PLA solver.

    Raises InputError when the training labels are single-class.  A run
    that hits max_outer still returns a model; the trace carries the
    ``max_iterations`` status.
    """
    if len(np.unique(train.labels)) < 2:
        raise InputError("training data must contain both classes")
    kernel = spec.effective_kernel(train.d)
    gram = gram_matrix(kernel, train)
    decomp = decompose_gram(gram, spec.tau)
    obj = DcObjective.from_labels(decomp, train.labels, spec.lam, spec.lam1)
    alpha, trace = pla_fit(obj, spec.solver)
    return FittedModel(
        alpha=alpha,
        train_features=train.features.copy(),
        kernel=kernel,
        variant=spec.variant,
        lam=spec.lam,
        lam1=spec.lam1,
        tau=spec.tau,
        trace=trace,
    )


def predict_proba(model: FittedModel, test_features: np.ndarray) -> np.ndarray:
    """Class-1 probability per test row, clipped into (0, 1)."""
    return np.clip(sigmoid(model.scores(test_features)), _P_LO, _P_HI)


def predict_label(model: FittedModel, test_features: np.ndarray) -> np.ndarray:
    """Predicted {0,1} labels; score 0 (probability exactly 0.5) maps to 1.

    Computed from the raw scores so the tie rule is exact.
    """
    return (model.scores(test_features) >= 0.0).astype(np.int64)


def selected_count(model: FittedModel) -> int:
    """Number of active coefficients."""
    return int(model.support.size)


def save_model(model: FittedModel, path: str) -> None:
    """Write a self-describing JSON model file.

    Floats serialize via repr and therefore round-trip bitwise; a loaded
    model reproduces predictions exactly.
    """
    payload = {
        "schema": MODEL_SCHEMA,
        "schema_version": MODEL_SCHEMA_VERSION,
        "variant": model.variant,
        "kernel": model.kernel.to_dict(),
        "lambda": model.lam,
        "lambda1": model.lam1,
        "tau": model.tau,
        "sparsity_threshold": model.sparsity_threshold,
        "alpha": model.alpha.tolist(),
        "train_features": model.train_features.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path: str) -> FittedModel:
    """Read a model file written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != MODEL_SCHEMA:
        raise InputError(f"not a model file: {path}")
    if payload.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise InputError(
            f"unsupported model schema version {payload.get('schema_version')}"
        )
    return FittedModel(
        alpha=np.asarray(payload["alpha"], dtype=np.float64),
        train_features=np.asarray(payload["train_features"], dtype=np.float64),
        kernel=KernelSpec.from_dict(payload["kernel"]),
        variant=payload["variant"],
        lam=payload["lambda"],
        lam1=payload["lambda1"],
        tau=payload["tau"],
        sparsity_threshold=payload["sparsity_threshold"],
        trace=None,
    )
