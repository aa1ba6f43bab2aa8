"""The regularized kernel-logistic objective and its DC split.

With Gram matrix K = K+ - K- (see :mod:`.spectral`), signed labels y and
weights lam > 0, lam1 >= 0, the full objective over coefficients alpha is

    f(alpha) = (1/n) sum_i ln(1 + exp(-y_i (K alpha)_i))
               + (lam/2) alpha^T K alpha + lam1 ||alpha||_1

which splits into a difference of convex functions f = g - h with

    g(alpha) = loss + (lam/2) ||B alpha||^2 + lam1 ||alpha||_1
    h(alpha) = (lam/2) alpha^T K- alpha

Both g and h are convex; g is strongly convex with modulus lam * tau.
Setting lam1 = 0 recovers the plain (indefinite) kernel logistic model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .spectral import GramDecomposition


def sigmoid(u: np.ndarray) -> np.ndarray:
    """Logistic function, overflow-safe for any finite input."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(u, dtype=np.float64)))


def softplus(u: np.ndarray) -> np.ndarray:
    """ln(1 + e^u) without overflow; equals max(u,0) + log1p(e^-|u|)."""
    return np.logaddexp(0.0, u)


@dataclass(frozen=True, eq=False)
class DcObjective:
    """Immutable bundle of everything f, g, h need.

    Parameters
    ----------
    decomp : GramDecomposition
        Gram matrix with its positive split.
    y_signed : ndarray of shape (n,)
        Labels as exactly -1 or +1.
    lam : float
        Smoothness (quadratic) weight, > 0.
    lam1 : float
        Sparsity (L1) weight, >= 0; 0 disables the L1 term.
    """

    decomp: GramDecomposition
    y_signed: np.ndarray
    lam: float
    lam1: float = 0.0

    def __post_init__(self) -> None:
        y = np.asarray(self.y_signed, dtype=np.float64)
        n = self.decomp.gram.shape[0]
        if y.shape != (n,):
            raise InputError(f"y_signed must have shape ({n},), got {y.shape}")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise InputError("y_signed entries must be exactly -1 or +1")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InputError(f"lam must be positive, got {self.lam}")
        if not (np.isfinite(self.lam1) and self.lam1 >= 0):
            raise InputError(f"lam1 must be non-negative, got {self.lam1}")
        object.__setattr__(self, "y_signed", y)

    @classmethod
    def from_labels(
        cls,
        decomp: GramDecomposition,
        labels: np.ndarray,
        lam: float,
        lam1: float = 0.0,
    ) -> "DcObjective":
        """Build from {0,1} labels via the signed mapping y -> 2y - 1."""
        labs = np.asarray(labels)
        if not np.all(np.isin(labs, (0, 1))):
            raise InputError("labels must be exactly 0 or 1")
        return cls(decomp=decomp, y_signed=2.0 * labs - 1.0, lam=lam, lam1=lam1)

    @property
    def n(self) -> int:
        return self.decomp.gram.shape[0]


@dataclass(frozen=True)
class ProxParams:
    """Threshold of the L1 proximal map used by the inner solver."""

    threshold: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.threshold) and self.threshold >= 0):
            raise InputError(f"threshold must be >= 0, got {self.threshold}")

    def apply(self, v: np.ndarray) -> np.ndarray:
        return soft_threshold(v, self.threshold)


def _check_alpha(obj: DcObjective, alpha: np.ndarray) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64)
    if a.shape != (obj.n,):
        raise InputError(f"alpha must have shape ({obj.n},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("alpha contains non-finite values")
    return a


def logistic_loss(obj: DcObjective, alpha: np.ndarray) -> float:
    """Mean logistic loss (1/n) sum ln(1 + exp(-y_i (K alpha)_i))."""
    a = _check_alpha(obj, alpha)
    margins = obj.y_signed * (obj.decomp.gram @ a)
    return float(np.mean(softplus(-margins)))


def f_value(obj: DcObjective, alpha: np.ndarray) -> float:
    """Full objective: loss + (lam/2) a^T K a + lam1 ||a||_1."""
    a = _check_alpha(obj, alpha)
    quad = 0.5 * obj.lam * float(a @ (obj.decomp.gram @ a))
    return logistic_loss(obj, a) + quad + obj.lam1 * float(np.abs(a).sum())


def g_value(obj: DcObjective, alpha: np.ndarray) -> float:
    """Convex part: loss + (lam/2) ||B a||^2 + lam1 ||a||_1."""
    a = _check_alpha(obj, alpha)
    ba = obj.decomp.bfactor @ a
    quad = 0.5 * obj.lam * float(ba @ ba)
    return logistic_loss(obj, a) + quad + obj.lam1 * float(np.abs(a).sum())


def h_value(obj: DcObjective, alpha: np.ndarray) -> float:
    """Concave-side part: (lam/2) a^T K- a."""
    a = _check_alpha(obj, alpha)
    return 0.5 * obj.lam * float(a @ (obj.decomp.kminus @ a))


def smooth_grad_g(obj: DcObjective, alpha: np.ndarray) -> np.ndarray:
    """Gradient of the smooth part of g (everything except the L1 term).

    Equals -(1/n) K (y * s) + lam K+ a with s_i = sigmoid(-y_i (K a)_i).
    """
    a = _check_alpha(obj, alpha)
    gram = obj.decomp.gram
    s = sigmoid(-obj.y_signed * (gram @ a))
    return -(gram @ (obj.y_signed * s)) / obj.n + obj.lam * (obj.decomp.kplus @ a)


def grad_h(obj: DcObjective, alpha: np.ndarray) -> np.ndarray:
    """Gradient of h: lam K- a."""
    a = _check_alpha(obj, alpha)
    return obj.lam * (obj.decomp.kminus @ a)


def grad_h_lipschitz(obj: DcObjective) -> float:
    """Exact Lipschitz constant of grad_h: lam * ||K-||_2.

    The smallest Gram eigenvalue mu_n gives ||K-||_2 = max(tau, tau - mu_n);
    the max keeps the constant exact when the Gram is PSD (mu_n > 0).
    """
    mu_min = float(obj.decomp.eigenvalues[-1])
    tau = obj.decomp.tau
    return obj.lam * max(tau, tau - mu_min)


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Proximal map of t * ||.||_1: sign(v) * max(|v| - t, 0) componentwise."""
    if not (np.isfinite(t) and t >= 0):
        raise InputError(f"threshold must be >= 0, got {t}")
    arr = np.asarray(v, dtype=np.float64)
    return np.sign(arr) * np.maximum(np.abs(arr) - t, 0.0)
