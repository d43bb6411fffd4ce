"""Photon-number (Fock) basis machinery.

The pure-loss stage thins photon number binomially,

    p(m | k) = C(k, m) T^m (1 - T)^(k - m),

and the quantum-limited amplifier adds photons with negative-binomial
statistics (mu^2 = 1 - 1/G),

    q(l | m) = (1 - mu^2)^(m+1) mu^(2(l-m)) C(l, m)   for l >= m,

so a channel maps the Fock level k to the mixture p(l | k) =
sum_m p(m | k) q(l | m) with mean tau * k + (tau + nu - 1) / 2.  All
probability masses are computed in log space through log-gamma and
exponentiated at the end; direct binomial products overflow for photon
numbers in the hundreds.

Distributions are truncated explicitly: every row carries its ``tail_mass``
rather than being renormalized, because the concentration experiments
downstream are entirely about where that tail mass goes.  Amplifier tails
are obtained by complementing the partial row sum, never by summing the
tail.  Kraus matrix elements use the real nonnegative gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .channels import ChannelParams, LossAmpDecomposition, decompose
from .errors import CutoffTooSmallError, TruncationBudgetError

__all__ = [
    "PhotonDistribution",
    "PhotonKernel",
    "TruncatedOperator",
    "loss_kernel",
    "amp_kernel",
    "channel_kernel",
    "apply_kernel",
    "convolve",
    "kraus_loss",
    "kraus_amp",
    "completeness_defect",
    "apply_channel_matrix",
    "projector_count",
    "coherent_occupation_probability",
    "sample_output",
    "decompose",
]

NORMALIZATION_ATOL = 1e-10


@dataclass(frozen=True)
class PhotonDistribution:
    """Probability mass over photon numbers 0..len(mass)-1 plus explicit tail."""

    mass: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("mass must be a nonempty 1-D sequence")
        if mass.min() < -1e-12:
            raise ValueError(f"negative probability {mass.min()}")
        object.__setattr__(self, "mass", np.clip(mass, 0.0, None))
        if self.tail_mass < -1e-12:
            raise ValueError(f"negative tail mass {self.tail_mass}")
        object.__setattr__(self, "tail_mass", max(0.0, float(self.tail_mass)))
        total = float(self.mass.sum()) + self.tail_mass
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"total mass {total} is not 1 within {NORMALIZATION_ATOL}")

    @classmethod
    def point(cls, k: int, length: int | None = None) -> "PhotonDistribution":
        mass = np.zeros((length if length is not None else k + 1))
        mass[k] = 1.0
        return cls(mass)

    @property
    def support_max(self) -> int:
        return int(self.mass.size - 1)

    def mean(self) -> float:
        """Mean photon number of the resolved mass (tail excluded)."""
        return float(np.arange(self.mass.size) @ self.mass)


@dataclass(frozen=True)
class PhotonKernel:
    """Per-input-level output distributions: probs[k, l] = p(l | k)."""

    probs: np.ndarray
    row_tails: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        tails = np.asarray(self.row_tails, dtype=float)
        if probs.ndim != 2 or tails.shape != (probs.shape[0],):
            raise ValueError("probs must be 2-D with one tail per row")
        totals = probs.sum(axis=1) + tails
        if np.abs(totals - 1.0).max() > NORMALIZATION_ATOL:
            raise ValueError("kernel rows are not normalized within tolerance")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "row_tails", tails)

    @property
    def k_max(self) -> int:
        return int(self.probs.shape[0] - 1)

    @property
    def l_max(self) -> int:
        return int(self.probs.shape[1] - 1)

    def row(self, k: int) -> PhotonDistribution:
        return PhotonDistribution(self.probs[k], float(self.row_tails[k]))


def _log_binom(n, k):
    return gammaln(np.asarray(n) + 1) - gammaln(np.asarray(k) + 1) - gammaln(np.asarray(n) - np.asarray(k) + 1)


def _loss_row(T: float, k: int, l_max: int) -> tuple[np.ndarray, float]:
    row = np.zeros(l_max + 1)
    if k == 0 or T == 0.0:
        row[0] = 1.0
        return row, 0.0
    if T == 1.0:
        if k <= l_max:
            row[k] = 1.0
            return row, 0.0
        return row, 1.0
    m = np.arange(0, min(k, l_max) + 1)
    row[: m.size] = np.exp(_log_binom(k, m) + m * math.log(T) + (k - m) * math.log1p(-T))
    tail = 0.0 if l_max >= k else max(0.0, 1.0 - math.fsum(row.tolist()))
    return row, tail


def _amp_row(G: float, m: int, l_max: int) -> tuple[np.ndarray, float]:
    row = np.zeros(l_max + 1)
    if G == 1.0:
        if m <= l_max:
            row[m] = 1.0
            return row, 0.0
        return row, 1.0
    if m > l_max:
        return row, 1.0
    mu2 = 1.0 - 1.0 / G
    l = np.arange(m, l_max + 1)
    row[m:] = np.exp((m + 1) * math.log1p(-mu2) + (l - m) * math.log(mu2) + _log_binom(l, m))
    return row, max(0.0, 1.0 - math.fsum(row[m:].tolist()))


def loss_kernel(T: float, k_max: int, l_max: int) -> PhotonKernel:
    """Binomial thinning kernel of a transmissivity-``T`` pure-loss stage."""
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {T}")
    if k_max < 0 or l_max < 0:
        raise ValueError("k_max and l_max must be nonnegative")
    rows, tails = zip(*(_loss_row(T, k, l_max) for k in range(k_max + 1)))
    return PhotonKernel(np.array(rows), np.array(tails))


def amp_kernel(G: float, k_max: int, l_max: int) -> PhotonKernel:
    """Negative-binomial kernel of a gain-``G`` quantum-limited amplifier."""
    if G < 1.0:
        raise ValueError(f"gain must be >= 1, got {G}")
    if k_max < 0 or l_max < 0:
        raise ValueError("k_max and l_max must be nonnegative")
    rows, tails = zip(*(_amp_row(G, m, l_max) for m in range(k_max + 1)))
    return PhotonKernel(np.array(rows), np.array(tails))


def _composite_rows(dec: LossAmpDecomposition, k_max: int, l_max: int) -> tuple[np.ndarray, np.ndarray]:
    loss = loss_kernel(dec.T, k_max, k_max)
    amp = amp_kernel(dec.G, k_max, l_max)
    # Loss rows are exact at l_max = k_max, so the composite tail is exactly
    # the loss-weighted amplifier tail.
    return loss.probs @ amp.probs, loss.probs @ amp.row_tails


def channel_kernel(
    ch: ChannelParams, k_max: int, l_max: int, row_tail_budget: float | None = None
) -> PhotonKernel:
    """Composite transition kernel p(l | k) of a phase-insensitive channel.

    Composes the binomial loss stage with the amplifier stage of the
    channel's decomposition.  If ``row_tail_budget`` is given, any row whose
    truncated tail exceeds it raises TruncationBudgetError.
    """
    if k_max < 0 or l_max < 0:
        raise ValueError("k_max and l_max must be nonnegative")
    probs, tails = _composite_rows(decompose(ch), k_max, l_max)
    if row_tail_budget is not None and float(tails.max()) > row_tail_budget:
        worst = int(tails.argmax())
        raise TruncationBudgetError(
            f"row {worst} tail mass {tails[worst]:.3e} exceeds budget {row_tail_budget:.3e}"
        )
    return PhotonKernel(probs, tails)


def apply_kernel(kern: PhotonKernel, dist: PhotonDistribution) -> PhotonDistribution:
    """Push a photon-number distribution through a kernel.

    The input tail and the kernel row tails are carried over conservatively:
    whatever mass is unresolved on input stays unresolved on output.
    """
    if dist.support_max > kern.k_max:
        raise ValueError(
            f"distribution support 0..{dist.support_max} exceeds kernel inputs 0..{kern.k_max}"
        )
    mass = dist.mass @ kern.probs[: dist.mass.size]
    tail = dist.tail_mass + float(dist.mass @ kern.row_tails[: dist.mass.size])
    return PhotonDistribution(mass, tail)


def convolve(d1: PhotonDistribution, d2: PhotonDistribution) -> PhotonDistribution:
    """Distribution of the sum of two independent photon counts."""
    mass = np.convolve(d1.mass, d2.mass)
    tail = d1.tail_mass + d2.tail_mass - d1.tail_mass * d2.tail_mass
    return PhotonDistribution(mass, tail)


def kraus_loss(T: float, d: int) -> list[np.ndarray]:
    """Kraus family of the pure-loss stage on a ``d``-level cutoff space.

    Operator j removes j photons: <k-j| A_j |k> = sqrt(C(k, j) T^(k-j) (1-T)^j).
    Completeness is exact on every retained level because loss never raises
    the photon number.
    """
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {T}")
    if d < 1:
        raise ValueError("dimension must be positive")
    ops = []
    for j in range(d):
        op = np.zeros((d, d))
        k = np.arange(j, d)
        if T == 1.0:
            vals = np.ones(k.size) if j == 0 else np.zeros(k.size)
        elif T == 0.0:
            vals = (k == j).astype(float)
        else:
            vals = np.exp(0.5 * (_log_binom(k, j) + (k - j) * math.log(T) + j * math.log1p(-T)))
        op[k - j, k] = vals
        ops.append(op)
    return ops


def kraus_amp(G: float, d: int) -> list[np.ndarray]:
    """Kraus family of the quantum-limited amplifier on a ``d``-level cutoff.

    Operator j adds j photons: <m+j| B_j |m> = sqrt((1-mu^2)^(m+1) mu^(2j) C(m+j, j)).
    High input levels lose mass past the cutoff; see completeness_defect.
    """
    if G < 1.0:
        raise ValueError(f"gain must be >= 1, got {G}")
    if d < 1:
        raise ValueError("dimension must be positive")
    mu2 = 1.0 - 1.0 / G
    ops = []
    for j in range(d):
        op = np.zeros((d, d))
        m = np.arange(0, d - j)
        if G == 1.0:
            vals = np.ones(m.size) if j == 0 else np.zeros(m.size)
        else:
            vals = np.exp(0.5 * ((m + 1) * math.log1p(-mu2) + j * math.log(mu2) + _log_binom(m + j, j)))
        op[m + j, m] = vals
        ops.append(op)
    return ops


def completeness_defect(ops: list[np.ndarray]) -> np.ndarray:
    """Per-level defect diag(I - sum A^dag A) of a truncated Kraus family."""
    d = ops[0].shape[0]
    acc = np.zeros(d)
    for op in ops:
        acc += (op * op).sum(axis=0)
    return 1.0 - acc


@dataclass(frozen=True)
class TruncatedOperator:
    """Hermitian PSD matrix with trace <= 1 on a Fock cutoff space."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("operator must be a square matrix")
        if np.abs(mat - mat.conj().T).max() > 1e-12:
            raise ValueError("operator is not Hermitian within 1e-12")
        if float(np.linalg.eigvalsh(mat).min()) < -1e-10:
            raise ValueError("operator has an eigenvalue below -1e-10")
        if float(mat.trace().real) > 1.0 + 1e-10:
            raise ValueError("operator trace exceeds 1")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_pure(cls, amplitudes: np.ndarray) -> "TruncatedOperator":
        vec = np.asarray(amplitudes, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def from_diagonal(cls, populations: np.ndarray) -> "TruncatedOperator":
        return cls(np.diag(np.asarray(populations, dtype=complex)))

    @classmethod
    def vacuum(cls, d: int) -> "TruncatedOperator":
        mat = np.zeros((d, d), dtype=complex)
        mat[0, 0] = 1.0
        return cls(mat)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()


def apply_channel_matrix(
    ch: ChannelParams,
    rho: TruncatedOperator,
    d_out: int,
    trace_budget: float | None = None,
) -> TruncatedOperator:
    """Apply the channel's Kraus form to a truncated density operator.

    Runs the loss family then the amplifier family at working dimension
    max(rho.dim, d_out) and crops to ``d_out``.  The trace defect equals the
    truncated amplifier tail mass; if it exceeds ``trace_budget`` the cutoff
    is reported as too small.
    """
    if d_out < 1:
        raise ValueError("output dimension must be positive")
    dec = decompose(ch)
    work = max(rho.dim, d_out)
    embedded = np.zeros((work, work), dtype=complex)
    embedded[: rho.dim, : rho.dim] = rho.matrix

    mid = np.zeros_like(embedded)
    for op in kraus_loss(dec.T, work)[: rho.dim]:
        mid += op @ embedded @ op.T
    out = np.zeros_like(embedded)
    for op in kraus_amp(dec.G, work):
        out += op @ mid @ op.T

    cropped = out[:d_out, :d_out]
    defect = rho.trace() - float(cropped.trace().real)
    if trace_budget is not None and defect > trace_budget:
        raise CutoffTooSmallError(
            f"trace defect {defect:.3e} exceeds budget {trace_budget:.3e}; raise d_out"
        )
    return TruncatedOperator(cropped)


def projector_count(n: int, total: int) -> int:
    """Number of n-mode Fock basis states with total photon number <= ``total``.

    Exact lattice count C(total + n, n), evaluated in arbitrary precision.
    """
    if n < 1:
        raise ValueError("mode count must be positive")
    if total < 0:
        raise ValueError("photon budget must be nonnegative")
    return math.comb(total + n, n)


def coherent_occupation_probability(mean_per_mode: float, n: int, total: int) -> float:
    """Weight of an n-mode coherent product state inside the <= ``total`` subspace.

    The total photon count of n independent coherent modes of mean
    ``mean_per_mode`` is Poisson with mean n * mean_per_mode, so this is the
    Poisson CDF at ``total``.  One minus this value is a valid occupation
    failure mass for such inputs.
    """
    if mean_per_mode < 0.0:
        raise ValueError("mean photon number must be nonnegative")
    if n < 1:
        raise ValueError("mode count must be positive")
    if total < 0:
        raise ValueError("photon budget must be nonnegative")
    if mean_per_mode == 0.0:
        return 1.0
    return float(stats.poisson.cdf(total, n * mean_per_mode))


def sample_output(
    ch: ChannelParams,
    k: int,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw output photon counts for the Fock input level ``k``.

    Binomial thinning followed by negative-binomial amplification, exactly
    distributed as the corresponding channel_kernel row.  The random state is
    caller-owned for reproducibility.
    """
    if k < 0:
        raise ValueError("input level must be nonnegative")
    dec = decompose(ch)
    m = rng.binomial(k, dec.T, size=size)
    if dec.G == 1.0:
        return m
    added = rng.negative_binomial(np.asarray(m) + 1, 1.0 / dec.G, size=size)
    return m + added
