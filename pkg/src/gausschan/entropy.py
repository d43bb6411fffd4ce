"""Entropy functionals on discrete spectra and thermal closed forms.

Everything is in bits.  ``g(x)`` is the entropy of a thermal state of mean
photon number ``x``; the order-``alpha`` Renyi entropy of a spectrum is
``log2(sum p^alpha) / (1 - alpha)``; the thermal closed form for alpha > 1 is
``log2((N+1)^alpha - N^alpha) / (alpha - 1)``.  Smoothing is performed over
normalized distributions on the same support, with trace distance taken as
total variation (half the L1 difference).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import CutoffTooSmallError, TailTooLargeError

_LN2 = math.log(2.0)

# Orders this close to 1 are rejected: the (1 - alpha) division is
# catastrophically ill-conditioned there and callers should use shannon().
ALPHA_ONE_GUARD = 1e-6


@dataclass(frozen=True)
class Spectrum:
    """Nonnegative eigenvalues plus the mass beyond the resolved range."""

    values: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("spectrum must be a nonempty 1-D sequence")
        if vals.min() < -1e-10:
            raise ValueError(f"negative spectral weight {vals.min()}")
        vals = np.clip(vals, 0.0, None)
        object.__setattr__(self, "values", vals)
        if self.tail_mass < -1e-10:
            raise ValueError(f"negative tail mass {self.tail_mass}")
        object.__setattr__(self, "tail_mass", max(0.0, float(self.tail_mass)))
        total = float(vals.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"spectrum mass {total} is not 1 within 1e-10")

    @property
    def dim(self) -> int:
        return int(self.values.size)


def g(x: float) -> float:
    """Entropy in bits of a thermal state with mean photon number ``x``."""
    if x < 0.0:
        raise ValueError(f"mean photon number must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def h2(eps: float) -> float:
    """Binary entropy in bits, 0 at both endpoints."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {eps}")
    if eps == 0.0 or eps == 1.0:
        return 0.0
    return -eps * math.log2(eps) - (1.0 - eps) * math.log2(1.0 - eps)


def shannon(s: Spectrum) -> float:
    """Shannon entropy of the resolved part of the spectrum."""
    return float(-xlogy(s.values, s.values).sum() / _LN2)


def renyi(s: Spectrum, alpha: float, tail_tol: float = 1e-9) -> float:
    """Order-``alpha`` Renyi entropy, ``log2(sum p^alpha) / (1 - alpha)``.

    The unresolved tail contributes at most ``tail_mass**alpha`` to the power
    sum when alpha > 1; if that slack moves the entropy by more than
    ``tail_tol`` bits the result cannot be certified and TailTooLargeError is
    raised.  For alpha < 1 the tail's contribution is unbounded without
    knowing its support, so any nonzero tail is rejected.
    """
    if alpha <= 0.0:
        raise ValueError(f"Renyi order must be positive, got {alpha}")
    if abs(alpha - 1.0) < ALPHA_ONE_GUARD:
        raise ValueError("Renyi order too close to 1; use shannon() instead")
    power_sum = float((s.values**alpha).sum())
    if alpha > 1.0:
        slack = s.tail_mass**alpha
        if slack > 0.0 and math.log2(1.0 + slack / power_sum) / (alpha - 1.0) > tail_tol:
            raise TailTooLargeError(
                f"tail mass {s.tail_mass} cannot bound the power sum to {tail_tol} bits"
            )
    elif s.tail_mass > 0.0:
        raise TailTooLargeError("alpha < 1 needs a fully resolved spectrum")
    return math.log2(power_sum) / (1.0 - alpha)


def min_entropy(s: Spectrum) -> float:
    """Min-entropy -log2(max p) of the resolved spectrum."""
    return -math.log2(float(s.values.max()))


def renyi_thermal(n_mean: float, alpha: float) -> float:
    """Closed-form Renyi entropy of a thermal state, alpha > 1.

    Evaluates log2((N+1)^alpha - N^alpha) / (alpha - 1) in log space so that
    large orders (e.g. alpha = 1e6) do not overflow; the alpha -> infinity
    limit is log2(N + 1).
    """
    if n_mean < 0.0:
        raise ValueError(f"mean photon number must be nonnegative, got {n_mean}")
    if alpha <= 1.0:
        raise ValueError(f"thermal closed form needs alpha > 1, got {alpha}")
    if n_mean == 0.0:
        return 0.0
    log_hi = alpha * math.log2(n_mean + 1.0)
    log_lo = alpha * math.log2(n_mean)
    # log2((N+1)^a - N^a) = a log2(N+1) + log2(1 - (N/(N+1))^a)
    return (log_hi + math.log1p(-math.exp((log_lo - log_hi) * _LN2)) / _LN2) / (alpha - 1.0)


def thermal_spectrum(n_mean: float, size: int) -> Spectrum:
    """First ``size`` geometric weights of a thermal state, exact tail."""
    if n_mean < 0.0:
        raise ValueError(f"mean photon number must be nonnegative, got {n_mean}")
    if size < 1:
        raise ValueError("size must be positive")
    if n_mean == 0.0:
        vals = np.zeros(size)
        vals[0] = 1.0
        return Spectrum(vals, 0.0)
    ratio = n_mean / (n_mean + 1.0)
    vals = np.exp(np.arange(size) * math.log(ratio)) / (n_mean + 1.0)
    return Spectrum(vals, tail_mass=ratio**size)


def smooth_min_entropy(s: Spectrum, eps: float) -> float:
    """Best min-entropy within total-variation distance ``eps`` of ``s``.

    Over normalized distributions on the same ``dim`` outcomes, capping every
    weight at ``lam`` and redistributing the excess costs total variation
    ``sum_i max(0, p_i - lam)``, so the optimal cap solves that excess = eps;
    normalization keeps the cap at or above ``1/dim``.  The cap is located by
    binary search to 1e-12 and the result is ``-log2(cap)``.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"smoothing parameter must lie in [0, 1), got {eps}")
    if s.tail_mass > 1e-10:
        raise TailTooLargeError("smoothing needs a fully resolved spectrum")
    vals = s.values
    if eps == 0.0:
        return min_entropy(s)

    def excess(lam: float) -> float:
        return float(np.clip(vals - lam, 0.0, None).sum())

    lo, hi = 0.0, float(vals.max())
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if excess(mid) > eps:
            lo = mid
        else:
            hi = mid
    cap = max(hi, 1.0 / s.dim)
    return -math.log2(cap)


@dataclass(frozen=True)
class SmoothingCheck:
    """Both sides of the smooth-min-entropy vs Renyi-entropy inequality."""

    lhs: float
    rhs: float
    holds: bool


def check_renyi_smoothing(s: Spectrum, eps: float, alpha: float) -> SmoothingCheck:
    """Verify H_min^eps(s) >= H_alpha(s) - log2(1/eps) / (alpha - 1)."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"smoothing parameter must lie in (0, 1), got {eps}")
    if alpha <= 1.0:
        raise ValueError(f"the inequality is stated for alpha > 1, got {alpha}")
    lhs = smooth_min_entropy(s, eps)
    rhs = renyi(s, alpha) - math.log2(1.0 / eps) / (alpha - 1.0)
    return SmoothingCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - 1e-9)


def v_factor(nb: float) -> float:
    """Thermal-state spread factor entering the entropy continuity bound."""
    if nb < 0.0:
        raise ValueError(f"mean photon number must be nonnegative, got {nb}")
    spread = ((nb + 1.0) ** 1.5 - nb**1.5) ** 2
    inverse = ((nb + 1.0) ** 0.5 - nb**0.5) ** (-2)
    return spread + inverse + 1.0


def K_factor(nb: float) -> float:
    """Continuity coefficient 4 [log2 v]^2: H_{1+d}(thermal) >= g - d * K."""
    return 4.0 * math.log2(v_factor(nb)) ** 2


@dataclass(frozen=True)
class MoeScanResult:
    """Outcome of a random search for the minimum output Renyi entropy."""

    min_entropy: float
    argmin: str
    vacuum_overlap: float
    vacuum_entropy: float
    output_cutoff: int
    trials: int


def moe_scan(
    ch,
    alpha: float,
    cutoff: int,
    trials: int,
    rng: np.random.Generator,
    tail_budget: float = 1e-8,
    include_probes: bool = True,
) -> MoeScanResult:
    """Search input pure states for the smallest output Renyi entropy.

    Pushes ``trials`` Haar-random pure states on the first ``cutoff`` Fock
    levels (plus a deterministic probe set: Fock states 0..3, truncated
    coherent states, a flat superposition) through the channel's Kraus form
    and computes the output spectrum's Renyi entropy.  The output cutoff is
    grown until the vacuum-input output tail is at most ``tail_budget``, so
    the vacuum entropy is accurate to within the budget.  Compressing an
    output state to the cutoff can only lower its alpha-power sum, i.e. only
    raise the computed entropy, so the reported minimum never understates the
    true minimum-output-entropy floor.
    """
    from . import fock  # deferred: fock imports channels which imports this module

    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if alpha <= 1.0:
        raise ValueError(f"scan is defined for alpha > 1, got {alpha}")

    d_out = cutoff
    while True:
        vac_tail = float(fock.channel_kernel(ch, k_max=0, l_max=d_out - 1).row_tails[0])
        if vac_tail <= tail_budget:
            break
        if d_out > 65536:
            raise CutoffTooSmallError(
                f"output cutoff {d_out} still exceeds vacuum tail budget {tail_budget}"
            )
        d_out = 2 * d_out + 16

    dec = fock.decompose(ch)
    loss_ops = fock.kraus_loss(dec.T, d_out)[:cutoff]
    amp_ops = fock.kraus_amp(dec.G, d_out)

    def output_entropy(psi: np.ndarray) -> float:
        vec = np.zeros(d_out, dtype=complex)
        vec[:cutoff] = psi
        cols = []
        for a_op in loss_ops:
            mid = a_op @ vec
            if not mid.any():
                continue
            for b_op in amp_ops:
                cols.append(b_op @ mid)
        stacked = np.array(cols).T
        rho = stacked @ stacked.conj().T
        eigs = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        return math.log2(float((eigs**alpha).sum())) / (1.0 - alpha)

    states: list[tuple[str, np.ndarray]] = []
    if include_probes:
        for k in range(min(4, cutoff)):
            fockvec = np.zeros(cutoff, dtype=complex)
            fockvec[k] = 1.0
            states.append((f"fock-{k}", fockvec))
        for amp in (0.5, 1.0):
            coh = np.exp(
                np.arange(cutoff) * math.log(amp) - 0.5 * amp * amp
                - 0.5 * np.cumsum(np.log(np.maximum(np.arange(cutoff), 1)))
            )
            states.append((f"coherent-{amp}", (coh / np.linalg.norm(coh)).astype(complex)))
        flat = np.ones(min(4, cutoff), dtype=complex)
        psi = np.zeros(cutoff, dtype=complex)
        psi[: flat.size] = flat / np.linalg.norm(flat)
        states.append(("flat-superposition", psi))
    for t in range(trials):
        z = rng.normal(size=cutoff) + 1j * rng.normal(size=cutoff)
        states.append((f"haar-{t}", z / np.linalg.norm(z)))

    vacuum = np.zeros(cutoff, dtype=complex)
    vacuum[0] = 1.0
    vac_entropy = output_entropy(vacuum)

    best_label, best_value, best_overlap = "vacuum", vac_entropy, 1.0
    for label, psi in states:
        value = output_entropy(psi)
        if value < best_value:
            best_label, best_value = label, value
            best_overlap = float(abs(psi[0]) ** 2)
    return MoeScanResult(
        min_entropy=best_value,
        argmin=best_label,
        vacuum_overlap=best_overlap,
        vacuum_entropy=vac_entropy,
        output_cutoff=d_out,
        trials=trials,
    )
