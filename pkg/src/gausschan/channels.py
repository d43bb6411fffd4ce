"""Single-mode phase-insensitive Gaussian channels.

A channel is the pair ``(tau, nu)``: ``tau`` scales the mean photon number
multiplicatively and ``nu`` is the additive noise parameter.  Complete
positivity requires ``nu >= |tau - 1|``; equality is the quantum-limited
case.  Every valid channel factors as a pure-loss stage of transmissivity
``T`` followed by a quantum-limited amplifier of gain ``G`` with

    tau = T * G,        nu = G * (1 - T) + G - 1,

which inverts to ``G = (tau + nu + 1) / 2`` and ``T = tau / G``.  All
functions here are pure and all values immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .entropy import g, h2

# Absolute slack on the complete-positivity check.  Constructor arithmetic is
# exact, but user-supplied (tau, nu) pairs may carry float noise.
CPTP_ATOL = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    """Channel parameters: photon-number scale ``tau`` and additive noise ``nu``."""

    tau: float
    nu: float

    def __post_init__(self) -> None:
        if self.tau < 0.0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if self.nu < 0.0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")
        if self.nu < abs(self.tau - 1.0) - CPTP_ATOL:
            raise ValueError(
                f"(tau={self.tau}, nu={self.nu}) is not completely positive: "
                f"need nu >= |tau - 1|"
            )

    @property
    def is_quantum_limited(self) -> bool:
        """True when the noise sits exactly at the physical minimum |tau - 1|."""
        return abs(self.nu - abs(self.tau - 1.0)) <= CPTP_ATOL

    @property
    def noise_photons(self) -> float:
        """Mean output photon number when the vacuum is sent in: (tau + nu - 1) / 2."""
        return max(0.0, (self.tau + self.nu - 1.0) / 2.0)

    def mean_output_photons(self, n_s: float) -> float:
        """Mean output photon number for a mean-``n_s`` input."""
        if n_s < 0.0:
            raise ValueError(f"mean photon number must be nonnegative, got {n_s}")
        return self.tau * n_s + self.noise_photons


@dataclass(frozen=True)
class LossAmpDecomposition:
    """Pure-loss transmissivity ``T`` and quantum-limited amplifier gain ``G``."""

    T: float
    G: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.T <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {self.T}")
        if self.G < 1.0:
            raise ValueError(f"gain must be >= 1, got {self.G}")

    def compose(self) -> ChannelParams:
        """Recombine the two stages into the channel they realize."""
        return ChannelParams(tau=self.T * self.G, nu=2.0 * self.G - self.T * self.G - 1.0)


def make_thermal(eta: float, n_b: float) -> ChannelParams:
    """Beamsplitter of transmissivity ``eta`` mixing with a mean-``n_b`` thermal state.

    Maps to tau = eta, nu = (1 - eta)(2 n_b + 1); the vacuum-input output mean
    is (1 - eta) n_b.  ``n_b = 0`` is the pure-loss channel.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity eta must lie in [0, 1], got {eta}")
    if n_b < 0.0:
        raise ValueError(f"environment photon number must be nonnegative, got {n_b}")
    return ChannelParams(tau=eta, nu=(1.0 - eta) * (2.0 * n_b + 1.0))


def make_loss(eta: float) -> ChannelParams:
    """Pure-loss channel of transmissivity ``eta`` (vacuum environment)."""
    return make_thermal(eta, 0.0)


def make_additive(nbar: float) -> ChannelParams:
    """Random phase-space displacement with noise variance ``nbar``.

    Maps to tau = 1, nu = 2 nbar; the vacuum-input output mean is nbar.
    """
    if nbar < 0.0:
        raise ValueError(f"noise variance must be nonnegative, got {nbar}")
    return ChannelParams(tau=1.0, nu=2.0 * nbar)


def make_amplifier(gain: float, n_env: float) -> ChannelParams:
    """Amplifier of gain ``G >= 1`` with a mean-``n_env`` thermal environment.

    Maps to tau = G, nu = (G - 1)(2 n_env + 1); the vacuum-input output mean
    is (G - 1)(n_env + 1).
    """
    if gain < 1.0:
        raise ValueError(f"gain must be >= 1, got {gain}")
    if n_env < 0.0:
        raise ValueError(f"environment photon number must be nonnegative, got {n_env}")
    return ChannelParams(tau=gain, nu=(gain - 1.0) * (2.0 * n_env + 1.0))


def decompose(ch: ChannelParams) -> LossAmpDecomposition:
    """Split a channel into pure loss followed by a quantum-limited amplifier.

    G = (tau + nu + 1) / 2 and T = tau / G.  Complete positivity of ``ch``
    guarantees T in [0, 1] and G >= 1.  The degenerate tau = 0 channel
    (complete erasure to a thermal state) yields T = 0.
    """
    gain = (ch.tau + ch.nu + 1.0) / 2.0
    t = 2.0 * ch.tau / (ch.tau + ch.nu + 1.0)
    return LossAmpDecomposition(T=min(t, 1.0), G=max(gain, 1.0))


def output_photon_numbers(ch: ChannelParams, n_s: float) -> tuple[float, float]:
    """Mean output photon numbers (signal input ``n_s``, vacuum input)."""
    return ch.mean_output_photons(n_s), ch.noise_photons


def capacity(ch: ChannelParams, n_s: float) -> float:
    """Classical capacity in bits per mode under a mean-``n_s`` input constraint.

    Equals g(N'_S) - g(N'_B) where N'_S and N'_B are the mean output photon
    numbers for a mean-``n_s`` thermal input and for the vacuum.
    """
    ns_prime, nb_prime = output_photon_numbers(ch, n_s)
    return g(ns_prime) - g(nb_prime)


def weak_converse_rate_bound(ch: ChannelParams, n_s: float, eps: float) -> float:
    """Rate bound (capacity + h2(eps)) / (1 - eps) allowing error probability ``eps``."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"error probability must lie in (0, 1), got {eps}")
    return (capacity(ch, n_s) + h2(eps)) / (1.0 - eps)
