"""Request and response schemas for the HTTP service.

Responses that can legitimately carry non-finite values (vacuous bounds,
deterministic-tail log-bounds) serialize them as JSON strings so the wire
format stays valid; pydantic coerces them back to floats on the client side.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .. import channels


class ChannelSpec(BaseModel):
    """A channel given as constructor kind plus its parameter list."""

    kind: Literal["thermal", "loss", "additive", "amplifier"]
    params: list[float]

    _ARITY = {"thermal": 2, "loss": 1, "additive": 1, "amplifier": 2}

    def build(self) -> channels.ChannelParams:
        expected = self._ARITY[self.kind]
        if len(self.params) != expected:
            raise ValueError(
                f"channel kind '{self.kind}' takes {expected} parameter(s), "
                f"got {len(self.params)}"
            )
        if self.kind == "thermal":
            return channels.make_thermal(*self.params)
        if self.kind == "loss":
            return channels.make_loss(*self.params)
        if self.kind == "additive":
            return channels.make_additive(*self.params)
        return channels.make_amplifier(*self.params)


class DeltaModelSpec(BaseModel):
    """Constant slack or exponential decay c * 2^(-gamma n)."""

    constant: Optional[float] = None
    decay_c: Optional[float] = None
    decay_gamma: Optional[float] = None

    def to_model(self):
        from .. import converse

        if self.constant is not None:
            if self.decay_c is not None or self.decay_gamma is not None:
                raise ValueError("give either a constant or a decay pair, not both")
            return self.constant
        if self.decay_c is not None and self.decay_gamma is not None:
            return converse.decay_model(self.decay_c, self.decay_gamma)
        if self.decay_c is None and self.decay_gamma is None:
            return 0.0
        raise ValueError("decay model needs both decay_c and decay_gamma")


class CapacityRequest(BaseModel):
    channel: ChannelSpec
    n_s: float = Field(ge=0.0)


class CapacityResponse(BaseModel):
    tau: float
    nu: float
    n_s: float
    n_s_prime: float
    n_b_prime: float
    capacity_bits: float


class WeakConverseRequest(BaseModel):
    channel: ChannelSpec
    n_s: float = Field(ge=0.0)
    eps: float


class WeakConverseResponse(BaseModel):
    capacity_bits: float
    eps: float
    rate_bound_bits: float


class DecomposeRequest(BaseModel):
    channel: ChannelSpec


class DecomposeResponse(BaseModel):
    tau: float
    nu: float
    transmissivity: float
    gain: float
    quantum_limited: bool


class KernelRequest(BaseModel):
    channel: ChannelSpec
    k_max: int = Field(ge=0)
    l_max: int = Field(ge=0)
    row: Optional[int] = None
    row_tail_budget: Optional[float] = None


class KernelRowModel(BaseModel):
    k: int
    mass: list[float]
    tail: float


class KernelResponse(BaseModel):
    rows: list[KernelRowModel]


class BoundRequest(BaseModel):
    channel: ChannelSpec
    n_s: float = Field(ge=0.0)
    n: int = Field(ge=1)
    rate: float = Field(ge=0.0)
    form: Literal["theorem1", "corollary"]
    delta1: float = 0.0
    delta2: float
    delta3: float = 0.0
    alpha: Optional[float] = None
    eps: Optional[float] = None
    delta4: Optional[float] = None
    delta5: Optional[float] = None


class BoundResponse(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    form: str
    n: int
    rate: float
    bound: float
    clipped: float
    exponent: float
    additive_terms: dict[str, float]
    components: dict[str, float]
    slack: dict[str, float]


class SweepRequest(BaseModel):
    channel: ChannelSpec
    n_s: float = Field(ge=0.0)
    n_list: list[int]
    rates: list[float]
    delta1: DeltaModelSpec = DeltaModelSpec()
    delta3: DeltaModelSpec = DeltaModelSpec()
    grid_points: int = 25


class SweepRowModel(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    n: int
    R: float
    bound: float
    exponent: float
    delta2: float
    delta4: float
    delta5: float
    form: str
    components: dict[str, float]


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class MoeRequest(BaseModel):
    channel: ChannelSpec
    alpha: float
    cutoff: int = Field(ge=1)
    trials: int = Field(ge=0)
    seed: int = Field(ge=0)
    tail_budget: float = 1e-8
    include_probes: bool = True


class MoeResponse(BaseModel):
    alpha: float
    cutoff: int
    trials: int
    seed: int
    min_entropy: float
    argmin: str
    vacuum_entropy: float
    vacuum_overlap: float
    vacuum_floor: float
    output_cutoff: int


class ConcentrationRequest(BaseModel):
    channel: ChannelSpec
    delta2: float
    level: Optional[int] = None
    n_list: Optional[list[int]] = None
    profile: Optional[list[int]] = None
    samples: int = 0
    seed: Optional[int] = None
    tail_budget: float = 1e-12


class ConcentrationRowModel(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    n: int
    threshold: float
    tail: float
    chernoff_log2: float
    mc_tail: Optional[float] = None


class ConcentrationResponse(BaseModel):
    rows: list[ConcentrationRowModel]


class SmoothCheckRequest(BaseModel):
    trials: int = Field(ge=1, default=1)
    max_dim: int = Field(ge=2, default=64)
    seed: int = 0
    values: Optional[list[float]] = None
    eps: Optional[float] = None
    alpha: Optional[float] = None


class SmoothCheckRowModel(BaseModel):
    trial: int
    dim: int
    alpha: float
    eps: float
    lhs: float
    rhs: float
    holds: bool


class SmoothCheckResponse(BaseModel):
    rows: list[SmoothCheckRowModel]
    violations: int


class ErrorBody(BaseModel):
    detail: str
    kind: Literal["domain", "budget"]
