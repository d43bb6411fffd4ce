"""FastAPI service wrapping the core package.

Every endpoint is a pure function of its request body, so the service is
stateless and safe to scale horizontally.  The handler functions are plain
callables; the CLI invokes them in-process by default and over HTTP when
given a server URL.  Domain errors map to 400, numerical-budget errors
to 422, both with a machine-readable ``kind``.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import channels, converse, entropy, fock
from ..errors import NumericBudgetError
from . import models as m


def capacity_handler(req: m.CapacityRequest) -> m.CapacityResponse:
    ch = req.channel.build()
    ns_prime, nb_prime = channels.output_photon_numbers(ch, req.n_s)
    return m.CapacityResponse(
        tau=ch.tau,
        nu=ch.nu,
        n_s=req.n_s,
        n_s_prime=ns_prime,
        n_b_prime=nb_prime,
        capacity_bits=channels.capacity(ch, req.n_s),
    )


def weak_converse_handler(req: m.WeakConverseRequest) -> m.WeakConverseResponse:
    ch = req.channel.build()
    return m.WeakConverseResponse(
        capacity_bits=channels.capacity(ch, req.n_s),
        eps=req.eps,
        rate_bound_bits=channels.weak_converse_rate_bound(ch, req.n_s, req.eps),
    )


def decompose_handler(req: m.DecomposeRequest) -> m.DecomposeResponse:
    ch = req.channel.build()
    dec = channels.decompose(ch)
    return m.DecomposeResponse(
        tau=ch.tau,
        nu=ch.nu,
        transmissivity=dec.T,
        gain=dec.G,
        quantum_limited=ch.is_quantum_limited,
    )


def kernel_handler(req: m.KernelRequest) -> m.KernelResponse:
    ch = req.channel.build()
    kern = fock.channel_kernel(ch, req.k_max, req.l_max, row_tail_budget=req.row_tail_budget)
    if req.row is not None and not 0 <= req.row <= kern.k_max:
        raise ValueError(f"row {req.row} outside kernel inputs 0..{kern.k_max}")
    ks = range(kern.k_max + 1) if req.row is None else [req.row]
    rows = [
        m.KernelRowModel(
            k=k, mass=[float(p) for p in kern.probs[k]], tail=float(kern.row_tails[k])
        )
        for k in ks
    ]
    return m.KernelResponse(rows=rows)


def _slack_from_request(req: m.BoundRequest) -> converse.SlackParams:
    if req.form == "theorem1":
        if req.alpha is None or req.eps is None:
            raise ValueError("form 'theorem1' needs --alpha and --eps")
        return converse.SlackParams.for_theorem(
            delta1=req.delta1, delta2=req.delta2, delta3=req.delta3,
            alpha=req.alpha, eps=req.eps, n=req.n,
        )
    if req.delta4 is None or req.delta5 is None:
        raise ValueError("form 'corollary' needs --delta4 and --delta5")
    return converse.SlackParams.for_corollary(
        delta1=req.delta1, delta2=req.delta2, delta3=req.delta3,
        delta4=req.delta4, delta5=req.delta5, n=req.n,
    )


def bound_handler(req: m.BoundRequest) -> m.BoundResponse:
    ch = req.channel.build()
    slack = _slack_from_request(req)
    inputs = converse.BoundInputs(channel=ch, n_s=req.n_s, n=req.n, rate=req.rate, slack=slack)
    report = (
        converse.theorem1_bound(inputs)
        if req.form == "theorem1"
        else converse.corollary_bound(inputs)
    )
    return m.BoundResponse(
        form=report.form,
        n=report.n,
        rate=req.rate,
        bound=report.bound,
        clipped=report.clipped,
        exponent=report.exponent_bits_per_mode,
        additive_terms=report.additive_terms,
        components=report.components,
        slack={
            "delta1": slack.delta1, "delta2": slack.delta2, "delta3": slack.delta3,
            "delta4": slack.delta4, "delta5": slack.delta5,
            "alpha": slack.alpha, "eps": slack.eps,
        },
    )


def sweep_handler(req: m.SweepRequest) -> m.SweepResponse:
    ch = req.channel.build()
    rows = converse.rate_sweep(
        ch,
        req.n_s,
        req.n_list,
        req.rates,
        delta1_model=req.delta1.to_model(),
        delta3_model=req.delta3.to_model(),
        grid_points=req.grid_points,
    )
    return m.SweepResponse(
        rows=[
            m.SweepRowModel(
                n=r.n, R=r.rate, bound=r.bound, exponent=r.exponent,
                delta2=r.delta2, delta4=r.delta4, delta5=r.delta5,
                form=r.form, components=r.components,
            )
            for r in rows
        ]
    )


def moe_handler(req: m.MoeRequest) -> m.MoeResponse:
    ch = req.channel.build()
    rng = np.random.default_rng(req.seed)
    result = entropy.moe_scan(
        ch,
        req.alpha,
        req.cutoff,
        req.trials,
        rng,
        tail_budget=req.tail_budget,
        include_probes=req.include_probes,
    )
    nb_prime = ch.noise_photons
    floor = entropy.renyi_thermal(nb_prime, req.alpha) if nb_prime > 0 else 0.0
    return m.MoeResponse(
        alpha=req.alpha,
        cutoff=req.cutoff,
        trials=req.trials,
        seed=req.seed,
        min_entropy=result.min_entropy,
        argmin=result.argmin,
        vacuum_entropy=result.vacuum_entropy,
        vacuum_overlap=result.vacuum_overlap,
        vacuum_floor=floor,
        output_cutoff=result.output_cutoff,
    )


def concentration_handler(req: m.ConcentrationRequest) -> m.ConcentrationResponse:
    ch = req.channel.build()
    if req.profile is not None:
        profiles = [list(req.profile)]
    else:
        if req.level is None or not req.n_list:
            raise ValueError("give either an explicit profile or a level with n_list")
        profiles = [[req.level] * n for n in req.n_list]
    if req.samples > 0 and req.seed is None:
        raise ValueError("Monte Carlo concentration needs a seed")
    rng = np.random.default_rng(req.seed) if req.seed is not None else None

    rows = []
    for profile in profiles:
        n = len(profile)
        threshold = converse.output_mean(ch, profile) + n * req.delta2
        tail = converse.concentration_tail(ch, profile, req.delta2, tail_budget=req.tail_budget)
        cher = converse.chernoff_tail(ch, profile, threshold, tail_budget=req.tail_budget)
        mc = None
        if req.samples > 0:
            totals = np.zeros(req.samples, dtype=np.int64)
            for a in profile:
                totals += fock.sample_output(ch, a, rng, size=req.samples)
            mc = float((totals > threshold).mean())
        rows.append(
            m.ConcentrationRowModel(
                n=n, threshold=threshold, tail=tail, chernoff_log2=cher, mc_tail=mc
            )
        )
    return m.ConcentrationResponse(rows=rows)


def smooth_check_handler(req: m.SmoothCheckRequest) -> m.SmoothCheckResponse:
    rows = []
    if req.values is not None:
        if req.eps is None or req.alpha is None:
            raise ValueError("explicit spectrum needs eps and alpha")
        spec = entropy.Spectrum(np.asarray(req.values, dtype=float))
        check = entropy.check_renyi_smoothing(spec, req.eps, req.alpha)
        rows.append(
            m.SmoothCheckRowModel(
                trial=0, dim=spec.dim, alpha=req.alpha, eps=req.eps,
                lhs=check.lhs, rhs=check.rhs, holds=check.holds,
            )
        )
    else:
        rng = np.random.default_rng(req.seed)
        for trial in range(req.trials):
            dim = int(rng.integers(2, req.max_dim + 1))
            vals = rng.random(dim)
            vals /= vals.sum()
            alpha = float(1.0 + 10 ** rng.uniform(-3, 1))
            eps = float(10 ** rng.uniform(-6, math.log10(0.5)))
            check = entropy.check_renyi_smoothing(entropy.Spectrum(vals), eps, alpha)
            rows.append(
                m.SmoothCheckRowModel(
                    trial=trial, dim=dim, alpha=alpha, eps=eps,
                    lhs=check.lhs, rhs=check.rhs, holds=check.holds,
                )
            )
    return m.SmoothCheckResponse(rows=rows, violations=sum(1 for r in rows if not r.holds))


def create_app() -> FastAPI:
    app = FastAPI(
        title="gausschan",
        description="Capacities, Fock kernels and strong-converse bounds "
        "for phase-insensitive bosonic Gaussian channels",
        version="0.1.0",
    )

    @app.exception_handler(ValueError)
    async def domain_error(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc), "kind": "domain"})

    @app.exception_handler(NumericBudgetError)
    async def budget_error(_: Request, exc: NumericBudgetError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc), "kind": "budget"})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    app.post("/capacity", response_model=m.CapacityResponse)(capacity_handler)
    app.post("/weak-converse", response_model=m.WeakConverseResponse)(weak_converse_handler)
    app.post("/decompose", response_model=m.DecomposeResponse)(decompose_handler)
    app.post("/kernel", response_model=m.KernelResponse)(kernel_handler)
    app.post("/bound", response_model=m.BoundResponse)(bound_handler)
    app.post("/sweep", response_model=m.SweepResponse)(sweep_handler)
    app.post("/moe", response_model=m.MoeResponse)(moe_handler)
    app.post("/concentration", response_model=m.ConcentrationResponse)(concentration_handler)
    app.post("/smooth-check", response_model=m.SmoothCheckResponse)(smooth_check_handler)
    return app
