"""Command-line front end: a thin client of the HTTP service.

Each subcommand builds the service request model, dispatches it (in-process
by default, over HTTP when --url is given), and renders the response as CSV
or JSON.  Given the same flags and seed the output is byte-identical to a
direct library call.  Exit codes: 0 success, 2 usage or domain error, 3
numerical-budget error.
"""

from __future__ import annotations

import argparse
import os
import sys

import httpx
import numpy as np

from .errors import NumericBudgetError
from .fock import PhotonDistribution, PhotonKernel
from .converse import SweepRow
from . import serialize
from .service import app as svc
from .service import models as m

PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot a rate sweep: bound vs rate, one curve per blocklength.\"\"\"
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt({csv_path!r}, delimiter=",", names=True)
data = np.atleast_1d(data)
fig, ax = plt.subplots(figsize=(7, 4.5))
for n in sorted(set(int(v) for v in data["n"])):
    sel = data[data["n"] == n]
    ax.semilogy(sel["R"], np.minimum(sel["bound"], 1.0), marker="o", label=f"n={{n}}")
ax.set_xlabel("rate R (bits/mode)")
ax.set_ylabel("success-probability bound (clipped)")
ax.grid(alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig({png_path!r}, dpi=150)
print("wrote", {png_path!r})
"""


def _parse_floats(text: str, count: int, flag: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"{flag} takes {count} comma-joined value(s)")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{flag}: {exc}") from None


def add_channel_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--thermal", metavar="ETA,NB", help="beamsplitter eta with thermal NB")
    group.add_argument("--loss", metavar="ETA", help="pure-loss transmissivity")
    group.add_argument("--additive", metavar="NBAR", help="additive noise variance")
    group.add_argument("--amplifier", metavar="G,N", help="amplifier gain with thermal N")


def channel_spec(args: argparse.Namespace) -> m.ChannelSpec:
    if args.thermal is not None:
        return m.ChannelSpec(kind="thermal", params=_parse_floats(args.thermal, 2, "--thermal"))
    if args.loss is not None:
        return m.ChannelSpec(kind="loss", params=_parse_floats(args.loss, 1, "--loss"))
    if args.additive is not None:
        return m.ChannelSpec(kind="additive", params=_parse_floats(args.additive, 1, "--additive"))
    return m.ChannelSpec(kind="amplifier", params=_parse_floats(args.amplifier, 2, "--amplifier"))


def parse_rate_grid(text: str) -> list[float]:
    """``start:stop:step`` (start inclusive, stop exclusive) or comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad rate grid: {exc}") from None
        if step <= 0:
            raise argparse.ArgumentTypeError("rate grid step must be positive")
        rates, value, i = [], start, 0
        while value < stop - 1e-12:
            rates.append(value)
            i += 1
            value = start + i * step
        return rates
    return [float(p) for p in text.split(",")]


def parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",")]


def parse_delta_model(text: str | None) -> m.DeltaModelSpec:
    """``V`` for a constant, ``c,gamma`` for the decay model c * 2^(-gamma n)."""
    if text is None:
        return m.DeltaModelSpec()
    parts = text.split(",")
    if len(parts) == 1:
        return m.DeltaModelSpec(constant=float(parts[0]))
    if len(parts) == 2:
        return m.DeltaModelSpec(decay_c=float(parts[0]), decay_gamma=float(parts[1]))
    raise argparse.ArgumentTypeError("slack model is 'V' or 'c,gamma'")


def _dispatch(args, path: str, request, handler, response_cls):
    if getattr(args, "url", None):
        resp = httpx.post(
            args.url.rstrip("/") + path,
            json=request.model_dump(mode="json"),
            timeout=600.0,
        )
        if resp.status_code != 200:
            try:
                payload = resp.json()
            except Exception:
                payload = {"detail": resp.text}
            detail = payload.get("detail", resp.text)
            if payload.get("kind") == "budget":
                raise NumericBudgetError(str(detail))
            raise ValueError(str(detail))
        return response_cls.model_validate(resp.json())
    return handler(request)


def _emit(args, text: str) -> None:
    path = getattr(args, "output", None)
    if path is None:
        sys.stdout.write(text)
        return
    outdir = os.environ.get("GAUSSCHAN_OUTDIR")
    if outdir and not os.path.isabs(path):
        path = os.path.join(outdir, path)
    with open(path, "w") as fh:
        fh.write(text)


def cmd_capacity(args) -> int:
    req = m.CapacityRequest(channel=channel_spec(args), n_s=args.ns)
    resp = _dispatch(args, "/capacity", req, svc.capacity_handler, m.CapacityResponse)
    if args.eps is not None:
        wreq = m.WeakConverseRequest(channel=channel_spec(args), n_s=args.ns, eps=args.eps)
        wresp = _dispatch(args, "/weak-converse", wreq, svc.weak_converse_handler, m.WeakConverseResponse)
        if args.format == "json":
            _emit(args, wresp.model_dump_json(indent=2) + "\n")
        else:
            _emit(args, serialize.rows_to_csv(
                ["capacity_bits", "eps", "weak_converse_rate_bound"],
                [(wresp.capacity_bits, wresp.eps, wresp.rate_bound_bits)],
            ))
        return 0
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["tau", "nu", "NS", "NS_prime", "NB_prime", "capacity_bits"],
            [(resp.tau, resp.nu, resp.n_s, resp.n_s_prime, resp.n_b_prime, resp.capacity_bits)],
        ))
    return 0


def cmd_decompose(args) -> int:
    req = m.DecomposeRequest(channel=channel_spec(args))
    resp = _dispatch(args, "/decompose", req, svc.decompose_handler, m.DecomposeResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["tau", "nu", "T", "G", "quantum_limited"],
            [(resp.tau, resp.nu, resp.transmissivity, resp.gain, resp.quantum_limited)],
        ))
    return 0


def cmd_kernel(args) -> int:
    req = m.KernelRequest(
        channel=channel_spec(args),
        k_max=args.kmax,
        l_max=args.lmax,
        row=args.row,
        row_tail_budget=args.tail_budget,
    )
    resp = _dispatch(args, "/kernel", req, svc.kernel_handler, m.KernelResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    elif args.row is not None:
        row = resp.rows[0]
        _emit(args, serialize.distribution_csv(PhotonDistribution(row.mass, row.tail)))
    else:
        kern = PhotonKernel(
            np.array([r.mass for r in resp.rows]),
            np.array([r.tail for r in resp.rows]),
        )
        _emit(args, serialize.kernel_csv(kern))
    return 0


def cmd_bound(args) -> int:
    req = m.BoundRequest(
        channel=channel_spec(args),
        n_s=args.ns,
        n=args.n,
        rate=args.rate,
        form=args.form,
        delta1=args.delta1,
        delta2=args.delta2,
        delta3=args.delta3,
        alpha=args.alpha,
        eps=args.eps,
        delta4=args.delta4,
        delta5=args.delta5,
    )
    resp = _dispatch(args, "/bound", req, svc.bound_handler, m.BoundResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["form", "n", "R", "bound", "clipped", "exponent"],
            [(resp.form, resp.n, resp.rate, resp.bound, resp.clipped, resp.exponent)],
        ))
    return 0


def cmd_sweep(args) -> int:
    req = m.SweepRequest(
        channel=channel_spec(args),
        n_s=args.ns,
        n_list=parse_int_list(args.n),
        rates=parse_rate_grid(args.rates),
        delta1=parse_delta_model(args.delta1),
        delta3=parse_delta_model(args.delta3),
        grid_points=args.grid_points,
    )
    resp = _dispatch(args, "/sweep", req, svc.sweep_handler, m.SweepResponse)
    rows = [
        SweepRow(
            n=r.n, rate=r.R, bound=r.bound, exponent=r.exponent,
            delta2=r.delta2, delta4=r.delta4, delta5=r.delta5,
            form=r.form, components=r.components,
        )
        for r in resp.rows
    ]
    text = serialize.sweep_json(rows) if args.format == "json" else serialize.sweep_csv(rows)
    _emit(args, text)
    if args.plot_script:
        if not args.output:
            raise ValueError("--plot-script needs --output so the script knows the data path")
        csv_path = os.path.abspath(args.output)
        png_path = os.path.splitext(csv_path)[0] + ".png"
        with open(args.plot_script, "w") as fh:
            fh.write(PLOT_SCRIPT.format(csv_path=csv_path, png_path=png_path))
    return 0


def cmd_moe(args) -> int:
    req = m.MoeRequest(
        channel=channel_spec(args),
        alpha=args.alpha,
        cutoff=args.cutoff,
        trials=args.trials,
        seed=args.seed,
        tail_budget=args.tail_budget,
        include_probes=not args.no_probes,
    )
    resp = _dispatch(args, "/moe", req, svc.moe_handler, m.MoeResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["alpha", "cutoff", "trials", "seed", "min_entropy", "argmin",
             "vacuum_entropy", "vacuum_overlap", "vacuum_floor", "output_cutoff"],
            [(resp.alpha, resp.cutoff, resp.trials, resp.seed, resp.min_entropy,
              resp.argmin, resp.vacuum_entropy, resp.vacuum_overlap,
              resp.vacuum_floor, resp.output_cutoff)],
        ))
    return 0


def cmd_concentration(args) -> int:
    profile = parse_int_list(args.profile) if args.profile else None
    n_list = parse_int_list(args.n) if args.n else None
    req = m.ConcentrationRequest(
        channel=channel_spec(args),
        delta2=args.delta2,
        level=args.level,
        n_list=n_list,
        profile=profile,
        samples=args.samples,
        seed=args.seed,
        tail_budget=args.tail_budget,
    )
    resp = _dispatch(args, "/concentration", req, svc.concentration_handler, m.ConcentrationResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["n", "threshold", "tail", "chernoff_log2", "mc_tail"],
            [(r.n, r.threshold, r.tail, r.chernoff_log2, r.mc_tail) for r in resp.rows],
        ))
    return 0


def cmd_smooth_check(args) -> int:
    values = [float(v) for v in args.values.split(",")] if args.values else None
    if values is None and args.seed is None:
        raise ValueError("randomized smooth-check needs --seed")
    req = m.SmoothCheckRequest(
        trials=args.trials,
        max_dim=args.max_dim,
        seed=args.seed if args.seed is not None else 0,
        values=values,
        eps=args.eps,
        alpha=args.alpha,
    )
    resp = _dispatch(args, "/smooth-check", req, svc.smooth_check_handler, m.SmoothCheckResponse)
    if args.format == "json":
        _emit(args, resp.model_dump_json(indent=2) + "\n")
    else:
        _emit(args, serialize.rows_to_csv(
            ["trial", "dim", "alpha", "eps", "lhs", "rhs", "holds"],
            [(r.trial, r.dim, r.alpha, r.eps, r.lhs, r.rhs, r.holds) for r in resp.rows],
        ))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(svc.create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausschan",
        description="Capacities, Fock kernels and strong-converse bounds for "
        "phase-insensitive bosonic Gaussian channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, channel: bool = True) -> None:
        if channel:
            add_channel_flags(p)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", metavar="PATH",
                       help="write here instead of stdout (GAUSSCHAN_OUTDIR prepends)")
        p.add_argument("--url", metavar="URL", help="send to a running service")

    p = sub.add_parser("capacity", help="classical capacity in bits per mode")
    common(p)
    p.add_argument("--ns", type=float, required=True, help="mean input photon number")
    p.add_argument("--eps", type=float, help="also print the weak-converse rate bound")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("decompose", help="loss-then-amplifier decomposition")
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("kernel", help="dump the Fock transition kernel")
    common(p)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--row", type=int, help="dump a single input level as l,p")
    p.add_argument("--tail-budget", type=float, help="error if any row tail exceeds this")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("bound", help="evaluate one success-probability bound")
    common(p)
    p.add_argument("--ns", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--form", choices=("theorem1", "corollary"), default="corollary")
    p.add_argument("--delta1", type=float, default=0.0)
    p.add_argument("--delta2", type=float, required=True)
    p.add_argument("--delta3", type=float, default=0.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta4", type=float)
    p.add_argument("--delta5", type=float)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="optimized bound over an (n, rate) grid")
    common(p)
    p.add_argument("--ns", type=float, required=True)
    p.add_argument("--n", required=True, metavar="N1,N2,...")
    p.add_argument("--rates", required=True, metavar="START:STOP:STEP or R1,R2,...")
    p.add_argument("--delta1", metavar="V or C,GAMMA", help="slack model (default 0)")
    p.add_argument("--delta3", metavar="V or C,GAMMA", help="slack model (default 0)")
    p.add_argument("--grid-points", type=int, default=25)
    p.add_argument("--plot-script", metavar="PATH",
                   help="also write a matplotlib script for the sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("moe", help="random search for minimum output Renyi entropy")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--cutoff", type=int, default=10)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tail-budget", type=float, default=1e-8)
    p.add_argument("--no-probes", action="store_true")
    p.set_defaults(func=cmd_moe)

    p = sub.add_parser("concentration", help="exact and Chernoff output-sum tails")
    common(p)
    p.add_argument("--delta2", type=float, required=True)
    p.add_argument("--level", type=int, help="i.i.d. input Fock level")
    p.add_argument("--n", metavar="N1,N2,...", help="blocklengths for the i.i.d. profile")
    p.add_argument("--profile", metavar="A1,A2,...", help="explicit per-mode profile")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo cross-check draws")
    p.add_argument("--seed", type=int, help="required with --samples")
    p.add_argument("--tail-budget", type=float, default=1e-12)
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("smooth-check", help="smooth-min-entropy vs Renyi inequality")
    common(p, channel=False)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-dim", type=int, default=64)
    p.add_argument("--seed", type=int, help="required unless --values is given")
    p.add_argument("--values", metavar="P1,P2,...", help="explicit spectrum")
    p.add_argument("--eps", type=float, help="with --values")
    p.add_argument("--alpha", type=float, help="with --values")
    p.set_defaults(func=cmd_smooth_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "concentration" and args.samples > 0 and args.seed is None:
        parser.error("--samples requires --seed")
    if args.command == "concentration" and not args.profile and not (args.level is not None and args.n):
        parser.error("give --profile or both --level and --n")
    try:
        return args.func(args)
    except NumericBudgetError as exc:
        print(f"error: numeric budget violated: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
