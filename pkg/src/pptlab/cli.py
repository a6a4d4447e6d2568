"""Command-line interface.

Reproducible workflows over files; every verb supports ``--json`` and
``--out``.  Exit codes: 0 a verdict was produced, 1 the run was
inconclusive (failed certificate replay, inconclusive certification,
failed acceptance), 2 input error.

Examples:

    pptlab build --family 3 --out fam3.json
    pptlab ppt-check --state fam3.json
    pptlab build --state rho4x5 --out rho45.json
    pptlab certify-sn --state rho45.json --k 3 --out cert.json
    pptlab verify cert.json
    pptlab survey --dims 3x3 --birank 4,4 --samples 100 --seed 2026
    pptlab reproduce --json
    pptlab plot --state rho3x3
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import algcert as ac
from . import exactmat as em
from . import extender as ex
from . import qstates as qs
from . import serialize as se
from .errors import PptlabError

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2


def _load_state(ref: str) -> qs.BipartiteState:
    named = {
        "rho3x3": qs.rho_3x3,
        "rho4x5": lambda: qs.rho_4x5().final,
        "rho4x5:stage1": lambda: qs.rho_4x5().stage1,
        "rho4x5:stage2": lambda: qs.rho_4x5().stage2,
        "tiles": qs.tiles_complement,
    }
    if ref in named:
        return named[ref]()
    if ref.startswith("family:"):
        return qs.rho_family(int(ref.split(":", 1)[1]))
    return se.state_from_json(se.load(ref))


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.json or text is None:
        out = json.dumps(payload, indent=2)
    else:
        out = text
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
        if not args.json and text is not None:
            print(text)
    else:
        print(out)


def cmd_build(args) -> int:
    if args.graph:
        g = se.graph_from_json(se.load(args.graph))
        state = qs.grid_to_state(g, label=args.label or "grid-state")
    elif args.family:
        state = qs.rho_family(int(args.family))
    elif args.state:
        state = _load_state(args.state)
    else:
        print("build: need --graph, --family, or --state", file=sys.stderr)
        return EXIT_INPUT
    payload = se.state_to_json(state)
    _emit(args, payload, text=f"built {state.dim_a}x{state.dim_b} state "
          f"{state.label!r} (trace {state.matrix.trace()})")
    return EXIT_OK


def cmd_ppt_check(args) -> int:
    state = _load_state(args.state)
    cert = se.ppt_certificate(state)
    verdict = cert["verdict"]
    _emit(args, cert, text=f"{state.label or 'state'}: {verdict}")
    return EXIT_OK


def cmd_extend(args) -> int:
    state = _load_state(args.state)
    step = json.loads(args.step)
    kind = step.get("kind")
    side = step.get("side", "A")
    if kind == "slocc":
        phi = se.vector_from_json(step["phi"])
        out = ex.slocc_extension(state, phi, side)
    elif kind == "direct_sum":
        edge = se.matrix_from_json(step["edge"])
        local = state.dim_b if side == "A" else state.dim_a
        blocks = ex.ExtensionBlocks(state, em.ExactMatrix.zeros(state.dim_a * state.dim_b,
                                                                local),
                                    edge, side, state.dim_a if side == "A" else state.dim_b)
        out = ex.assemble_extension(blocks, label=f"direct_sum({state.label})")
    elif kind == "product_pair":
        alpha = se.vector_from_json(step["alpha"])
        beta = se.vector_from_json(step["beta"])
        gamma = se.vector_from_json(step["gamma"])
        blocks = ex.product_pair_extension(state, alpha, beta, gamma, side)
        out = ex.assemble_extension(blocks, label=f"product_pair({state.label})")
    elif kind == "flat":
        chi = se.matrix_from_json(step["chi"])
        out = ex.flat_extension(state, chi, side)
    else:
        print(f"extend: unknown step kind {kind!r}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, se.state_to_json(out),
          text=f"extended to {out.dim_a}x{out.dim_b} ({kind} on side {side})")
    return EXIT_OK


def cmd_certify_sn(args) -> int:
    state = _load_state(args.state)
    if state.edges is None:
        print("certify-sn: state carries no range decomposition", file=sys.stderr)
        return EXIT_INPUT
    m, n = state.dims
    ranked = [(qs.schmidt_rank(e.vec, m, n), i) for i, e in enumerate(state.edges)]
    max_sr, wit_idx = max(ranked)
    k = args.k if args.k else max_sr
    witness = state.edges[wit_idx].vec
    exclude = [e.name for e in state.edges if e.name.startswith("delta")] \
        if args.exclude_deltas else []
    naming = "edge" if exclude else "site"
    lower = ac.certify_sn_lower(state, witness, k, n_max=args.nmax,
                                exclude_vars=exclude, naming=naming,
                                method=args.method)
    upper = ac.sn_upper_from_decomposition([e.vec for e in state.edges],
                                           [e.weight for e in state.edges], state)
    payload = {
        "kind": "sn-verdict",
        "upper": se.sn_upper_certificate(upper, state),
    }
    if isinstance(lower, ac.SNCertificate):
        payload["lower"] = se.sn_lower_certificate(lower, state)
        verdict = f"SN in [{lower.value}, {upper.value}]"
        if lower.value == upper.value:
            verdict = f"SN = {lower.value}"
        payload["verdict"] = verdict
        _emit(args, payload, text=f"{state.label}: {verdict} "
              f"(lower N={lower.evidence['power']}, upper max SR={upper.value})")
        return EXIT_OK
    payload["lower_inconclusive"] = lower.reason
    payload["verdict"] = f"SN <= {upper.value} (lower bound inconclusive)"
    _emit(args, payload, text=payload["verdict"])
    return EXIT_INCONCLUSIVE


def cmd_extremal(args) -> int:
    state = _load_state(args.state)
    side = args.side
    perp = args.perp if args.perp is not None else \
        (state.dim_a - 1 if side == "A" else state.dim_b - 1)
    blocks = ex.split_blocks(state, side, perp)
    psd_v = ex.extremality_check_psd(blocks)
    payload = {
        "kind": "extremality",
        "side": side,
        "perp_index": perp,
        "psd_cone": {"extremal": psd_v.extremal, "reason": psd_v.reason},
    }
    try:
        ppt_v = ex.extremality_check_ppt(blocks)
        payload["ppt_cone"] = {
            "verdict": ppt_v.verdict,
            "trivial_range_intersection": ppt_v.triv_intersection_ok,
            "perturbation_dimension": ppt_v.perturbation_dimension,
            "note": ppt_v.notes,
        }
    except PptlabError as exc:
        payload["ppt_cone"] = {"error": str(exc)}
    text = (f"PSD cone: {'Extremal' if psd_v.extremal else 'NotExtremal'} ({psd_v.reason}); "
            f"PPT cone: {payload['ppt_cone'].get('verdict', 'n/a')}")
    _emit(args, payload, text=text)
    return EXIT_OK


def cmd_sample(args) -> int:
    from . import numlab as nl

    m, n = _parse_dims(args.dims)
    p, q = (int(x) for x in args.birank.split(","))
    try:
        st = nl.gauss_newton_birank(m, n, p, q, seed=args.seed, tol=args.tol)
    except PptlabError as exc:
        print(f"sample: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    payload = {
        "kind": "sample",
        "dims": [m, n],
        "birank": [p, q],
        "seed": args.seed,
        "residual": st.residual,
        "iterations": st.iterations,
        "matrix": {"re": [[float(x.real) for x in row] for row in st.matrix],
                   "im": [[float(x.imag) for x in row] for row in st.matrix]},
    }
    _emit(args, payload, text=f"sampled {m}x{n} birank ({p},{q}): residual {st.residual:.2e} "
          f"in {st.iterations} iterations")
    return EXIT_OK


def cmd_survey(args) -> int:
    from . import numlab as nl

    dims = [_parse_dims(d) for d in args.dims.split()]
    biranks = [tuple(int(x) for x in b.split(",")) for b in args.birank.split()]
    reports = nl.unextendibility_survey(dims, biranks, samples=args.samples,
                                        seed=args.seed, tol=args.tol)
    payload = {"kind": "survey", "reports": [r.to_json() for r in reports]}
    _emit(args, payload, text=nl.survey_table(reports))
    return EXIT_OK


def cmd_verify(args) -> int:
    data = se.load(args.certificate)
    try:
        se.verify_certificate(data)
    except PptlabError as exc:
        print(f"verify: FAILED: {exc}")
        return EXIT_INCONCLUSIVE
    print(f"verify: OK ({data.get('kind')})")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from . import acceptance

    results = acceptance.run_all(seed=args.seed, include_k5=args.k5 or None)
    for r in results:
        print(r.line())
    payload = acceptance.manifest(results)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
    if args.json:
        print(json.dumps(payload, indent=2))
    return EXIT_OK if payload["passed"] else EXIT_INCONCLUSIVE


def cmd_plot(args) -> int:
    state = _load_state(args.state)
    if state.edges is None:
        print("plot: state carries no edge decomposition", file=sys.stderr)
        return EXIT_INPUT
    text = render_grid(state)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(render_svg(state))
        print(f"wrote {args.svg}")
    print(text)
    return EXIT_OK


def render_grid(state: qs.BipartiteState) -> str:
    """ASCII rendering: the site grid plus one line per edge."""
    m, n = state.dims
    lines = [f"{state.label or 'state'}: {m}x{n} grid, {len(state.edges)} edges"]
    used = [[" ." for _ in range(n)] for _ in range(m)]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    legend = []
    for idx, e in enumerate(state.edges):
        tag = letters[idx % len(letters)]
        sites = []
        for i in range(m):
            for j in range(n):
                x = e.vec[i * n + j]
                if x:
                    sites.append((i, j, x))
                    used[i][j] = f" {tag}" if used[i][j] == " ." else used[i][j][:1] + "*"
        desc = " ".join(f"{'+' if x.re >= 0 and x.im == 0 else ''}{x}|{i}{j}>" for i, j, x in sites)
        legend.append(f"  {tag}: {e.name} (weight {e.weight}) = {desc}")
    for i in range(m):
        lines.append("".join(used[i]))
    lines.extend(legend)
    lines.append("  (* marks sites shared by several edges)")
    return "\n".join(lines)


def render_svg(state: qs.BipartiteState) -> str:
    """Minimal SVG: sites as circles, edges as polylines (display only)."""
    m, n = state.dims
    cell = 60
    pad = 40
    w, h = pad * 2 + (n - 1) * cell, pad * 2 + (m - 1) * cell
    colors = ["#2a6f97", "#c44536", "#6a994e", "#b07d2b", "#7251b5", "#3a7ca5"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for idx, e in enumerate(state.edges):
        sites = [(i, j) for i in range(m) for j in range(n) if e.vec[i * n + j]]
        color = colors[idx % len(colors)]
        negative = any((e.vec[i * n + j].re < 0 or e.vec[i * n + j].im != 0) for i, j in sites)
        dash = ' stroke-dasharray="6,4"' if negative else ""
        pts = " ".join(f"{pad + j * cell},{pad + i * cell}" for i, j in sites)
        if len(sites) > 1:
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="3"{dash}/>')
        for i, j in sites:
            parts.append(f'<circle cx="{pad + j * cell}" cy="{pad + i * cell}" r="6" '
                         f'fill="{color}"/>')
    for i in range(m):
        for j in range(n):
            parts.append(f'<circle cx="{pad + j * cell}" cy="{pad + i * cell}" r="2" '
                         f'fill="#333"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def _parse_dims(text: str):
    m, n = text.lower().split("x")
    return int(m), int(n)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pptlab",
                                 description="exact PPT extensions and Schmidt-number certificates")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, out=True):
        p.add_argument("--json", action="store_true", help="emit JSON on stdout")
        if out:
            p.add_argument("--out", help="write the JSON payload to this path")

    p = sub.add_parser("build", help="build a state from a grid graph, family, or name")
    p.add_argument("--graph", help="GridGraph JSON file")
    p.add_argument("--family", type=int, help="family parameter k")
    p.add_argument("--state", help="named state or state JSON file")
    p.add_argument("--label", default="")
    common(p)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("ppt-check", help="exact PPT certificate")
    p.add_argument("--state", required=True)
    common(p)
    p.set_defaults(fn=cmd_ppt_check)

    p = sub.add_parser("extend", help="apply one serialized extension step")
    p.add_argument("--state", required=True)
    p.add_argument("--step", required=True,
                   help='JSON step, e.g. {"kind":"slocc","side":"A","phi":["1","0"]}')
    common(p)
    p.set_defaults(fn=cmd_extend)

    p = sub.add_parser("certify-sn", help="Schmidt number certification (lower + upper)")
    p.add_argument("--state", required=True)
    p.add_argument("--k", type=int, help="target Schmidt number (default: max edge SR)")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--method", choices=("groebner", "linear"), default="groebner",
                   help="ideal-membership route: Groebner reduction or the "
                        "homogeneous cofactor solver")
    p.add_argument("--exclude-deltas", action="store_true",
                   help="drop minors containing delta variables (family states)")
    common(p)
    p.set_defaults(fn=cmd_certify_sn)

    p = sub.add_parser("extremal", help="extremality checks of a split extension")
    p.add_argument("--state", required=True)
    p.add_argument("--side", choices=("A", "B"), default="A")
    p.add_argument("--perp", type=int, default=None,
                   help="local index of the adjoined level (default: last)")
    common(p)
    p.set_defaults(fn=cmd_extremal)

    p = sub.add_parser("sample", help="one Gauss-Newton birank sample")
    p.add_argument("--dims", required=True, help="e.g. 3x3")
    p.add_argument("--birank", required=True, help="e.g. 4,4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("survey", help="unextendibility survey over dims and biranks")
    p.add_argument("--dims", required=True, help="space-separated, e.g. '3x3 3x4'")
    p.add_argument("--birank", required=True, help="space-separated, e.g. '4,4 5,6'")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(fn=cmd_survey)

    p = sub.add_parser("verify", help="replay a certificate without re-deriving it")
    p.add_argument("certificate")
    common(p, out=False)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("reproduce", help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--k5", action="store_true", help="include the k=5 long job")
    common(p)
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("plot", help="grid-graph diagram of a state's edges (display only)")
    p.add_argument("--state", required=True)
    p.add_argument("--svg", help="also write an SVG file")
    common(p, out=False)
    p.set_defaults(fn=cmd_plot)

    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"{args.verb}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PptlabError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"{args.verb}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
