"""Command-line entry point wiring the library into reproducible workflows.

Exit codes: 0 ok, 1 usage error, 2 validation error, 3 numerical failure.
Every command records its configuration (including seeds) in its JSON
output, and rerunning a configuration reproduces the numbers it printed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, analysis, conic, exact, graphs, model, rounding
from .errors import NumericalError, QmcboundError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load_graph(path) -> graphs.Graph:
    if str(path).endswith((".txt", ".edges", ".edgelist")):
        return graphs.load_edgelist(path)
    return graphs.load_instance(path)


def _write_json(doc, path):
    if path is None:
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")


def _cmd_generate(args) -> int:
    if args.kind == "square":
        g = graphs.gen_square(args.L, periodic=not args.open)
    elif args.kind == "kagome":
        g = graphs.gen_kagome(args.cx, args.cy, periodic=not args.open)
    elif args.kind == "ss":
        g = graphs.gen_shastry_sutherland(args.L, args.j, args.jd)
    else:  # er
        g = graphs.gen_erdos_renyi(args.n, args.p, args.seed)
    if args.sigma > 0:
        g = graphs.apply_disorder(g, args.sigma, args.disorder_seed)
    if args.format == "edgelist":
        graphs.save_edgelist(g, args.output or "instance.txt")
    else:
        if args.output is None:
            _write_json({
                "name": g.meta.get("family", "instance"), "n": g.n,
                "edges": [[i, j, w] for i, j, w in g.edges], "meta": g.meta,
            }, None)
        else:
            graphs.save_instance(g, args.output)
    print(f"generated {g.meta.get('family', 'instance')}: n={g.n} "
          f"|E|={len(g.edges)} W={g.total_weight:g}", file=sys.stderr)
    return EXIT_OK


def _cmd_solve(args) -> int:
    g = _load_graph(args.instance)
    sol = model.solve_relaxation(
        g, level=args.relaxation, triple_policy=args.triples,
        quad_policy=args.quads, tol=args.tol, max_iter=args.max_iter,
        method=args.method, verbose=args.verbose,
    )
    doc = sol.to_json_dict()
    doc["instance"] = {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges],
                       "meta": g.meta}
    doc["relaxation"] = args.relaxation
    doc["config"] = vars(args) | {"command": "solve"}
    _write_json(doc, args.output)
    print(f"{args.relaxation}: varbench {sol.objective_varbench:.6f} "
          f"qmc_min {sol.objective_qmc_min:.6f}", file=sys.stderr)
    return EXIT_OK


def _cmd_exact(args) -> int:
    g = _load_graph(args.instance)
    e_vb = exact.ground_energy(g, method=args.method,
                               sectors=not args.no_sectors, tol=args.tol)
    e_qmc = model.convert_energy(e_vb, graphs.ScalingConvention.VARBENCH,
                                 graphs.ScalingConvention.QMC_MIN,
                                 g.total_weight)
    doc = {"ground_energy": {"varbench": e_vb, "qmc_min": e_qmc},
           "config": vars(args) | {"command": "exact"}}
    _write_json(doc, args.output)
    print(f"exact: varbench {e_vb:.6f} qmc_min {e_qmc:.6f}", file=sys.stderr)
    return EXIT_OK


def _rebuild_solution(g, doc) -> model.RelaxSolution:
    vmap = model.VariableMap(g.n, {(i, j): k for k, (i, j) in
                                   enumerate((i, j) for i in range(g.n)
                                             for j in range(i + 1, g.n))})
    x = np.zeros(vmap.num_pairs)
    for i, j, val in doc["x"]:
        x[vmap.pair_index[(int(i), int(j))]] = float(val)
    sol = model.RelaxSolution(
        graph=g, variable_map=vmap, x=x,
        objective_varbench=float(doc["objective"]["varbench"]),
        objective_qmc_min=float(doc["objective"]["qmc_min"]),
        solver_stats=doc.get("solver", {}),
    )
    if "M" in doc:
        sol.M = np.array(doc["M"], dtype=float)
    return sol


def _cmd_round(args) -> int:
    g = _load_graph(args.instance)
    with open(args.result) as fh:
        doc = json.load(fh)
    sol = _rebuild_solution(g, doc)
    if sol.M is None:
        raise ValidationError(
            "result file carries no moment matrix; round needs a soc-p1 solve"
        )
    res = rounding.round_solution(sol, g, t=args.t, samples=args.samples,
                                  seed=args.seed)
    out = res.to_json_dict()
    out["objective_varbench"] = {
        "expected_S": g.total_weight - 4.0 * res.expected_energy_S,
        "expected_prod": g.total_weight - 4.0 * res.expected_energy_prod,
    }
    if res.best_sampled_energy is not None:
        out["objective_varbench"]["best_sampled"] = \
            g.total_weight - 4.0 * res.best_sampled_energy
    out["config"] = vars(args) | {"command": "round"}
    _write_json(out, args.output)
    print(f"rounding: ratio {res.guarantee_ratio:.4f} "
          f"expected_best {res.expected_best:.6f} (qmc-max)", file=sys.stderr)
    return EXIT_OK


def _parse_grid(text):
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count)]
    return [float(v) for v in text.split(",")]


def _cmd_sweep(args) -> int:
    if args.kind == "ss":
        grid = _parse_grid(args.grid)
        res = analysis.run_ss_sweep(args.L, grid, sigma=args.sigma,
                                    seed=args.seed, instances=args.instances,
                                    with_p1=not args.no_p1, tol=args.tol,
                                    keep_edge_values=args.heatmap is not None)
        if args.output:
            res.to_json(args.output)
        if args.csv:
            res.to_csv(args.csv)
        if args.heatmap:
            g = graphs.gen_shastry_sutherland(args.L, grid[0], 1.0)
            values = {(i, j): x for i, j, _, x in res.points[0]["edge_x"]}
            analysis.emit_heatmap(values, g, args.heatmap)
        for pt in res.points:
            ed = pt.get("ed")
            print(f"J/J_D={pt['jratio']:.4f} soc={pt['soc']:.6f} "
                  f"p1={pt.get('soc_p1')} ed={ed}", file=sys.stderr)
    else:  # er
        res = analysis.run_er_study(args.n, args.p, args.instances,
                                    relaxation=args.relaxation,
                                    seed=args.seed, tol=args.tol)
        doc = {"mean_ratio": res.mean_ratio, "std_ratio": res.std_ratio,
               "ratios": res.ratios, "seeds": res.seeds,
               "redraws": res.redraws,
               "config": vars(args) | {"command": "sweep"}}
        _write_json(doc, args.output)
        print(f"er n={args.n} p={args.p}: mean ratio {res.mean_ratio:.3f} "
              f"over {args.instances} instances", file=sys.stderr)
    return EXIT_OK


def _cmd_ratio_lp(args) -> int:
    r = analysis.approx_ratio_lp(args.t)
    _write_json({"t": args.t, "ratio": r,
                 "config": {"command": "ratio-lp", "t": args.t}}, args.output)
    print(f"r({args.t}) = {r:.4f}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_verification
    ok = run_verification(quick=args.quick, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmcbound",
        description="Certified lower bounds for Quantum Max Cut via conic "
                    "relaxations over consistent few-qubit marginals.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a problem instance")
    gen.add_argument("kind", choices=["square", "kagome", "ss", "er"])
    gen.add_argument("--L", type=int, default=4)
    gen.add_argument("--cx", type=int, default=2)
    gen.add_argument("--cy", type=int, default=3)
    gen.add_argument("--open", action="store_true", help="open boundaries")
    gen.add_argument("--j", type=float, default=1.0)
    gen.add_argument("--jd", type=float, default=1.0)
    gen.add_argument("--n", type=int, default=10)
    gen.add_argument("--p", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--sigma", type=float, default=0.0)
    gen.add_argument("--disorder-seed", type=int, default=0)
    gen.add_argument("--format", choices=["json", "edgelist"], default="json")
    gen.add_argument("--output", default=None)
    gen.set_defaults(func=_cmd_generate)

    slv = sub.add_parser("solve", help="solve a relaxation")
    slv.add_argument("instance")
    slv.add_argument("--relaxation", choices=list(model.LEVELS), default="soc")
    slv.add_argument("--triples", choices=[model.ALL, model.TWO_EDGE],
                     default=model.ALL)
    slv.add_argument("--quads", choices=[model.ALL, model.TWO_EDGE],
                     default=model.TWO_EDGE)
    slv.add_argument("--tol", type=float, default=1e-8)
    slv.add_argument("--max-iter", type=int, default=200)
    slv.add_argument("--method", choices=["ipm", "admm"], default="ipm")
    slv.add_argument("--verbose", action="store_true")
    slv.add_argument("--output", default=None)
    slv.set_defaults(func=_cmd_solve)

    exa = sub.add_parser("exact", help="exact ground-state energy")
    exa.add_argument("instance")
    exa.add_argument("--method", choices=["auto", "dense", "lanczos"],
                     default="auto")
    exa.add_argument("--no-sectors", action="store_true")
    exa.add_argument("--tol", type=float, default=1e-9)
    exa.add_argument("--output", default=None)
    exa.set_defaults(func=_cmd_exact)

    rnd = sub.add_parser("round", help="round a soc-p1 result to a state")
    rnd.add_argument("instance")
    rnd.add_argument("result", help="JSON written by 'solve --relaxation soc-p1'")
    rnd.add_argument("--t", type=float, default=0.771)
    rnd.add_argument("--samples", type=int, default=0)
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--output", default=None)
    rnd.set_defaults(func=_cmd_round)

    swp = sub.add_parser("sweep", help="parameter sweeps with optional ED")
    swp.add_argument("kind", choices=["ss", "er"])
    swp.add_argument("--L", type=int, default=4)
    swp.add_argument("--grid", default="0.2:1.0:0.1",
                     help="J/J_D grid, 'start:stop:step' or comma list")
    swp.add_argument("--sigma", type=float, default=0.0)
    swp.add_argument("--n", type=int, default=10)
    swp.add_argument("--p", type=float, default=0.5)
    swp.add_argument("--relaxation", choices=["soc", "soc-p1"], default="soc")
    swp.add_argument("--instances", type=int, default=1)
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--tol", type=float, default=1e-8)
    swp.add_argument("--no-p1", action="store_true")
    swp.add_argument("--csv", default=None)
    swp.add_argument("--heatmap", default=None)
    swp.add_argument("--output", default=None)
    swp.set_defaults(func=_cmd_sweep)

    rlp = sub.add_parser("ratio-lp", help="worst-case approximation ratio")
    rlp.add_argument("--t", type=float, default=0.771)
    rlp.add_argument("--output", default=None)
    rlp.set_defaults(func=_cmd_ratio_lp)

    ver = sub.add_parser("verify", help="run the invariant suites")
    ver.add_argument("--quick", action="store_true",
                     help="smaller sample counts")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QmcboundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
