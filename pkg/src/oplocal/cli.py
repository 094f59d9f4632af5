"""Batch front end: check commands over theory definition files.

Every command prints one JSON report to stdout.  Exit codes: 0 the property
holds / the construction succeeded, 1 it fails (witness in the report),
2 usage or validation error, 3 a resource cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import derivation, geometry, gpt, render, secrecy
from .errors import (
    CapExceeded,
    InvariantViolation,
    NotCommuting,
    PreconditionFailed,
    SpecError,
    WorkbenchError,
)
from .report import dump_report, make_report, validate_report
from .statespace import DEFAULT_CAP, check_commute, closure, orbit
from .theoryspec import TheorySpec, load_theory

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def _partition_json(p, space=None) -> dict:
    classes = p.classes()
    out = {"num_classes": p.num_classes, "classes": classes}
    if space is not None and space.labels is not None:
        out["class_labels"] = [[space.labels[x] for x in c] for c in classes]
    return out


def _load(args) -> TheorySpec:
    if not getattr(args, "spec_path", None):
        raise SpecError("this command needs a theory file")
    return load_theory(args.spec_path)


# --- command handlers: return (exit_code, fields) ---------------------------


def cmd_closure(args):
    spec = _load(args)
    m = spec.monoid(args.ops)
    elements = closure(m, args.cap)
    fields = {
        "size": len(elements),
        "elements": [e.name for e in elements] if args.elements else None,
    }
    return EXIT_HOLDS, fields


def cmd_orbit(args):
    spec = _load(args)
    m = spec.monoid(args.ops)
    states = sorted(orbit(args.state, m))
    return EXIT_HOLDS, {"state": args.state, "orbit": states}


def cmd_commute(args):
    spec = _load(args)
    result = check_commute(spec.monoid(args.ta), spec.monoid(args.tb))
    fields = {"holds": result.commutes, "witness": None}
    if result.witness is not None:
        w = result.witness
        fields["witness"] = {
            "f": w.f_name,
            "g": w.g_name,
            "state": w.state,
            "fg_state": w.fg_state,
            "gf_state": w.gf_state,
        }
    return (EXIT_HOLDS if result.commutes else EXIT_FAILS), fields


def cmd_secrecy(args):
    spec = _load(args)
    verdict = secrecy.check_secrecy(
        spec.monoid(args.secret), spec.agent(args.agent), cap=args.cap
    )
    return (EXIT_HOLDS if verdict.holds else EXIT_FAILS), verdict.to_json()


def cmd_extended_secrecy(args):
    spec = _load(args)
    verdict = secrecy.check_extended_secrecy(
        spec.monoid(args.secret),
        spec.agent(args.agent),
        spec.transform(args.f),
        cap=args.cap,
    )
    return (EXIT_HOLDS if verdict.holds else EXIT_FAILS), verdict.to_json()


def cmd_robustness(args):
    spec = _load(args)
    f = spec.transform(args.f) if args.f else None
    pre = spec.transform(args.pre) if args.pre else None
    try:
        verdict = secrecy.check_robustness_chain(
            spec.monoid(args.secret),
            spec.agent(args.agent),
            f=f,
            pre=pre,
            n=args.n,
            trials=args.trials,
            seed=args.seed,
            cap=args.cap,
        )
    except InvariantViolation as exc:
        return EXIT_FAILS, {
            "holds": False,
            "mode": "exhaustive",
            "chains_checked": None,
            "violation": str(exc),
        }
    return EXIT_HOLDS, {
        "holds": True,
        "mode": verdict.mode,
        "chains_checked": verdict.chains_checked,
    }


def cmd_terminality(args):
    spec = _load(args)
    if args.agent:
        p = spec.agent(args.agent).perspective
    elif args.perspective:
        p = spec.partition(_maybe_json(args.perspective))
    else:
        raise SpecError("terminality needs --agent or --perspective")
    verdict = secrecy.check_terminality(spec.monoid(args.ops), p)
    return (EXIT_HOLDS if verdict.holds else EXIT_FAILS), verdict.to_json()


def _maybe_json(literal: str):
    literal = literal.strip()
    if literal.startswith("["):
        try:
            return json.loads(literal)
        except json.JSONDecodeError as exc:
            raise SpecError(f"bad partition literal: {exc.msg}") from None
    return literal


def cmd_derive(args):
    spec = _load(args)
    if args.general:
        if not args.secret:
            raise SpecError("--general needs --secret")
        secret = spec.monoid(args.secret)
        tb = spec.monoid(args.tb)
        f = spec.transform(args.f) if args.f else None
        try:
            result = derivation.derive_secret_general(secret, tb, f=f, cap=args.cap)
            verified = True
        except InvariantViolation as exc:
            return EXIT_FAILS, {
                "method": derivation.METHOD_FIXPOINT_GENERAL,
                "partitions": {},
                "verified": False,
                "mutually_secret": None,
                "violation": str(exc),
            }
        fields = {
            "method": result.method,
            "partitions": {"result": _partition_json(result.partition, spec.space)},
            "verified": verified,
            "mutually_secret": None,
        }
        if args.dot:
            labels = [spec.space.label(x) for x in range(spec.space.size)]
            Path(args.dot).write_text(render.quotient_dot(result.partition, labels))
            fields["dot"] = args.dot
        return EXIT_HOLDS, fields

    if not args.ta:
        raise SpecError("derive needs --ta (or --general with --secret)")
    ta = spec.monoid(args.ta)
    tb = spec.monoid(args.tb)
    try:
        agent_a, agent_b = derivation.derive_secret_agents(ta, tb, cap=args.cap)
    except NotCommuting as exc:
        return EXIT_FAILS, {
            "method": derivation.METHOD_WEAK_COMPONENTS,
            "partitions": {},
            "verified": False,
            "mutually_secret": False,
            "witness": str(exc.witness),
        }
    fields = {
        "method": derivation.METHOD_WEAK_COMPONENTS,
        "partitions": {
            "A": _partition_json(agent_a.perspective, spec.space),
            "B": _partition_json(agent_b.perspective, spec.space),
        },
        "verified": True,
        "mutually_secret": True,
    }
    if args.dot:
        components = derivation.induced_perspective(ta).partition
        Path(args.dot).write_text(render.generator_graph_dot(ta, components))
        fields["dot"] = args.dot
    return EXIT_HOLDS, fields


def cmd_perceived_commute(args):
    spec = _load(args)
    ta, tb = spec.monoid(args.ta), spec.monoid(args.tb)
    if args.agent:
        p = spec.agent(args.agent).perspective
    elif args.perspective:
        p = spec.partition(_maybe_json(args.perspective))
    else:
        raise SpecError("perceived-commute needs --agent or --perspective")
    result = derivation.perceived_commutation(ta, tb, p, cap=args.cap)
    fields = {
        "holds": result.holds,
        "mode": result.mode,
        "globally_commute": bool(check_commute(ta, tb)),
        "witness": list(result.witness) if result.witness else None,
    }
    return (EXIT_HOLDS if result.holds else EXIT_FAILS), fields


def cmd_gpt_check(args):
    if args.spec_path:
        spec = _load(args)
        box = spec.box(args.box)
    else:
        box = gpt.named_box(args.box)
    posts = gpt.standard_bob_posts()
    if args.nonlocal_posts:
        posts.append(gpt.swap_sides_channel())
    verdict = gpt.check_gpt_extended_secrecy(
        gpt.standard_alice_actions(),
        posts,
        box,
        gpt.second_bit_events(),
        gpt.standard_states(),
        eps=args.eps,
    )
    traditional = gpt.check_traditional_ns(box)
    fields = verdict.to_json()
    fields["traditional_ns"] = traditional
    fields["local_posts"] = not args.nonlocal_posts
    return (EXIT_HOLDS if verdict.holds else EXIT_FAILS), fields


def cmd_ns_equivalence(args):
    box = gpt.named_box(args.box) if args.box else None
    try:
        result = gpt.check_ns_equivalence(box=box, trials=args.trials, seed=args.seed)
    except InvariantViolation as exc:
        return EXIT_FAILS, {
            "total": 0,
            "agreements": 0,
            "entries": [],
            "violation": str(exc),
        }
    return EXIT_HOLDS, result.to_json()


def cmd_signal_time(args):
    spec = _load(args)
    if args.dynamics not in spec.dynamics:
        raise SpecError(f"unknown dynamics {args.dynamics!r}", field="dynamics")
    t = geometry.first_signalling_time(
        spec.monoid(args.ops),
        spec.agent(args.agent),
        spec.dynamics[args.dynamics],
        args.t_max,
        cap=args.cap,
    )
    return EXIT_HOLDS, {"first_signalling_time": t, "t_max": args.t_max}


def _largest_finite_block(d: np.ndarray) -> list[int]:
    """Largest set of indices with pairwise finite distances (via components)."""
    n = d.shape[0]
    seen = [False] * n
    best: list[int] = []
    for start in range(n):
        if seen[start]:
            continue
        stack, component = [start], []
        seen[start] = True
        while stack:
            u = stack.pop()
            component.append(u)
            for v in range(n):
                if not seen[v] and np.isfinite(d[u, v]):
                    seen[v] = True
                    stack.append(v)
        if len(component) > len(best):
            best = sorted(component)
    return best


def cmd_localize(args):
    if args.graph:
        data = json.loads(Path(args.graph).read_text())
        n = int(data["nodes"])
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for u, v in data["edges"]:
            adjacency[int(u)].append(int(v))
        dm = geometry.hop_distances(adjacency)
        node_names = [str(i) for i in range(n)]
    else:
        spec = _load(args)
        if not args.agents:
            raise SpecError("localize needs --agents with a theory file")
        names = [a.strip() for a in args.agents.split(",") if a.strip()]
        agents = [(spec.agent(nm).ops, spec.agent(nm)) for nm in names]
        if args.dynamics not in spec.dynamics:
            raise SpecError(f"unknown dynamics {args.dynamics!r}", field="dynamics")
        dm = geometry.distance_matrix(
            agents, spec.dynamics[args.dynamics], args.t_max,
            speed=args.speed, cap=args.cap,
        )
        node_names = names

    kept = _largest_finite_block(dm.d)
    excluded = [i for i in range(dm.n) if i not in kept]
    sub = geometry.DistanceMatrix(dm.d[np.ix_(kept, kept)], units=dm.units)
    embedding = geometry.embed(sub, args.dim, method=args.method)

    rmse = None
    truth = None
    if args.truth:
        truth_all = np.asarray(json.loads(Path(args.truth).read_text()), dtype=float)
        if truth_all.ndim == 1:
            truth_all = truth_all[:, None]
        truth = truth_all[kept]
        coords = embedding.coords
        # a k-dim embedding may be judged against higher-dim ground truth
        width = max(coords.shape[1], truth.shape[1])
        coords = np.pad(coords, ((0, 0), (0, width - coords.shape[1])))
        truth = np.pad(truth, ((0, 0), (0, width - truth.shape[1])))
        rmse = geometry.procrustes_rmse(coords, truth)

    fields = {
        "coordinates": [
            {"node": node_names[i], "coords": [float(v) for v in row]}
            for i, row in zip(kept, embedding.coords)
        ],
        "stress": embedding.stress,
        "method": embedding.method,
        "rmse": rmse,
        "excluded": [node_names[i] for i in excluded],
        "units": dm.units,
    }
    if args.svg:
        render.save_embedding_figure(
            embedding.coords,
            args.svg,
            labels=[node_names[i] for i in kept],
            truth=truth,
            title=f"{embedding.method} ({dm.units})",
        )
        fields["svg"] = args.svg
    return EXIT_HOLDS, fields


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP,
                        help="monoid enumeration cap")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized runs")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp for byte-identical reports")

    parser = argparse.ArgumentParser(
        prog="oplocal",
        description="Exact finite-model checks for agents, secrecy and signalling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, spec_required=True, **kwargs):
        p = sub.add_parser(name, parents=[common], **kwargs)
        if spec_required is not None:
            nargs = None if spec_required else "?"
            p.add_argument("spec_path", nargs=nargs, help="theory definition file")
        p.set_defaults(handler=handler)
        return p

    p = add("closure", cmd_closure, help="materialize a generated monoid")
    p.add_argument("--ops", required=True, help="comma-separated generator names")
    p.add_argument("--elements", action="store_true", help="list element names")

    p = add("orbit", cmd_orbit, help="forward reachability of a state")
    p.add_argument("--state", type=int, required=True)
    p.add_argument("--ops", required=True)

    p = add("commute", cmd_commute, help="do two generated monoids commute?")
    p.add_argument("--ta", required=True)
    p.add_argument("--tb", required=True)

    p = add("secrecy", cmd_secrecy, help="are the secret ops invisible to the agent?")
    p.add_argument("--secret", required=True)
    p.add_argument("--agent", required=True)

    p = add("extended-secrecy", cmd_extended_secrecy,
            help="secrecy in the presence of a global transform")
    p.add_argument("--secret", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--f", required=True, help="global transform name")

    p = add("robustness", cmd_robustness, help="interleaved-chain robustness suite")
    p.add_argument("--secret", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--f", default=None)
    p.add_argument("--pre", default=None)
    p.add_argument("--n", type=int, default=4, help="max chain length")
    p.add_argument("--trials", type=int, default=1000)

    p = add("terminality", cmd_terminality, help="class-preservation of actions")
    p.add_argument("--ops", required=True)
    p.add_argument("--agent", default=None)
    p.add_argument("--perspective", default=None,
                   help="partition literal ('bits:1,2' or JSON class list)")

    p = add("derive", cmd_derive, help="derive secret agents from transformations")
    p.add_argument("--ta", default=None)
    p.add_argument("--tb", required=True)
    p.add_argument("--general", action="store_true",
                   help="general no-commutation construction")
    p.add_argument("--secret", default=None, help="secret ops (with --general)")
    p.add_argument("--f", default=None, help="global transform (with --general)")
    p.add_argument("--dot", default=None, help="write the generator graph as DOT")

    p = add("perceived-commute", cmd_perceived_commute,
            help="commutation as seen through a perspective")
    p.add_argument("--ta", required=True)
    p.add_argument("--tb", required=True)
    p.add_argument("--agent", default=None)
    p.add_argument("--perspective", default=None)

    p = add("gpt-check", cmd_gpt_check, spec_required=False,
            help="non-signalling checks for a 2-bit box")
    p.add_argument("--box", required=True, help="named fixture or box from the file")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--nonlocal-posts", action="store_true",
                   help="exploratory: add a side-swapping post-processing channel")

    p = add("ns-equivalence", cmd_ns_equivalence, spec_required=None,
            help="agreement of the two non-signalling notions")
    p.add_argument("--box", default=None)
    p.add_argument("--trials", type=int, default=200)

    p = add("signal-time", cmd_signal_time, help="first signalling time under dynamics")
    p.add_argument("--ops", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--dynamics", required=True)
    p.add_argument("--t-max", type=int, default=32)

    p = add("localize", cmd_localize, spec_required=False,
            help="reconstruct agent positions from signalling data")
    p.add_argument("--graph", default=None, help="edge-list JSON instead of a theory")
    p.add_argument("--agents", default=None, help="comma-separated agent names")
    p.add_argument("--dynamics", default=None)
    p.add_argument("--t-max", type=int, default=32)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--method", default=geometry.CLASSICAL_MDS,
                   choices=[geometry.CLASSICAL_MDS, geometry.STRESS_MAJORIZATION])
    p.add_argument("--truth", default=None, help="ground-truth coordinates JSON")
    p.add_argument("--svg", default=None, help="render the embedding to this file")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        exit_code, fields = args.handler(args)
    except SpecError as exc:
        print(f"oplocal: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"oplocal: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PreconditionFailed as exc:
        print(f"oplocal: precondition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotCommuting, InvariantViolation) as exc:
        print(f"oplocal: {exc}", file=sys.stderr)
        return EXIT_FAILS
    except WorkbenchError as exc:
        print(f"oplocal: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        # malformed inputs (files, graphs, dimensions) are usage errors
        print(f"oplocal: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = make_report(
        args.command, exit_code, fields, timestamp=not args.no_timestamp
    )
    validate_report(report)
    print(dump_report(report))
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
