"""Command-line entry points: reduce, likelihood, simulate, bench, verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from typing import Optional, Sequence

from ._bits import state_to_string
from .emission import AlleleFrequencies, GenotypeData, emission_partition
from .ensemble import verify_markov, verify_refines
from .hmm import build_reduced, forward_likelihood, thetas_from_intervals
from .inheritance import Partition
from .pedigree import (
    Meiosis,
    MeiosisCapError,
    Pedigree,
    PedigreeError,
    meiosis_order,
    parse_pedigree,
    prune_irrelevant,
    serialize_pedigree,
)
from .pipeline import default_max_meioses, reduce_state_space
from .sim import OFFSPRING_MODEL, simulate_genotypes, simulate_pedigree

SCHEMA_VERSION = 1


def _load_pedigree(path: str, order: Optional[str]) -> Pedigree:
    with open(path) as fh:
        ped = parse_pedigree(fh.read())
    if order:
        tokens = [Meiosis.from_token(tok.strip()) for tok in order.split(",")]
        ped = meiosis_order(ped, tokens)
    return ped


def _emit_json(payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def _add_shared(parser: argparse.ArgumentParser, *, bootstrap: bool = True) -> None:
    parser.add_argument("--meiosis-order", metavar="LIST",
                        help="comma list of child:pat/child:mat tokens overriding bit order")
    parser.add_argument("--max-meioses", type=int, default=None,
                        help="post-pruning cap (default 14 full / 18 bootstrap)")
    if bootstrap:
        parser.add_argument("--bootstrap", choices=("auto", "off"), default="off",
                            help="auto collects founder+chain+couple isometries")


def cmd_reduce(args: argparse.Namespace) -> int:
    ped = _load_pedigree(args.pedigree, args.meiosis_order)
    variant = "bootstrap" if args.bootstrap == "auto" else "full"
    start = time.perf_counter()
    result = reduce_state_space(ped, variant=variant, max_meioses=args.max_meioses)
    elapsed = time.perf_counter() - start
    with open(args.out, "w") as fh:
        fh.write(result.partition.serialize())
    _emit_json(
        {
            "n_meioses": result.pedigree.n,
            "full_states": 1 << result.pedigree.n,
            "blocks": result.partition.num_blocks,
            "variant": variant,
            "wall_time_s": elapsed,
            "out": args.out,
        }
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    ped = _load_pedigree(args.pedigree, args.meiosis_order)
    pruned = prune_irrelevant(ped)
    with open(args.partition) as fh:
        text = fh.read()
    partition = Partition.parse(text)
    if partition.n != pruned.n:
        print(
            f"error: partition width {partition.n} does not match "
            f"pruned pedigree meiosis count {pruned.n}",
            file=sys.stderr,
        )
        return 2
    emission = emission_partition(pruned, cap=max(20, pruned.n))
    if not verify_refines(partition, emission):
        print("FAIL: partition does not respect the emission partition", file=sys.stderr)
        return 1
    ok, witness = verify_markov(partition)
    if not ok:
        n = partition.n
        block = "{" + ",".join(state_to_string(y, n) for y in witness.block) + "}"
        print(
            "FAIL: Markov property violated: witness "
            f"x1={state_to_string(witness.x1, n)} x2={state_to_string(witness.x2, n)} "
            f"block={block} vectors={witness.vector1} != {witness.vector2}",
            file=sys.stderr,
        )
        return 1
    print("OK: partition satisfies the Markov and emission properties")
    return 0


def cmd_likelihood(args: argparse.Namespace) -> int:
    ped = _load_pedigree(args.pedigree, args.meiosis_order)
    with open(args.genotypes) as fh:
        data = GenotypeData.parse(fh.read())
    with open(args.freqs) as fh:
        freqs = AlleleFrequencies.parse(fh.read())
    variant = "bootstrap" if args.bootstrap == "auto" else "full"
    start = time.perf_counter()
    result = reduce_state_space(ped, variant=variant, max_meioses=args.max_meioses)
    model = build_reduced(result.partition)
    thetas = thetas_from_intervals(data.intervals(), args.rate)
    loglik = forward_likelihood(model, result.pedigree, data, freqs, thetas)
    elapsed = time.perf_counter() - start
    _emit_json(
        {
            "log_likelihood": loglik,
            "n_meioses": result.pedigree.n,
            "full_states": 1 << result.pedigree.n,
            "reduced_states": result.partition.num_blocks,
            "variant": variant,
            "wall_time_s": elapsed,
        }
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.freqs:
        with open(args.freqs) as fh:
            freqs = AlleleFrequencies.parse(fh.read())
    else:
        freqs = AlleleFrequencies({"A": 0.5, "B": 0.5})
    outputs = []
    for r in range(args.replicates):
        ped = simulate_pedigree(
            args.generations,
            args.per_gen,
            args.offspring_mean,
            halfsib=args.halfsib,
            seed=(args.seed, r),
        )
        distances = [args.interval] * (args.sites - 1)
        data, _path = simulate_genotypes(
            ped, args.sites, distances, freqs, rate=args.rate, seed=(args.seed, r, 1)
        )
        suffix = f"_r{r}" if args.replicates > 1 else ""
        ped_path = f"{args.out_prefix}{suffix}.ped"
        geno_path = f"{args.out_prefix}{suffix}.geno"
        with open(ped_path, "w") as fh:
            fh.write(serialize_pedigree(ped))
        with open(geno_path, "w") as fh:
            fh.write(data.serialize())
        outputs.append({"pedigree": ped_path, "genotypes": geno_path, "n_meioses": ped.n})
    _emit_json(
        {
            "replicates": args.replicates,
            "seed": args.seed,
            "offspring_model": OFFSPRING_MODEL,
            "outputs": outputs,
        }
    )
    return 0


def _bench_one(task: tuple) -> dict:
    (r, generations, per_gen, offspring_mean, halfsib, variant, seed, max_meioses) = task
    ped = simulate_pedigree(generations, per_gen, offspring_mean, halfsib=halfsib, seed=(seed, r))
    cap = max_meioses if max_meioses is not None else default_max_meioses(variant)
    row = {
        "replicate": r,
        "n_meioses": "",
        "full_states": "",
        "ensemble_states": "",
        "runtime_ms": "",
        "variant": variant,
    }
    start = time.perf_counter()
    try:
        result = reduce_state_space(ped, variant=variant, max_meioses=cap)
    except MeiosisCapError:
        pruned = prune_irrelevant(ped, cap=max(20, ped.n))
        row["n_meioses"] = pruned.n
        row["full_states"] = 1 << pruned.n
        row["variant"] = "skipped"
        return row
    elapsed = time.perf_counter() - start
    row.update(
        n_meioses=result.pedigree.n,
        full_states=1 << result.pedigree.n,
        ensemble_states=result.partition.num_blocks,
        runtime_ms=round(elapsed * 1000.0, 3),
    )
    return row


BENCH_COLUMNS = ["replicate", "n_meioses", "full_states", "ensemble_states", "runtime_ms", "variant"]


def cmd_bench(args: argparse.Namespace) -> int:
    tasks = [
        (
            r,
            args.generations,
            args.per_gen,
            args.offspring_mean,
            args.halfsib,
            args.variant,
            args.seed,
            args.max_meioses,
        )
        for r in range(args.replicates)
    ]
    if args.jobs > 1 and tasks:
        import multiprocessing

        with multiprocessing.Pool(args.jobs) as pool:
            rows = pool.map(_bench_one, tasks)
    else:
        rows = [_bench_one(t) for t in tasks]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pedlump",
                                     description="Minimal lumped state spaces for pedigree HMMs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="compute the minimal ensemble partition")
    p.add_argument("pedigree")
    p.add_argument("--out", required=True, help="partition output file")
    _add_shared(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="check a partition against a pedigree")
    p.add_argument("pedigree")
    p.add_argument("partition")
    _add_shared(p, bootstrap=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("likelihood", help="reduced-HMM log-likelihood of genotype data")
    p.add_argument("pedigree")
    p.add_argument("genotypes")
    p.add_argument("freqs")
    p.add_argument("--lambda", dest="rate", type=float, default=1.0,
                   help="crossover rate per meiosis per Morgan")
    _add_shared(p)
    p.set_defaults(func=cmd_likelihood)

    p = sub.add_parser("simulate", help="simulate pedigree and genotype files")
    p.add_argument("--generations", type=int, default=3)
    p.add_argument("--per-gen", type=int, default=4)
    p.add_argument("--offspring-mean", type=float, default=2.0)
    p.add_argument("--halfsib", action="store_true")
    p.add_argument("--sites", type=int, default=20)
    p.add_argument("--interval", type=float, default=0.05, help="inter-site Morgans")
    p.add_argument("--lambda", dest="rate", type=float, default=1.0)
    p.add_argument("--freqs", help="allele frequency file (default biallelic 0.5/0.5)")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="seeded state-space reduction benchmark (CSV)")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--generations", type=int, default=3)
    p.add_argument("--per-gen", type=int, default=4)
    p.add_argument("--offspring-mean", type=float, default=2.0)
    p.add_argument("--halfsib", action="store_true")
    p.add_argument("--variant", choices=("full", "bootstrap"), default="bootstrap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-meioses", type=int, default=None)
    p.add_argument("--out", help="CSV output file (default stdout)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PedigreeError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
