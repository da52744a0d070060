import argparse
import dataclasses
import json
import math
import sys
from datetime import datetime

import numpy as np
from torch.utils.tensorboard.writer import SummaryWriter

from cm_lab import rng
from cm_lab.errors import CMLabError, UsageError
from cm_lab.functional import (
    empirical_constant_sweep,
    expectation_mc,
    lambda_for_index,
    smoothed_sum,
    spectral_sum,
)
from cm_lab.kernels import build_kernel_suite, kernel_chain_residual, verify_support_lemma
from cm_lab.partitions import bucket_points, equal_measure_partition, verify_partition
from cm_lab.pointsets import FAMILIES, WEIGHT_MODES, WeightedPointSet, family_weights, generate_instance
from cm_lab.quadrature import corollary_audit, exactness_scan, parse_rule
from cm_lab.reports import emit_report, read_point_file
from cm_lab.spectra import ManifoldKind, enumerate_spectrum, sup_norm_sanity, weyl_counting_check
from cm_lab.transforms import verify_enu_identity


# Flags that shape where output goes, not what is computed
OUTPUT_FLAGS = ("out", "format", "log_dir", "wandb")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting."""

    def error(self, message):
        code = "unknown_flag" if message.startswith("unrecognized arguments") else "usage_error"
        raise UsageError(message, code=code)


def _int_list(text):
    return [int(item) for item in text.split(",") if item.strip()]


def _add_output_flags(parser):
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--format", type=str, choices=("json", "csv"), default="json")
    parser.add_argument("--log_dir", type=str, default=None)
    parser.add_argument("--wandb", action="store_true")


def _add_point_flags(parser):
    parser.add_argument("--points", type=str, default=None)
    parser.add_argument("--family", type=str, choices=FAMILIES, default=None)
    parser.add_argument("--N", type=int, default=None)
    parser.add_argument("--instance", type=int, default=0)
    parser.add_argument("--weight_mode", type=str, choices=WEIGHT_MODES, default="uniform")
    parser.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = ArgumentParser(prog="cm_lab")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("sum")
    sub.add_argument("--manifold", type=str, required=True)
    _add_point_flags(sub)
    sub.add_argument("--X", type=int, required=True)
    sub.add_argument("--smoothed", action="store_true")
    sub.add_argument("--epsilon", type=float, default=0.5)

    sub = commands.add_parser("sweep")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--families", type=str, default=",".join(FAMILIES))
    sub.add_argument("--X_list", type=str, required=True)
    sub.add_argument("--N", type=int, required=True)
    sub.add_argument("--instances", type=int, default=10)
    sub.add_argument("--weight_mode", type=str, choices=WEIGHT_MODES, default="uniform")
    sub.add_argument("--kappa", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)

    sub = commands.add_parser("expectation")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--X", type=int, required=True)
    sub.add_argument("--N", type=int, required=True)
    sub.add_argument("--trials", type=int, default=10_000)
    sub.add_argument("--weight_mode", type=str, choices=WEIGHT_MODES, default="uniform")
    sub.add_argument("--seed", type=int, default=None)

    sub = commands.add_parser("kernel-verify")
    sub.add_argument("--dimension", type=int, required=True)
    sub.add_argument("--lambda_X", type=float, required=True)
    sub.add_argument("--epsilon", type=float, default=0.5)
    sub.add_argument("--profile_out", type=str, default=None)

    sub = commands.add_parser("enu-verify")
    sub.add_argument("--dimension", type=int, required=True)
    sub.add_argument("--nu", type=float, required=True)
    sub.add_argument("--z_abs", type=float, required=True)
    sub.add_argument("--s", type=float, required=True)

    sub = commands.add_parser("partition")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--Y", type=int, required=True)
    sub.add_argument("--verify_samples", "--verify-samples", dest="verify_samples", type=int, default=0)
    sub.add_argument("--seed", type=int, default=None)

    sub = commands.add_parser("bucket")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--Y", type=int, required=True)
    _add_point_flags(sub)

    sub = commands.add_parser("quad-scan")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--rule", type=str, required=True)
    sub.add_argument("--X_probe", type=int, default=None)
    sub.add_argument("--tol", type=float, default=1e-10)

    sub = commands.add_parser("quad-audit")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--rules", type=str, required=True)
    sub.add_argument("--X_probe", type=int, default=None)
    sub.add_argument("--tol", type=float, default=1e-10)

    sub = commands.add_parser("spectrum")
    sub.add_argument("--manifold", type=str, required=True)
    sub.add_argument("--count", type=int, default=32)
    sub.add_argument("--weyl_T", type=float, default=None)
    sub.add_argument("--sup_norm_grid", type=int, default=None)

    for sub in commands.choices.values():
        _add_output_flags(sub)

    return parser


def resolved_config(args):
    return {key: value for key, value in vars(args).items() if key not in OUTPUT_FLAGS}


def argv_from_config(config):
    """Command line that recomputes a report from its embedded config."""
    argv = [config["command"]]
    for key, value in config.items():
        if key == "command" or value is None or value is False:
            continue
        argv.append(f"--{key}")
        if value is not True:
            argv.append(str(value))

    return argv


def _load_points(args, manifold):
    if args.points:
        declared, points, weights = read_point_file(args.points, manifold)
        return WeightedPointSet(declared, points, weights)
    if args.family:
        if args.N is None or args.N < 1:
            raise UsageError("--family needs --N >= 1")
        return generate_instance(manifold, args.family, args.N, args.weight_mode, args.seed, args.instance)

    raise UsageError("either --points or --family is required")


# Commands: each returns (result, [(tag, value, step), ...])


def cmd_sum(args):
    manifold = ManifoldKind.parse(args.manifold)
    pts = _load_points(args, manifold)

    report = spectral_sum(pts, args.X, seed=args.seed)
    result = report.to_record()
    if args.smoothed:
        suite = build_kernel_suite(manifold.dimension, lambda_for_index(manifold, args.X), args.epsilon)
        result["smoothed_S"] = smoothed_sum(pts, suite)
        result["lambda_X"] = suite.lambda_X

    return result, [("sum/S", report.S, args.X)]


def cmd_sweep(args):
    manifold = ManifoldKind.parse(args.manifold)
    families = [family.strip() for family in args.families.split(",") if family.strip()]

    sweep = empirical_constant_sweep(
        manifold,
        families,
        _int_list(args.X_list),
        args.N,
        args.instances,
        weight_mode=args.weight_mode,
        seed=args.seed,
        kappa=args.kappa,
        progress=True,
    )

    scalars = [(f"sweep/min_ratio_{entry['family']}", entry["min_ratio"], entry["X"]) for entry in sweep.summary]
    return sweep.to_record(), scalars


def cmd_expectation(args):
    manifold = ManifoldKind.parse(args.manifold)
    seed = rng.require_seed(args.seed)
    weights = family_weights(args.weight_mode, args.N, rng.stream_key(seed, len(FAMILIES)))

    result = expectation_mc(manifold, args.X, weights, args.trials, seed, progress=True)
    return result, [("expectation/mean", result["mean"], args.X), ("expectation/target", result["target"], args.X)]


def cmd_kernel_verify(args):
    suite = build_kernel_suite(args.dimension, args.lambda_X, args.epsilon)
    lemma = verify_support_lemma(suite)
    grid, values = lemma.pop("grid"), lemma.pop("values")

    if args.profile_out:
        rows = [{"s": s, "value": value} for s, value in zip(grid.tolist(), values.tolist())]
        emit_report(rows, "csv", args.profile_out)

    rho = np.linspace(0.0, suite.phi.outer, 65)
    result = {
        "suite": suite.describe(),
        "H_at_zero": float(suite.H(0.0)),
        "support_lemma": lemma,
        "chain_residual": kernel_chain_residual(suite, rho),
    }
    scalars = [
        ("kernel/max_violation_neg", lemma["max_violation_neg"], 0),
        ("kernel/max_tail", lemma["max_tail"], 0),
    ]
    return result, scalars


def cmd_enu_verify(args):
    result = verify_enu_identity(args.dimension, args.nu, args.z_abs, args.s)
    return result, [("enu/rel_err", result["rel_err"], 0)]


def cmd_partition(args):
    manifold = ManifoldKind.parse(args.manifold)
    partition = equal_measure_partition(manifold, args.Y)

    result = partition.to_record()
    scalars = [("partition/c1_hat", partition.c1_hat, args.Y), ("partition/c2_hat", partition.c2_hat, args.Y)]
    if args.verify_samples:
        result["verification"] = verify_partition(partition, args.verify_samples, args.seed)
        scalars.append(("partition/max_measure_z", result["verification"]["max_measure_z"], args.Y))

    return result, scalars


def cmd_bucket(args):
    manifold = ManifoldKind.parse(args.manifold)
    pts = _load_points(args, manifold)
    buckets = bucket_points(equal_measure_partition(manifold, args.Y), pts)

    rows = [{"region": bucket.region, "count": bucket.count, "weight_sum": bucket.weight_sum} for bucket in buckets]
    result = {"manifold": manifold.name, "Y": args.Y, "N": pts.size, "occupied_regions": len(rows), "rows": rows}
    return result, [("bucket/occupied_regions", len(rows), args.Y)]


def cmd_quad_scan(args):
    manifold = ManifoldKind.parse(args.manifold)
    rule = parse_rule(args.rule, manifold)
    probe = args.X_probe if args.X_probe is not None else 4 * rule.size + 4

    certificate = exactness_scan(rule, probe, args.tol)
    scalars = [("quad/X_max", certificate.X_max, rule.size)]
    if certificate.node_ratio is not None:
        scalars.append(("quad/node_ratio", certificate.node_ratio, rule.size))

    return certificate.to_record(), scalars


def cmd_quad_audit(args):
    manifold = ManifoldKind.parse(args.manifold)
    rules = [parse_rule(text.strip(), manifold) for text in args.rules.split(",") if text.strip()]
    if not rules:
        raise UsageError("--rules needs at least one rule")

    audit = corollary_audit(rules, args.tol, args.X_probe)
    return audit, [("quad/node_ratio", row["node_ratio"], row["N"]) for row in audit["rows"]]


def cmd_spectrum(args):
    manifold = ManifoldKind.parse(args.manifold)
    spectrum = enumerate_spectrum(manifold, args.count)

    rows = [dataclasses.asdict(pair) for pair in spectrum]
    result = {"manifold": manifold.name, "count": len(rows), "rows": rows}
    if args.weyl_T is not None:
        result["weyl"] = weyl_counting_check(manifold, args.weyl_T)
    if args.sup_norm_grid is not None:
        pair = spectrum[-1]
        result["sup_norm"] = {
            "index": pair.index,
            "sup": sup_norm_sanity(manifold, pair, args.sup_norm_grid),
            "reference": (1.0 + pair.frequency) ** ((manifold.dimension - 1) / 2.0),
        }

    return result, []


COMMANDS = {
    "sum": cmd_sum,
    "sweep": cmd_sweep,
    "expectation": cmd_expectation,
    "kernel-verify": cmd_kernel_verify,
    "enu-verify": cmd_enu_verify,
    "partition": cmd_partition,
    "bucket": cmd_bucket,
    "quad-scan": cmd_quad_scan,
    "quad-audit": cmd_quad_audit,
    "spectrum": cmd_spectrum,
}


def execute(args):
    config = resolved_config(args)
    run_name = args.command
    log_dir = args.log_dir or ("runs" if args.wandb else None)

    writer = None
    if log_dir:
        run_time = str(datetime.now().strftime("%d-%m_%H:%M:%S"))
        run_dir = f"{log_dir}/{run_name}__{run_time}"
        print(f"Commencing {run_name} on {config.get('manifold', config.get('dimension'))}.", file=sys.stderr)
        print(f"Results will be saved to: {run_dir}", file=sys.stderr)

        # Initialize wandb if needed (https://wandb.ai/)
        if args.wandb:
            import wandb

            wandb.init(
                project="cm-lab",
                name=f"{run_name}__{run_time}",
                sync_tensorboard=True,
                config=config,
                save_code=True,
            )

        # Create tensorboard writer and save hyperparameters
        writer = SummaryWriter(run_dir)
        writer.add_text(
            "hyperparameters",
            "|param|value|\n|-|-|\n%s" % ("\n".join([f"|{key}|{value}|" for key, value in config.items()])),
        )

    try:
        result, scalars = COMMANDS[args.command](args)
        if writer is not None:
            for tag, value, step in scalars:
                if value is not None and math.isfinite(value):
                    writer.add_scalar(tag, value, step)
    finally:
        if writer is not None:
            writer.close()

    if args.format == "csv":
        header = {"command": args.command, "config": config}
        if isinstance(result, dict) and "rows" in result:
            header.update((key, value) for key, value in result.items() if key != "rows" and key not in header)
        emit_report(result, "csv", args.out, header=header)
    else:
        emit_report({"command": args.command, "config": config, "result": result}, "json", args.out)

    return result


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        execute(args)
    except CMLabError as err:
        return _fail(err.code, err.message)
    except ValueError as err:
        return _fail("invalid_argument", str(err))

    return 0


def _fail(code, message):
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
