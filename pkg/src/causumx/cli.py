"""Command line entry point.

``causumx run`` explains an aggregate view; ``causumx synth`` writes a
synthetic table and its DAG.  Every ``run`` flag can also be supplied as an
environment variable, e.g. ``CAUSUMX_K=3`` or ``CAUSUMX_GROUP_BY=Country``;
explicit flags win over the environment.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import Params
from .errors import ConfigError, ContractError, DataError, SizeError
from .pipeline import ALGORITHMS, RunConfig, run_pipeline
from .render import render_csv, render_json, render_text, render_view_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
ENV_PREFIX = "CAUSUMX_"

log = logging.getLogger("causumx")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _comma_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


RUN_FLAGS = [
    # (flag, type, default, help)
    ("--data", str, None, "input CSV file"),
    ("--dag", str, None, "causal DAG in DOT syntax"),
    ("--group-by", _comma_list, None, "comma-separated group-by attributes"),
    ("--avg", str, None, "attribute averaged by the query"),
    ("--where", str, None, "optional filter, e.g. 'Country = US AND Age <= 40'"),
    ("--k", int, 5, "maximum number of explanations"),
    ("--theta", float, 0.75, "required fraction of covered groups"),
    ("--tau", float, 0.1, "minimum support of grouping patterns"),
    ("--sample-size", int, 1_000_000, "rows sampled per effect estimate"),
    ("--alpha", float, 0.05, "significance level"),
    ("--min-arm", int, 10, "minimum rows in each treatment arm"),
    ("--bins", int, 5, "quantile bins for numeric treatment attributes"),
    ("--algorithm", str, "causumx", "one of " + ", ".join(ALGORITHMS)),
    ("--seed", int, 0, "random seed"),
    ("--threads", int, 1, "worker threads for treatment mining"),
    ("--output", str, "text", "text or json"),
    ("--categorical", _comma_list, [], "columns to read as categorical regardless of content"),
    ("--grouping-attrs", _comma_list, None, "restrict grouping patterns to these attributes"),
    ("--report-dir", str, None, "also write CSV, JSON and PNG figures to this directory"),
]


def _env_name(flag: str) -> str:
    return ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log phase timings to stderr")
    p = _Parser(prog="causumx", description="Causal explanation summaries for group-by-average queries.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", parents=[common], help="explain an aggregate view")
    for flag, typ, default, help_ in RUN_FLAGS:
        run.add_argument(flag, type=typ, default=None, help=f"{help_} (env {_env_name(flag)})")
    synth = sub.add_parser("synth", parents=[common], help="write a synthetic dataset and DAG")
    synth.add_argument("--n", type=int, default=1000)
    synth.add_argument("--i", type=int, default=3)
    synth.add_argument("--j", type=int, default=3)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out-dir", default=".")
    return p


def resolve_run_args(ns: argparse.Namespace, environ=os.environ) -> dict:
    """Merge flags, ``CAUSUMX_*`` variables and defaults, in that order."""
    out = {}
    for flag, typ, default, _ in RUN_FLAGS:
        key = flag.lstrip("-").replace("-", "_")
        val = getattr(ns, key)
        if val is None and _env_name(flag) in environ:
            raw = environ[_env_name(flag)]
            try:
                val = typ(raw)
            except ValueError:
                raise UsageError(f"invalid value for {_env_name(flag)}: {raw!r}") from None
        out[key] = default if val is None else val
    for key in ("data", "dag", "group_by", "avg"):
        if not out[key]:
            raise UsageError(f"--{key.replace('_', '-')} is required")
    return out


def config_from_args(a: dict) -> RunConfig:
    params = Params(k=a["k"], theta=a["theta"], tau=a["tau"], sample_size=a["sample_size"],
                    alpha=a["alpha"], min_arm=a["min_arm"], bins=a["bins"], seed=a["seed"],
                    threads=a["threads"])
    return RunConfig(data=a["data"], dag=a["dag"], group_by=a["group_by"], avg=a["avg"],
                     where=a["where"], params=params, algorithm=a["algorithm"], output=a["output"],
                     categorical=a["categorical"], grouping_attrs=a["grouping_attrs"],
                     report_dir=a["report_dir"])


def write_report_dir(report, out_dir: str) -> list[str]:
    from .figures import render_figures

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in (("explanations.csv", render_csv(report)),
                       ("view.csv", render_view_csv(report)),
                       ("summary.json", render_json(report)),
                       ("summary.txt", render_text(report))):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written + render_figures(report, out_dir)


def _run(ns, stdout) -> int:
    cfg = config_from_args(resolve_run_args(ns))
    report = run_pipeline(cfg)
    for name, secs in report.timings.items():
        log.info("phase %-10s %.3fs", name, secs)
    stdout.write(render_json(report) if cfg.output == "json" else render_text(report))
    if cfg.report_dir:
        for path in write_report_dir(report, cfg.report_dir):
            log.info("wrote %s", path)
    return EXIT_OK


def _synth(ns, stdout) -> int:
    from .synthgen import write_synthetic

    try:
        data, dag = write_synthetic(ns.out_dir, ns.n, ns.i, ns.j, ns.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    gs = ",".join(f"G{p}" for p in range(1, ns.i + 1))
    ts = ",".join(f"T{q}" for q in range(1, ns.j + 1))
    stdout.write(f"{data}\n{dag}\n")
    log.info("run with: causumx run --data %s --dag %s --group-by G --avg O%s --categorical %s",
             data, dag, f" --grouping-attrs {gs}" if gs else "", ts)
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("run", "synth", "-h", "--help"):
        argv.insert(0, "run")
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("missing command; use 'run' or 'synth'")
        if ns.verbose:
            logging.basicConfig(stream=stderr, level=logging.INFO, format="%(message)s")
        if ns.command == "synth":
            return _synth(ns, stdout)
        return _run(ns, stdout)
    except (UsageError, ConfigError, ContractError, SizeError) as e:
        stderr.write(f"causumx: usage error: {e}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK
    except (DataError, OSError) as e:
        where = getattr(e, "phase", None)
        stderr.write(f"causumx: {'[' + where + '] ' if where else ''}{e}\n")
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        stderr.write(f"causumx: internal error: {type(e).__name__}: {e}\n")
        return EXIT_INTERNAL
