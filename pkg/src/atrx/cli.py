"""Command-line front end.

Every command writes a header echoing the resolved configuration followed
by rows with a fixed column order, as JSON (default) or CSV. Floats are
rendered with 12 significant digits so identical inputs give byte-identical
files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ConvergenceError, InvalidInputError
from .linalg import as_matrix
from .ratecalc import bc_user_rate, example2_one_shot, one_shot_rate_example1, theorem1_rate, theorem2_region
from .signal_model import snr_db_to_power
from .sim import SimConfig, run_bc_sim, run_ptp_sim

COMMANDS = ("ptp-rate", "bc-region", "one-shot", "simulate")


class ChannelFileError(InvalidInputError):
    pass


def _row_lines(text: str) -> list[int]:
    """Line numbers (1-based) where each row of the "rows" array starts."""
    key = text.find('"rows"')
    if key < 0:
        return []
    start = text.find("[", key)
    lines, depth, in_str, esc = [], 0, False, False
    for pos in range(start, len(text)):
        ch = text[pos]
        if in_str:
            esc = ch == "\\" and not esc
            if ch == '"' and not esc:
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "[":
            depth += 1
            if depth == 2:
                lines.append(text.count("\n", 0, pos) + 1)
        elif ch == "]":
            depth -= 1
            if depth == 0:
                break
    return lines


def parse_channel_file(path) -> np.ndarray:
    """Read a channel matrix stored as ``{"rows": [[...], ...]}``.

    Raises
    ------
    ChannelFileError
        For a missing file, malformed JSON, a missing "rows" key, ragged rows
        or non-finite / non-numeric entries; the message names the file and
        the line involved where possible.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ChannelFileError(f"{p}: channel file not found") from None
    except OSError as exc:
        raise ChannelFileError(f"{p}: cannot read channel file ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{p}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict) or "rows" not in data:
        raise ChannelFileError(f'{p}: expected an object with a "rows" key')
    rows = data["rows"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ChannelFileError(f'{p}: "rows" must be a non-empty list of lists')
    lines = _row_lines(text)

    def where(i):
        return f"{p}:{lines[i]}" if i < len(lines) else str(p)

    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width or width == 0:
            raise ChannelFileError(f"{where(i)}: ragged rows: row {i} has {len(row)} entries, row 0 has {width}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ChannelFileError(f"{where(i)}: entry ({i}, {j}) = {x!r} is not a finite number")
    return as_matrix(rows)


# --------------------------------------------------------------------------
# formatting


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), ".12g"))
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    return x


def _csv_cell(x):
    if isinstance(x, float):
        return format(x, ".12g")
    if isinstance(x, list):
        return ";".join(",".join(_csv_cell(v) for v in item) if isinstance(item, list) else _csv_cell(item) for item in x)
    return str(x)


def render(config: dict, rows: list[dict], fmt: str) -> str:
    config, rows = _fmt(config), [_fmt(r) for r in rows]
    if fmt == "json":
        return json.dumps({"config": config, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=False) + "\n")
    columns: list[str] = []
    for r in rows:
        columns += [k for k in r if k not in columns]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_cell(r[c]) if c in r else "" for c in columns])
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands; each returns one output row for one SNR point


def _ptp_row(params: dict, snr_db: float) -> dict:
    res = theorem1_rate(np.array(params["channel_rows"]), params["nq"], snr_db_to_power(snr_db))
    row = {"snr_db": snr_db, "rate_quantized": res.rate_quantized, "rate_continuous": res.rate_continuous}
    alloc = res.best_allocation
    for k, (b, p, mi) in enumerate(zip(alloc.bits, alloc.powers, res.per_subchannel_mi), start=1):
        row[f"bits_{k}"] = b
        row[f"power_{k}"] = p
        row[f"mi_{k}"] = mi
    return row


def _bc_row(params: dict, snr_db: float) -> dict:
    region = theorem2_region(
        np.array(params["channel1_rows"]),
        np.array(params["channel2_rows"]),
        params["nq1"],
        params["nq2"],
        snr_db_to_power(snr_db),
    )
    row = {
        "snr_db": snr_db,
        "r1": region.user_rates[0],
        "r2": region.user_rates[1],
        "r1_continuous": region.user_rates_continuous[0],
        "r2_continuous": region.user_rates_continuous[1],
    }
    for user, alloc in enumerate(region.allocations, start=1):
        for k, (b, p) in enumerate(zip(alloc.bits, alloc.powers), start=1):
            row[f"user{user}_bits_{k}"] = b
            row[f"user{user}_power_{k}"] = p
    row["vertices"] = [[v.x, v.y] for v in region.vertices]
    return row


def _one_shot_row(params: dict, snr_db: float) -> dict:
    power = snr_db_to_power(snr_db)
    if params["example"] == 1:
        return {"snr_db": snr_db, "rate": one_shot_rate_example1(power)}
    res = example2_one_shot(power, params.get("threshold"), params.get("zero_threshold", False))
    return {"snr_db": snr_db, "r1": res.r1, "r2": res.r2, "sum_rate": res.sum_rate, "threshold": res.threshold}


def _simulate_row(params: dict, snr_db: float) -> dict:
    power = snr_db_to_power(snr_db)
    h = np.array(params["channel_rows"])
    mode = params["mode"]
    if mode == "ptp":
        alloc = theorem1_rate(h, params["nq"], power).best_allocation
    else:
        _, alloc = bc_user_rate(h, params["nq"], power)
    cfg = SimConfig(h, alloc, power, params["symbols"], params["seed"], mode)
    runner = run_ptp_sim if mode == "ptp" else run_bc_sim
    rep = runner(cfg, workers=params.get("workers", 1))
    row = {
        "snr_db": snr_db,
        "empirical_rate": rep.empirical_rate,
        "analytic_rate": rep.analytic_rate,
        "samples": rep.samples,
    }
    for k, b in enumerate(alloc.bits):
        i = k + 1
        row[f"bits_{i}"] = b
        row[f"power_{i}"] = alloc.powers[k]
        row[f"mi_{i}"] = rep.empirical_mi_per_subchannel[k]
        row[f"analytic_mi_{i}"] = rep.analytic_mi[k]
        row[f"ser_{i}"] = rep.symbol_error_rate[k]
    return row


_ROW_FN = {"ptp-rate": _ptp_row, "bc-region": _bc_row, "one-shot": _one_shot_row, "simulate": _simulate_row}


def _evaluate(job):
    command, params, snr_db = job
    return _ROW_FN[command](params, snr_db)


def sweep_points(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise InvalidInputError(f"--snr-step must be positive, got {step}")
    if stop < start:
        raise InvalidInputError(f"--snr-stop ({stop}) is below --snr-start ({start})")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(format(start + i * step, ".12g")) for i in range(count)]


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise InvalidInputError(f"--{name.replace('_', '-')} is required for {args.target}")


def resolve(args) -> tuple[dict, list[float]]:
    """Validate flags for the target command and load channel files."""
    target = args.target
    params: dict = {"command": target}
    if target in ("ptp-rate", "simulate"):
        _require(args, "channel", "nq")
        params["channel"] = str(args.channel)
        params["channel_rows"] = parse_channel_file(args.channel).tolist()
        params["nq"] = args.nq
    if target == "bc-region":
        _require(args, "channel1", "channel2", "nq1", "nq2")
        params["channel1"] = str(args.channel1)
        params["channel2"] = str(args.channel2)
        params["channel1_rows"] = parse_channel_file(args.channel1).tolist()
        params["channel2_rows"] = parse_channel_file(args.channel2).tolist()
        params["nq1"], params["nq2"] = args.nq1, args.nq2
    if target == "one-shot":
        _require(args, "example")
        params["example"] = args.example
        if args.example == 2:
            params["threshold"] = args.threshold
            params["zero_threshold"] = bool(args.zero_threshold)
    if target == "simulate":
        _require(args, "mode", "symbols")
        params["mode"] = args.mode
        params["symbols"] = args.symbols
        params["workers"] = args.workers
    for name in ("nq", "nq1", "nq2"):
        if name in params and params[name] < 0:
            raise InvalidInputError(f"--{name} must be >= 0, got {params[name]}")
    if "symbols" in params and params["symbols"] < 1:
        raise InvalidInputError(f"--symbols must be >= 1, got {params['symbols']}")
    params["seed"] = args.seed
    params["format"] = args.format

    if args.command == "sweep":
        params["snr_start"], params["snr_stop"], params["snr_step"] = args.snr_start, args.snr_stop, args.snr_step
        points = sweep_points(args.snr_start, args.snr_stop, args.snr_step)
    else:
        _require(args, "snr_db")
        params["snr_db"] = args.snr_db
        points = [args.snr_db]
    return params, points


def run_command(args) -> str:
    """Evaluate the requested command and return the rendered artifact."""
    params, points = resolve(args)
    jobs = [(args.target, params, snr) for snr in points]
    workers = getattr(args, "workers", 1) or 1
    if args.command == "sweep" and workers > 1 and len(jobs) > 1 and args.target != "simulate":
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate, jobs))
    else:
        rows = [_evaluate(j) for j in jobs]
    config = {"sweep": args.command == "sweep", **params}
    if args.command != "sweep":
        config.pop("sweep")
    return render(config, rows, args.format)


# --------------------------------------------------------------------------
# argument parsing


def _add_target_flags(p: argparse.ArgumentParser, target: str | None):
    """Flags of one command; ``target=None`` adds the union (for sweep)."""
    want = (lambda *names: True) if target is None else (lambda *names: target in names)
    if want("ptp-rate", "simulate"):
        p.add_argument("--channel", type=Path, required=target is not None, help="channel matrix JSON file")
        p.add_argument("--nq", type=int, required=target is not None, help="number of one-bit ADCs")
    if want("bc-region"):
        p.add_argument("--channel1", type=Path, required=target is not None)
        p.add_argument("--channel2", type=Path, required=target is not None)
        p.add_argument("--nq1", type=int, required=target is not None)
        p.add_argument("--nq2", type=int, required=target is not None)
    if want("one-shot"):
        p.add_argument("--example", type=int, choices=(1, 2), required=target is not None)
        p.add_argument("--threshold", type=float, help="with --example 2: threshold of the second receiver")
        p.add_argument("--zero-threshold", action="store_true", help="with --example 2: zero thresholds at both receivers")
    if want("simulate"):
        p.add_argument("--mode", choices=("ptp", "bc-user1", "bc-user2"), required=target is not None)
        p.add_argument("--symbols", type=int, required=target is not None)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atrx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_target_flags(p, name)
        p.add_argument("--snr-db", type=float, required=True, help="transmit power in dB (unit noise variance)")
        _add_common(p)
    p = sub.add_parser("sweep", help="evaluate another command over an SNR grid")
    p.add_argument("--command", dest="target", choices=COMMANDS, required=True)
    p.add_argument("--snr-start", type=float, required=True)
    p.add_argument("--snr-stop", type=float, required=True)
    p.add_argument("--snr-step", type=float, required=True)
    _add_target_flags(p, None)
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "sweep":
        args.target = args.command
    for name in ("channel", "channel1", "channel2", "nq", "nq1", "nq2", "example", "threshold", "mode", "symbols"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if not hasattr(args, "zero_threshold"):
        args.zero_threshold = False
    if not hasattr(args, "snr_db"):
        args.snr_db = None
    try:
        text = run_command(args)
        if args.out is None:
            sys.stdout.write(text)
        else:
            args.out.write_text(text)
    except (InvalidInputError, ConfigurationError, ConvergenceError) as exc:
        print(f"atrx {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"atrx {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
