"""Command-line front end.

Usage::

    emopanel <command> --config <path> [--seed N] [--study ID] [--spec NAME] [--out DIR]

Commands: init, synth, ingest, build-panel, estimate, replicate, recover,
report. Exit status 0 on success, 1 on a validation error, 2 on a runtime
error; failures print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as dt
import hashlib
import json
import logging
import os
import platform
import sys
from dataclasses import asdict, dataclass, field, fields
from importlib import metadata, resources
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from .econ.demean import DemeanConfig
from .econ.ols import MissingColumnError, RankDeficiencyError, RegressionSpec, fit_hdfe_ols
from .ingest import FinanceLexicon, load_security_master, messages_to_frame, parse_message_stream
from .market import load_low_frequency, load_prices
from .panel import WEIGHT_MODES, Panel
from .pipeline import build_panel, load_index_members, load_kept, run_ingest, save_kept
from .replicate.catalog import TABLE_IDS, CatalogError, StudyConfig, load_catalog
from .replicate.recovery import recovery_config, recovery_experiment
from .replicate.synthetic import INPUT_FILES, SyntheticConfig, generate_synthetic, write_synthetic
from .replicate.tables import TableArtifact, render_table, run_table
from .sessions import TradingCalendar

log = logging.getLogger("emopanel")

COMMANDS = ("init", "synth", "ingest", "build-panel", "estimate", "replicate", "recover", "report")
LOCK_NAME = ".emopanel.lock"
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# ---------------------------------------------------------------------------
# configuration

_INPUT_KEYS = ("messages", "prices", "security_master", "calendar", "low_frequency", "index_members", "lexicon")
_REQUIRED_INPUTS = ("messages", "prices", "security_master", "calendar")
_SCHEMA = {
    "run": {"out_dir", "seed"},
    "inputs": set(_INPUT_KEYS),
    "sessions": {"market_open", "market_close"},
    "panel": {"weight_mode", "min_session_messages", "bot_threshold"},
    "estimation": {"winsor_lower", "winsor_upper", "demean_tolerance", "demean_max_iterations"},
    "replicate": {"catalog", "studies"},
    "recover": {"seeds", "first_seed"},
}
_SCALARS = {"int": int, "float": float, "str": str, "bool": bool}
_SYNTH_KEYS = {f.name: _SCALARS[f.type] for f in fields(SyntheticConfig) if f.type in _SCALARS}
_SPEC_KEYS = {"dependent", "regressors", "fe", "cluster", "filter"}


@dataclass
class RunConfig:
    """Validated run configuration; relative paths resolve against the config file's directory."""

    source: Path
    messages: Path
    prices: Path
    security_master: Path
    calendar: Path
    low_frequency: Path | None = None
    index_members: Path | None = None
    lexicon: Path | None = None
    market_open: dt.time = dt.time(9, 30)
    market_close: dt.time = dt.time(16, 0)
    weight_mode: str = "follower"
    min_session_messages: int = 10
    bot_threshold: int = 100
    winsor_limits: tuple[float, float] = (0.001, 0.999)
    demean_tolerance: float = 1e-10
    demean_max_iterations: int = 10_000
    catalog: Path | None = None
    studies: list[StudyConfig] = field(default_factory=list)
    specs: dict[str, RegressionSpec] = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    recover_seeds: int = 200
    recover_first_seed: int = 0
    out_dir: Path = Path("out")
    seed: int = 0

    @property
    def demean(self) -> DemeanConfig:
        return DemeanConfig(self.demean_tolerance, self.demean_max_iterations)

    def input_paths(self) -> dict[str, Path]:
        return {k: getattr(self, k) for k in _INPUT_KEYS if getattr(self, k) is not None}

    def to_dict(self) -> dict:
        """Plain, JSON-ready form (paths as strings, specs and studies flattened)."""
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "studies":
                v = [asdict(s) for s in v]
            elif f.name == "specs":
                v = {k: s.describe() for k, s in v.items()}
            d[f.name] = v
        return json.loads(json.dumps(d, default=str))

    def digest(self) -> str:
        body = {k: v for k, v in self.to_dict().items() if k != "source"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def _typed(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            if raw.strip().lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return raw.strip().lower() in ("true", "1", "yes")
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None


def _clock(section: str, key: str, raw: str) -> dt.time:
    try:
        return dt.time.fromisoformat(raw.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected HH:MM, got {raw!r}") from None


def _spec_section(name: str, sec: configparser.SectionProxy, limits) -> RegressionSpec:
    unknown = set(sec) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"[spec {name}] unknown keys {sorted(unknown)}")
    for key in ("dependent", "regressors"):
        if not sec.get(key, "").strip():
            raise ConfigError(f"[spec {name}] missing required key {key!r}")
    try:
        return RegressionSpec(
            sec["dependent"].strip(), tuple(sec["regressors"].split()),
            fe_dims=tuple(sec.get("fe", "ticker date").split()),
            cluster_dims=tuple(sec.get("cluster", "ff12 date").split()),
            sample_filter=sec.get("filter", "").strip() or None, winsor_limits=limits, name=name)
    except ValueError as exc:
        raise ConfigError(f"[spec {name}] {exc}") from None


def load_config(path: str | Path, check_paths: bool = True) -> RunConfig:
    """Read and validate an INI run configuration.

    Sections: ``[run]``, ``[inputs]``, ``[sessions]``, ``[panel]``,
    ``[estimation]``, ``[replicate]``, ``[recover]``, ``[synth]`` and any
    number of ``[spec NAME]`` regression definitions. Unknown sections or
    keys are rejected. With `check_paths`, every input path must exist.
    """
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc.message.splitlines()[0]}") from None
    base = path.parent

    for sec in parser.sections():
        if sec.startswith("spec "):
            continue
        if sec == "synth":
            allowed = set(_SYNTH_KEYS)
        elif sec in _SCHEMA:
            allowed = _SCHEMA[sec]
        else:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = sorted(set(parser[sec]) - allowed)
        if unknown:
            raise ConfigError(f"[{sec}] unknown keys {unknown}")

    get = lambda sec, key, default=None: parser.get(sec, key, fallback=default)  # noqa: E731
    kw: dict = {"source": path}
    for key in _REQUIRED_INPUTS:
        if not (get("inputs", key) or "").strip():
            raise ConfigError(f"[inputs] missing required key {key!r}")
    for key in _INPUT_KEYS:
        raw = (get("inputs", key) or "").strip()
        if raw:
            p = (base / raw).resolve()
            if check_paths and not p.exists():
                raise ConfigError(f"[inputs] {key}: path {raw!r} does not exist")
            kw[key] = p

    kw["market_open"] = _clock("sessions", "market_open", get("sessions", "market_open", "09:30"))
    kw["market_close"] = _clock("sessions", "market_close", get("sessions", "market_close", "16:00"))
    if kw["market_open"] >= kw["market_close"]:
        raise ConfigError("[sessions] market_open: must precede market_close")

    kw["weight_mode"] = get("panel", "weight_mode", "follower").strip()
    if kw["weight_mode"] not in WEIGHT_MODES:
        raise ConfigError(f"[panel] weight_mode: expected one of {WEIGHT_MODES}, got {kw['weight_mode']!r}")
    for key, default, lo in (("min_session_messages", "10", 1), ("bot_threshold", "100", 1)):
        kw[key] = _typed("panel", key, get("panel", key, default), int)
        if kw[key] < lo:
            raise ConfigError(f"[panel] {key}: must be at least {lo}")

    lo = _typed("estimation", "winsor_lower", get("estimation", "winsor_lower", "0.001"), float)
    hi = _typed("estimation", "winsor_upper", get("estimation", "winsor_upper", "0.999"), float)
    if not 0.0 <= lo < hi <= 1.0:
        raise ConfigError(f"[estimation] winsor_lower: bounds need 0 <= lower < upper <= 1, got {lo}, {hi}")
    kw["winsor_limits"] = (lo, hi)
    kw["demean_tolerance"] = _typed("estimation", "demean_tolerance", get("estimation", "demean_tolerance", "1e-10"),
                                    float)
    kw["demean_max_iterations"] = _typed("estimation", "demean_max_iterations",
                                         get("estimation", "demean_max_iterations", "10000"), int)
    if not kw["demean_tolerance"] > 0:
        raise ConfigError("[estimation] demean_tolerance: must be positive")
    if kw["demean_max_iterations"] < 1:
        raise ConfigError("[estimation] demean_max_iterations: must be at least 1")

    catalog = (get("replicate", "catalog") or "").strip()
    try:
        if catalog:
            kw["catalog"] = (base / catalog).resolve()
            if not kw["catalog"].exists():
                raise ConfigError(f"[replicate] catalog: path {catalog!r} does not exist")
            studies = load_catalog(kw["catalog"])
        else:
            ids = (get("replicate", "studies") or " ".join(TABLE_IDS)).split()
            studies = [StudyConfig(t) for t in ids]
    except CatalogError as exc:
        raise ConfigError(f"[replicate] {exc}") from None
    kw["studies"] = [StudyConfig(s.table_id, s.weight_mode, s.source, s.min_messages, kw["winsor_limits"])
                     if s.winsor_limits == (0.001, 0.999) else s for s in studies]

    kw["specs"] = {sec[5:].strip(): _spec_section(sec[5:].strip(), parser[sec], kw["winsor_limits"])
                   for sec in parser.sections() if sec.startswith("spec ")}

    if parser.has_section("synth"):
        kw["synth"] = {k: _typed("synth", k, v, _SYNTH_KEYS[k]) for k, v in parser["synth"].items()}
        try:
            SyntheticConfig(**kw["synth"])
        except ValueError as exc:
            raise ConfigError(f"[synth] {exc}") from None

    kw["recover_seeds"] = _typed("recover", "seeds", get("recover", "seeds", "200"), int)
    kw["recover_first_seed"] = _typed("recover", "first_seed", get("recover", "first_seed", "0"), int)
    kw["out_dir"] = (base / get("run", "out_dir", "out").strip()).resolve()
    kw["seed"] = _typed("run", "seed", get("run", "seed", "0"), int)
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# run bookkeeping


class OutputLock:
    """Exclusive lock file in the output directory; a lock left by a dead process is taken over."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / LOCK_NAME

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        for _ in range(2):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if self._stale():
                    self.path.unlink(missing_ok=True)
                    continue
                raise RuntimeError(f"output directory {self.path.parent} is locked by another run") from None
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            return self
        raise RuntimeError(f"could not lock {self.path.parent}")

    def _stale(self) -> bool:
        try:
            pid = int(self.path.read_text().strip())
            os.kill(pid, 0)
        except (ValueError, ProcessLookupError, FileNotFoundError):
            return True
        except PermissionError:
            return False
        return False

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"emopanel": own, "python": platform.python_version(), "numpy": np.__version__,
            "pandas": pd.__version__, "scipy": scipy.__version__}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, cfg: RunConfig, argv: list[str], rows: dict,
                   outputs: list[Path]) -> Path:
    """Everything needed to repeat the run: resolved config, its hash, arguments, versions, outputs."""
    manifest = {
        "command": command,
        "argv": argv,
        "config_path": str(cfg.source),
        "config_sha256": cfg.digest(),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "versions": _versions(),
        "row_counts": rows,
        "inputs": {k: {"path": str(p), "sha256": _sha256(p)} for k, p in cfg.input_paths().items() if p.is_file()},
        "outputs": {str(p.relative_to(out_dir)): _sha256(p) for p in sorted(outputs)},
    }
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# commands


def _calendar(cfg: RunConfig) -> TradingCalendar:
    return TradingCalendar.from_file(cfg.calendar, market_open=cfg.market_open, market_close=cfg.market_close)


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def cmd_init(cfg_path: Path, out: Path, args) -> tuple[dict, list[Path]]:
    """Copy the bundled example configuration and study catalog."""
    files = []
    for name in ("example.ini", "example_studies.txt"):
        text = resources.files("emopanel").joinpath(f"data/{name}").read_text(encoding="utf-8")
        files.append(_write_text(out / name, text))
    return {}, files


def cmd_synth(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    data = generate_synthetic(SyntheticConfig(**cfg.synth), cfg.seed)
    # optional inputs absent from the config land next to the message file
    write_synthetic(data, paths={k: getattr(cfg, k) or cfg.messages.parent / name for k, name in INPUT_FILES.items()})
    rows = {"messages": len(data.messages), "price_rows": len(data.prices), "firms": len(data.security_master)}
    return rows, []


def _read_messages(cfg: RunConfig) -> tuple[pd.DataFrame, int]:
    messages, errors = parse_message_stream(cfg.messages)
    return messages_to_frame(messages), errors


def cmd_ingest(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    frame, errors = _read_messages(cfg)
    lexicon = FinanceLexicon.from_file(cfg.lexicon) if cfg.lexicon else FinanceLexicon.default()
    result = run_ingest(frame, load_security_master(cfg.security_master), _calendar(cfg), lexicon,
                        cfg.min_session_messages, cfg.bot_threshold, parse_errors=errors)
    kept_path = out / "kept_messages.csv"
    save_kept(result.kept, kept_path)
    report = result.report.to_frame()
    report_path = out / "filter_report.csv"
    report.to_csv(report_path, index=False, float_format="%.10g", lineterminator="\n")
    rows = {"parse_errors": errors, **result.report.counts}
    return rows, [kept_path, report_path]


def _load_panel(out: Path) -> Panel:
    path = out / "panel.csv"
    if not path.exists():
        raise FileNotFoundError(f"no panel at {path}; run build-panel first")
    return Panel.from_csv(path)


def cmd_build_panel(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    kept_path = out / "kept_messages.csv"
    if not kept_path.exists():
        raise FileNotFoundError(f"no kept-message file at {kept_path}; run ingest first")
    kept = load_kept(kept_path)
    lowfreq = load_low_frequency(cfg.low_frequency) if cfg.low_frequency else None
    members = load_index_members(cfg.index_members) if cfg.index_members else None
    panel = build_panel(kept, load_prices(cfg.prices), _calendar(cfg), lowfreq, members, weight_mode=cfg.weight_mode)
    path = out / "panel.csv"
    sidecar = panel.to_csv(path)
    return {"panel_rows": len(panel), "panel_columns": panel.data.shape[1]}, [path, sidecar]


def _default_spec(cfg: RunConfig) -> RegressionSpec:
    from .replicate.recovery import RECOVERY_SPEC
    return RegressionSpec(RECOVERY_SPEC.dependent, RECOVERY_SPEC.regressors, winsor_limits=cfg.winsor_limits,
                          name="baseline")


def cmd_estimate(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    name = args.spec or (next(iter(cfg.specs)) if cfg.specs else "baseline")
    if name in cfg.specs:
        spec = cfg.specs[name]
    elif name == "baseline":
        spec = _default_spec(cfg)
    else:
        raise ConfigError(f"--spec: no [spec {name}] section in the config")
    fit = fit_hdfe_ols(spec, _load_panel(out), cfg.demean)
    frame = fit.to_frame()
    csv_path = out / f"estimate_{name}.csv"
    frame.to_csv(csv_path, index=False, float_format="%.17g", lineterminator="\n")
    stats = [("N", f"{fit.n_obs:d}"), ("R2", f"{fit.r_squared:.4f}"), ("R2 within", f"{fit.r_squared_within:.4f}"),
             ("Within SD", f"{fit.within_sd_dependent:.4f}"), ("df", f"{fit.df_inference:g}")]
    lines = [f"### {name}: {spec.dependent} on {', '.join(spec.regressors)}", "",
             "| term | estimate | se | t | p |", "|---|---|---|---|---|"]
    lines += [f"| {r.term} | {r.estimate:.4f} | ({r.se:.4f}) | {r.t:.2f} | {r.p:.4f} |" for r in frame.itertuples()]
    lines += [f"| {term} | {value} | | | |" for term, value in stats]
    md_path = _write_text(out / f"estimate_{name}.md", "\n".join(lines) + "\n")
    fit_path = _write_text(out / f"estimate_{name}.json", json.dumps(fit.manifest(), indent=2, sort_keys=True,
                                                                      default=str) + "\n")
    return {"n_obs": fit.n_obs}, [csv_path, md_path, fit_path]


def cmd_replicate(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    studies = cfg.studies
    if args.study:
        studies = [s for s in studies if s.table_id == args.study] or [StudyConfig(args.study,
                                                                                     winsor_limits=cfg.winsor_limits)]
    panel = _load_panel(out)
    tables = out / "tables"
    outputs, rows = [], {}
    for study in studies:
        art = run_table(study, panel, cfg.demean)
        stem = study.table_id if (study.weight_mode, study.source) == ("follower", "primary") else \
            f"{study.table_id}_{study.variant}"
        outputs.append(_write_text(tables / f"{stem}.csv", render_table(art, "csv")))
        outputs.append(_write_text(tables / f"{stem}.md", render_table(art, "markdown")))
        outputs.append(_write_text(tables / f"{stem}.json",
                                   json.dumps(art.to_dict(), indent=1, sort_keys=True, default=float) + "\n"))
        rows[stem] = len(art.to_frame())
    return rows, outputs


def cmd_recover(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    synth = {k: v for k, v in cfg.synth.items() if k not in ("market_messages", "alternative_emotions")}
    n = args.seeds or cfg.recover_seeds
    report = recovery_experiment(recovery_config(**synth), n, first_seed=cfg.recover_first_seed)
    path = report.to_csv(out / "recovery.csv")
    return {"seeds": n}, [path]


def cmd_report(cfg: RunConfig, out: Path, args) -> tuple[dict, list[Path]]:
    """Collect existing artifacts into one Markdown file."""
    parts = ["# Replication report", ""]
    funnel = out / "filter_report.csv"
    if funnel.exists():
        f = pd.read_csv(funnel)
        parts += ["## Sample restrictions", "", "| stage | retained | pass rate |", "|---|---|---|"]
        parts += [f"| {r.stage} | {r.retained_messages} | {r.pass_rate:.4f} |" for r in f.itertuples()] + [""]
    found = sorted((out / "tables").glob("*.json"), key=lambda p: (list(TABLE_IDS).index(p.stem.split("_")[0])
                                                                   if p.stem.split("_")[0] in TABLE_IDS else 99,
                                                                   p.stem))
    for p in found:
        parts.append(render_table(TableArtifact.from_dict(json.loads(p.read_text(encoding="utf-8"))), "markdown"))
    recovery = out / "recovery.csv"
    if recovery.exists():
        r = pd.read_csv(recovery)
        parts += ["## Planted-coefficient recovery", "", "| term | coverage | bias | sign rate |", "|---|---|---|---|"]
        parts += [f"| {x.term} | {x.coverage:.3f} | {x.bias:.5f} | {x.sign_rate:.3f} |" for x in r.itertuples()]
        parts.append("")
    if len(parts) == 2:
        raise FileNotFoundError(f"no artifacts to report under {out}")
    path = _write_text(out / "report.md", "\n".join(parts).rstrip() + "\n")
    return {"tables": len(found)}, [path]


HANDLERS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "build-panel": cmd_build_panel,
    "estimate": cmd_estimate,
    "replicate": cmd_replicate,
    "recover": cmd_recover,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emopanel", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="INI run configuration (not needed for init)")
    p.add_argument("--seed", type=int, help="override [run] seed")
    p.add_argument("--study", choices=list(TABLE_IDS), help="replicate only this table")
    p.add_argument("--spec", help="named [spec NAME] section for estimate")
    p.add_argument("--seeds", type=int, help="number of seeds for recover")
    p.add_argument("--out", type=Path, help="override [run] out_dir")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fail(code: int, exc: BaseException, command: str | None) -> int:
    msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
    print(json.dumps({"status": "error", "exit": code, "command": command, "kind": type(exc).__name__,
                      "message": msg}), file=sys.stderr)
    return code


VALIDATION_ERRORS = (ConfigError, CatalogError, MissingColumnError, RankDeficiencyError)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    command = args.command
    try:
        if command == "init":
            out = (args.out or Path(".")).resolve()
            cmd_init(out, out, args)
            return EXIT_OK
        if args.config is None:
            raise ConfigError("--config is required")
        cfg = load_config(args.config, check_paths=command != "synth")
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out.resolve()
        out = cfg.out_dir
    except VALIDATION_ERRORS as exc:
        return _fail(EXIT_VALIDATION, exc, command)
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, exc, command)
    try:
        with OutputLock(out):
            rows, outputs = HANDLERS[command](cfg, out, args)
            write_manifest(out, command, cfg, argv, rows, outputs)
    except VALIDATION_ERRORS as exc:
        return _fail(EXIT_VALIDATION, exc, command)
    except Exception as exc:  # noqa: BLE001  (single-line report for any runtime failure)
        log.debug("runtime failure", exc_info=True)
        return _fail(EXIT_RUNTIME, exc, command)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
