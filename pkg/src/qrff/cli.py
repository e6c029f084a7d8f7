"""Command-line experiment harness.

Runs the end-to-end pipeline (sample map, embed, quantize, condense, evaluate)
over a (m x seed x method) grid described by a flat ``key = value`` config
file, and writes one CSV of result rows per run. Output is deterministic: a
fixed config produces byte-identical CSV files regardless of ``--jobs``.

Subcommands: ``qrff run <config>`` plus the shortcuts ``footprint``, ``scan``,
``krr``, ``mmd`` and ``spectral`` which assemble a default config and accept a
few override flags. Exit codes: 0 success, 2 config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import condensation as cond
from . import features as feat
from . import kernels as kern
from . import quantizers as qz
from . import tasks

__all__ = ["ConfigError", "ExperimentConfig", "ResultRow", "parse_config", "load_csv_dataset", "run", "main"]

TASKS = ("approx_scan", "krr", "mmd", "footprint", "spectral")
METHODS = ("exact", "rff", "universal", "semiq", "stocq", "sd1", "sd2", "beta")
CONDENSED = ("sd1", "sd2", "beta")
# semiq trains on full-precision features, so it only appears where pairwise
# estimates suffice
_TASK_METHODS = {
    "approx_scan": METHODS,
    "krr": ("exact", "rff", "universal", "stocq", "sd1", "sd2", "beta"),
    "mmd": ("exact", "rff", "universal", "stocq", "sd1", "sd2", "beta"),
    "footprint": ("rff", "semiq", "stocq", "sd1", "sd2", "beta"),
    "spectral": ("sd1", "sd2", "beta"),
}
# sd2 needs an odd block length, so it only runs when requested explicitly
_DEFAULT_METHODS = {
    "approx_scan": ("rff", "sd1", "beta"),
    "krr": ("rff", "stocq", "sd1", "beta"),
    "mmd": ("rff", "stocq", "sd1", "beta"),
    "footprint": ("rff", "semiq", "stocq", "sd1", "beta"),
    "spectral": ("sd1",),
}
_DEFAULT_GENERATOR = {
    "approx_scan": "toy_pairs",
    "krr": "krr_synth",
    "mmd": "circle",
    "spectral": "circle",
    "footprint": "none",
}

CSV_COLUMNS = ("task", "method", "m", "b", "lambda", "p", "seed", "metric", "value", "bits_per_sample")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    gamma: float = 0.2
    dimension: int | None = None
    bits: int = 1
    block_len: int = 4
    beta: float = 1.5
    prescale: str = "none"
    methods: tuple[str, ...] = ()
    m_sweep: tuple[int, ...] = ()
    seeds: tuple[int, ...] = (0,)
    generator: str = ""
    data_n: int | None = None
    data_d: int = 50
    gap: float = 0.0
    csv_path: str | None = None
    eta: float = 1.0
    train_fraction: float = 0.8
    permutations: int = 2000
    level: float = 0.05
    delta1: float = 0.5
    delta2: float = 0.5
    output: str = "."


@dataclass(frozen=True)
class ResultRow:
    task: str
    method: str
    m: int
    b: int | None
    lam: int | None
    p: int | None
    seed: int | None
    metric: str
    value: float
    bits_per_sample: int


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{key}: expected a comma-separated list of integers")
    return tuple(_parse_int(key, s) for s in items)


def _key_values(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        mapping[key.strip()] = raw.strip()
    return mapping


def _build_config(mapping: dict[str, str]) -> ExperimentConfig:
    if "task" not in mapping:
        raise ConfigError("task: missing required key")
    task = mapping["task"]
    if task not in TASKS:
        raise ConfigError(f"task: must be one of {', '.join(TASKS)}, got {task!r}")

    cfg = ExperimentConfig(task=task, generator=_DEFAULT_GENERATOR[task])
    handlers = {
        "task": lambda raw: cfg,
        "kernel.gamma": lambda raw: replace(cfg, gamma=_parse_float("kernel.gamma", raw)),
        "kernel.dimension": lambda raw: replace(cfg, dimension=_parse_int("kernel.dimension", raw)),
        "quantizer.scheme": lambda raw: cfg,  # validated below
        "quantizer.b": lambda raw: replace(cfg, bits=_parse_int("quantizer.b", raw)),
        "quantizer.lambda": lambda raw: replace(cfg, block_len=_parse_int("quantizer.lambda", raw)),
        "quantizer.beta": lambda raw: replace(cfg, beta=_parse_float("quantizer.beta", raw)),
        "quantizer.prescale": lambda raw: replace(cfg, prescale=raw),
        "methods": lambda raw: replace(
            cfg, methods=tuple(s.strip() for s in raw.split(",") if s.strip())
        ),
        "m_sweep": lambda raw: replace(cfg, m_sweep=_parse_int_list("m_sweep", raw)),
        "seeds": lambda raw: replace(cfg, seeds=_parse_int_list("seeds", raw)),
        "data.generator": lambda raw: replace(cfg, generator=raw),
        "data.n": lambda raw: replace(cfg, data_n=_parse_int("data.n", raw)),
        "data.d": lambda raw: replace(cfg, data_d=_parse_int("data.d", raw)),
        "data.gap": lambda raw: replace(cfg, gap=_parse_float("data.gap", raw)),
        "data.path": lambda raw: replace(cfg, csv_path=raw),
        "krr.eta": lambda raw: replace(cfg, eta=_parse_float("krr.eta", raw)),
        "krr.train_fraction": lambda raw: replace(
            cfg, train_fraction=_parse_float("krr.train_fraction", raw)
        ),
        "mmd.t": lambda raw: replace(cfg, permutations=_parse_int("mmd.t", raw)),
        "mmd.level": lambda raw: replace(cfg, level=_parse_float("mmd.level", raw)),
        "spectral.eta": lambda raw: replace(cfg, eta=_parse_float("spectral.eta", raw)),
        "spectral.delta1": lambda raw: replace(cfg, delta1=_parse_float("spectral.delta1", raw)),
        "spectral.delta2": lambda raw: replace(cfg, delta2=_parse_float("spectral.delta2", raw)),
        "output": lambda raw: replace(cfg, output=raw),
    }
    for key, raw in mapping.items():
        if key not in handlers:
            raise ConfigError(f"unknown key {key!r}")
        cfg = handlers[key](raw)

    scheme = mapping.get("quantizer.scheme", "sigma_delta")
    if scheme not in ("sigma_delta", "beta"):
        raise ConfigError(f"quantizer.scheme: must be sigma_delta or beta, got {scheme!r}")
    if not cfg.methods:
        cfg = replace(cfg, methods=_DEFAULT_METHODS[task])
    return _validate(cfg)


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if not cfg.gamma > 0:
        raise ConfigError(f"kernel.gamma: must be positive, got {cfg.gamma}")
    if not 1 <= cfg.bits <= 8:
        raise ConfigError(f"quantizer.b: must be in 1..8, got {cfg.bits}")
    if cfg.block_len < 1:
        raise ConfigError(f"quantizer.lambda: must be >= 1, got {cfg.block_len}")
    if not 1.0 < cfg.beta < 2.0:
        raise ConfigError(f"quantizer.beta: must lie in (1, 2), got {cfg.beta}")
    if cfg.prescale not in ("none", "auto"):
        raise ConfigError(f"quantizer.prescale: must be none or auto, got {cfg.prescale!r}")
    if not cfg.seeds:
        raise ConfigError("seeds: must be nonempty")
    for method in cfg.methods:
        if method not in METHODS:
            raise ConfigError(f"methods: unknown method {method!r}")
        if method not in _TASK_METHODS[cfg.task]:
            raise ConfigError(f"methods: {method!r} is not available for task {cfg.task!r}")
    if not cfg.m_sweep:
        raise ConfigError("m_sweep: missing required key")
    for m in cfg.m_sweep:
        if m < 1:
            raise ConfigError(f"m_sweep: values must be >= 1, got {m}")
        if any(meth in CONDENSED for meth in cfg.methods) and m % cfg.block_len != 0:
            raise ConfigError(
                f"m_sweep: m={m} is not divisible by quantizer.lambda={cfg.block_len}"
            )
    if "sd2" in cfg.methods and (cfg.block_len - 1) % 2 != 0:
        raise ConfigError(
            f"quantizer.lambda: {cfg.block_len} is invalid for sd2 (need r*lt - r + 1 with r=2)"
        )
    if cfg.generator not in ("toy_pairs", "circle", "krr_synth", "csv", "none"):
        raise ConfigError(f"data.generator: unknown generator {cfg.generator!r}")
    if cfg.generator == "csv" and not cfg.csv_path:
        raise ConfigError("data.path: required when data.generator = csv")
    if not 0.0 < cfg.level < 1.0:
        raise ConfigError(f"mmd.level: must be in (0, 1), got {cfg.level}")
    if cfg.permutations < 1:
        raise ConfigError(f"mmd.t: must be >= 1, got {cfg.permutations}")
    if not cfg.eta > 0:
        raise ConfigError(f"eta: must be positive, got {cfg.eta}")
    if not 0.0 < cfg.train_fraction < 1.0:
        raise ConfigError(f"krr.train_fraction: must be in (0, 1), got {cfg.train_fraction}")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate the flat ``key = value`` config format."""
    return _build_config(_key_values(text))


def load_csv_dataset(path: str) -> tuple[np.ndarray, np.ndarray | None]:
    """Numeric CSV, one sample per line. Returns (features, targets or None).

    If the file starts with a header row (any non-numeric cell) whose last
    column is named ``target``, that column is split off as the targets.
    Non-numeric data cells are rejected with their line number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        lines = [row for row in reader if row]
    if not lines:
        raise ValueError(f"{path}: empty file")

    def numeric(row: list[str]) -> bool:
        try:
            [float(c) for c in row]
            return True
        except ValueError:
            return False

    has_target = False
    start = 0
    if not numeric(lines[0]):
        has_target = lines[0][-1].strip().lower() == "target"
        start = 1
        if not lines[start:]:
            raise ValueError(f"{path}: header but no data rows")
    width = len(lines[start])
    data = np.empty((len(lines) - start, width))
    for i, row in enumerate(lines[start:], start=start):
        if len(row) != width:
            raise ValueError(f"{path}: line {i + 1}: expected {width} columns, got {len(row)}")
        try:
            data[i - start] = [float(c) for c in row]
        except ValueError as exc:
            raise ValueError(f"{path}: line {i + 1}: non-numeric cell ({exc})") from None
    if has_target:
        return data[:, :-1], data[:, -1]
    return data, None


def derive_seed(*parts) -> int:
    """Stable 64-bit sub-seed from the config seed and cell coordinates."""
    digest = hashlib.blake2b("|".join(str(p) for p in parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _ns_config(method: str, m: int, cfg: ExperimentConfig) -> qz.NoiseShapingConfig:
    alphabet = qz.alphabet_from_bits(cfg.bits)
    if method == "beta":
        scheme: qz.SigmaDelta | qz.Beta = qz.Beta(cfg.beta)
    else:
        scheme = qz.SigmaDelta(order=1 if method == "sd1" else 2)
    return qz.NoiseShapingConfig(
        scheme=scheme,
        block_len=cfg.block_len,
        n_blocks=m // cfg.block_len,
        alphabet=alphabet,
        prescale=cfg.prescale,
    )


def method_features(
    method: str,
    Z: np.ndarray,
    m: int,
    cfg: ExperimentConfig,
    rng: np.random.Generator,
    randomized_sd: bool = False,
) -> np.ndarray:
    """Per-sample feature rows whose linear Gram estimates the kernel."""
    if method == "rff":
        return np.sqrt(2.0 / m) * Z
    if method == "universal":
        return np.sqrt(1.0 / m) * np.where(Z >= 0, 1.0, -1.0)
    if method == "stocq":
        alphabet = qz.alphabet_from_bits(cfg.bits)
        return np.sqrt(2.0 / m) * qz.stocq(Z, alphabet, rng)
    if method in CONDENSED:
        ns = _ns_config(method, m, cfg)
        F, scale = cond.encode_batch(Z, ns, rng if randomized_sd else None)
        return F / scale
    raise ValueError(f"method {method!r} has no feature representation")


def _bits_per_sample(method: str, m: int, cfg: ExperimentConfig) -> int:
    if method in ("rff", "semiq", "exact"):
        return cond.memory_footprint("rff", m)
    if method == "universal":
        return cond.memory_footprint("stocq", m, bits=1)
    if method == "stocq":
        return cond.memory_footprint("stocq", m, bits=cfg.bits)
    if method == "beta":
        return cond.memory_footprint(
            "beta", m, bits=cfg.bits, n_blocks=m // cfg.block_len, block_len=cfg.block_len
        )
    order = 1 if method == "sd1" else 2
    return cond.memory_footprint(
        "sigma_delta",
        m,
        bits=cfg.bits,
        n_blocks=m // cfg.block_len,
        block_len=cfg.block_len,
        order=order,
    )


def _row(cfg, method, m, seed, metric, value) -> ResultRow:
    in_alpha = method in ("universal", "semiq", "stocq", "sd1", "sd2", "beta")
    condensed = method in CONDENSED
    return ResultRow(
        task=cfg.task,
        method=method,
        m=m,
        b=(1 if method == "universal" else cfg.bits) if in_alpha else None,
        lam=cfg.block_len if condensed else None,
        p=m // cfg.block_len if condensed else None,
        seed=seed,
        metric=metric,
        value=float(value),
        bits_per_sample=_bits_per_sample(method, m, cfg),
    )


def _spec(cfg: ExperimentConfig, d: int) -> feat.KernelSpec:
    return feat.KernelSpec(gamma=cfg.gamma, dim=d)


def _cell_scan(cfg: ExperimentConfig, m: int, seed: int, method: str) -> list[ResultRow]:
    n = cfg.data_n or 1000
    X, Y = tasks.synth_toy_pairs(n, cfg.data_d, derive_seed(seed, m, method, "data"))
    rff_map = feat.sample_rff_map(_spec(cfg, cfg.data_d), m, derive_seed(seed, m, method, "map"))
    rng = np.random.default_rng(derive_seed(seed, m, method, "quant"))
    alphabet = qz.alphabet_from_bits(cfg.bits)

    def pipeline(mp, PX, PY):
        ZX, ZY = feat.embed(mp, PX), feat.embed(mp, PY)
        if method == "exact":
            return np.exp(-cfg.gamma * np.sum((PX - PY) ** 2, axis=1))
        if method == "rff":
            return (2.0 / m) * np.einsum("ij,ij->i", ZX, ZY)
        if method == "universal":
            SX = np.where(ZX >= 0, 1.0, -1.0)
            SY = np.where(ZY >= 0, 1.0, -1.0)
            return np.einsum("ij,ij->i", SX, SY) / m
        if method == "semiq":
            return (np.pi / (2.0 * m)) * np.einsum("ij,ij->i", ZX, qz.msq(ZY, alphabet))
        if method == "stocq":
            QX, QY = qz.stocq(ZX, alphabet, rng), qz.stocq(ZY, alphabet, rng)
            return (2.0 / m) * np.einsum("ij,ij->i", QX, QY)
        ns = _ns_config(method, m, cfg)
        FX, sx = cond.encode_batch(ZX, ns)
        FY, sy = cond.encode_batch(ZY, ns)
        return np.einsum("ij,ij->i", FX, FY) / (sx * sy)

    scan = kern.sup_error_scan(rff_map, pipeline, (X, Y))
    return [
        _row(cfg, method, m, seed, "max_error", scan.max_error),
        _row(cfg, method, m, seed, "median_error", float(np.median(scan.errors))),
    ]


def _cell_krr(cfg: ExperimentConfig, m: int, seed: int, method: str) -> list[ResultRow]:
    if cfg.generator == "csv":
        X, y = load_csv_dataset(cfg.csv_path)
        if y is None:
            raise ValueError(f"{cfg.csv_path}: krr needs a target column")
    else:
        X, y = tasks.synth_krr_data(cfg.data_n or 1000, derive_seed(seed, m, method, "data"))
    n_train = int(round(cfg.train_fraction * X.shape[0]))
    Xtr, Xte, ytr, yte = X[:n_train], X[n_train:], y[:n_train], y[n_train:]
    if method == "exact":
        Gtr = kern.rbf_gram(Xtr, cfg.gamma).entries
        alpha = np.linalg.solve(Gtr + cfg.eta * np.eye(n_train), ytr)
        pred = kern.rbf_gram(Xte, cfg.gamma, Xtr).entries @ alpha
    else:
        rff_map = feat.sample_rff_map(_spec(cfg, X.shape[1]), m, derive_seed(seed, m, method, "map"))
        rng = np.random.default_rng(derive_seed(seed, m, method, "quant"))
        Ftr = method_features(method, feat.embed(rff_map, Xtr), m, cfg, rng)
        Fte = method_features(method, feat.embed(rff_map, Xte), m, cfg, rng)
        model = tasks.krr_train(Ftr, ytr, cfg.eta)
        pred = tasks.krr_predict(model, Fte)
    mse = float(np.mean((pred - yte) ** 2))
    return [_row(cfg, method, m, seed, "test_mse", mse)]


def _cell_mmd(cfg: ExperimentConfig, m: int, seed: int, method: str) -> list[ResultRow]:
    n = cfg.data_n or 60
    X, Y = tasks.synth_circle_data(n, cfg.gap, derive_seed(seed, m, method, "data"))
    rng = np.random.default_rng(derive_seed(seed, m, method, "quant"))

    if method == "exact":
        estimator = lambda P: kern.rbf_gram(P, cfg.gamma).entries  # noqa: E731
    else:
        rff_map = feat.sample_rff_map(_spec(cfg, 2), m, derive_seed(seed, m, method, "map"))

        def estimator(P):
            F = method_features(method, feat.embed(rff_map, P), m, cfg, rng)
            return F @ F.T

    report = tasks.permutation_test(X, Y, estimator, cfg.permutations, cfg.level, rng)
    return [
        _row(cfg, method, m, seed, "statistic", report.statistic),
        _row(cfg, method, m, seed, "reject", float(report.reject)),
    ]


def _cell_spectral(cfg: ExperimentConfig, m: int, seed: int, method: str) -> list[ResultRow]:
    n = cfg.data_n or 50
    X, _ = tasks.synth_circle_data(n, cfg.gap, derive_seed(seed, m, method, "data"))
    K_exact = kern.rbf_gram(X, cfg.gamma)
    rff_map = feat.sample_rff_map(_spec(cfg, 2), m, derive_seed(seed, m, method, "map"))
    rng = np.random.default_rng(derive_seed(seed, m, method, "quant"))
    Z = feat.embed(rff_map, X)
    F = method_features(method, Z, m, cfg, rng, randomized_sd=True)
    K_hat = kern.condensed_gram(F, kind=method)
    p = m // cfg.block_len
    delta = kern.spectral_delta(p, cfg.block_len, cfg.bits)
    report = kern.spectral_sandwich_check(K_exact, K_hat, cfg.eta, cfg.delta1, cfg.delta2, delta)
    return [
        _row(cfg, method, m, seed, "delta", delta),
        _row(cfg, method, m, seed, "lower_margin", report.lower_margin),
        _row(cfg, method, m, seed, "upper_margin", report.upper_margin),
        _row(cfg, method, m, seed, "holds", float(report.holds)),
    ]


def _cell_footprint(cfg: ExperimentConfig, m: int, seed: int, method: str) -> list[ResultRow]:
    bits = _bits_per_sample(method, m, cfg)
    rows = [_row(cfg, method, m, seed, "bits", float(bits))]
    if method == "beta":
        theoretical = cond.beta_theoretical_bits(cfg.beta, m)
        if theoretical is not None:
            rows.append(_row(cfg, method, m, seed, "golden_bits", theoretical))
    return rows


_CELL_FNS = {
    "approx_scan": _cell_scan,
    "krr": _cell_krr,
    "mmd": _cell_mmd,
    "spectral": _cell_spectral,
    "footprint": _cell_footprint,
}


def run(config: ExperimentConfig, jobs: int = 1) -> list[ResultRow]:
    """Execute every (m, seed, method) cell, write <output>/<task>.csv, return rows."""
    cells = [
        (config, m, seed, method)
        for m in config.m_sweep
        for method in config.methods
        for seed in config.seeds
    ]
    fn = _CELL_FNS[config.task]
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: fn(*c), cells))
    else:
        results = [fn(*cell) for cell in cells]
    rows = [row for cell_rows in results for row in cell_rows]

    if config.task == "mmd":
        for m in config.m_sweep:
            for method in config.methods:
                rejects = [
                    r.value for r in rows if r.m == m and r.method == method and r.metric == "reject"
                ]
                if rejects:
                    rows.append(_row(config, method, m, None, "power", float(np.mean(rejects))))

    rows.sort(
        key=lambda r: (
            r.m,
            METHODS.index(r.method),
            r.seed is None,
            r.seed if r.seed is not None else 0,
            r.metric,
        )
    )
    os.makedirs(config.output, exist_ok=True)
    write_rows_csv(rows, os.path.join(config.output, f"{config.task}.csv"))
    return rows


def write_rows_csv(rows: list[ResultRow], path: str) -> None:
    """Atomic CSV write: UTF-8, comma-separated, header row, LF endings."""
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in rows:
                writer.writerow(
                    [
                        r.task,
                        r.method,
                        r.m,
                        "" if r.b is None else r.b,
                        "" if r.lam is None else r.lam,
                        "" if r.p is None else r.p,
                        "" if r.seed is None else r.seed,
                        r.metric,
                        repr(r.value),
                        r.bits_per_sample,
                    ]
                )
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_TASK_DEFAULT_KEYS = {
    "footprint": {"m_sweep": "1000"},
    "approx_scan": {"m_sweep": "512", "data.n": "200"},
    "krr": {"m_sweep": "512", "data.n": "500"},
    "mmd": {"m_sweep": "512", "data.n": "60", "data.gap": "0.2", "kernel.gamma": "100", "mmd.t": "500"},
    "spectral": {"m_sweep": "512", "data.n": "50", "quantizer.lambda": "8", "quantizer.b": "3", "kernel.gamma": "0.5"},
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config file")
    run_p.add_argument("config", help="path to a key = value config file")
    _common_flags(run_p)

    for task in TASKS:
        name = "scan" if task == "approx_scan" else task
        p = sub.add_parser(name, help=f"quick {task} run with defaults")
        p.add_argument("--config", help="optional config file to start from")
        _common_flags(p)
        p.add_argument("--m", help="comma-separated m sweep")
        p.add_argument("--b", type=int, help="alphabet bits")
        p.add_argument("--lambda", dest="block_len", type=int, help="block length")
        p.add_argument("--beta", type=float, help="beta expansion base")
        p.add_argument("--gamma", type=float, help="kernel gamma")
        p.add_argument("--gap", type=float, help="circle perturbation gap")
        p.add_argument("--methods", help="comma-separated method list")
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1, help="parallel cells (default 1)")
    p.add_argument("--seed", type=int, help="replace the seed list with this one seed")
    p.add_argument("--out", help="output directory")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config) as fh:
                mapping = _key_values(fh.read())
        else:
            task = "approx_scan" if args.command == "scan" else args.command
            mapping = {"task": task, **_TASK_DEFAULT_KEYS[task]}
            if args.config:
                with open(args.config) as fh:
                    mapping.update(_key_values(fh.read()))
            overrides = {
                "m_sweep": args.m,
                "quantizer.b": None if args.b is None else str(args.b),
                "quantizer.lambda": None if args.block_len is None else str(args.block_len),
                "quantizer.beta": None if args.beta is None else str(args.beta),
                "kernel.gamma": None if args.gamma is None else str(args.gamma),
                "data.gap": None if args.gap is None else str(args.gap),
                "methods": args.methods,
            }
            mapping.update({k: v for k, v in overrides.items() if v is not None})
        if args.seed is not None:
            mapping["seeds"] = str(args.seed)
        if args.out is not None:
            mapping["output"] = args.out
        config = _build_config(mapping)
    except (ConfigError, OSError) as exc:
        print(f"qrff: config error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run(config, jobs=max(1, args.jobs))
    except Exception as exc:  # noqa: BLE001
        print(f"qrff: runtime failure: {exc}", file=sys.stderr)
        return 3
    out_path = os.path.join(config.output, f"{config.task}.csv")
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
