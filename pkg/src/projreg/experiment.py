"""Seeded parameter sweeps over (n, delta, alpha, truncation rank).

Trial ``t`` is generated from seed ``base_seed + t``. Within a trial the
training pairs are drawn once for the largest ``n`` and every smaller ``n``
uses a prefix, so the image subspaces are nested across the sweep.
"""

import configparser
import csv
import io as _io
import logging
from dataclasses import dataclass, field, fields

import numpy as np

from .analysis import data_noise, noise_inject
from .exceptions import NumericalError, ValidationError
from .linalg import smallest_singular
from .operator_learning import hs_deviation_bound_check, learn_centered, learn_uncentered
from .problems import make_collinear_images, make_smoothing_problem, sample_images
from .solvers import map_estimate, method1, method3, oracle_dls, span_basis
from .training import sample_stats

log = logging.getLogger(__name__)

CSV_HEADER = [
    "trial", "n", "delta", "alpha", "method", "err_x", "residual",
    "mu_n", "sigma_min", "bound_lhs", "bound_rhs", "holds",
]
METHODS = ("i", "iii", "map", "oracle-dls")

# section, key, kind
_LAYOUT = [
    ("problem", "m", int),
    ("problem", "q", int),
    ("problem", "kernel_width", float),
    ("problem", "prior_length", float),
    ("problem", "images", str),
    ("problem", "epsilon", float),
    ("problem", "eta", float),
    ("problem", "truth_in_span", bool),
    ("sweep", "n", [int]),
    ("sweep", "delta", [float]),
    ("sweep", "alpha", [float]),
    ("sweep", "truncation_rank", [int]),
    ("sweep", "methods", [str]),
    ("run", "trials", int),
    ("run", "base_seed", int),
    ("run", "output_dir", str),
    ("tolerances", "rel_tol", float),
    ("tolerances", "solver_tol", float),
]


@dataclass
class ExperimentConfig:
    m: int = 40
    q: int = 40
    kernel_width: float = 0.03
    prior_length: float = 0.2
    images: str = "prior"
    epsilon: float = 1e-4
    eta: float = 0.0
    truth_in_span: bool = False
    n: list = field(default_factory=lambda: [5, 10, 20])
    delta: list = field(default_factory=lambda: [0.0, 1e-3])
    alpha: list = field(default_factory=lambda: [1e-3])
    truncation_rank: list = field(default_factory=lambda: [None])
    methods: list = field(default_factory=lambda: ["i", "iii", "map"])
    trials: int = 3
    base_seed: int = 0
    output_dir: str = "experiment-out"
    rel_tol: float = 1e-12
    solver_tol: float = 1e-10

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("n", "delta", "alpha", "truncation_rank", "methods"):
            if not getattr(self, name):
                raise ValidationError(f"sweep list {name!r} is empty")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.images not in ("prior", "collinear"):
            raise ValidationError(f"unknown image source {self.images!r}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValidationError(f"unknown methods {sorted(bad)}")
        if min(self.n) < 1 or min(self.delta) < 0 or min(self.alpha) <= 0:
            raise ValidationError("n >= 1, delta >= 0 and alpha > 0 are required")

    def to_text(self):
        lines, section = [], None
        for sec, key, kind in _LAYOUT:
            if sec != section:
                if section is not None:
                    lines.append("")
                lines.append(f"[{sec}]")
                section = sec
            lines.append(f"{key} = {_format(getattr(self, key), kind)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"bad config: {exc}") from None
        known = {(sec, key) for sec, key, _ in _LAYOUT}
        for sec in parser.sections():
            for key in parser[sec]:
                if (sec, key) not in known:
                    raise ValidationError(f"unknown config key [{sec}] {key}")
        values = {}
        for sec, key, kind in _LAYOUT:
            if parser.has_option(sec, key):
                values[key] = _parse(parser.get(sec, key), kind, key)
        return cls(**values)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return type(self)(**values)


def _format(value, kind):
    if isinstance(kind, list):
        return ", ".join(_format(v, kind[0]) for v in value)
    if value is None:
        return "none"
    if kind is bool:
        return "true" if value else "false"
    if kind is float:
        return repr(float(value))
    return str(value)


def _parse(text, kind, key):
    if isinstance(kind, list):
        return [_parse(t.strip(), kind[0], key) for t in text.split(",") if t.strip()]
    try:
        if text.lower() == "none" and key == "truncation_rank":
            return None
        if kind is bool:
            if text.lower() not in ("true", "false"):
                raise ValueError(text)
            return text.lower() == "true"
        return kind(text)
    except ValueError:
        raise ValidationError(f"bad value {text!r} for {key}") from None


def derive_seed(seed, *tags):
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


def _reflect_e2_towards(x):
    """Householder reflection fixing ``e1`` and sending ``e2`` to ``x``'s ``e1``-free part.

    Applied to the collinear set it keeps the singular values, puts ``x`` in
    the span and gives ``x`` an O(1) component along a near-dependent direction.
    """
    m = x.shape[0]
    r = x.copy()
    r[0] = 0.0
    H = np.eye(m)
    norm = np.linalg.norm(r)
    if norm == 0.0:
        return H
    v = -r / norm
    v[1] += 1.0
    vv = v @ v
    if vv > 0.0:
        H -= 2.0 * np.outer(v, v) / vv
    return H


def trial_inputs(config, trial):
    """Problem, full-size images and observation for one trial."""
    seed = config.base_seed + trial
    problem = make_smoothing_problem(
        config.m, config.q, config.kernel_width, seed, config.prior_length
    )
    n_max = max(config.n)
    if config.images == "collinear":
        images = make_collinear_images(config.m, n_max, config.epsilon)
    else:
        images = sample_images(problem, n_max, derive_seed(seed, 1))
    if config.truth_in_span and config.images == "collinear":
        images = images @ _reflect_e2_towards(problem.x_dagger)
    elif config.truth_in_span:
        images[0] = problem.x_dagger
    y = data_noise(problem.K, problem.x_dagger, config.eta, derive_seed(seed, 2))
    return problem, images, y


def _row(trial, n, delta, alpha, method, problem, rec, mu_n, learned, ts):
    bound = hs_deviation_bound_check(ts, learned, problem.K)
    err = np.linalg.norm(rec.x_hat - problem.x_dagger) / np.linalg.norm(problem.x_dagger)
    return {
        "trial": trial, "n": n, "delta": delta, "alpha": alpha, "method": method,
        "err_x": float(err), "residual": rec.residual_norm, "mu_n": mu_n,
        "sigma_min": float(learned.svd_of_images.singulars[-1]),
        "bound_lhs": bound.lhs, "bound_rhs": bound.rhs,
        "holds": bound.holds and bound.per_vector_holds,
    }


def run_trial(config, trial):
    problem, images, y = trial_inputs(config, trial)
    seed = config.base_seed + trial
    rows = []
    for d_index, delta in enumerate(config.delta):
        ts_all = noise_inject(problem.K, images, delta, derive_seed(seed, 3, d_index))
        for n in config.n:
            ts = ts_all.head(n)
            rows.extend(_rows_for(config, trial, problem, ts, y))
    return rows


def _rows_for(config, trial, problem, ts, y):
    rows = []
    n, delta = ts.n, ts.delta
    if "i" in config.methods:
        for trunc in config.truncation_rank:
            label = "i" if trunc is None else f"i-t{trunc}"
            try:
                learned = learn_uncentered(ts, config.rel_tol, trunc)
                rec = method1(learned, y, config.solver_tol)
            except (NumericalError, ValidationError) as exc:
                log.info("trial %d n=%d %s skipped: %s", trial, n, label, exc)
                continue
            rows.append(_row(trial, n, delta, None, label, problem, rec,
                             rec.diagnostics["mu_n"], learned, ts))
    if {"iii", "map"} & set(config.methods):
        model = sample_stats(ts, config.rel_tol)
        if model.p_prime == 0:
            log.info("trial %d n=%d: p' = 0, centered methods skipped", trial, n)
        else:
            learned = learn_centered(model, ts)
            mu_n = smallest_singular(learned.kn, config.solver_tol)
            if "iii" in config.methods:
                rec = method3(model, learned, y, config.solver_tol)
                rows.append(_row(trial, n, delta, None, "iii", problem, rec, mu_n,
                                 learned, ts))
            if "map" in config.methods:
                for alpha in config.alpha:
                    rec = map_estimate(model, learned, y, alpha)
                    rows.append(_row(trial, n, delta, alpha, "map", problem, rec, mu_n,
                                     learned, ts))
    if "oracle-dls" in config.methods:
        learned = learn_uncentered(ts, config.rel_tol)
        rec = oracle_dls(problem.K, span_basis(ts.Y), y, config.solver_tol)
        rows.append(_row(trial, n, delta, None, "oracle-dls", problem, rec,
                         float("nan"), learned, ts))
    return rows


def _sort_key(row):
    alpha = -1.0 if row["alpha"] is None else row["alpha"]
    return (row["trial"], row["n"], row["delta"], alpha, row["method"])


def run_experiment(config):
    rows = []
    for trial in range(config.trials):
        log.info("trial %d/%d (seed %d)", trial + 1, config.trials,
                 config.base_seed + trial)
        rows.extend(run_trial(config, trial))
    return sorted(rows, key=_sort_key)


def _cell(value):
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_cell(row[k]) for k in CSV_HEADER])
    return buf.getvalue()
