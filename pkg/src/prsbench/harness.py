"""Experiment registry, config validation, and persisted reports.

Every experiment is a pure function of (params, stream) returning
result values plus declared pass/fail targets.  Reports serialize to
JSON under a versioned schema; re-running a (config, seed) pair gives
a byte-identical report body apart from the wall-clock field.  Master
seed -> sub-stream derivation is RandomStream.child(experiment
name).child(label, index), a splitmix64-based counter scheme.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import chi2, chisquare

from . import __version__
from .attacks import (
    PERMANENT_CAP,
    binary_phase_attack_experiment,
    collision_pairs_from_state,
    distinguishing_experiment,
    make_haar_bank,
    pru_advantage_experiment,
)
from .clifford import enumerate_cliffords, sample_uniform_clifford, tableau_to_unitary
from .ensembles import (
    binary_phase_state,
    design_state_batch,
    make_prf_family,
    make_prs_family,
)
from .haar import (
    exp_bound_holds,
    frame_potential,
    haar_moment,
    haar_state_batch,
    overlap_tail_experiment,
    sample_haar_state,
    sample_haar_unitary,
)
from .qcore import (
    QUBIT_CAP,
    PureState,
    RandomStream,
    UnitaryOp,
    diamond_distance_unitary,
    frobenius_distance,
)
from .shadows import collect_shadows, estimate_many, mom_batches, t_min_snapshots

SCHEMA_VERSION = 1
OUT_DIR_ENV = "PRSBENCH_OUT_DIR"


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: object
    kind: type
    low: Optional[float] = None
    high: Optional[float] = None
    choices: Optional[tuple] = None
    doc: str = ""

    def check(self, value) -> Optional[str]:
        if self.kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, self.kind) or isinstance(value, bool):
            return f"{self.name}={value!r} must be {self.kind.__name__}"
        if self.low is not None and value < self.low:
            return f"{self.name}={value} below minimum {self.low}"
        if self.high is not None and value > self.high:
            return f"{self.name}={value} above maximum {self.high}"
        if self.choices is not None and value not in self.choices:
            return f"{self.name}={value!r} not one of {list(self.choices)}"
        return None


@dataclass
class ExperimentConfig:
    """One experiment invocation: name, seed, parameter overrides."""

    experiment: str
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1
    params: Dict[str, object] = field(default_factory=dict)

    def resolved_params(self) -> Dict[str, object]:
        spec = EXPERIMENTS[self.experiment]
        out = {p.name: p.default for p in spec.params}
        for k, v in self.params.items():
            if k in out and isinstance(v, int) and isinstance(out[k], float):
                v = float(v)
            out[k] = v
        return out

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "threads": self.threads,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            experiment=d.get("experiment", ""),
            seed=int(d.get("seed", 0)),
            out=d.get("out"),
            threads=int(d.get("threads", 1)),
            params=dict(d.get("params", {})),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Experiment:
    name: str
    params: Tuple[ParamSpec, ...]
    run: Callable[[Dict[str, object], RandomStream], Tuple[dict, dict]]
    doc: str = ""


def _target(value, op: str, bound) -> dict:
    ok = {
        ">=": value >= bound,
        "<=": value <= bound,
        "==": value == bound,
        ">": value > bound,
        "<": value < bound,
    }[op]
    return {"value": value, "op": op, "bound": bound, "pass": bool(ok)}


# ---------------------------------------------------------------------------
# experiment bodies

def _run_haar_tail(p, rng):
    eps = [p["eps_lo"], p["eps_hi"]]
    rep = overlap_tail_experiment(p["n"], eps, p["samples"], rng)
    results = rep.to_dict()
    targets = {}
    for i, e in enumerate(eps):
        exact = rep.exact_tail[i]
        sigma = math.sqrt(exact * (1 - exact) / p["samples"])
        dev = abs(rep.empirical_tail[i] - exact)
        targets[f"cdf_match_eps{i}"] = _target(dev, "<=", 3 * sigma)
        # bound subcheck gets the same binomial tolerance as the CDF match
        if exp_bound_holds(p["n"], e):
            targets[f"exp_bound_eps{i}"] = _target(
                rep.empirical_tail[i], "<=", rep.exp_bound[i] + 3 * sigma
            )
    return results, targets


def _run_clifford_uniformity(p, rng):
    draws = p["draws"]
    classes = {c.key(): i for i, c in enumerate(enumerate_cliffords(1))}
    counts = np.zeros(len(classes), dtype=np.int64)
    st = rng.child("chi2")
    for _ in range(draws):
        counts[classes[sample_uniform_clifford(1, st).key()]] += 1
    stat, pval = chisquare(counts)
    n2_count = sum(1 for _ in enumerate_cliffords(2))

    k = p["fp_samples"]
    st = rng.child("fp")
    states = np.stack(
        [tableau_to_unitary(sample_uniform_clifford(3, st)).mat[:, 0] for _ in range(k)]
    )
    fp = frame_potential(states, 2)
    want = haar_moment(2, 8)
    batches = 20
    per = np.array(
        [frame_potential(states[i::batches], 2) for i in range(batches)]
    )
    stderr = per.std(ddof=1) / math.sqrt(batches)
    results = {
        "chi2_stat": float(stat),
        "chi2_p": float(pval),
        "n1_classes": len(classes),
        "n2_classes": n2_count,
        "frame_potential": fp,
        "frame_potential_haar": want,
        "frame_potential_stderr": float(stderr),
    }
    targets = {
        "n1_chi2_p": _target(float(pval), ">", 0.001),
        "n2_class_count": _target(n2_count, "==", 11520),
        "fp_within_3sigma": _target(abs(fp - want), "<=", 3 * stderr),
    }
    return results, targets


def _run_design_frame_potential(p, rng):
    n, t = p["n"], p["t"]
    states = design_state_batch(n, t, p["eps"], p["count"], rng.child("draw"))
    fp = frame_potential(states, t)
    want = haar_moment(t, 1 << n)
    batches = 20
    per = np.array([frame_potential(states[i::batches], t) for i in range(batches)])
    stderr = per.std(ddof=1) / math.sqrt(batches)
    slack = (1 + p["eps"]) ** 2 - 1  # multiplicative design window on the t-th moment
    results = {
        "frame_potential": fp,
        "haar_value": want,
        "stderr": float(stderr),
        "gate_count_window_eps": p["eps"],
    }
    targets = {
        "fp_in_design_window": _target(
            abs(fp - want), "<=", slack * want + 3 * stderr
        ),
    }
    return results, targets


def _enumeration_bias(n: int, rng: RandomStream) -> float:
    """Max |average snapshot - fidelity| over the full group at this n."""
    gen = rng.gen
    amps = gen.normal(size=(2, 1 << n)) + 1j * gen.normal(size=(2, 1 << n))
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)
    psi, phi = amps
    dim = 1 << n
    total = 0.0
    count = 0
    for c in enumerate_cliffords(n):
        u = tableau_to_unitary(c).mat
        probs = np.abs(u @ psi) ** 2
        est = (dim + 1) * np.abs(u @ phi) ** 2 - 1.0
        total += float(probs @ est)
        count += 1
    truth = abs(np.vdot(psi, phi)) ** 2
    return abs(total / count - truth)


def _run_shadows_bench(p, rng):
    n, m, eps, delta = p["n"], p["m"], p["eps"], p["delta"]
    t_min = t_min_snapshots(m, eps, delta)
    bias = max(_enumeration_bias(1, rng.child("enum1")), _enumeration_bias(2, rng.child("enum2")))
    all_ok = 0
    for r in range(p["runs"]):
        st = rng.child("run", r)
        psi = sample_haar_state(n, st.child("state"))
        obs_mat = haar_state_batch(n, m, st.child("obs"))
        shadows = collect_shadows(psi, t_min, st.child("meas"))
        rep = estimate_many(shadows, [PureState(n, o) for o in obs_mat], eps, delta)
        truth = np.abs(obs_mat.conj() @ psi.amps) ** 2
        all_ok += bool(np.max(np.abs(np.array(rep.estimates) - truth)) <= eps)
    rate = all_ok / p["runs"]
    results = {
        "t_min": t_min,
        "batches": mom_batches(m, delta),
        "all_correct_rate": rate,
        "enumeration_bias": bias,
        "runs": p["runs"],
    }
    targets = {
        "unbiased_by_enumeration": _target(bias, "<=", 1e-9),
        "all_correct_rate": _target(rate, ">=", 0.95),
    }
    return results, targets


def _run_distinguish(p, rng):
    family = make_prs_family(
        "binary-phase", p["n"], p["key_count"], rng.child("family")
    )
    bank = None
    if p["copies"] > PERMANENT_CAP:
        bank = make_haar_bank(p["n"], rng.child("bank"), p["bank_samples"])
    rep = distinguishing_experiment(
        family, p["copies"], p["trials"], rng.child("game"), haar_bank=bank
    )
    targets = {
        "bayes_success": _target(rep["bayes_success"], ">=", 0.90),
        "shadow_success": _target(rep["shadow_success"], ">=", 0.85),
        "bayes_dominates": _target(rep["bayes_minus_shadow"], ">=", -0.03),
    }
    return rep, targets


def _run_binary_phase_attack(p, rng):
    fam = make_prf_family(p["backend"], p["n"], p["key_count"], rng.child("prf"))
    rep = binary_phase_attack_experiment(
        fam, p["pairs"], p["trials"], rng.child("game")
    )
    # exactness and uniformity subchecks on a small balanced instance
    sub = make_prf_family("balanced", 4, 2, rng.child("sub"))
    pairs4, _ = collision_pairs_from_state(
        binary_phase_state(sub, 0), p["exact_samples"], rng.child("sub-pairs")
    )
    f = sub.table[0]
    bad = sum(1 for q in pairs4 if f[q.x] != f[q.y])
    cells = {
        (x, y): 0 for x in range(16) for y in range(16) if f[x] == f[y]
    }
    for q in pairs4:
        if (q.x, q.y) in cells:
            cells[(q.x, q.y)] += 1
    counts = np.array(list(cells.values()))
    stat = float(((counts - counts.mean()) ** 2 / counts.mean()).sum())
    pval = float(chi2.sf(stat, len(cells) - 1))
    results = dict(rep)
    results.update(
        {
            "noncollision_pairs": int(bad),
            "uniformity_chi2": stat,
            "uniformity_p": pval,
            "exact_samples": p["exact_samples"],
        }
    )
    targets = {
        "prs_accept": _target(rep["prs_accept_rate"], "==", 1.0),
        "haar_accept": _target(rep["haar_accept_rate"], "<=", 0.05),
        "zero_noncollision": _target(int(bad), "==", 0),
        "pair_uniformity_p": _target(pval, ">", 0.001),
    }
    return results, targets


def _run_pru_advantage(p, rng):
    n1 = p["family_size"]
    r1 = pru_advantage_experiment(n1, p["queries"], p["adversary"], p["trials"], rng.child("a"))
    r2 = pru_advantage_experiment(2 * n1, p["queries"], p["adversary"], p["trials"], rng.child("b"))
    pred1 = (1 - 1 / n1) / (2 * n1)
    pred2 = (1 - 1 / (2 * n1)) / (4 * n1)
    results = {
        "base": r1.to_dict(),
        "doubled": r2.to_dict(),
        "predicted_base": pred1,
        "predicted_doubled": pred2,
    }
    targets = {
        "base_matches_closed_form": _target(abs(r1.adv_hat - pred1), "<=", 3 * r1.std_err),
        "doubled_matches_closed_form": _target(abs(r2.adv_hat - pred2), "<=", 3 * r2.std_err),
        "halving": _target(
            abs(r2.adv_hat - r1.adv_hat / 2), "<=", 3 * (r1.std_err + r2.std_err)
        ),
    }
    return results, targets


def _run_norms_check(p, rng):
    pairs = p["pairs"]
    worst = -math.inf
    streams = {n: rng.child("pairs", n) for n in (1, 2, 3)}
    for i in range(pairs):
        n = 1 + i % 3
        st = streams[n]
        u = sample_haar_unitary(n, st)
        v = sample_haar_unitary(n, st)
        worst = max(worst, diamond_distance_unitary(u, v) - 2 * frobenius_distance(u, v))
    eye = UnitaryOp(1, np.eye(2, dtype=np.complex128), validate=False)
    zop = UnitaryOp(1, np.diag([1.0, -1.0]).astype(np.complex128), validate=False)
    neg = UnitaryOp(1, -np.eye(2, dtype=np.complex128), validate=False)
    d_iz = diamond_distance_unitary(eye, zop)
    d_in = diamond_distance_unitary(eye, neg)
    results = {
        "max_diamond_minus_2frob": worst,
        "diamond_I_Z": d_iz,
        "diamond_I_negI": d_in,
        "pairs": pairs,
    }
    targets = {
        "diamond_le_2frob": _target(worst, "<=", 1e-7),
        "diamond_I_Z_is_2": _target(abs(d_iz - 2.0), "<=", 1e-9),
        "diamond_I_negI_is_0": _target(abs(d_in), "<=", 1e-9),
    }
    return results, targets


_I = int
_F = float

EXPERIMENTS: Dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "haar-tail",
            (
                ParamSpec("n", 8, _I, 1, QUBIT_CAP, doc="qubit count"),
                ParamSpec("samples", 100_000, _I, 1, 10**8, doc="Haar draws"),
                ParamSpec("eps_lo", 0.02, _F, 1e-9, 1.0, doc="first overlap threshold"),
                ParamSpec("eps_hi", 0.05, _F, 1e-9, 1.0, doc="second overlap threshold"),
            ),
            _run_haar_tail,
            "overlap tail vs exact CDF and the exponential bound",
        ),
        Experiment(
            "clifford-uniformity",
            (
                ParamSpec("draws", 100_000, _I, 100, 10**8, doc="n=1 sampler draws"),
                ParamSpec("fp_samples", 2000, _I, 40, 10**6, doc="n=3 frame-potential states"),
            ),
            _run_clifford_uniformity,
            "sampler uniformity, group size, 2-design frame potential",
        ),
        Experiment(
            "design-frame-potential",
            (
                ParamSpec("n", 3, _I, 1, 12, doc="qubit count"),
                ParamSpec("t", 2, _I, 1, 4, doc="design order"),
                ParamSpec("eps", 0.25, _F, 1e-6, 0.99, doc="design accuracy"),
                ParamSpec("count", 3000, _I, 40, 10**6, doc="sampled states"),
            ),
            _run_design_frame_potential,
            "random-circuit design frame potential vs Haar",
        ),
        Experiment(
            "shadows-bench",
            (
                ParamSpec("n", 6, _I, 1, 10, doc="qubit count"),
                ParamSpec("m", 64, _I, 1, 4096, doc="observables per run"),
                ParamSpec("eps", 0.33, _F, 0.01, 1.0, doc="target accuracy"),
                ParamSpec("delta", 0.05, _F, 1e-6, 0.5, doc="failure budget"),
                ParamSpec("runs", 100, _I, 1, 10**5, doc="independent runs"),
            ),
            _run_shadows_bench,
            "joint fidelity estimation at the snapshot budget",
        ),
        Experiment(
            "distinguish",
            (
                ParamSpec("n", 8, _I, 1, 12, doc="qubit count"),
                ParamSpec("key_count", 32, _I, 1, 1 << 16, doc="family size"),
                ParamSpec("copies", 60, _I, 0, 10**4, doc="measured copies per trial"),
                ParamSpec("trials", 200, _I, 1, 10**5, doc="game rounds"),
                ParamSpec("bank_samples", 100_000, _I, 1000, 10**7, doc="design bank size"),
            ),
            _run_distinguish,
            "Bayes and shadow rules on the family-vs-Haar game",
        ),
        Experiment(
            "binary-phase-attack",
            (
                ParamSpec("n", 10, _I, 1, QUBIT_CAP, doc="qubit count"),
                ParamSpec("key_count", 4096, _I, 1, 1 << 20, doc="PRF keys"),
                ParamSpec("pairs", 30, _I, 1, 10**4, doc="collision pairs per trial"),
                ParamSpec("trials", 100, _I, 1, 10**4, doc="trials per branch"),
                ParamSpec("exact_samples", 10_000, _I, 100, 10**6, doc="exactness subcheck pairs"),
                ParamSpec("backend", "balanced", str, choices=("balanced", "mixer"), doc="PRF backend"),
            ),
            _run_binary_phase_attack,
            "collision sampling plus brute-force key search",
        ),
        Experiment(
            "pru-advantage",
            (
                ParamSpec("family_size", 8, _I, 2, 1 << 10, doc="unitary family size"),
                ParamSpec("queries", 1, _I, 1, 100, doc="oracle queries per trial"),
                ParamSpec("trials", 200_000, _I, 2, 10**7, doc="game rounds"),
                ParamSpec("adversary", "swap-test", str, choices=("swap-test", "ignore"), doc="strategy"),
            ),
            _run_pru_advantage,
            "swap-test advantage and its halving in family size",
        ),
        Experiment(
            "norms-check",
            (
                ParamSpec("pairs", 200, _I, 3, 10**5, doc="random unitary pairs"),
            ),
            _run_norms_check,
            "diamond vs Frobenius distance inequalities",
        ),
    ]
}


# ---------------------------------------------------------------------------
# validation / execution / reports

def validate_config(config: ExperimentConfig) -> List[str]:
    """All precondition violations at once; empty means runnable."""
    errs: List[str] = []
    if config.experiment not in EXPERIMENTS:
        return [
            f"unknown experiment {config.experiment!r}; registered: "
            + ", ".join(sorted(EXPERIMENTS))
        ]
    spec = EXPERIMENTS[config.experiment]
    known = {p.name: p for p in spec.params}
    for name in config.params:
        if name not in known:
            errs.append(f"unknown parameter {name!r} for {config.experiment}")
    if not 0 <= config.seed < 2**64:
        errs.append(f"seed={config.seed} must fit in 64 bits")
    if config.threads < 1:
        errs.append(f"threads={config.threads} must be >= 1")
    merged = config.resolved_params()
    for pspec in spec.params:
        msg = pspec.check(merged[pspec.name])
        if msg:
            errs.append(msg)
    # cross-parameter preconditions
    if config.experiment == "binary-phase-attack" and not errs:
        if 2 * merged["n"] + 1 > QUBIT_CAP:
            errs.append(f"n={merged['n']} needs 2n+1 <= {QUBIT_CAP} qubits")
    if config.experiment == "pru-advantage" and not errs:
        fs = merged["family_size"]
        if fs & (fs - 1):
            errs.append(f"family_size={fs} must be a power of two")
    return errs


@dataclass
class Report:
    """Persisted experiment outcome with pass/fail targets."""

    experiment: str
    config: dict
    results: dict
    targets: dict
    passed: bool
    wall_clock_s: float
    schema_version: int = SCHEMA_VERSION
    package_version: str = __version__
    path: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "package_version": self.package_version,
            "experiment": self.experiment,
            "config": self.config,
            "results": self.results,
            "targets": self.targets,
            "passed": self.passed,
            "wall_clock_s": self.wall_clock_s,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "reports"))


def run_experiment(config: ExperimentConfig) -> Report:
    """Validate, dispatch, time, persist.  Raises on invalid config."""
    errs = validate_config(config)
    if errs:
        raise ValueError("; ".join(errs))
    spec = EXPERIMENTS[config.experiment]
    rng = RandomStream(config.seed).child(config.experiment)
    t0 = time.perf_counter()
    results, targets = spec.run(config.resolved_params(), rng)
    wall = time.perf_counter() - t0
    report = Report(
        experiment=config.experiment,
        config=config.to_dict(),
        results=_plain(results),
        targets=_plain(targets),
        passed=all(t["pass"] for t in targets.values()),
        wall_clock_s=wall,
    )
    if config.out:
        path = Path(config.out)
    else:
        path = default_out_dir() / f"{config.experiment}-seed{config.seed}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json())
    report.path = str(path)
    return report


def _plain(obj):
    """JSON-ready copy: numpy scalars and arrays to python types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "experiment report",
    "type": "object",
    "required": [
        "schema_version",
        "package_version",
        "experiment",
        "config",
        "results",
        "targets",
        "passed",
        "wall_clock_s",
    ],
    "properties": {
        "schema_version": {"type": "integer", "const": SCHEMA_VERSION},
        "package_version": {"type": "string"},
        "experiment": {"type": "string"},
        "config": {
            "type": "object",
            "required": ["experiment", "seed", "threads", "params"],
            "properties": {
                "experiment": {"type": "string"},
                "seed": {"type": "integer", "minimum": 0},
                "threads": {"type": "integer", "minimum": 1},
                "params": {"type": "object"},
            },
        },
        "results": {"type": "object"},
        "targets": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["value", "op", "bound", "pass"],
                "properties": {
                    "value": {"type": ["number", "integer"]},
                    "op": {"enum": [">=", "<=", "==", ">", "<"]},
                    "bound": {"type": ["number", "integer"]},
                    "pass": {"type": "boolean"},
                },
            },
        },
        "passed": {"type": "boolean"},
        "wall_clock_s": {"type": "number", "minimum": 0},
    },
}
