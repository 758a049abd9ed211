"""Seeded repetitions, experiment runs and their CSV artifacts."""

from __future__ import annotations

import csv
import json
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..base import LinTsLearner, UcbLearner
from ..baselines import (
    CorralState,
    Exp3State,
    GreedyMeta,
    RbGridState,
    SingleBase,
    UcbMeta,
    expand_grid,
)
from ..env import EnvKind, instantiate_env
from ..errors import NumericError
from ..meta import BalancingState
from ..metrics import RegretTrace, SummaryRow, checkpoints_for, summarize
from .config import SEED_DERIVATION, ExperimentConfig

ENV_ROLE = 0
META_ROLE = 1


def stream_seed(master: int, rep: int, role: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=(rep, role))


def _rng(master: int, rep: int, role: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(master, rep, role))


def _make_base(spec, env_spec, rng):
    p = spec.params
    if spec.kind == "UCB":
        return UcbLearner(env_spec.num_arms, c=p["c"], delta=p["delta"])
    return LinTsLearner(
        ambient_dim=env_spec.dim,
        action_set=env_spec.action_set,
        c=p["c"],
        dim=p["dim"],
        lam=p["lam"],
        cube_scale=env_spec.cube_scale if env_spec.kind is EnvKind.LINEAR else None,
        rng=rng,
    )


def build_learners(config: ExperimentConfig, rep: int):
    """Base learners and meta-learner for one repetition.

    RB-Grid expands every base learner into one independent copy per grid
    value; each copy gets its own random stream.
    """
    env_spec = config.environment
    meta_spec = config.meta
    p = meta_spec.resolved(config.horizon, len(config.base_learners))
    if meta_spec.kind == "RBGrid":
        slots = expand_grid(len(config.base_learners), p["grid"])
        bases = [
            _make_base(config.base_learners[b], env_spec, _rng(config.seed, rep, 2 + k))
            for k, (b, _) in enumerate(slots)
        ]
        meta = RbGridState([g for _, g in slots], delta=p["delta"], c=p["c"])
        return bases, meta

    bases = [
        _make_base(b, env_spec, _rng(config.seed, rep, 2 + i))
        for i, b in enumerate(config.base_learners)
    ]
    m = len(bases)
    meta_rng = _rng(config.seed, rep, META_ROLE)
    kind = meta_spec.kind
    if kind in ("D3RB", "ED2RB"):
        meta = BalancingState(m, kind, d_min=p["d_min"], delta=p["delta"], c=p["c"])
    elif kind == "Corral":
        meta = CorralState(m, config.horizon, eta=p["eta"], rng=meta_rng, loss_mode=p["loss_mode"])
    elif kind == "EXP3":
        meta = Exp3State(m, config.horizon, eta=p["eta"], gamma=p["gamma"], rng=meta_rng)
    elif kind == "UCB":
        meta = UcbMeta(m, c=p["c"], delta=p["delta"])
    elif kind == "Greedy":
        meta = GreedyMeta(m)
    else:
        meta = SingleBase(m, p["index"])
    return bases, meta


def run_repetition(config: ExperimentConfig, rep: int,
                   observer: Optional[Callable] = None) -> RegretTrace:
    """Run all rounds of repetition ``rep``; deterministic in (config, rep).

    ``observer(t, i, bases, meta)`` is called after every round when given.
    """
    env = instantiate_env(config.environment, stream_seed(config.seed, rep, ENV_ROLE))
    bases, meta = build_learners(config, rep)
    contextual = config.environment.kind is EnvKind.CONTEXTUAL
    potentials = meta.potentials
    dhat = getattr(meta, "dhat", None)

    ch, rg, rw, mn = [], [], [], []
    pb, pa, dh = [], [], []
    t = 0
    try:
        for t in range(config.horizon):
            context = env.sample_context() if contextual else None
            i = meta.select()
            learner = bases[i]
            action = learner.act(context)
            out = env.step(action)
            learner.update(action, out.reward)
            if potentials is not None:
                pb.append(potentials[i])
            meta.update(i, out.reward)
            if potentials is not None:
                pa.append(potentials[i])
                dh.append(dhat[i])
            ch.append(i)
            rg.append(out.inst_regret)
            rw.append(out.reward)
            mn.append(out.mean_reward)
            if observer is not None:
                observer(t, i, bases, meta)
    except NumericError as exc:
        raise NumericError(f"round {t + 1}: {exc}") from exc

    return RegretTrace(
        chosen=np.asarray(ch, dtype=np.int64),
        inst_regret=np.asarray(rg),
        reward=np.asarray(rw),
        mean_reward=np.asarray(mn),
        num_learners=len(bases),
        seed=rep,
        phi_before=np.asarray(pb) if potentials is not None else None,
        phi_after=np.asarray(pa) if potentials is not None else None,
        dhat=np.asarray(dh) if potentials is not None else None,
    )


def _run_one(args):
    config, rep = args
    return run_repetition(config, rep)


def run_traces(config: ExperimentConfig, workers: int = 1) -> List[RegretTrace]:
    """All repetitions, ordered by repetition index.  Serial and parallel agree."""
    jobs = [(config, rep) for rep in range(config.repetitions)]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


@dataclass
class RunArtifact:
    config: ExperimentConfig
    traces: List[RegretTrace]
    summary: Optional[List[SummaryRow]]
    checkpoints: List[int]
    out_dir: Optional[str] = None
    echo: dict = field(default_factory=dict)

    def final_mean(self) -> float:
        return float(np.mean([t.cumulative_regret[-1] for t in self.traces]))


def config_echo(config: ExperimentConfig) -> dict:
    return {
        "config": config.to_dict(),
        "meta_label": config.meta.label,
        "seed_derivation": SEED_DERIVATION,
        "repetition_seeds": [
            {"rep": rep, "entropy": config.seed, "spawn_key": [rep, "role"]}
            for rep in range(config.repetitions)
        ],
    }


def fmt(x) -> str:
    return repr(float(x))


def write_trace_csv(path: str, trace: RegretTrace, rounds: Optional[List[int]] = None) -> None:
    cum = trace.cumulative_regret
    if rounds is None:
        rounds = range(1, trace.horizon + 1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "cumulative_regret", "chosen_learner"])
        for t in rounds:
            w.writerow([t, fmt(cum[t - 1]), int(trace.chosen[t - 1])])


def write_summary_csv(path: str, rows: List[SummaryRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "mean_regret", "two_se", "mean_regret_scale"])
        for r in rows:
            w.writerow([r.round, fmt(r.mean_regret), fmt(r.two_se), fmt(r.mean_regret_scale)])


def run_experiment(config: ExperimentConfig, out_dir: Optional[str] = None, workers: int = 1,
                   trace_mode: str = "checkpoints") -> RunArtifact:
    """Run every repetition and, with ``out_dir``, write the CSV artifacts.

    Files are written to a scratch directory first and moved into place only
    once everything succeeded.
    """
    if trace_mode not in ("full", "checkpoints"):
        raise ValueError(f"trace_mode must be 'full' or 'checkpoints', not {trace_mode!r}")
    config.validate()
    traces = run_traces(config, workers)
    checkpoints = checkpoints_for(config.horizon, config.stride)
    summary = summarize(traces, checkpoints) if len(traces) >= 2 else None
    echo = config_echo(config)
    artifact = RunArtifact(config, traces, summary, checkpoints, out_dir, echo)
    if out_dir is None:
        return artifact

    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    scratch = tempfile.mkdtemp(prefix=".partial-", dir=parent)
    try:
        os.makedirs(os.path.join(scratch, "traces"))
        rounds = None if trace_mode == "full" else checkpoints
        for rep, trace in enumerate(traces):
            write_trace_csv(os.path.join(scratch, "traces", f"rep_{rep:04d}.csv"), trace, rounds)
        if summary is not None:
            write_summary_csv(os.path.join(scratch, "summary.csv"), summary)
        with open(os.path.join(scratch, "config.json"), "w", encoding="utf-8") as fh:
            json.dump(echo, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if os.path.exists(out_dir):
            shutil.rmtree(out_dir)
        os.replace(scratch, out_dir)
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    return artifact


def load_trace_dir(trace_dir: str):
    """(rounds, values) from ``rep_*.csv`` files; values has shape (reps, rounds)."""
    files = sorted(f for f in os.listdir(trace_dir) if f.startswith("rep_") and f.endswith(".csv"))
    if not files:
        raise FileNotFoundError(f"no rep_*.csv files in {trace_dir}")
    rounds = None
    values = []
    for name in files:
        with open(os.path.join(trace_dir, name), newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        r = [int(row["round"]) for row in rows]
        if rounds is None:
            rounds = r
        elif r != rounds:
            raise ValueError(f"{name} has different rounds from the other traces")
        values.append([float(row["cumulative_regret"]) for row in rows])
    return rounds, np.asarray(values)
