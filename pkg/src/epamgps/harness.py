"""Experiment config files and result writers for the EPAM harness.

Config files are ``key = value`` lines; ``#`` starts a comment::

    pairs = DAX:JIR, DAQ:POB      required; stimulus:response, comma separated
    pairs_b = DOX:JOB             optional second list for an interference run
    order = fixed                 fixed | permuted
    seed = 12345
    criterion = 1                 consecutive perfect trials
    max_trials = 30
    probes = DAQ, KOX             optional, used by ``epam probe``
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .codec import Syllable, encode
from .dnet import DiscriminationNet, leaf_line
from .epam import (
    DEFAULT_SEED,
    InhibitionReport,
    Pair,
    TrialRecord,
    TrialSchedule,
    check_roles,
    criterion_trial,
    oscillation_count,
)

KEYS = ("pairs", "pairs_b", "order", "seed", "criterion", "max_trials", "probes")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, filename: str = "<config>"):
        self.line = line
        where = f"{filename}:{line}" if line else filename
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    schedule: TrialSchedule
    pairs_b: Tuple[Pair, ...] = ()
    probes: Tuple[Syllable, ...] = ()


def _syllable(text: str, line: int, filename: str) -> Syllable:
    try:
        return Syllable(text.strip().upper())
    except ValueError as e:
        raise ConfigError(str(e), line, filename) from None


def _pairs(value: str, line: int, filename: str) -> Tuple[Pair, ...]:
    out = []
    for item in value.split(","):
        if not item.strip():
            continue
        if item.count(":") != 1:
            raise ConfigError(f"pair must be STIMULUS:RESPONSE, got {item.strip()!r}", line, filename)
        s, r = item.split(":")
        out.append(Pair(_syllable(s, line, filename), _syllable(r, line, filename)))
    if not out:
        raise ConfigError("empty pair list", line, filename)
    return tuple(out)


def _int(value: str, key: str, line: int, filename: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", line, filename) from None


def parse_config(text: str, filename: str = "<config>", seed: Optional[int] = None) -> ExperimentConfig:
    """Parse a config; an explicit ``seed`` argument overrides the file's."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno, filename)
        key, value = (x.strip() for x in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, filename)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, filename)
        values[key], lines[key] = value, lineno
    if "pairs" not in values:
        raise ConfigError("missing 'pairs'", None, filename)

    pairs = _pairs(values["pairs"], lines["pairs"], filename)
    pairs_b = _pairs(values["pairs_b"], lines["pairs_b"], filename) if "pairs_b" in values else ()
    probes = tuple(
        _syllable(p, lines["probes"], filename)
        for p in values.get("probes", "").split(",")
        if p.strip()
    )
    ints = {
        k: _int(values[k], k, lines[k], filename)
        for k in ("seed", "criterion", "max_trials")
        if k in values
    }
    if seed is not None:
        ints["seed"] = seed
    try:
        schedule = TrialSchedule(
            pairs,
            order=values.get("order", "fixed"),
            seed=ints.get("seed", DEFAULT_SEED),
            criterion=ints.get("criterion", 1),
            max_trials=ints.get("max_trials", 30),
        )
        if pairs_b:
            TrialSchedule(pairs_b)
            check_roles(pairs + pairs_b)
    except ValueError as e:
        raise ConfigError(str(e), None, filename) from None
    return ExperimentConfig(schedule, pairs_b, probes)


def load_config(path, seed: Optional[int] = None) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path), seed)


def trials_csv(records: Sequence[TrialRecord]) -> str:
    rows = ["trial,stimulus,response_expected,response_produced,correct,net_nodes"]
    for rec in records:
        for it in rec.items:
            produced = "none" if it.produced is None else str(it.produced)
            rows.append(
                f"{rec.trial},{it.stimulus},{it.expected},{produced},{int(it.correct)},{it.net_nodes}"
            )
    return "\n".join(rows) + "\n"


def metrics_text(
    schedule: TrialSchedule,
    records: Sequence[TrialRecord],
    net: DiscriminationNet,
    inhibition: Optional[InhibitionReport] = None,
) -> str:
    reached = criterion_trial(records, schedule.criterion)
    osc = oscillation_count(records)
    lines = [
        f"pairs = {len(schedule.pairs)}",
        f"order = {schedule.order}",
        f"seed = {schedule.seed}",
        f"criterion = {schedule.criterion}",
        f"criterion_reached = {'yes' if reached else 'no'}",
        f"criterion_trial = {reached if reached else 'none'}",
        f"trials_run = {len(records)}",
        f"net_nodes = {net.node_count}",
        f"learning_events = {len(net.events)}",
        "events_per_trial = " + " ".join(str(sum(i.events for i in r.items)) for r in records),
        f"oscillations_total = {sum(osc.values())}",
    ]
    for p in schedule.pairs:
        lines.append(f"oscillations.{p.stimulus} = {osc.get(p.stimulus, 0)}")
    if inhibition is not None:
        lines += [
            f"ri.original_trials = {inhibition.original_trials}",
            f"ri.b_trials = {inhibition.b_trials}",
            f"ri.recall_a_after_b = {inhibition.recall_a_after_b:.4f}",
            f"ri.relearning_trials = {inhibition.relearning_trials}",
            f"ri.relearning_savings = {inhibition.relearning_savings}",
        ]
    return "\n".join(lines) + "\n"


def _trace_lines(net: DiscriminationNet, code, label: str) -> Tuple[List[str], object]:
    leaf, steps = net.sort_trace(code)
    lines = [f"  {label} {code.letters()}"]
    for st in steps:
        v = "?" if st.value is None else int(st.value)
        lines.append(f"    T {st.test} = {v} {st.branch}")
    lines.append(f"    {leaf_line(leaf)}")
    return lines, leaf


def sort_trace_text(net: DiscriminationNet, probe: Syllable) -> str:
    """Both sorts behind one response: the stimulus, then its cue."""
    out = [f"probe {probe}"]
    lines, leaf = _trace_lines(net, encode(probe), "stimulus")
    out += lines
    img = leaf.image
    produced = None
    if img is not None and img.role == "stimulus" and img.cue is not None:
        lines, rleaf = _trace_lines(net, img.cue, "cue")
        out += lines
        r = rleaf.image
        if r is not None and r.role == "response" and r.complete:
            produced = r.partial.to_syllable()
    out.append(f"  produced {produced if produced else 'none'}")
    return "\n".join(out) + "\n"
