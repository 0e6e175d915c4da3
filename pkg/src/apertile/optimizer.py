"""Exhaustive capacity-driven layout search over all complete tilings.

The enumerator streams tilings while a worker pool evaluates each one
against the pre-assembled per-drop channels (assembled exactly once per
drop, never per tiling). Results merge in enumeration order, so the ledger
is deterministic regardless of worker count, and every row is appended to
disk as soon as it exists so long runs can resume.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Callable

import numpy as np

from .channel import ChannelMatrix, LinkBudget, aggregate_channel, assemble_channel
from .config import RunConfig
from .metrics import EvaluationRecord, eta_statistics
from .precoding import PrecodingMatrix, normalize_beams, zero_forcing
from .scenario import UEDrop, drops_fingerprint, sample_drops
from .tiling import (
    AggregationVector,
    IncidenceMatrix,
    _cover_stream,
    baseline_tiling,
    build_incidence_matrix,
    generate_placements,
)
from .units import watts_to_dbm


def _stack_channels(channels) -> np.ndarray:
    if isinstance(channels, np.ndarray):
        stacked = channels
    else:
        stacked = np.stack(
            [c.matrix if isinstance(c, ChannelMatrix) else np.asarray(c) for c in channels]
        )
    if stacked.ndim == 2:
        stacked = stacked[None]
    return stacked


def evaluate_tiling(
    cover: AggregationVector,
    channels,
    budget: LinkBudget,
    *,
    beams: int | None = None,
    condition_cap: float = 1e8,
    tiling_index: int = 0,
    drops_key: str | None = None,
) -> EvaluationRecord:
    """Aggregate, zero-force, normalize, and score one tiling on all drops.

    A rank-deficient or too-ill-conditioned drop makes the whole record
    infeasible (capacity NaN) instead of contributing numerical noise.
    """
    G = _stack_channels(channels)
    drops, ports, _ = G.shape
    users = ports // 2
    if beams is None:
        beams = users

    H = aggregate_channel(G, cover)  # (P, A, 2Q)
    gram = H @ np.conj(np.swapaxes(H, -1, -2))
    lam = np.linalg.eigvalsh(gram)
    ok = lam[:, 0] > 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.sqrt(lam[:, -1] / np.where(ok, lam[:, 0], 1.0))
    ok &= cond <= condition_cap
    if not bool(ok.all()):
        return EvaluationRecord(
            tiling_index=tiling_index,
            tile_count=cover.tile_count,
            per_drop_sum_rates=np.full(drops, np.nan),
            average_sum_rate=float("nan"),
            eta_desired_w=np.full(ports, np.nan),
            min_desired_power_w=float("nan"),
            covered=False,
            feasible=False,
            drops_fingerprint=drops_key,
        )

    V = np.conj(np.swapaxes(np.linalg.solve(gram, H), -1, -2))  # (P, 2Q, A)
    sizes = np.concatenate([cover.tile_sizes()] * 2).astype(float)
    norms = np.sqrt(np.einsum("q,pqa->pa", sizes, V.real**2 + V.imag**2))
    V_normalized = V / norms[:, None, :]

    product = H @ V_normalized  # (P, A, A)
    power = product.real**2 + product.imag**2
    diagonal = np.einsum("paa->pa", power)
    per_beam_power = budget.tx_power_w / beams
    p_des = per_beam_power * diagonal
    p_mui = per_beam_power * (power.sum(axis=2) - diagonal)
    snr = p_des / (p_mui + budget.noise_power_w)
    port_capacity = np.log2(1.0 + snr)  # (P, A)

    per_drop = port_capacity.sum(axis=1)
    eta = p_des.min(axis=0)
    min_power = float(eta.min())
    return EvaluationRecord(
        tiling_index=tiling_index,
        tile_count=cover.tile_count,
        per_drop_sum_rates=per_drop,
        average_sum_rate=float(per_drop.mean()),
        eta_desired_w=eta,
        min_desired_power_w=min_power,
        covered=bool(min_power >= budget.coverage_threshold_w),
        feasible=True,
        per_ue_capacities=port_capacity.reshape(drops, users, 2).sum(axis=2),
        drops_fingerprint=drops_key,
    )


def tiling_precoders(
    cover: AggregationVector,
    channels,
    condition_cap: float = 1e8,
) -> list[PrecodingMatrix]:
    """Normalized per-drop precoders for one tiling (replay/debug export)."""
    G = _stack_channels(channels)
    out = []
    for p in range(G.shape[0]):
        H = aggregate_channel(G[p], cover)
        out.append(normalize_beams(zero_forcing(H, condition_cap), cover))
    return out


# --- ledger ---------------------------------------------------------------

@dataclass(frozen=True)
class LedgerRow:
    tiling_index: int
    capacity_bps_hz: float
    min_power_dbm: float
    covered: bool
    feasible: bool


LEDGER_COLUMNS = "t,capacity_bps_hz,min_power_dbm,coverage,feasible"


def _format_row(row: LedgerRow) -> str:
    # repr round-trips floats exactly, so resumed ledgers reload losslessly
    return (
        f"{row.tiling_index},{row.capacity_bps_hz!r},{row.min_power_dbm!r},"
        f"{int(row.covered)},{int(row.feasible)}"
    )


def _record_to_row(t: int, record: EvaluationRecord) -> LedgerRow:
    if record.feasible:
        with np.errstate(divide="ignore"):
            min_dbm = float(watts_to_dbm(record.min_desired_power_w))
    else:
        min_dbm = float("nan")
    return LedgerRow(
        tiling_index=t,
        capacity_bps_hz=record.average_sum_rate,
        min_power_dbm=min_dbm,
        covered=record.covered,
        feasible=record.feasible,
    )


def write_ledger_header(fh, meta: dict) -> None:
    fh.write("# apertile ledger v1\n")
    for key, value in meta.items():
        fh.write(f"# {key}={value}\n")
    fh.write(LEDGER_COLUMNS + "\n")


def read_ledger(path) -> tuple[dict, list[LedgerRow]]:
    meta: dict[str, str] = {}
    rows: list[LedgerRow] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if line == LEDGER_COLUMNS:
                continue
            try:
                t, cap, minp, cov, feas = line.split(",")
                rows.append(
                    LedgerRow(int(t), float(cap), float(minp), cov == "1", feas == "1")
                )
            except ValueError as err:
                raise ValueError(f"malformed ledger line: {line!r}") from err
    return meta, rows


def summarize_ledger(rows: list[LedgerRow], baseline_capacity: float | None = None) -> dict:
    """min/max/avg/var of capacity and min power, plus baseline comparison."""
    if not rows:
        raise ValueError("empty ledger")
    caps = np.array([r.capacity_bps_hz for r in rows])
    pows = np.array([r.min_power_dbm for r in rows])
    finite = np.isfinite(caps)
    if not finite.any():
        raise ValueError("no feasible rows in ledger")
    caps_f = caps[finite]
    pows_f = pows[np.isfinite(pows)]
    out = {
        "rows": len(rows),
        "feasible_rows": int(finite.sum()),
        "coverage_fraction": float(np.mean([r.covered for r in rows])),
        "capacity": {
            "min": float(caps_f.min()),
            "max": float(caps_f.max()),
            "avg": float(caps_f.mean()),
            "var": float(caps_f.var()),
        },
        "min_power_dbm": {
            "min": float(pows_f.min()),
            "max": float(pows_f.max()),
            "avg": float(pows_f.mean()),
            "var": float(pows_f.var()),
        },
    }
    if baseline_capacity is not None:
        beating = int(np.sum(caps_f > baseline_capacity))
        out["baseline_capacity_bps_hz"] = float(baseline_capacity)
        out["beating_baseline"] = beating
        out["beating_fraction"] = beating / len(rows)
    return out


# --- baseline comparison ---------------------------------------------------

@dataclass(frozen=True)
class BaselineComparison:
    delta: float  # (best - baseline) / baseline
    beating_count: int
    beating_fraction: float


def compare_to_baseline(
    record: EvaluationRecord,
    baseline: EvaluationRecord,
    ledger: list[LedgerRow] | None = None,
) -> BaselineComparison:
    """Relative capacity gain of `record` plus how many tilings beat baseline."""
    if (
        record.drops_fingerprint is not None
        and baseline.drops_fingerprint is not None
        and record.drops_fingerprint != baseline.drops_fingerprint
    ):
        raise ValueError("records were evaluated on different drop sets")
    if len(record.per_drop_sum_rates) != len(baseline.per_drop_sum_rates):
        raise ValueError("records cover different drop counts")
    delta = (record.average_sum_rate - baseline.average_sum_rate) / baseline.average_sum_rate
    count = 0
    fraction = 0.0
    if ledger:
        caps = np.array([r.capacity_bps_hz for r in ledger])
        count = int(np.sum(caps[np.isfinite(caps)] > baseline.average_sum_rate))
        fraction = count / len(ledger)
    return BaselineComparison(delta=delta, beating_count=count, beating_fraction=fraction)


# --- worker pool -----------------------------------------------------------

_SHARED: dict = {}


def _init_worker(G, budget, condition_cap, beams, cells, element_count, drops_key):
    _SHARED.update(
        G=G,
        budget=budget,
        condition_cap=condition_cap,
        beams=beams,
        cells=cells,
        element_count=element_count,
        drops_key=drops_key,
    )


def _cover_from_ids(ids: tuple[int, ...], cells, element_count) -> AggregationVector:
    values = np.empty(element_count, dtype=np.int32)
    for q, k in enumerate(ids, start=1):
        values[cells[k - 1]] = q
    return AggregationVector(values=values, tile_count=len(ids), placements=ids)


def _eval_task(task):
    t, ids = task
    cover = _cover_from_ids(ids, _SHARED["cells"], _SHARED["element_count"])
    record = evaluate_tiling(
        cover,
        _SHARED["G"],
        _SHARED["budget"],
        beams=_SHARED["beams"],
        condition_cap=_SHARED["condition_cap"],
        tiling_index=t,
        drops_key=_SHARED["drops_key"],
    )
    return t, ids, _record_to_row(t, record)


# --- optimization ----------------------------------------------------------

@dataclass
class OptimizationResult:
    config_hash: str
    seed: int
    channel_mode: str
    total_tilings: int
    evaluated_tilings: int
    exhaustive: bool
    feasible: bool
    best: EvaluationRecord | None
    best_cover: AggregationVector | None
    best_precoders: list[PrecodingMatrix] | None
    best_unconstrained: EvaluationRecord | None
    best_unconstrained_cover: AggregationVector | None
    baseline: EvaluationRecord | None
    baseline_cover: AggregationVector | None
    comparison: BaselineComparison | None
    ledger: list[LedgerRow]
    drops: list[UEDrop]
    channel_assemblies: int
    elapsed_s: float


def _cover_by_index(L: IncidenceMatrix, target: int) -> AggregationVector:
    cells = [np.array(p, dtype=np.intp) - 1 for p in L.rows]
    for t, rows in enumerate(_cover_stream(L), start=1):
        if t == target:
            return _cover_from_ids(tuple(k + 1 for k in rows), cells, L.aperture.size)
    raise ValueError(f"tiling index {target} beyond enumeration")


def optimize(
    cfg: RunConfig,
    *,
    ledger_path=None,
    resume: bool = False,
    log: Callable[[str], None] | None = None,
) -> OptimizationResult:
    """Stream every tiling, evaluate, and select the constrained argmax.

    The best tiling maximizes the drop-averaged sum rate among tilings that
    pass the coverage floor; ties break toward the lowest enumeration
    index. When no tiling passes, the result is marked infeasible and
    carries the unconstrained best for diagnosis.
    """
    start = time.perf_counter()
    cfg.validate()
    info = log or (lambda _msg: None)

    aperture = cfg.aperture_grid()
    geometry = cfg.geometry()
    budget = cfg.link_budget()
    placements = generate_placements(aperture, cfg.shapes())
    L = build_incidence_matrix(placements, aperture)
    cells = [np.array(p, dtype=np.intp) - 1 for p in L.rows]

    drops = sample_drops(cfg.scenario)
    channels = [assemble_channel(geometry, cfg.pattern, d, cfg.channel) for d in drops]
    G = np.stack([c.matrix for c in channels])
    drops_key = drops_fingerprint(drops)
    beams = cfg.scenario.users
    info(
        f"{len(placements)} placements on {aperture.columns}x{aperture.rows}; "
        f"{len(drops)} drops assembled ({cfg.channel.tag})"
    )

    baseline_cover = None
    baseline_record = None
    if aperture.rows % 6 == 0:
        baseline_cover = baseline_tiling(aperture)
        baseline_record = evaluate_tiling(
            baseline_cover,
            G,
            budget,
            beams=beams,
            condition_cap=cfg.zf_condition_cap,
            drops_key=drops_key,
        )

    # Resumed rows are skipped, not recomputed. Our writer emits rows in
    # enumeration order, so an interrupted ledger is always a prefix and
    # appending keeps the file ordered.
    existing_rows: list[LedgerRow] = []
    if resume and ledger_path and os.path.exists(ledger_path):
        meta, existing_rows = read_ledger(ledger_path)
        if meta.get("config_hash") not in (None, cfg.config_hash()):
            raise ValueError("existing ledger was written by a different config")
    skip = {row.tiling_index for row in existing_rows}

    ledger_fh = None
    if ledger_path:
        fresh = not existing_rows
        ledger_fh = open(ledger_path, "w" if fresh else "a")
        if fresh:
            write_ledger_header(
                ledger_fh,
                {
                    "config_hash": cfg.config_hash(),
                    "seed": cfg.scenario.seed,
                    "channel_mode": cfg.channel.tag,
                    "aperture": f"{aperture.columns}x{aperture.rows}",
                    "alphabet": cfg.alphabet_file or cfg.alphabet,
                    "stride": cfg.tiling_stride,
                    "drops_fingerprint": drops_key,
                    "baseline_capacity_bps_hz": (
                        repr(baseline_record.average_sum_rate)
                        if baseline_record is not None
                        else "none"
                    ),
                },
            )

    stream_total = 0

    def task_gen():
        nonlocal stream_total
        t = 0
        for t, rows in enumerate(_cover_stream(L), start=1):
            if (t - 1) % cfg.tiling_stride != 0 or t in skip:
                continue
            yield t, tuple(k + 1 for k in rows)
        stream_total = t

    # best trackers; processing is in ascending t with strict improvement,
    # which realizes the lowest-index tie-break
    best_row: LedgerRow | None = None
    best_ids: tuple[int, ...] | None = None
    best_any_row: LedgerRow | None = None
    best_any_ids: tuple[int, ...] | None = None
    all_rows: list[LedgerRow] = []
    done = 0

    def track(row: LedgerRow, ids: tuple[int, ...] | None):
        nonlocal best_row, best_ids, best_any_row, best_any_ids
        all_rows.append(row)
        if not (row.feasible and math.isfinite(row.capacity_bps_hz)):
            return
        if best_any_row is None or row.capacity_bps_hz > best_any_row.capacity_bps_hz:
            best_any_row, best_any_ids = row, ids
        if row.covered and (
            best_row is None or row.capacity_bps_hz > best_row.capacity_bps_hz
        ):
            best_row, best_ids = row, ids

    for row in existing_rows:
        track(row, None)

    def consume(result_iter):
        nonlocal done
        for _t, ids, row in result_iter:
            track(row, ids)
            if ledger_fh:
                ledger_fh.write(_format_row(row) + "\n")
            done += 1
            if done % 10000 == 0:
                info(f"evaluated {done} tilings")

    workers = cfg.workers or os.cpu_count() or 1
    init_args = (G, budget, cfg.zf_condition_cap, beams, cells, aperture.size, drops_key)
    if workers > 1:
        ctx = get_context("fork")
        with ctx.Pool(workers, _init_worker, init_args) as pool:
            consume(pool.imap(_eval_task, task_gen(), chunksize=64))
    else:
        _init_worker(*init_args)
        consume(map(_eval_task, task_gen()))

    if ledger_fh:
        ledger_fh.close()

    def materialize(row: LedgerRow | None, ids: tuple[int, ...] | None):
        if row is None:
            return None, None, None
        cover = (
            _cover_by_index(L, row.tiling_index)
            if ids is None
            else _cover_from_ids(ids, cells, aperture.size)
        )
        record = evaluate_tiling(
            cover,
            G,
            budget,
            beams=beams,
            condition_cap=cfg.zf_condition_cap,
            tiling_index=row.tiling_index,
            drops_key=drops_key,
        )
        precoders = tiling_precoders(cover, G, cfg.zf_condition_cap) if record.feasible else None
        return cover, record, precoders

    best_cover, best_record, best_precoders = materialize(best_row, best_ids)
    best_any_cover, best_any_record, _ = materialize(best_any_row, best_any_ids)

    comparison = None
    if best_record is not None and baseline_record is not None:
        comparison = compare_to_baseline(best_record, baseline_record, all_rows)

    best_text = f"{best_row.capacity_bps_hz:.6g} bps/Hz" if best_row else "none"
    info(f"done: {len(all_rows)} tilings evaluated, best covered capacity {best_text}")
    return OptimizationResult(
        config_hash=cfg.config_hash(),
        seed=cfg.scenario.seed,
        channel_mode=cfg.channel.tag,
        total_tilings=stream_total,
        evaluated_tilings=len(all_rows),
        exhaustive=cfg.tiling_stride == 1,
        feasible=best_row is not None,
        best=best_record,
        best_cover=best_cover,
        best_precoders=best_precoders,
        best_unconstrained=best_any_record,
        best_unconstrained_cover=best_any_cover,
        baseline=baseline_record,
        baseline_cover=baseline_cover,
        comparison=comparison,
        ledger=all_rows,
        drops=drops,
        channel_assemblies=len(channels),
        elapsed_s=time.perf_counter() - start,
    )


def result_to_json(result: OptimizationResult, cfg: RunConfig) -> dict:
    """Portable summary of an optimization run (grids, stats, provenance)."""

    def record_doc(record: EvaluationRecord | None, cover: AggregationVector | None):
        if record is None:
            return None
        with np.errstate(divide="ignore"):
            doc = {
                "tiling_index": record.tiling_index,
                "capacity_bps_hz": record.average_sum_rate,
                "min_power_dbm": float(watts_to_dbm(record.min_desired_power_w))
                if record.feasible
                else None,
                "covered": record.covered,
                "feasible": record.feasible,
            }
            if record.feasible:
                stats = eta_statistics(record.eta_desired_dbm())
                doc["eta_dbm"] = {
                    "min": stats.min_dbm,
                    "max": stats.max_dbm,
                    "avg": stats.avg_dbm,
                    "var_db2": stats.var_db2,
                }
        if cover is not None:
            doc["tile_count"] = cover.tile_count
            doc["values_row_major"] = np.asarray(cover.values).tolist()
        return doc

    return {
        "config_hash": result.config_hash,
        "seed": result.seed,
        "channel_mode": result.channel_mode,
        "aperture": {"columns": cfg.aperture.columns, "rows": cfg.aperture.rows},
        "alphabet": cfg.alphabet_file or cfg.alphabet,
        "total_tilings": result.total_tilings,
        "evaluated_tilings": result.evaluated_tilings,
        "exhaustive": result.exhaustive,
        "feasible": result.feasible,
        "elapsed_s": result.elapsed_s,
        "best": record_doc(result.best, result.best_cover),
        "best_unconstrained": record_doc(
            result.best_unconstrained, result.best_unconstrained_cover
        ),
        "baseline": record_doc(result.baseline, result.baseline_cover),
        "comparison": None
        if result.comparison is None
        else {
            "delta_pct": 100.0 * result.comparison.delta,
            "beating_count": result.comparison.beating_count,
            "beating_fraction": result.comparison.beating_fraction,
        },
    }
