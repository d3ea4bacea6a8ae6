# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2022 -            Qentinel Group.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ---------------------------
"""Experiment sweeps with pass/fail gates.

An experiment is described by an ``ExperimentSpec`` (JSON, see
docs/experiment_config.md). It is expanded into independent cells
(problem x eps x method x dt), the cells are run, optionally in worker
processes, and reduced in cell order into a ``SummaryReport`` whose
gate verdicts depend only on the reported metrics.
"""
from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import csv
import json
import math
import os
import numpy as np
from robot.api import logger
from UASolver.internal import util
from UASolver.internal.config import SolverConfig
from UASolver.internal.config_defaults import CONFIG
from UASolver.internal.exceptions import (UAConfigurationError, UAGateFailure, UAValidationError)
from UASolver.internal.integrator import Trajectory, integrate, recover_window
from UASolver.internal.maps import map_diagnostics
from UASolver.internal.meas import MEAS
from UASolver.internal.problems import PROBLEMS, get_problem
from UASolver.internal.reference import (ErrorReport, averaged_method, direct_im2nd,
                                         error_at_final, hamiltonian_error_series,
                                         reference_guard, rk45_reference)
from UASolver.internal.scales import ScaleVector

KINDS: tuple[str, ...] = ("convergence", "drift", "compare-averaged", "recover-window",
                          "diagnostics", "timing")
METHODS: tuple[str, ...] = ("ua", "direct", "averaged", "reference")
REFERENCE_METHODS: tuple[str, ...] = ("rk45", "rk45-adaptive", "self")
# fixed reference step "auto" samples the finest period this many times
AUTO_REFERENCE_SAMPLES: int = 32
GUARD_PARAMETERS: tuple[str, ...] = ("RefSamplesPerPeriod", "MaxReferenceSteps")
CSV_SCHEMA_VERSION: int = 1


@dataclass(frozen=True)
class ReferenceSpec:
    method: str = "rk45"
    step: Any = "auto"
    rtol: Optional[float] = None
    validate: bool = True
    fallback: bool = True

    def __post_init__(self) -> None:
        if self.method not in REFERENCE_METHODS:
            raise UAValidationError('Unknown reference method {}, expected one of {}'.format(
                self.method, ', '.join(REFERENCE_METHODS)))
        if self.step != "auto" and self.step is not None:
            object.__setattr__(self, "step", util.positive_float(self.step))
        if self.rtol is not None:
            object.__setattr__(self, "rtol", util.positive_float(self.rtol))
        if self.method == "rk45-adaptive" and self.rtol is None:
            raise UAValidationError('Adaptive reference needs rtol')
        object.__setattr__(self, "validate", util.par2bool(self.validate))
        object.__setattr__(self, "fallback", util.par2bool(self.fallback))

    def fixed_step(self, scales: ScaleVector) -> Optional[float]:
        if self.method != "rk45":
            return None
        if self.step in ("auto", None):
            return scales.finest_period / AUTO_REFERENCE_SAMPLES
        return float(self.step)


def _check_gates(gates: dict[str, Any]) -> dict[str, dict[str, float]]:
    checked: dict[str, dict[str, float]] = {}
    for name, bounds in gates.items():
        if not isinstance(bounds, dict) or not bounds or set(bounds) - {"min", "max"}:
            raise UAValidationError('Gate {} must be a mapping with "min" and/or "max", '
                                    'got {}'.format(name, bounds))
        values = {key: float(value) for key, value in bounds.items()}
        if any(not v >= 0 for v in values.values()):
            raise UAValidationError('Gate {} bounds must be non-negative, got {}'.format(
                name, bounds))
        if values.get("min", 0.0) > values.get("max", math.inf):
            raise UAValidationError('Gate {} has min above max'.format(name))
        checked[name] = values
    return checked


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    kind: str
    problem: str
    eps_grid: tuple[tuple[float, ...], ...]
    dt_grid: tuple[float, ...]
    t_final: float
    x0: Optional[tuple[float, ...]] = None
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    gates: dict[str, dict[str, float]] = field(default_factory=dict)
    output: Optional[str] = None
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise UAValidationError('Unknown experiment kind {}, expected one of {}'.format(
                self.kind, ', '.join(KINDS)))
        if self.problem not in PROBLEMS:
            raise UAConfigurationError('Unknown problem {}. Available: {}'.format(
                self.problem, ', '.join(PROBLEMS)))
        if not self.eps_grid:
            raise UAValidationError('Experiment {} has an empty eps grid'.format(self.name))
        if not self.dt_grid:
            raise UAValidationError('Experiment {} has an empty dt grid'.format(self.name))
        object.__setattr__(self, "eps_grid",
                           tuple(tuple(util.parse_floats(e)) for e in self.eps_grid))
        object.__setattr__(self, "dt_grid",
                           tuple(util.positive_float(dt) for dt in self.dt_grid))
        object.__setattr__(self, "t_final", util.positive_float(self.t_final))
        if self.x0 is not None:
            object.__setattr__(self, "x0", tuple(util.parse_floats(self.x0)))
        object.__setattr__(self, "gates", _check_gates(self.gates))
        scales = len(PROBLEMS[self.problem].default_eps)
        for eps in self.eps_grid:
            if len(eps) != scales:
                raise UAValidationError('Problem {} takes {} scales, got {}'.format(
                    self.problem, scales, eps))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentSpec:
        try:
            return cls(name=str(data.get("name", data["kind"])),
                       kind=str(data["kind"]),
                       problem=str(data["problem"]),
                       eps_grid=tuple(data["eps"]),
                       dt_grid=tuple(data["dt"]),
                       t_final=data["t_final"],
                       x0=data.get("x0"),
                       reference=ReferenceSpec(**data.get("reference", {})),
                       gates=dict(data.get("gates", {})),
                       output=data.get("output"),
                       options=dict(data.get("options", {})))
        except KeyError as e:
            raise UAValidationError('Experiment config is missing key {}'.format(e)) from e
        except TypeError as e:
            raise UAValidationError('Invalid experiment config: {}'.format(e)) from e

    @classmethod
    def from_json(cls, path: str) -> ExperimentSpec:
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise UAConfigurationError('Can not read experiment config {}: {}'.format(
                path, e)) from e
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return dict(name=self.name, kind=self.kind, problem=self.problem,
                    eps=[list(e) for e in self.eps_grid], dt=list(self.dt_grid),
                    t_final=self.t_final, x0=None if self.x0 is None else list(self.x0),
                    reference=asdict(self.reference), gates=self.gates, output=self.output,
                    options=self.options)


@dataclass
class SummaryReport:
    name: str
    kind: str
    problem: str
    cells: list[ErrorReport] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)
    spread: dict[str, float] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    mode: str = "reference"
    runtime: float = 0.0
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failed_gates(self) -> list[str]:
        return [name for name, ok in self.verdicts.items() if not ok]

    def raise_on_failure(self) -> None:
        if not self.passed:
            raise UAGateFailure('Experiment {} failed gates: {}'.format(
                self.name, ', '.join('{}={}'.format(g, _fmt(self.metrics.get(g)))
                                     for g in self.failed_gates())), verdicts=self.verdicts)

    def as_dict(self) -> dict[str, Any]:
        return dict(name=self.name, kind=self.kind, problem=self.problem, mode=self.mode,
                    passed=self.passed, runtime_s=self.runtime, slopes=self.slopes,
                    spread=self.spread, metrics=self.metrics, verdicts=self.verdicts,
                    files=self.files, csv_schema=CSV_SCHEMA_VERSION,
                    cells=[cell.as_row() for cell in self.cells])

    def write_json(self, path: str) -> str:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.as_dict(), f, indent=2, sort_keys=True, default=_json_default)
        self.files.append(path)
        return path


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return str(value)


def _fmt(value: Optional[float]) -> str:
    return "missing" if value is None else "{:.4g}".format(value)


def evaluate_gates(metrics: dict[str, float], gates: dict[str, dict[str, float]]) -> dict[str,
                                                                                          bool]:
    """One verdict per gated metric.

    A gate named ``slope`` applies to ``slope`` and every ``slope[...]``
    metric. A gate that matches no metric fails.
    """
    verdicts: dict[str, bool] = {}
    for gate, bounds in sorted(gates.items()):
        names = sorted(m for m in metrics if m == gate or m.startswith(gate + "["))
        if not names:
            logger.warn('Gate {} does not match any metric'.format(gate))
            verdicts[gate] = False
            continue
        for name in names:
            value = metrics[name]
            verdicts[name] = bool(not math.isnan(value) and value >= bounds.get("min", -math.inf)
                                  and value <= bounds.get("max", math.inf))
    return verdicts


def metric_name(base: str, label: str) -> str:
    return "{}[{}]".format(base, label)


def eps_label(eps: Sequence[float]) -> str:
    return ",".join("{:g}".format(e) for e in eps)


def _ratio(a: float, b: float) -> float:
    if b > 0:
        return a / b
    return math.inf if a > 0 else 1.0


@dataclass(frozen=True)
class Cell:
    """One independent solver run, picklable for worker processes."""
    problem: str
    eps: tuple[float, ...]
    method: str
    t_final: float
    dt: float = 0.0
    x0: Optional[tuple[float, ...]] = None
    solver: tuple[tuple[str, Any], ...] = ()
    step: Optional[float] = None
    rtol: Optional[float] = None
    t0: float = 0.0
    store_every: Optional[int] = None
    label: str = ""
    registry: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise UAValidationError('Unknown method {}, expected one of {}'.format(
                self.method, ', '.join(METHODS)))

    @property
    def name(self) -> str:
        return self.label or self.method


def _registry_snapshot() -> tuple[tuple[str, Any], ...]:
    return tuple((name, CONFIG[name]) for name in GUARD_PARAMETERS)


def _solver_values(overrides: dict[str, Any]) -> tuple[tuple[str, Any], ...]:
    """SolverConfig settings without dt and t_final, registry values filled in."""
    values = SolverConfig.from_config(1.0, 1.0, **overrides).as_dict()
    values.pop("dt")
    values.pop("t_final")
    return tuple(sorted(values.items()))


def _solver_settings(spec: ExperimentSpec, extra: Optional[dict[str, Any]] = None) -> tuple[
        tuple[str, Any], ...]:
    return _solver_values({**spec.options.get("solver", {}), **(extra or {})})


def run_cell(cell: Cell) -> Trajectory:
    """Runs one cell. Module level so worker processes can unpickle it."""
    for name, value in cell.registry:
        if CONFIG[name] != value:
            CONFIG.set_value(name, value)
    problem = get_problem(cell.problem, cell.eps)
    x0 = cell.x0 if cell.x0 is not None else problem.x0
    invariant = problem.invariant
    logger.debug('Cell {} {} eps={} dt={} started'.format(cell.problem, cell.name,
                                                         eps_label(cell.eps), cell.dt))
    if cell.method == "reference":
        traj = rk45_reference(problem.field, problem.scales, x0, cell.t_final, step=cell.step,
                              rtol=cell.rtol, t0=cell.t0, store_every=cell.store_every,
                              invariant=invariant)
    else:
        cfg = SolverConfig(dt=cell.dt, t_final=cell.t_final, **dict(cell.solver))
        if cell.method == "direct":
            traj = direct_im2nd(problem.field, problem.scales, cfg, x0, invariant=invariant)
        else:
            decomp = problem.decompose(cfg)
            if cell.method == "averaged":
                traj = averaged_method(decomp, cfg, x0, invariant=invariant)
            else:
                traj = integrate(decomp, problem.scales, cfg, x0, invariant=invariant)
    traj.meta["label"] = cell.name
    logger.debug('Cell {} {} eps={} dt={} finished in {:.2f} s'.format(
        cell.problem, cell.name, eps_label(cell.eps), cell.dt, traj.meta.get("wall_clock", 0.0)))
    return traj


def run_cells(cells: Sequence[Cell], workers: int = 1) -> list[Trajectory]:
    """Results in cell order, whatever the worker count."""
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            return list(pool.map(run_cell, cells))
    return [run_cell(cell) for cell in cells]


def check_reference_cells(cells: Sequence[Cell]) -> None:
    """Rejects infeasible fixed step references before anything runs."""
    for cell in cells:
        if cell.method == "reference" and cell.step is not None:
            scales = get_problem(cell.problem, cell.eps).scales
            reference_guard(scales, cell.step, cell.t_final - cell.t0)


def aligned_step(step: float, spacing: float) -> tuple[float, int]:
    """Largest step <= ``step`` dividing ``spacing``, and the number per spacing."""
    per = max(1, int(math.ceil(spacing / step - 1e-9)))
    return spacing / per, per


def _write_rows(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _write_reports(path: str, cells: Sequence[ErrorReport]) -> str:
    rows = [cell.as_row() for cell in cells]
    header: list[str] = []
    for row in rows:
        header += [key for key in row if key not in header]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
    return path


def _report_path(out_dir: Optional[str], filename: str) -> Optional[str]:
    if out_dir is None:
        return None
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, filename)


def _method_cells(spec: ExperimentSpec, eps: tuple[float, ...],
                  defaults: Sequence[dict[str, Any]]) -> list[Cell]:
    """Cells of options["methods"], each {"name", "method", "dt", "solver"}."""
    cells = []
    for entry in spec.options.get("methods", defaults):
        method = entry.get("method", entry.get("name"))
        cells.append(
            Cell(problem=spec.problem, eps=eps, method=method, t_final=spec.t_final,
                 dt=util.positive_float(entry.get("dt", spec.dt_grid[0])), x0=spec.x0,
                 solver=_solver_settings(spec, entry.get("solver")),
                 label=entry.get("name", method), registry=_registry_snapshot()))
    return cells


def _finish(report: SummaryReport, spec: ExperimentSpec, out_dir: Optional[str]) -> SummaryReport:
    report.verdicts = evaluate_gates(report.metrics, spec.gates)
    summary = _report_path(out_dir, "summary.json")
    if summary is not None:
        report.write_json(summary)
    verdict = "passed" if report.passed else "FAILED ({})".format(
        ', '.join(report.failed_gates()))
    logger.info('Experiment {} ({}) {} in {:.1f} s'.format(spec.name, report.mode, verdict,
                                                          report.runtime))
    for path in report.files:
        logger.info('Wrote {}'.format(path))
    return report


def _workers(workers: Optional[int]) -> int:
    return util.positive_int(workers if workers is not None else CONFIG["Workers"])


def run_convergence(spec: ExperimentSpec,
                    out_dir: Optional[str] = None,
                    workers: Optional[int] = None) -> SummaryReport:
    """Final time error of the multiscale solver over the dt grid, per eps.

    Against a Dormand-Prince reference, or against the same solver at dt/2
    (self-convergence) where the reference is infeasible.
    """
    report = SummaryReport(spec.name, spec.kind, spec.problem)
    modes: list[str] = []
    cells: list[Cell] = []
    plan: list[tuple[tuple[float, ...], str, dict[float, int], Optional[int], Optional[int]]] = []
    solver = _solver_settings(spec)
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        for eps in spec.eps_grid:
            scales = get_problem(spec.problem, eps).scales
            mode = "self-convergence" if spec.reference.method == "self" else "reference"
            step = spec.reference.fixed_step(scales)
            if mode == "reference" and step is not None:
                try:
                    reference_guard(scales, step, spec.t_final)
                except UAConfigurationError as e:
                    if e.cost_estimate is None or not spec.reference.fallback:
                        raise
                    logger.warn('Reference for eps={} is infeasible ({}); switching to '
                                'self-convergence'.format(eps_label(eps), e))
                    mode = "self-convergence"
            modes.append(mode)
            dts = list(spec.dt_grid)
            if mode == "self-convergence":
                dts += [dt / 2 for dt in spec.dt_grid]
            index: dict[float, int] = {}
            for dt in dts:
                if dt not in index:
                    index[dt] = len(cells)
                    cells.append(Cell(spec.problem, eps, "ua", spec.t_final, dt=dt, x0=spec.x0,
                                      solver=solver, registry=_registry_snapshot()))
            ref_index = half_index = None
            if mode == "reference":
                ref_index = len(cells)
                cells.append(Cell(spec.problem, eps, "reference", spec.t_final, x0=spec.x0,
                                  step=step, rtol=spec.reference.rtol,
                                  registry=_registry_snapshot()))
                if spec.reference.validate and step is not None:
                    half_index = len(cells)
                    cells.append(replace(cells[ref_index], step=step / 2, label="reference-half"))
            plan.append((eps, mode, index, ref_index, half_index))
        check_reference_cells(cells)
        results = run_cells(cells, _workers(workers))
    report.runtime = timer.elapsed
    by_dt: dict[float, dict[str, float]] = {}
    for eps, mode, index, ref_index, half_index in plan:
        label = eps_label(eps)
        error_bar = math.nan
        if ref_index is not None and half_index is not None:
            error_bar = error_at_final(results[ref_index], results[half_index])
            report.metrics[metric_name("reference_error_bar", label)] = error_bar
        errors = []
        for dt in spec.dt_grid:
            traj = results[index[dt]]
            other = results[ref_index] if ref_index is not None else results[index[dt / 2]]
            error = error_at_final(traj, other)
            errors.append(error)
            by_dt.setdefault(dt, {})[label] = error
            report.cells.append(
                ErrorReport(spec.problem, "ua", eps, dt, error,
                            wall_clock=traj.meta.get("wall_clock", 0.0),
                            extra=dict(mode=mode, reference_error_bar=error_bar,
                                       max_outer=traj.meta.get("max_outer", 0))))
        report.metrics[metric_name("coarse_error", label)] = errors[int(np.argmax(spec.dt_grid))]
        positive = [(dt, e) for dt, e in zip(spec.dt_grid, errors) if e > 0]
        if len(positive) >= 3:
            slope = float(np.polyfit(np.log([p[0] for p in positive]),
                                     np.log([p[1] for p in positive]), 1)[0])
            report.slopes[label] = slope
            report.metrics[metric_name("slope", label)] = slope
        else:
            logger.debug('No slope for eps={}: fewer than three positive errors'.format(label))
    if len(spec.eps_grid) > 1:
        for dt, errors_at_dt in by_dt.items():
            values = list(errors_at_dt.values())
            report.spread["{:g}".format(dt)] = _ratio(max(values), min(values))
        report.metrics["max_spread"] = max(report.spread.values())
    report.metrics["max_outer"] = float(max(r.meta.get("max_outer", 0) for r in results
                                            if r.method == "ua"))
    report.mode = modes[0] if len(set(modes)) == 1 else "mixed"
    path = _report_path(out_dir, "convergence.csv")
    if path is not None:
        report.files.append(_write_reports(path, report.cells))
    return _finish(report, spec, out_dir)


def _shared_horizon(trajectories: Sequence[Trajectory]) -> float:
    return min(t.final_time for t in trajectories)


def _max_relative_h_error(traj: Trajectory, horizon: float) -> float:
    if traj.failed:
        return math.inf
    series = hamiltonian_error_series(traj)
    return max(rel for t, _, rel in series if t <= horizon + 1e-12)


def run_drift(spec: ExperimentSpec,
              out_dir: Optional[str] = None,
              workers: Optional[int] = None) -> SummaryReport:
    """Hamiltonian error series of every method, without a reference.

    Default methods are the multiscale solver and the direct midpoint
    solve at every dt of the grid; ``options["methods"]`` overrides them.
    """
    entry = PROBLEMS[spec.problem]
    if get_problem(entry.name, spec.eps_grid[0]).invariant is None:
        raise UAConfigurationError('Drift needs a Hamiltonian problem, {} is not'.format(
            spec.problem))
    report = SummaryReport(spec.name, spec.kind, spec.problem, mode="no-reference")
    defaults = [dict(name="ua" if i == 0 else "ua-{:g}".format(dt), method="ua", dt=dt)
                for i, dt in enumerate(spec.dt_grid)]
    defaults += [dict(name="direct" if i == 0 else "direct-{:g}".format(dt), method="direct",
                      dt=dt) for i, dt in enumerate(spec.dt_grid)]
    rows: list[list[Any]] = []
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        plan = [(eps, _method_cells(spec, eps, defaults)) for eps in spec.eps_grid]
        results = run_cells([c for _, cells in plan for c in cells], _workers(workers))
    report.runtime = timer.elapsed
    position = 0
    for eps, cells in plan:
        label = eps_label(eps)
        trajectories = results[position:position + len(cells)]
        position += len(cells)
        horizon = _shared_horizon(trajectories)
        finest = min(range(len(cells)), key=lambda i: cells[i].dt)
        errors: dict[str, float] = {}
        for cell, traj in zip(cells, trajectories):
            series = hamiltonian_error_series(traj)
            errors[cell.name] = _max_relative_h_error(traj, horizon)
            if traj.failed:
                logger.warn('{} run at eps={} failed at step {}'.format(
                    cell.name, label, traj.meta.get("failed_step")))
            rows += [[label, cell.name, cell.dt, t, a, r] for t, a, r in series]
            final_gap = error_at_final(_truncate(traj, horizon),
                                       _truncate(trajectories[finest], horizon))
            report.cells.append(
                ErrorReport(spec.problem, cell.name, eps, cell.dt, final_gap,
                            wall_clock=traj.meta.get("wall_clock", 0.0),
                            hamiltonian_error_series=series,
                            extra=dict(max_rel_h_error=errors[cell.name], horizon=horizon,
                                       failed=traj.failed)))
            report.metrics[metric_name("max_rel_error", cell.name if len(plan) == 1 else
                                       "{},{}".format(cell.name, label))] = errors[cell.name]
        ua = errors.get("ua")
        suffix = "" if len(plan) == 1 else "[{}]".format(label)
        if ua is not None and "direct" in errors:
            report.metrics["direct_over_ua" + suffix] = _ratio(errors["direct"], ua)
        if ua is not None and "direct-fine" in errors:
            report.metrics["ua_over_fine" + suffix] = _ratio(ua, errors["direct-fine"])
    path = _report_path(out_dir, "drift.csv")
    if path is not None:
        report.files.append(
            _write_rows(path, ["eps", "method", "dt", "t", "abs_h_error", "rel_h_error"], rows))
    return _finish(report, spec, out_dir)


def _truncate(traj: Trajectory, horizon: float) -> Trajectory:
    keep = traj.times <= horizon + 1e-12
    return Trajectory(traj.times[keep], traj.y[keep], traj.x[keep], method=traj.method,
                      config=traj.config)


def _deviation(traj: Trajectory, ref: Trajectory) -> np.ndarray:
    """Per-component max |x - x_ref| over the nodes of traj."""
    ref_x = np.column_stack(
        [np.interp(traj.times, ref.times, ref.x[:, i]) for i in range(ref.d)])
    return np.max(np.abs(traj.x - ref_x), axis=0)


def run_compare_averaged(spec: ExperimentSpec,
                         out_dir: Optional[str] = None,
                         workers: Optional[int] = None) -> SummaryReport:
    """Component deviations of the multiscale, averaged and direct solves.

    The reference step is aligned with the coarse grid so the reference is
    stored exactly on the method nodes.
    """
    eps = spec.eps_grid[0]
    dt = spec.dt_grid[0]
    report = SummaryReport(spec.name, spec.kind, spec.problem)
    scales = get_problem(spec.problem, eps).scales
    step = spec.reference.fixed_step(scales)
    if step is None:
        raise UAConfigurationError('compare-averaged needs a fixed step rk45 reference')
    step, per = aligned_step(step, dt)
    defaults = [dict(name=m, method=m, dt=dt) for m in ("ua", "averaged", "direct")]
    cells = _method_cells(spec, eps, defaults)
    cells.append(Cell(spec.problem, eps, "reference", spec.t_final, x0=spec.x0, step=step,
                      store_every=per, registry=_registry_snapshot()))
    check_reference_cells(cells)
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        results = run_cells(cells, _workers(workers))
    report.runtime = timer.elapsed
    ref = results[-1]
    d = ref.d
    components = [int(c) for c in spec.options.get("components", range(1, d + 1))]
    deviations: dict[str, np.ndarray] = {}
    rows: list[list[Any]] = []
    for cell, traj in zip(cells, results):
        rows += [[cell.name, t] + [float(v) for v in x] for t, x in zip(traj.times, traj.x)]
        if cell.method == "reference":
            continue
        deviations[cell.name] = _deviation(traj, ref)
        report.cells.append(
            ErrorReport(spec.problem, cell.name, eps, cell.dt, error_at_final(traj, ref),
                        wall_clock=traj.meta.get("wall_clock", 0.0),
                        extra={"linf_w{}".format(c): float(deviations[cell.name][c - 1])
                               for c in components}))
        for c in components:
            report.metrics[metric_name("linf", "{},w{}".format(cell.name, c))] = float(
                deviations[cell.name][c - 1])
    if "ua" in deviations and "averaged" in deviations:
        for c in components:
            ua, averaged = deviations["ua"][c - 1], deviations["averaged"][c - 1]
            report.metrics[metric_name("averaged_over_ua", "w{}".format(c))] = _ratio(
                averaged, ua)
            report.metrics[metric_name("deviation_ratio", "w{}".format(c))] = _ratio(
                max(ua, averaged), min(ua, averaged))
    path = _report_path(out_dir, "compare.csv")
    if path is not None:
        report.files.append(
            _write_rows(path, ["method", "t"] + ["x_{}".format(i + 1) for i in range(d)], rows))
    return _finish(report, spec, out_dir)


def run_recover_window(spec: ExperimentSpec,
                       out_dir: Optional[str] = None,
                       workers: Optional[int] = None) -> SummaryReport:
    """Fine solution on a short window recovered from the coarse slow solution.

    It is compared with a reference restarted from the reference state at
    the window start, stepping in line with the window samples.
    """
    eps = spec.eps_grid[0]
    t_a, t_b = (float(v) for v in spec.options.get("window", (0.5, 0.501)))
    samples = util.positive_int(spec.options.get("samples", 200))
    report = SummaryReport(spec.name, spec.kind, spec.problem)
    problem = get_problem(spec.problem, eps)
    step = spec.reference.fixed_step(problem.scales)
    if step is None:
        raise UAConfigurationError('recover-window needs a fixed step rk45 reference')
    ua_cell = Cell(spec.problem, eps, "ua", spec.t_final, dt=spec.dt_grid[0], x0=spec.x0,
                   solver=_solver_settings(spec), registry=_registry_snapshot())
    full = Cell(spec.problem, eps, "reference", spec.t_final, x0=spec.x0, step=step,
                registry=_registry_snapshot())
    lead = replace(full, t_final=t_a, label="reference-lead")
    cells = [ua_cell, full, lead] if t_a > 0 else [ua_cell, full]
    check_reference_cells(cells)
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        results = run_cells(cells, _workers(workers))
        traj, ref = results[0], results[1]
        start = results[2].final_state if t_a > 0 else util.as_state(
            spec.x0 if spec.x0 is not None else problem.x0)
        cfg = SolverConfig(dt=ua_cell.dt, t_final=spec.t_final, **dict(ua_cell.solver))
        window = recover_window(problem.decompose(cfg), problem.scales, traj, t_a, t_b, samples,
                                cfg)
        if samples > 1 and t_b > t_a:
            fine_step, per = aligned_step(step, (t_b - t_a) / (samples - 1))
            window_cell = Cell(spec.problem, eps, "reference", t_b, x0=tuple(start),
                               step=fine_step, t0=t_a, store_every=per,
                               registry=_registry_snapshot())
            check_reference_cells([window_cell])
            window_ref = run_cell(window_cell).x
        else:
            window_ref = start.reshape(1, -1)
    report.runtime = timer.elapsed
    gap = float(np.max(np.abs(window.x - window_ref)) / max(np.max(np.abs(window_ref)), 1e-300))
    final_error = error_at_final(traj, ref)
    report.metrics["window_gap"] = gap
    report.metrics["final_relative_error"] = final_error / max(
        float(np.linalg.norm(ref.final_state)), 1e-300)
    report.cells.append(
        ErrorReport(spec.problem, "ua", eps, ua_cell.dt, final_error,
                    wall_clock=traj.meta.get("wall_clock", 0.0),
                    extra=dict(window_gap=gap, window="{:g},{:g}".format(t_a, t_b))))
    path = _report_path(out_dir, "window.csv")
    if path is not None:
        report.files.append(window.to_csv(path, reference=window_ref))
        report.files.append(traj.to_csv(_report_path(out_dir, "trajectory.csv") or ""))
    return _finish(report, spec, out_dir)


def run_timing(spec: ExperimentSpec,
               out_dir: Optional[str] = None,
               workers: Optional[int] = None) -> SummaryReport:
    """Wall clock of the coarse multiscale solve against the baseline method.

    Cells run one after the other in this process so the clocks compare.
    """
    eps = spec.eps_grid[0]
    report = SummaryReport(spec.name, spec.kind, spec.problem, mode="timing")
    baseline = str(spec.options.get("baseline", "direct-fine"))
    defaults = [dict(name="ua", method="ua", dt=spec.dt_grid[0]),
                dict(name="direct-fine", method="direct", dt=spec.dt_grid[-1])]
    cells = _method_cells(spec, eps, defaults)
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        results = run_cells(cells, 1)
    report.runtime = timer.elapsed
    clocks: dict[str, float] = {}
    rows = []
    for cell, traj in zip(cells, results):
        clocks[cell.name] = float(traj.meta.get("wall_clock", 0.0))
        report.metrics[metric_name("wall_clock", cell.name)] = clocks[cell.name]
        rows.append([cell.name, cell.method, cell.dt, traj.meta.get("steps"), clocks[cell.name]])
        report.cells.append(
            ErrorReport(spec.problem, cell.name, eps, cell.dt, 0.0, wall_clock=clocks[cell.name],
                        extra=dict(steps=traj.meta.get("steps"))))
    if "ua" in clocks and baseline in clocks:
        report.metrics["speedup"] = _ratio(clocks[baseline], clocks["ua"])
    if workers is not None and workers > 1:
        logger.debug('Timing cells always run sequentially')
    path = _report_path(out_dir, "timing.csv")
    if path is not None:
        report.files.append(
            _write_rows(path, ["method", "kind", "dt", "steps", "wall_clock_s"], rows))
    return _finish(report, spec, out_dir)


def run_diagnostics(spec: ExperimentSpec,
                    out_dir: Optional[str] = None,
                    workers: Optional[int] = None) -> SummaryReport:
    """Map quantities on a grid of the two finest phases, per eps.

    Metrics are the dependence of T_1 on the finest phase, the dependence
    of the ``options["slow_components"]`` of T_2 on it and the spread of
    max |f - D_1| across the eps grid.
    """
    resolution = util.positive_int(spec.options.get("resolution", 32))
    y = spec.options.get("y", 0.2)
    slow = [int(c) for c in spec.options.get("slow_components", ())]
    report = SummaryReport(spec.name, spec.kind, spec.problem, mode="diagnostics")
    rows: list[list[Any]] = []
    magnitudes = []
    with MEAS.measure('experiment {}'.format(spec.name)) as timer:
        for eps in spec.eps_grid:
            problem = get_problem(spec.problem, eps)
            cfg = SolverConfig.from_config(spec.dt_grid[0], spec.t_final,
                                           **spec.options.get("solver", {}))
            state = np.full(problem.d, float(y)) if np.isscalar(y) else util.as_state(y)
            grid = map_diagnostics(problem.decompose(cfg), problem.scales, state, resolution, cfg)
            label = eps_label(eps)
            report.metrics[metric_name("t1_fine_dependence", label)] = \
                grid.fine_phase_dependence(1)
            if slow:
                report.metrics[metric_name("t2_slow_dependence", label)] = \
                    grid.fine_phase_dependence(2, slow)
            report.metrics[metric_name("max_outer", label)] = float(np.max(grid.iterations))
            ranges = grid.ranges()
            magnitudes.append(ranges["f_minus_d1"][1])
            report.cells.append(
                ErrorReport(spec.problem, "diagnostics", eps, 0.0, 0.0,
                            extra={"{}_max".format(k): v[1] for k, v in ranges.items()}))
            for i, coarse in enumerate(grid.grid):
                for j, fine in enumerate(grid.grid):
                    rows.append(list(eps) + [float(coarse), float(fine)] +
                                list(grid.f_minus_d1[i, j]) + list(grid.p_minus_y[i, j]) +
                                [float(v) for k in range(grid.T.shape[0])
                                 for v in grid.T[k, i, j]])
    report.runtime = timer.elapsed
    if len(magnitudes) > 1:
        report.metrics["magnitude_spread"] = _ratio(max(magnitudes), min(magnitudes))
    if workers is not None and workers > 1:
        logger.debug('Diagnostics grids run in this process')
    path = _report_path(out_dir, "diagnostics.csv")
    if path is not None and rows:
        n, d = len(spec.eps_grid[0]), get_problem(spec.problem, spec.eps_grid[0]).d
        header = ["eps{}".format(k + 1) for k in range(n)] + ["theta_coarse", "theta_fine"]
        header += ["f_minus_d1_{}".format(i + 1) for i in range(d)]
        header += ["p_minus_y_{}".format(i + 1) for i in range(d)]
        header += ["T{}_{}".format(k + 1, i + 1) for k in range(n) for i in range(d)]
        report.files.append(_write_rows(path, header, rows))
    return _finish(report, spec, out_dir)


RUNNERS: dict[str, Callable[..., SummaryReport]] = {
    "convergence": run_convergence,
    "drift": run_drift,
    "compare-averaged": run_compare_averaged,
    "recover-window": run_recover_window,
    "diagnostics": run_diagnostics,
    "timing": run_timing,
}


def run_experiment(spec: ExperimentSpec,
                   out_dir: Optional[str] = None,
                   workers: Optional[int] = None) -> SummaryReport:
    """Runs ``spec`` with the runner of its kind; files go to out_dir or spec.output."""
    logger.info('Running experiment {} ({}, problem {})'.format(spec.name, spec.kind,
                                                                spec.problem))
    return RUNNERS[spec.kind](spec, out_dir or spec.output, workers)


def run_solve(problem_name: str,
              eps: Optional[Sequence[float]],
              dt: float,
              t_final: float,
              method: str = "ua",
              x0: Optional[Sequence[float]] = None,
              out: Optional[str] = None,
              **solver: Any) -> Trajectory:
    """Single solve of a registered problem; writes the trajectory CSV to ``out``."""
    problem = get_problem(problem_name, eps)
    values = _solver_values(solver)
    cell = Cell(problem.name, problem.scales.eps, method, t_final, dt=dt,
                x0=None if x0 is None else tuple(util.parse_floats(x0)), solver=values,
                step=dt if method == "reference" else None, registry=_registry_snapshot())
    check_reference_cells([cell])
    traj = run_cell(cell)
    if out is not None:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        traj.to_csv(out, invariant_name="hamiltonian")
    return traj

