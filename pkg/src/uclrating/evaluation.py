"""Experiment suite: naive baselines and the three nested logit models.

Model ``(1)`` uses the coefficient difference, ``(2)`` the Elo difference and
``(3)`` both.  Group-match outcomes with draws kept are fitted as a
multinomial logit against away wins; every other family is binary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .data_ingest import (
    TRINOMIAL_CATEGORIES,
    Observation,
    SampleTag,
    descriptive_stats,
    fingerprint,
    split_periods,
)
from .errors import EmptyInputError, FitError, UndefinedValueError
from .glm import DesignMatrix, fit_logistic, fit_multinomial, model_report

MODELS = {
    "(1)": ("delta_uefa",),
    "(2)": ("delta_elo",),
    "(3)": ("delta_uefa", "delta_elo"),
}
FEATURE_LABELS = {"delta_uefa": "UEFA coefficient", "delta_elo": "Elo rating", "const": "Constant"}
PERIODS = ("all", "early", "late")
FLOAT_DIGITS = 10
REFERENCE = "away"


def naive_accuracy(sample: Sequence[Observation], rating_kind: str) -> float:
    """Percentage of rows where a non-negative difference goes with ``y = 1``."""
    if rating_kind not in ("uefa", "elo"):
        raise ValueError(f"rating_kind must be 'uefa' or 'elo', got {rating_kind!r}")
    if not sample:
        raise EmptyInputError("naive accuracy of an empty sample")
    hits = 0
    for o in sample:
        if o.y not in (0, 1):
            raise ValueError(f"naive accuracy needs binary outcomes, got {o.y!r}")
        delta = o.delta_uefa if rating_kind == "uefa" else o.delta_elo
        hits += (delta >= 0) == (o.y == 1)
    return 100.0 * hits / len(sample)


@dataclass(frozen=True)
class SuiteSpec:
    family: SampleTag
    period: str = "all"

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", SampleTag(self.family))
        if self.period not in PERIODS:
            raise ValueError(f"period must be one of {PERIODS}, got {self.period!r}")

    @property
    def multinomial(self) -> bool:
        return self.family is SampleTag.GROUP_MATCH_TRINOMIAL


def _restrict(sample: Sequence[Observation], period: str) -> list[Observation]:
    if period == "all":
        return list(sample)
    early, late = split_periods(sample)
    return early if period == "early" else late


def design_for(sample: Sequence[Observation], features: Sequence[str], multinomial: bool) -> DesignMatrix:
    columns = {f: [getattr(o, f) for o in sample] for f in features}
    y = [o.y for o in sample]
    if multinomial:
        return DesignMatrix.from_columns(columns, y, TRINOMIAL_CATEGORIES, REFERENCE)
    return DesignMatrix.from_columns(columns, y)


@dataclass(frozen=True)
class SuiteReport:
    family: str
    period: str
    n: int
    data: dict
    naive: dict = field(default_factory=dict)
    descriptive: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict)
    skipped: str | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return _rounded({
            "family": self.family,
            "period": self.period,
            "n": self.n,
            "data": self.data,
            "naive_accuracy": self.naive,
            "descriptive": self.descriptive,
            "models": self.models,
            "skipped": self.skipped,
            "notes": list(self.notes),
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _rounded(value):
    """Floats cut to ``FLOAT_DIGITS`` significant digits so reports are stable bytes."""
    if isinstance(value, float):
        return float(f"{value:.{FLOAT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    return value


def _notes(period: str) -> tuple[str, ...]:
    if period == "late":
        return ("2020/21 excluded from the late period",)
    return ()


def run_suite(samples: Mapping[SampleTag | str, Sequence[Observation]], spec: SuiteSpec) -> SuiteReport:
    """Fit models (1), (2) and (3) on one sample family and period."""
    try:
        sample = samples[spec.family]
    except KeyError:
        sample = samples[spec.family.value]
    rows = _restrict(sample, spec.period)
    base = dict(family=spec.family.value, period=spec.period, n=len(rows), data=fingerprint(rows), notes=_notes(spec.period))
    if not rows:
        return SuiteReport(**base, skipped="no observations")
    naive = {}
    if not spec.multinomial:
        naive = {"uefa": naive_accuracy(rows, "uefa"), "elo": naive_accuracy(rows, "elo")}
    descriptive = {f: descriptive_stats([getattr(o, f) for o in rows]) for f in ("delta_uefa", "delta_elo")}
    models = {}
    for model_id, features in MODELS.items():
        design = design_for(rows, features, spec.multinomial)
        try:
            model = fit_multinomial(design) if spec.multinomial else fit_logistic(design)
            models[model_id] = model_report(model, design)
        except FitError as exc:
            raise exc.annotated(model_id) from exc
        except UndefinedValueError as exc:
            raise UndefinedValueError(f"model {model_id}: {exc}") from exc
    return SuiteReport(**base, naive=naive, descriptive=descriptive, models=models)


def period_report(
    samples: Mapping[SampleTag | str, Sequence[Observation]], family: SampleTag | str
) -> tuple[SuiteReport, SuiteReport]:
    """Early (2003/04-2011/12) and late (2012/13-2021/22 minus 2020/21) suites.

    A half that is empty or cannot be fitted is returned as skipped.
    """
    out = []
    for period in ("early", "late"):
        spec = SuiteSpec(family, period)
        try:
            out.append(run_suite(samples, spec))
        except (FitError, UndefinedValueError) as exc:
            rows = _restrict(samples.get(spec.family, samples.get(spec.family.value, [])), period)
            out.append(SuiteReport(spec.family.value, period, len(rows), fingerprint(rows),
                                   skipped=str(exc), notes=_notes(period)))
    return out[0], out[1]


def write_report(reports: Sequence[SuiteReport], path: str | Path) -> None:
    payload = {"suites": [r.to_dict() for r in reports]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ text


def _fmt(value, digits: int = 3) -> str:
    if value is None:
        return ""
    return f"{value:.{digits}f}"


def render_text(report: Mapping) -> str:
    """Plain-text table for one suite dict, models as columns."""
    ids = list(MODELS)
    title = f"{report['family']} / {report['period']}  (n = {report['n']})"
    lines = [title, "=" * len(title)]
    if report.get("skipped"):
        lines.append(f"skipped: {report['skipped']}")
        lines.extend(f"note: {n}" for n in report.get("notes", []))
        return "\n".join(lines) + "\n"
    naive = report.get("naive_accuracy") or {}
    if naive:
        lines.append(f"naive accuracy  UEFA {naive['uefa']:.1f}%  Elo {naive['elo']:.1f}%")
    models = report["models"]
    width = 16
    lines.append(f"{'':<24}" + "".join(f"{i:>{width}}" for i in ids))
    outcomes = sorted({row["outcome"] for m in models.values() for row in m["coefficients"]}, key=str)
    for outcome in outcomes:
        if outcome is not None:
            lines.append(f"[{outcome} vs {REFERENCE}]")
        for feature in ("delta_uefa", "delta_elo", "const"):
            coef_cells, se_cells = [], []
            for i in ids:
                row = next((r for r in models[i]["coefficients"]
                            if r["feature"] == feature and r["outcome"] == outcome), None)
                coef_cells.append("" if row is None else f"{row['coef']:.3f}{row['stars']}")
                se_cells.append("" if row is None else f"({row['std_error']:.3f})")
            if not any(coef_cells):
                continue
            lines.append(f"{FEATURE_LABELS[feature]:<24}" + "".join(f"{c:>{width}}" for c in coef_cells))
            lines.append(f"{'':<24}" + "".join(f"{c:>{width}}" for c in se_cells))

    def metric_row(label: str, get) -> None:
        lines.append(f"{label:<24}" + "".join(f"{get(models[i]):>{width}}" for i in ids))

    metric_row("Observations", lambda m: str(m["n"]))
    metric_row("Log-likelihood", lambda m: _fmt(m["log_lik_fit"]))
    metric_row("Cox & Snell R2", lambda m: _fmt(m["cox_snell_r2"]))
    metric_row("Nagelkerke R2", lambda m: _fmt(m["nagelkerke_r2"]))
    metric_row("McFadden R2", lambda m: _fmt(m["mcfadden_r2"]))
    metric_row("Correct (%)", lambda m: _fmt(m["classification_rate"], 1))
    first = models[ids[0]]["auc"]
    if isinstance(first, dict):
        for cat in first:
            metric_row(f"AUC ({cat})", lambda m, cat=cat: _fmt(m["auc"][cat]))
    else:
        metric_row("AUC", lambda m: _fmt(m["auc"]))
    lines.append("significance: * p<0.05, ** p<0.01, *** p<0.001")
    lines.extend(f"note: {n}" for n in report.get("notes", []))
    return "\n".join(lines) + "\n"


def render_payload(payload: Mapping) -> str:
    """Render every suite of a ``write_report`` payload."""
    suites = payload.get("suites", [payload])
    return "\n".join(render_text(s) for s in suites)
