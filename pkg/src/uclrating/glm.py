"""Binary and multinomial logistic regression by maximum likelihood.

Binary models are fitted by iteratively reweighted least squares; multinomial
models by a full Newton iteration on the stacked coefficient vector with the
reference category's linear predictor fixed at zero.  Both use step halving
whenever a step would lower the log-likelihood.

Goodness-of-fit measures use the null (intercept-only) log-likelihood
``ln L0`` and the fitted one ``ln LM``:

* Cox & Snell: ``1 - exp(2 (ln L0 - ln LM) / n)``
* Nagelkerke: Cox & Snell divided by its maximum ``1 - exp(2 ln L0 / n)``
* McFadden: ``1 - ln LM / ln L0``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateOutcomeError,
    RankError,
    SeparationError,
    UndefinedValueError,
)

GRADIENT_TOL = 1e-8
DECREMENT_TOL = 1e-12
MAX_ITER = 100
SEPARATION_BOUND = 50.0
INTERCEPT = "const"


@dataclass(frozen=True)
class DesignMatrix:
    """Intercept plus named real features, and the observed outcomes.

    For multinomial designs ``categories`` lists every outcome level and
    ``reference`` names the baseline; binary designs carry 0/1 outcomes.
    """

    features: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    categories: tuple[Hashable, ...] | None = None
    reference: Hashable | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "y", np.asarray(self.y))
        if X.shape[1] != len(self.feature_names):
            raise ValueError("feature names do not match the number of columns")
        if X.shape[0] != len(self.y):
            raise ValueError("features and outcomes differ in length")
        if not np.all(np.isfinite(X)):
            raise ValueError("design contains non-finite entries")
        if X.shape[0] < X.shape[1] + 1:
            raise ValueError(f"{X.shape[0]} observations cannot identify {X.shape[1] + 1} coefficients")
        if self.categories is not None:
            if self.reference not in self.categories:
                raise ValueError(f"reference {self.reference!r} not among categories")
            unknown = set(self.y.tolist()) - set(self.categories)
            if unknown:
                raise ValueError(f"outcomes {sorted(map(str, unknown))} not among categories")

    @classmethod
    def from_columns(
        cls,
        columns: Mapping[str, Sequence[float]],
        y: Sequence,
        categories: Sequence[Hashable] | None = None,
        reference: Hashable | None = None,
    ) -> "DesignMatrix":
        names = tuple(columns)
        X = np.column_stack([np.asarray(columns[k], dtype=float) for k in names]) if names else np.empty((len(y), 0))
        cats = tuple(categories) if categories is not None else None
        return cls(X, np.asarray(y), names, cats, reference)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack([np.ones(self.n), self.features])

    @property
    def names(self) -> tuple[str, ...]:
        return (INTERCEPT,) + self.feature_names

    def binary_y(self) -> np.ndarray:
        y = self.y.astype(float)
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("binary outcomes must be 0 or 1")
        return y

    def scaled(self, feature: str, factor: float) -> "DesignMatrix":
        X = self.features.copy()
        X[:, self.feature_names.index(feature)] *= factor
        return DesignMatrix(X, self.y, self.feature_names, self.categories, self.reference)


@dataclass(frozen=True)
class RegressionModel:
    """A fitted model.

    ``params`` has one row per non-reference outcome (a single row for
    binary models) and one column per entry of ``feature_names``;
    ``cov`` is the inverse information matrix of the row-major flattening.
    """

    feature_names: tuple[str, ...]
    params: np.ndarray
    cov: np.ndarray
    log_lik_null: float
    log_lik_fit: float
    n: int
    categories: tuple[Hashable, ...] | None = None
    reference: Hashable | None = None
    iterations: int = 0

    @property
    def is_multinomial(self) -> bool:
        return self.categories is not None

    @property
    def outcomes(self) -> tuple[Hashable, ...]:
        """Labels of the rows of ``params``."""
        if self.categories is None:
            return (1,)
        return tuple(c for c in self.categories if c != self.reference)

    @property
    def std_error_array(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov)).reshape(self.params.shape)

    def _by_name(self, values: np.ndarray):
        rows = [dict(zip(self.feature_names, map(float, row))) for row in values]
        if not self.is_multinomial:
            return rows[0]
        return {cat: row for cat, row in zip(self.outcomes, rows)}

    @property
    def coefficients(self):
        return self._by_name(self.params)

    @property
    def std_errors(self):
        return self._by_name(self.std_error_array)

    @property
    def p_value_array(self) -> np.ndarray:
        z = np.abs(self.params / self.std_error_array)
        return np.vectorize(lambda v: math.erfc(v / math.sqrt(2.0)))(z)

    @property
    def p_values(self):
        return self._by_name(self.p_value_array)

    def linear_predictor(self, X: np.ndarray) -> np.ndarray:
        return X @ self.params.T

    def predict_proba(self, design: DesignMatrix | np.ndarray) -> np.ndarray:
        """Event probability (binary) or one column per category, in ``categories`` order."""
        X = design.matrix if isinstance(design, DesignMatrix) else np.asarray(design, dtype=float)
        eta = self.linear_predictor(X)
        if not self.is_multinomial:
            return _expit(eta[:, 0])
        probs = _softmax_with_reference(eta)
        ref = self.categories.index(self.reference)
        order = [c for c in self.categories if c != self.reference]
        out = np.empty((X.shape[0], len(self.categories)))
        out[:, ref] = probs[:, 0]
        for j, cat in enumerate(order):
            out[:, self.categories.index(cat)] = probs[:, j + 1]
        return out


def _expit(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _softmax_with_reference(eta: np.ndarray) -> np.ndarray:
    """Columns: reference first, then the rows of ``eta``'s columns."""
    full = np.column_stack([np.zeros(eta.shape[0]), eta])
    full -= full.max(axis=1, keepdims=True)
    e = np.exp(full)
    return e / e.sum(axis=1, keepdims=True)


def _binary_loglik(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _multinomial_loglik(X: np.ndarray, Y: np.ndarray, B: np.ndarray) -> float:
    eta = X @ B.T
    full = np.column_stack([np.zeros(X.shape[0]), eta])
    lse = np.logaddexp.reduce(full, axis=1)
    return float(np.sum((Y * eta).sum(axis=1) - lse))


def null_log_likelihood(counts: Sequence[int]) -> float:
    """Maximised log-likelihood of the intercept-only model."""
    n = sum(counts)
    return float(sum(c * math.log(c / n) for c in counts if c > 0))


def _check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        for j in range(X.shape[1] - 1, 0, -1):
            if np.linalg.matrix_rank(np.delete(X, j, axis=1)) == rank:
                raise RankError(f"column {names[j]!r} is a linear combination of the others", feature=names[j])
        raise RankError("design matrix is rank deficient")


def _feature_scales(X: np.ndarray) -> np.ndarray:
    scales = X.std(axis=0)
    scales[0] = 1.0
    scales[scales == 0] = 1.0
    return scales


def _check_separation(params: np.ndarray, scales: np.ndarray, names: Sequence[str]) -> None:
    effect = np.abs(params) * scales
    if effect.max() > SEPARATION_BOUND:
        # the intercept follows whichever slope diverges, so blame a slope
        slopes = effect[:, 1:] if effect.shape[1] > 1 else effect
        j = int(np.unravel_index(np.argmax(slopes), slopes.shape)[-1]) + (effect.shape[1] > 1)
        raise SeparationError(
            f"coefficients diverge (|{names[j]}| effect {effect.max():.3g}); outcomes are (quasi-)separated by {names[j]!r}",
            feature=names[j],
        )


def fit_logistic(design: DesignMatrix) -> RegressionModel:
    """Binary logit by IRLS."""
    X = design.matrix
    y = design.binary_y()
    n, p = X.shape
    events = int(y.sum())
    if events in (0, n):
        raise DegenerateOutcomeError(f"all {n} outcomes equal {int(y[0]) if n else '?'}; nothing to fit")
    _check_rank(X, design.names)
    scales = _feature_scales(X)
    beta = np.zeros(p)
    ll = _binary_loglik(X, y, beta)
    for it in range(1, MAX_ITER + 1):
        prob = _expit(X @ beta)
        grad = X.T @ (y - prob)
        if np.linalg.norm(grad) < GRADIENT_TOL:
            break
        w = prob * (1.0 - prob)
        eta = X @ beta
        z = eta + (y - prob) / np.maximum(w, 1e-300)
        XtW = X.T * w
        try:
            target = np.linalg.solve(XtW @ X, XtW @ z)
        except np.linalg.LinAlgError:
            raise RankError("information matrix is singular") from None
        step = target - beta
        t, new_ll = 1.0, _binary_loglik(X, y, target)
        while new_ll < ll and t > 1e-10:
            t *= 0.5
            new_ll = _binary_loglik(X, y, beta + t * step)
        if new_ll < ll:
            # no ascent direction left at working precision
            break
        beta = beta + t * step
        improved, ll = new_ll > ll, new_ll
        if improved:
            _check_separation(beta[None, :], scales, design.names)
        if np.max(np.abs(t * step)) <= 1e-15 * (1.0 + np.max(np.abs(beta))):
            break
    else:
        it = MAX_ITER
    prob = _expit(X @ beta)
    grad = X.T @ (y - prob)
    info = (X.T * (prob * (1.0 - prob))) @ X
    _ensure_converged(grad, info, it)
    cov = _invert(info)
    return RegressionModel(
        feature_names=design.names,
        params=beta[None, :].copy(),
        cov=cov,
        log_lik_null=null_log_likelihood([n - events, events]),
        log_lik_fit=_binary_loglik(X, y, beta),
        n=n,
        iterations=it,
    )


def _ensure_converged(grad: np.ndarray, info: np.ndarray, iterations: int) -> None:
    if np.linalg.norm(grad) < GRADIENT_TOL:
        return
    # the gradient may stall just above the tolerance when features are large;
    # accept when the remaining Newton step is negligible
    try:
        step = np.linalg.solve(info, grad)
    except np.linalg.LinAlgError:
        raise RankError("information matrix is singular") from None
    # Newton decrement: the log-likelihood still on the table, scale-free
    if float(grad @ step) < DECREMENT_TOL:
        return
    raise ConvergenceError(f"no convergence after {iterations} iterations (|gradient| {np.linalg.norm(grad):.3g})")


def _invert(info: np.ndarray) -> np.ndarray:
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise RankError("information matrix is singular") from None
    if np.any(np.diag(cov) <= 0) or not np.all(np.isfinite(cov)):
        raise RankError("information matrix is not positive definite")
    return cov


def fit_multinomial(design: DesignMatrix, reference: Hashable | None = None) -> RegressionModel:
    """Multinomial logit against ``reference`` (defaults to ``design.reference``)."""
    if design.categories is None:
        raise ValueError("multinomial fit needs a categorical design")
    reference = design.reference if reference is None else reference
    cats = design.categories
    if reference not in cats:
        raise ValueError(f"reference {reference!r} not among categories")
    if len(cats) < 2:
        raise ValueError("need at least two categories")
    others = [c for c in cats if c != reference]
    X = design.matrix
    n, p = X.shape
    m = len(others)
    labels = design.y.tolist()
    Y = np.column_stack([[lab == c for lab in labels] for c in others]).astype(float)
    counts = [labels.count(c) for c in cats]
    if sum(1 for c in counts if c > 0) < 2:
        raise DegenerateOutcomeError(f"only one outcome category observed among {n} rows")
    _check_rank(X, design.names)
    scales = _feature_scales(X)
    B = np.zeros((m, p))
    ll = _multinomial_loglik(X, Y, B)

    def grad_info(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = _softmax_with_reference(X @ B.T)[:, 1:]
        grad = ((Y - P).T @ X).ravel()
        info = np.empty((m * p, m * p))
        for k in range(m):
            for l in range(m):
                w = P[:, k] * ((k == l) - P[:, l])
                info[k * p:(k + 1) * p, l * p:(l + 1) * p] = (X.T * w) @ X
        return grad, info

    for it in range(1, MAX_ITER + 1):
        grad, info = grad_info(B)
        if np.linalg.norm(grad) < GRADIENT_TOL:
            break
        try:
            step = np.linalg.solve(info, grad).reshape(m, p)
        except np.linalg.LinAlgError:
            raise RankError("information matrix is singular") from None
        t, new_ll = 1.0, _multinomial_loglik(X, Y, B + step)
        while new_ll < ll and t > 1e-10:
            t *= 0.5
            new_ll = _multinomial_loglik(X, Y, B + t * step)
        if new_ll < ll:
            break
        B = B + t * step
        improved, ll = new_ll > ll, new_ll
        if improved:
            _check_separation(B, scales, design.names)
        if np.max(np.abs(t * step)) <= 1e-15 * (1.0 + np.max(np.abs(B))):
            break
    else:
        it = MAX_ITER
    grad, info = grad_info(B)
    _ensure_converged(grad, info, it)
    return RegressionModel(
        feature_names=design.names,
        params=B,
        cov=_invert(info),
        log_lik_null=null_log_likelihood(counts),
        log_lik_fit=_multinomial_loglik(X, Y, B),
        n=n,
        categories=tuple(cats),
        reference=reference,
        iterations=it,
    )


def log_likelihood(model: RegressionModel, design: DesignMatrix, params: np.ndarray | None = None) -> float:
    """Log-likelihood of ``design`` at ``params`` (defaults to the fit)."""
    params = model.params if params is None else np.asarray(params, dtype=float).reshape(model.params.shape)
    X = design.matrix
    if not model.is_multinomial:
        return _binary_loglik(X, design.binary_y(), params[0])
    labels = design.y.tolist()
    Y = np.column_stack([[lab == c for lab in labels] for c in model.outcomes]).astype(float)
    return _multinomial_loglik(X, Y, params)


# --------------------------------------------------------------------- metrics


def cox_snell_upper_bound(model: RegressionModel) -> float:
    return 1.0 - math.exp(2.0 * model.log_lik_null / model.n)


def cox_snell_r2(model: RegressionModel) -> float:
    return 1.0 - math.exp(2.0 * (model.log_lik_null - model.log_lik_fit) / model.n)


def nagelkerke_r2(model: RegressionModel) -> float:
    bound = cox_snell_upper_bound(model)
    if bound <= 0.0:
        raise UndefinedValueError("Nagelkerke R2 undefined for a single-outcome sample")
    return cox_snell_r2(model) / bound


def mcfadden_r2(model: RegressionModel) -> float:
    if model.log_lik_null == 0.0:
        raise UndefinedValueError("McFadden R2 undefined when ln L0 = 0")
    return 1.0 - model.log_lik_fit / model.log_lik_null


def classification_rate(model: RegressionModel, design: DesignMatrix, cut: float = 0.5) -> float:
    """Percentage of rows classified correctly.

    Binary: positive when the fitted probability is at least ``cut``.
    Multinomial: the most probable category.
    """
    probs = model.predict_proba(design)
    if not model.is_multinomial:
        hits = (probs >= cut) == (design.binary_y() == 1)
    else:
        predicted = np.asarray(model.categories, dtype=object)[np.argmax(probs, axis=1)]
        hits = predicted == np.asarray(design.y.tolist(), dtype=object)
    return 100.0 * float(np.mean(hits))


def roc_auc(scores: Sequence[float], labels: Sequence) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic, ties counting 1/2.

    Computed with integer doubled ranks so the value is the exact ratio
    ``(2 * concordant + ties) / (2 * n_pos * n_neg)``.
    """
    s = np.asarray(scores, dtype=float)
    lab = np.asarray(labels).astype(bool)
    if s.shape != lab.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(lab.sum())
    n_neg = lab.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedValueError("AUC needs at least one positive and one negative label")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    # doubled average rank of a tie block spanning positions i..j (1-based) is i + j
    boundaries = np.flatnonzero(np.diff(sorted_s)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [s.size]))
    doubled = np.empty(s.size, dtype=np.int64)
    for a, b in zip(starts, ends):
        doubled[a:b] = (a + 1) + b
    ranks2 = np.empty(s.size, dtype=np.int64)
    ranks2[order] = doubled
    u2 = int(ranks2[lab].sum()) - n_pos * (n_pos + 1)
    return u2 / (2 * n_pos * n_neg)


def model_auc(model: RegressionModel, design: DesignMatrix) -> float | dict:
    """Binary AUC, or one-vs-rest AUC per category for multinomial models."""
    if not model.is_multinomial:
        # the linear predictor ranks like the probability but never saturates
        return roc_auc(model.linear_predictor(design.matrix)[:, 0], design.binary_y())
    probs = model.predict_proba(design)
    labels = design.y.tolist()
    out = {}
    for j, cat in enumerate(model.categories):
        out[cat] = roc_auc(probs[:, j], [lab == cat for lab in labels])
    return out


def stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def model_report(model: RegressionModel, design: DesignMatrix) -> dict:
    """JSON-ready summary: coefficients, std errors, stars and every fit metric."""
    pv = model.p_value_array
    se = model.std_error_array
    rows = []
    for i, outcome in enumerate(model.outcomes):
        for j, name in enumerate(model.feature_names):
            rows.append({
                "outcome": outcome if model.is_multinomial else None,
                "feature": name,
                "coef": float(model.params[i, j]),
                "std_error": float(se[i, j]),
                "p_value": float(pv[i, j]),
                "stars": stars(float(pv[i, j])),
            })
    auc = model_auc(model, design)
    report = {
        "kind": "multinomial" if model.is_multinomial else "binary",
        "coefficients": rows,
        "n": model.n,
        "log_lik_null": model.log_lik_null,
        "log_lik_fit": model.log_lik_fit,
        "cox_snell_r2": cox_snell_r2(model),
        "nagelkerke_r2": nagelkerke_r2(model),
        "mcfadden_r2": mcfadden_r2(model),
        "classification_rate": classification_rate(model, design),
        "auc": {str(k): v for k, v in auc.items()} if isinstance(auc, dict) else auc,
        "iterations": model.iterations,
    }
    if model.is_multinomial:
        report["categories"] = [str(c) for c in model.categories]
        report["reference"] = str(model.reference)
    return report
