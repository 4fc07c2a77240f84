"""Agreement analysis, measure selection and ordinal feature ranking.

Missing scores are NaN. Correlations use pairwise deletion; ordinal fits use the
complete cases of one measure at a time.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .errors import (
    AlignmentMismatchError,
    DegenerateSelectionError,
    UndefinedCorrelationError,
    ValidationError,
)
from .transcript_io import ScoreTable, read_score_table  # noqa: F401  (re-exported reader)

log = logging.getLogger(__name__)

STRONG_BAND = 0.7
MODERATE_BAND = 0.6


# --- correlation ----------------------------------------------------------------


def _paired(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"vectors must be 1-d and equally long, got {x.shape} and {y.shape}")
    keep = ~(np.isnan(x) | np.isnan(y))
    return x[keep], y[keep]


def _pearson_complete(x, y) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    r = float(np.dot(xc, yc)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson(x, y, min_pairs: int = 3) -> float:
    x, y = _paired(x, y)
    if len(x) < min_pairs:
        raise UndefinedCorrelationError(f"need at least {min_pairs} complete pairs, have {len(x)}")
    return _pearson_complete(x, y)


def spearman(x, y, min_pairs: int = 3) -> float:
    """Spearman's rho: Pearson correlation of average ranks (ties share the mean rank)."""
    x, y = _paired(x, y)
    if len(x) < min_pairs:
        raise UndefinedCorrelationError(f"need at least {min_pairs} complete pairs, have {len(x)}")
    return _pearson_complete(rankdata(x, method="average"), rankdata(y, method="average"))


def _maybe(fn, *args):
    try:
        return fn(*args)
    except UndefinedCorrelationError:
        return None


@dataclass
class CorrelationResult:
    measure: str
    rho_overall: float | None
    rho_by_subgroup: dict[str, float | None]
    n_pairs: int


@dataclass
class DescriptiveStats:
    measure: str
    mean: float | None
    sd: float | None
    n: int


def descriptive(table: ScoreTable) -> list[DescriptiveStats]:
    """Per-column mean and sample SD over non-missing values."""
    if not table.row_ids:
        raise ValidationError("descriptive statistics need at least one row")
    out = []
    for j, name in enumerate(table.columns):
        col = table.values[:, j]
        col = col[~np.isnan(col)]
        mean = float(col.mean()) if len(col) else None
        sd = float(col.std(ddof=1)) if len(col) > 1 else None
        out.append(DescriptiveStats(name, mean, sd, int(len(col))))
    return out


def _check_aligned(a: ScoreTable, b: ScoreTable):
    if a.row_ids != b.row_ids:
        only = sorted(set(a.row_ids) ^ set(b.row_ids))
        detail = f"unmatched ids: {', '.join(only)}" if only else "rows are in a different order"
        raise AlignmentMismatchError(f"score tables do not share row ids ({detail})")
    if a.columns != b.columns:
        only = sorted(set(a.columns) ^ set(b.columns))
        raise AlignmentMismatchError(f"score tables do not share columns ({', '.join(only) or 'order differs'})")


def align_tables(a: ScoreTable, b: ScoreTable) -> tuple[ScoreTable, ScoreTable]:
    """Reorder ``b`` to ``a``'s rows and columns when they hold the same sets."""
    if set(a.row_ids) != set(b.row_ids) or set(a.columns) != set(b.columns):
        _check_aligned(a, b)
    ridx = [b.row_ids.index(r) for r in a.row_ids]
    cidx = [b.columns.index(c) for c in a.columns]
    return a, ScoreTable(list(a.row_ids), list(a.columns), b.values[np.ix_(ridx, cidx)])


@dataclass
class AgreementReport:
    results: list[CorrelationResult]
    summary: dict
    manual: list[DescriptiveStats] = field(default_factory=list)
    asr: list[DescriptiveStats] = field(default_factory=list)

    def as_dict(self) -> dict:
        manual = {d.measure: d for d in self.manual}
        asr = {d.measure: d for d in self.asr}
        measures = []
        for r in self.results:
            row = {
                "measure": r.measure,
                "rho": r.rho_overall,
                "n_pairs": r.n_pairs,
                "rho_by_subgroup": dict(sorted(r.rho_by_subgroup.items())),
            }
            if r.measure in manual:
                row["manual"] = {"mean": manual[r.measure].mean, "sd": manual[r.measure].sd}
                row["asr"] = {"mean": asr[r.measure].mean, "sd": asr[r.measure].sd}
            measures.append(row)
        return {"summary": self.summary, "measures": measures}

    def long_rows(self) -> list[tuple[str, str, float | None]]:
        """(measure, subgroup, rho) with subgroup ``overall`` first."""
        rows = []
        for r in self.results:
            rows.append((r.measure, "overall", r.rho_overall))
            for g in sorted(r.rho_by_subgroup):
                rows.append((r.measure, g, r.rho_by_subgroup[g]))
        return rows


def summarize_rhos(rhos, strong: float = STRONG_BAND, moderate: float = MODERATE_BAND) -> dict:
    defined = [r for r in rhos if r is not None]
    return {
        "n_measures": len(rhos),
        "n_defined": len(defined),
        "mean_rho": float(np.mean(defined)) if defined else None,
        "sd_rho": float(np.std(defined, ddof=1)) if len(defined) > 1 else None,
        "strong_band": strong,
        "moderate_band": moderate,
        "n_strong": sum(r > strong for r in defined),
        "n_moderate": sum(moderate < r <= strong for r in defined),
        "n_weak": sum(r <= moderate for r in defined),
        "n_undefined": len(rhos) - len(defined),
    }


def agreement_analysis(
    manual: ScoreTable,
    asr: ScoreTable,
    subgroups: dict[str, str] | None = None,
    *,
    strong: float = STRONG_BAND,
    moderate: float = MODERATE_BAND,
) -> AgreementReport:
    """Spearman rho between manual- and ASR-based scores, per measure and subgroup.

    A rho that cannot be computed (constant column, fewer than 3 pairs) is None
    and is left out of the summary mean and SD.
    """
    manual, asr = align_tables(manual, asr)
    groups = {}
    if subgroups:
        for i, rid in enumerate(manual.row_ids):
            groups.setdefault(subgroups.get(rid, ""), []).append(i)
    results = []
    for j, name in enumerate(manual.columns):
        x, y = manual.values[:, j], asr.values[:, j]
        n_pairs = int(np.sum(~(np.isnan(x) | np.isnan(y))))
        by_group = {g: _maybe(spearman, x[idx], y[idx]) for g, idx in groups.items()}
        results.append(CorrelationResult(name, _maybe(spearman, x, y), by_group, n_pairs))
    summary = summarize_rhos([r.rho_overall for r in results], strong, moderate)
    return AgreementReport(results, summary, descriptive(manual), descriptive(asr))


# --- measure selection ------------------------------------------------------------


@dataclass
class SelectionResult:
    removed_nzv: list[str]
    removed_corr: list[str]
    retained: list[str]

    def as_dict(self) -> dict:
        return {"removed_nzv": self.removed_nzv, "removed_corr": self.removed_corr, "retained": self.retained}


def near_zero_variance(col, freq_ratio: float = 19.0, unique_pct: float = 10.0, var_eps: float = 1e-12) -> bool:
    """Quasi-constant column test: dominant value and few distinct values, or ~zero variance."""
    col = np.asarray(col, dtype=float)
    col = col[~np.isnan(col)]
    if len(col) < 2:
        return True
    if float(np.var(col)) < var_eps:
        return True
    counts = Counter(col.tolist()).most_common(2)
    ratio = counts[0][1] / counts[1][1]
    pct_unique = 100.0 * len(set(col.tolist())) / len(col)
    return ratio > freq_ratio and pct_unique < unique_pct


def correlation_matrix(values: np.ndarray) -> np.ndarray:
    """Pairwise-complete Pearson correlations; NaN where undefined."""
    k = values.shape[1]
    out = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            r = _maybe(pearson, values[:, a], values[:, b])
            out[a, b] = out[b, a] = np.nan if r is None else r
    return out


def prune_correlated(corr, names, threshold: float = 0.9) -> tuple[list[str], list[str]]:
    """Repeatedly find the most correlated pair above ``threshold`` and drop the member
    with the larger mean absolute correlation to the other remaining columns.

    Returns (retained, removed) in input order and removal order respectively.
    """
    corr = np.abs(np.asarray(corr, dtype=float))
    names = list(names)
    alive = list(range(len(names)))
    removed = []
    while len(alive) > 1:
        sub = corr[np.ix_(alive, alive)].copy()
        np.fill_diagonal(sub, np.nan)
        masked = np.where(np.isnan(sub), -np.inf, sub)
        a, b = np.unravel_index(int(np.argmax(masked)), masked.shape)
        if not masked[a, b] > threshold:
            break
        mean_abs = np.nanmean(sub, axis=1)
        a, b = sorted((a, b))
        # ties drop the later column
        drop = a if mean_abs[a] > mean_abs[b] else b
        removed.append(names[alive[drop]])
        del alive[drop]
    return [names[i] for i in alive], removed


def select_measures(
    table: ScoreTable,
    r_threshold: float = 0.9,
    *,
    freq_ratio: float = 19.0,
    unique_pct: float = 10.0,
) -> SelectionResult:
    """Drop near-zero-variance columns, then prune highly inter-correlated ones."""
    if len(table.columns) < 2:
        raise ValidationError("selection needs at least 2 columns")
    if len(table.row_ids) < 3:
        raise ValidationError("selection needs at least 3 rows")
    nzv = [
        name for j, name in enumerate(table.columns)
        if near_zero_variance(table.values[:, j], freq_ratio, unique_pct)
    ]
    keep = [c for c in table.columns if c not in nzv]
    if not keep:
        raise DegenerateSelectionError("every column has near-zero variance")
    corr = correlation_matrix(table.select(keep).values)
    retained, removed = prune_correlated(corr, keep, r_threshold)
    return SelectionResult(nzv, removed, retained)


# --- cumulative link model --------------------------------------------------------


@dataclass
class ClmFit:
    """Proportional-odds fit P(Y <= j | x) = logistic(theta_j - beta * z), z standardized."""

    thresholds: tuple[float, ...]
    beta: float
    loglik: float
    converged: bool
    iterations: int
    separated: bool = False
    levels: tuple = ()
    n: int = 0
    loglik_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def fi(self) -> float:
        """Feature importance: sum of absolute thresholds."""
        return float(sum(abs(t) for t in self.thresholds))


def _thresholds_from(a: np.ndarray) -> np.ndarray:
    theta = np.empty_like(a)
    theta[0] = a[0]
    if len(a) > 1:
        theta[1:] = a[0] + np.cumsum(np.exp(a[1:]))
    return theta


def _cdf_parts(eta):
    F = expit(eta)
    f = F * (1.0 - F)
    return F, f, f * (1.0 - 2.0 * F)


def _interval_prob(Fu, Fl, eta_u, eta_l, has_u, has_l):
    """F(u) - F(l), taken on the upper tail where the lower end sits there."""
    P = Fu - Fl
    top = ~has_u & has_l
    P[top] = expit(-eta_l[top])
    both = has_u & has_l & (eta_l > 0)
    P[both] = expit(-eta_l[both]) - expit(-eta_u[both])
    return np.maximum(P, 1e-300)


def clm_loglik_derivatives(theta, beta, z, y, J):
    """Log-likelihood, gradient and Hessian in (beta, theta_1..theta_{J-1}) order."""
    n = len(z)
    has_u = y < J - 1
    has_l = y > 0
    iu = np.where(has_u, y, 0)
    il = np.where(has_l, y - 1, 0)
    eta_u = np.where(has_u, theta[iu] - beta * z, 0.0)
    eta_l = np.where(has_l, theta[il] - beta * z, 0.0)
    Fu, fu, dfu = _cdf_parts(eta_u)
    Fl, fl, dfl = _cdf_parts(eta_l)
    Fu = np.where(has_u, Fu, 1.0)
    fu = np.where(has_u, fu, 0.0)
    dfu = np.where(has_u, dfu, 0.0)
    Fl = np.where(has_l, Fl, 0.0)
    fl = np.where(has_l, fl, 0.0)
    dfl = np.where(has_l, dfl, 0.0)
    P = _interval_prob(Fu, Fl, eta_u, eta_l, has_u, has_l)
    ll = float(np.sum(np.log(P)))

    k = J  # beta + J-1 thresholds
    g = np.zeros(k)
    H = np.zeros((k, k))
    du = fu / P
    dl = fl / P
    g[0] = float(np.sum(-z * (fu - fl) / P))
    np.add.at(g, 1 + iu[has_u], du[has_u])
    np.add.at(g, 1 + il[has_l], -dl[has_l])

    diff = (fu - fl) / P
    H[0, 0] = float(np.sum(z * z * ((dfu - dfl) / P - diff * diff)))
    huu = dfu / P - du * du
    hll = -dfl / P - dl * dl
    hul = du * dl
    hbu = z * (-dfu / P + du * diff)
    hbl = z * (dfl / P - dl * diff)
    np.add.at(H, (1 + iu[has_u], 1 + iu[has_u]), huu[has_u])
    np.add.at(H, (1 + il[has_l], 1 + il[has_l]), hll[has_l])
    both = has_u & has_l
    np.add.at(H, (1 + iu[both], 1 + il[both]), hul[both])
    np.add.at(H, (1 + il[both], 1 + iu[both]), hul[both])
    np.add.at(H, (0, 1 + iu[has_u]), hbu[has_u])
    np.add.at(H, (1 + iu[has_u], 0), hbu[has_u])
    np.add.at(H, (0, 1 + il[has_l]), hbl[has_l])
    np.add.at(H, (1 + il[has_l], 0), hbl[has_l])
    return ll, g, H


def _reparam_derivatives(params, z, y, J):
    """Log-likelihood, gradient, Hessian in (beta, a) with theta = cumsum-exp(a)."""
    beta, a = params[0], params[1:]
    theta = _thresholds_from(a)
    ll, g, H = clm_loglik_derivatives(theta, beta, z, y, J)
    m = J - 1
    jac = np.zeros((J, J))
    jac[0, 0] = 1.0
    jac[1:, 1] = 1.0
    for kk in range(1, m):
        jac[1 + kk:, 1 + kk] = math.exp(a[kk])
    gp = jac.T @ g
    Hp = jac.T @ H @ jac
    g_theta = g[1:]
    for kk in range(1, m):
        Hp[1 + kk, 1 + kk] += math.exp(a[kk]) * float(np.sum(g_theta[kk:]))
    return ll, gp, Hp


def _initial_a(y, J):
    """Thresholds at the logits of the cumulative class proportions."""
    cum = np.cumsum(np.bincount(y, minlength=J))[:-1] / len(y)
    theta = np.log(cum / (1.0 - cum))
    a = np.empty(J - 1)
    a[0] = theta[0]
    a[1:] = np.log(np.diff(theta))
    return a


def _completely_separated(z, y, J) -> bool:
    lo = [z[y == k].min() for k in range(J)]
    hi = [z[y == k].max() for k in range(J)]
    up = all(hi[k] < lo[k + 1] for k in range(J - 1))
    down = all(lo[k] > hi[k + 1] for k in range(J - 1))
    return up or down


def standardize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    sd = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    if not sd > 0:
        raise ValidationError("cannot standardize a constant predictor")
    return (x - x.mean()) / sd


def fit_clm(
    x,
    y,
    *,
    fix_beta_zero: bool = False,
    max_iter: int = 100,
    tol: float = 1e-8,
    beta_cap: float = 30.0,
) -> ClmFit:
    """Fit the proportional-odds model by damped Newton iterations.

    ``x`` is z-scored first. Thresholds are kept ordered by optimizing
    theta_1 and the log-gaps between consecutive thresholds. A step is halved
    until the log-likelihood does not decrease. With ``fix_beta_zero`` only the
    thresholds are fitted.

    Under complete separation the slope diverges: the fit stops once
    ``|beta| > beta_cap``, clamps beta to the cap and reports
    ``converged=False, separated=True``.
    """
    y_raw = np.asarray(y)
    levels, y_idx = np.unique(y_raw, return_inverse=True)
    J = len(levels)
    if J < 2:
        raise ValidationError("ordinal regression needs at least two outcome classes")
    x = np.asarray(x, dtype=float)
    if len(x) != len(y_idx):
        raise ValidationError("predictor and labels differ in length")
    z = np.zeros_like(x) if fix_beta_zero and np.ptp(x) == 0 else standardize(x)
    y_idx = y_idx.astype(int)

    separated = (not fix_beta_zero) and _completely_separated(z, y_idx, J)
    params = np.concatenate([[0.0], _initial_a(y_idx, J)])
    free = np.arange(1, J) if fix_beta_zero else np.arange(J)

    ll, g, H = _reparam_derivatives(params, z, y_idx, J)
    trace = [ll]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gf = g[free]
        if np.max(np.abs(gf)) < tol:
            converged = True
            iterations -= 1
            break
        Hf = H[np.ix_(free, free)]
        neg = -Hf
        lam = 0.0
        while True:
            try:
                np.linalg.cholesky(neg + lam * np.eye(len(free)))
                break
            except np.linalg.LinAlgError:
                lam = max(1e-8, lam * 10.0)
        step = np.linalg.solve(neg + lam * np.eye(len(free)), gf)
        t = 1.0
        accepted = False
        for _ in range(60):
            trial = params.copy()
            trial[free] += t * step
            ll_new, g_new, H_new = _reparam_derivatives(trial, z, y_idx, J)
            if np.isfinite(ll_new) and ll_new >= ll:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        params, ll, g, H = trial, ll_new, g_new, H_new
        trace.append(ll)
        if abs(params[0]) > beta_cap:
            break
    else:
        converged = bool(np.max(np.abs(g[free])) < tol)

    beta = float(params[0])
    if separated or abs(beta) > beta_cap:
        converged = False
        separated = True
        beta = math.copysign(min(abs(beta), beta_cap), beta if beta != 0 else 1.0)
    return ClmFit(
        thresholds=tuple(float(t) for t in _thresholds_from(params[1:])),
        beta=beta,
        loglik=ll,
        converged=converged,
        iterations=iterations,
        separated=separated,
        levels=tuple(levels.tolist()),
        n=len(z),
        loglik_trace=trace,
    )


@dataclass
class RankedFeature:
    measure: str
    fi: float
    beta: float
    converged: bool
    n: int


@dataclass
class FeatureRanking:
    entries: list[RankedFeature]
    mean_fi: float | None
    skipped: dict[str, str]

    def above_mean(self, entry: RankedFeature) -> bool:
        return self.mean_fi is not None and entry.fi > self.mean_fi


def rank_features(table: ScoreTable, labels) -> FeatureRanking:
    """Fit one ordinal model per measure and order measures by threshold-sum importance.

    ``labels`` is a mapping from row id to ordinal label, or a sequence aligned
    with the table rows. Measures without enough complete rows (fewer than
    J + 2) or with constant scores are skipped with a logged warning.
    """
    if isinstance(labels, dict):
        missing = [r for r in table.row_ids if r not in labels]
        if missing:
            raise AlignmentMismatchError(f"no label for rows: {', '.join(missing)}")
        y_all = np.array([labels[r] for r in table.row_ids])
    else:
        y_all = np.asarray(labels)
        if len(y_all) != len(table.row_ids):
            raise ValidationError("labels are not aligned with the table rows")
    J = len(np.unique(y_all))
    if J < 2:
        raise ValidationError("ranking needs at least two label classes")

    entries, skipped = [], {}
    for j, name in enumerate(table.columns):
        col = table.values[:, j]
        ok = ~np.isnan(col)
        x, y = col[ok], y_all[ok]
        reason = None
        if len(x) < J + 2:
            reason = f"only {len(x)} complete rows"
        elif np.ptp(x) == 0:
            reason = "constant scores"
        elif len(np.unique(y)) < 2:
            reason = "a single label class among complete rows"
        if reason:
            log.warning("skipping %s: %s", name, reason)
            skipped[name] = reason
            continue
        fit = fit_clm(x, y)
        entries.append(RankedFeature(name, fit.fi, fit.beta, fit.converged, fit.n))
    entries.sort(key=lambda e: (-e.fi, e.measure))
    mean_fi = float(np.mean([e.fi for e in entries])) if entries else None
    return FeatureRanking(entries, mean_fi, skipped)
