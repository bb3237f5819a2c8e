"""Size-constrained disparity search for separable importance notions.

The search is a two-player zero-sum game solved by no-regret dynamics. The
subgroup player best-responds through the cost-sensitive oracle; the dual
player runs exponentiated gradient over the two size constraints (plus an
implicit slack expert, so the dual weights are a softmax with a shared
normalizer and stay inside the L1 ball of radius B). The reported duality
gap compares the Lagrangian of the averaged plays against each player's
exact best response; the run certifies when the gap drops below nu.

Internally the Lagrangian uses count-form size violations (n times the
fractional ones) so that the cost vector C_i - lambda_0 + lambda_1 handed to
the oracle is the subgroup player's exact best response. Reported sizes and
size violations are always fractions.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .dataset import Dataset
from .importance import ImportanceMatrix
from .models import DEFAULT_RIDGE_EPS
from .subgroup import (
    GroupDistribution,
    ThresholdGroup,
    fid_value,
    group_size,
    mean_disparity,
)

DIRECTIONS = ("maximize", "minimize")


@dataclass
class SearchConfig:
    alpha_lo: float
    alpha_hi: float
    B: float
    eta: float
    nu: float
    max_iters: int = 5000
    direction: str = "maximize"
    ridge_eps: float = DEFAULT_RIDGE_EPS
    gap_check_every: int = 10
    literal_dual_response: bool = False
    degenerate: bool = False
    # When set, the iterate averages restart every k iterations and the gap
    # certifies the current window's averaged plays. The certificate stays
    # sound (it compares the window averages against exact best responses);
    # restarting just discards the burn-in mass that otherwise decays as 1/t.
    avg_restart_every: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha_lo < self.alpha_hi <= 1.0:
            raise ValueError(f"need 0 <= alpha_lo < alpha_hi <= 1, got [{self.alpha_lo}, {self.alpha_hi}]")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if min(self.B, self.eta, self.nu) <= 0:
            raise ValueError("B, eta, nu must be positive")


@dataclass
class DualState:
    theta: tuple[float, float]
    lam: tuple[float, float]
    iterate_avg_lambda: tuple[float, float]
    gap: float
    iterate_avg_groups: GroupDistribution | None = None


@dataclass
class AuditResult:
    feature: int
    notion: str
    direction: str
    alpha_lo: float
    alpha_hi: float
    group: object | None = None
    feature_name: str | None = None
    fid_train: float = float("nan")
    avg_fid_train: float = float("nan")
    fid_test: float | None = None
    avg_fid_test: float | None = None
    signed_avg_fid_train: float = float("nan")
    signed_avg_fid_test: float | None = None
    group_mean_train: float = float("nan")
    population_mean_train: float = float("nan")
    group_mean_test: float | None = None
    population_mean_test: float | None = None
    size_train: float = float("nan")
    size_test: float | None = None
    iterations_used: int = 0
    converged: bool = False
    gap_converged: bool = False
    degenerate: bool = False
    gap: float = float("nan")
    expected_fid: float = float("nan")
    trace: list = field(default_factory=list)
    dual_state: DualState | None = None
    distribution: GroupDistribution | None = None
    fairness: dict | None = None

    def to_json_dict(self, sensitive_feature_names=None, include_trace=True) -> dict:
        doc = {
            "feature": self.feature,
            "feature_name": self.feature_name,
            "notion": self.notion,
            "direction": self.direction,
            "alpha_lo": self.alpha_lo,
            "alpha_hi": self.alpha_hi,
            "subgroup": None
            if self.group is None
            else self.group.to_json_dict(sensitive_feature_names),
            "fid_train": _num(self.fid_train),
            "avg_fid_train": _num(self.avg_fid_train),
            "fid_test": _num(self.fid_test),
            "avg_fid_test": _num(self.avg_fid_test),
            "signed_avg_fid_train": _num(self.signed_avg_fid_train),
            "signed_avg_fid_test": _num(self.signed_avg_fid_test),
            "group_mean_train": _num(self.group_mean_train),
            "population_mean_train": _num(self.population_mean_train),
            "group_mean_test": _num(self.group_mean_test),
            "population_mean_test": _num(self.population_mean_test),
            "size_train": _num(self.size_train),
            "size_test": _num(self.size_test),
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "gap_converged": self.gap_converged,
            "degenerate": self.degenerate,
            "gap": _num(self.gap),
            "expected_fid": _num(self.expected_fid),
            "fairness": self.fairness,
        }
        if include_trace:
            doc["trace"] = self.trace
        return doc


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


def dual_weights(theta, B: float) -> np.ndarray:
    """Exponentiated-gradient weights: softmax over (lower, upper, slack).

    lambda_i = B exp(theta_i) / (1 + exp(theta_0) + exp(theta_1)), guarded
    against overflow, so the L1 norm stays strictly below B.
    """
    theta = np.asarray(theta, dtype=float)
    m = max(0.0, float(theta.max()))
    ex = np.exp(theta - m)
    normalizer = np.exp(-m) + ex.sum()
    return B * ex / normalizer


def theoretical_eta(nu: float, n: int, B: float) -> float:
    """Learning-rate schedule from the convergence analysis: nu / (2 n^2 B)."""
    return nu / (2.0 * n * n * B)


def lagrangian(w, lam, C, cfg: SearchConfig, count_form: bool = False) -> float:
    """Objective plus dual-weighted size violations for a membership vector.

    Violations are fractional by default; ``count_form=True`` scales them by
    n, the convention used inside the search loop.
    """
    w = np.asarray(w, dtype=float)
    C = np.asarray(C, dtype=float)
    size = float(w.mean())
    scale = float(w.shape[0]) if count_form else 1.0
    return float(
        w @ C
        + lam[0] * scale * (cfg.alpha_lo - size)
        + lam[1] * scale * (size - cfg.alpha_hi)
    )


def default_hyperparameters(
    M: ImportanceMatrix,
    j: int,
    n: int,
    alpha_lo: float,
    alpha_hi: float = 1.0,
    direction: str = "maximize",
    max_iters: int = 5000,
    use_theoretical_eta: bool = False,
    eta: float | None = None,
    avg_restart_every: int | None = None,
) -> SearchConfig:
    """Hyperparameters scaled to the feature's mean absolute importance.

    B = 1e4 * mu, eta = 1e-5, nu = 0.05 * mu * n * alpha_lo, T = 5000. A zero
    mu makes the feature degenerate (B falls back to 1.0). Emits a warning
    when eta * B exceeds mu, which is the regime where the dual overshoots.
    """
    mu = float(np.mean(np.abs(M.column(j))))
    degenerate = mu == 0.0
    B = 1.0 if degenerate else 1e4 * mu
    nu = 0.05 * mu * n * alpha_lo
    if nu <= 0:
        nu = 1e-3  # degenerate features still need a positive termination bound
    if eta is None:
        eta = theoretical_eta(nu, n, B) if use_theoretical_eta else 1e-5
    if not degenerate and eta * B > mu:
        warnings.warn(
            f"eta * B = {eta * B:.3g} exceeds mu = {mu:.3g}; "
            "dual steps of this size may prevent convergence"
        )
    return SearchConfig(
        alpha_lo=alpha_lo,
        alpha_hi=alpha_hi,
        B=B,
        eta=eta,
        nu=nu,
        max_iters=max_iters,
        direction=direction,
        degenerate=degenerate,
        avg_restart_every=avg_restart_every,
    )


class _PrefactoredCsc:
    """CSC best responses with the normal matrix factored once.

    Equivalent to ``csc_best_response`` with c0 = 0: the c0 regressor of the
    two-regression oracle is identically zero there, so the returned group is
    1{ -r1(x) > 0 } with r1 the ridge fit of the costs.
    """

    def __init__(self, S, eps: float):
        from scipy.linalg import cho_factor, cho_solve

        self.S = S
        A = S.T @ S + eps * np.eye(S.shape[1])
        self._factor = cho_factor(A)
        self._solve = cho_solve

    def best_response(self, c1) -> np.ndarray:
        return -self._solve(self._factor, self.S.T @ c1)


def evaluate_group(
    group,
    M: ImportanceMatrix,
    j: int,
    ds: Dataset,
    M_test: ImportanceMatrix | None = None,
    ds_test: Dataset | None = None,
    **meta,
) -> AuditResult:
    """Score a fixed subgroup on train (and optionally test) data."""
    w = group.membership(ds.sensitive_matrix)
    fid, avg = fid_value(M, j, w, allow_empty=True)
    grp_mean, pop_mean, signed = mean_disparity(M, j, w)
    result = AuditResult(
        feature=j,
        feature_name=M.feature_names[j] if M.feature_names else None,
        notion=M.notion,
        group=group,
        fid_train=fid,
        avg_fid_train=avg,
        signed_avg_fid_train=signed,
        group_mean_train=grp_mean,
        population_mean_train=pop_mean,
        size_train=group_size(w),
        **meta,
    )
    if M_test is not None and ds_test is not None:
        wt = group.membership(ds_test.sensitive_matrix)
        fid_t, avg_t = fid_value(M_test, j, wt, allow_empty=True)
        grp_t, pop_t, signed_t = mean_disparity(M_test, j, wt)
        result.fid_test = fid_t
        result.avg_fid_test = avg_t
        result.signed_avg_fid_test = signed_t
        result.group_mean_test = grp_t
        result.population_mean_test = pop_t
        result.size_test = group_size(wt)
    return result


def constrained_search(
    M: ImportanceMatrix,
    j: int,
    cfg: SearchConfig,
    ds: Dataset,
    M_test: ImportanceMatrix | None = None,
    ds_test: Dataset | None = None,
) -> AuditResult:
    """Run the dual-player loop for one feature, one direction, one size band.

    The reported subgroup is the iterate with size inside the band whose
    averaged disparity is largest; when no iterate ever lands in the band the
    result is flagged non-converged and carries the closest-size iterate.
    """
    n = ds.n
    S = ds.sensitive_matrix
    C = M.column(j)
    sign = -1.0 if cfg.direction == "maximize" else 1.0
    C_opt = sign * C
    total_C = float(C.sum())
    mean_C = float(C.mean())
    solver = _PrefactoredCsc(S, cfg.ridge_eps)

    max_iters = min(cfg.max_iters, 50) if cfg.degenerate else cfg.max_iters
    theta = np.zeros(2)
    sum_w = np.zeros(n)
    lam_sum = np.zeros(2)
    iterate_thetas = []
    window_thetas = []
    window_len = 0
    expected_fid_sum = 0.0
    best_av = -np.inf
    best_theta = None
    closest_dist = np.inf
    closest_theta = None
    trace: list[dict] = []
    gap = float("inf")
    gap_ok = False
    lam = dual_weights(theta, cfg.B)
    lbar = lam.copy()
    t = 0

    for t in range(1, max_iters + 1):
        lam = dual_weights(theta, cfg.B)
        c1 = C_opt - lam[0] + lam[1]
        g_theta = solver.best_response(c1)
        w = (S @ g_theta > 0).astype(float)
        s = float(w.mean())

        sum_w += w
        lam_sum += lam
        window_len += 1
        iterate_thetas.append(g_theta)
        window_thetas.append(g_theta)
        expected_fid_sum += abs(float(w @ C) - total_C)  # over the current window

        if cfg.alpha_lo <= s <= cfg.alpha_hi:
            ws = float(w.sum())
            av = abs(float(w @ C) / ws - mean_C) if ws > 0 else 0.0
            if av > best_av:
                best_av = av
                best_theta = g_theta
        dist = max(cfg.alpha_lo - s, s - cfg.alpha_hi, 0.0)
        if dist < closest_dist:
            closest_dist = dist
            closest_theta = g_theta

        if t % cfg.gap_check_every == 0 or t == max_iters:
            phat = sum_w / window_len
            sbar = float(phat.mean())
            lbar = lam_sum / window_len
            phi_l = n * (cfg.alpha_lo - sbar)
            phi_u = n * (sbar - cfg.alpha_hi)
            if cfg.literal_dual_response:
                lam_prime = np.array([cfg.B * phi_l, cfg.B * phi_u])
            else:
                lam_prime = np.zeros(2)
                if max(phi_l, phi_u) > 0:
                    lam_prime[int(phi_u > phi_l)] = cfg.B
            objective = float(phat @ C_opt)
            L_bar = objective + lam_prime[0] * phi_l + lam_prime[1] * phi_u
            L_cur = objective + lbar[0] * phi_l + lbar[1] * phi_u
            g_resp = solver.best_response(C_opt - lbar[0] + lbar[1])
            w_resp = (S @ g_resp > 0).astype(float)
            s_resp = float(w_resp.mean())
            L_low = (
                float(w_resp @ C_opt)
                + lbar[0] * n * (cfg.alpha_lo - s_resp)
                + lbar[1] * n * (s_resp - cfg.alpha_hi)
            )
            gap = max(abs(L_cur - L_low), abs(L_bar - L_cur))
            psum = float(phat.sum())
            avg_fid_phat = abs(float(phat @ C) / psum - mean_C) if psum > 0 else float("nan")
            trace.append(
                {
                    "t": t,
                    "gap": gap,
                    "size": sbar,
                    "avg_fid": _num(avg_fid_phat),
                    "lambda": [float(lbar[0]), float(lbar[1])],
                }
            )
            if gap <= cfg.nu:
                gap_ok = True
                break
            if cfg.avg_restart_every is not None and t % cfg.avg_restart_every == 0:
                sum_w = np.zeros(n)
                lam_sum = np.zeros(2)
                window_thetas = []
                window_len = 0
                expected_fid_sum = 0.0

        theta = theta + cfg.eta * np.array([cfg.alpha_lo - s, s - cfg.alpha_hi])

    in_band_found = best_theta is not None
    selected = best_theta if in_band_found else closest_theta
    group = ThresholdGroup(theta=np.asarray(selected, dtype=float))
    result = evaluate_group(
        group,
        M,
        j,
        ds,
        M_test=M_test,
        ds_test=ds_test,
        direction=cfg.direction,
        alpha_lo=cfg.alpha_lo,
        alpha_hi=cfg.alpha_hi,
    )
    result.iterations_used = t
    result.converged = gap_ok and in_band_found
    result.gap_converged = gap_ok
    result.degenerate = cfg.degenerate
    result.gap = gap
    result.expected_fid = expected_fid_sum / max(window_len, 1)
    result.trace = trace
    # The certified object is the averaged distribution the gap was computed
    # on (the final window when restarts are enabled).
    result.distribution = GroupDistribution.uniform(
        np.asarray(window_thetas if window_thetas else iterate_thetas)
    )
    result.dual_state = DualState(
        theta=(float(theta[0]), float(theta[1])),
        lam=(float(lam[0]), float(lam[1])),
        iterate_avg_lambda=(float(lbar[0]), float(lbar[1])),
        gap=gap,
        iterate_avg_groups=result.distribution,
    )
    return result


def _better(a: AuditResult, b: AuditResult, attr: str) -> AuditResult:
    """Pick the result with the larger |attr|, treating NaN/None as -inf."""

    def key(r):
        v = getattr(r, attr)
        if v is None or not np.isfinite(v):
            return -np.inf
        return abs(v)

    return a if key(a) >= key(b) else b


def avg_fid_sweep(
    M: ImportanceMatrix,
    j: int,
    ranges: list[tuple[float, float]],
    ds: Dataset,
    M_test: ImportanceMatrix | None = None,
    ds_test: Dataset | None = None,
    config_factory=None,
) -> tuple[list[AuditResult], AuditResult]:
    """Run both optimization directions over each size band.

    Per band the direction with the larger averaged train disparity wins;
    the overall winner is picked on test disparity when test data is given.
    Returns (per-band winners, overall best).
    """
    if config_factory is None:

        def config_factory(lo, hi, direction):
            return default_hyperparameters(M, j, ds.n, lo, hi, direction=direction)

    winners = []
    for lo, hi in ranges:
        per_direction = [
            constrained_search(
                M, j, config_factory(lo, hi, direction), ds, M_test=M_test, ds_test=ds_test
            )
            for direction in DIRECTIONS
        ]
        winners.append(_better(per_direction[0], per_direction[1], "avg_fid_train"))
    select_attr = "avg_fid_test" if (M_test is not None and ds_test is not None) else "avg_fid_train"
    best = winners[0]
    for r in winners[1:]:
        best = _better(best, r, select_attr)
    return winners, best


DEFAULT_ALPHA_RANGES = [(0.01, 0.05), (0.05, 0.1), (0.1, 0.15), (0.15, 0.2), (0.2, 0.25)]


@dataclass
class BruteForceResult:
    membership: np.ndarray
    fid: float
    avg_fid: float
    size: float
    n_profiles: int
    n_feasible: int
    candidates: list


def _threshold_realizable(profiles: np.ndarray, member_mask: np.ndarray) -> bool:
    """LP feasibility: theta with theta.p >= 1 on members, theta.p <= 0 off."""
    d = profiles.shape[1]
    rows = []
    rhs = []
    for p, m in zip(profiles, member_mask):
        if m:
            rows.append(-p)
            rhs.append(-1.0)
        else:
            rows.append(p)
            rhs.append(0.0)
    res = linprog(
        c=np.zeros(d),
        A_ub=np.asarray(rows),
        b_ub=np.asarray(rhs),
        bounds=[(None, None)] * d,
        method="highs",
    )
    return res.status == 0


def brute_force_max_fid(
    M: ImportanceMatrix, j: int, cfg: SearchConfig, ds: Dataset
) -> BruteForceResult:
    """Test oracle: exhaustive search over threshold-realizable labelings.

    Enumerates every subset of distinct sensitive profiles, keeps the
    subsets that a linear threshold can realize and whose size lies in the
    band, and returns the one with the largest |FID|. Refuses datasets with
    more than 20 distinct profiles.
    """
    S = np.round(ds.sensitive_matrix, 12)
    profiles, inverse = np.unique(S, axis=0, return_inverse=True)
    k = profiles.shape[0]
    if k > 20:
        raise ValueError(f"{k} distinct sensitive profiles; brute force refuses more than 20")
    C = M.column(j)
    n = ds.n
    total = float(C.sum())
    counts = np.bincount(inverse, minlength=k)
    profile_csum = np.array([C[inverse == p].sum() for p in range(k)])

    best = None
    candidates = []
    n_feasible = 0
    for bits in itertools.product((0, 1), repeat=k):
        mask = np.asarray(bits, dtype=bool)
        size = float(counts[mask].sum()) / n
        if not cfg.alpha_lo <= size <= cfg.alpha_hi:
            continue
        if not _threshold_realizable(profiles, mask):
            continue
        n_feasible += 1
        group_sum = float(profile_csum[mask].sum())
        fid = abs(group_sum - total)
        count = counts[mask].sum()
        avg_fid = abs(group_sum / count - total / n) if count > 0 else float("nan")
        candidates.append({"size": size, "fid": fid, "avg_fid": avg_fid, "profiles": bits})
        if best is None or fid > best[0]:
            best = (fid, avg_fid, size, mask)
    if best is None:
        return BruteForceResult(
            membership=np.zeros(n, dtype=bool),
            fid=float("nan"),
            avg_fid=float("nan"),
            size=float("nan"),
            n_profiles=k,
            n_feasible=0,
            candidates=[],
        )
    fid, avg_fid, size, mask = best
    return BruteForceResult(
        membership=mask[inverse],
        fid=fid,
        avg_fid=avg_fid,
        size=size,
        n_profiles=k,
        n_feasible=n_feasible,
        candidates=candidates,
    )


def _marginal_candidates(ds: Dataset):
    """Single-attribute groups: one-hot levels, binary values, numeric deciles.

    Sensitive columns are encoded first, so an encoding-map index is also the
    column's position inside the sensitive block.
    """
    d_sens = ds.d_sens
    bias = d_sens - 1
    out = []
    for col in ds.sensitive_columns:
        if col["kind"] == "categorical":
            for idx in col["indices"]:
                theta = np.zeros(d_sens)
                theta[idx] = 1.0
                theta[bias] = -0.5
                out.append((f"{ds.feature_names[idx]}", theta))
        elif col["kind"] == "binary":
            idx = col["indices"][0]
            theta_in = np.zeros(d_sens)
            theta_in[idx] = 1.0
            theta_in[bias] = -0.5
            out.append((f"{col['name']}=1", theta_in))
            theta_out = np.zeros(d_sens)
            theta_out[idx] = -1.0
            theta_out[bias] = 0.5
            out.append((f"{col['name']}=0", theta_out))
        else:
            idx = col["indices"][0]
            values = ds.sensitive_matrix[:, idx]
            for q in np.arange(0.1, 1.0, 0.1):
                thr = float(np.quantile(values, q))
                theta = np.zeros(d_sens)
                theta[idx] = 1.0
                theta[bias] = -thr
                out.append((f"{col['name']}>{thr:g}", theta))
    return out


def marginal_baseline(
    M: ImportanceMatrix,
    j: int,
    ds: Dataset,
    ranges: list[tuple[float, float]],
    M_test: ImportanceMatrix | None = None,
    ds_test: Dataset | None = None,
):
    """Best single-sensitive-attribute group per size band, and overall.

    Returns (overall best AuditResult or None, {range: best-in-range or None}).
    """
    candidates = _marginal_candidates(ds)
    per_range: dict = {tuple(r): None for r in ranges}
    overall = None
    for label, theta in candidates:
        group = ThresholdGroup(theta=theta)
        size = group_size(group.membership(ds.sensitive_matrix))
        for lo, hi in ranges:
            if not lo <= size <= hi:
                continue
            res = evaluate_group(
                group,
                M,
                j,
                ds,
                M_test=M_test,
                ds_test=ds_test,
                direction="maximize",
                alpha_lo=lo,
                alpha_hi=hi,
            )
            res.converged = True
            res.gap = 0.0
            res.iterations_used = 0
            current = per_range[(lo, hi)]
            per_range[(lo, hi)] = res if current is None else _better(current, res, "avg_fid_train")
            overall = res if overall is None else _better(overall, res, "avg_fid_train")
    return overall, per_range
