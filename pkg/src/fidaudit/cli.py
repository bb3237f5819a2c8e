"""Command-line orchestration for end-to-end audits.

    audit separable --data d.csv --schema s.json --importance grad \
        --ranges "0.01-0.05,0.05-0.1" --features all --seed 0 --out reports/
    audit linear    --data d.csv --schema s.json --ranges ... --out reports/
    audit score     --data d.csv --schema s.json --subgroup g.json \
        --importance file:vals.csv --out reports/

Reports are JSON and CSV; figures are left to downstream tooling, but the
log-ratio plot data is emitted alongside the summary. Exit codes: 0 success,
2 validation failure, 3 no feature converged. AUDIT_JOBS overrides --jobs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, default_split_fraction, load_dataset, load_schema, split
from .errors import AuditError, DegenerateLabelsError
from .fairness import fairness_deltas
from .importance import grad_saliency, load_importance
from .linfid import linfid_audit
from .models import fit_logistic, predict_proba
from .separable import (
    DEFAULT_ALPHA_RANGES,
    AuditResult,
    avg_fid_sweep,
    default_hyperparameters,
)
from .separable import evaluate_group
from .subgroup import SoftGroup, group_from_json_dict


@dataclass
class RunManifest:
    data: str
    schema: str
    out: str
    importance: str = "grad"  # "grad" or "file:<path>"
    ranges: list = field(default_factory=lambda: list(DEFAULT_ALPHA_RANGES))
    features: object = "all"  # "all" or list of names/indices
    seed: int = 0
    split_fraction: float | None = None
    jobs: int = 1
    max_iters: int | None = None
    standardize: bool = False
    eta: float | None = None
    avg_restart: int | None = None

    def validate(self):
        for p in (self.data, self.schema):
            if not os.path.exists(p):
                raise AuditError(f"path does not exist: {p}")
        if self.importance != "grad" and not self.importance.startswith("file:"):
            raise AuditError(f"importance must be 'grad' or 'file:<path>', got {self.importance!r}")
        if self.importance.startswith("file:") and not os.path.exists(self.importance[5:]):
            raise AuditError(f"importance file does not exist: {self.importance[5:]}")
        for lo, hi in self.ranges:
            if not 0 <= lo < hi <= 1:
                raise AuditError(f"bad alpha range [{lo}, {hi}]")


def parse_ranges(text: str) -> list[tuple[float, float]]:
    ranges = []
    for part in text.split(","):
        lo, hi = part.strip().split("-")
        ranges.append((float(lo), float(hi)))
    return ranges


def _atomic_write(path, content: str):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)


def _write_json(path, doc):
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_jsonl(path, rows):
    _atomic_write(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def _feature_slug(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _select_features(manifest: RunManifest, names: list[str]) -> list[int]:
    if manifest.features == "all":
        return list(range(len(names)))
    out = []
    for f in manifest.features:
        if isinstance(f, int) or (isinstance(f, str) and f.isdigit()):
            out.append(int(f))
        elif f in names:
            out.append(names.index(f))
        else:
            raise AuditError(f"unknown feature {f!r}")
    return out


def _log_ratio(group_mean, pop_mean):
    """|log10| of the group-to-population mean importance ratio, when defined."""
    if group_mean is None or pop_mean is None:
        return None
    if not (np.isfinite(group_mean) and np.isfinite(pop_mean)):
        return None
    if group_mean == 0 or pop_mean == 0 or (group_mean > 0) != (pop_mean > 0):
        return None
    return abs(math.log10(group_mean / pop_mean))


def _top_coefficients(group, names, k: int = 5) -> str:
    theta = np.asarray(group.theta, dtype=float)
    order = np.argsort(-np.abs(theta))[:k]
    return "|".join(f"{names[i]}:{theta[i]:+.4g}" for i in order if theta[i] != 0)


def _load_inputs(manifest: RunManifest):
    schema = load_schema(manifest.schema)
    ds = load_dataset(manifest.data, schema, standardize=manifest.standardize)
    fraction = manifest.split_fraction or default_split_fraction(ds.n)
    sp = split(ds, fraction, manifest.seed)
    return ds, sp


def _classifier_and_importance(manifest: RunManifest, ds: Dataset, sp):
    labels_binary = set(np.unique(ds.labels)) <= {0.0, 1.0}
    model = None
    if labels_binary:
        try:
            model = fit_logistic(
                sp.train.feature_matrix, sp.train.labels, seed=manifest.seed
            )
        except DegenerateLabelsError:
            model = None
    if manifest.importance == "grad":
        if model is None:
            raise AuditError("grad importance needs binary labels with both classes present")
        M = grad_saliency(model, ds)
    else:
        M = load_importance(manifest.importance[5:], ds)
    return model, M


def _sweep_one(args):
    """Worker: full range sweep for one feature (used by the process pool)."""
    j, M_train, M_test, ds_train, ds_test, ranges, max_iters, eta, avg_restart = args

    def factory(lo, hi, direction):
        return default_hyperparameters(
            M_train,
            j,
            ds_train.n,
            lo,
            hi,
            direction=direction,
            max_iters=max_iters or 5000,
            eta=eta,
            avg_restart_every=avg_restart,
        )

    winners, best = avg_fid_sweep(
        M_train, j, ranges, ds_train, M_test=M_test, ds_test=ds_test, config_factory=factory
    )
    return j, winners, best


def _summary_row(result: AuditResult, ds: Dataset, fairness) -> dict:
    row = {
        "feature": result.feature,
        "feature_name": result.feature_name,
        "notion": result.notion,
        "direction": result.direction,
        "alpha_lo": result.alpha_lo,
        "alpha_hi": result.alpha_hi,
        "population_mean_train": result.population_mean_train,
        "group_mean_train": result.group_mean_train,
        "size_train": result.size_train,
        "size_test": result.size_test,
        "avg_fid_train": result.avg_fid_train,
        "avg_fid_test": result.avg_fid_test,
        "fid_train": result.fid_train,
        "converged": result.converged,
        "degenerate": result.degenerate,
        "log10_ratio": _log_ratio(result.group_mean_train, result.population_mean_train),
        "top_coefficients": ""
        if result.group is None
        else _top_coefficients(result.group, ds.sensitive_feature_names),
    }
    for key in ("pos_rate_delta", "tpr_delta", "fpr_delta", "ece_delta"):
        row[key] = None if fairness is None else getattr(fairness, key)
    return row


def _write_summary(out_dir, rows, notion):
    def sort_key(r):
        v = r.get("avg_fid_test")
        if v is None or not np.isfinite(v):
            v = r.get("avg_fid_train") or 0.0
        if v is None or not np.isfinite(v):
            v = 0.0
        return -abs(v)

    rows = sorted(rows, key=sort_key)
    columns = list(rows[0].keys()) if rows else []
    path = os.path.join(out_dir, "summary.csv")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    os.replace(tmp, path)
    _write_json(
        os.path.join(out_dir, "summary.json"),
        {"notion": notion, "rows": rows, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    )
    plot_rows = [
        {"feature_name": r["feature_name"], "log10_ratio": r["log10_ratio"]}
        for r in rows
        if r["log10_ratio"] is not None
    ]
    path = os.path.join(out_dir, "logratio.csv")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["feature_name", "log10_ratio"])
        writer.writeheader()
        writer.writerows(plot_rows)
    os.replace(tmp, path)
    return rows


def _fairness_for(result: AuditResult, model, ds_test: Dataset):
    if model is None or result.group is None:
        return None
    labels = ds_test.labels
    if not set(np.unique(labels)) <= {0.0, 1.0}:
        return None
    w = result.group.membership(ds_test.sensitive_matrix)
    if isinstance(result.group, SoftGroup):
        w = (w >= 0.5).astype(float)
    if w.sum() == 0:
        return None
    probs = predict_proba(model, ds_test.feature_matrix)
    return fairness_deltas(probs, labels, w)


def run_separable(manifest: RunManifest) -> int:
    manifest.validate()
    ds, sp = _load_inputs(manifest)
    model, M = _classifier_and_importance(manifest, ds, sp)
    M_train = M.subset(sp.train_indices)
    M_test = M.subset(sp.test_indices)
    features = _select_features(manifest, ds.feature_names)
    os.makedirs(manifest.out, exist_ok=True)

    jobs = int(os.environ.get("AUDIT_JOBS", manifest.jobs))
    tasks = [
        (j, M_train, M_test, sp.train, sp.test, manifest.ranges, manifest.max_iters,
         manifest.eta, manifest.avg_restart)
        for j in features
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_one, tasks))
    else:
        outcomes = [_sweep_one(task) for task in tasks]

    rows = []
    any_converged = False
    for j, winners, best in outcomes:
        fdir = os.path.join(manifest.out, "features", _feature_slug(ds.feature_names[j]))
        os.makedirs(fdir, exist_ok=True)
        for res in winners:
            stem = f"range_{res.alpha_lo:g}-{res.alpha_hi:g}"
            _write_json(
                os.path.join(fdir, f"{stem}.json"),
                res.to_json_dict(ds.sensitive_feature_names, include_trace=False),
            )
            _write_jsonl(os.path.join(fdir, f"{stem}.trace.jsonl"), res.trace)
        fairness = _fairness_for(best, model, sp.test)
        if fairness is not None:
            best.fairness = fairness.to_json_dict()
        rows.append(_summary_row(best, ds, fairness))
        any_converged = any_converged or best.converged
    _write_summary(manifest.out, rows, M.notion)
    print(f"wrote {len(rows)} feature summaries to {manifest.out}/summary.csv")
    return 0 if any_converged else 3


def run_linear(manifest: RunManifest) -> int:
    manifest.validate()
    ds, sp = _load_inputs(manifest)
    model = None
    if set(np.unique(ds.labels)) <= {0.0, 1.0}:
        try:
            model = fit_logistic(sp.train.feature_matrix, sp.train.labels, seed=manifest.seed)
        except DegenerateLabelsError:
            model = None
    features = _select_features(manifest, ds.feature_names)
    os.makedirs(manifest.out, exist_ok=True)

    rows = []
    any_converged = False
    for j in features:
        per_range = []
        for lo, hi in manifest.ranges:
            res = linfid_audit(
                sp.train,
                j,
                lo,
                hi,
                ds_test=sp.test,
                seed=manifest.seed,
                max_iters=manifest.max_iters or 1000,
            )
            per_range.append(res)
        best = max(
            per_range,
            key=lambda r: (r.fid_test if r.fid_test is not None else r.fid_train) or 0.0,
        )
        fdir = os.path.join(manifest.out, "features", _feature_slug(ds.feature_names[j]))
        os.makedirs(fdir, exist_ok=True)
        for res in per_range:
            stem = f"range_{res.alpha_lo:g}-{res.alpha_hi:g}"
            _write_json(
                os.path.join(fdir, f"{stem}.json"),
                res.to_json_dict(ds.sensitive_feature_names, include_trace=False),
            )
            _write_jsonl(os.path.join(fdir, f"{stem}.trace.jsonl"), res.trace)
        fairness = _fairness_for(best, model, sp.test)
        if fairness is not None:
            best.fairness = fairness.to_json_dict()
        rows.append(_summary_row(best, ds, fairness))
        any_converged = any_converged or best.converged
    _write_summary(manifest.out, rows, "LR")
    print(f"wrote {len(rows)} feature summaries to {manifest.out}/summary.csv")
    return 0 if any_converged else 3


def score_subgroup(manifest: RunManifest, subgroup_path: str) -> int:
    """Audit an externally supplied subgroup: disparity per feature + fairness."""
    manifest.validate()
    if not os.path.exists(subgroup_path):
        raise AuditError(f"subgroup file does not exist: {subgroup_path}")
    ds, sp = _load_inputs(manifest)
    with open(subgroup_path, encoding="utf-8") as fh:
        group = group_from_json_dict(json.load(fh))
    if np.asarray(group.theta).shape[0] != ds.d_sens:
        raise AuditError(
            f"subgroup has {np.asarray(group.theta).shape[0]} coefficients, "
            f"sensitive block (with bias) has {ds.d_sens}"
        )
    model, M = _classifier_and_importance(manifest, ds, sp)
    M_train = M.subset(sp.train_indices)
    M_test = M.subset(sp.test_indices)
    os.makedirs(manifest.out, exist_ok=True)

    results = []
    for j in range(len(ds.feature_names)):
        res = evaluate_group(
            group, M_train, j, sp.train, M_test=M_test, ds_test=sp.test,
            direction="maximize", alpha_lo=0.0, alpha_hi=1.0,
        )
        results.append(res)

    def key(r):
        v = r.avg_fid_test if r.avg_fid_test is not None else r.avg_fid_train
        return abs(v) if v is not None and np.isfinite(v) else -np.inf

    best = max(results, key=key)
    fairness = _fairness_for(best, model, sp.test)
    doc = {
        "subgroup": group.to_json_dict(ds.sensitive_feature_names),
        "top_feature": best.feature_name,
        "top": best.to_json_dict(ds.sensitive_feature_names, include_trace=False),
        "fairness": None if fairness is None else fairness.to_json_dict(),
        "per_feature": [
            r.to_json_dict(ds.sensitive_feature_names, include_trace=False) for r in results
        ],
    }
    _write_json(os.path.join(manifest.out, "score.json"), doc)
    print(f"top feature {best.feature_name!r}: avg disparity {key(best):.6g}")
    return 0


def _common_args(parser):
    parser.add_argument("--data", required=True)
    parser.add_argument("--schema", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ranges", default=None, help='e.g. "0.01-0.05,0.05-0.1"')
    parser.add_argument("--features", default="all", help='"all" or comma list of names')
    parser.add_argument("--split-fraction", type=float, default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--standardize", action="store_true")
    parser.add_argument("--eta", type=float, default=None, help="dual learning-rate override")
    parser.add_argument(
        "--avg-restart", type=int, default=None,
        help="restart the iterate averages every N iterations (helps the gap certify)",
    )


def _manifest_from(args) -> RunManifest:
    return RunManifest(
        data=args.data,
        schema=args.schema,
        out=args.out,
        importance=getattr(args, "importance", "grad"),
        ranges=parse_ranges(args.ranges) if args.ranges else list(DEFAULT_ALPHA_RANGES),
        features="all" if args.features == "all" else [f.strip() for f in args.features.split(",")],
        seed=args.seed,
        split_fraction=args.split_fraction,
        jobs=args.jobs,
        max_iters=args.max_iters,
        standardize=args.standardize,
        eta=args.eta,
        avg_restart=args.avg_restart,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="audit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sep = sub.add_parser("separable", help="size-constrained disparity search")
    _common_args(p_sep)
    p_sep.add_argument("--importance", default="grad", help="grad or file:<path>")

    p_lin = sub.add_parser("linear", help="linear-coefficient disparity search")
    _common_args(p_lin)

    p_score = sub.add_parser("score", help="audit an externally supplied subgroup")
    _common_args(p_score)
    p_score.add_argument("--importance", default="grad", help="grad or file:<path>")
    p_score.add_argument("--subgroup", required=True)

    args = parser.parse_args(argv)
    try:
        manifest = _manifest_from(args)
        if args.command == "separable":
            return run_separable(manifest)
        if args.command == "linear":
            return run_linear(manifest)
        return score_subgroup(manifest, args.subgroup)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
