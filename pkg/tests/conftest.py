"""Shared fixtures: planted instances, small random games, surrogate data."""

import os

import numpy as np
import pytest

from fidaudit.dataset import Dataset
from fidaudit.importance import ImportanceMatrix
from fidaudit.separable import SearchConfig

# Frozen search configuration for the small-fixture certificate suite.
# B rides the cost scale (the dual only ever needs to outbid a single point's
# cost), eta/window were calibrated so the duality gap certifies within a few
# thousand iterations, and the search targets nu/2 so the certified
# equilibrium implies value-optimality within the full nu.
FIXTURE_ETA = 0.25
FIXTURE_WINDOW = 1000
FIXTURE_MAX_ITERS = 12000
FIXTURE_B_SCALE = 3.0


def build_dataset(sensitive_blocks, safe=None, labels=None):
    """Assemble a Dataset from (name, kind, column(s)) sensitive specs."""
    blocks = []
    names = []
    cols = []
    for name, kind, data in sensitive_blocks:
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[0] == 1:
            data = data.T
        start = len(names)
        if kind == "categorical":
            level_names = [f"{name}={chr(ord('a') + k)}" for k in range(data.shape[1])]
        else:
            level_names = [name]
        names.extend(level_names)
        cols.append({"name": name, "kind": kind, "indices": list(range(start, start + data.shape[1]))})
        blocks.append(data)
    n = blocks[0].shape[0]
    sens = np.hstack(blocks + [np.ones((n, 1))])
    safe = np.zeros((n, 0)) if safe is None else np.atleast_2d(np.asarray(safe, dtype=float))
    if safe.shape[0] == 1 and n != 1:
        safe = safe.T
    safe_names = [f"x{k}" for k in range(safe.shape[1])]
    feature_names = names + safe_names
    encoding_map = {c["name"]: c["indices"] for c in cols}
    for k, nm in enumerate(safe_names):
        encoding_map[nm] = [len(names) + k]
    return Dataset(
        sensitive_matrix=sens,
        safe_matrix=safe,
        labels=np.zeros(n) if labels is None else np.asarray(labels, dtype=float),
        feature_names=feature_names,
        sensitive_feature_names=names + ["bias"],
        encoding_map=encoding_map,
        sensitive_columns=cols,
    )


def planted_instance(n=200, frac=0.2, seed=0):
    """One binary sensitive column; importance -1 inside the planted group."""
    rng = np.random.default_rng(seed)
    s = np.zeros(n)
    s[: int(n * frac)] = 1.0
    rng.shuffle(s)
    ds = build_dataset(
        [("s", "binary", s)], safe=rng.normal(size=(n, 1)), labels=rng.integers(0, 2, n)
    )
    C = np.where(s == 1, -1.0, 0.0)
    M = ImportanceMatrix(
        values=np.column_stack([C, np.zeros(n)]),
        notion="EXTERNAL",
        feature_names=ds.feature_names,
    )
    return ds, M


def small_game(seed):
    """Random fixture with at most 3 distinct sensitive profiles.

    The two-regression oracle interpolates profile cost means when the
    profiles are affinely independent, which keeps its best responses exact
    and the duality-gap certificate sound.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(60, 201))
    if seed % 2 == 0:
        s = (rng.random(n) < rng.uniform(0.25, 0.75)).astype(float)
        ds = build_dataset([("s", "binary", s)])
    else:
        levels = rng.integers(0, 3, n)
        onehot = np.column_stack([(levels == k).astype(float) for k in range(3)])
        ds = build_dataset([("c", "categorical", onehot)])
    C = rng.normal(0, 1, n) + rng.choice([0.0, 0.5])
    M = ImportanceMatrix(values=C[:, None], notion="EXTERNAL", feature_names=["f"])
    return ds, M


def game_config(M, ds, band, direction, nu_scale=0.5, j=0):
    C = M.column(j)
    mu = float(np.mean(np.abs(C)))
    nu_full = 0.05 * mu * ds.n * band[0]
    return SearchConfig(
        alpha_lo=band[0],
        alpha_hi=band[1],
        B=FIXTURE_B_SCALE * float(np.max(np.abs(C))),
        eta=FIXTURE_ETA,
        nu=nu_scale * nu_full,
        max_iters=FIXTURE_MAX_ITERS,
        direction=direction,
        avg_restart_every=FIXTURE_WINDOW,
    )


def two_regime_dataset(n=200, seed=0):
    """Half the rows follow y = 2x, half y = -2x, flagged by a sensitive bit.

    x values repeat across regimes and are symmetric around zero, so the
    population regression coefficient on x is exactly 0 and the within-regime
    coefficients are exactly +/-2.
    """
    half = n // 2
    base = np.linspace(0.2, 1.0, half // 2)
    x_half = np.concatenate([base, -base])
    x = np.concatenate([x_half, x_half])
    s = np.concatenate([np.ones(half), np.zeros(half)])
    y = np.where(s == 1, 2.0 * x, -2.0 * x)
    return build_dataset([("s", "binary", s)], safe=x[:, None], labels=y)


def surrogate_dataset(n=6172, seed=0):
    """Recidivism-scale synthetic: 8 sensitive columns, confident subgroup.

    One sensitive profile (race level e, male) gets extreme model scores, so
    saliency magnitudes inside it are several times smaller than average,
    mirroring the structure the desk-scale audit is expected to surface.
    """
    rng = np.random.default_rng(seed)
    sex = (rng.random(n) < 0.8).astype(float)
    # 5-year buckets keep age numeric while thresholds fall between buckets
    age = (rng.integers(18, 70, n) // 5 * 5).astype(float)
    race_levels = rng.choice(6, size=n, p=[0.45, 0.33, 0.08, 0.06, 0.05, 0.03])
    race = np.column_stack([(race_levels == k).astype(float) for k in range(6)])
    marker = ((race_levels == 4) | (race_levels == 5)) & (sex == 1)
    safe = rng.normal(0, 1, size=(n, 6))
    safe[:, 0] = rng.poisson(3, n)  # prior-count-like
    safe[marker, 0] += 14.0  # extreme scores inside the marked profile
    logits = 0.8 * (safe[:, 0] - 3.0) - 0.9 * safe[:, 1] + 0.7 * safe[:, 2] - 0.3
    probs = 1.0 / (1.0 + np.exp(-logits))
    labels = (rng.random(n) < probs).astype(float)
    ds = build_dataset(
        [("sex", "binary", sex), ("age", "numeric", age), ("race", "categorical", race)],
        safe=safe,
        labels=labels,
    )
    return ds


def compas_raw_path():
    """Location of the public two-year recidivism file, when present."""
    for candidate in (
        os.environ.get("COMPAS_CSV"),
        os.path.join(os.path.dirname(__file__), "..", "data", "compas-scores-two-years.csv"),
    ):
        if candidate and os.path.exists(candidate):
            return candidate
    return None


@pytest.fixture
def planted():
    return planted_instance()


@pytest.fixture
def two_regime():
    return two_regime_dataset()
