"""Exhaustive grid-search oracle for small NNLS problems.

Searches every point of the lattice {0, h, 2h, ..., hi}^K. For K = 3 the last
coordinate is minimised exactly over its lattice: the objective restricted to
one coordinate is a convex quadratic, so the best lattice point is one of the
two lattice neighbours of the clamped continuous minimiser. This keeps the
search exhaustive while costing (n_grid)^2 evaluations per instance.

Run as a script to regenerate ``tests/data/nnls_grid_oracle.json``::

    python tests/oracles/nnls_grid.py
"""

import json
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import nnls as scipy_nnls

STEP = 1e-3
HI = 2.0
SEED = 20261016
N_INSTANCES = 200


def _lattice():
    n = int(round(HI / STEP)) + 1
    return np.arange(n) * STEP


def _best_last_coordinate(resid, col, grid):
    """Best lattice value for the last coordinate given partial residuals.

    ``resid`` has shape (m, d): x - (contribution of earlier coordinates).
    Returns the minimal residual norm over the lattice for each row.
    """
    nrm2 = float(col @ col)
    if nrm2 == 0.0:
        return np.linalg.norm(resid, axis=1)
    cont = np.clip(resid @ col / nrm2, 0.0, HI)
    lo = np.floor(cont / STEP) * STEP
    hi = np.minimum(lo + STEP, grid[-1])
    lo = np.minimum(lo, grid[-1])
    r_lo = np.linalg.norm(resid - lo[:, None] * col[None, :], axis=1)
    r_hi = np.linalg.norm(resid - hi[:, None] * col[None, :], axis=1)
    return np.minimum(r_lo, r_hi)


def grid_min_residual(Y, x):
    """Minimum of ||Y a - x||_2 over the lattice a in {0, STEP, ..., HI}^K."""
    Y = np.asarray(Y, dtype=float)
    x = np.asarray(x, dtype=float)
    K = Y.shape[1]
    grid = _lattice()
    if K == 1:
        r = x[None, :] - grid[:, None] * Y[:, 0][None, :]
        return float(np.linalg.norm(r, axis=1).min())
    if K == 2:
        # full 2-D lattice, chunked over the first coordinate
        best = np.inf
        for a1 in grid:
            r = (x - a1 * Y[:, 0])[None, :] - grid[:, None] * Y[:, 1][None, :]
            best = min(best, float(np.linalg.norm(r, axis=1).min()))
        return best
    if K == 3:
        best = np.inf
        partial2 = grid[:, None] * Y[:, 1][None, :]
        for a1 in grid:
            resid = (x - a1 * Y[:, 0])[None, :] - partial2
            best = min(best, float(_best_last_coordinate(resid, Y[:, 2], grid).min()))
        return best
    raise ValueError("grid oracle supports K <= 3")


def make_instances(n=N_INSTANCES, seed=SEED):
    """Random (Y, x) pairs, d <= 4, K <= 3, whose NNLS optimum lies in the box.

    The box check uses an external NNLS routine only to reject instances whose
    minimiser leaves [0, HI]^K; it never provides an expected value.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        d = int(rng.integers(1, 5))
        K = int(rng.integers(1, 4))
        Y = rng.uniform(0.0, 0.6, size=(d, K))
        a_true = rng.uniform(0.0, 1.5, size=K) * (rng.random(K) > 0.3)
        x = Y @ a_true + rng.normal(0.0, 0.1, size=d)
        a_ref, _ = scipy_nnls(Y, x)
        if np.any(a_ref > HI - 0.05):
            continue
        out.append((Y, x))
    return out


def main(path=None):
    path = Path(path or Path(__file__).resolve().parents[1] / "data" / "nnls_grid_oracle.json")
    rows = []
    for i, (Y, x) in enumerate(make_instances()):
        rows.append({
            "id": i,
            "Y": Y.tolist(),
            "x": x.tolist(),
            "grid_residual": grid_min_residual(Y, x),
        })
    payload = {"step": STEP, "hi": HI, "seed": SEED, "instances": rows}
    path.write_text(json.dumps(payload, indent=1))
    print(f"wrote {len(rows)} instances to {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
