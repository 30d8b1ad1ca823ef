"""Deterministic weighted binary classifiers.

Four model families over numeric feature matrices: logistic-loss linear
models, perceptrons, CART trees with cost-complexity pruning, and
gradient-boosted trees on logistic loss.  Every fitter takes per-sample
weights and is a pure function of its inputs: same data, same
hyperparameters, same predictions, bit for bit.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

__all__ = ["fit_predict", "TrainerError", "FAMILY_KINDS"]

FAMILY_KINDS = ("linear", "perceptron", "tree", "gbdt")


class TrainerError(ValueError):
    """Unknown hyperparameter or invalid training inputs."""


def _check(X, y, w):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(len(y)) if w is None else np.asarray(w, dtype=float)
    if not np.isfinite(w).all() or (w < 0).any():
        raise TrainerError("weights must be finite and nonnegative")
    if w.sum() <= 0:
        raise TrainerError("weights must not be all zero")
    return X, y, w


def _pop_params(params, defaults):
    p = dict(defaults)
    for k, v in params.items():
        if k not in p:
            raise TrainerError(f"unknown hyperparameter {k!r}")
        p[k] = v
    return p


# ---------------------------------------------------------------- linear


def _fit_linear(X, y, w, params):
    p = _pop_params(params, {"penalty": "l2", "C": 1.0})
    if p["penalty"] not in (None, "none", "l2"):
        raise TrainerError(f"unknown penalty {p['penalty']!r}")
    lam = 0.0 if p["penalty"] in (None, "none") else 1.0 / float(p["C"])
    n, d = X.shape
    Xb = np.column_stack([X, np.ones(n)])
    yy = 2.0 * y - 1.0

    def loss_grad(beta):
        z = yy * (Xb @ beta)
        # log(1 + exp(-z)) stably
        loss = float(np.dot(w, np.logaddexp(0.0, -z)))
        s = -w * yy / (1.0 + np.exp(z))
        g = Xb.T @ s
        loss += 0.5 * lam * float(beta[:-1] @ beta[:-1])
        g[:-1] += lam * beta[:-1]
        return loss, g

    res = minimize(loss_grad, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                   options={"maxiter": 500, "ftol": 1e-12, "gtol": 1e-10})
    return res.x


def _predict_linear(beta, X):
    z = np.column_stack([X, np.ones(len(X))]) @ beta
    return (z > 0).astype(np.int8)


# ------------------------------------------------------------ perceptron

_PERCEPTRON_EPOCHS = 1000  # fixed budget; data visited in id order


def _fit_perceptron(X, y, w, params):
    p = _pop_params(params, {"penalty": "l2", "alpha": 1e-4})
    alpha = float(p["alpha"])
    n, d = X.shape
    wt = np.zeros(d)
    b = 0.0
    yy = 2.0 * y - 1.0
    for _ in range(_PERCEPTRON_EPOCHS):
        updated = False
        for i in range(n):
            if yy[i] * (X[i] @ wt + b) <= 0.0:
                wt *= 1.0 - alpha
                wt += w[i] * yy[i] * X[i]
                b += w[i] * yy[i]
                updated = True
        if not updated:
            break
    return wt, b


def _predict_perceptron(model, X):
    wt, b = model
    return (X @ wt + b > 0).astype(np.int8)


# ------------------------------------------------------------------ tree
#
# CART with weighted Gini impurity.  Split ties break on the lowest
# feature index, then the lowest threshold.  Pruning is minimal
# cost-complexity: collapse every subtree whose effective alpha is at
# most ccp_alpha.


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "pred", "rleaf")

    def __init__(self, pred, rleaf):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.pred = pred
        self.rleaf = rleaf  # weighted misclassification if made a leaf

    @property
    def is_leaf(self):
        return self.left is None


def _leaf_stats(y, w):
    w1 = float(w[y == 1].sum())
    w0 = float(w.sum()) - w1
    pred = 1 if w1 > w0 else 0
    return pred, min(w0, w1)


def _best_split(X, y, w):
    n, d = X.shape
    total = w.sum()
    best = None  # (impurity, feature, threshold)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ws = w[order]
        w1 = np.where(y[order] == 1, ws, 0.0)
        cw = np.cumsum(ws)
        cw1 = np.cumsum(w1)
        # candidate split after position i (1..n-1) where xs strictly increases
        valid = np.flatnonzero(xs[1:] > xs[:-1])
        if valid.size == 0:
            continue
        wl = cw[valid]
        wl1 = cw1[valid]
        wr = total - wl
        wr1 = cw1[-1] - wl1
        with np.errstate(divide="ignore", invalid="ignore"):
            gini_l = wl * (1.0 - (wl1 / wl) ** 2 - ((wl - wl1) / wl) ** 2)
            gini_r = wr * (1.0 - (wr1 / wr) ** 2 - ((wr - wr1) / wr) ** 2)
        imp = np.where((wl > 0) & (wr > 0), gini_l + gini_r, np.inf)
        i = int(np.argmin(imp))
        if not np.isfinite(imp[i]):
            continue
        thr = 0.5 * (xs[valid[i]] + xs[valid[i] + 1])
        cand = (float(imp[i]), j, float(thr))
        if best is None or cand < best:
            best = cand
    return best


def _grow(X, y, w, depth, max_depth):
    pred, rleaf = _leaf_stats(y, w)
    node = _Node(pred, rleaf)
    if depth >= max_depth or rleaf == 0.0 or len(y) < 2:
        return node
    split = _best_split(X, y, w)
    if split is None:
        return node
    _, j, thr = split
    mask = X[:, j] <= thr
    if not mask.any() or mask.all():
        return node
    node.feature, node.threshold = j, thr
    node.left = _grow(X[mask], y[mask], w[mask], depth + 1, max_depth)
    node.right = _grow(X[~mask], y[~mask], w[~mask], depth + 1, max_depth)
    return node


def _subtree_risk_leaves(node):
    if node.is_leaf:
        return node.rleaf, 1
    rl, ll = _subtree_risk_leaves(node.left)
    rr, lr = _subtree_risk_leaves(node.right)
    return rl + rr, ll + lr


def _prune(node, alpha, total_weight):
    """Collapse subtrees whose effective alpha is <= ccp_alpha."""
    if node.is_leaf:
        return node
    node.left = _prune(node.left, alpha, total_weight)
    node.right = _prune(node.right, alpha, total_weight)
    risk, leaves = _subtree_risk_leaves(node)
    eff = ((node.rleaf - risk) / total_weight) / max(leaves - 1, 1)
    if eff <= alpha + 1e-15:
        node.left = node.right = None
    return node


def _fit_tree(X, y, w, params):
    p = _pop_params(params, {"max_depth": 128, "ccp_alpha": 0.0})
    root = _grow(X, y.astype(np.int8), w, 0, int(p["max_depth"]))
    if float(p["ccp_alpha"]) > 0.0:
        root = _prune(root, float(p["ccp_alpha"]), float(w.sum()))
    return root


def _predict_tree(root, X):
    out = np.empty(len(X), dtype=np.int8)
    for i, row in enumerate(X):
        node = root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.pred
    return out


# ------------------------------------------------------------------ gbdt
#
# Second-order boosting on logistic loss, xgboost-style: gain splits on
# gradient/hessian sums, leaf weight -G/(H + reg_lambda), raw score
# starts at 0.  Fixed axes of the hyperparameter grid (no subsampling,
# no early stopping, gamma 0) are hard-wired.


class _GLeaf:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, value=0.0):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = value


def _gbdt_grow(X, g, h, depth, max_depth, lam):
    G, H = float(g.sum()), float(h.sum())
    node = _GLeaf(-G / (H + lam) if H + lam > 0 else 0.0)
    if depth >= max_depth or len(g) < 2:
        return node
    parent_score = G * G / (H + lam)
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cg = np.cumsum(g[order])
        ch = np.cumsum(h[order])
        valid = np.flatnonzero(xs[1:] > xs[:-1])
        if valid.size == 0:
            continue
        gl, hl = cg[valid], ch[valid]
        gr, hr = G - gl, H - hl
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score
        i = int(np.argmax(gain))
        if gain[i] <= 1e-12:
            continue
        thr = 0.5 * (xs[valid[i]] + xs[valid[i] + 1])
        cand = (-float(gain[i]), j, float(thr))
        if best is None or cand < best:
            best = cand
    if best is None:
        return node
    _, j, thr = best
    mask = X[:, j] <= thr
    node.feature, node.threshold = j, thr
    node.left = _gbdt_grow(X[mask], g[mask], h[mask], depth + 1, max_depth, lam)
    node.right = _gbdt_grow(X[~mask], g[~mask], h[~mask], depth + 1, max_depth, lam)
    return node


def _gbdt_apply(node, X):
    if node.left is None:
        return np.full(len(X), node.value)
    mask = X[:, node.feature] <= node.threshold
    out = np.empty(len(X))
    out[mask] = _gbdt_apply(node.left, X[mask])
    out[~mask] = _gbdt_apply(node.right, X[~mask])
    return out


_GBDT_FIXED = {
    "max_leaves": 0, "gamma": 0.0, "min_child_weight": 0.0,
    "max_delta_step": 0.0, "subsample": 1.0, "reg_alpha": 0.0,
    "early_stopping_rounds": None,
}


def _fit_gbdt(X, y, w, params, X_all):
    p = _pop_params(params, {"max_depth": 4, "n_estimators": 100,
                             "reg_lambda": 1.0, "learning_rate": 0.3,
                             **_GBDT_FIXED})
    for k, v in _GBDT_FIXED.items():
        if p[k] != v and not (v is None and p[k] is None):
            raise TrainerError(f"hyperparameter {k!r} is pinned to {v!r}")
    lam = float(p["reg_lambda"])
    lr = float(p["learning_rate"])
    F = np.zeros(len(y))
    F_all = np.zeros(len(X_all))
    for _ in range(int(p["n_estimators"])):
        prob = 1.0 / (1.0 + np.exp(-F))
        g = w * (prob - y)
        h = np.maximum(w * prob * (1.0 - prob), 1e-16)
        tree = _gbdt_grow(X, g, h, 0, int(p["max_depth"]), lam)
        step = _gbdt_apply(tree, X)
        if tree.left is None and abs(tree.value) < 1e-12:
            break  # saturated: further rounds cannot change the scores
        F += lr * step
        F_all += lr * _gbdt_apply(tree, X_all)
    return F_all


# ------------------------------------------------------------- dispatch


def fit_predict(family_kind: str, params: dict, X_train, y_train, w_train, X_all) -> np.ndarray:
    """Fit one family member and return 0/1 predictions on ``X_all``."""
    X, y, w = _check(X_train, y_train, w_train)
    X_all = np.asarray(X_all, dtype=float)
    if family_kind == "linear":
        return _predict_linear(_fit_linear(X, y, w, params), X_all)
    if family_kind == "perceptron":
        return _predict_perceptron(_fit_perceptron(X, y, w, params), X_all)
    if family_kind == "tree":
        return _predict_tree(_fit_tree(X, y, w, params), X_all)
    if family_kind == "gbdt":
        return (_fit_gbdt(X, y, w, params, X_all) > 0).astype(np.int8)
    raise TrainerError(f"unknown family kind {family_kind!r}")
