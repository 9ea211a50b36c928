"""Reference predictions from scikit-learn for the built-in classifiers.

Logistic regression: the library minimizes mean log-loss + (l2/2)|w|^2 on
min-max scaled features, which is scikit-learn's objective with
C = 1 / (n * l2) applied to the same scaled matrix.
"""
import json
from pathlib import Path

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.naive_bayes import GaussianNB
from sklearn.neighbors import KNeighborsClassifier

DATA = Path(__file__).resolve().parent.parent / "data"


def dataset(rng, n, d):
    y = (rng.random(n) < 0.45).astype(int)
    x = rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0, size=d) + np.outer(y, rng.normal(1.0, 0.5, size=d))
    return x, y


def main():
    rng = np.random.default_rng(1234)
    cases = []
    for index, (n, d) in enumerate(((60, 2), (90, 3), (120, 5))):
        x, y = dataset(rng, n, d)
        test = rng.normal(size=(25, d)) * 2.0 + 0.5
        case = {"x": x.tolist(), "y": y.tolist(), "test": test.tolist()}

        nb = GaussianNB(var_smoothing=1e-9).fit(x, y)
        case["naive_bayes"] = nb.predict_proba(test)[:, 1].tolist()

        lo, hi = x.min(axis=0), x.max(axis=0)
        rng_ = np.where(hi - lo > 0, hi - lo, 1.0)
        xs, ts = (x - lo) / rng_, (test - lo) / rng_
        case["logistic"] = {}
        for l2 in (0.1, 1.0):
            lr = LogisticRegression(C=1.0 / (n * l2), tol=1e-12, max_iter=100000).fit(xs, y)
            case["logistic"][str(l2)] = lr.predict_proba(ts)[:, 1].tolist()

        case["knn"] = {}
        for k in (1, 3, 5):
            knn = KNeighborsClassifier(n_neighbors=k).fit(x, y)
            case["knn"][str(k)] = knn.predict_proba(test)[:, 1].tolist()
        cases.append(case)
    (DATA / "ml_oracles.json").write_text(json.dumps({"cases": cases}) + "\n")
    print(len(cases), "cases")


if __name__ == "__main__":
    main()
