"""Regenerate the CSV datasets shipped under data/.

- data/iris.csv: the classic iris measurements (150x4, 3 classes), dumped from
  scikit-learn's bundled copy. scikit-learn is only needed to regenerate.
- data/blobs2.csv: synthetic 2-class dataset with a 60/40 class balance, used
  by the cross-host composition checks (majority baseline loss = 0.4).
"""

import csv
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def write_iris() -> None:
    from sklearn.datasets import load_iris

    iris = load_iris()
    names = [iris.target_names[t] for t in iris.target]
    with (DATA / "iris.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sepal_length", "sepal_width", "petal_length", "petal_width", "species"])
        for row, name in zip(iris.data, names):
            w.writerow([f"{v:.1f}" for v in row] + [name])


def write_blobs2(n_pos: int = 60, n_neg: int = 40, seed: int = 7) -> None:
    rng = random.Random(seed)
    with (DATA / "blobs2.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f1", "f2", "f3", "label"])
        for _ in range(n_pos):
            w.writerow([f"{rng.gauss(0.0, 0.6):.4f}", f"{rng.gauss(0.0, 0.6):.4f}",
                        f"{rng.gauss(0.0, 0.6):.4f}", "pos"])
        for _ in range(n_neg):
            w.writerow([f"{rng.gauss(1.8, 0.6):.4f}", f"{rng.gauss(1.8, 0.6):.4f}",
                        f"{rng.gauss(1.8, 0.6):.4f}", "neg"])


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    write_iris()
    write_blobs2()
    for name in ("iris.csv", "blobs2.csv"):
        lines = (DATA / name).read_text().strip().splitlines()
        print(f"{name}: {len(lines) - 1} rows")
