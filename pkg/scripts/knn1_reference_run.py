"""Pre-build oracle: in-process knn1 loss on iris over the shipped splitter.

Run before wiring the desk-scale acceptance threshold; the printed band is
what the search, which sees knn1 among its candidates, can at worst match.
"""

from pathlib import Path

from svcompose.automl.data import SplitSpec, load_dataset, stratified_split
from svcompose.automl.reference import pipeline_loss

DATA = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    ds = load_dataset(DATA / "iris.csv")
    losses = []
    for seed in range(10):
        train, val = stratified_split(ds, SplitSpec(seed=seed))
        loss = pipeline_loss("identity", "knn1", train, val)
        losses.append(loss)
        print(f"seed {seed}: knn1 validation 0-1 loss = {loss:.4f}")
    mean = sum(losses) / len(losses)
    print(f"mean {mean:.4f}  min {min(losses):.4f}  max {max(losses):.4f}")


if __name__ == "__main__":
    main()
