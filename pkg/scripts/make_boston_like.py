"""Regenerate data/boston_like.csv.

A fixed-seed synthetic regression table with the classic 506 x 13 shape:
standard-normal features, targets X @ w0 + noise with small weights so the
shipped learning-rate constants behave sensibly on unnormalized columns.
The file is committed; rerun this only if you intend to change it.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from autolr.data import Dataset, write_csv  # noqa: E402

ROWS = 506
COLS = 13
SEED = 20240117
NOISE_STD = 0.05
WEIGHT_SCALE = 0.1


def main() -> None:
    rng = np.random.default_rng(SEED)
    features = rng.standard_normal((ROWS, COLS))
    w0 = WEIGHT_SCALE * rng.standard_normal(COLS)
    targets = features @ w0 + NOISE_STD * rng.standard_normal(ROWS)
    names = tuple(f"f{i + 1:02d}" for i in range(COLS))
    dataset = Dataset(features, targets, name="boston_like", feature_names=names)
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "boston_like.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(dataset, out)
    print(f"wrote {out} ({ROWS} rows x {COLS} features)")


if __name__ == "__main__":
    main()
