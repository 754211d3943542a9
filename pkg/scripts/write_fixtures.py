"""Writes the built-in datasets, fans and star parameters as plain files."""
import json
import os
import sys

from starfan.core.fan import kite_fan, type_b_fan
from starfan.data import samples
from starfan.data.store import save_fan, write_csv

FANS = {
    "line.json": samples.line_fan,
    "kite2.json": lambda: kite_fan(2),
    "typeb2.json": lambda: type_b_fan(2),
    "typeb3.json": lambda: type_b_fan(3),
}


def write_fixtures(target: str):
    os.makedirs(target, exist_ok=True)

    for variant in sorted(samples.LINE_LABELS):
        path = os.path.join(target, f"line8_{variant}.csv")
        write_csv(samples.line_dataset(variant), path)
        print(f"Wrote {path}")

    _, data, a = samples.diagonal_dataset()
    write_csv(data, os.path.join(target, "diagonal3.csv"))
    with open(os.path.join(target, "diagonal3_params.json"), "w") as f:
        json.dump({"a": a.tolist(), "t": [2.9, 0.9]}, f, indent=2)
        f.write("\n")
    print("Wrote diagonal3 dataset and parameters")

    for name, build in FANS.items():
        save_fan(build(), os.path.join(target, name))
        print(f"Wrote {name}")

    print("Fixtures complete.")


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
