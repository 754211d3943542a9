import logging
from typing import Optional, Tuple

import numpy as np

from starfan.core.fan import Fan, coarsen_fan_2d, fan_2d_from_rays, kite_fan, refine_fan_2d, type_b_fan
from starfan.data import samples
from starfan.data.models import LabeledDataset
from starfan.data.store import load_fan, load_rays, read_csv
from starfan.infra.errors import FanError

logger = logging.getLogger(__name__)


def resolve_fan(name: str) -> Fan:
    """
    Fan by name: "kite:d", "typeb:d", "line", "rays2d:<path>", "json:<path>"
    or a bare path ending in .json.
    """
    name = name.strip()
    kind, _, arg = name.partition(":")
    try:
        if kind == "kite":
            return kite_fan(int(arg))
        if kind == "typeb":
            return type_b_fan(int(arg))
    except ValueError as e:
        raise FanError(f"Bad fan dimension in {name!r}") from e
    if name == "line":
        return samples.line_fan()
    if kind == "rays2d":
        return fan_2d_from_rays(load_rays(arg), name=name)
    if kind == "json":
        return load_fan(arg)
    if name.endswith(".json"):
        return load_fan(name)
    raise FanError(f"Unknown fan {name!r}; expected kite:d, typeb:d, line, rays2d:<path> or json:<path>")


def vary_fan(fan: Fan, refine: Optional[Tuple[float, float]] = None, coarsen: Optional[int] = None) -> Fan:
    """Applies the optional --refine / --coarsen edits to a planar fan."""
    if refine is not None:
        fan = refine_fan_2d(fan, refine)
        logger.info(f"Refined fan to {fan.n} rays")
    if coarsen is not None:
        fan = coarsen_fan_2d(fan, coarsen)
        logger.info(f"Coarsened fan to {fan.n} rays")
    return fan


def resolve_dataset(source: str, labels_variant: Optional[str] = None) -> LabeledDataset:
    """
    "builtin:line8" (label variant listed, complemented or inner),
    "builtin:diagonal3", or a CSV path.
    """
    if source == "builtin:line8":
        return samples.line_dataset(labels_variant or "listed")
    if labels_variant is not None:
        raise ValueError("--labels-variant only applies to builtin:line8")
    if source == "builtin:diagonal3":
        return samples.diagonal_dataset()[1]
    if source.startswith("builtin:"):
        raise ValueError(f"Unknown built-in dataset {source!r}")
    return read_csv(source)


def default_fan_for(source: str) -> Optional[str]:
    """Fan the built-in datasets are meant for."""
    return {"builtin:line8": "line", "builtin:diagonal3": "typeb:2"}.get(source)


def split_dataset(data: LabeledDataset, holdout: float, seed: int = 0) -> Tuple[LabeledDataset, Optional[LabeledDataset]]:
    """Seeded shuffle-split. Returns (train, held_out); held_out is None when holdout == 0."""
    if not 0 <= holdout < 1:
        raise ValueError(f"holdout must lie in [0, 1), got {holdout}")
    if holdout == 0:
        return data, None
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(data.m)
    cut = int(round(holdout * data.m))
    if cut == 0 or cut == data.m:
        raise ValueError(f"holdout {holdout} leaves an empty side for m={data.m}")
    held, train = np.sort(order[:cut]), np.sort(order[cut:])
    logger.info(f"Split {data.m} points into {len(train)} train / {len(held)} held out")
    return data.subset(train), data.subset(held)
