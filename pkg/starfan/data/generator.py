import logging
from typing import Optional

import numpy as np

from starfan.core.fan import Fan
from starfan.core.star import classify_many
from starfan.data.models import GenSpec, LabeledDataset

logger = logging.getLogger(__name__)


class StarDataGenerator:
    """
    Draws points uniformly from the closed unit ball by rejection from the
    cube [-1, 1]^d, labels them with a known star and flips each label with
    probability 1 - noise (both classes alike).

    The stream is numpy's Philox generator seeded with GenSpec.seed, so a
    spec reproduces the same dataset on every platform.
    """

    BATCH = 1024

    def __init__(self, spec: GenSpec, fan: Optional[Fan] = None):
        self.spec = spec
        if fan is None:
            from starfan.data.service import resolve_fan

            fan = resolve_fan(spec.fan_name)
        self.fan = fan
        self.rng = np.random.Generator(np.random.Philox(spec.seed))

    def sample_points(self) -> np.ndarray:
        d = self.fan.dim
        accepted = []
        have = 0
        while have < self.spec.count:
            cube = self.rng.uniform(-1.0, 1.0, size=(self.BATCH, d))
            inside = cube[np.einsum("ij,ij->i", cube, cube) <= 1.0]
            accepted.append(inside)
            have += len(inside)
        return np.vstack(accepted)[: self.spec.count]

    def generate(self) -> LabeledDataset:
        points = self.sample_points()
        truth = classify_many(self.fan, self.spec.a_true, points)
        flips = self.rng.random(len(points)) >= self.spec.noise
        labels = np.where(flips, 1 - truth, truth).astype(np.int8)
        logger.info(
            f"Generated {len(points)} points on {self.fan.name or 'fan'}: "
            f"{int(labels.sum())} positive, {int(flips.sum())} flipped labels"
        )
        return LabeledDataset(points, labels)


def sample_star_dataset(spec: GenSpec, fan: Optional[Fan] = None) -> LabeledDataset:
    return StarDataGenerator(spec, fan).generate()
