"""
Regenerates the noisy 500-point star dataset on the 8-ray plane fan, sweeps
lambda and records the best training accuracy for a handful of seeds.
"""
import logging
import os

from dotenv import load_dotenv

from starfan.core.loss import data_matrix
from starfan.data.generator import sample_star_dataset
from starfan.data.models import GenSpec
from starfan.data.service import resolve_fan
from starfan.data.store import DataStore
from starfan.optimization.runner import lambda_sweep, parse_lambdas
from starfan.optimization.selection import select_best_fit

load_dotenv()

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger("Experiment")

SEEDS = [0, 1, 2, 3, 4]
LAMBDAS = "geom:0.1:5:25"


def run_experiment():
    out_dir = os.getenv("STARFAN_OUT", "out/experiment")
    fan = resolve_fan("typeb:2")
    lambdas = parse_lambdas(LAMBDAS)
    rows = []

    for seed in SEEDS:
        spec = GenSpec(fan_name="typeb:2", count=500, noise=0.9, seed=seed)
        data = sample_star_dataset(spec, fan)
        A = data_matrix(fan, data)
        entries = lambda_sweep(A, data.labels, lambdas)
        best = select_best_fit(entries)
        if best is None:
            logger.warning(f"Seed {seed}: no lambda produced a fit")
            continue

        store = DataStore(os.path.join(out_dir, f"seed{seed}"))
        store.write_dataset(data)
        store.write_sweep(entries)
        logger.info(f"Seed {seed}: best lambda {best.lam:.4g}, accuracy {best.report.accuracy:.4f}")
        rows.append({"seed": seed, "lambda": best.lam, "accuracy": best.report.accuracy, "a_star": best.fit.a_star.tolist()})

    DataStore(out_dir).write_report({"command": "experiment", "lambdas": lambdas, "runs": rows})
    logger.info("Experiment complete.")


if __name__ == "__main__":
    run_experiment()
