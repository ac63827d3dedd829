"""
Plot aggregate curves written by ``fedbound run --preset``.

Usage:
    python scripts/plot_curves.py results/compare-fixed --metric loss_gap --out compare-fixed.png

Each run directory under the preset directory holds an ``aggregate.csv``;
labels such as ``fedavg_iid`` are split into algorithm and partition, with
one panel per partition.
"""

import argparse
import logging
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

METRICS = ("loss_gap", "grad_norm_sq", "err_norm_sq", "test_acc")
LOG_SCALE = ("loss_gap", "grad_norm_sq", "err_norm_sq")


def load_curves(preset_dir):
    """{partition: {algorithm: aggregate frame}} for every run under ``preset_dir``."""
    curves = defaultdict(dict)
    for label in sorted(os.listdir(preset_dir)):
        path = os.path.join(preset_dir, label, "aggregate.csv")
        if not os.path.isfile(path):
            logger.warning(f"Skipping {label}: no aggregate.csv")
            continue
        algorithm, _, partition = label.rpartition("_")
        curves[partition or "all"][algorithm or label] = pd.read_csv(path)
    return curves


def plot(curves, metric, out_path):
    partitions = sorted(curves)
    fig, axes = plt.subplots(1, len(partitions), figsize=(5 * len(partitions), 4), squeeze=False)
    for ax, partition in zip(axes[0], partitions):
        for algorithm, frame in sorted(curves[partition].items()):
            mean = frame[f"{metric}_mean"]
            std = frame[f"{metric}_std"]
            ax.plot(frame["round"], mean, label=algorithm, linewidth=2)
            ax.fill_between(frame["round"], mean - std, mean + std, alpha=0.15)
        ax.set_xlabel("Communication round")
        ax.set_ylabel(metric)
        ax.set_title(partition)
        if metric in LOG_SCALE:
            ax.set_yscale("log")
        ax.legend()
        ax.grid(True, alpha=0.3)
    plt.tight_layout()
    plt.savefig(out_path, dpi=150)
    plt.close(fig)
    logger.info(f"Saved {out_path}")


def main(argv=None):
    parser = argparse.ArgumentParser(description="Plot preset aggregate curves")
    parser.add_argument("preset_dir", help="directory written by fedbound run --preset")
    parser.add_argument("--metric", choices=METRICS, default="loss_gap")
    parser.add_argument("--out", default="curves.png", help="output image path")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    curves = load_curves(args.preset_dir)
    if not curves:
        logger.error(f"No aggregate.csv files under {args.preset_dir}")
        return 2
    plot(curves, args.metric, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
