import argparse
import os
import sys

import matplotlib.pyplot as plt
import pandas as pd

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.simulator.metrics import read_metrics_csv

# Usage: python demo/plot.py runs/field runs/penalty --labels HALK Penalty
parser = argparse.ArgumentParser(description="Plot metrics of one or more runs.")
parser.add_argument('runs', nargs='+', help='Run directories holding metrics.csv')
parser.add_argument('--labels', nargs='*', default=None)
parser.add_argument('--output', default='halk_comparison.png')
args = parser.parse_args()

labels = args.labels or [os.path.basename(os.path.normpath(r)) for r in args.runs]

fig, axes = plt.subplots(1, 3, figsize=(16, 5), facecolor='#f5f5f5')
for run, label in zip(args.runs, labels):
    metrics = read_metrics_csv(os.path.join(run, 'metrics.csv'))
    axes[0].plot(metrics['t'] + 1, metrics['avg_loss'], linewidth=2, label=label)
    axes[1].plot(metrics['t'] + 1, metrics['mean_violation_pos'].expanding().mean(), linewidth=2, label=label)
    axes[2].plot(metrics['t'] + 1, metrics['max_model_order'], linewidth=2, label=label)

    bandwidths_path = os.path.join(run, 'bandwidths.csv')
    if os.path.exists(bandwidths_path):
        bandwidths = pd.read_csv(bandwidths_path)
        if bandwidths.drop(columns=['t']).nunique().max() > 1:
            print(f"{label}: final bandwidths {bandwidths.iloc[-1, 1:].describe().to_dict()}")

axes[0].set_ylabel('Average global loss')
axes[1].set_ylabel('Network disagreement (time average)')
axes[2].set_ylabel('Max model order')
for ax in axes:
    ax.set_xlabel('Samples')
    ax.grid(True, linestyle='--', alpha=0.7)
    ax.set_facecolor('#e6f2ff')
    ax.legend()

plt.tight_layout()
plt.savefig(args.output)
print(f"Saved {args.output}")
