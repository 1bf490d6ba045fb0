import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.data.node_csv import NodeDataset, write_node_csv

# Standard depth levels (m)
DEPTHS = np.array([0, 10, 20, 30, 50, 75, 100, 125, 150, 200, 250, 300, 400, 500, 600, 700, 800,
                   900, 1000, 1100, 1200, 1300, 1400, 1500, 1750, 2000, 2500, 3000, 3500, 4000], dtype=float)

parser = argparse.ArgumentParser(description="Write a synthetic per-node ocean temperature CSV.")
parser.add_argument('--output', default='data/ocean_synthetic.csv')
parser.add_argument('--seed', type=int, default=0)
parser.add_argument('--rows', type=int, default=5, help='Grid rows (latitude).')
parser.add_argument('--cols', type=int, default=10, help='Grid columns (longitude).')
args = parser.parse_args()

rng = np.random.default_rng(args.seed)
node_ids, positions, features, targets = [], [], [], []
for r in range(args.rows):
    for c in range(args.cols):
        lon = -97 + c * 15 / max(args.cols - 1, 1) + rng.uniform(-0.3, 0.3)
        lat = 19 + r * 10 / max(args.rows - 1, 1) + rng.uniform(-0.3, 0.3)
        # warm mixed layer decaying into the thermocline, cooler to the north
        temperature = (4 + 22 * np.exp(-DEPTHS / 400) + 0.25 * (29 - lat) * np.exp(-DEPTHS / 800)
                       + rng.normal(0.0, 0.3, size=DEPTHS.shape[0]))
        node_ids.append(str(len(node_ids)))
        positions.append([lon, lat])
        features.append(DEPTHS.reshape(-1, 1))
        targets.append(temperature)

write_node_csv(args.output, NodeDataset(node_ids, np.array(positions), features, targets))
print(f"Wrote {sum(len(t) for t in targets)} rows for {len(node_ids)} nodes to {args.output}")
