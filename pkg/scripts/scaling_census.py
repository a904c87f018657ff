#!/usr/bin/env python3
"""Classify the entropy scaling of the three random state families.

Runs the growth-law classifier over seeded draws of product states, random
bond-D chains, random dense states, and random linear trees, and prints a
census of the assigned classes together with mean half-cut entropies.
"""

import argparse
from collections import Counter

import numpy as np

from tnpoly.entanglement import PureState, ee_profile, normalize
from tnpoly.problem import Representation
from tnpoly.tensor_train import random_dense_state, random_tt, tt_reconstruct
from tnpoly.tree_model import random_tree, tree_reconstruct


def product_state(n, d, seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(d)
    for _ in range(n - 1):
        coeffs = np.multiply.outer(coeffs, rng.standard_normal(d))
    return normalize(PureState(coeffs))


def census(name, states, L, P):
    classes = Counter()
    half_cuts = []
    for state in states:
        prof = ee_profile(state, L=L, P=P, rep=Representation.ORIGINAL)
        label = prof.scaling_class.value if prof.scaling_class else "unclassified"
        classes[label] += 1
        if prof.entropies.size:
            half_cuts.append(prof.entropies[len(prof.entropies) // 2])
    mean_half = np.mean(half_cuts) if half_cuts else 0.0
    print(f"{name:22s} mean half-cut S = {mean_half:6.3f} nats   " +
          "  ".join(f"{k}: {v}" for k, v in sorted(classes.items())))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sites", type=int, default=10)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--bond", type=int, default=2)
    ap.add_argument("--seeds", type=int, default=100)
    args = ap.parse_args()

    n, d, D, count = args.sites, args.dim, args.bond, args.seeds
    census("product states", (product_state(n, d, s) for s in range(count)), d - 1, n)
    census(f"random chains D={D}",
           (normalize(PureState(tt_reconstruct(random_tt(n, d, D, seed=s)))) for s in range(count)),
           d - 1, n)
    census("random dense states", (random_dense_state(n, d, s) for s in range(count)), d - 1, n)
    depth = max(2, int(np.log2(n)))
    leaves = 2**depth
    census(f"random trees depth={depth}",
           (normalize(PureState(tree_reconstruct(random_tree(depth, d, D, seed=s))))
            for s in range(count)),
           d - 1, leaves)


if __name__ == "__main__":
    main()
