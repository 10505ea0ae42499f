"""Memorisation overlap m against n at fixed d, with the finite-n oracle and the large-n asymptote.

    python scripts/memorisation.py --d 2000 --seed 1
"""

import argparse
import os

from lingen.harness import format_table
from lingen.linalg import empirical_covariance
from lingen.models import make_spiked_model, sample_dataset
from lingen.rng import generator
from lingen.overlaps import finite_n_memorisation_oracle, memorisation_overlap
from lingen.theory import m_asymptotic


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--d", type=int, default=2000)
    ap.add_argument("--ns", default="1,3,10,30,100,300,1000")
    ap.add_argument("--sigmas", default="0,1")
    ap.add_argument("--latents", type=int, default=64)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="results/memorisation.csv")
    args = ap.parse_args()

    model = make_spiked_model(args.d, 0.0, spike=generator(args.seed, 0))
    records = []
    for n in (int(v) for v in args.ns.split(",")):
        data = sample_dataset(model, n, seed=(args.seed, 1, n))
        for sigma in (float(v) for v in args.sigmas.split(",")):
            est = memorisation_overlap(empirical_covariance(data, sigma), data, args.latents, seed=(args.seed, 2, n))
            oracle = finite_n_memorisation_oracle(n, sigma, n_mc=100_000, seed=(args.seed, 3, n))
            asym = m_asymptotic(n, sigma) if n >= 2 else None
            records.append({"n": n, "sigma": sigma, "m_emp": est.mean, "m_err": est.std_err, "m_oracle": oracle, "m_asymptotic": asym})
            print(f"n={n:5d} sigma={sigma:g}  m={est.mean:.4f}  oracle={oracle:.4f}  asymptote={asym if asym is None else round(asym, 4)}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        fh.write(format_table(records, list(records[0]), "csv"))


if __name__ == "__main__":
    main()
