"""Bias and spread of the anchored PLE estimator versus shadowing and sample
count, from repeated close-in draws."""

import argparse

import numpy as np

from mmwchan.pathloss import fit_ple
from mmwchan.synth import generate_path_loss_samples


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ple", type=float, default=3.728)
    parser.add_argument("--freq", type=float, default=73e9)
    parser.add_argument("--trials", type=int, default=50)
    args = parser.parse_args()

    print(f"{'sigma_db':>8} {'n':>6} {'mean_err':>9} {'std':>8}")
    for sigma in (0.0, 4.0, 8.0, 12.0):
        for n in (100, 1000, 10_000):
            est = [
                fit_ple(generate_path_loss_samples(args.ple, sigma, n, args.freq, seed=t), args.freq).ple
                for t in range(args.trials)
            ]
            err = np.asarray(est) - args.ple
            print(f"{sigma:8.1f} {n:6d} {err.mean():9.5f} {err.std():8.5f}")


if __name__ == "__main__":
    main()
