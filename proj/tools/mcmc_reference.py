#!/usr/bin/env python3
"""Random-walk Metropolis reference for the logistic random-effects model.

y_i ~ Binomial(n_i, logistic(beta + u_i)), u_i ~ N(0, D),
beta ~ N(0, beta_var), log D ~ N(logD_mean, logD_var).

Prints posterior means and standard deviations of (u_1..u_m, beta, log D).
Used to check the variational fit on data/bristol.csv.
"""

import argparse
import csv

import numpy as np


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [r["unit"] for r in rows], np.array([float(r["y"]) for r in rows]), np.array([float(r["n"]) for r in rows])


def log_post(theta, y, n, beta_var, logD_mean, logD_var):
    m = len(y)
    u, beta, logD = theta[:m], theta[m], theta[m + 1]
    eta = beta + u
    lik = np.sum(y * eta - n * np.logaddexp(0.0, eta))
    D = np.exp(logD)
    re = -0.5 * np.sum(u * u) / D - 0.5 * m * logD
    return lik + re - 0.5 * beta**2 / beta_var - 0.5 * (logD - logD_mean) ** 2 / logD_var


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data", nargs="?", default="data/bristol.csv")
    ap.add_argument("--iterations", type=int, default=200000)
    ap.add_argument("--burn-in", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--beta-var", type=float, default=1000.0)
    ap.add_argument("--logD-mean", type=float, default=-3.5)
    ap.add_argument("--logD-var", type=float, default=1.0)
    args = ap.parse_args()

    units, y, n = load(args.data)
    m = len(y)
    rng = np.random.default_rng(args.seed)
    pooled = np.log(y.sum() / (n.sum() - y.sum()))
    theta = np.concatenate([np.zeros(m), [pooled, args.logD_mean]])
    lp = log_post(theta, y, n, args.beta_var, args.logD_mean, args.logD_var)

    # One-at-a-time updates with step sizes adapted during burn-in.
    step = np.full(m + 2, 0.2)
    accepted = np.zeros(m + 2)
    total = np.zeros(m + 2)
    draws = []
    for it in range(args.iterations):
        for k in range(m + 2):
            prop = theta.copy()
            prop[k] += step[k] * rng.standard_normal()
            lp_prop = log_post(prop, y, n, args.beta_var, args.logD_mean, args.logD_var)
            total[k] += 1
            if np.log(rng.uniform()) < lp_prop - lp:
                theta, lp = prop, lp_prop
                accepted[k] += 1
        if it < args.burn_in and (it + 1) % 500 == 0:
            rate = accepted / total
            step *= np.exp(rate - 0.44)
            accepted[:] = 0
            total[:] = 0
        if it >= args.burn_in:
            draws.append(theta.copy())

    draws = np.array(draws)
    names = [f"u[{u}]" for u in units] + ["beta", "logD"]
    print("parameter,mean,sd")
    for name, mean, sd in zip(names, draws.mean(axis=0), draws.std(axis=0)):
        print(f"{name},{mean:.4f},{sd:.4f}")


if __name__ == "__main__":
    main()
