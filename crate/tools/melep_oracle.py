#!/usr/bin/env python3
"""Brute-force MELEP reference used to freeze expected values in the Rust tests.

Usage: melep_oracle.py PREDS.csv LABELS.csv [--pair Y Z]

Direct summation over records with plain Python floats. No numpy, no
shared code with the Rust implementation.
"""
import csv
import math
import sys


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header[1:], {r[0]: [float(c) for c in r[1:]] for r in body}, [r[0] for r in body]


def pair(theta, labels, y, z):
    n = len(theta)
    joint = [[0.0, 0.0], [0.0, 0.0]]
    for i in range(n):
        t = int(labels[i][y])
        joint[t][1] += theta[i][z]
        joint[t][0] += 1.0 - theta[i][z]
    joint = [[v / n for v in row] for row in joint]
    marg = [sum(1.0 - theta[i][z] for i in range(n)) / n, sum(theta[i][z] for i in range(n)) / n]
    cond = [[joint[t][s] / marg[s] if marg[s] > 0 else 0.0 for s in range(2)] for t in range(2)]
    return joint, marg, cond


def phi(theta, labels, y, z):
    _, _, cond = pair(theta, labels, y, z)
    total = 0.0
    for i in range(len(theta)):
        t = int(labels[i][y])
        lik = cond[t][0] * (1.0 - theta[i][z]) + cond[t][1] * theta[i][z]
        total += math.log(max(lik, 1e-12))
    return -total / len(theta)


def melep(theta, labels):
    ny, nz = len(labels[0]), len(theta[0])
    acc = 0.0
    for y in range(ny):
        pos = sum(1 for r in labels if r[y] == 1)
        neg = len(labels) - pos
        w = pos / neg
        acc += w * sum(phi(theta, labels, y, z) for z in range(nz)) / nz
    return acc / ny


def main():
    _, preds, _ = read(sys.argv[1])
    _, labs, order = read(sys.argv[2])
    theta = [preds[i] for i in order]
    labels = [labs[i] for i in order]
    if len(sys.argv) > 3 and sys.argv[3] == "--pair":
        y, z = int(sys.argv[4]), int(sys.argv[5])
        joint, marg, cond = pair(theta, labels, y, z)
        print("joint", joint)
        print("marginal", marg)
        print("conditional", cond)
        print("phi", repr(phi(theta, labels, y, z)))
        p = [cond[1][0] * (1 - r[z]) + cond[1][1] * r[z] for r in theta]
        print("ep", p)
    else:
        print(repr(melep(theta, labels)))


if __name__ == "__main__":
    main()
