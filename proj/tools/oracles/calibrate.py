"""Calibration oracle for the frozen regression values in golden/.

Evaluates the basis in closed form (scipy Hermite + factorial norm) and writes:
  roundtrip_16.txt     relative Frobenius error of the full-order round trip
                       on a 16x16 LCG image (seed 16, values mapped to [0, 1])
  orthonormality.txt   max |dx Q Q^T - I| for P = 10, sigma_default(9), M = 256
"""
import pathlib
import sys
import math

import numpy as np
from scipy.special import eval_hermite

M = 16
SEED = 16
MUL = 6364136223846793005
INC = 1442695040888963407


def lcg_values(seed, count):
    state = seed
    out = []
    for _ in range(count):
        state = (MUL * state + INC) % 2**64
        out.append(2.0 * ((state >> 11) * 2.0**-53) - 1.0)
    return out


def basis(orders, size, sigma):
    x = np.array([(2 * i - size + 1) / (size - 1) for i in range(size)])
    q = np.empty((orders, size))
    for p in range(orders):
        norm = math.sqrt(2.0**p * math.factorial(p) * math.sqrt(math.pi) * sigma)
        q[p] = eval_hermite(p, x / sigma) * np.exp(-x**2 / (2 * sigma**2)) / norm
    return q, 2.0 / (size - 1)


def sigma_default(n_max):
    return 0.9 * n_max ** -0.52


out_dir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(".")

image = (np.array(lcg_values(SEED, M * M)) + 1.0).reshape(M, M) / 2.0
q, dx = basis(M, M, sigma_default(M - 1))
moments = dx * dx * q @ image @ q.T
rec = q.T @ moments @ q
roundtrip = np.linalg.norm(rec - image) / np.linalg.norm(image)
(out_dir / "roundtrip_16.txt").write_text(f"{roundtrip:.17g}\n")

q, dx = basis(10, 256, sigma_default(9))
gram = np.abs(dx * q @ q.T - np.eye(10)).max()
(out_dir / "orthonormality.txt").write_text(f"{gram:.17g}\n")
print(f"roundtrip_16 {roundtrip:.17g}\northonormality {gram:.17g}")
