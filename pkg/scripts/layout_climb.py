#!/usr/bin/env python3
"""Hill-climbing refinement of circuit-unit layouts toward full Jacobian
rank, mutating one gate at a time.  Offline companion of layout_search.py."""

import argparse
import sys

import numpy as np

sys.path.insert(0, "src")
sys.path.insert(0, "scripts")

from layout_search import build, cnot_ok
from unitfold.circuit import fast_embed_single, rotation_gate
from unitfold.objective import ObjectiveKind, ObjectiveSpec, _build_stack
from unitfold import kernels


def jacobian_sv(topo, seed=3, h=1e-6):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(-np.pi, np.pi, topo.full_param_count)
    spec = ObjectiveSpec(ObjectiveKind.TARGET_DISTANCE, topo, target=np.eye(topo.dim))
    stack, rots = _build_stack(spec, angles)
    prefix, suffix = kernels.prefix_suffix(stack)
    cols = np.empty((len(rots) * 3, 2 * topo.dim * topo.dim))
    k = 0
    for rot in rots:
        i, q, p = rot.stack_index, rot.qubit, rot.param_offset
        phi = angles[p:p + 3]
        left = np.ascontiguousarray(suffix[i + 1])
        right = np.ascontiguousarray(prefix[i])
        for a in range(3):
            plus = phi.copy(); plus[a] += h
            minus = phi.copy(); minus[a] -= h
            dm = (fast_embed_single(rotation_gate(*plus), q, topo.n)
                  - fast_embed_single(rotation_gate(*minus), q, topo.n)) / (2 * h)
            du = kernels.sandwich(left, np.ascontiguousarray(dm), right)
            cols[k, :topo.dim**2] = du.real.ravel()
            cols[k, topo.dim**2:] = du.imag.ravel()
            k += 1
    # eigenvalues of the Gram matrix: cheaper than an SVD of the Jacobian
    gram = cols @ cols.T
    w = np.linalg.eigvalsh(gram)
    s = np.sqrt(np.clip(w, 0.0, None))[::-1]
    return s


def score(topo, need, seeds=(3,)):
    """(min rank over probe points, min s[need-1]) to maximize."""
    ranks, tails = [], []
    for sd in seeds:
        s = jacobian_sv(topo, seed=sd)
        ranks.append(int((s > s[0] * 1e-7).sum()))
        tails.append(s[need - 1] / s[0])
    return min(ranks), min(tails)


def climb(n, edges, start, steps, seed, flip_ok, out_every=10):
    need = 4**n - 1
    rng = np.random.default_rng(seed)
    rot_qubits, cnots, positions = [list(x) for x in start]
    cur = build(n, rot_qubits, [tuple(c) for c in cnots], positions)
    cur_score = score(cur, need)
    print(f"start: rank {cur_score[0]}/{need} tail {cur_score[1]:.2e}", flush=True)
    n_rots = len(rot_qubits)
    for step in range(steps):
        rq, cn, pos = list(rot_qubits), [tuple(c) for c in cnots], list(positions)
        kind = rng.integers(0, 4)
        if kind == 0:
            rq[rng.integers(0, n_rots)] = int(rng.integers(1, n + 1))
        elif kind == 1:
            i, j = rng.integers(0, n_rots, size=2)
            rq[i], rq[j] = rq[j], rq[i]
        elif kind == 2:
            pos[rng.integers(0, len(pos))] = int(rng.integers(1, n_rots + 1))
            pos.sort()
        else:
            i = rng.integers(0, len(cn))
            e = edges[rng.integers(0, len(edges))]
            if flip_ok and rng.random() < 0.5:
                e = (e[1], e[0])
            cn[i] = tuple(e)
        if len({q for q in rq}) < n or {q for e in cn for q in e} != set(range(1, n + 1)):
            continue
        cand = build(n, rq, cn, pos)
        if not cnot_ok(cand):
            continue
        cand_score = score(cand, need)
        if cand_score >= cur_score:
            rot_qubits, cnots, positions = rq, cn, pos
            if cand_score > cur_score:
                print(f"  step {step}: rank {cand_score[0]}/{need} tail {cand_score[1]:.2e} "
                      f"rots={rq} cnots={cn} pos={pos}", flush=True)
            cur_score = cand_score
        if cur_score[0] >= need:
            final = score(build(n, rot_qubits, cnots, positions), need, seeds=(4, 5, 6))
            print(f"confirm at 3 fresh points: rank {final[0]} tail {final[1]:.2e}", flush=True)
            if final[0] >= need:
                print(f"FOUND rots={rot_qubits} cnots={cnots} pos={positions}", flush=True)
                return
            cur_score = (cur_score[0] - 1, cur_score[1])  # keep climbing
    print(f"end: rank {cur_score[0]}/{need} rots={rot_qubits} cnots={cnots} pos={positions}",
          flush=True)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, required=True)
    ap.add_argument("--edges", required=True)
    ap.add_argument("--rots", required=True, help="comma list of rot qubits")
    ap.add_argument("--cnots", required=True, help="semicolon list, the start CNOTs")
    ap.add_argument("--pos", required=True, help="comma list of insert positions")
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--flip", action="store_true")
    args = ap.parse_args()
    edges = [tuple(map(int, e.split(","))) for e in args.edges.split(";")]
    start = (
        [int(x) for x in args.rots.split(",")],
        [tuple(map(int, e.split(","))) for e in args.cnots.split(";")],
        [int(x) for x in args.pos.split(",")],
    )
    climb(args.n, edges, start, args.steps, args.seed, args.flip)
