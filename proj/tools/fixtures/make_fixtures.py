#!/usr/bin/env python3
"""Regenerates the weight-bundle fixtures and golden outputs in tests/data.

This is a standalone numpy reference of the engine's inference path
(hashing, embedding, brick accumulation, Deepsets scan, decode, gate). The
C++ tests compare against the values written here.
"""

import argparse
import json
from fractions import Fraction
import math
from pathlib import Path

import numpy as np

MASK = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
GOLDEN = 0x9E3779B97F4A7C15


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def hash_index(seed: int, digest: int, rng: int) -> int:
    return mix64(seed ^ digest) % rng


def seed_sequence(master: int, count: int):
    state = master
    out = []
    for _ in range(count):
        state = (state + GOLDEN) & MASK
        out.append(mix64(state))
    return out


def linear_spread(v_dim: int, eps: float):
    return [eps + (1.0 - eps) * (i + 0.5) / v_dim for i in range(v_dim)]


def leaky(z, slope):
    return np.where(z < 0.0, z * slope, z)


def layer(rng, n_in, n_out, activation, scale=1.0):
    w = rng.normal(0.0, scale * math.sqrt(2.0 / n_in), size=(n_out, n_in))
    b = rng.normal(0.0, 0.1, size=n_out)
    return {"in_dim": n_in, "out_dim": n_out, "weights": w.ravel().tolist(),
            "bias": b.tolist(), "activation": activation}


def stack(rng, dims, last_identity):
    layers = []
    for i in range(len(dims) - 1):
        act = "identity" if (last_identity and i == len(dims) - 2) else "leaky_relu"
        layers.append(layer(rng, dims[i], dims[i + 1], act))
    return layers


def forward(layers, x, slope):
    x = np.asarray(x, dtype=np.float64)
    for l in layers:
        w = np.asarray(l["weights"]).reshape(l["out_dim"], l["in_dim"])
        z = w @ x + np.asarray(l["bias"])
        x = leaky(z, slope) if l["activation"] == "leaky_relu" else z
    return x


def deepsets(bundle, elements, extra):
    slope = bundle["leaky_slope"]
    encoded = np.array([forward(bundle["scan_phi"], e, slope) for e in elements])
    pooled = encoded.mean(axis=0)
    return forward(bundle["scan_rho"], np.append(pooled, extra), slope)


def make_bundle(rng, master, d1=5, d2=5120, v_dim=80, s_dim=8):
    seeds = seed_sequence(master, 2 * d1 + 1)
    phi = stack(rng, [d1, 32, 32, 32, 16], last_identity=False)
    rho = stack(rng, [17, 32, 32, 32, s_dim], last_identity=True)
    dec = stack(rng, [2 * d1 + 1 + s_dim, 32, 32, 32, 32, 32, 32, 16, 1], last_identity=True)
    return {
        "format_version": 1, "d1": d1, "d2": d2, "v_dim": v_dim, "clamp_epsilon": 0.001,
        "s_dim": s_dim, "beta": 10000.0, "alpha_interval": [0.5, 1.0],
        "scan_subset_columns": math.ceil(d2 / 10), "leaky_slope": 0.01,
        "embedding_values": linear_spread(v_dim, 0.001),
        "seeds": {"embed": seeds[:d1], "address": seeds[d1:2 * d1], "brick": seeds[2 * d1]},
        "scan_phi": phi, "scan_rho": rho, "dec": dec,
        "flags": {"no_scanner": False, "no_normalization": False},
    }


def add_up(cell: np.float32, delta: np.float32) -> np.float32:
    exact = Fraction(float(cell)) + Fraction(float(delta))
    out = np.float32(float(exact))
    if Fraction(float(out)) < exact:
        out = np.nextafter(out, np.float32(np.inf))
    return out


class Reference:
    """Single-brick reference sketch."""

    def __init__(self, bundle):
        self.b = bundle
        self.cells = np.zeros((bundle["d1"], bundle["d2"]), dtype=np.float32)
        self.count = 0.0

    def embed(self, digest):
        b = self.b
        raw = [b["embedding_values"][hash_index(s, digest, b["v_dim"])] for s in b["seeds"]["embed"]]
        total = sum(raw)
        return [float(np.float32(x / total)) for x in raw]

    def address(self, digest):
        return [hash_index(s, digest, self.b["d2"]) for s in self.b["seeds"]["address"]]

    def store(self, item: str, weight=1.0):
        d = fnv1a(item.encode())
        v, a = self.embed(d), self.address(d)
        for k in range(self.b["d1"]):
            self.cells[k, a[k]] = add_up(self.cells[k, a[k]], np.float32(weight * v[k]))
        self.count += weight

    def query(self, item: str):
        b = self.b
        d = fnv1a(item.encode())
        v, a = self.embed(d), self.address(d)
        m = [float(self.cells[k, a[k]]) for k in range(b["d1"])]
        rule = max(0.0, min(mk / vk for mk, vk in zip(m, v)))
        cols = b["scan_subset_columns"]
        elements = [[float(self.cells[k, c]) for k in range(b["d1"])] for c in range(cols)]
        s = deepsets(b, elements, math.log1p(max(self.count, 0.0)))
        x = m + v + [math.log1p(max(self.count, 0.0))] + s.tolist()
        y = float(forward(b["dec"], x, b["leaky_slope"])[0])
        neural = max(0.0, math.expm1(min(y, 700.0)))
        s_n, s_alpha = math.expm1(s[0]), float(s[1])
        inside = b["alpha_interval"][0] <= s_alpha <= b["alpha_interval"][1]
        use = math.isfinite(neural) and inside and s_n > b["beta"]
        return {"item": item, "m": m, "v": v, "y": y, "rule": rule, "neural": neural,
                "s": s.tolist(), "used_neural": use, "estimate": neural if use else rule}


def write(path: Path, obj):
    path.write_text(json.dumps(obj, indent=1) + "\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "tests" / "data"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240611)

    # Small-d2 bundle with random networks; beta and the alpha window are
    # chosen so both branches of the gate occur in the golden queries.
    golden = make_bundle(rng, master=7, d2=64)
    golden["beta"] = -1.0
    golden["alpha_interval"] = [-1e9, 1e9]

    slope = golden["leaky_slope"]
    dec_inputs = rng.normal(0.0, 2.0, size=(10, golden["dec"][0]["in_dim"])).tolist()
    set_inputs = [rng.uniform(0.0, 5.0, size=(n, golden["d1"])).tolist() for n in (1, 3, 7)]
    extras = [0.0, 1.5, 4.25]

    ref = Reference(golden)
    stream = []
    for rank in range(1, 41):
        stream += [f"item_{rank}"] * max(1, 60 // rank)
    for item in stream:
        ref.store(item)
    names = [f"item_{rank}" for rank in range(1, 41)] + ["absent"]
    # Centre the decoder output near ln(21) so the neural estimates are not
    # all clamped to zero.
    ys = [ref.query(n)["y"] for n in names]
    golden["dec"][-1]["bias"][0] += math.log(21.0) - float(np.mean(ys))
    write(out / "golden_bundle.json", golden)
    write(out / "golden_nn.json", {
        "dec": [{"input": x, "output": forward(golden["dec"], x, slope).tolist()} for x in dec_inputs],
        "deepsets": [{"elements": e, "extra": c, "output": deepsets(golden, e, c).tolist()}
                     for e, c in zip(set_inputs, extras)],
    })
    queries = [ref.query(n) for n in names]
    write(out / "golden_queries.json", {"stream": stream, "queries": queries})

    # s_n = expm1(0) = 0 <= beta on every brick.
    gate = make_bundle(rng, master=11)
    last = gate["scan_rho"][-1]
    last["weights"][: last["in_dim"]] = [0.0] * last["in_dim"]
    last["bias"][0] = 0.0
    write(out / "gate_bundle.json", gate)

    # s_n = expm1(20) > beta, s_alpha = 0.7, decode output ln(43) -> 42.
    neural = make_bundle(rng, master=13)
    last = neural["scan_rho"][-1]
    last["weights"][: 2 * last["in_dim"]] = [0.0] * (2 * last["in_dim"])
    last["bias"][0] = 20.0
    last["bias"][1] = 0.7
    out_layer = neural["dec"][-1]
    out_layer["weights"] = [0.0] * out_layer["in_dim"]
    out_layer["bias"] = [math.log(43.0)]
    write(out / "neural_bundle.json", neural)


if __name__ == "__main__":
    main()
