"""Writes parity_net.json and parity.json with a numpy forward pass."""
import json
import pathlib

import numpy as np

rng = np.random.default_rng(20240611)
dims = [3, 8, 6, 5, 4]
acts = ["relu", "tanh", "sigmoid", "identity"]
funcs = {
    "relu": lambda z: np.maximum(z, 0.0),
    "tanh": np.tanh,
    "sigmoid": lambda z: 1.0 / (1.0 + np.exp(-z)),
    "identity": lambda z: z,
}

layers = []
for (cin, cout), act in zip(zip(dims, dims[1:]), acts):
    w = rng.normal(0.0, 1.0 / np.sqrt(cin), size=(cout, cin))
    b = rng.normal(0.0, 0.1, size=cout)
    layers.append((w, b, act))

net = {
    "format_version": 1,
    "latent_dim": dims[0],
    "output_dim": dims[-1],
    "layers": [
        {
            "weights": {"rows": w.shape[0], "cols": w.shape[1], "data": [float(v) for v in w.ravel()]},
            "bias": [float(v) for v in b],
            "activation": act,
        }
        for w, b, act in layers
    ],
    "exporter": "numpy",
}

cases = []
for _ in range(5):
    u = rng.normal(size=dims[0])
    a = u
    for w, b, act in layers:
        a = funcs[act](w @ a + b)
    cases.append({"latent": [float(v) for v in u], "output": [float(v) for v in a]})

here = pathlib.Path(__file__).parent
(here / "parity_net.json").write_text(json.dumps(net, indent=1) + "\n")
(here / "parity.json").write_text(json.dumps({"tolerance": 1e-5, "cases": cases}, indent=1) + "\n")
