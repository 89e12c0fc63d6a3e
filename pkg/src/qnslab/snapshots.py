"""Field snapshot container: self-describing text format, stable layout.

Layout (version 1):

    # qnslab-field v1
    dim: <d>
    n: <n1> ... <nd>
    length: <L1> ... <Ld>
    name: <field name>
    time: <float>
    kind: <scalar | vector>
    components: <1 for scalar, d for vector>
    data:
    <one value per line, row-major; vector components concatenated>

Values are written with 17 significant digits so round-trips are exact.
"""

from __future__ import annotations

import numpy as np

from .fields import Grid, ScalarField, VectorField

_MAGIC = "# qnslab-field v1"


def write_field(path, field, name, time=0.0):
    if isinstance(field, ScalarField):
        kind, comps = "scalar", 1
    elif isinstance(field, VectorField):
        kind, comps = "vector", field.grid.dim
    else:
        raise TypeError("write_field expects a ScalarField or VectorField")
    grid = field.grid
    flat = field.values.reshape(-1)
    with open(path, "w") as fh:
        fh.write(_MAGIC + "\n")
        fh.write(f"dim: {grid.dim}\n")
        fh.write("n: " + " ".join(str(m) for m in grid.n) + "\n")
        fh.write("length: " + " ".join(repr(L) for L in grid.length) + "\n")
        fh.write(f"name: {name}\n")
        fh.write(f"time: {time!r}\n")
        fh.write(f"kind: {kind}\n")
        fh.write(f"components: {comps}\n")
        fh.write("data:\n")
        np.savetxt(fh, flat, fmt="%.17g")


def read_field(path):
    """Returns (field, name, time); field is Scalar- or VectorField."""
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != _MAGIC:
            raise ValueError(f"not a qnslab field snapshot: {path}")
        header = {}
        for _ in range(7):
            key, _, rest = fh.readline().partition(":")
            header[key.strip()] = rest.strip()
        marker = fh.readline().strip()
        if marker != "data:":
            raise ValueError(f"corrupt snapshot (missing data marker): {path}")
        data = np.loadtxt(fh)
    dim = int(header["dim"])
    n = tuple(int(m) for m in header["n"].split())
    length = tuple(float(L) for L in header["length"].split())
    if len(n) != dim:
        raise ValueError("corrupt header: n/dim mismatch")
    grid = Grid(n, length)
    comps = int(header["components"])
    name = header["name"]
    time = float(header["time"])
    if header["kind"] == "scalar":
        field = ScalarField(grid, data.reshape(grid.shape))
    else:
        field = VectorField(grid, data.reshape((comps,) + grid.shape))
    return field, name, time
