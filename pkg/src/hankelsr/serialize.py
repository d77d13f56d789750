"""CSV and JSON artifacts.

Sampled functions are written as ``<abscissa>,re,im`` with full-precision
decimal floats (17 significant digits, so a write-read round trip is
value-identical).  Sinograms use ``y,theta,re,im`` row-major by angle.
Reports and data sidecars are JSON with a schema-version field.
"""

import csv
import json

import numpy as np

from .bandlimited import SampledFunction1D
from .errors import ValidationError
from .hankel import HankelDataset, HankelOrder
from .radon import Sinogram2D

__all__ = [
    "SCHEMA_VERSION",
    "function_to_csv",
    "function_from_csv",
    "sinogram_to_csv",
    "sinogram_from_csv",
    "dataset_meta",
    "dataset_from_csv",
    "report_to_dict",
    "write_json",
    "read_json",
]

SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def function_to_csv(f: SampledFunction1D, path, abscissa: str = "s") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([abscissa, "re", "im"])
        for x, v in zip(f.grid, f.values):
            writer.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])


def function_from_csv(path) -> SampledFunction1D:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3:
            raise ValidationError(f"{path}: expected header '<abscissa>,re,im'")
        rows = [(float(r[0]), float(r[1]), float(r[2])) for r in reader if r]
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two samples")
    xs = np.array([r[0] for r in rows])
    vals = np.array([complex(r[1], r[2]) for r in rows])
    d = np.diff(xs)
    if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * max(1.0, abs(xs[-1]))):
        raise ValidationError(f"{path}: abscissa grid must be uniform")
    return SampledFunction1D(xs[0], xs[-1], vals)


def sinogram_to_csv(sino: Sinogram2D, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "theta", "re", "im"])
        for i, theta in enumerate(sino.thetas):
            for y, v in zip(sino.y, sino.values[i]):
                writer.writerow([_fmt(y), _fmt(theta), _fmt(v.real), _fmt(v.imag)])


def sinogram_from_csv(path) -> Sinogram2D:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [(float(r[0]), float(r[1]), complex(float(r[2]), float(r[3])))
                for r in reader if r]
    thetas = sorted(set(r[1] for r in rows))
    ys = sorted(set(r[0] for r in rows))
    values = np.zeros((len(thetas), len(ys)), dtype=complex)
    t_index = {t: i for i, t in enumerate(thetas)}
    y_index = {y: i for i, y in enumerate(ys)}
    for y, t, v in rows:
        values[t_index[t], y_index[y]] = v
    return Sinogram2D(np.array(ys), np.array(thetas), values)


def dataset_meta(data: HankelDataset, phantom_dict=None, n_samples=None) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "two_nu": data.order.two_nu,
        "nu": data.order.nu,
        "r": data.r,
        "sigma": data.sigma,
        "n_samples": int(n_samples if n_samples is not None else data.h.n),
        "noise_level": data.noise_level,
        "seed": data.seed,
    }
    if phantom_dict is not None:
        meta["phantom"] = phantom_dict
    return meta


def dataset_from_csv(csv_path, meta: dict) -> HankelDataset:
    h = function_from_csv(csv_path)
    order = HankelOrder(int(meta["two_nu"]))
    return HankelDataset(
        order=order,
        r=float(meta["r"]),
        sigma=float(meta["sigma"]),
        h=h,
        noise_level=float(meta.get("noise_level", 0.0)),
        seed=int(meta.get("seed", 0)),
    )


def _function_to_dict(f: SampledFunction1D) -> dict:
    return {
        "a": f.a,
        "b": f.b,
        "re": f.values.real.tolist(),
        "im": f.values.imag.tolist(),
    }


def report_to_dict(report, config_dict=None) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "method": report.method,
        "m_selected": report.m_selected,
        "residual_curve": None if report.residual_curve is None
        else [float(v) for v in report.residual_curve],
        "err_rec": report.err_rec,
        "err_naive": report.err_naive,
        "runtime_ms": report.runtime_ms,
        "seed": report.seed,
        "noise_level": report.noise_level,
        "boundary_shell_re": complex(report.boundary_shell).real,
        "boundary_shell_im": complex(report.boundary_shell).imag,
        "f_rec": _function_to_dict(report.f_rec),
        "f_naive": _function_to_dict(report.f_naive),
    }
    if config_dict is not None:
        d["config"] = config_dict
    return d


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
