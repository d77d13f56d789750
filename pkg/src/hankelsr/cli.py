"""Command-line front end.

Subcommands: phantom, forward, reconstruct, sweep, selftest.  Exit codes:
0 success, 2 validation, 3 I/O, 4 numerical failure.
"""

import argparse
import json
import sys

import numpy as np

from .bandlimited import SampledFunction1D
from .errors import NumericalError, ValidationError
from .hankel import HankelDataset, HankelOrder, hankel_forward
from .reconstruct import (
    ExperimentConfig,
    PhantomSpec,
    add_noise,
    correlation,
    default_output_grid,
    get_basis,
    make_phantom,
    reconstruct_naive,
    residual,
    select_m,
    _reconstruct_with,
)
from . import serialize

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

_METHODS = {"naive": "naive", "pswf-cormack": "pswf_cormack", "pswf-fbp": "pswf_fbp"}


def _parse_intervals(text):
    if text is None:
        return None
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        if not hi:
            raise ValidationError(
                f"bad interval {part!r}; expected lo:hi[,lo:hi...]"
            )
        out.append((float(lo), float(hi)))
    return tuple(out)


def _phantom_spec(args) -> PhantomSpec:
    kind = args.phantom.replace("-", "_")
    if kind == "two_step":
        return PhantomSpec.two_step(_parse_intervals(args.intervals))
    if kind == "harmonic":
        if args.omega is None:
            raise ValidationError("--omega is required for the harmonic phantom")
        return PhantomSpec.harmonic(args.omega)
    if kind == "custom":
        if args.phantom_csv is None:
            raise ValidationError("--phantom-csv is required for the custom phantom")
        f = serialize.function_from_csv(args.phantom_csv)
        return PhantomSpec.custom(f.values)
    raise ValidationError(f"unknown phantom kind {args.phantom!r}")


def _add_phantom_flags(p):
    p.add_argument("--phantom", default="two-step",
                   choices=["two-step", "harmonic", "custom"])
    p.add_argument("--intervals", default=None,
                   help="two-step intervals as lo:hi[,lo:hi...]")
    p.add_argument("--omega", type=float, default=None,
                   help="harmonic frequency")
    p.add_argument("--phantom-csv", default=None,
                   help="CSV with explicit phantom samples")


def cmd_phantom(args) -> int:
    spec = _phantom_spec(args)
    grid = np.linspace(0.0, args.sigma, args.n)
    f = make_phantom(spec, grid)
    serialize.function_to_csv(f, args.output, abscissa="s")
    print(f"wrote {args.output} ({f.n} samples on [0, {args.sigma:g}])")
    return EXIT_OK


def cmd_forward(args) -> int:
    order = HankelOrder.from_nu(args.nu)
    if args.noise < 0:
        raise ValidationError("--noise must be >= 0")
    spec = _phantom_spec(args)
    grid = np.linspace(0.0, args.sigma, args.n)
    phantom = make_phantom(spec, grid)
    ts = np.linspace(0.0, args.r, args.n)
    h_clean = SampledFunction1D(0.0, args.r, hankel_forward(order, phantom, ts))
    h = add_noise(h_clean, args.noise, args.seed)
    data = HankelDataset(order=order, r=args.r, sigma=args.sigma, h=h,
                         noise_level=args.noise, seed=args.seed)
    serialize.function_to_csv(h, args.output, abscissa="t")
    meta_path = args.meta or (args.output.rsplit(".", 1)[0] + ".json")
    serialize.write_json(
        serialize.dataset_meta(data, phantom_dict=spec.to_dict(), n_samples=args.n),
        meta_path,
    )
    print(f"wrote {args.output} and {meta_path}")
    return EXIT_OK


def _load_dataset(args) -> HankelDataset:
    meta = serialize.read_json(args.meta)
    if args.nu is not None and HankelOrder.from_nu(args.nu).two_nu != meta["two_nu"]:
        raise ValidationError(
            f"--nu {args.nu} conflicts with the sidecar order nu={meta['nu']}"
        )
    for flag, key in (("r", "r"), ("sigma", "sigma")):
        given = getattr(args, flag)
        if given is not None and not np.isclose(given, meta[key], rtol=1e-12):
            raise ValidationError(
                f"--{flag} {given} conflicts with the sidecar value {meta[key]}"
            )
    return serialize.dataset_from_csv(args.input, meta)


def _maybe_plot(args, out_grid, f_rec, f_naive, phantom_values=None):
    if not args.plot:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    if phantom_values is not None:
        ax.plot(out_grid, np.real(phantom_values), ":", color="black",
                label="preimage")
    ax.plot(out_grid, f_rec.values.real, "-", lw=2.2, color="tab:blue",
            label="reconstruction")
    ax.plot(out_grid, f_naive.values.real, "--", color="tab:red", label="naive")
    ax.set_xlabel("s")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.plot, dpi=150)
    plt.close(fig)


def cmd_reconstruct(args) -> int:
    data = _load_dataset(args)
    order = data.order
    method = _METHODS[args.method]
    out_grid = default_output_grid(data.sigma, args.grid_points)

    f_naive = reconstruct_naive(data, out_grid)
    zero_data = not np.any(data.h.values)
    err_naive = None if zero_data else residual(order, f_naive, data)

    m_sel = None
    curve = None
    if method == "naive":
        f_rec = f_naive
        err_rec = err_naive
    else:
        basis = get_basis(data.c)
        if args.m == "auto":
            if zero_data:
                raise ValidationError(
                    "auto m selection needs nonzero data; pass an explicit --m"
                )
            m_sel, curve = select_m(order, data, method, range(basis.m_max + 1),
                                    out_grid, grid_n=args.grid_n,
                                    n_theta=args.angles, taper=args.taper)
        else:
            m_sel = int(args.m)
        f_rec = _reconstruct_with(order, data, method, m_sel, out_grid,
                                  grid_n=args.grid_n, n_theta=args.angles,
                                  taper=args.taper)
        err_rec = None if zero_data else residual(order, f_rec, data)

    serialize.function_to_csv(f_rec, args.output, abscissa="s")
    if args.report:
        report = {
            "schema_version": serialize.SCHEMA_VERSION,
            "method": method,
            "m_selected": m_sel,
            "residual_curve": None if curve is None else [float(v) for v in curve],
            "err_rec": err_rec,
            "err_naive": err_naive,
            "seed": data.seed,
            "noise_level": data.noise_level,
            "nu": order.nu,
            "r": data.r,
            "sigma": data.sigma,
        }
        serialize.write_json(report, args.report)
    _maybe_plot(args, out_grid, f_rec, f_naive)
    if err_rec is not None:
        print(f"method={args.method} m={m_sel} residual={err_rec:.6g} "
              f"naive={err_naive:.6g}")
    else:
        print(f"method={args.method} m={m_sel} (zero data)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = _load_dataset(args)
    order = data.order
    method = _METHODS[args.method]
    if method == "naive":
        raise ValidationError("sweep requires a PSWF method")
    basis = get_basis(data.c)
    m_hi = basis.m_max if args.m_max is None else args.m_max
    ms = list(range(args.m_min, m_hi + 1))
    if not ms:
        raise ValidationError(f"empty m range [{args.m_min}, {m_hi}]")
    out_grid = default_output_grid(data.sigma, args.grid_points)
    m_star, curve = select_m(order, data, method, ms, out_grid,
                             grid_n=args.grid_n, n_theta=args.angles,
                             taper=args.taper)
    err_naive = residual(order, reconstruct_naive(data, out_grid), data)
    with open(args.output, "w", newline="") as fh:
        fh.write("m,residual,naive_residual\n")
        for m, e in zip(ms, curve):
            fh.write(f"{m},{e:.17g},{err_naive:.17g}\n")
    print(f"m*={m_star} residual={curve[ms.index(m_star)]:.6g} naive={err_naive:.6g}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .pswf import build_basis
    from .radon import RadialProfile, cormack2d_forward, cormack2d_invert

    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        failures += 0 if ok else 1

    basis = build_basis(10.0, 12)
    xs = np.linspace(-1, 1, 2001)
    w = np.full(xs.size, xs[1] - xs[0])
    w[0] = w[-1] = 0.5 * (xs[1] - xs[0])
    tab = basis.psi_matrix(xs)
    gram = (tab * w) @ tab.T
    dev = np.max(np.abs(gram - np.eye(13)))
    check("pswf orthonormality", dev < 1e-8, f"max dev {dev:.2e}")
    mono = bool(np.all(np.diff(basis.mu_abs) < 0))
    check("pswf eigenvalue ordering", mono)

    s = np.linspace(0.05, 0.95, 181)
    disk = RadialProfile(0, s, 2.0 * np.sqrt(1.0 - s**2))
    rec = cormack2d_invert(0, disk, s)
    err = np.max(np.abs(rec.values.real[s < 0.9] - 1.0))
    check("cormack disk pair", err < 5e-3, f"max err {err:.2e}")

    v1 = RadialProfile(1, s, s * (1 - s**2))
    w1 = cormack2d_forward(1, v1, s)
    back = cormack2d_invert(1, w1, s)
    mask = (s >= 0.05) & (s <= 0.9)
    rel = np.linalg.norm(back.values[mask] - v1.values[mask]) / np.linalg.norm(
        v1.values[mask]
    )
    check("cormack round trip n=1", rel < 1e-2, f"rel err {rel:.2e}")

    if failures:
        raise NumericalError(f"{failures} selftest check(s) failed")
    print("selftest OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hankelsr",
        description="Band-limited Hankel transform inversion beyond the "
        "diffraction limit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write phantom samples to CSV")
    _add_phantom_flags(p)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", help="simulate band-limited Hankel data")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--r", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=256)
    _add_phantom_flags(p)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--meta", default=None, help="sidecar JSON path")
    p.set_defaults(func=cmd_forward)

    def add_recon_flags(p):
        p.add_argument("--input", required=True, help="data CSV (t,re,im)")
        p.add_argument("--meta", required=True, help="sidecar JSON from 'forward'")
        p.add_argument("--nu", type=float, default=None)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--grid-points", type=int, default=256,
                       help="output samples on [0, sigma]")
        p.add_argument("--grid-n", type=int, default=256,
                       help="FBP image resolution")
        p.add_argument("--angles", type=int, default=256,
                       help="FBP angle count")
        p.add_argument("--taper", type=float, default=0.0,
                       help="smooth cutoff width near |x|=1 (0 disables)")

    p = sub.add_parser("reconstruct", help="reconstruct the preimage from data")
    add_recon_flags(p)
    p.add_argument("--method", default="pswf-cormack", choices=sorted(_METHODS))
    p.add_argument("--m", default="auto",
                   help="truncation index, or 'auto' for residual minimization")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", default=None, help="report JSON path")
    p.add_argument("--plot", default=None, help="overlay plot image path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", help="residual curve over the truncation index")
    add_recon_flags(p)
    p.add_argument("--method", default="pswf-cormack",
                   choices=["pswf-cormack", "pswf-fbp"])
    p.add_argument("--m-min", type=int, default=0)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="quick numerical sanity checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "m", None) not in (None, "auto"):
        try:
            args.m = int(args.m)
        except ValueError:
            parser.error(f"--m must be an integer or 'auto', got {args.m!r}")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
