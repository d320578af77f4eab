"""Command-line entry point: every experiment as a reproducible subcommand.

All randomness flows from one ``--seed`` through named sub-streams, and a
run with identical arguments produces byte-identical primary artifacts
(manifests carry timestamps and live in separate files).  Exit codes are
a stable contract for scripts:

    0  success
    1  usage error (bad flags, bad input files, invalid configuration)
    2  numeric degeneracy (vanishing normalization)
    3  non-convergence (settling or solver budget exhausted)

Heavy imports happen inside the command handlers so that ``--threads``
can cap the BLAS pools before numpy is loaded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_NOT_CONVERGED = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _parse_values(text: str):
    return [float(v) for v in text.replace(",", " ").split()]


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(args, path: Path, hyper: dict, checksum: str) -> None:
    from .artifacts import RunManifest

    RunManifest.create(args.seed, hyper, checksum).save(path)


def _ledger(args, record: dict) -> None:
    from .artifacts import append_result

    append_result(_out_dir(args) / "results.jsonl", {"seed": args.seed, **record})


def _load_dataset(args, split: str):
    """Resolve --data into a LabeledDataset.

    ``mnist``     the four IDX files under --data-dir / $OSCNET_DATA_DIR / ./data
    ``synth``     seeded Gaussian blobs (--synth-* flags)
    ``csv:PATH``  labelled CSV, last column = integer class label
    """
    from . import data as data_mod

    if args.data == "mnist":
        paths = data_mod.find_mnist(getattr(args, "data_dir", None))
        if paths is None:
            raise FileNotFoundError(
                "MNIST IDX files not found; pass --data-dir or set OSCNET_DATA_DIR "
                "(see README for the download script)"
            )
        if split == "train":
            return data_mod.load_mnist(paths["train_images"], paths["train_labels"])
        return data_mod.load_mnist(paths["test_images"], paths["test_labels"])
    if args.data == "synth":
        seed = args.seed if split == "train" else args.seed + 1
        return data_mod.synth_clusters(
            args.synth_k, args.synth_n, args.synth_dim, args.synth_spread, seed
        )
    if args.data.startswith("csv:"):
        import numpy as np

        x, y, _ = data_mod.load_csv_dataset(args.data[4:])
        return data_mod.LabeledDataset(x, np.asarray(y, dtype=np.int64))
    raise ValueError(f"unknown --data {args.data!r}")


def _add_data_flags(p: _Parser):
    p.add_argument("--data", default="synth", help="mnist | synth | csv:PATH")
    p.add_argument("--data-dir", default=None, help="dataset root for mnist")
    p.add_argument("--synth-k", type=int, default=3)
    p.add_argument("--synth-n", type=int, default=200)
    p.add_argument("--synth-dim", type=int, default=16)
    p.add_argument("--synth-spread", type=float, default=0.02)


# ----------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    import numpy as np

    from . import dynamics, mimo
    from .artifacts import load_network, save_json
    from .data import sha256_of

    net = load_network(args.net)
    inputs = np.asarray(_parse_values(args.inputs))
    analytic = ode = None
    if args.mode in ("analytic", "both"):
        analytic = mimo.forward(net, inputs)
    if args.mode in ("ode", "both"):
        ode, traj = dynamics.settle_mimo(
            net.weights, inputs, dt=args.dt, seed=args.seed
        )
        traj_path = args.trajectory or (_out_dir(args) / "trajectory.csv")
        dynamics.save_trajectory_csv(traj, traj_path, stride=args.stride)
    shown = analytic if analytic is not None else ode
    print("[" + ", ".join(f"{v:.3f}" for v in shown) + "]")
    if args.mode == "both":
        scale = np.maximum(np.abs(analytic), 1.0)
        if np.any(np.abs(analytic - ode) > 1e-3 * scale):
            print(
                f"mode disagreement: analytic {analytic.tolist()} "
                f"vs ode {ode.tolist()}",
                file=sys.stderr,
            )
            return EXIT_DEGENERATE
    if args.out:
        payload = {
            "inputs": inputs.tolist(),
            "mode": args.mode,
            "outputs": shown.tolist(),
        }
        if args.mode == "both":
            payload["ode_outputs"] = ode.tolist()
        save_json(args.out, payload)
        _write_manifest(
            args,
            Path(str(args.out)).with_suffix(".manifest.json"),
            {"mode": args.mode, "dt": args.dt},
            sha256_of(net.weights, inputs),
        )
    _ledger(args, {"command": "simulate", "outputs": [float(v) for v in shown]})
    return EXIT_OK


# ----------------------------------------------------------------- convolve


def cmd_convolve(args) -> int:
    import numpy as np

    from . import mimo
    from .data import read_image_csv, read_pgm, write_image_csv, write_pgm

    src = Path(args.image)
    img = read_pgm(src) if src.suffix.lower() == ".pgm" else read_image_csv(src)
    if args.kernel:
        spec = json.loads(Path(args.kernel).read_text())
        if "taps" in spec:
            taps = np.asarray(spec["taps"], dtype=float)
            anchor = tuple(spec.get("anchor", (taps.shape[0] // 2, taps.shape[1] // 2)))
            kernel = mimo.ConvolutionKernel(taps=taps, anchor=anchor)
        else:
            kernel = mimo.gaussian_kernel(int(spec["size"]), float(spec["sigma"]))
    else:
        kernel = mimo.gaussian_kernel(args.gaussian_size, args.gaussian_sigma)
    out = mimo.convolve_image(img, kernel, border=args.border)
    dst = Path(args.out) if args.out else _out_dir(args) / f"convolved{src.suffix}"
    if dst.suffix.lower() == ".pgm":
        write_pgm(dst, out)
    else:
        write_image_csv(dst, out)
    print(f"wrote {dst}")
    _ledger(args, {"command": "convolve", "output": str(dst)})
    return EXIT_OK


# ----------------------------------------------------------------- train


def cmd_train(args) -> int:
    from . import baseline, hebbian
    from .artifacts import save_autoencoder, save_train_state
    from .data import sha256_of

    if args.epochs < 1:
        raise ValueError("epochs must be at least 1")
    train = _load_dataset(args, "train")
    out = Path(args.out) if args.out else _out_dir(args) / f"{args.variant}.json"
    hyper = {
        "variant": args.variant,
        "hidden": args.hidden,
        "epochs": args.epochs,
        "lr": args.lr,
        "lr_final": args.lr_final,
        "lambda": args.decay,
        "data": args.data,
    }
    if args.variant == "hebbian":
        state = hebbian.pretrain(
            train,
            m_hidden=args.hidden,
            epochs=args.epochs,
            lr_schedule=hebbian.linear_lr(args.lr, args.lr_final),
            lam=args.decay,
            seed=args.seed,
        )
        save_train_state(out, state)
    else:
        dims = [train.n_features, args.hidden, train.n_features]
        if args.deep:
            dims = [train.n_features, 128, args.hidden, 128, train.n_features]
        model = baseline.train_autoencoder(
            train,
            dims,
            epochs=args.epochs,
            lr=args.ae_lr,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        save_autoencoder(out, model)
        hyper.update({"dims": dims, "ae_lr": args.ae_lr, "batch_size": args.batch_size})
    _write_manifest(
        args,
        out.with_suffix(".manifest.json"),
        hyper,
        sha256_of(train.features, train.labels),
    )
    print(f"wrote {out}")
    _ledger(args, {"command": "train", "checkpoint": str(out), **hyper})
    return EXIT_OK


# ----------------------------------------------------------------- eval


def cmd_eval(args) -> int:
    import numpy as np

    from . import baseline, hebbian
    from .artifacts import load_json, load_autoencoder, load_train_state, save_json
    from .errors import UnknownVersionError

    train = _load_dataset(args, "train")
    test = _load_dataset(args, "test")
    kind = load_json(args.checkpoint).get("kind")
    if kind == "train-state":
        state = load_train_state(args.checkpoint)
        if args.protocol == "unsupervised":
            mapping = hebbian.assign_labels_by_majority(state, train)
            predicted = hebbian.classify(state, mapping, test.features)
        else:
            head = hebbian.finetune_head(state, train, l2=args.l2)
            predicted = hebbian.head_predict(state, head, test.features)
        n_units = state.m_units
    elif kind == "autoencoder":
        model = load_autoencoder(args.checkpoint)
        if args.protocol == "unsupervised":
            mapping = hebbian.majority_label_map(
                baseline.bottleneck_assignments(model, train.features),
                train.labels,
                model.dims[model.bottleneck_layer],
            )
            predicted = mapping[baseline.bottleneck_assignments(model, test.features)]
        else:
            head = hebbian.fit_logistic_head(
                model.encode(train.features), train.labels, l2=args.l2, lr=1.0, iters=500
            )
            predicted = np.argmax(
                model.encode(test.features) @ head.weights + head.bias, axis=1
            )
        n_units = model.dims[model.bottleneck_layer]
    else:
        raise UnknownVersionError(f"cannot evaluate a {kind!r} checkpoint")
    accuracy = float(np.mean(predicted == test.labels))
    print(f"accuracy: {accuracy:.4f}")
    record = {
        "command": "eval",
        "protocol": args.protocol,
        "accuracy": accuracy,
        "checkpoint": str(args.checkpoint),
        "n_units": int(n_units),
    }
    if args.out:
        save_json(args.out, {k: v for k, v in record.items() if k != "command"})
    _ledger(args, record)
    return EXIT_OK


# ----------------------------------------------------------------- kmeans


def cmd_kmeans(args) -> int:
    import numpy as np

    from . import baseline, hebbian
    from .artifacts import save_cluster_model, save_json
    from .data import sha256_of

    train = _load_dataset(args, "train")
    test = _load_dataset(args, "test")
    if args.variant == "oscnet":
        model = hebbian.kmeans_fit(train, args.k, iters=args.iters, seed=args.seed)
        unit_tr = train.features / np.linalg.norm(train.features, axis=1, keepdims=True)
        unit_te = test.features / np.linalg.norm(test.features, axis=1, keepdims=True)
        assign_tr = np.argmax(unit_tr @ model.centers, axis=1)
        assign_te = np.argmax(unit_te @ model.centers, axis=1)
    else:
        model = baseline.euclidean_kmeans(train, args.k, iters=args.iters, seed=args.seed)
        assign_tr = baseline.euclidean_assignments(model.centers.T, train.features)
        assign_te = baseline.euclidean_assignments(model.centers.T, test.features)
    accuracy = hebbian.unsupervised_accuracy(
        assign_tr, train.labels, assign_te, test.labels, args.k
    )
    print(f"accuracy: {accuracy:.4f}")
    out = Path(args.out) if args.out else _out_dir(args) / f"kmeans_{args.variant}.json"
    save_cluster_model(out, model)
    save_json(
        out.with_suffix(".metrics.json"),
        {"variant": args.variant, "k": args.k, "accuracy": accuracy},
    )
    _write_manifest(
        args,
        out.with_suffix(".manifest.json"),
        {"variant": args.variant, "k": args.k, "iters": args.iters},
        sha256_of(train.features, train.labels),
    )
    _ledger(args, {"command": "kmeans", "variant": args.variant, "accuracy": accuracy})
    return EXIT_OK


# ----------------------------------------------------------------- regress


def cmd_regress(args) -> int:
    from . import regression
    from .artifacts import save_json
    from .data import load_csv_dataset, sha256_of

    x, y, names = load_csv_dataset(args.data_csv)
    if args.method == "closed":
        if x.shape[1] != 1:
            raise ValueError("--method closed fits y = k*x and needs exactly one feature")
        k = regression.solve_single(x[:, 0], y)
        theta = [k]
        fit_intercept = False
    else:
        problem = regression.RegressionProblem(x, y, fit_intercept=not args.no_intercept)
        config = regression.CoordinateDescentConfig(
            max_sweeps=args.max_sweeps,
            tol=args.tol,
            order=args.order,
            seed=args.seed,
        )
        theta = regression.coordinate_descent(problem, config).tolist()
        fit_intercept = not args.no_intercept
    print("theta:", [round(v, 6) for v in theta])
    out = Path(args.out) if args.out else _out_dir(args) / "theta.json"
    save_json(
        out,
        {
            "method": args.method,
            "fit_intercept": fit_intercept,
            "features": names,
            "theta": theta,
        },
    )
    _write_manifest(
        args,
        out.with_suffix(".manifest.json"),
        {"method": args.method, "tol": args.tol},
        sha256_of(x, y),
    )
    _ledger(args, {"command": "regress", "method": args.method, "theta": theta})
    return EXIT_OK


# ----------------------------------------------------------------- retina


def cmd_retina(args) -> int:
    from . import retina
    from .artifacts import save_json, save_world
    from .data import sha256_of

    rows, cols = (int(v) for v in args.grid.lower().split("x"))
    world = retina.build_world((rows, cols), args.cells, args.blur_sigma, args.seed)
    trained = retina.develop(
        world,
        n_waves=args.waves,
        lr_schedule=retina.linear_lr(args.lr, args.lr_final),
        lam=args.decay,
        seed=args.seed,
        wave_params=retina.WaveParams(args.wave_sigma, args.wave_speed),
        neighborhood=args.neighborhood,
    )
    mse, corr = retina.evaluate_straight_line(trained)
    mse0, corr0 = retina.evaluate_straight_line(world)
    print(f"straight-line correlation: {corr:.4f} (untrained {corr0:.4f})")
    out = Path(args.out) if args.out else _out_dir(args) / "retina_world.json"
    save_world(out, trained)
    save_json(
        out.with_suffix(".report.json"),
        {
            "mse": mse,
            "correlation": corr,
            "untrained_mse": mse0,
            "untrained_correlation": corr0,
            "n_waves": args.waves,
        },
    )
    _write_manifest(
        args,
        out.with_suffix(".manifest.json"),
        {
            "grid": [rows, cols],
            "cells": args.cells,
            "waves": args.waves,
            "blur_sigma": args.blur_sigma,
            "wave_sigma": args.wave_sigma,
            "wave_speed": args.wave_speed,
            "neighborhood": args.neighborhood,
        },
        sha256_of(world.positions),
    )
    _ledger(args, {"command": "retina", "correlation": corr, "n_waves": args.waves})
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="oscnet", description=__doc__.split("\n")[0])
    parser.add_argument("--seed", type=int, default=0, help="root seed for all sub-streams")
    parser.add_argument("--out-dir", default=".", help="directory for artifacts and the run ledger")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS thread pools")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward pass, analytic and/or settled ODE")
    p.add_argument("--net", required=True, help="network JSON {n_inputs, n_outputs, weights}")
    p.add_argument("--inputs", required=True, help="comma-separated input values")
    p.add_argument("--mode", choices=("analytic", "ode", "both"), default="analytic")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--stride", type=int, default=1, help="trajectory CSV row stride")
    p.add_argument("--trajectory", default=None, help="trajectory CSV path (ode modes)")
    p.add_argument("--out", default=None, help="result JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convolve", help="normalized image convolution")
    p.add_argument("--image", required=True, help="PGM or CSV image")
    p.add_argument("--kernel", default=None, help="kernel JSON {size, sigma} or {taps, anchor}")
    p.add_argument("--gaussian-size", type=int, default=3)
    p.add_argument("--gaussian-sigma", type=float, default=1.0)
    p.add_argument("--border", choices=("renormalize", "reflect", "zero"), default="renormalize")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("train", help="unsupervised pretraining (hebbian or autoencoder)")
    p.add_argument("--variant", choices=("hebbian", "autoencoder"), required=True)
    _add_data_flags(p)
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--lr-final", type=float, default=0.001)
    p.add_argument("--decay", type=float, default=0.03, help="loser decay coefficient")
    p.add_argument("--deep", action="store_true", help="use the 128-M-128 autoencoder")
    p.add_argument("--ae-lr", type=float, default=0.002)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--protocol", choices=("unsupervised", "finetune"), default="unsupervised")
    p.add_argument("--l2", type=float, default=1e-4)
    _add_data_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kmeans", help="K-means clustering (cosine or euclidean)")
    p.add_argument("--variant", choices=("oscnet", "euclidean"), required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--iters", type=int, default=100)
    _add_data_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_kmeans)

    p = sub.add_parser("regress", help="linear regression (closed form or coordinate descent)")
    p.add_argument("--data-csv", required=True, help="CSV with header, last column = target")
    p.add_argument("--method", choices=("closed", "coord"), default="coord")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=10_000)
    p.add_argument("--order", choices=("cyclic", "random"), default="cyclic")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("retina", help="retina-to-LGN development with retinal waves")
    p.add_argument("--grid", default="16x16")
    p.add_argument("--cells", type=int, default=256)
    p.add_argument("--waves", type=int, default=2000)
    p.add_argument("--blur-sigma", type=float, default=0.03)
    p.add_argument("--wave-sigma", type=float, default=0.5)
    p.add_argument("--wave-speed", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--lr-final", type=float, default=0.05)
    p.add_argument("--decay", type=float, default=0.0)
    p.add_argument("--neighborhood", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_retina)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    from .errors import (
        DegenerateNormalizationError,
        NotConvergedError,
        NotSettledError,
        OscNetError,
    )

    try:
        return args.func(args)
    except DegenerateNormalizationError as err:
        print(f"degenerate normalization: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (NotSettledError, NotConvergedError) as err:
        print(f"did not converge: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (OscNetError, ValueError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
