"""Experiment runners behind the CLI subcommands.

Each runner consumes a parsed config document, writes CSV outputs plus a
theory-overlay CSV and a manifest into an output directory, and returns a
small summary dict for programmatic callers (tests, notebooks).
"""

import json
import math
from pathlib import Path

import numpy as np

from . import __version__ as _version
from . import dataio, nets, stats, theory, train as trainmod
from .attack import AttackSpec, operator_norm, pgd_attack, single_sign_attack
from .parallel import pmap
from .theory import INF

# ---------------------------------------------------------------- config glue


def network_from_doc(doc: dict) -> nets.NetworkConfig:
    try:
        return nets.NetworkConfig(
            d=int(doc["d"]), K=int(doc["K"]), L=int(doc["L"]), N=int(doc["N"]),
            sigma_w2=float(doc["sigma_w2"]), sigma_b2=float(doc.get("sigma_b2", 0.0)),
            u=float(doc.get("u", 1.0)), v=float(doc.get("v", 0.0)),
            arch=doc.get("arch", nets.VANILLA))
    except (KeyError, TypeError, ValueError) as e:
        raise dataio.ConfigError(f"bad network config: {e}") from e


def attack_from_doc(doc: dict, seed: int = 0) -> AttackSpec:
    try:
        pair = (dataio.norm_from_json(doc["p"]), dataio.norm_from_json(doc["q"]))
        return AttackSpec(pair=pair, eps=float(doc["eps"]), iters=int(doc.get("iters", 50)),
                          restarts=int(doc.get("restarts", 3)),
                          step_scale=float(doc.get("step_scale", 2.5)),
                          seed=int(doc.get("seed", seed)))
    except (KeyError, TypeError, ValueError) as e:
        raise dataio.ConfigError(f"bad attack config: {e}") from e


def _dataset_from_doc(doc: dict, subset_override=None) -> dataio.Dataset:
    if doc is None:
        raise dataio.ConfigError("this subcommand needs a 'dataset' section")
    if "synthetic" in doc:
        s = doc["synthetic"]
        ds = dataio.make_synthetic(n=int(s.get("n", 8192)), side=int(s.get("side", 28)),
                                   classes=int(s.get("classes", 10)), seed=int(s.get("seed", 0)))
    else:
        try:
            ds = dataio.load_idx(doc["images"], doc["labels"], doc.get("name", ""))
        except KeyError as e:
            raise dataio.ConfigError(f"dataset config missing {e}") from e
    subset = subset_override if subset_override is not None else doc.get("subset")
    if subset:
        ds = ds.subset(int(subset), seed=doc.get("shuffle_seed"))
    return ds


def write_manifest(out_dir: Path, subcommand: str, cfg: dict, seed: int, threads: int):
    doc = {"schema": dataio.MANIFEST_SCHEMA, "subcommand": subcommand,
           "artifact_version": _version, "seed": seed, "threads": threads,
           "config": cfg,
           "notes": "robust-eval uses multi-restart PGD on the output-deviation loss"}
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _probe_inputs(cfg: nets.NetworkConfig, count: int, seed: int) -> list:
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(0xA11CE,))))
    return [dataio.normalize_sqrt_d(rng.standard_normal(cfg.d)) for _ in range(count)]


# ------------------------------------------------------------ sample-jacobian


def run_sample_jacobian(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    net_cfg = network_from_doc(cfg["network"])
    mc = cfg.get("mc", {})
    seed = int(cfg["seed"])
    if int(mc.get("replicates", 2000)) < 50:
        raise dataio.ConfigError("sample-jacobian needs at least 50 replicates "
                                 "for the goodness-of-fit report")
    plan = stats.MCPlan(
        replicates=int(mc.get("replicates", 2000)),
        base_seed=seed,
        config=net_cfg,
        inputs=_probe_inputs(net_cfg, int(mc.get("probes", 2)), seed),
        slope_entries=[tuple(e) for e in mc.get("slope_entries", [[0, 0]])],
        offset_entries=list(mc.get("offset_entries", [0])))
    samples = stats.sample_entries(plan, workers=threads)
    labels = plan.column_labels()

    tp = theory.from_config(net_cfg)
    var_J = tp.omega ** tp.L / tp.d
    var_a = tp.alpha * tp.sigma_b2 * theory.geometric_series(tp.omega, tp.L)

    rows = [(r, c, samples[r, c]) for c in range(samples.shape[1]) for r in range(plan.replicates)]
    dataio.write_csv(rows, out_dir / "samples.csv", columns=dataio.CSV_SCHEMAS["MCSample"])

    fit_rows, reports = [], {}
    for c, label in enumerate(labels):
        tvar = var_J if label.startswith("J") else var_a
        rep = stats.ks_test(samples[:, c], 0.0, tvar)
        reports[label] = rep
        fit_rows.append({"probe": c, "label": label,
                         "sample_mean": rep.sample_mean, "sample_var": rep.sample_var,
                         "theory_mean": 0.0, "theory_var": tvar,
                         "ks_statistic": rep.ks_statistic,
                         "ks_threshold_at_0_01": rep.ks_threshold_at_0_01,
                         "pass": rep.passed})
    dataio.write_csv(fit_rows, out_dir / "fit.csv")
    dataio.write_csv([{"probe": c, "label": l,
                       "mean": 0.0, "var": var_J if l.startswith("J") else var_a}
                      for c, l in enumerate(labels)], out_dir / "samples_theory.csv")
    write_manifest(out_dir, "sample-jacobian", cfg, seed, threads)
    return {"samples": samples, "labels": labels, "reports": reports,
            "var_J": var_J, "var_a": var_a}


# ---------------------------------------------------------------- bound-sweep


def _bound_sample(net_cfg: nets.NetworkConfig, seed: int, sample: int,
                  pairs: tuple, eps: float, iters: int, restarts: int) -> list:
    net_seed = stats.replicate_seed(seed, sample)
    net = nets.sample_network(net_cfg, net_seed)
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(net_seed, spawn_key=(1,))))
    x = dataio.normalize_sqrt_d(rng.standard_normal(net_cfg.d))
    out = []
    for pair in pairs:
        spec = AttackSpec(pair=pair, eps=eps, iters=iters, restarts=restarts, seed=net_seed)
        out.append(pgd_attack(net, x, spec).loss)
    return out


def run_bound_sweep(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    base = dict(cfg["network"])
    sweep = cfg.get("sweep", {})
    seed = int(cfg["seed"])
    atk = cfg.get("attack", {})
    eps = float(atk.get("eps", 0.1))
    iters = int(atk.get("iters", 50))
    restarts = int(atk.get("restarts", 3))
    d_values = [int(d) for d in sweep.get("d_values", [base["d"]])]
    pairs = tuple((dataio.norm_from_json(p), dataio.norm_from_json(q))
                  for p, q in sweep.get("pairs", [[2, "inf"]]))
    n_samples = int(sweep.get("samples", 30))

    summary_rows, sample_rows, theory_rows = [], [], []
    results = {}
    for di, d in enumerate(d_values):
        base["d"] = d
        net_cfg = network_from_doc(base)
        tp = theory.from_config(net_cfg)
        args = [(net_cfg, seed + 7919 * di, s, pairs, eps, iters, restarts)
                for s in range(n_samples)]
        losses = np.array(pmap(_bound_sample, args, threads))   # n_samples x len(pairs)
        for pi, pair in enumerate(pairs):
            bound = theory.adv_loss_bound(tp, pair, eps)
            col = losses[:, pi]
            summary_rows.append((d, net_cfg.K, net_cfg.N, net_cfg.L,
                                 dataio.norm_to_json(pair[0]), dataio.norm_to_json(pair[1]),
                                 eps, col.mean(), col.std(), bound))
            theory_rows.append((d, net_cfg.K, net_cfg.N, net_cfg.L,
                                dataio.norm_to_json(pair[0]), dataio.norm_to_json(pair[1]),
                                eps, bound, 0.0, bound))
            for s, loss in enumerate(col):
                sample_rows.append({"d": d, "p": dataio.norm_to_json(pair[0]),
                                    "q": dataio.norm_to_json(pair[1]), "sample": s,
                                    "loss": loss, "bound": bound})
            results[(d, pair)] = (col, bound)
    cols = dataio.CSV_SCHEMAS["BoundSweep"]
    dataio.write_csv(summary_rows, out_dir / "bounds.csv", columns=cols)
    dataio.write_csv(theory_rows, out_dir / "bounds_theory.csv", columns=cols)
    dataio.write_csv(sample_rows, out_dir / "bound_samples.csv")
    write_manifest(out_dir, "bound-sweep", cfg, seed, threads)
    return results


# ------------------------------------------------------------- equality-check


def run_equality_check(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    net_cfg = network_from_doc(cfg["network"])
    sweep = cfg.get("sweep", {})
    seed = int(cfg["seed"])
    atk = cfg.get("attack", {})
    eps = float(atk.get("eps", 1e-3))
    iters = int(atk.get("iters", 50))
    restarts = int(atk.get("restarts", 3))
    pairs = tuple((dataio.norm_from_json(p), dataio.norm_from_json(q))
                  for p, q in sweep.get("pairs", [[2, "inf"], ["inf", "inf"]]))
    n_samples = int(sweep.get("samples", 30))
    tp = theory.from_config(net_cfg)

    args = [(net_cfg, seed, s, pairs, eps, iters, restarts) for s in range(n_samples)]
    losses = np.array(pmap(_bound_sample, args, threads))
    rows, ratios = [], {}
    for pi, pair in enumerate(pairs):
        bound = theory.adv_loss_bound(tp, pair, eps)
        ratio = losses[:, pi] / bound
        ratios[pair] = ratio
        for s in range(n_samples):
            rows.append({"p": dataio.norm_to_json(pair[0]), "q": dataio.norm_to_json(pair[1]),
                         "sample": s, "achieved": losses[s, pi], "bound": bound,
                         "ratio": ratio[s]})
    dataio.write_csv(rows, out_dir / "equality.csv")
    dataio.write_csv([{"p": dataio.norm_to_json(p_), "q": dataio.norm_to_json(q_),
                       "bound": theory.adv_loss_bound(tp, (p_, q_), eps)}
                      for (p_, q_) in pairs], out_dir / "equality_theory.csv")
    write_manifest(out_dir, "equality-check", cfg, seed, threads)
    return ratios


# --------------------------------------------------------------------- evolve


def _train_mode_to_evolution(net_cfg: nets.NetworkConfig, mode: str):
    if mode == trainmod.L2REG:
        return theory.L2_REG
    if net_cfg.arch == nets.RESIDUAL:
        return theory.ADV_RESIDUAL
    return theory.ADV_VANILLA


def evolve_overlay(net_cfg: nets.NetworkConfig, trace: trainmod.TrainTrace,
                   mode: str, eps: float, pair) -> list:
    """Theory sigma_w2(t) at the logged times, anchored at the measured init."""
    tp = theory.from_config(net_cfg)
    init = float(trace.column("sigma_w2")[0])
    ts = trace.column("t")
    if mode in (trainmod.STANDARD,):
        return [(t, init) for t in ts]
    spec = theory.EvolutionSpec(mode=_train_mode_to_evolution(net_cfg, mode), eps=eps,
                                pair=pair, init=init, params=tp)
    return [(t, theory.sigma_w2_at(spec, float(t))) for t in ts]


def _train_from_doc(doc: dict, seed: int) -> trainmod.TrainSpec:
    try:
        mode = doc.get("mode", trainmod.STANDARD)
        attack = None
        if mode == trainmod.ADV_PGD:
            attack = attack_from_doc(doc["attack"], seed)
        pair = (INF, INF)
        if "p" in doc:
            pair = (dataio.norm_from_json(doc["p"]), dataio.norm_from_json(doc["q"]))
        elif attack is not None:
            pair = attack.pair
        return trainmod.TrainSpec(
            mode=mode, optimizer=doc.get("optimizer", trainmod.SGD),
            lr=float(doc.get("lr", 1e-3)), steps=int(doc.get("steps", 100)),
            batch=int(doc.get("batch", 128)), metric_every=int(doc.get("metric_every", 10)),
            seed=int(doc.get("seed", seed)), eps=float(doc.get("eps", 0.0)), pair=pair,
            attack=attack, early_stop_patience=int(doc.get("early_stop_patience", 0)))
    except (KeyError, TypeError, ValueError) as e:
        raise dataio.ConfigError(f"bad train config: {e}") from e


def run_evolve(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg["seed"])
    ds = _dataset_from_doc(cfg.get("dataset"), cfg.get("subset"))
    base = dict(cfg["network"])
    base.setdefault("d", ds.d)
    net_cfg = network_from_doc(base)
    spec = _train_from_doc(cfg.get("train", {}), seed)
    net = nets.sample_network(net_cfg, seed)
    trace = trainmod.train(net, ds.images, ds.labels, spec)
    dataio.write_csv(trace.rows, out_dir / "trace.csv", columns=trainmod.TrainTrace.columns)
    overlay = evolve_overlay(net_cfg, trace, spec.mode, spec.eps, spec.pair)
    dataio.write_csv(overlay, out_dir / "trace_theory.csv", columns=("t", "sigma_w2"))
    write_manifest(out_dir, "evolve", cfg, seed, threads)
    return {"trace": trace, "overlay": overlay}


# -------------------------------------------------------- trainability-heatmap


def _heatmap_cell(base_doc: dict, L: int, N: int, train_doc: dict, mode: str,
                  lr_values: list, ds_doc: dict, subset, seed: int) -> tuple:
    """One grid cell: train once per candidate lr, keep the best final accuracy."""
    doc = dict(base_doc)
    doc["L"], doc["N"] = L, N
    ds = _dataset_from_doc(ds_doc, subset)
    doc.setdefault("d", ds.d)
    net_cfg = network_from_doc(doc)
    best = None
    for lr in lr_values:
        tdoc = dict(train_doc)
        tdoc["mode"] = mode
        tdoc["lr"] = lr
        spec = _train_from_doc(tdoc, seed)
        net = nets.sample_network(net_cfg, seed)
        trace = trainmod.train(net, ds.images, ds.labels, spec)
        final_acc = trainmod.evaluate_accuracy(trace.net, ds.images, ds.labels)
        if best is None or final_acc > best[3]:
            best = (mode, L, N, final_acc, trace.rows[-1][0], lr)
    return best


def run_trainability_heatmap(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg["seed"])
    sweep = cfg.get("sweep", {})
    L_values = [int(v) for v in sweep.get("L_values", [5, 10, 15, 20])]
    N_values = [int(v) for v in sweep.get("N_values", [128, 256, 512, 1024])]
    modes = sweep.get("modes", [trainmod.ADV_PGD, trainmod.STANDARD])
    train_doc = cfg.get("train", {})
    lr_values = [float(v) for v in sweep.get("lr_values", [train_doc.get("lr", 1e-3)])]
    args = [(cfg["network"], L, N, train_doc, mode, lr_values, cfg.get("dataset"),
             cfg.get("subset"), seed)
            for mode in modes for L in L_values for N in N_values]
    cells = pmap(_heatmap_cell, args, threads)
    dataio.write_csv(cells, out_dir / "heatmap.csv",
                     columns=("mode", "L", "N", "train_acc", "steps_run", "lr"))

    # overlay: depth at which the decay time T(L, N) crosses the reference
    # horizon, per width
    m = float(sweep.get("m", 1e-4))
    T_ref = float(sweep.get("T_ref", 160.0))
    tdoc = dict(train_doc)
    tdoc.setdefault("mode", trainmod.ADV_PGD)
    atk = tdoc.get("attack", {})
    eps = float(atk.get("eps", 0.3))
    pair = (dataio.norm_from_json(atk.get("p", "inf")), dataio.norm_from_json(atk.get("q", "inf")))
    boundary = []
    ds_d = int(cfg["network"].get("d", 784))
    a = theory.alpha(float(cfg["network"].get("u", 1.0)), float(cfg["network"].get("v", 0.0)))
    for N in N_values:
        Lb = _boundary_depth(a, eps, pair, ds_d, int(cfg["network"].get("K", 10)), N, m, T_ref)
        boundary.append((N, Lb))
    dataio.write_csv(boundary, out_dir / "heatmap_theory.csv", columns=("N", "L_boundary"))
    write_manifest(out_dir, "trainability-heatmap", cfg, seed, threads)
    return {"cells": cells, "boundary": boundary}


def _boundary_depth(a, eps, pair, d, K, N, m, T_ref, L_max=512):
    """Smallest depth whose trainable-band exit time falls below T_ref."""
    tp = lambda L: theory.TheoryParams(alpha=a, omega=1.0, arch=nets.VANILLA,
                                       L=L, N=N, d=d, K=K)
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("ignore", theory.AssumptionWarning)
        for L in range(1, L_max + 1):
            if theory.untrainable_T_vanilla(tp(L), pair, eps, m) <= T_ref:
                return L
    return math.inf


# ------------------------------------------------------------------- capacity


def run_capacity(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg["seed"])
    ds = _dataset_from_doc(cfg.get("dataset"), cfg.get("subset"))
    base = dict(cfg["network"])
    base.setdefault("d", ds.d)
    net_cfg = network_from_doc(base)
    spec = _train_from_doc(cfg.get("train", {}), seed)
    net = nets.sample_network(net_cfg, seed)
    trace = trainmod.train(net, ds.images, ds.labels, spec)
    dataio.write_csv(trace.rows, out_dir / "trace.csv", columns=trainmod.TrainTrace.columns)
    tp = theory.from_config(net_cfg)
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("ignore", theory.AssumptionWarning)
        overlay = [(t, theory.fisher_rao_expected(tp, spec.pair, spec.eps, float(t)))
                   for t in trace.column("t")]
    dataio.write_csv(overlay, out_dir / "capacity_theory.csv", columns=("t", "fr_expected"))
    write_manifest(out_dir, "capacity", cfg, seed, threads)
    return {"trace": trace, "overlay": overlay}


# ------------------------------------------------------------------ flip-prob


def _flip_replicate(net_cfg: nets.NetworkConfig, base_seed: int, r: int, eps: float) -> float:
    net_seed = stats.replicate_seed(base_seed, r)
    net = nets.sample_network(net_cfg, net_seed)
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(net_seed, spawn_key=(2,))))
    x = dataio.normalize_sqrt_d(rng.standard_normal(net_cfg.d))
    flipped, _ = single_sign_attack(net, x, eps)
    return float(flipped)


def run_flip_prob(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg["seed"])
    net_cfg = network_from_doc(cfg["network"])
    sweep = cfg.get("sweep", {})
    eps_values = [float(e) for e in sweep.get("eps_values", [0.05])]
    replicates = int(cfg.get("mc", {}).get("replicates", 500))
    tp = theory.from_config(net_cfg)
    rows, rates = [], {}
    for eps in eps_values:
        flips = pmap(_flip_replicate, [(net_cfg, seed, r, eps) for r in range(replicates)],
                     threads)
        rate = float(np.mean(flips))
        pred = theory.flip_probability(tp, eps)
        rows.append({"d": net_cfg.d, "K": net_cfg.K, "N": net_cfg.N, "L": net_cfg.L,
                     "sigma_b2": net_cfg.sigma_b2, "eps": eps,
                     "success_rate": rate, "prediction": pred})
        rates[eps] = (rate, pred)
    dataio.write_csv(rows, out_dir / "flip.csv")
    dataio.write_csv([{"eps": e, "prediction": theory.flip_probability(tp, e)}
                      for e in eps_values], out_dir / "flip_theory.csv")
    write_manifest(out_dir, "flip-prob", cfg, seed, threads)
    return rates


# ------------------------------------------------------------ opnorm-selftest


def brute_force_operator_norm(J: np.ndarray, pair) -> float:
    """Independent oracle for the tractable operator norms on small matrices.

    p = 1: enumerate the signed coordinate vertices of the source ball.
    p = inf: enumerate all 2^d sign vectors (hence the small-d limit).
    (2, 2): SVD.  (2, inf): the maximizer of a max of |<row, eta>| over the
    l2 ball is a normalized row, so enumerate those candidates.
    """
    p, q = pair
    J = np.asarray(J, dtype=np.float64)
    K, d = J.shape
    def qn(v):
        if q == 1:
            return np.abs(v).sum()
        if q == 2:
            return np.linalg.norm(v)
        return np.abs(v).max()
    if p == 1:
        return max(qn(s * J[:, j]) for j in range(d) for s in (1.0, -1.0))
    if p == INF:
        if d > 20:
            raise ValueError("sign enumeration is limited to small d")
        best = 0.0
        for bits in range(2 ** d):
            eta = np.array([1.0 if (bits >> k) & 1 else -1.0 for k in range(d)])
            best = max(best, qn(J @ eta))
        return best
    if (p, q) == (2, 2):
        return float(np.linalg.svd(J, compute_uv=False)[0])
    if (p, q) == (2, INF):
        best = 0.0
        for i in range(K):
            nrm = np.linalg.norm(J[i])
            if nrm > 0:
                best = max(best, qn(J @ (J[i] / nrm)))
        return best
    raise ValueError(f"no brute-force oracle for (p={p}, q={q})")


def run_opnorm_selftest(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg.get("seed", 0))
    trials = int(cfg.get("trials", 100))
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed)))
    worst = {pair: 0.0 for pair in theory.SUPPORTED_PAIRS}
    for _ in range(trials):
        K = int(rng.integers(1, 9))
        d = int(rng.integers(1, 9))
        J = rng.standard_normal((K, d))
        for pair in theory.SUPPORTED_PAIRS:
            a = operator_norm(J, pair)
            b = brute_force_operator_norm(J, pair)
            worst[pair] = max(worst[pair], abs(a - b) / max(abs(b), 1e-300))
    rows = []
    ok = True
    for pair, err in worst.items():
        tol = 1e-4 if pair == (2, 2) else 1e-6
        rows.append({"p": dataio.norm_to_json(pair[0]), "q": dataio.norm_to_json(pair[1]),
                     "trials": trials, "max_rel_err": err, "tol": tol, "pass": err <= tol})
        ok = ok and err <= tol
    dataio.write_csv(rows, out_dir / "opnorm.csv")
    write_manifest(out_dir, "opnorm-selftest", cfg, seed, threads)
    return {"worst": worst, "ok": ok}


# ---------------------------------------------------------------- robust-eval


def run_robust_eval(cfg: dict, out_dir: Path, threads: int = 1) -> dict:
    seed = int(cfg["seed"])
    ds = _dataset_from_doc(cfg.get("dataset"), cfg.get("subset"))
    base = dict(cfg["network"])
    base.setdefault("d", ds.d)
    net_cfg = network_from_doc(base)
    spec = _train_from_doc(cfg.get("train", {}), seed)
    net = nets.sample_network(net_cfg, seed)
    trace = trainmod.train(net, ds.images, ds.labels, spec)

    ev = cfg.get("eval", {})
    eval_spec = AttackSpec(
        pair=(dataio.norm_from_json(ev.get("p", "inf")), dataio.norm_from_json(ev.get("q", "inf"))),
        eps=float(ev.get("eps", 0.1)), iters=int(ev.get("iters", 50)),
        restarts=int(ev.get("restarts", 5)), seed=seed + 1)
    n_eval = int(ev.get("samples", min(512, ds.n)))
    X, y = ds.images[:n_eval], ds.labels[:n_eval]
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(3,))))
    from .attack import pgd_attack_batch
    eta = pgd_attack_batch(trace.net, X, eval_spec, rng)
    clean = trainmod.evaluate_accuracy(trace.net, X, y)
    adv_out = nets.forward_batch(trace.net, X + eta).out
    robust = float((adv_out.argmax(axis=1) == y).mean())
    rows = [{"arch": net_cfg.arch, "L": net_cfg.L, "N": net_cfg.N,
             "train_mode": spec.mode, "clean_acc": clean, "robust_acc": robust,
             "eval_eps": eval_spec.eps, "eval_samples": n_eval}]
    dataio.write_csv(rows, out_dir / "robust.csv")
    dataio.write_csv(trace.rows, out_dir / "trace.csv", columns=trainmod.TrainTrace.columns)
    write_manifest(out_dir, "robust-eval", cfg, seed, threads)
    return {"clean": clean, "robust": robust}


RUNNERS = {
    "sample-jacobian": run_sample_jacobian,
    "bound-sweep": run_bound_sweep,
    "equality-check": run_equality_check,
    "evolve": run_evolve,
    "trainability-heatmap": run_trainability_heatmap,
    "capacity": run_capacity,
    "flip-prob": run_flip_prob,
    "opnorm-selftest": run_opnorm_selftest,
    "robust-eval": run_robust_eval,
}
