"""Command-line entry point wiring corpus generation, the three training
stages, stylization, evaluation, and benchmarking.

Exit codes: 0 success, 2 usage, 3 data error, 4 mode mismatch, 5 diverged.
Value precedence everywhere: explicit flags > config file > profile >
built-in defaults; every run writes a resolved-config snapshot beside its
outputs. Logs go to stderr, machine-readable results to ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import ModelBundle, load_norm_stats, save_norm_stats
from .checkpoint import load_checkpoint, save_checkpoint
from .codec import MotionCodec, train_codec
from .errors import (DataError, Diverged, IoError, MissingCodec,
                     ModeMismatch, MotionStyleError, OutOfRange, TooFew,
                     UnsupervisedModel)
from .evaluation import (benchmark_forward, evaluate_protocol,
                         train_classifier)
from .globalmotion import GlobalMotionPredictor, train_gmp
from .inference import (interpolate_styles, style_code_from_motion,
                        stylize_label_based, stylize_motion_based,
                        stylize_prior_based)
from .kinematics import mpjpe_mm
from .motionio import load_corpus, load_motion, save_corpus, save_motion
from .pose import PoseSequence, denormalize, fit_norm_stats, znormalize
from .skeleton import Skeleton
from .stylizer import Stylizer
from .synthetic import build_corpus
from .trainer import (TrainConfig, augment_mirror, train_stylizer,
                      training_provenance)

# ---------------------------------------------------------------------------
# profiles: named default sets. "desk" trains in minutes on one CPU core;
# "paper" mirrors the full-scale architecture dimensions.

PROFILES: dict[str, dict[str, dict]] = {
    "desk": {
        "train-codec": {"variant": "ae", "latent_dim": 96, "hidden": 96,
                        "steps": 8000, "batch": 16, "window": 64,
                        "lr": 1e-3, "warmup": 50, "reg_weight": 1e-3},
        "train-gmp": {"hidden": 64, "steps": 800, "batch": 16,
                      "window": 64, "lr": 1e-3},
        "train-stylizer": {"content_dim": 64, "style_dim": 48, "hidden": 96,
                           "label_dim": 32, "steps": 2000, "batch": 16,
                           "window": 64, "lr": 3e-4, "warmup": 100},
        "evaluate": {"classifier_steps": 600, "classifier_hidden": 64},
    },
    "paper": {
        "train-codec": {"variant": "ae", "latent_dim": 512, "hidden": 384,
                        "steps": 100000, "batch": 32, "window": 64,
                        "lr": 1e-3, "warmup": 500, "reg_weight": 1e-3},
        "train-gmp": {"hidden": 128, "steps": 20000, "batch": 32,
                      "window": 64, "lr": 1e-3},
        "train-stylizer": {"content_dim": 512, "style_dim": 512,
                           "hidden": 512, "label_dim": 64, "steps": 50000,
                           "batch": 32, "window": 64, "lr": 1e-4,
                           "warmup": 500},
        "evaluate": {"classifier_steps": 2000, "classifier_hidden": 128},
    },
}


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _read_config_file(path: str | None, command: str) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise IoError(f"cannot read config file {p}: {exc}") from exc
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IoError(f"bad JSON in {p}: {exc}") from exc
    else:
        try:
            import tomllib as toml          # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as toml
        try:
            data = toml.loads(text)
        except toml.TOMLDecodeError as exc:
            raise IoError(f"bad TOML in {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise IoError(f"config file {p} must hold a table/object at top level")
    # flat keys apply to every command; a table named after the command
    # (dashes or underscores) overrides them
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    for name in (command, command.replace("-", "_")):
        if isinstance(data.get(name), dict):
            flat.update(data[name])
    return flat


def _resolve(args: argparse.Namespace, command: str,
             defaults: dict) -> dict:
    """flags > config file > profile > built-in defaults."""
    cfg = _read_config_file(getattr(args, "config", None), command)
    profile_name = getattr(args, "profile", None) or cfg.get("profile") or "desk"
    if profile_name not in PROFILES:
        raise OutOfRange(
            f"unknown profile {profile_name!r}, expected one of "
            f"{sorted(PROFILES)}")
    profile = PROFILES[profile_name].get(command, {})
    resolved = {"profile": profile_name}
    for key, default in defaults.items():
        val = getattr(args, key, None)
        if val is None:
            if key in cfg:
                val = cfg[key]
            elif key in profile:
                val = profile[key]
            else:
                val = default
        resolved[key] = val
    return resolved


def _write_snapshot(out: Path, command: str, resolved: dict) -> None:
    """Provenance record beside the command's outputs."""
    snap = {
        "command": command,
        "resolved": {k: v for k, v in resolved.items()},
        "package_version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if out.suffix:                                  # file-like target
        path = out.with_name(out.stem + ".resolved.json")
    else:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "resolved_config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(snap, indent=2, default=str) + "\n")


def _write_curves(path: Path, rows: list[dict], columns: list[str],
                  header: list[str] | None = None) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header or columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])


# ---------------------------------------------------------------------------
# checkpoint directory helpers (single-model dirs produced by train-codec /
# train-gmp; full bundles are handled by ModelBundle)


def _save_codec_dir(out: Path, codec: MotionCodec, stats, skeleton) -> None:
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "codec", codec.meta(), codec.state_dict())
    save_norm_stats(stats, out / "norm_stats.json")
    skeleton.save(out / f"{skeleton.name}.skeleton.json")


def _load_codec_dir(path: Path):
    base = path / "codec"
    if not (path / "codec.json").exists():
        raise MissingCodec(f"no codec checkpoint under {path}")
    meta, tensors = load_checkpoint(base)
    codec = MotionCodec.from_meta(meta)
    codec.load_state_dict(tensors)
    codec.freeze()
    stats = load_norm_stats(path / "norm_stats.json")
    skel_files = sorted(path.glob("*.skeleton.json"))
    if not skel_files:
        raise IoError(f"no skeleton file under {path}")
    return codec, stats, Skeleton.load(skel_files[0])


def _load_gmp_dir(path: Path) -> GlobalMotionPredictor:
    if not (path / "gmp.json").exists():
        raise IoError(f"no global-motion checkpoint under {path}")
    meta, tensors = load_checkpoint(path / "gmp")
    gmp = GlobalMotionPredictor.from_meta(meta)
    gmp.load_state_dict(tensors)
    gmp.freeze()
    return gmp


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_corpus(args) -> int:
    resolved = _resolve(args, "gen-corpus", {
        "styles": 4, "contents": 4, "per_cell": 25, "length": 160,
        "fps": 30.0, "seed": 0})
    out = Path(args.out)
    t0 = time.time()
    corpus = build_corpus(
        clips_per_cell=int(resolved["per_cell"]),
        n_frames=int(resolved["length"]), fps=float(resolved["fps"]),
        seed=int(resolved["seed"]), n_styles=int(resolved["styles"]),
        n_contents=int(resolved["contents"]))
    save_corpus(corpus, out)
    _write_snapshot(out, "gen-corpus", resolved)
    _log(f"gen-corpus: {len(corpus.train)} train + {len(corpus.test)} test "
         f"clips ({corpus.n_styles} styles x {corpus.n_contents} contents) "
         f"-> {out} in {time.time() - t0:.1f}s")
    return 0


def cmd_train_codec(args) -> int:
    resolved = _resolve(args, "train-codec", {
        "variant": "ae", "latent_dim": 96, "hidden": 96, "steps": 8000,
        "batch": 16, "window": 64, "lr": 1e-3, "warmup": 50,
        "reg_weight": 1e-3, "seed": 0})
    corpus = load_corpus(args.corpus)
    stats = fit_norm_stats(corpus.train)
    normed = [znormalize(s, stats) for s in corpus.train]
    rng = np.random.default_rng(int(resolved["seed"]))
    codec = MotionCodec(corpus.skeleton.feature_dim,
                        latent_dim=int(resolved["latent_dim"]),
                        hidden=int(resolved["hidden"]),
                        variant=str(resolved["variant"]), rng=rng)
    t0 = time.time()
    w = float(resolved["reg_weight"])   # one knob sets every regularizer term
    history = train_codec(
        codec, normed, steps=int(resolved["steps"]),
        batch=int(resolved["batch"]), window=int(resolved["window"]),
        lr=float(resolved["lr"]), warmup=int(resolved["warmup"]),
        kld_weight=w, l1_weight=w, sms_weight=w, rng=rng, log=_log)
    out = Path(args.out)
    _save_codec_dir(out, codec, stats, corpus.skeleton)
    if history:
        _write_curves(out / "curves.csv", history,
                      ["step", "loss", "rec", "reg"])
    # held-out reconstruction quality, reported for the log + snapshot
    errs = []
    for seq in corpus.test[:16]:
        n = znormalize(seq, stats)
        z = codec.encode(n.frames.T[None])
        rec = codec.decode(z.mu, t_out=n.length)[0].T
        rec_seq = denormalize(PoseSequence(
            frames=np.ascontiguousarray(rec, dtype=np.float32), fps=seq.fps,
            skeleton=seq.skeleton, normalized=True), stats)
        errs.append(mpjpe_mm(rec_seq, seq))
    resolved["heldout_mpjpe_mm"] = float(np.mean(errs)) if errs else None
    _write_snapshot(out, "train-codec", resolved)
    _log(f"train-codec: {resolved['variant']} latent={resolved['latent_dim']} "
         f"steps={resolved['steps']} heldout MPJPE "
         f"{resolved['heldout_mpjpe_mm']:.1f} mm in {time.time() - t0:.1f}s")
    return 0


def cmd_train_gmp(args) -> int:
    resolved = _resolve(args, "train-gmp", {
        "hidden": 64, "steps": 800, "batch": 16, "window": 64, "lr": 1e-3,
        "seed": 0})
    corpus = load_corpus(args.corpus)
    if args.codec:
        _, stats, _ = _load_codec_dir(Path(args.codec))
    else:
        stats = fit_norm_stats(corpus.train)
    normed = [znormalize(s, stats) for s in corpus.train]
    rng = np.random.default_rng(int(resolved["seed"]))
    local_dim = corpus.skeleton.feature_dim - 8     # minus root + contacts
    gmp = GlobalMotionPredictor(local_dim, hidden=int(resolved["hidden"]),
                                rng=rng)
    t0 = time.time()
    history = train_gmp(gmp, normed, steps=int(resolved["steps"]),
                        batch=int(resolved["batch"]),
                        window=int(resolved["window"]),
                        lr=float(resolved["lr"]), rng=rng, log=_log)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "gmp", gmp.meta(), gmp.state_dict())
    if history:
        _write_curves(out / "curves.csv", history, ["step", "loss"])
    _write_snapshot(out, "train-gmp", resolved)
    _log(f"train-gmp: steps={resolved['steps']} final loss "
         f"{history[-1]['loss']:.4f} in {time.time() - t0:.1f}s")
    return 0


def cmd_train_stylizer(args) -> int:
    resolved = _resolve(args, "train-stylizer", {
        "mode": "supervised", "content_dim": 64, "style_dim": 48,
        "hidden": 96, "label_dim": 32, "steps": 2000, "batch": 16,
        "window": 64, "lr": 3e-4, "warmup": 100, "seed": 0,
        "mirror": True, "no_latent": False, "no_prob_style": False,
        "no_homo_style": False, "no_autoencoding": False, "no_cycle": False,
        "prob_content": False, "end_to_end": False,
        "w_hsa": None, "w_cyc": None, "w_kl": None})
    corpus = load_corpus(args.corpus)
    no_latent = bool(resolved["no_latent"])
    if args.codec:
        codec, stats, skeleton = _load_codec_dir(Path(args.codec))
    elif no_latent:
        codec = MotionCodec(corpus.skeleton.feature_dim, variant="none")
        stats = fit_norm_stats(corpus.train)
        skeleton = corpus.skeleton
    elif bool(resolved["end_to_end"]):
        # joint training from scratch: a fresh codec learns alongside the
        # stylizer under the stylization objective alone
        cdef = PROFILES.get(str(resolved["profile"]), {}).get("train-codec", {})
        codec = MotionCodec(corpus.skeleton.feature_dim,
                            latent_dim=int(cdef.get("latent_dim", 96)),
                            hidden=int(cdef.get("hidden", 96)),
                            variant=str(cdef.get("variant", "ae")),
                            rng=np.random.default_rng(int(resolved["seed"]) + 1))
        stats = fit_norm_stats(corpus.train)
        skeleton = corpus.skeleton
    else:
        raise MissingCodec("train-stylizer needs --codec (or --no-latent)")

    raw = augment_mirror(corpus.train) if resolved["mirror"] else corpus.train
    normed = [znormalize(s, stats) for s in raw]
    mode = str(resolved["mode"])
    supervised = mode == "supervised"
    rng = np.random.default_rng(int(resolved["seed"]))
    model = Stylizer(
        codec.latent_dim,
        content_dim=int(resolved["content_dim"]),
        style_dim=int(resolved["style_dim"]),
        hidden=int(resolved["hidden"]),
        n_styles=corpus.n_styles if supervised else 0,
        label_dim=int(resolved["label_dim"]),
        prob_style=not bool(resolved["no_prob_style"]),
        prob_content=bool(resolved["prob_content"]), rng=rng)

    weights = None
    if any(resolved[k] is not None for k in ("w_hsa", "w_cyc", "w_kl")):
        from .trainer import LossWeights
        base = LossWeights.defaults(mode)
        weights = LossWeights(
            hsa=base.hsa if resolved["w_hsa"] is None else float(resolved["w_hsa"]),
            cyc=base.cyc if resolved["w_cyc"] is None else float(resolved["w_cyc"]),
            kl=base.kl if resolved["w_kl"] is None else float(resolved["w_kl"]))
    config = TrainConfig(
        mode=mode, steps=int(resolved["steps"]), batch=int(resolved["batch"]),
        window=int(resolved["window"]), lr=float(resolved["lr"]),
        warmup=int(resolved["warmup"]), seed=int(resolved["seed"]),
        weights=weights,
        no_latent=no_latent,
        no_prob_style=bool(resolved["no_prob_style"]),
        no_homo_style=bool(resolved["no_homo_style"]),
        no_autoencoding=bool(resolved["no_autoencoding"]),
        no_cycle=bool(resolved["no_cycle"]),
        prob_content=bool(resolved["prob_content"]),
        end_to_end=bool(resolved["end_to_end"]))
    t0 = time.time()
    history = train_stylizer(model, codec, normed, config, log=_log)

    gmp = _load_gmp_dir(Path(args.gmp)) if args.gmp else None
    bundle = ModelBundle(codec=codec, stylizer=model, stats=stats,
                         skeleton=skeleton, gmp=gmp,
                         style_names=list(corpus.style_names) if supervised else None,
                         provenance=training_provenance(config))
    out = Path(args.out)
    bundle.save(out)
    _write_curves(out / "curves.csv", history,
                  ["step", "rec", "hsa", "cyc", "kl", "total"],
                  header=["step", "L_rec", "L_hsa", "L_cyc", "L_kl", "total"])
    _write_snapshot(out, "train-stylizer", resolved)
    _log(f"train-stylizer: mode={mode} steps={resolved['steps']} "
         f"final total {history[-1]['total']:.4f} in {time.time() - t0:.1f}s")
    return 0


def _load_motion_for(bundle: ModelBundle, path: str):
    seq = load_motion(path, skeleton=bundle.skeleton)
    return seq


def cmd_stylize(args) -> int:
    resolved = _resolve(args, "stylize", {
        "mode": "motion", "label": None, "seed": 0, "alpha": None,
        "sample": False, "use_gmp": True})
    bundle = ModelBundle.load(args.model)
    content = _load_motion_for(bundle, args.content)
    mode = str(resolved["mode"])
    seed = int(resolved["seed"])
    use_gmp = bool(resolved["use_gmp"])
    label = resolved["label"] if resolved["label"] is None else int(resolved["label"])

    if resolved["alpha"] is not None:
        if not (args.style and args.style_b):
            raise OutOfRange("--alpha interpolation needs --style and --style-b")
        style_a = _load_motion_for(bundle, args.style)
        style_b = _load_motion_for(bundle, args.style_b)
        lab_a = label if label is not None else style_a.style_label
        lab_b = label if label is not None else style_b.style_label
        if not bundle.supervised:
            lab_a = lab_b = None
        code_a = style_code_from_motion(bundle, style_a, label=lab_a, seed=seed)
        code_b = style_code_from_motion(bundle, style_b, label=lab_b, seed=seed)
        out_seq = interpolate_styles(code_a, code_b, float(resolved["alpha"]),
                                     content, bundle, label_a=lab_a,
                                     label_b=lab_b, use_gmp=use_gmp)
    elif mode == "motion":
        if not args.style:
            raise OutOfRange("--mode motion needs --style <file>")
        style = _load_motion_for(bundle, args.style)
        if label is None and bundle.supervised:
            label = style.style_label
        out_seq = stylize_motion_based(content, style, bundle, label=label,
                                       sample=bool(resolved["sample"]),
                                       seed=seed, use_gmp=use_gmp)
    elif mode == "label":
        if not bundle.supervised:
            raise UnsupervisedModel(
                "label-based stylization needs a supervised model")
        if label is None:
            raise OutOfRange("--mode label needs --label <id>")
        out_seq = stylize_label_based(content, label, bundle, seed=seed,
                                      use_gmp=use_gmp)
    elif mode == "prior":
        out_seq = stylize_prior_based(content, bundle, seed=seed,
                                      use_gmp=use_gmp)
    else:
        raise OutOfRange(f"unknown stylize mode {mode!r}")

    out = Path(args.out)
    out_seq.name = out.name
    save_motion(out_seq, out)
    _write_snapshot(out if out.suffix else out.with_suffix(".x"),
                    "stylize", resolved)
    _log(f"stylize: mode={mode} {content.length} frames -> {out}")
    return 0


def cmd_interpolate(args) -> int:
    resolved = _resolve(args, "interpolate", {
        "alpha": 0.5, "label": None, "seed": 0, "use_gmp": True})
    bundle = ModelBundle.load(args.model)
    content = _load_motion_for(bundle, args.content)
    style_a = _load_motion_for(bundle, args.style_a)
    style_b = _load_motion_for(bundle, args.style_b)
    seed = int(resolved["seed"])
    label = resolved["label"] if resolved["label"] is None else int(resolved["label"])
    lab_a = label if label is not None else style_a.style_label
    lab_b = label if label is not None else style_b.style_label
    if not bundle.supervised:
        lab_a = lab_b = None
    code_a = style_code_from_motion(bundle, style_a, label=lab_a, seed=seed)
    code_b = style_code_from_motion(bundle, style_b, label=lab_b, seed=seed)
    out_seq = interpolate_styles(code_a, code_b, float(resolved["alpha"]),
                                 content, bundle, label_a=lab_a, label_b=lab_b,
                                 use_gmp=bool(resolved["use_gmp"]))
    out = Path(args.out)
    out_seq.name = out.name
    save_motion(out_seq, out)
    _write_snapshot(out if out.suffix else out.with_suffix(".x"),
                    "interpolate", resolved)
    _log(f"interpolate: alpha={resolved['alpha']} -> {out}")
    return 0


def cmd_evaluate(args) -> int:
    resolved = _resolve(args, "evaluate", {
        "repeats": 30, "seed": 0, "classifier_steps": 600,
        "classifier_hidden": 64, "diversity_samples": 6, "use_gmp": True})
    bundle = ModelBundle.load(args.model)
    test_corpus = load_corpus(args.test)
    style_corpus = load_corpus(args.styles) if args.styles else test_corpus
    test_seqs = test_corpus.test or test_corpus.train
    style_seqs = style_corpus.test or style_corpus.train
    seed = int(resolved["seed"])

    _log("evaluate: training oracle classifiers...")
    steps = int(resolved["classifier_steps"])
    hidden = int(resolved["classifier_hidden"])
    style_clf = train_classifier(style_corpus.train, "style",
                                 heldout=style_corpus.test, steps=steps,
                                 hidden=hidden, seed=seed + 1)
    content_clf = train_classifier(style_corpus.train, "content",
                                   heldout=style_corpus.test, steps=steps,
                                   hidden=hidden, seed=seed + 2)
    _log(f"evaluate: classifier heldout acc style "
         f"{style_clf.heldout_accuracy:.3f} content "
         f"{content_clf.heldout_accuracy:.3f}")

    report = evaluate_protocol(
        bundle, test_seqs, style_clf, content_clf, style_seqs=style_seqs,
        repeats=int(resolved["repeats"]), seed=seed,
        diversity_samples=int(resolved["diversity_samples"]),
        use_gmp=bool(resolved["use_gmp"]), log=_log)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = report.as_dict()
    payload["classifier_heldout"] = {
        "style": style_clf.heldout_accuracy,
        "content": content_clf.heldout_accuracy,
    }
    out.write_text(json.dumps(payload, indent=2) + "\n")
    csv_path = out.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        names = list(report.per_repeat)
        writer.writerow(["repeat"] + names)
        for i in range(report.repeats):
            writer.writerow([i] + [report.per_repeat[n][i] for n in names])

    if args.dump_features:
        _dump_features(Path(args.dump_features), bundle, test_seqs,
                       style_seqs, style_clf, seed)
    _write_snapshot(out, "evaluate", resolved)
    means = "  ".join(f"{k} {v:.4f}" for k, v in report.mean.items())
    _log(f"evaluate: {means}")
    _log(f"evaluate: report -> {out} (+ {csv_path.name})")
    return 0


def _dump_features(path: Path, bundle, test_seqs, style_seqs, style_clf,
                   seed: int) -> None:
    """Penultimate features of real + stylized clips, for external t-SNE."""
    rng = np.random.default_rng(seed)
    rows = []
    real_feats = style_clf.features(test_seqs)
    for seq, feat in zip(test_seqs, real_feats):
        rows.append(["real", seq.style_label, seq.content_label] + feat.tolist())
    styles = np.array([s.style_label for s in style_seqs])
    outputs, labels = [], []
    for seq in test_seqs:
        cands = np.flatnonzero(styles != seq.style_label)
        j = int(cands[rng.integers(len(cands))]) if cands.size else int(rng.integers(len(style_seqs)))
        lab = int(styles[j]) if bundle.supervised else None
        outputs.append(stylize_motion_based(seq, style_seqs[j], bundle, label=lab))
        labels.append((styles[j], seq.content_label))
    out_feats = style_clf.features(outputs)
    for (slab, clab), feat in zip(labels, out_feats):
        rows.append(["stylized", slab, clab] + feat.tolist())
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        dim = len(rows[0]) - 3
        writer.writerow(["kind", "style_label", "content_label"]
                        + [f"f{i}" for i in range(dim)])
        writer.writerows(rows)


def cmd_bench(args) -> int:
    resolved = _resolve(args, "bench", {
        "frames": 160, "repeats": 20, "seed": 0, "no_latent_baseline": True,
        "kernels": False})
    bundle = ModelBundle.load(args.model)
    t = int(resolved["frames"])
    repeats = int(resolved["repeats"])
    seed = int(resolved["seed"])
    report: dict = {"frames": t, "repeats": repeats}

    _log(f"bench: latent pipeline, T={t}...")
    report["latent"] = benchmark_forward(bundle, t=t, repeats=repeats,
                                         seed=seed)
    if resolved["no_latent_baseline"]:
        _log("bench: no_latent baseline (identity codec, pose-space stylizer)...")
        rng = np.random.default_rng(seed)
        st = bundle.stylizer
        flat_codec = MotionCodec(bundle.skeleton.feature_dim, variant="none")
        flat_stylizer = Stylizer(
            flat_codec.latent_dim, content_dim=st.content_dim,
            style_dim=st.style_dim, hidden=st.hidden,
            n_styles=st.n_styles, label_dim=st.label_dim,
            prob_style=st.prob_style, prob_content=st.prob_content, rng=rng)
        flat_bundle = ModelBundle(
            codec=flat_codec, stylizer=flat_stylizer, stats=bundle.stats,
            skeleton=bundle.skeleton, gmp=bundle.gmp,
            style_names=bundle.style_names)
        report["no_latent"] = benchmark_forward(flat_bundle, t=t,
                                                repeats=repeats, seed=seed)
        report["latent_over_no_latent"] = (
            report["latent"]["median_ms"] / report["no_latent"]["median_ms"])
    if resolved["kernels"]:
        report["kernels"] = _bench_kernels(seed)

    out = Path(args.out) if args.out else None
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=2) + "\n")
        _write_snapshot(out, "bench", resolved)
    line = (f"bench: latent median {report['latent']['median_ms']:.2f} ms "
            f"(IQR {report['latent']['iqr_ms']:.2f})")
    if "no_latent" in report:
        line += (f", no_latent {report['no_latent']['median_ms']:.2f} ms, "
                 f"ratio {report['latent_over_no_latent']:.3f}")
    _log(line)
    if "kernels" in report:
        k = report["kernels"]
        _log(f"bench: conv kernels numba {k['numba_ms']:.3f} ms vs "
             f"numpy {k['numpy_ms']:.3f} ms per forward "
             f"(speedup {k['speedup']:.2f}x)"
             if k.get("numba_ms") else "bench: numba unavailable")
    return 0


def _bench_kernels(seed: int) -> dict:
    """Median per-call time of the conv kernel under each backend."""
    from .nn import backend
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((4, 128, 160)).astype(np.float32)
    w = rng.standard_normal((128, 128, 3)).astype(np.float32)
    b = np.zeros(128, dtype=np.float32)

    def run(name: str) -> float | None:
        if name == "numba" and "numba" not in backend.available_backends():
            return None
        backend.set_backend(name)
        try:
            backend.conv1d_forward(x, w, b, 1, 1)       # warm compile
            times = []
            for _ in range(15):
                t0 = time.perf_counter()
                backend.conv1d_forward(x, w, b, 1, 1)
                times.append((time.perf_counter() - t0) * 1e3)
            return float(np.median(times))
        finally:
            backend.set_backend(None)

    numba_ms = run("numba")
    numpy_ms = run("numpy")
    out = {"numba_ms": numba_ms, "numpy_ms": numpy_ms}
    if numba_ms and numpy_ms:
        out["speedup"] = numpy_ms / numba_ms
    return out


def cmd_inspect(args) -> int:
    path = Path(args.path)
    if not path.exists():
        raise IoError(f"no such path: {path}")
    info: dict = {"path": str(path)}
    if path.is_dir():
        bundle_meta = path / "bundle.json"
        if bundle_meta.exists():
            info["bundle"] = json.loads(bundle_meta.read_text())
        checkpoints = {}
        for header in sorted(path.glob("*.json")):
            if header.name in ("bundle.json", "norm_stats.json",
                               "resolved_config.json", "corpus.json"):
                continue
            if header.name.endswith(".skeleton.json"):
                continue
            base = header.with_suffix("")
            if not base.with_suffix(".bin").exists():
                continue
            meta, tensors = load_checkpoint(base)
            checkpoints[base.name] = {
                "meta": meta,
                "tensors": len(tensors),
                "parameters": int(sum(int(np.prod(t.shape))
                                      for t in tensors.values())),
            }
        if checkpoints:
            info["checkpoints"] = checkpoints
        if not info.get("bundle") and not checkpoints:
            raise IoError(f"{path} holds no recognizable checkpoints")
    else:
        base = path.with_suffix("") if path.suffix in (".json", ".bin") else path
        meta, tensors = load_checkpoint(base)
        info["meta"] = meta
        info["tensors"] = {name: list(t.shape) for name, t in tensors.items()}
    print(json.dumps(info, indent=2, default=str))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--profile", choices=sorted(PROFILES),
                   help="named default set (default: desk)")
    if seed:
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionstyle",
        description="Generative motion stylization in a learned latent space")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--styles", type=int)
    p.add_argument("--contents", type=int)
    p.add_argument("--per-cell", dest="per_cell", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--fps", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("train-codec", help="pretrain the motion codec")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=("vae", "ae", "none"))
    p.add_argument("--latent-dim", dest="latent_dim", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup", type=int)
    p.add_argument("--reg-weight", dest="reg_weight", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_train_codec)

    p = sub.add_parser("train-gmp", help="train the global-motion predictor")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--codec", help="codec dir whose norm stats to reuse")
    p.add_argument("--hidden", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lr", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_train_gmp)

    p = sub.add_parser("train-stylizer",
                       help="train the content/style stylizer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codec", help="pretrained codec dir")
    p.add_argument("--gmp", help="trained global-motion dir to bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("supervised", "unsupervised"))
    p.add_argument("--content-dim", dest="content_dim", type=int)
    p.add_argument("--style-dim", dest="style_dim", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--label-dim", dest="label_dim", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup", type=int)
    p.add_argument("--w-hsa", dest="w_hsa", type=float)
    p.add_argument("--w-cyc", dest="w_cyc", type=float)
    p.add_argument("--w-kl", dest="w_kl", type=float)
    p.add_argument("--mirror", action=argparse.BooleanOptionalAction,
                   default=None, help="mirror augmentation (default on)")
    for flag in ("no-latent", "no-prob-style", "no-homo-style",
                 "no-autoencoding", "no-cycle", "prob-content",
                 "end-to-end"):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                       action="store_const", const=True, default=None,
                       help=f"ablation: {flag.replace('-', ' ')}")
    _add_common(p)
    p.set_defaults(func=cmd_train_stylizer)

    p = sub.add_parser("stylize", help="stylize one motion clip")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("motion", "label", "prior"))
    p.add_argument("--content", required=True)
    p.add_argument("--style")
    p.add_argument("--style-b", dest="style_b")
    p.add_argument("--label", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--sample", action="store_const", const=True,
                   default=None, help="sample the style distribution")
    p.add_argument("--use-gmp", dest="use_gmp",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_stylize)

    p = sub.add_parser("interpolate", help="blend two style sources")
    p.add_argument("--model", required=True)
    p.add_argument("--content", required=True)
    p.add_argument("--style-a", dest="style_a", required=True)
    p.add_argument("--style-b", dest="style_b", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--label", type=int)
    p.add_argument("--use-gmp", dest="use_gmp",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("evaluate", help="run the repeated metric protocol")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="corpus of content clips")
    p.add_argument("--styles", help="corpus of style sources (default: --test)")
    p.add_argument("--repeats", type=int)
    p.add_argument("--classifier-steps", dest="classifier_steps", type=int)
    p.add_argument("--classifier-hidden", dest="classifier_hidden", type=int)
    p.add_argument("--diversity-samples", dest="diversity_samples", type=int)
    p.add_argument("--use-gmp", dest="use_gmp",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--dump-features", dest="dump_features",
                   help="write penultimate features CSV for external t-SNE")
    p.add_argument("--out", required=True, help="JSON report path")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="forward-latency benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--frames", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--no-latent-baseline", dest="no_latent_baseline",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="also time a pose-space (identity codec) stylizer")
    p.add_argument("--kernels", action="store_const", const=True,
                   default=None, help="compare conv kernel backends")
    p.add_argument("--out", help="JSON report path")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="print checkpoint metadata")
    p.add_argument("--path", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except Diverged as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    except ModeMismatch as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except MotionStyleError as exc:                    # pragma: no cover
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
