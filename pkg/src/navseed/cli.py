"""Command-line entry point: ``navseed <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import KEYS, ConfigError, RunConfig, format_value, parse_value, read_config_file

log = logging.getLogger("navseed")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ALIASES = {"batch_size": ["--batch"]}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _key_type(spec):
    def conv(text):
        try:
            return parse_value(spec, text)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    conv.__name__ = spec.type.__name__
    return conv


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat 'key = value' file; flags override it")
    g = p.add_argument_group("configuration keys (default, provenance)")
    for name, spec in KEYS.items():
        flags = ["--" + name.replace("_", "-")] + ALIASES.get(name, [])
        g.add_argument(*flags, dest=f"key_{name}", type=_key_type(spec), default=None, metavar=spec.type.__name__.upper(),
                       help=f"{spec.section}; default {format_value(spec.default)} ({spec.provenance})")


def _seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _non_negative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="navseed", description="Expert-seeded DRL navigation: data, training, evaluation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="collect an A*+DWA expert dataset")
    p.add_argument("--map", default="corridor")
    p.add_argument("--episodes", type=_positive, default=200)
    p.add_argument("--max-transitions", type=_positive, default=None)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("pretrain", help="offline TD pretraining on an expert dataset")
    p.add_argument("--algo", choices=["ddpg", "sac", "td3"], default="td3")
    p.add_argument("--data", required=True)
    p.add_argument("--steps", type=_positive, default=20000)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="TrainLog CSV path")
    _add_config_flags(p)

    p = sub.add_parser("train", help="online training (scratch, per, pretrain_per)")
    p.add_argument("--mode", choices=["scratch", "per", "pretrain_per"], required=True)
    p.add_argument("--algo", choices=["ddpg", "sac", "td3"], default="td3")
    p.add_argument("--map", default="corridor")
    p.add_argument("--init", help="pretrained model (pretrain_per)")
    p.add_argument("--expert-data", help="expert dataset (per, pretrain_per)")
    p.add_argument("--env-steps", type=_non_negative, default=30000)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="TrainLog CSV path")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a model's deterministic policy")
    p.add_argument("--model", required=True)
    p.add_argument("--map", default="corridor")
    p.add_argument("--episodes", type=_positive, default=100)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("compare-offline", help="pretrain ddpg, sac and td3 on one dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--steps", type=_positive, default=20000)
    p.add_argument("--seeds", type=_seeds, default=[0, 1, 2])
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)

    p = sub.add_parser("compare-online", help="scratch vs per vs pretrain_per under one budget")
    p.add_argument("--map", default="corridor")
    p.add_argument("--data", required=True)
    p.add_argument("--init", help="pretrained td3 model shared by all seeds; pretrained per seed when omitted")
    p.add_argument("--pretrain-steps", type=_positive, default=20000)
    p.add_argument("--env-steps", type=_positive, default=30000)
    p.add_argument("--seeds", type=_seeds, default=[0, 1, 2])
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)

    p = sub.add_parser("repro", help="run the reproduction suite end to end")
    p.add_argument("--scale", choices=["smoke", "desk"], default="smoke")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=_positive, default=1)
    _add_config_flags(p)
    return ap


def resolve_config(args: argparse.Namespace, base: dict | None = None) -> RunConfig:
    """defaults < ``base`` (command presets) < config file < flags."""
    cfg = RunConfig()
    if base:
        cfg.overlay(base, "preset")
    if getattr(args, "config", None):
        cfg.overlay(read_config_file(args.config), f"file:{args.config}")
    flags = {k: getattr(args, f"key_{k}") for k in KEYS if getattr(args, f"key_{k}", None) is not None}
    cfg.overlay(flags, "flag")
    cfg.validate()
    return cfg


def parse_cli(argv: list[str] | None = None) -> tuple[argparse.Namespace, RunConfig]:
    args = build_parser().parse_args(argv)
    base = {"lr": 3e-4} if args.command == "repro" else None
    try:
        cfg = resolve_config(args, base)
    except ConfigError as exc:
        raise UsageError(f"navseed {args.command}: error: {exc}") from None
    except OSError as exc:
        raise UsageError(f"navseed {args.command}: error: cannot read config: {exc}") from None
    return args, cfg


def _header(args) -> list[str]:
    skip = {"config", "command"}
    parts = [f"{k}={v}" for k, v in sorted(vars(args).items()) if not k.startswith("key_") and k not in skip and v is not None]
    return [f"navseed {args.command} " + " ".join(parts)]


def _parent(path: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def cmd_gen_data(args, cfg: RunConfig) -> int:
    from .expert import build_dataset
    from .sim import resolve_map

    world = resolve_map(args.map)
    _parent(args.out)
    ds, stats = build_dataset(world, args.episodes, cfg.collect, cfg.seed, args.out, args.workers, args.max_transitions)
    cfg.write_sidecar(args.out, _header(args))
    print(f"wrote {len(ds)} transitions to {args.out}; success rate {stats['success_rate']:.3f}")
    if stats.get("warning"):
        print(f"warning: {stats['warning']}", file=sys.stderr)
    return EXIT_OK


def cmd_pretrain(args, cfg: RunConfig) -> int:
    from .drl import pretrain
    from .expert import read_dataset
    from .nn import save_model

    ds = read_dataset(args.data)
    model, tlog = pretrain(ds, args.algo, cfg.hyper, args.steps, cfg.seed, progress_every=1000)
    _parent(args.out)
    save_model(model, args.out)
    if args.log:
        tlog.write_csv(args.log)
    cfg.write_sidecar(args.out, _header(args))
    c = tlog.critic_losses()
    print(f"{args.algo}: {args.steps} updates, critic loss first {c[0]:.4g} last {c[-1]:.4g}; model -> {args.out}")
    return EXIT_OK


def cmd_train(args, cfg: RunConfig) -> int:
    from .drl import ExpertBuffer, online_train
    from .expert import read_dataset
    from .nn import load_model, save_model
    from .sim import NavEnv, resolve_map

    hp = cfg.hyper
    if args.mode == "pretrain_per" and not args.init:
        raise UsageError("navseed train: error: --mode pretrain_per needs --init")
    if args.mode != "scratch" and not args.expert_data:
        raise UsageError(f"navseed train: error: --mode {args.mode} needs --expert-data")
    init = load_model(args.init, expect_algo=args.algo) if args.init else None
    expert = ExpertBuffer(read_dataset(args.expert_data), hp.per_alpha, hp.per_eps) if args.mode != "scratch" else None
    env = NavEnv(resolve_map(args.map), cfg.episode, cfg.reward)
    model, tlog = online_train(env, init, expert, args.mode, args.algo, hp, args.env_steps, cfg.seed, progress_every=20)
    _parent(args.out)
    if model is not None:
        save_model(model, args.out)
    if args.log:
        tlog.write_csv(args.log)
    cfg.write_sidecar(args.out, _header(args))
    succ = tlog.successes()
    print(f"{args.mode}/{args.algo}: {len(tlog.episodes)} episodes, "
          f"last-20 success {succ[-20:].mean() if len(succ) else float('nan'):.2f}; model -> {args.out}")
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    from .eval import emit_csv, run_policy
    from .nn import load_model
    from .sim import NavEnv, resolve_map

    model = load_model(args.model)
    env = NavEnv(resolve_map(args.map), cfg.episode, cfg.reward)
    m = run_policy(env, model, args.episodes, cfg.seed, workers=args.workers)
    _parent(args.out)
    emit_csv(m, args.out)
    cfg.write_sidecar(args.out, _header(args))
    print(f"{args.map}: success {m.success_rate:.3f} collision {m.collision_rate:.3f} timeout {m.timeout_rate:.3f} "
          f"mean reward {m.mean_episode_reward:.2f}")
    return EXIT_OK


def cmd_compare_offline(args, cfg: RunConfig) -> int:
    from .eval import compare_offline, emit_csv, emit_svg_curves, log_curves
    from .expert import read_dataset
    from .nn import save_model

    ds = read_dataset(args.data)
    os.makedirs(args.out_dir, exist_ok=True)
    report, logs, models = compare_offline(ds, cfg.hyper, args.steps, args.seeds, progress=log.info)
    emit_csv(report, os.path.join(args.out_dir, "report.csv"))
    emit_csv(report, os.path.join(args.out_dir, "timings.csv"), include_wall_time=True)
    for (algo, seed), tl in logs.items():
        tl.write_csv(os.path.join(args.out_dir, f"offline_{algo}_s{seed}.csv"))
        save_model(models[(algo, seed)], os.path.join(args.out_dir, f"{algo}_s{seed}.navm"))
    curves = log_curves({f"{a} s{s}": tl for (a, s), tl in logs.items()}, "critic_loss", smooth=200)
    emit_svg_curves(curves, os.path.join(args.out_dir, "curves.svg"), "offline critic loss", "update", "critic loss")
    cfg.write_sidecar(os.path.join(args.out_dir, "report.csv"), _header(args))
    for label, row in report.aggregate().items():
        print(f"{label}: end loss {row['end_loss']:.4g}, steps to convergence {row['steps_to_threshold']:.0f}")
    return EXIT_OK


def cmd_compare_online(args, cfg: RunConfig) -> int:
    from .drl import pretrain
    from .eval import compare_online, emit_csv, emit_svg_curves, log_curves
    from .expert import read_dataset
    from .nn import load_model
    from .sim import resolve_map

    ds = read_dataset(args.data)
    hp = cfg.hyper
    if args.init:
        init = load_model(args.init, expect_algo="td3")
    else:
        init = {s: pretrain(ds, "td3", hp, args.pretrain_steps, s)[0] for s in args.seeds}
    os.makedirs(args.out_dir, exist_ok=True)
    report, logs, _ = compare_online(resolve_map(args.map), ds, init, hp, args.env_steps, args.seeds,
                                     episode=cfg.episode, reward=cfg.reward, progress=log.info)
    emit_csv(report, os.path.join(args.out_dir, "report.csv"))
    emit_csv(report, os.path.join(args.out_dir, "timings.csv"), include_wall_time=True)
    for (regime, seed), tl in logs.items():
        tl.write_csv(os.path.join(args.out_dir, f"online_{regime}_s{seed}.csv"))
    curves = log_curves({f"{r} s{s}": tl for (r, s), tl in logs.items()}, "episode_reward", smooth=20)
    emit_svg_curves(curves, os.path.join(args.out_dir, "curves.svg"), "online episode reward", "env step", "reward")
    cfg.write_sidecar(os.path.join(args.out_dir, "report.csv"), _header(args))
    for label, row in report.aggregate().items():
        print(f"{label}: final reward {row.get('final_reward', float('nan')):.1f}, "
              f"final success {row.get('final_success', float('nan')):.2f}")
    return EXIT_OK


def cmd_repro(args, cfg: RunConfig) -> int:
    from .repro import run_reproduction_suite

    ok = run_reproduction_suite(args.out_dir, args.scale, cfg, workers=args.workers, header=_header(args))
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "gen-data": cmd_gen_data,
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare-offline": cmd_compare_offline,
    "compare-online": cmd_compare_online,
    "repro": cmd_repro,
}


def setup_logging() -> None:
    level = os.environ.get("NAVSEED_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.INFO), format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    try:
        args, cfg = parse_cli(argv)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"navseed: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
