"""Command-line interface: a thin client over the isofade service.

Set ISOFADE_SERVER (or pass --server) to talk to a running service;
otherwise the service runs in-process. Exit codes: 0 success, 1 usage,
2 input/parse error, 3 backend error, 4 validation retries exhausted
(the session file is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from .client import ServiceClient, ServiceError
from .errors import (
    BackendUnavailable,
    BadAudio,
    GenerationFailed,
    IsofadeError,
)

SERVER_ENV = "ISOFADE_SERVER"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_VALIDATION = 4

_BACKEND_CODES = {"backend_unavailable", "bad_audio", "generation_failed"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read_rows(path: str) -> list[list[float]]:
    """Comma-separated numeric rows, one per line; # comments allowed."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split(",")])
    return rows


def _read_int_rows(path: str) -> list[list[int]]:
    return [[int(v) for v in row] for row in _read_rows(path)]


def _dsp_overrides(args) -> dict:
    fields = (
        "trim_threshold_dbfs", "trim_frame_ms", "trim_hop_ms",
        "normalize_peak_dbfs", "crossfade_fraction", "highpass_cutoff_hz",
        "highpass_q", "gate_percentile", "gate_threshold_factor",
        "gate_floor", "normalize_before_trim",
    )
    out = {}
    for name in fields:
        value = getattr(args, f"dsp_{name}", None)
        if value is not None:
            out[name] = value
    return out


def _add_dsp_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("dsp options")
    group.add_argument("--dsp-trim-threshold-dbfs", dest="dsp_trim_threshold_dbfs", type=float)
    group.add_argument("--dsp-trim-frame-ms", dest="dsp_trim_frame_ms", type=float)
    group.add_argument("--dsp-trim-hop-ms", dest="dsp_trim_hop_ms", type=float)
    group.add_argument("--dsp-normalize-peak-dbfs", dest="dsp_normalize_peak_dbfs", type=float)
    group.add_argument("--dsp-crossfade-fraction", dest="dsp_crossfade_fraction", type=float)
    group.add_argument("--dsp-highpass-cutoff-hz", dest="dsp_highpass_cutoff_hz", type=float)
    group.add_argument("--dsp-highpass-q", dest="dsp_highpass_q", type=float)
    group.add_argument("--dsp-gate-percentile", dest="dsp_gate_percentile", type=float)
    group.add_argument("--dsp-gate-threshold-factor", dest="dsp_gate_threshold_factor", type=float)
    group.add_argument("--dsp-gate-floor", dest="dsp_gate_floor", type=float)
    group.add_argument(
        "--dsp-normalize-before-trim", dest="dsp_normalize_before_trim",
        action="store_const", const=True,
    )


def _add_session_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--from", dest="start_emotion", metavar="EMOTION")
    parser.add_argument("--to", dest="goal_emotion", metavar="EMOTION")
    parser.add_argument("--duration", dest="target_duration_s", type=float)
    parser.add_argument("--clip-duration", dest="clip_duration_s", type=float)
    parser.add_argument("--temperature", dest="temperature", type=float)
    parser.add_argument("--seed", dest="seed", type=int)
    parser.add_argument("--backend", dest="backend", choices=("stub", "remote"))
    parser.add_argument("--endpoint", dest="endpoint", help="remote generation service URL")
    parser.add_argument("--instrument", dest="initial_instrument")
    parser.add_argument("--genre", dest="initial_genre")
    parser.add_argument("--mapping", dest="mapping_path", help="mood mapping TSV")
    parser.add_argument("--stats", dest="stats_path", help="tag stats JSON")
    parser.add_argument("--conditioning", dest="conditioning_s", type=float)
    parser.add_argument("--bit-depth", dest="bit_depth", type=int, choices=(16, 32))
    parser.add_argument("--config", help="JSON config file (or a session manifest)")
    _add_dsp_flags(parser)


def _session_config(args) -> dict:
    config: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        # accept either a bare config or a manifest carrying its echo
        config = doc.get("config", doc) if isinstance(doc, dict) else {}
    for name in (
        "start_emotion", "goal_emotion", "target_duration_s", "clip_duration_s",
        "temperature", "seed", "backend", "endpoint", "initial_instrument",
        "initial_genre", "mapping_path", "stats_path", "conditioning_s",
        "bit_depth",
    ):
        value = getattr(args, name, None)
        if value is not None:
            config[name] = value
    # resolve the generation endpoint here so the env var also applies when
    # the session runs on a separately launched server
    if config.get("backend") == "remote" and not config.get("endpoint"):
        from .session import MUSICGEN_URL_ENV

        endpoint = os.environ.get(MUSICGEN_URL_ENV)
        if endpoint:
            config["endpoint"] = endpoint
    dsp = _dsp_overrides(args)
    if dsp:
        config["dsp"] = {**config.get("dsp", {}), **dsp}
    validation = dict(config.get("validation", {}))
    if getattr(args, "validate", False):
        validation["enabled"] = True
    for flag, key in (
        ("classifier_cmd", "classifier_cmd"),
        ("top_m", "top_m"),
        ("tolerance_deg", "tolerance_deg"),
        ("max_retries", "max_retries"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            validation[key] = value
    if validation:
        config["validation"] = validation
    return config


def build_parser() -> _Parser:
    parser = _Parser(prog="isofade", description=__doc__)
    parser.add_argument("--server", help=f"service URL (default: ${SERVER_ENV} or in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)

    p_plan = sub.add_parser("plan", help="print the iso path and segment plan")
    _add_session_flags(p_plan)
    p_plan.add_argument("--show-config", action="store_true",
                        help="print the fully resolved config and exit")
    p_plan.add_argument("--json", action="store_true", dest="as_json")

    p_stats = sub.add_parser("stats", help="build tag statistics from a Jamendo TSV")
    p_stats.add_argument("--tsv", required=True)
    p_stats.add_argument("--out", required=True)

    p_gen = sub.add_parser("generate", help="render a full session WAV + manifest")
    _add_session_flags(p_gen)
    p_gen.add_argument("--out", default="session.wav")
    p_gen.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p_gen.add_argument("--validate", action="store_true",
                       help="enable per-clip emotion validation")
    p_gen.add_argument("--classifier-cmd", dest="classifier_cmd")
    p_gen.add_argument("--top-m", dest="top_m", type=int)
    p_gen.add_argument("--tolerance-deg", dest="tolerance_deg", type=float)
    p_gen.add_argument("--max-retries", dest="max_retries", type=int)
    p_gen.add_argument("--quiet", action="store_true")

    p_post = sub.add_parser("post", help="run the DSP chain over existing WAVs")
    p_post.add_argument("wavs", nargs="+")
    p_post.add_argument("--out", required=True)
    p_post.add_argument("--bit-depth", type=int, default=32, choices=(16, 32))
    p_post.add_argument("--no-trim", action="store_true")
    p_post.add_argument("--no-normalize", action="store_true")
    p_post.add_argument("--no-highpass", action="store_true")
    p_post.add_argument("--no-gate", action="store_true")
    _add_dsp_flags(p_post)

    p_eval = sub.add_parser("eval", help="emotion-alignment metrics on files")
    eval_sub = p_eval.add_subparsers(dest="metric", required=True)

    for name, help_text in (
        ("hamming", "1 - Hamming loss per row"),
        ("subset", "intersection-over-union accuracy per row"),
        ("auprc", "average precision per row"),
    ):
        p = eval_sub.add_parser(name, help=help_text)
        p.add_argument("--truth", required=True, help="binary rows, comma-separated")
        p.add_argument("--scores", required=True, help="score rows, comma-separated")
        if name != "auprc":
            p.add_argument("--threshold", type=float, default=0.5)

    p_clap = eval_sub.add_parser("clap", help="100 x cosine of embedding rows")
    p_clap.add_argument("--audio-emb", required=True)
    p_clap.add_argument("--text-emb", required=True)

    p_kappa = eval_sub.add_parser("kappa", help="Fleiss' kappa over a ratings matrix")
    p_kappa.add_argument("--ratings", required=True)

    p_match = eval_sub.add_parser("match", help="circumplex match for classifier output")
    p_match.add_argument("--probs", required=True, help="JSON {tag: probability}")
    p_match.add_argument("--intended", required=True)
    p_match.add_argument("--top-m", dest="top_m", type=int, default=3)
    p_match.add_argument("--tolerance-deg", dest="tolerance_deg", type=float, default=45.0)
    p_match.add_argument("--mapping", dest="mapping_path")

    p_vm = sub.add_parser("validate-mapping",
                          help="Fleiss' kappa for a mood->emotion pile sort")
    p_vm.add_argument("--ratings", required=True,
                      help="one row per mood tag, rater counts per emotion column")

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _cmd_plan(client: ServiceClient, args) -> int:
    config = _session_config(args)
    if args.show_config:
        resolved = client.defaults()
        for key, value in config.items():
            if isinstance(value, dict):
                resolved.setdefault(key, {}).update(value)
            else:
                resolved[key] = value
        print(json.dumps(resolved, indent=2))
        return EXIT_OK
    plan = client.plan(config)
    if args.as_json:
        print(json.dumps(plan, indent=2))
        return EXIT_OK
    print("path: " + " -> ".join(plan["path"]))
    print(f"segments: {plan['segment_count']}  "
          f"clip {plan['clip_samples']} samples, overlap {plan['overlap_samples']}")
    print(f"untrimmed duration: {plan['duration_s']:.3f} s "
          f"({plan['total_samples']} samples)")
    for seg in plan["segments"]:
        print(f"  [{seg['index']:3d}] {seg['emotion']:10s} mood={seg['mood_tag']}")
    return EXIT_OK


def _cmd_stats(client: ServiceClient, args) -> int:
    with open(args.tsv, "r", encoding="utf-8") as fh:
        tsv_text = fh.read()
    result = client.stats(tsv_text)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(result["stats_json"])
    print(f"{result['record_count']} records, {result['mood_count']} moods "
          f"-> {args.out}")
    for err in result["errors"]:
        print(f"warning: {err}", file=sys.stderr)
    if result["errors"]:
        return EXIT_INPUT
    return EXIT_OK


def _cmd_generate(client: ServiceClient, args) -> int:
    config = _session_config(args)

    def on_progress(status):
        if not args.quiet:
            print(f"\rsegments {status['segments_done']}/{status['segment_count']}",
                  end="", flush=True)

    status = client.run_session(config, on_progress=on_progress)
    if not args.quiet:
        print()
    if status["status"] == "failed":
        print(f"error: {status['error_code']}: {status['message']}", file=sys.stderr)
        manifest_path = args.manifest or args.out + ".manifest.json"
        try:
            partial = client.session_manifest(status["session_id"])
            with open(manifest_path, "wb") as fh:
                fh.write(partial)
            print(f"partial manifest written to {manifest_path}", file=sys.stderr)
        except ServiceError:
            pass
        return EXIT_BACKEND if status["error_code"] in _BACKEND_CODES else EXIT_INPUT

    session_id = status["session_id"]
    wav = client.session_audio(session_id)
    manifest = client.session_manifest(session_id)
    with open(args.out, "wb") as fh:
        fh.write(wav)
    manifest_path = args.manifest or args.out + ".manifest.json"
    with open(manifest_path, "wb") as fh:
        fh.write(manifest)
    print(f"wrote {args.out} ({len(wav)} bytes) and {manifest_path}")
    if status.get("validation_exhausted"):
        print("warning: some segments exhausted validation retries", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_post(client: ServiceClient, args) -> int:
    import base64

    wavs = []
    for path in args.wavs:
        with open(path, "rb") as fh:
            wavs.append(base64.b64encode(fh.read()).decode("ascii"))
    result = client.dsp_process(
        wavs,
        _dsp_overrides(args) or None,
        args.bit_depth,
        do_trim=not args.no_trim,
        do_normalize=not args.no_normalize,
        do_highpass=not args.no_highpass,
        do_gate=not args.no_gate,
    )
    with open(args.out, "wb") as fh:
        fh.write(base64.b64decode(result["wav_b64"]))
    print(f"wrote {args.out} ({result['output_samples']} samples @ "
          f"{result['sample_rate']} Hz from {result['input_clips']} clips)")
    return EXIT_OK


def _cmd_eval(client: ServiceClient, args) -> int:
    if args.metric in ("hamming", "subset"):
        result = client.eval_pairs(
            args.metric, _read_rows(args.truth), _read_rows(args.scores),
            args.threshold,
        )
    elif args.metric == "auprc":
        result = client.eval_pairs(
            "auprc", _read_rows(args.truth), _read_rows(args.scores)
        )
    elif args.metric == "clap":
        result = client.eval_clap(
            _read_rows(args.audio_emb), _read_rows(args.text_emb)
        )
    elif args.metric == "kappa":
        result = client.eval_kappa(_read_int_rows(args.ratings))
        kappa = result["kappa"]
        shown = "undefined" if kappa is None else f"{kappa:.4f}"
        print(f"kappa: {shown} ({result['band']}; {result['subjects']} subjects, "
              f"{result['raters']} raters, {result['categories']} categories)")
        return EXIT_OK
    elif args.metric == "match":
        with open(args.probs, "r", encoding="utf-8") as fh:
            probs = json.load(fh)
        result = client.eval_match(
            probs, args.intended, args.top_m, args.tolerance_deg, args.mapping_path
        )
        verdict = "match" if result["matched"] else "no match"
        print(f"{verdict}: best tag {result['best_tag']!r} -> "
              f"{result['best_emotion']} ({result['angular_error_deg']:.2f} deg)")
        return EXIT_OK
    else:  # pragma: no cover - argparse guards this
        raise _UsageError(f"unknown metric {args.metric}")
    for value in result["per_row"]:
        print(f"{value:.6f}")
    print(f"mean: {result['mean']:.6f}")
    return EXIT_OK


def _cmd_validate_mapping(client: ServiceClient, args) -> int:
    result = client.eval_kappa(_read_int_rows(args.ratings))
    kappa = result["kappa"]
    shown = "undefined" if kappa is None else f"{kappa:.4f}"
    print(f"kappa: {shown} ({result['band']}; {result['subjects']} subjects, "
          f"{result['raters']} raters, {result['categories']} categories)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "serve":
        return _cmd_serve(args)

    client = ServiceClient.connect(args.server or os.environ.get(SERVER_ENV))
    try:
        if args.command == "plan":
            return _cmd_plan(client, args)
        if args.command == "stats":
            return _cmd_stats(client, args)
        if args.command == "generate":
            return _cmd_generate(client, args)
        if args.command == "post":
            return _cmd_post(client, args)
        if args.command == "eval":
            return _cmd_eval(client, args)
        if args.command == "validate-mapping":
            return _cmd_validate_mapping(client, args)
        raise _UsageError(f"unknown command {args.command}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.error_code in _BACKEND_CODES or exc.status_code == 502:
            return EXIT_BACKEND
        return EXIT_INPUT
    except httpx.HTTPError as exc:
        server = args.server or os.environ.get(SERVER_ENV)
        print(f"error: cannot reach isofade service at {server}: {exc}",
              file=sys.stderr)
        return EXIT_BACKEND
    except (BackendUnavailable, BadAudio, GenerationFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (IsofadeError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
