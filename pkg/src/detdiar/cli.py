"""``detdiar`` command line entry point.

Exit status: 0 on success, 1 on domain errors (bad file contents, violated
contracts), 2 on usage errors (unknown flags, missing files).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .cluster import ClusterConfig, pipeline_diarize
from .decode import DecodeConfig, decode_diarization
from .der import ScoringOptions, aggregate_der, compute_der, format_report_table
from .errors import DiarizationError, ParseError
from .formats import (
    ProposalRecord,
    group_by_recording,
    parse_rttm,
    read_embeddings,
    read_proposals,
    write_proposals,
    write_rttm,
)
from .fusion import FusionConfig, fuse_proposals
from .nms import NmsConfig, soft_nms
from .timeline import DiarizationAnnotation


class UsageError(Exception):
    pass


class InputError(Exception):
    """Domain error tied to an input file."""

    def __init__(self, path: str, err: DiarizationError):
        if isinstance(err, ParseError):
            msg = f"{path}:{err.lineno}: {err.message}"
        else:
            msg = f"{path}: {err}"
        super().__init__(msg)


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _load(path: str, reader):
    text = _read_text(path)
    try:
        return reader(text)
    except DiarizationError as err:
        raise InputError(path, err) from None


def _emit(text: str | bytes, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if isinstance(text, str) else text.decode())
        return
    target = Path(out)
    data = text.encode("utf-8") if isinstance(text, str) else text
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def nms_text(text: str, cfg: NmsConfig) -> str:
    groups = group_by_recording(read_proposals(text))
    return write_proposals([p for props in groups.values() for p in soft_nms(props, cfg)])


def fuse_records(a: list[ProposalRecord], b: list[ProposalRecord], cfg: FusionConfig) -> str:
    ga, gb = group_by_recording(a), group_by_recording(b)
    out = []
    for rec in sorted(set(ga) | set(gb)):
        out.extend(fuse_proposals(ga.get(rec, []), gb.get(rec, []), cfg))
    return write_proposals(out)


def fuse_text(text_a: str, text_b: str, cfg: FusionConfig) -> str:
    return fuse_records(read_proposals(text_a), read_proposals(text_b), cfg)


def decode_text(text: str, cfg: DecodeConfig) -> str:
    groups = group_by_recording(read_proposals(text))
    return write_rttm({rec: decode_diarization(props, cfg) for rec, props in groups.items()})


def rttm_to_proposals(text: str) -> str:
    anns = parse_rttm(text)
    return write_proposals(
        ProposalRecord(seg.recording_id, seg.start, seg.end, seg.speaker, 1.0, "rttm")
        for rec in sorted(anns)
        for seg in anns[rec].segments
    )


def score_reports(ref: dict[str, DiarizationAnnotation], hyp: dict[str, DiarizationAnnotation],
                  opts: ScoringOptions):
    reports = []
    for rec in sorted(set(ref) | set(hyp)):
        reports.append(
            compute_der(ref.get(rec, DiarizationAnnotation(rec)), hyp.get(rec, DiarizationAnnotation(rec)), opts)
        )
    return reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detdiar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    nd = NmsConfig()
    p = sub.add_parser("nms", help="hard/soft NMS per recording over a proposals file")
    p.add_argument("--in", dest="inp", required=True, metavar="PROPOSALS")
    p.add_argument("--out")
    p.add_argument("--method", choices=["hard", "linear", "gaussian"], default=nd.method)
    p.add_argument("--sigma", type=float, default=nd.sigma)
    p.add_argument("--iou-threshold", type=float, default=nd.iou_threshold)
    p.add_argument("--score-floor", type=float, default=nd.score_floor)
    p.add_argument("--max-in", type=int, default=nd.max_in)
    p.add_argument("--max-out", type=int, default=nd.max_out)
    p.add_argument("--speaker-agnostic", action="store_true",
                   help="suppress across speaker labels too")

    fd = FusionConfig()
    p = sub.add_parser("fuse", help="pool two proposal files and keep the top k per recording")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.add_argument("--k", type=int, default=fd.k)
    p.add_argument("--normalize", choices=["raw", "minmax"], default=fd.normalize)
    p.add_argument("--dedup-iou", type=float, default=fd.dedup_iou)
    p.add_argument("--no-dedup", action="store_true", help="keep exact duplicates")

    dd = DecodeConfig()
    p = sub.add_parser("decode", help="proposals to RTTM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--threshold", type=float, default=dd.score_threshold)
    p.add_argument("--min-duration", type=float, default=dd.min_duration)
    p.add_argument("--max-speakers", type=int, default=dd.max_speakers)

    cd = ClusterConfig()
    p = sub.add_parser("cluster", help="embedding clustering diarizer, DEMB to RTTM")
    p.add_argument("--emb", required=True)
    p.add_argument("--out")
    p.add_argument("--min-speakers", type=int, default=cd.min_speakers)
    p.add_argument("--max-speakers", type=int, default=cd.max_speakers)
    p.add_argument("--vad-threshold", type=float, default=cd.vad_threshold)
    p.add_argument("--vad-min-duration", type=float, default=cd.vad_min_duration)
    p.add_argument("--vad-merge-gap", type=float, default=cd.vad_merge_gap)
    p.add_argument("--chunk-seconds", type=float, default=cd.chunk_seconds)
    p.add_argument("--linkage-cutoff", type=float, default=cd.linkage_cutoff)

    sd = ScoringOptions()
    p = sub.add_parser("score", help="DER of a hypothesis RTTM against a reference RTTM")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--collar", type=float, default=sd.collar)
    p.add_argument("--exclude-overlap", action="store_true", default=sd.exclude_overlap)
    p.add_argument("--jsonl", help="also write reports as JSON lines to this path")

    p = sub.add_parser("convert", help="translate between proposals and RTTM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--to", choices=["rttm", "proposals"],
                   help="target format (default: the other one, judged by a .rttm suffix)")
    return parser


def run(args: argparse.Namespace) -> None:
    cmd = args.command
    if cmd == "nms":
        cfg = _config(NmsConfig, args.method, args.sigma, args.iou_threshold, args.score_floor,
                        args.max_in, args.max_out, not args.speaker_agnostic)
        text = _read_text(args.inp)
        _emit(_guard(args.inp, nms_text, text, cfg), args.out)
    elif cmd == "fuse":
        cfg = _config(FusionConfig, args.k, args.normalize, None if args.no_dedup else args.dedup_iou)
        a = _load(args.a, read_proposals)
        b = _load(args.b, read_proposals)
        _emit(fuse_records(a, b, cfg), args.out)
    elif cmd == "decode":
        cfg = _config(DecodeConfig, args.threshold, args.min_duration, args.max_speakers)
        text = _read_text(args.inp)
        _emit(_guard(args.inp, decode_text, text, cfg), args.out)
    elif cmd == "cluster":
        cfg = _config(ClusterConfig, args.min_speakers, args.max_speakers, args.vad_threshold,
                            args.vad_min_duration, args.vad_merge_gap, args.chunk_seconds,
                            args.linkage_cutoff)
        path = Path(args.emb)
        if not path.is_file():
            raise UsageError(f"no such file: {args.emb}")
        seq = _guard(args.emb, read_embeddings, path.read_bytes())
        ann = _guard(args.emb, pipeline_diarize, seq, cfg)
        _emit(write_rttm({ann.recording_id: ann}), args.out)
    elif cmd == "score":
        opts = _config(ScoringOptions, args.collar, args.exclude_overlap)
        ref = _load(args.ref, parse_rttm)
        hyp = _load(args.hyp, parse_rttm)
        reports = _guard(f"{args.ref} vs {args.hyp}", score_reports, ref, hyp, opts)
        total = _guard(args.hyp, aggregate_der, reports) if reports else None
        sys.stdout.write(format_report_table(reports, total))
        if args.jsonl:
            rows = reports + ([total] if total else [])
            _emit("".join(r.to_json() + "\n" for r in rows), args.jsonl)
    elif cmd == "convert":
        to = args.to or ("proposals" if args.inp.endswith(".rttm") else "rttm")
        text = _read_text(args.inp)
        if to == "rttm":
            out = _guard(args.inp, decode_text, text, DecodeConfig(score_threshold=0.0))
        else:
            out = _guard(args.inp, rttm_to_proposals, text)
        _emit(out, args.out)


def _config(factory, *args):
    try:
        return factory(*args)
    except ValueError as err:
        raise UsageError(f"invalid option: {err}") from None


def _guard(path: str, fn, *args):
    try:
        return fn(*args)
    except DiarizationError as err:
        raise InputError(path, err) from None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run(args)
    except UsageError as exc:
        print(f"detdiar: error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"detdiar: {exc}", file=sys.stderr)
        return 1
    except DiarizationError as exc:
        print(f"detdiar: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
