"""Command line interface.

Subcommands: compare, train, synth, eval, gradcheck, decode, serve.  Every
run prints its resolved configuration to stderr so stdout stays clean for
reports.  Exit codes follow diff conventions: 0 means no differences,
1 means differences found, 2 means any error.  The LAYOUTDIFF_SEED
environment variable overrides --seed flags for reproducible CI runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .contentstream import StreamError, assign_runs_to_blocks, decode_stream, tokenize_stream
from .docmodel import Document, DocumentError, document_to_dict, load_document, save_document
from .layoutgraph import build_graph
from .matching import MatchError, MatchOptions, match_documents
from .nn import Model, run_gradcheck_suite
from .pipeline import compare_documents
from .synth import config_for_intensity, gen_document, mutate_document
from .textembed import load_external_embeddings
from .training import CorpusSpec, build_corpus, evaluate, greedy_text_match, metrics_csv, train

SEED_ENV = "LAYOUTDIFF_SEED"

_EVAL_ROWS = ("pairs", "splits", "merges", "deleted", "inserted", "overall", "structural")


def _print_config(command: str, cfg: dict) -> None:
    print(f"config[{command}]: {json.dumps(cfg, sort_keys=True)}", file=sys.stderr)


def _resolve_seed(flag_value: int) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return flag_value
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _load_doc(path: str) -> Document:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise RuntimeError(f"cannot read document {path}: {exc}") from None
    try:
        return load_document(data)
    except DocumentError as exc:
        raise RuntimeError(f"{path}: {exc}") from None


def _augment_from_stream(doc: Document, stream_path: str, font_map_path: str, page: int) -> Document:
    tokens = tokenize_stream(Path(stream_path).read_bytes())
    font_map = json.loads(Path(font_map_path).read_text(encoding="utf-8"))
    if page >= len(doc.pages):
        raise RuntimeError(f"stream page {page} out of range ({len(doc.pages)} pages)")
    runs = decode_stream(tokens, font_map, doc.pages[page].height)
    doc, unassigned = assign_runs_to_blocks(runs, doc, page)
    if unassigned:
        print(f"warning: {len(unassigned)} decoded runs landed in no block", file=sys.stderr)
    return doc


def _feature_dump(doc: Document, include_semantic: bool) -> dict:
    g = build_graph(doc, include_semantic)
    return {
        "blocks": [
            {
                "id": g.block_ids[i],
                "semantic": g.sem[i].tolist(),
                "text": g.text[i].tolist(),
                "visual": g.vis[i].tolist(),
                "geometric": g.geo[i].tolist(),
            }
            for i in range(g.n)
        ]
    }


def _report_has_changes(report: dict) -> bool:
    s = report["summary"]
    return bool(
        s["changed"] or s["splits"] or s["merges"] or s["deleted"] or s["inserted"]
    )


def _cmd_compare(args: argparse.Namespace) -> int:
    if not args.server and not args.model:
        raise RuntimeError("compare needs --model (or --server URL)")
    _print_config(
        "compare",
        {
            "a": args.a,
            "b": args.b,
            "model": args.model,
            "server": args.server,
            "mode": args.mode,
            "K": args.K,
            "tau": args.tau,
            "sinkhorn_iters": args.sinkhorn_iters,
            "theta": args.theta,
            "alpha": args.alpha,
            "out": args.out,
        },
    )
    doc1 = _load_doc(args.a)
    doc2 = _load_doc(args.b)
    if args.content_stream:
        if not args.font_map:
            raise RuntimeError("--content-stream requires --font-map")
        doc1 = _augment_from_stream(doc1, args.content_stream, args.font_map, args.stream_page)
    if args.content_stream_b:
        if not args.font_map_b:
            raise RuntimeError("--content-stream-b requires --font-map-b")
        doc2 = _augment_from_stream(
            doc2, args.content_stream_b, args.font_map_b, args.stream_page_b
        )
    emb1 = load_external_embeddings(args.embeddings_a) if args.embeddings_a else None
    emb2 = load_external_embeddings(args.embeddings_b) if args.embeddings_b else None

    options = MatchOptions(
        mode=args.mode,
        K=args.K,
        tau=args.tau,
        sinkhorn_iters=args.sinkhorn_iters,
        theta=args.theta,
        alpha=args.alpha,
    )

    model = None
    if args.model:
        model = Model.load(args.model)
    include_semantic = (
        bool(model.hyper.get("include_semantic", True)) if model is not None else True
    )
    if args.dump_features:
        payload = {
            "doc1": _feature_dump(doc1, include_semantic),
            "doc2": _feature_dump(doc2, include_semantic),
        }
        Path(args.dump_features).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    if args.dump_graph:
        payload = {
            "doc1": build_graph(doc1, include_semantic, emb1).as_dict(),
            "doc2": build_graph(doc2, include_semantic, emb2).as_dict(),
        }
        Path(args.dump_graph).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    if args.server:
        report_dict = _remote_compare(args.server, doc1, doc2, args)
        rendered = json.dumps(report_dict, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
        print(rendered, end="")
        return 1 if _report_has_changes(report_dict) else 0

    report = compare_documents(doc1, doc2, model, options, emb1, emb2)
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    if args.json:
        print(report.to_json(), end="")
    else:
        print(report.render_text(), end="")
    return 1 if report.has_changes else 0


def _remote_compare(server: str, doc1: Document, doc2: Document, args) -> dict:
    import httpx

    payload = {
        "doc1": document_to_dict(doc1),
        "doc2": document_to_dict(doc2),
        "options": {
            "mode": args.mode,
            "K": args.K,
            "tau": args.tau,
            "sinkhorn_iters": args.sinkhorn_iters,
            "theta": args.theta,
            "alpha": args.alpha,
        },
    }
    try:
        resp = httpx.post(server.rstrip("/") + "/compare", json=payload, timeout=120.0)
    except httpx.HTTPError as exc:
        raise RuntimeError(f"server request failed: {exc}") from None
    if resp.status_code != 200:
        raise RuntimeError(f"server returned {resp.status_code}: {resp.text}")
    return resp.json()


def _cmd_train(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    _print_config(
        "train",
        {
            "corpus": args.corpus,
            "out": args.out,
            "epochs": args.epochs,
            "lr": args.lr,
            "batch": args.batch,
            "seed": seed,
            "metrics": args.metrics,
            "early_stop_f1": args.early_stop_f1,
        },
    )
    spec = CorpusSpec.from_json(Path(args.corpus).read_text(encoding="utf-8"))
    model, rows = train(
        seed,
        spec,
        epochs=args.epochs,
        lr=args.lr,
        batch=args.batch,
        early_stop_f1=args.early_stop_f1,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    model.save(args.out)
    if args.metrics:
        Path(args.metrics).write_text(metrics_csv(rows), encoding="utf-8")
    final = rows[-1] if rows else (0, float("nan"), float("nan"))
    print(
        f"saved {args.out} ({model.num_values} values) "
        f"after {len(rows)} epochs, final loss {final[1]:.4f}, holdout f1 {final[2]:.4f}"
    )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    _print_config(
        "synth",
        {
            "seed": seed,
            "pairs": args.pairs,
            "out": args.out,
            "profile": args.profile,
            "intensity": args.intensity,
            "structural": args.structural,
        },
    )
    if args.pairs < 1:
        raise ValueError("--pairs must be >= 1")
    profiles = ("legal", "article") if args.profile == "both" else (args.profile,)
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    for k in range(args.pairs):
        pair_seed = seed * 100003 + k
        doc1 = gen_document(pair_seed, profiles[k % len(profiles)])
        cfg = config_for_intensity(args.intensity, args.structural, seed=pair_seed + 17)
        doc2, gt = mutate_document(doc1, cfg)
        pair_dir = root / f"pair{k:03d}"
        pair_dir.mkdir(exist_ok=True)
        (pair_dir / "a.json").write_bytes(save_document(doc1))
        (pair_dir / "b.json").write_bytes(save_document(doc2))
        (pair_dir / "gt.json").write_text(
            json.dumps(gt.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    print(f"wrote {args.pairs} pair directories under {root}")
    return 0


def _print_metrics(metrics: dict, label: str) -> None:
    print(label)
    print(f"  {'category':<12} {'precision':>9} {'recall':>9} {'f1':>9}")
    for cat in _EVAL_ROWS:
        m = metrics[cat]
        print(f"  {cat:<12} {m['precision']:>9.3f} {m['recall']:>9.3f} {m['f1']:>9.3f}")


def _cmd_eval(args: argparse.Namespace) -> int:
    _print_config(
        "eval",
        {
            "corpus": args.corpus,
            "model": args.model,
            "mode": args.mode,
            "theta": args.theta,
            "alpha": args.alpha,
            "baseline": args.baseline,
        },
    )
    spec = CorpusSpec.from_json(Path(args.corpus).read_text(encoding="utf-8"))
    model = Model.load(args.model)
    samples = build_corpus(spec)
    metrics = evaluate(model, samples, mode=args.mode, theta=args.theta, alpha=args.alpha)
    _print_metrics(metrics, f"model {args.model} on {len(samples)} pairs:")
    if args.baseline:
        baseline = evaluate(
            None, samples, mode=args.mode,
            matcher=lambda s: greedy_text_match(s.doc1, s.doc2),
        )
        _print_metrics(baseline, "greedy text-cosine baseline:")
    return 0


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    _print_config(
        "gradcheck", {"instances": args.instances, "seed": args.seed, "tol": args.tol}
    )
    results = run_gradcheck_suite(instances=args.instances, seed=args.seed)
    ok = True
    for name, err in results.items():
        status = "ok" if err < args.tol else "FAIL"
        print(f"{name:<18} max rel err {err:.3e}  {status}")
        ok = ok and err < args.tol
    return 0 if ok else 1


def _cmd_decode(args: argparse.Namespace) -> int:
    _print_config(
        "decode",
        {
            "content_stream": args.content_stream,
            "font_map": args.font_map,
            "doc": args.doc,
            "page": args.page,
            "page_height": args.page_height,
            "out": args.out,
        },
    )
    if args.doc:
        doc = _load_doc(args.doc)
        if args.page >= len(doc.pages):
            raise RuntimeError(f"page {args.page} out of range ({len(doc.pages)} pages)")
        page_h = doc.pages[args.page].height
    else:
        doc = None
        page_h = args.page_height
    tokens = tokenize_stream(Path(args.content_stream).read_bytes())
    font_map = json.loads(Path(args.font_map).read_text(encoding="utf-8"))
    runs = decode_stream(tokens, font_map, page_h)

    if doc is None:
        payload = [
            {
                "text": r.text,
                "font": r.font_family,
                "bold": r.bold,
                "italic": r.italic,
                "size": r.size,
                "color": list(r.color),
                "anchor": [x, y],
            }
            for r, (x, y) in runs
        ]
        rendered = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
        else:
            print(rendered, end="")
        return 0

    augmented, unassigned = assign_runs_to_blocks(runs, doc, args.page)
    rendered = save_document(augmented)
    if args.out:
        Path(args.out).write_bytes(rendered)
    else:
        sys.stdout.write(rendered.decode("utf-8"))
    if unassigned:
        sidecar = [
            {"text": r.text, "anchor": [x, y]} for r, (x, y) in unassigned
        ]
        print(f"warning: {len(unassigned)} unassigned runs", file=sys.stderr)
        if args.out:
            Path(args.out + ".unassigned.json").write_text(
                json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
        else:
            print(json.dumps(sidecar, sort_keys=True), file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    _print_config("serve", {"model": args.model, "host": args.host, "port": args.port})
    import uvicorn

    from .service import create_app

    app = create_app(args.model)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layoutdiff", description="Block-level document comparison."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="diff two document files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--model", help="trained model file")
    p.add_argument("--mode", choices=("one2one", "many2many"), default="one2one")
    p.add_argument("--K", type=int, default=None, help="matcher iterations")
    p.add_argument("--tau", type=float, default=None, help="Sinkhorn temperature")
    p.add_argument("--sinkhorn-iters", type=int, default=None)
    p.add_argument("--theta", type=float, default=0.10, help="acceptance threshold")
    p.add_argument("--alpha", type=float, default=0.5, help="relative dominance threshold")
    p.add_argument("--out", help="write report JSON here")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.add_argument("--server", help="send the comparison to a running service at this URL")
    p.add_argument("--embeddings-a", help="external per-block text embeddings for A")
    p.add_argument("--embeddings-b", help="external per-block text embeddings for B")
    p.add_argument("--content-stream", help="decode this content stream into A's runs")
    p.add_argument("--font-map", help="font resource map for --content-stream")
    p.add_argument("--stream-page", type=int, default=0)
    p.add_argument("--content-stream-b", help="decode this content stream into B's runs")
    p.add_argument("--font-map-b", help="font resource map for --content-stream-b")
    p.add_argument("--stream-page-b", type=int, default=0)
    p.add_argument("--dump-features", help="write per-block feature arrays here")
    p.add_argument("--dump-graph", help="write both layout graphs here")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("train", help="train a matcher on a synthetic corpus")
    p.add_argument("--corpus", required=True, help="corpus spec JSON")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--seed", type=int, default=0, help="model init seed")
    p.add_argument("--metrics", help="write epoch,loss,f1 CSV here")
    p.add_argument("--early-stop-f1", type=float, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("synth", help="generate mutated document pairs")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--pairs", type=int, default=2)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--profile", choices=("legal", "article", "both"), default="both")
    p.add_argument("--intensity", type=float, default=0.2)
    p.add_argument("--structural", action="store_true", help="enable splits and merges")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("eval", help="score a model against a synthetic corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("one2one", "many2many"), default="one2one")
    p.add_argument("--theta", type=float, default=0.10)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--baseline", action="store_true", help="also score the greedy baseline")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of every layer")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("decode", help="decode a content stream into styled runs")
    p.add_argument("--content-stream", required=True)
    p.add_argument("--font-map", required=True)
    p.add_argument("--doc", help="attach runs to this document's blocks")
    p.add_argument("--page", type=int, default=0)
    p.add_argument("--page-height", type=float, default=792.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", help="model file (default: LAYOUTDIFF_MODEL env)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DocumentError, StreamError, MatchError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
