"""Command line interface.

Commands:
  explain     one diff -> ranked explanation JSON plus a run manifest
  evaluate    corpus + rationales -> comparison report (markdown + JSON)
  oracle      greedy search vs exhaustive enumeration on one instance
  gen-corpus  write planted instances, sidecars, rationales, fill corpus

Adapter specs:
  classifier  builtin:trigger:<file> | builtin:ngram-classifier:<file> |
              proc:<command> | tcp:<host>:<port>
  filler      builtin:ngram:<file> | proc:<command> | tcp:<host>:<port>

A TOML config file may provide any long flag (underscored); explicit flags
win. All outputs are files (oracle also prints its comparison to stdout);
logs go to stderr. Exit codes: 0 success, 2 configuration error, 3 adapter
unreachable or misbehaving, 4 diff parse error, 5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .adapters import NgramClassifier, NgramFiller, TriggerClassifier
from .errors import (
    AdapterUnavailable,
    EmptyInput,
    EngineError,
    InvalidParams,
    MalformedResponse,
    TooLarge,
)
from .evaluation import Rationale, decide_win, report_table
from .diffs import parse_diff
from .lexer import DEFAULT_KEYWORDS, load_keywords
from .program import tokenize
from .ranking import rank, ranked_to_json
from .remote import ProcTransport, TcpTransport, RemoteClassifier, RemoteFiller
from .search import SearchConfig, filter_added_lines, generate_explanations
from .sedc import sedc_explain
from .synth import (
    brute_force_oracle,
    explanation_key,
    generate_instance,
    instance_classifier,
    instance_filler,
    load_instance,
    write_fill_corpus,
    write_instance,
)

log = logging.getLogger("cfexplain")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ADAPTER = 3
EXIT_PARSE = 4
EXIT_MISMATCH = 5


class ConfigError(Exception):
    pass


def _file_identity(path: Path) -> str:
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return f"sha256:{digest[:16]}"


def _require_file(raw: str) -> Path:
    path = Path(raw)
    if not path.is_file():
        raise ConfigError(f"not a file: {raw}")
    return path


def _build_classifier(spec: str, args):
    """Returns (classifier, identity dict, transport or None)."""
    if spec.startswith("builtin:trigger:"):
        path = _require_file(spec[len("builtin:trigger:"):])
        triggers = [
            line.strip() for line in path.read_text().splitlines()
            if line.strip() and not line.startswith("#")
        ]
        clf = TriggerClassifier(triggers, mode=args.trigger_mode,
                                decision_threshold=args.threshold)
        return clf, {"spec": spec, "identity": _file_identity(path)}, None
    if spec.startswith("builtin:ngram-classifier:"):
        path = _require_file(spec[len("builtin:ngram-classifier:"):])
        clf = NgramClassifier(path.read_text().splitlines(),
                              nll_threshold=args.nll_threshold,
                              decision_threshold=args.threshold)
        return clf, {"spec": spec, "identity": _file_identity(path)}, None
    if spec.startswith("proc:"):
        transport = ProcTransport(spec[len("proc:"):])
        clf = RemoteClassifier(transport)
        return clf, {"spec": spec, "identity": clf.capabilities}, transport
    if spec.startswith("tcp:"):
        host, _, port = spec[len("tcp:"):].rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"bad tcp spec: {spec}")
        transport = TcpTransport(host, int(port), timeout=args.tcp_timeout)
        clf = RemoteClassifier(transport)
        return clf, {"spec": spec, "identity": clf.capabilities}, transport
    raise ConfigError(f"unknown classifier spec: {spec}")


def _build_filler(spec: str, args):
    if spec.startswith("builtin:ngram:"):
        path = _require_file(spec[len("builtin:ngram:"):])
        filler = NgramFiller.from_file(path)
        return filler, {"spec": spec, "identity": _file_identity(path)}, None
    if spec.startswith("proc:"):
        transport = ProcTransport(spec[len("proc:"):])
        filler = RemoteFiller(transport)
        return filler, {"spec": spec, "identity": filler.capabilities}, transport
    if spec.startswith("tcp:"):
        host, _, port = spec[len("tcp:"):].rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"bad tcp spec: {spec}")
        transport = TcpTransport(host, int(port), timeout=args.tcp_timeout)
        filler = RemoteFiller(transport)
        return filler, {"spec": spec, "identity": filler.capabilities}, transport
    raise ConfigError(f"unknown filler spec: {spec}")


def _search_config(args) -> SearchConfig:
    try:
        return SearchConfig(
            max_explanation_size=args.max_size,
            max_iterations=args.iterations,
            mlm_k=args.mlm_k,
            decision_threshold=args.threshold,
            stop_after=args.stop_after,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _keywords(args) -> frozenset[str]:
    if args.keywords:
        return load_keywords(_require_file(args.keywords))
    return DEFAULT_KEYWORDS


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _manifest(command: str, args, config: SearchConfig, adapters: dict,
              timings: dict[str, float]) -> dict:
    return {
        "command": command,
        "config": {
            "max_explanation_size": config.max_explanation_size,
            "max_iterations": config.max_iterations,
            "mlm_k": config.mlm_k,
            "decision_threshold": config.decision_threshold,
            "stop_after": config.stop_after,
            "method": args.method,
            "truncate": args.truncate,
            "added_lines_only": getattr(args, "added_lines_only", False),
            "trigger_mode": args.trigger_mode,
        },
        "adapters": adapters,
        "timings": {k: round(v, 6) for k, v in timings.items()},
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def cmd_explain(args) -> int:
    config = _search_config(args)
    diff_path = _require_file(args.diff)
    diff = parse_diff(diff_path.read_text(), source_name=diff_path.stem)
    program = tokenize(diff, keywords=_keywords(args))
    if not args.classifier:
        raise ConfigError("--classifier is required")
    run_cfex = args.method in ("cfex", "both")
    run_sedc = args.method in ("sedc", "both")
    if run_cfex and not args.filler:
        raise ConfigError("--filler is required for the substitution method")

    transports = []
    timings: dict[str, float] = {}
    try:
        classifier, clf_info, transport = _build_classifier(args.classifier, args)
        if transport:
            transports.append(transport)
        filler = filler_info = None
        if run_cfex:
            filler, filler_info, transport = _build_filler(args.filler, args)
            if transport:
                transports.append(transport)

        original = classifier.predict(program)
        methods: dict[str, list] = {}
        if run_cfex:
            start = time.perf_counter()
            found = generate_explanations(program, classifier, filler, config)
            timings["cfex_s"] = time.perf_counter() - start
            if args.added_lines_only:
                found = filter_added_lines(found, program)
            methods["cfex"] = ranked_to_json(rank(found, program, args.truncate), program)
        if run_sedc:
            start = time.perf_counter()
            found = sedc_explain(program, classifier, config)
            timings["sedc_s"] = time.perf_counter() - start
            if args.added_lines_only:
                found = filter_added_lines(found, program)
            methods["sedc"] = ranked_to_json(rank(found, program, args.truncate), program)
    finally:
        for t in transports:
            t.close()

    out = Path(args.out)
    _write_json(out, {
        "diff_id": diff_path.stem,
        "original": {"label": original.label, "score": original.score},
        "methods": methods,
    })
    adapters = {"classifier": clf_info, "filler": filler_info}
    manifest_path = Path(args.manifest) if args.manifest else out.with_name(out.name + ".manifest.json")
    _write_json(manifest_path, _manifest("explain", args, config, adapters, timings))
    total = sum(len(v) for v in methods.values())
    log.info("explain: %d ranked explanation(s) -> %s", total, out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _search_config(args)
    corpus_dir = Path(args.corpus_dir)
    if not corpus_dir.is_dir():
        raise ConfigError(f"not a directory: {corpus_dir}")
    diff_paths = sorted(corpus_dir.glob("*.diff"))
    if not diff_paths:
        raise ConfigError(f"no .diff files in {corpus_dir}")
    rationale_dir = Path(args.rationale_dir) if args.rationale_dir else corpus_dir
    keywords = _keywords(args)

    transports = []
    shared_classifier = shared_filler = None
    clf_info = filler_info = None
    try:
        if args.classifier:
            shared_classifier, clf_info, transport = _build_classifier(args.classifier, args)
            if transport:
                transports.append(transport)
        if args.filler:
            shared_filler, filler_info, transport = _build_filler(args.filler, args)
            if transport:
                transports.append(transport)
        elif (corpus_dir / "fill_corpus.txt").is_file():
            path = corpus_dir / "fill_corpus.txt"
            shared_filler = NgramFiller.from_file(path)
            filler_info = {"spec": f"builtin:ngram:{path}", "identity": _file_identity(path)}

        jobs = []
        for diff_path in diff_paths:
            sidecar = diff_path.with_suffix(".instance.json")
            if (shared_classifier is None or shared_filler is None) and not sidecar.is_file():
                raise ConfigError(f"no adapter specs and no sidecar for {diff_path.name}")
            jobs.append((diff_path, sidecar))

        outcomes = []
        start_all = time.perf_counter()
        for diff_path, sidecar in jobs:
            diff_id = diff_path.stem
            rationale_path = rationale_dir / f"{diff_id}.rationale.json"
            if not rationale_path.is_file():
                rationale_path = rationale_dir / f"{diff_id}.json"
            if not rationale_path.is_file():
                log.warning("%s: no rationale, skipping", diff_id)
                continue
            try:
                rationale = Rationale.load(rationale_path)
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                log.warning("%s: unreadable rationale (%s), skipping", diff_id, exc)
                continue
            diff = parse_diff(diff_path.read_text(), source_name=diff_id)
            program = tokenize(diff, keywords=keywords)
            if not rationale.fits(program):
                log.warning("%s: rationale index out of range, skipping", diff_id)
                continue
            classifier = shared_classifier
            filler = shared_filler
            if classifier is None or filler is None:
                doc = json.loads(sidecar.read_text())
                if classifier is None:
                    classifier = TriggerClassifier(doc["triggers"], mode="any",
                                                   decision_threshold=args.threshold)
                if filler is None:
                    filler = NgramFiller(doc["neutral_vocab"])
            cfex_all = generate_explanations(program, classifier, filler, config)
            sedc_all = sedc_explain(program, classifier, config)
            outcome = decide_win(
                rank(cfex_all, program, args.truncate),
                rank(sedc_all, program, args.truncate),
                rationale,
                diff_id=diff_id,
                diff_size=len(program.tokens),
                cfex_all=cfex_all,
                sedc_all=sedc_all,
                denominator=args.denominator,
            )
            outcomes.append(outcome)
            log.info("%s: CFEX %s, SEDC %s", diff_id,
                     outcome.verdicts["CFEX"].value, outcome.verdicts["SEDC"].value)
        elapsed = time.perf_counter() - start_all
    finally:
        for t in transports:
            t.close()

    if not outcomes:
        raise ConfigError("no diff had a usable rationale")
    report = report_table(outcomes)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.md").write_text(report.markdown)
    _write_json(out_dir / "report.json", report.data)
    adapters = {"classifier": clf_info or {"spec": "per-instance sidecars"},
                "filler": filler_info or {"spec": "per-instance sidecars"}}
    _write_json(out_dir / "evaluate.manifest.json",
                _manifest("evaluate", args, config, adapters, {"total_s": elapsed}))
    log.info("evaluate: %d diffs -> %s", len(outcomes), out_dir / "report.md")
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = load_instance(_require_file(args.instance))
    classifier = instance_classifier(instance, decision_threshold=args.threshold)
    filler = instance_filler(instance)
    search_cap = args.search_max_size or args.max_size
    config = SearchConfig(
        max_explanation_size=search_cap,
        max_iterations=args.iterations,
        mlm_k=args.mlm_k,
        decision_threshold=args.threshold,
    )
    program = tokenize(instance.diff)
    found = generate_explanations(program, classifier, filler, config)
    search_keys = {explanation_key(e) for e in found}
    oracle_keys = brute_force_oracle(
        instance, classifier, filler, args.max_size,
        k=args.mlm_k, max_groups=args.max_groups,
    )

    def render(keys):
        return sorted(sorted([gid, repl] for gid, repl in key) for key in keys)

    only_search = render(search_keys - oracle_keys)
    only_oracle = render(oracle_keys - search_keys)
    print(json.dumps({
        "diff_id": instance.diff_id,
        "matched": len(search_keys & oracle_keys),
        "only_in_search": only_search,
        "only_in_oracle": only_oracle,
    }, indent=2, sort_keys=True))
    if only_search or only_oracle:
        log.error("%s: search and oracle disagree", instance.diff_id)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    out_dir = Path(args.out_dir)
    instances = []
    for i in range(args.count):
        instance = generate_instance(args.seed + i, args.n_tokens, args.n_triggers)
        write_instance(instance, out_dir)
        instances.append(instance)
    write_fill_corpus(instances, out_dir)
    log.info("gen-corpus: %d instance(s) -> %s", len(instances), out_dir)
    return EXIT_OK


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-size", type=int, default=5,
                        help="largest perturbation domain (default 5)")
    parser.add_argument("--iterations", type=int, default=100,
                        help="growth iterations after the singleton round (default 100)")
    parser.add_argument("--mlm-k", type=int, default=10,
                        help="fill proposals per mask query (default 10)")
    parser.add_argument("--threshold", type=float, default=0.5,
                        help="decision threshold for builtin classifiers (default 0.5)")
    parser.add_argument("--stop-after", type=int, default=None,
                        help="stop once this many explanations were found")
    parser.add_argument("--truncate", type=int, default=5,
                        help="ranked explanations kept per method (default 5)")
    parser.add_argument("--trigger-mode", choices=("any", "all"), default="any",
                        help="builtin:trigger firing rule (default any)")
    parser.add_argument("--nll-threshold", type=float, default=8.0,
                        help="surprisal threshold for builtin:ngram-classifier")
    parser.add_argument("--keywords", default=None,
                        help="file with one keyword per line (replaces the default set)")
    parser.add_argument("--tcp-timeout", type=float, default=60.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfexplain",
        description="Counterfactual explanations for black-box code-diff classifiers.",
    )
    parser.add_argument("--config", default=None, help="TOML file with flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one diff")
    p.add_argument("--diff", required=True)
    p.add_argument("--classifier", default=None)
    p.add_argument("--filler", default=None)
    p.add_argument("--method", choices=("cfex", "sedc", "both"), default="cfex")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--added-lines-only", action="store_true",
                   help="keep only explanations that touch added lines exclusively")
    _add_search_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("evaluate", help="run both methods over a corpus")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--rationale-dir", default=None,
                   help="directory with <diff_id>.rationale.json (default: corpus dir)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--classifier", default=None,
                   help="shared classifier spec (default: per-instance sidecars)")
    p.add_argument("--filler", default=None,
                   help="shared filler spec (default: fill_corpus.txt or sidecars)")
    p.add_argument("--denominator", choices=("explanation", "rationale"),
                   default="explanation", help="alignment denominator")
    p.add_argument("--method", default="both", help=argparse.SUPPRESS)
    _add_search_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="check the search against brute force")
    p.add_argument("--instance", required=True,
                   help="path to <id>.instance.json or <id>.diff")
    p.add_argument("--max-size", type=int, default=2)
    p.add_argument("--search-max-size", type=int, default=None,
                   help="cap the search differently from the oracle (testing aid)")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--mlm-k", type=int, default=10)
    p.add_argument("--max-groups", type=int, default=60)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen-corpus", help="generate planted instances")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-tokens", type=int, default=48)
    p.add_argument("--n-triggers", type=int, choices=(1, 2, 3), default=1)
    p.set_defaults(func=cmd_gen_corpus)

    # subcommands parse into a fresh namespace and copy it over the parent's,
    # so config-file defaults must be planted on every subparser too
    parser.all_parsers = [parser] + list(sub.choices.values())
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and turn the file into parser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    path = Path(known.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}") from exc
    known_flags = {
        "diff", "classifier", "filler", "method", "out", "manifest",
        "added_lines_only", "max_size", "iterations", "mlm_k", "threshold",
        "stop_after", "truncate", "trigger_mode", "nll_threshold", "keywords",
        "tcp_timeout", "corpus_dir", "rationale_dir", "out_dir", "denominator",
        "instance", "search_max_size", "max_groups", "count", "seed",
        "n_tokens", "n_triggers",
    }
    defaults = {}
    for key, value in doc.items():
        name = key.replace("-", "_")
        if name not in known_flags:
            raise ConfigError(f"unknown config key: {key}")
        defaults[name] = value
    for target in getattr(parser, "all_parsers", [parser]):
        target.set_defaults(**defaults)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return args.func(args)
    except (ConfigError, InvalidParams, TooLarge) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (AdapterUnavailable, MalformedResponse) as exc:
        log.error("%s", exc)
        return EXIT_ADAPTER
    except EmptyInput as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except EngineError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
