"""The ``forge`` command: generate stories, redraw pages, serve, score text."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .pipeline.images import PreprocessingCache, regenerate_illustration
from .pipeline.job import run_pipeline
from .pipeline.mock import mock_suite, replay_suite
from .pipeline.request import ChildProfile, GenerationRequest, PipelineOptions
from .readability.lexicon import Lexicon
from .readability.scoring import analyze
from .story.document import loads_story, story_to_document

MOCK_CLOCK = "2026-01-01T00:00:00+00:00"


def _build_suite(mode: str, seed: int):
    if mode == "mock":
        return mock_suite(seed=seed)
    if mode == "live":
        from .pipeline.providers import live_suite

        return live_suite()
    if mode.startswith("replay:"):
        return replay_suite(mode.split(":", 1)[1])
    raise SystemExit(f"unknown provider mode {mode!r}")


def _options_for(mode: str, args: argparse.Namespace) -> PipelineOptions:
    options = PipelineOptions(seed=args.seed)
    if mode == "mock" or mode.startswith("replay:"):
        options.clock = lambda: MOCK_CLOCK
    return options


def cmd_generate(args: argparse.Namespace) -> int:
    profile = ChildProfile.from_dict(json.loads(Path(args.profile).read_text("utf-8")))
    request = GenerationRequest(
        profile=profile,
        selected_interests=tuple(s.strip() for s in args.interests.split(",") if s.strip()),
        behavior=args.behavior,
        reward_sticker=args.sticker,
        translate=args.translate,
    )
    suite = _build_suite(args.provider, args.seed)
    job = run_pipeline(request, suite, _options_for(args.provider, args))
    if job.status != "complete":
        print(f"generation failed at {job.failed_stage}: {job.failure_reason}",
              file=sys.stderr)
        return 1
    out = Path(args.out)
    out.write_text(json.dumps(job.story_document, sort_keys=True, ensure_ascii=False,
                              indent=2) + "\n", encoding="utf-8")
    for warning in job.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {out} ({job.story_id})")
    return 0


def cmd_regen_image(args: argparse.Namespace) -> int:
    path = Path(args.story_file)
    doc = json.loads(path.read_text("utf-8"))
    story = loads_story(json.dumps(doc))
    preprocessing = doc.get("preprocessing")
    if not preprocessing:
        print("story file has no preprocessing record; regenerate the story instead",
              file=sys.stderr)
        return 1
    cache = PreprocessingCache.from_dict(preprocessing)
    suite = _build_suite(args.provider, args.seed)
    options = _options_for(args.provider, args)
    try:
        updated, cache, ref = regenerate_illustration(story, cache, args.section_id,
                                                      suite, options)
    except Exception as err:
        print(f"regeneration failed: {err}", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else path
    out.write_text(json.dumps(story_to_document(updated, preprocessing=cache.to_dict()),
                              sort_keys=True, ensure_ascii=False, indent=2) + "\n",
                   encoding="utf-8")
    print(f"{args.section_id} -> {ref} ({out})")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.api import create_app
    from .service.config import ServeConfig
    from .service.core import StoryService

    config = ServeConfig.load(args.config)
    service = StoryService(
        config.storage,
        providers=config.build_providers(),
        worker_pool=config.worker_pool,
        pipeline_options=PipelineOptions(
            image_concurrency=config.image_concurrency,
            max_attempts=config.max_attempts,
            seed=config.seed,
        ),
        seed=config.seed,
    )
    uvicorn.run(create_app(service), host=config.host, port=config.port)
    return 0


def cmd_readability_score(args: argparse.Namespace) -> int:
    text = Path(args.file).read_text("utf-8")
    lexicon = Lexicon.load(args.lexicon) if args.lexicon else Lexicon.bundled()
    exemptions = set(args.exempt.split(",")) if args.exempt else set()
    report = analyze(text, lexicon, exemptions)
    print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge",
                                     description="personalized branching storybooks")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="generate a story document")
    generate.add_argument("--profile", required=True, help="child profile JSON file")
    generate.add_argument("--behavior", required=True, help="target behavior text")
    generate.add_argument("--interests", required=True,
                          help="comma-separated interest names")
    generate.add_argument("--provider", default="mock",
                          help="mock | live | replay:<dir>")
    generate.add_argument("--out", required=True, help="output story file")
    generate.add_argument("--sticker", default=None, help="reward sticker ref")
    generate.add_argument("--translate", action="store_true",
                          help="also translate the story")
    generate.add_argument("--seed", type=int, default=0)
    generate.set_defaults(func=cmd_generate)

    regen = sub.add_parser("regen-image", help="redraw one section's illustration")
    regen.add_argument("story_file")
    regen.add_argument("section_id")
    regen.add_argument("--provider", default="mock")
    regen.add_argument("--out", default=None, help="output file (default: in place)")
    regen.add_argument("--seed", type=int, default=0)
    regen.set_defaults(func=cmd_regen_image)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True, help="YAML config file")
    serve.set_defaults(func=cmd_serve)

    readability = sub.add_parser("readability", help="text measurements")
    readability_sub = readability.add_subparsers(dest="readability_command",
                                                 required=True)
    score = readability_sub.add_parser("score", help="score a text file")
    score.add_argument("file")
    score.add_argument("--lexicon", default=None, help="custom lexicon TSV")
    score.add_argument("--exempt", default=None,
                       help="comma-separated names to exempt from flags")
    score.set_defaults(func=cmd_readability_score)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
