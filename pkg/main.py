"""
App 진입점 (배치 실험 CLI)
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.core.config import settings
from app.core.exceptions import ConfigError, SummaryError
from app.services.config_service import load_run_config
from app.services.experiment_service import EXIT_CELL_FAILURE, EXIT_CONFIG_ERROR, EXIT_OK, exit_code_for, run
from app.services.summary_service import summarize

# 로깅 설정
logging.basicConfig(
    level=logging.INFO if settings.DEBUG else logging.WARNING,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)

# taskiq 로거 레벨 조정 (너무 많은 로그 방지)
logging.getLogger("taskiq").setLevel(logging.WARNING)

logger = logging.getLogger(__name__)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="hindsight-q",
        description="hindsight 계수 Q-learning 배치 실험 실행기",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="설정 파일의 모든 셀 실행")
    run_parser.add_argument("config", help="YAML 실행 설정 경로")
    run_parser.add_argument("--out", default=None, help="출력 디렉토리 (설정의 output_dir 덮어쓰기)")
    run_parser.add_argument("--jobs", type=int, default=None, help="동시 실행 워커 수")
    run_parser.add_argument(
        "--allow-divergence-study",
        action="store_true",
        help="음수 δ 허용 (발산 셀은 실패가 아닌 보고 대상)",
    )

    summary_parser = sub.add_parser("summarize", help="실행 디렉토리 요약")
    summary_parser.add_argument("run_dir", help="manifest.json이 있는 디렉토리")
    return parser.parse_args(argv)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_run_config(
            args.config,
            out=args.out,
            jobs=args.jobs,
            allow_divergence_study=args.allow_divergence_study,
        )
    except ConfigError as e:
        logger.error(f"설정 오류: {e.detail}")
        print(f"config error: {e.detail}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    manifest = run(config)
    for cell in manifest.cells:
        if cell.status != "completed":
            frame = f" frame={cell.diverged_frame}" if cell.diverged_frame is not None else ""
            print(f"{cell.cell_id}: {cell.status}{frame} {cell.reason or ''}".rstrip(), file=sys.stderr)
    return exit_code_for(manifest)


def cmd_summarize(args: argparse.Namespace) -> int:
    try:
        table = summarize(args.run_dir)
    except SummaryError as e:
        for problem in e.problems:
            print(f"- {problem}", file=sys.stderr)
        return EXIT_CELL_FAILURE
    print(table.to_string(index=False))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_summarize(args)


if __name__ == "__main__":
    sys.exit(main())
