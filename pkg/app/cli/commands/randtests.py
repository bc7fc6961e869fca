"""
随机性检验命令
nist
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from app.cli.deps import KIND_BATTERY, get_store, load_config, validate_request
from app.core.errors import ArtifactError
from app.db.storage import import_bits
from app.schemas.requests.commands import NistRequest
from app.schemas.responses.commands import BatterySummary, CommandResponse
from app.services.randtests.battery_service import permute_extend, render_table, run_battery, split_sequences
from app.utils.seeds import SeedSchedule

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("nist", help="运行 SP 800-22 检验套件")
    p.add_argument("--input", required=True, help="比特流文件，或每个文件一条序列的目录")
    p.add_argument("--alpha", type=float, help="显著性水平（默认取配置 0.01）")
    p.add_argument("--sequences", type=int, default=1, help="把单个比特流切成的序列数")
    p.add_argument("--permute-block", type=int, help="按该块长（单把密钥长度）追加随机置换")
    p.add_argument("--lenient", action="store_true", help="只检查结构性最小长度")
    p.set_defaults(handler=cmd_nist, default_out="nist")


def load_sequences(path: Path, count: int) -> list:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix != ".json")
        if not files:
            raise ArtifactError(f"目录中没有比特流文件: {path}")
        return [import_bits(p) for p in files]
    return split_sequences(import_bits(path), count)


async def cmd_nist(args: argparse.Namespace) -> dict:
    request = validate_request(
        NistRequest, config=args.config, out=args.out, input=args.input, alpha=args.alpha,
        sequences=args.sequences, permute_block=args.permute_block, lenient=args.lenient,
    )
    config = load_config(request.config)
    params = config.nist.model_copy(update={"strict_minimums": not request.lenient}) if request.lenient else config.nist
    alpha = request.alpha if request.alpha is not None else config.alpha

    if request.permute_block is not None:
        bits = import_bits(request.input) if not request.input.is_dir() else np.concatenate(
            load_sequences(request.input, 1))
        extended = permute_extend(bits, request.permute_block, SeedSchedule(config.master_seed).permutation(0))
        sequences = split_sequences(extended, request.sequences)
    else:
        sequences = load_sequences(request.input, request.sequences)

    report = run_battery(sequences, alpha, params)
    table = render_table(report)

    store = get_store(config)
    out_dir = store.target(request.out, args.default_out)
    report_path = store.write_json(out_dir / "battery.json", KIND_BATTERY, report)
    table_path = store.path(out_dir / "battery.txt")
    table_path.write_text(table, encoding="utf-8")
    print(table, file=sys.stderr)
    return CommandResponse.success(BatterySummary(
        report_path=str(report_path), table_path=str(table_path), all_passed=report.all_passed,
        passed={t.name: f"{t.subtests_passed}/{t.subtests_total}" for t in report.tests},
        skipped=list(report.skipped),
    ).model_dump(), message="检验完成")
