"""
命令行路由
汇总所有子命令
"""
import argparse

from app.cli.commands import device, fuzzy, keys, randtests, sweep
from app.core.config import settings


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="实验配置 JSON（缺省使用默认值）")
    parser.add_argument("--out", help="输出路径（缺省写到输出目录下）")
    parser.add_argument("--jobs", type=int, help=f"并行 CRP 数（默认 {settings.JOBS}）")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="硅光子神经形态 PUF 仿真与密钥生成",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for module in (device, keys, sweep, fuzzy, randtests):
        module.register(subparsers)

    for sub in subparsers.choices.values():
        add_common_arguments(sub)
    return parser
