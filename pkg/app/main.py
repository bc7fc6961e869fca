"""
ROSS-PUF 命令行入口
python -m app.main <command> [options]
"""
import asyncio
import json
import logging
import sys
from typing import List, Optional

from app.cli.router import build_parser
from app.core.config import settings
from app.core.errors import PufError
from app.schemas.responses.commands import CommandResponse

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数并运行子命令；返回退出码"""
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)

    try:
        result = asyncio.run(args.handler(args))
    except PufError as e:
        # 业务错误：一行说明，退出码 2
        logger.error(f"{args.command} failed: {e}")
        print(json.dumps(CommandResponse.error(message=str(e), errors=[type(e).__name__]), ensure_ascii=False))
        return 2
    except Exception as e:
        logger.exception(f"Unhandled error in {args.command}: {e}")
        print(json.dumps(CommandResponse.error(message="内部错误", code=1), ensure_ascii=False))
        return 1

    print(json.dumps(result, ensure_ascii=False, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
