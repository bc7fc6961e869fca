"""
扫描命令
sweep {bitgrid|mrr|ecc|uniqueness}
"""
import argparse
import logging

from app.cli.deps import KIND_SWEEP, get_store, load_config, validate_request
from app.core.config import settings
from app.schemas.requests.commands import SWEEP_KINDS, SweepRequest
from app.schemas.responses.commands import CommandResponse, SweepSummary
from app.services.fuzzy.fuzzy_service import ecc_frame, ecc_sweep, operating_margin
from app.services.metrics.metrics_service import histogram_frame
from app.services.metrics.sweep_service import SweepService, cells_frame, mrr_frame

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("sweep", help="运行扫描并写出 CSV")
    p.add_argument("kind", choices=SWEEP_KINDS)
    p.set_defaults(handler=cmd_sweep, default_out="sweeps")


async def cmd_sweep(args: argparse.Namespace) -> dict:
    request = validate_request(SweepRequest, config=args.config, out=args.out, jobs=args.jobs, kind=args.kind)
    config = load_config(request.config)
    store = get_store(config)
    out_dir = store.target(request.out, args.default_out)
    sweeps = SweepService(config, jobs=request.jobs or settings.JOBS)
    seeds = sweeps.schedule.describe()

    if request.kind == "bitgrid":
        device = sweeps.prepare_device()
        result = await sweeps.sweep_bit_grid(device, config.grids.m_bits, config.grids.n_bits)
        outputs = [store.write_csv(out_dir / "bitgrid.csv", cells_frame(result))]
        if result.operating_intra is not None:
            outputs.append(store.write_csv(out_dir / "hist_intra.csv", histogram_frame(result.operating_intra)))
            outputs.append(store.write_csv(out_dir / "hist_inter.csv", histogram_frame(result.operating_inter)))
        outputs.append(store.write_json(out_dir / "bitgrid.json", KIND_SWEEP, {
            "kind": "bitgrid", "seeds": seeds, "fab_seed": device.fab_seed,
            "operating_point": config.operating_point.model_dump(mode="json"),
            "uniformity": result.uniformity.model_dump() if result.uniformity else None,
        }))
        extra = result.uniformity.model_dump(include={"bit_aliasing", "entropy"}) if result.uniformity else {}
        summary = SweepSummary(kind="bitgrid", outputs=[str(p) for p in outputs], rows=len(result.cells), extra=extra)

    elif request.kind == "mrr":
        rows = await sweeps.sweep_mrr_count(config.grids.mrr_counts)
        outputs = [
            store.write_csv(out_dir / "mrr.csv", mrr_frame(rows)),
            store.write_json(out_dir / "mrr.json", KIND_SWEEP, {"kind": "mrr", "seeds": seeds}),
        ]
        summary = SweepSummary(kind="mrr", outputs=[str(p) for p in outputs], rows=len(rows))

    elif request.kind == "ecc":
        device = sweeps.prepare_device()
        op = config.ecc.operating_point
        keys = await sweeps.operating_keys(device, op, config.ecc.trials + 1, config.budget.inter_challenges)
        # 第一次重复响应作为注册密钥，其余为类内重复
        rows = ecc_sweep(keys.intra[0], keys.intra[1:], keys.inter, config.grids.ecc_t_values)
        margin = operating_margin(rows)
        outputs = [
            store.write_csv(out_dir / "ecc.csv", ecc_frame(rows)),
            store.write_json(out_dir / "ecc.json", KIND_SWEEP, {
                "kind": "ecc", "seeds": seeds, "fab_seed": device.fab_seed,
                "operating_point": op.model_dump(mode="json"), "margin": margin,
            }),
        ]
        if margin:
            logger.info(f"ECC margin: t in [{min(margin)}, {max(margin)}]")
        else:
            logger.warning("ECC sweep found no t with full intra correction and full inter rejection")
        summary = SweepSummary(kind="ecc", outputs=[str(p) for p in outputs], rows=len(rows), margin=margin)

    else:
        stats = await sweeps.collect_inter_device(config.budget.device_count, config.operating_point)
        outputs = [
            store.write_csv(out_dir / "hist_devices.csv", histogram_frame(stats)),
            store.write_json(out_dir / "uniqueness.json", KIND_SWEEP, {
                "kind": "uniqueness", "seeds": seeds, "stats": stats.model_dump(),
            }),
        ]
        summary = SweepSummary(kind="uniqueness", outputs=[str(p) for p in outputs], rows=stats.count,
                               extra={"mean": stats.mean, "std": stats.std})

    return CommandResponse.success(summary.model_dump(), message=f"{request.kind} 扫描完成")
