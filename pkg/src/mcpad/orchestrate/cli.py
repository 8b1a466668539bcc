"""Command line entry points for the full experimental pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import click

from mcpad.orchestrate.workspace import Workspace


def _triple(value: str) -> tuple[int, int, int]:
    parts = [int(v) for v in value.split(",")]
    if len(parts) != 3:
        raise click.BadParameter("expected three comma-separated counts: train,dev,test")
    return tuple(parts)  # type: ignore[return-value]


@click.group()
def main():
    """Multi-channel PAD experiments: data, protocols, training, evaluation."""


@main.command()
@click.option("--workspace", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--bonafide", default="8,4,5", show_default=True, help="train,dev,test video counts")
@click.option("--attacks", default="3,2,2", show_default=True, help="per attack type")
@click.option("--frames", default=2, show_default=True)
@click.option("--size", default=160, show_default=True)
@click.option("--captures/--no-captures", default=True, show_default=True,
              help="also emit the calibration inspector capture set")
def synth(workspace, seed, bonafide, attacks, frames, size, captures):
    """Generate a seeded synthetic dataset (and inspector captures)."""
    from mcpad.dataset import SynthConfig, generate_captures, synth_generate
    from mcpad.dataset.records import ATTACK_TYPES

    ws = Workspace(workspace)
    counts = {"bonafide": _triple(bonafide)}
    counts.update({a: _triple(attacks) for a in ATTACK_TYPES})
    cfg = SynthConfig(counts=counts, frames_per_sample=frames, image_size=(size, size), seed=seed)
    records = synth_generate(cfg, ws.raw_dir)
    if captures:
        generate_captures(ws.root)
    click.echo(f"wrote {len(records)} samples under {ws.raw_dir}")


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--scale", default=1.0, show_default=True)
@click.option("--frames", default=10, show_default=True, help="frames kept per video")
def preprocess(workspace, scale, frames):
    """Build aligned channel cubes for every manifest sample."""
    from mcpad.orchestrate.workspace import preprocess_dataset

    n = preprocess_dataset(Workspace(workspace), scale=scale, frames_per_video=frames)
    click.echo(f"wrote {n} cubes at scale {scale}")


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--kind", default="all", show_default=True,
              help="grandtest-c | impersonation-c | obfuscation-c | all")
def protocol(workspace, kind):
    """Build curated protocols (and leave-one-out splits with --kind all)."""
    from mcpad.protocols import LOO_ATTACKS, build_loo, build_protocol, save_protocol, validate_protocol

    ws = Workspace(workspace)
    manifest = ws.manifest()
    fold_assignment = json.loads((ws.raw_dir / "fold_assignment.json").read_text())
    ws.protocols_dir.mkdir(parents=True, exist_ok=True)

    kinds = ["grandtest-c", "impersonation-c", "obfuscation-c"] if kind == "all" else [kind]
    built = []
    for k in kinds:
        p = build_protocol(manifest, k, fold_assignment)
        report = validate_protocol(p, manifest)
        if not report.ok:
            raise click.ClickException(f"{k}: validation failed: {report.violations[:3]}")
        save_protocol(p, ws.protocols_dir / f"{k}.json")
        built.append(k)
    if kind == "all":
        grandtest = build_protocol(manifest, "grandtest-c", fold_assignment)
        for attack in LOO_ATTACKS:
            p = build_loo(grandtest, attack, manifest)
            save_protocol(p, ws.protocols_dir / f"{p.name}.json")
            built.append(p.name)
    click.echo(f"built protocols: {', '.join(built)}")


def _sweep_spec(protocols, combos, scales, seeds, preset, epochs, lr, batch_size, frames):
    from mcpad.orchestrate.sweep import SweepSpec

    return SweepSpec(
        protocols=[p.strip() for p in protocols.split(",")],
        combos=[c.strip() for c in combos.split(",")],
        scales=[float(s) for s in scales.split(",")],
        seeds=[int(s) for s in seeds.split(",")],
        preset=preset, epochs=epochs, learning_rate=lr, batch_size=batch_size,
        frames_per_video=frames,
    )


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--protocol", "protocol_name", required=True)
@click.option("--combo", required=True)
@click.option("--scale", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--preset", default="desk-scale", show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr", default=1e-4, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--frames", default=10, show_default=True)
def train(workspace, protocol_name, combo, scale, seed, preset, epochs, lr, batch_size, frames):
    """Train one detector and report its test metrics."""
    from mcpad.orchestrate.sweep import run_cell

    spec = _sweep_spec(protocol_name, combo, str(scale), str(seed), preset, epochs, lr,
                       batch_size, frames)
    row = run_cell(Workspace(workspace), protocol_name, combo, scale, seed, spec)
    click.echo(json.dumps(row, indent=2, sort_keys=True))


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--protocol", "protocol_name", required=True)
@click.option("--fold", default="test", show_default=True)
@click.option("--scale", default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def score(workspace, checkpoint_path, protocol_name, fold, scale, out):
    """Score one protocol fold with a trained checkpoint."""
    from mcpad.evaluation import save_scores
    from mcpad.models import load_checkpoint
    from mcpad.orchestrate.sweep import score_fold
    from mcpad.protocols import load_protocol

    ws = Workspace(workspace)
    ckpt = load_checkpoint(checkpoint_path)
    protocol = load_protocol(ws.protocols_dir / f"{protocol_name}.json")
    sf = score_fold(ws, ckpt, protocol, fold, scale)
    save_scores(sf, out)
    click.echo(f"wrote {len(sf.rows)} scores to {out}")


@main.command("eval")
@click.option("--dev", "dev_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--bpcer-target", default=0.01, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def eval_cmd(dev_path, test_path, bpcer_target, out):
    """Select the dev threshold and report test APCER/BPCER/ACER."""
    from mcpad.evaluation import compute_metrics, load_scores, select_threshold

    tau = select_threshold(load_scores(dev_path), bpcer_target)
    report = compute_metrics(load_scores(test_path), tau)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--protocols", required=True)
@click.option("--combos", required=True)
@click.option("--scales", default="1.0", show_default=True)
@click.option("--seeds", default="0", show_default=True)
@click.option("--preset", default="desk-scale", show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr", default=1e-4, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--frames", default=10, show_default=True)
def sweep(workspace, protocols, combos, scales, seeds, preset, epochs, lr, batch_size, frames):
    """Run the full protocol x combo x scale sweep (resumable)."""
    from mcpad.orchestrate.sweep import run_sweep

    spec = _sweep_spec(protocols, combos, scales, seeds, preset, epochs, lr, batch_size, frames)
    ws = Workspace(workspace)
    rows = run_sweep(spec, ws)
    click.echo(f"{len(rows)} cells complete; results in {ws.results_dir / 'sweep.csv'}")


@main.command()
@click.option("--method", default="Mean", show_default=True, help="Mean | LLR | MLP | GMM")
@click.option("--dev", "dev_paths", required=True, help="comma-separated per-channel dev CSVs")
@click.option("--test", "test_paths", required=True, help="comma-separated per-channel test CSVs")
@click.option("--out", required=True, type=click.Path())
@click.option("--bpcer-target", default=0.01, show_default=True)
def fuse(method, dev_paths, test_paths, out, bpcer_target):
    """Score-level fusion of per-channel systems; prints fused test metrics."""
    from mcpad.evaluation import compute_metrics, fuse_scores, load_scores, save_scores, select_threshold

    dev_files = [load_scores(p, fold="dev") for p in dev_paths.split(",")]
    test_files = [load_scores(p, fold="test") for p in test_paths.split(",")]
    fused_dev = fuse_scores(method, dev_files, dev_files)
    fused_test = fuse_scores(method, dev_files, test_files)
    save_scores(fused_test, out)
    tau = select_threshold(fused_dev, bpcer_target)
    click.echo(json.dumps(compute_metrics(fused_test, tau).to_dict(), indent=2, sort_keys=True))


@main.command()
@click.option("--combos", required=True)
@click.option("--results", "results_path", type=click.Path(exists=True), default=None,
              help="sweep.csv to pull ACER values from")
@click.option("--out", required=True, type=click.Path())
def cost(combos, results_path, out):
    """Hardware cost vs ACER rows for the given channel combos."""
    import csv as _csv

    from mcpad.evaluation import cost_report, save_cost_report

    combo_list = [c.strip() for c in combos.split(",")]
    acer: dict[str, float] = {}
    if results_path:
        sums: dict[str, list[float]] = {}
        with open(results_path, newline="") as f:
            for row in _csv.DictReader(f):
                if row["acer_pct"]:
                    sums.setdefault(row["combo"], []).append(float(row["acer_pct"]))
        acer = {combo: sum(v) / len(v) for combo, v in sums.items()}
    rows = cost_report(combo_list, acer)
    save_cost_report(rows, out)
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command("export-embeddings")
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--protocol", "protocol_name", required=True)
@click.option("--fold", default="test", show_default=True)
@click.option("--scale", default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def export_embeddings_cmd(workspace, checkpoint_path, protocol_name, fold, scale, out):
    """Export per-sample feature vectors for projection or feature fusion."""
    from mcpad.models import load_checkpoint
    from mcpad.orchestrate.sweep import export_embeddings
    from mcpad.protocols import load_protocol

    ws = Workspace(workspace)
    ckpt = load_checkpoint(checkpoint_path)
    protocol = load_protocol(ws.protocols_dir / f"{protocol_name}.json")
    ef = export_embeddings(ws, ckpt, protocol, fold, out, scale)
    click.echo(f"wrote {len(ef.rows)} rows to {out}")


@main.command()
@click.option("--workspace", required=True, type=click.Path(exists=True))
@click.option("--port", default=8321, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(workspace, port, host):
    """Run the calibration inspector HTTP service."""
    from mcpad.orchestrate.service import serve_inspector

    click.echo(f"serving calibration inspector on http://{host}:{port}")
    serve_inspector(workspace, port, host)


if __name__ == "__main__":
    main()
