"""Command-line entry point.

Three modes on one command:

  fuzzykb --data data/diabetes.arff --baseline --symbols 5 --out out/
  fuzzykb --sweep sweep_spec.json --out out/
  fuzzykb --serve [--port 8000] [--data-dir data] [--persist-dir sessions]

The service port can also come from the FUZZYKB_PORT environment variable.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .errors import EngineError
from .scoring import DISTANCES, IMPLICATORS


@click.command()
@click.option("--data", "data_path", type=click.Path(path_type=Path),
              help="ARFF dataset to run the pipeline on.")
@click.option("--predictions", "predictions_path",
              type=click.Path(path_type=Path),
              help="CSV with one id,class,confidence row per instance.")
@click.option("--baseline", is_flag=True,
              help="Use the built-in nearest-neighbor baseline instead of a "
                   "predictions file.")
@click.option("--symbols", default=5, show_default=True,
              help="Linguistic terms per numeric feature.")
@click.option("--implicator", type=click.Choice(IMPLICATORS),
              default="lukasiewicz", show_default=True)
@click.option("--distance", type=click.Choice(DISTANCES), default="fuzzy",
              show_default=True)
@click.option("--lambda", "smoothing", default=1.0, show_default=True,
              help="Exponential decay rate of the rule similarity.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("out"), show_default=True)
@click.option("--sweep", "sweep_path", type=click.Path(path_type=Path),
              help="Run the sensitivity sweep described by this JSON spec.")
@click.option("--no-svg", is_flag=True, help="Skip SVG charts in sweep mode.")
@click.option("--serve", is_flag=True, help="Start the HTTP service.")
@click.option("--port", type=int, envvar="FUZZYKB_PORT", default=8000,
              show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path),
              default=Path("data"), show_default=True,
              help="Directory the service searches for ARFF datasets.")
@click.option("--persist-dir", type=click.Path(path_type=Path), default=None,
              help="Optional directory for session snapshots.")
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), default=None,
              help="Serve this directory (the built frontend) at /.")
def main(data_path, predictions_path, baseline, symbols, implicator, distance,
         smoothing, out_dir, sweep_path, no_svg, serve, port, host, data_dir,
         persist_dir, ui_dir):
    """Fuzzy symbolic explanation engine."""
    if serve:
        import uvicorn

        from .service import create_app
        app = create_app(datasets_dir=data_dir, persist_dir=persist_dir,
                         ui_dir=ui_dir)
        uvicorn.run(app, host=host, port=port)
        return

    if sweep_path is not None:
        from .sweep import SweepSpec, write_sweep_artifacts
        try:
            spec = SweepSpec.from_json(Path(sweep_path).read_text("utf-8"))
            rows = write_sweep_artifacts(spec, out_dir, svg=not no_svg)
        except (OSError, EngineError, json.JSONDecodeError, TypeError) as exc:
            raise click.ClickException(str(exc)) from exc
        failed = sum(1 for r in rows if r["error"])
        click.echo(f"sweep: {len(rows)} rows ({failed} failed) -> {out_dir}")
        return

    if data_path is None:
        raise click.ClickException(
            "nothing to do: pass --data (pipeline), --sweep, or --serve")
    from .pipeline import run_pipeline
    try:
        summary = run_pipeline(
            data_path, out_dir, predictions_path=predictions_path,
            baseline=baseline, symbols=symbols, implicator=implicator,
            distance=distance, smoothing=smoothing)
    except (OSError, EngineError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
