"""Run the full comparison on a synthetic phantom and print the report.

Usage: python scripts/phantom_pipeline_demo.py [OUTDIR]
"""

import json
import sys
from pathlib import Path

from vqdemark import DiscTruth, PipelineConfig, analyze, generate_phantom, write_outputs


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
    truth = DiscTruth(cx=64, cy=64, r=15)
    img = generate_phantom(128, 128, truth.cx, truth.cy, truth.r, seed=7)

    cfg = PipelineConfig(output_dir=outdir)
    art = analyze(img, cfg, truth, input_name="phantom(seed=7)")
    write_outputs(art, cfg)

    print(json.dumps(art.report.to_dict(), indent=2, sort_keys=True))
    print(f"\nwrote {len(list(outdir.iterdir()))} files to {outdir}/", file=sys.stderr)


if __name__ == "__main__":
    main()
