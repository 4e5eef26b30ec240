"""Round 3: smoke lambda_end sizing + shared-pretrain strategy arms."""
import json
import sys
import time
from pathlib import Path

from sodec.training import load_stage_model, run_stage, smoothed
from scratch_calibrate import small_cfg

def main():
    root = Path("scratch_runs")
    corpus = root / "corpus"
    out = {}

    # smoke stage-3 at a decisive anneal target
    for lam_end, steps in ((0.2, 900),):
        cfg = small_cfg(31, 600, 400, steps)
        cfg["train"]["stages"]["3"]["lambda_end"] = lam_end
        cfg["train"]["stages"]["3"]["anneal_fraction"] = 0.15
        model = load_stage_model(cfg, root / "smoke" / "stage2.pt", "cpu")
        t0 = time.time()
        res = run_stage(model, cfg, "3", corpus, root / f"r3_smoke_{lam_end}")
        tag = f"s3lam{lam_end}"
        out[f"{tag}_loss100"] = smoothed(res.history, "loss", 100)
        out[f"{tag}_lossEnd"] = smoothed(res.history, "loss", len(res.history))
        for mark in (200, 400, 600, 800, steps):
            out[f"{tag}_bpp{mark}"] = smoothed(res.history, "bpp", mark)
        print(tag, json.dumps({k: round(v, 4) for k, v in out.items() if k.startswith(tag)}),
              f"{time.time()-t0:.0f}s")
        sys.stdout.flush()

    # strategy arms from the SAME stage-2 checkpoint (matched rate point 0.08)
    for ablation in ("rate_annealing", "joint_matched_bpp"):
        cfg = small_cfg(31, 600, 400, 600, ablation=ablation)
        cfg["train"]["stages"]["3"]["lambda_end"] = 0.08
        cfg["train"]["stages"]["3"]["anneal_fraction"] = 0.15
        model = load_stage_model(cfg, root / "smoke" / "stage2.pt", "cpu")
        res = run_stage(model, cfg, "3", corpus, root / f"r3_strat_{ablation}")
        key = ablation.split("_")[0]
        out[f"{key}_loss"] = smoothed(res.history, "loss", len(res.history))
        out[f"{key}_bpp"] = smoothed(res.history, "bpp", len(res.history))
        print(key, out[f"{key}_loss"], out[f"{key}_bpp"])
        sys.stdout.flush()

    Path(root / "calibration3.json").write_text(json.dumps(out, indent=1))
    print(json.dumps(out, indent=1))

if __name__ == "__main__":
    main()
