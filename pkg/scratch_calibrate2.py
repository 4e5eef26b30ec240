"""Round 2: starved-rate regime for the strategy ablation + smoke bpp margin."""
import json
import sys
import time
from pathlib import Path

import numpy as np
import torch

from sodec.config import validate
from sodec.data import make_synthetic_corpus
from sodec.evaluation import center_crop_multiple, load_image_tensor
from sodec.metrics import ms_ssim
from sodec.training import load_stage_model, run_stage, smoothed, train_all, _fresh_model

from scratch_calibrate import SMALL_MODEL, small_cfg

def main():
    root = Path("scratch_runs")
    corpus = root / "corpus"
    eval_dir = root / "eval"
    out = {}

    # --- strategy ablation in the starved regime, 2 seeds
    for seed in (61, 62):
        for ab in ("rate_annealing", "joint_matched_bpp"):
            cfg = small_cfg(seed, 400, 250, 600, ablation=ab)
            cfg["train"]["stages"]["3"]["lambda_end"] = 0.08
            cfg["train"]["stages"]["3"]["anneal_fraction"] = 0.15
            d = root / f"r2_{ab}_{seed}"
            t0 = time.time()
            res = train_all(cfg, corpus, d, stages=("1", "2", "3"))
            tag = f"{ab[:5]}_{seed}"
            out[f"{tag}_loss"] = smoothed(res["3"].history, "loss", len(res["3"].history))
            out[f"{tag}_bpp"] = smoothed(res["3"].history, "bpp", len(res["3"].history))
            out[f"{tag}_mse"] = smoothed(res["3"].history, "mse", len(res["3"].history))
            print(tag, out[f"{tag}_loss"], out[f"{tag}_bpp"], f"{time.time()-t0:.0f}s")
            sys.stdout.flush()

    # --- smoke stage3 with lambda_end=0.04: does bpp drop below stage1?
    cfg = small_cfg(31, 600, 400, 800)
    cfg["train"]["stages"]["3"]["lambda_end"] = 0.04
    cfg["train"]["stages"]["3"]["anneal_fraction"] = 0.25
    model = load_stage_model(cfg, root / "smoke" / "stage2.pt", "cpu")
    res3 = run_stage(model, cfg, "3", corpus, root / "r2_smoke3")
    out["smoke_s3_bpp_004"] = smoothed(res3.history, "bpp", len(res3.history))
    out["smoke_s3_sm100"] = smoothed(res3.history, "loss", 100)
    out["smoke_s3_smEnd"] = smoothed(res3.history, "loss", len(res3.history))
    print("smoke3@0.04:", out["smoke_s3_bpp_004"], "vs s1 0.2507")
    sys.stdout.flush()

    # --- FGM margin with a second seed
    for seed in (42,):
        vals = {}
        for mode in ("fidelity", "none"):
            cfg_g = small_cfg(seed, 400, 400, 0)
            cfg_g["model"]["fgm"]["mode"] = mode
            d = root / f"r2_fgm_{mode}_{seed}"
            model = _fresh_model(cfg_g, "cpu")
            r1 = run_stage(model, cfg_g, "1", corpus, d)
            model = load_stage_model(cfg_g, r1.checkpoint, "cpu")
            run_stage(model, cfg_g, "2", corpus, d)
            model = load_stage_model(cfg_g, d / "stage2.pt", "cpu")
            model.eval()
            ms = []
            for p in sorted(eval_dir.iterdir()):
                x = center_crop_multiple(load_image_tensor(p)).unsqueeze(0)
                r = model.decompress(model.compress(x))
                ms.append(ms_ssim(x, r.image))
            vals[mode] = float(np.mean(ms))
            print(f"fgm {mode} seed{seed}:", vals[mode]); sys.stdout.flush()
        out[f"fgm_margin_{seed}"] = vals["fidelity"] - vals["none"]

    Path(root / "calibration2.json").write_text(json.dumps(out, indent=1))
    print(json.dumps(out, indent=1))

if __name__ == "__main__":
    main()
