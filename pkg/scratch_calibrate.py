"""Calibration for the acceptance-scale directional experiments (throwaway)."""
import json
import sys
import time
from pathlib import Path

import numpy as np
import torch

from sodec.config import validate
from sodec.data import make_synthetic_corpus
from sodec.evaluation import center_crop_multiple, evaluate_corpus, load_image_tensor
from sodec.metrics import ms_ssim
from sodec.model import load_checkpoint
from sodec.training import load_stage_model, run_stage, smoothed, train_all, _fresh_model

SMALL_MODEL = {
    "latent_channels": 24,
    "hyper_channels": 24,
    "enc_widths": [24, 32, 40],
    "hyper_width": 32,
    "w_channels": 24,
    "transform_width": 32,
    "diff_dec_widths": [40, 32, 24],
    "unet": {"base_width": 24, "levels": 2, "blocks_per_level": 2, "heads": 2},
    "fgm": {"L": 8, "D": 64, "vit_width": 64, "vit_depth": 2, "patch": 16},
}

def small_cfg(seed, s1, s2, s3, s3b=0, **train_over):
    stages = {"1": {"steps": s1}, "2": {"steps": s2}, "3": {"steps": s3}}
    stages["3b"] = {"steps": s3b or 10}
    tr = {"batch": 4, "stages": stages}
    tr.update(train_over)
    return validate({"seed": seed, "model": dict(SMALL_MODEL), "train": tr})

def main():
    t_start = time.time()
    root = Path("scratch_runs"); root.mkdir(exist_ok=True)
    corpus = root / "corpus"
    if not corpus.exists():
        make_synthetic_corpus(corpus, 400, size=64, seed=0)
    eval_dir = root / "eval"
    if not eval_dir.exists():
        make_synthetic_corpus(eval_dir, 8, size=64, seed=999)

    out = {}
    # --- mini smoke: loss decrease + bpp direction
    cfg = small_cfg(31, 600, 400, 600)
    t0 = time.time()
    res = train_all(cfg, corpus, root / "smoke", stages=("1", "2", "3"))
    out["smoke_time_s"] = time.time() - t0
    for s in ("1", "2", "3"):
        h = res[s].history
        out[f"s{s}_sm100"] = smoothed(h, "loss", 100)
        out[f"s{s}_smEnd"] = smoothed(h, "loss", len(h))
    out["s1_bpp"] = smoothed(res["1"].history, "bpp", len(res["1"].history))
    out["s3_bpp"] = smoothed(res["3"].history, "bpp", len(res["3"].history))
    print(json.dumps(out, indent=1)); sys.stdout.flush()

    # --- FGM direction (1 seed here): share stage1+its stage2 data
    for mode, tag in (("fidelity", "fgm_on"), ("none", "fgm_off")):
        cfg_g = small_cfg(41, 400, 350, 0)
        cfg_g["model"]["fgm"]["mode"] = mode
        d = root / f"fgm_{mode}"
        model = _fresh_model(cfg_g, "cpu")
        r1 = run_stage(model, cfg_g, "1", corpus, d)
        model = load_stage_model(cfg_g, r1.checkpoint, "cpu")
        r2 = run_stage(model, cfg_g, "2", corpus, d)
        model = load_stage_model(cfg_g, r2.checkpoint, "cpu")
        model.eval()
        vals = []
        for p in sorted(eval_dir.iterdir()):
            x = center_crop_multiple(load_image_tensor(p)).unsqueeze(0)
            blob = model.compress(x)
            r = model.decompress(blob)
            vals.append(ms_ssim(x, r.image))
        out[tag] = float(np.mean(vals))
        print(tag, out[tag]); sys.stdout.flush()

    # --- alpha direction from the fgm_on stage2
    for alpha, tag in ((1.0, "alpha_on"), (0.0, "alpha_off")):
        cfg_a = small_cfg(41, 400, 350, 450)
        cfg_a["train"]["stages"]["3"]["alpha"] = alpha
        d = root / f"alpha_{alpha}"
        model = load_stage_model(cfg_a, root / "fgm_fidelity" / "stage2.pt", "cpu")
        r3 = run_stage(model, cfg_a, "3", corpus, d)
        # final MSE(x, x_f) on eval set through the real bitstream
        model.eval()
        mses = []
        for p in sorted(eval_dir.iterdir()):
            x = center_crop_multiple(load_image_tensor(p)).unsqueeze(0)
            blob = model.compress(x)
            r = model.decompress(blob, fidelity_only=True)
            mses.append(float(torch.mean((x - r.image) ** 2)))
        out[tag] = float(np.mean(mses))
        print(tag, out[tag]); sys.stdout.flush()

    # --- RA vs joint (1 seed)
    for ab, tag in (("rate_annealing", "ra"), ("joint_matched_bpp", "joint")):
        cfg_r = small_cfg(51, 400, 300, 500, ablation=ab)
        d = root / f"strat_{ab}"
        res = train_all(cfg_r, corpus, d, stages=("1", "2", "3"))
        out[f"{tag}_loss"] = smoothed(res["3"].history, "loss", len(res["3"].history))
        out[f"{tag}_bpp"] = smoothed(res["3"].history, "bpp", len(res["3"].history))
        print(tag, out[f"{tag}_loss"], out[f"{tag}_bpp"]); sys.stdout.flush()

    out["total_s"] = time.time() - t_start
    Path(root / "calibration.json").write_text(json.dumps(out, indent=1))
    print(json.dumps(out, indent=1))

if __name__ == "__main__":
    main()
